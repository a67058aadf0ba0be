#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "mtfcnn/error.hpp"
#include "mtfcnn/pipeline.hpp"
#include "mtfcnn/speech.hpp"

using namespace mtfcnn;
namespace fs = std::filesystem;

namespace {

ModelSet untrained() {
  ModelSet s;
  for (std::size_t k = 0; k < kNumBands; ++k) {
    s.models[k] = CnnModel::initialized(static_cast<int>(kOctaveCenters[k]), 10 + k);
    // Positive output so the reconstruction path sees plausible T60s.
    s.models[k].params[s.models[k].layout().fc_b] =
        static_cast<float>(0.3 + 0.1 * static_cast<double>(k));
  }
  return s;
}

}  // namespace

TEST_CASE("pearson correlation") {
  const std::vector<double> x{1, 2, 3, 4};
  CHECK(pearson_r(x, x) == doctest::Approx(1.0));
  CHECK(pearson_r(x, {-1, -2, -3, -4}) == doctest::Approx(-1.0));
  CHECK(std::abs(pearson_r({1, 2, 3}, {1, 2, 4}) - 0.9820) < 1e-3);
  CHECK_THROWS_AS(pearson_r({1, 1, 1}, {1, 2, 3}), UndefinedCorrelationError);
  CHECK_THROWS_AS(pearson_r({1}, {1}), ContractError);
}

TEST_CASE("rmse") {
  CHECK(rmse({1, 2}, {1, 2}) == 0.0);
  CHECK(rmse({0, 0}, {3, 4}) == doctest::Approx(3.535534));
  CHECK(rmse({0, 5}, {3, 4}) == rmse({3, 4}, {0, 5}));
  CHECK_THROWS_AS(rmse({}, {}), ContractError);
}

TEST_CASE("summarizing ground truth against itself") {
  std::vector<QuantityValues> truth;
  for (int i = 0; i < 10; ++i) {
    const double t = 0.2 + 0.3 * i;
    truth.push_back({t, t * 1.1, 10.0 / t, 50.0 + i, t / 13.8, 1.0 / (1.0 + t)});
  }
  const EvalReport r = summarize(truth, truth);
  for (const auto& s : r.stats) {
    CHECK(s.pearson_r == doctest::Approx(1.0));
    CHECK(s.rmse == 0.0);
    CHECK(s.n == 10);
  }
  CHECK(r.excluded == 0);
}

TEST_CASE("estimate_all is deterministic and reports round-trip") {
  const ModelSet models = untrained();
  const Signal x = synthetic_utterance(3);
  const StiConfig cfg = builtin_sti_config();
  const RoomReport a = estimate_all(x, models, cfg, 42, 1, "utt");
  const RoomReport b = estimate_all(x, models, cfg, 42, 1, "utt");
  CHECK(a == b);
  CHECK(a.sti >= 0.0);
  CHECK(a.sti <= 1.0);
  CHECK(a.params.t60 > 0.0);
  CHECK(a.params.d50 >= 0.0);
  CHECK(a.params.d50 <= 100.0);
  CHECK(room_report_from_json(to_json(a)) == a);
  CHECK(a.reconstruction_seed == 42);

  const RoomReport avg = estimate_all(x, models, cfg, 42, 3, "utt");
  CHECK(avg.band_t60s == a.band_t60s);
  CHECK(avg.sti == a.sti);
  CHECK(avg.averaged_rirs == 3);
}

TEST_CASE("estimate_all error paths are distinct") {
  ModelSet models = untrained();
  const StiConfig cfg = builtin_sti_config();
  CHECK_THROWS_AS(estimate_all(Signal::zeros(80000, 16000.0), models, cfg, 1), SilentInputError);
  CHECK_THROWS_AS(estimate_all(synthetic_utterance(0, 0, 4.0), models, cfg, 1), ShortInputError);
  std::swap(models.models[1], models.models[2]);
  try {
    estimate_all(synthetic_utterance(0), models, cfg, 1);
    FAIL("expected a band mismatch");
  } catch (const ModelError& e) {
    const std::string what = e.what();
    CHECK(what.find("250") != std::string::npos);
    CHECK(what.find("500") != std::string::npos);
  }
}

TEST_CASE("model sets save and load by band") {
  const ModelSet models = untrained();
  const fs::path dir = fs::temp_directory_path() / "mtfcnn_test_modelset";
  save_models(models, dir);
  const ModelSet loaded = load_models(dir);
  for (std::size_t k = 0; k < kNumBands; ++k) CHECK(loaded.models[k].params == models.models[k].params);
  fs::copy_file(dir / "band_125.mtf", dir / "band_250.mtf", fs::copy_options::overwrite_existing);
  CHECK_THROWS_AS(load_models(dir), ModelError);
}

TEST_CASE("eval reports round-trip and write scatter files") {
  std::vector<QuantityValues> truth, est;
  for (int i = 0; i < 6; ++i) {
    truth.push_back({0.1 * i, 0.2 * i, i == 2 ? std::nan("") : 1.0 * i, 3.0 * i, 0.01 * i, 0.1 * i});
    est.push_back({0.1 * i + 0.01, 0.2 * i, 1.1 * i, 3.0 * i + 1, 0.01 * i, 0.1 * i - 0.02});
  }
  EvalReport r = summarize(truth, est);
  r.excluded = 1;
  r.exclusions = {"x.wav: broken"};
  CHECK(r[Quantity::kC80].n == 5);
  CHECK(eval_report_from_json(to_json(r)) == r);
  const auto files = write_scatter_csvs(r, fs::temp_directory_path() / "mtfcnn_scatter");
  CHECK(files.size() == 6);
  CHECK(files[0].filename() == "scatter_t60.csv");
}
