#include "mtfcnn/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "mtfcnn/error.hpp"
#include "mtfcnn/random.hpp"
#include "mtfcnn/rir.hpp"
#include "mtfcnn/tae.hpp"
#include "mtfcnn/version.hpp"
#include "mtfcnn/wav.hpp"
#include "parallel.hpp"

namespace mtfcnn {

namespace fs = std::filesystem;

void ModelSet::check_bands() const {
  std::string mismatches;
  for (std::size_t k = 0; k < kNumBands; ++k) {
    const int expected = static_cast<int>(kOctaveCenters[k]);
    if (models[k].band_hz != expected) {
      if (!mismatches.empty()) mismatches += ", ";
      mismatches += "slot " + std::to_string(expected) + " Hz holds a " +
                    std::to_string(models[k].band_hz) + " Hz model";
    }
  }
  if (!mismatches.empty()) throw ModelError("model/band mismatch: " + mismatches);
}

ModelSet load_models(const fs::path& dir) {
  ModelSet set;
  for (std::size_t k = 0; k < kNumBands; ++k) {
    set.models[k] = load_model(dir / model_filename(static_cast<int>(kOctaveCenters[k])));
  }
  set.check_bands();
  return set;
}

void save_models(const ModelSet& set, const fs::path& dir) {
  set.check_bands();
  fs::create_directories(dir);
  for (const CnnModel& m : set.models) save_model(m, dir / model_filename(m.band_hz));
}

std::array<std::vector<TrainingSample>, kNumBands> training_samples(
    const CorpusManifest& manifest, const fs::path& corpus_dir, Split which) {
  std::vector<const CorpusEntry*> picked;
  for (const CorpusEntry& e : manifest.entries) {
    if (e.split == which) picked.push_back(&e);
  }
  if (picked.empty()) {
    throw ContractError("manifest has no " + to_string(which) + " entries");
  }
  std::vector<TaeMatrix> taes(picked.size());
  detail::parallel_for(picked.size(), [&](std::size_t i) {
    const Signal y =
        read_wav(corpus_dir / picked[i]->reverberant_path, manifest.config.sample_rate);
    taes[i] = tae_matrix(y, picked[i]->reverberant_path);
  });
  std::array<std::vector<TrainingSample>, kNumBands> out;
  for (std::size_t i = 0; i < picked.size(); ++i) {
    for (std::size_t k = 0; k < kNumBands; ++k) {
      out[k].push_back({std::move(taes[i].rows[k]), picked[i]->band_t60[k]});
    }
  }
  return out;
}

ModelTraining train_models(const std::array<std::vector<TrainingSample>, kNumBands>& samples,
                           const TrainConfig& config) {
  ModelTraining result;
  detail::parallel_for(kNumBands, [&](std::size_t k) {
    TrainResult r = train(samples[k], config, static_cast<int>(kOctaveCenters[k]));
    result.models.models[k] = std::move(r.model);
    result.logs[k] = std::move(r.log);
    result.best_epoch[k] = r.best_epoch;
  });
  return result;
}

RoomReport estimate_all(const Signal& reverberant, const ModelSet& models,
                        const StiConfig& sti_config, std::uint64_t seed,
                        std::size_t avg_rirs, std::string input_id) {
  if (avg_rirs == 0) throw RangeError("avg_rirs must be at least 1");
  models.check_bands();

  RoomReport report;
  report.input_id = input_id;
  report.tool_version = kToolVersion;
  report.reconstruction_seed = seed;
  report.averaged_rirs = avg_rirs;
  report.t60_method = kT60Method;
  report.sti_profile = sti_config.profile;

  const TaeMatrix tae = tae_matrix(reverberant, std::move(input_id));
  std::array<double, kNumBands> t60{};
  for (std::size_t k = 0; k < kNumBands; ++k) {
    const std::string band = band_label(k) + " Hz";
    if (tae.silent[k]) report.warnings.push_back("band " + band + " is silent");
    double v = forward(models.models[k], tae.rows[k], Mode::kInfer);
    if (!(v >= kMinT60)) {
      report.warnings.push_back("band " + band + " estimate raised to " +
                                std::to_string(kMinT60) + " s");
      v = kMinT60;
    } else if (v > kMaxT60) {
      report.warnings.push_back("band " + band + " estimate lowered to " +
                                std::to_string(kMaxT60) + " s");
      v = kMaxT60;
    }
    t60[k] = v;
  }
  report.band_t60s = BandT60s(t60);
  report.sti = sti_from_band_t60s(report.band_t60s, sti_config);

  const double duration = default_rir_duration(report.band_t60s.max());
  const double rate = reverberant.sample_rate();
  RoomParams sum;
  for (std::size_t i = 0; i < avg_rirs; ++i) {
    const std::uint64_t s = i == 0 ? seed : derive_seed(seed, {i});
    const Rir h = reconstruct_rir(report.band_t60s, duration, rate, s);
    const RoomParams p = room_params(h);
    if (i == 0) {
      const StiResult r = sti_from_rir(h, sti_config);
      report.sti_reconstructed = r.sti;
      for (const auto& w : r.warnings) report.warnings.push_back(w);
    }
    sum.t60 += p.t60;
    sum.edt += p.edt;
    sum.c80.db += p.c80.db;
    sum.c80.anechoic = sum.c80.anechoic || p.c80.anechoic;
    sum.d50 += p.d50;
    sum.ts += p.ts;
  }
  const auto n = static_cast<double>(avg_rirs);
  report.params.t60 = sum.t60 / n;
  report.params.edt = sum.edt / n;
  report.params.c80 = {sum.c80.db / n, sum.c80.anechoic};
  report.params.d50 = sum.d50 / n;
  report.params.ts = sum.ts / n;
  return report;
}

double pearson_r(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ContractError("pearson_r: length mismatch");
  if (x.size() < 2) throw ContractError("pearson_r needs at least 2 points");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw UndefinedCorrelationError("pearson_r: zero variance");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double rmse(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ContractError("rmse: length mismatch");
  if (x.empty()) throw ContractError("rmse of empty vectors");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
  return std::sqrt(s / static_cast<double>(x.size()));
}

std::string to_string(Quantity q) {
  switch (q) {
    case Quantity::kT60: return "t60";
    case Quantity::kEdt: return "edt";
    case Quantity::kC80: return "c80";
    case Quantity::kD50: return "d50";
    case Quantity::kTs: return "ts";
    case Quantity::kSti: return "sti";
  }
  return "?";
}

QuantityValues quantities_of(const RoomParams& p, double sti) {
  return {p.t60, p.edt, p.c80.anechoic ? std::nan("") : p.c80.db, p.d50, p.ts, sti};
}

EvalReport summarize(const std::vector<QuantityValues>& truth,
                     const std::vector<QuantityValues>& estimate) {
  if (truth.size() != estimate.size()) throw ContractError("summarize: length mismatch");
  EvalReport report;
  report.tool_version = kToolVersion;
  report.evaluated = truth.size();
  for (std::size_t q = 0; q < kNumQuantities; ++q) {
    QuantityStats& st = report.stats[q];
    for (std::size_t i = 0; i < truth.size(); ++i) {
      if (std::isfinite(truth[i][q]) && std::isfinite(estimate[i][q])) {
        st.scatter.emplace_back(truth[i][q], estimate[i][q]);
      }
    }
    std::sort(st.scatter.begin(), st.scatter.end());
    st.n = st.scatter.size();
    std::vector<double> x, y;
    for (const auto& [g, e] : st.scatter) {
      x.push_back(g);
      y.push_back(e);
    }
    st.rmse = x.empty() ? std::nan("") : rmse(x, y);
    try {
      st.pearson_r = pearson_r(x, y);
    } catch (const ContractError&) {
      st.pearson_r = std::nan("");
    } catch (const UndefinedCorrelationError&) {
      st.pearson_r = std::nan("");
    }
  }
  return report;
}

QuantityValues ground_truth_quantities(const CorpusEntry& entry, const StiConfig& sti_config,
                                       double sample_rate) {
  RirSpec spec = entry.rir_spec();
  spec.sample_rate = sample_rate;
  const Rir rir = synth_schroeder_rir(spec);
  return quantities_of(room_params(rir), sti_from_rir(rir, sti_config).sti);
}

EvalReport evaluate(const CorpusManifest& manifest, const fs::path& corpus_dir,
                    const ModelSet& models, const StiConfig& sti_config,
                    std::uint64_t seed, std::size_t avg_rirs) {
  models.check_bands();
  std::vector<const CorpusEntry*> test;
  for (const CorpusEntry& e : manifest.entries) {
    if (e.split == Split::kTest) test.push_back(&e);
  }
  if (test.empty()) throw ContractError("manifest has no test entries");

  std::vector<QuantityValues> truth(test.size()), est(test.size());
  std::vector<std::string> errors(test.size());
  detail::parallel_for(test.size(), [&](std::size_t i) {
    const CorpusEntry& e = *test[i];
    try {
      truth[i] = ground_truth_quantities(e, sti_config, manifest.config.sample_rate);
      const Signal y = read_wav(corpus_dir / e.reverberant_path, manifest.config.sample_rate);
      const RoomReport r =
          estimate_all(y, models, sti_config, seed, avg_rirs, e.reverberant_path);
      est[i] = quantities_of(r.params, r.sti);
    } catch (const Error& ex) {
      errors[i] = e.reverberant_path + ": " + ex.what();
    }
  });

  std::vector<QuantityValues> ok_truth, ok_est;
  std::vector<std::string> exclusions;
  for (std::size_t i = 0; i < test.size(); ++i) {
    if (errors[i].empty()) {
      ok_truth.push_back(truth[i]);
      ok_est.push_back(est[i]);
    } else {
      exclusions.push_back(errors[i]);
    }
  }
  EvalReport report = summarize(ok_truth, ok_est);
  report.excluded = exclusions.size();
  report.exclusions = std::move(exclusions);
  return report;
}

}  // namespace mtfcnn
