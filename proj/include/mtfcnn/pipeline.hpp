#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "mtfcnn/acoustic_params.hpp"
#include "mtfcnn/bands.hpp"
#include "mtfcnn/cnn.hpp"
#include "mtfcnn/corpus.hpp"
#include "mtfcnn/signal.hpp"
#include "mtfcnn/sti.hpp"

namespace mtfcnn {

// One regressor per octave band, models[k] serving kOctaveCenters[k].
struct ModelSet {
  std::array<CnnModel, kNumBands> models;

  // Throws ModelError naming the bands when models[k] was trained for a
  // different band than kOctaveCenters[k].
  void check_bands() const;
};

// Loads band_<hz>.mtf for every band from `dir`.
ModelSet load_models(const std::filesystem::path& dir);
void save_models(const ModelSet& models, const std::filesystem::path& dir);

// Per-band training pairs (TAE row k, ground-truth band T60 k) for every
// entry of the given split, read from corpus_dir.
std::array<std::vector<TrainingSample>, kNumBands> training_samples(
    const CorpusManifest& manifest, const std::filesystem::path& corpus_dir,
    Split which = Split::kTrain);

struct ModelTraining {
  ModelSet models;
  std::array<std::vector<EpochLog>, kNumBands> logs;
  std::array<int, kNumBands> best_epoch{};
};

// Trains the seven regressors independently with the same configuration.
ModelTraining train_models(
    const std::array<std::vector<TrainingSample>, kNumBands>& samples,
    const TrainConfig& config);

struct RoomReport {
  std::string input_id;
  std::string tool_version;
  BandT60s band_t60s = BandT60s::uniform(1.0);
  RoomParams params;          // from the reconstructed RIR
  double sti = 0.0;           // analytic path on the band T60s
  double sti_reconstructed = 0.0;  // indirect method on the reconstructed RIR
  std::uint64_t reconstruction_seed = 0;
  std::size_t averaged_rirs = 1;
  std::string t60_method;
  std::string sti_profile;
  std::vector<std::string> warnings;

  bool operator==(const RoomReport&) const;
};

// TAE matrix -> per-band inference -> band T60s -> reconstructed RIR ->
// room parameters, plus analytic STI. With avg_rirs > 1 the room parameters
// are averaged over that many reconstructions (seed, derived seeds ...).
// Throws SilentInputError, ShortInputError, or ModelError.
RoomReport estimate_all(const Signal& reverberant, const ModelSet& models,
                        const StiConfig& sti_config, std::uint64_t seed,
                        std::size_t avg_rirs = 1, std::string input_id = {});

// Sample Pearson correlation. Throws ContractError for mismatched lengths or
// fewer than 2 points, UndefinedCorrelationError for zero variance.
double pearson_r(const std::vector<double>& x, const std::vector<double>& y);
// Throws ContractError for empty or mismatched inputs.
double rmse(const std::vector<double>& x, const std::vector<double>& y);

enum class Quantity { kT60, kEdt, kC80, kD50, kTs, kSti };
constexpr std::size_t kNumQuantities = 6;
inline constexpr std::array<Quantity, kNumQuantities> kQuantities = {
    Quantity::kT60, Quantity::kEdt, Quantity::kC80,
    Quantity::kD50, Quantity::kTs,  Quantity::kSti};
std::string to_string(Quantity q);  // "t60", "edt", "c80", "d50", "ts", "sti"

// The six evaluated values of one room; C80 of an anechoic response is
// reported as NaN and excluded.
using QuantityValues = std::array<double, kNumQuantities>;
QuantityValues quantities_of(const RoomParams& params, double sti);

struct QuantityStats {
  double rmse = 0.0;
  double pearson_r = 0.0;
  std::size_t n = 0;
  // (ground truth, estimate), sorted ascending.
  std::vector<std::pair<double, double>> scatter;
};

struct EvalReport {
  std::string tool_version;
  std::array<QuantityStats, kNumQuantities> stats;
  std::size_t evaluated = 0;
  std::size_t excluded = 0;
  std::vector<std::string> exclusions;  // "<path>: <reason>"

  const QuantityStats& operator[](Quantity q) const {
    return stats[static_cast<std::size_t>(q)];
  }
  bool operator==(const EvalReport&) const;
};

// Aggregates paired values per quantity. Non-finite pairs are left out.
EvalReport summarize(const std::vector<QuantityValues>& truth,
                     const std::vector<QuantityValues>& estimate);

// Ground truth of an entry: its regenerated true RIR through room_params
// and the indirect STI. Never touches a model.
QuantityValues ground_truth_quantities(const CorpusEntry& entry,
                                       const StiConfig& sti_config,
                                       double sample_rate = 16000.0);

// Runs estimate_all on every test entry of the manifest (paths relative to
// corpus_dir). Entries whose estimation fails are counted and listed.
EvalReport evaluate(const CorpusManifest& manifest,
                    const std::filesystem::path& corpus_dir,
                    const ModelSet& models, const StiConfig& sti_config,
                    std::uint64_t seed, std::size_t avg_rirs = 1);

// JSON with fixed field names; both round-trip exactly.
std::string to_json(const RoomReport& report);
RoomReport room_report_from_json(const std::string& text);
std::string to_json(const EvalReport& report);
EvalReport eval_report_from_json(const std::string& text);

// One "ground_truth,estimate" CSV per quantity: <dir>/scatter_<name>.csv.
std::vector<std::filesystem::path> write_scatter_csvs(
    const EvalReport& report, const std::filesystem::path& dir);

}  // namespace mtfcnn
