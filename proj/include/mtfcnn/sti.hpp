#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "mtfcnn/bands.hpp"
#include "mtfcnn/rir.hpp"

namespace mtfcnn {

constexpr std::size_t kNumModulationFrequencies = 14;

// Constants of the indirect STI method. `band_weights` are the per-band
// (alpha) weights; `redundancy_weights` (beta, 6 values or empty) enable the
// adjacent-band redundancy correction
//   STI = sum_k alpha_k MTI_k - sum_k beta_k sqrt(MTI_k MTI_k+1).
struct StiConfig {
  std::string profile;
  std::vector<double> modulation_frequencies;
  std::array<double, kNumBands> band_weights{};
  std::vector<double> redundancy_weights;
  double snr_clip_db = 15.0;

  // 14 ascending frequencies, non-negative weights, and
  // sum(alpha) - sum(beta) == 1 within 1e-6. Throws ConfigError.
  void validate() const;
};

// Parses a YAML config file (see config/sti/*.yaml).
StiConfig load_sti_config(const std::filesystem::path& path);
std::filesystem::path default_sti_config_path();
// Loads default_sti_config_path(); falls back to the built-in classic
// profile with identical values when the file is absent.
StiConfig default_sti_config();
StiConfig builtin_sti_config();

// Apparent SNR 10 log10(m / (1 - m)), clipped to +-clip dB, mapped to [0, 1].
double ti_from_m(double m, double snr_clip_db = 15.0);

// Mean TI over the configured modulation frequencies. The curve must sample
// exactly those frequencies (ContractError otherwise).
double mti_from_mtf(const MtfCurve& curve, const StiConfig& config);

// Weighted combination of per-band MTIs, clamped to [0, 1].
double sti_from_mtis(const std::array<double, kNumBands>& mti,
                     const StiConfig& config);

// Analytic path: per band the Schroeder MTF of T60_k, then weighted MTIs.
double sti_from_band_t60s(const BandT60s& bands, const StiConfig& config);

struct StiResult {
  double sti = 0.0;
  std::array<double, kNumBands> mti{};
  std::vector<std::string> warnings;
};

// Indirect method on a measured or synthetic RIR: octave-band filtering,
// per-band MTF from the squared response, weighted MTIs. A band with zero
// energy contributes MTI 0 and a warning.
StiResult sti_from_rir(const Rir& rir, const StiConfig& config);

}  // namespace mtfcnn
