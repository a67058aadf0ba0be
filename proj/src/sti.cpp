#include "mtfcnn/sti.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mtfcnn/error.hpp"
#include "mtfcnn/filter.hpp"

namespace mtfcnn {

namespace {

const std::vector<double> kThirdOctaveModulation = {
    0.63, 0.8, 1.0, 1.25, 1.6, 2.0, 2.5, 3.15, 4.0, 5.0, 6.3, 8.0, 10.0, 12.5};

}  // namespace

void StiConfig::validate() const {
  if (modulation_frequencies.size() != kNumModulationFrequencies) {
    throw ConfigError("STI config needs exactly 14 modulation frequencies, got " +
                      std::to_string(modulation_frequencies.size()));
  }
  for (std::size_t i = 0; i < modulation_frequencies.size(); ++i) {
    if (!(modulation_frequencies[i] > 0.0) ||
        (i > 0 && !(modulation_frequencies[i] > modulation_frequencies[i - 1]))) {
      throw ConfigError("STI modulation frequencies must be positive and ascending");
    }
  }
  for (double w : band_weights) {
    if (!(w >= 0.0)) throw ConfigError("STI band weights must be non-negative");
  }
  if (!redundancy_weights.empty() && redundancy_weights.size() != kNumBands - 1) {
    throw ConfigError("STI redundancy weights need 6 values");
  }
  for (double b : redundancy_weights) {
    if (!(b >= 0.0)) throw ConfigError("STI redundancy weights must be non-negative");
  }
  const double alpha = std::accumulate(band_weights.begin(), band_weights.end(), 0.0);
  const double beta =
      std::accumulate(redundancy_weights.begin(), redundancy_weights.end(), 0.0);
  if (std::abs(alpha - beta - 1.0) > 1e-6) {
    throw ConfigError("STI weights must sum to 1 (alpha - beta = " +
                      std::to_string(alpha - beta) + ")");
  }
  if (!(snr_clip_db > 0.0)) throw ConfigError("STI SNR clip must be positive");
}

StiConfig load_sti_config(const std::filesystem::path& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::Exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  StiConfig c;
  try {
    c.profile = root["profile"] ? root["profile"].as<std::string>() : "custom";
    c.modulation_frequencies = root["modulation_frequencies_hz"]
                                   ? root["modulation_frequencies_hz"].as<std::vector<double>>()
                                   : kThirdOctaveModulation;
    const auto centers = root["band_centers_hz"]
                             ? root["band_centers_hz"].as<std::vector<double>>()
                             : std::vector<double>(kOctaveCenters.begin(), kOctaveCenters.end());
    if (!std::equal(centers.begin(), centers.end(), kOctaveCenters.begin(),
                    kOctaveCenters.end())) {
      throw ConfigError(path.string() + ": band centers must be 125..8000 Hz octaves");
    }
    const auto w = root["band_weights"].as<std::vector<double>>();
    if (w.size() != kNumBands) {
      throw ConfigError(path.string() + ": band_weights needs 7 values");
    }
    std::copy(w.begin(), w.end(), c.band_weights.begin());
    if (root["redundancy_weights"]) {
      c.redundancy_weights = root["redundancy_weights"].as<std::vector<double>>();
    }
    if (root["snr_clip_db"]) c.snr_clip_db = root["snr_clip_db"].as<double>();
  } catch (const YAML::Exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  c.validate();
  return c;
}

std::filesystem::path default_sti_config_path() {
  return std::filesystem::path(MTFCNN_CONFIG_DIR) / "sti" / "default.yaml";
}

StiConfig builtin_sti_config() {
  StiConfig c;
  c.profile = "classic-male";
  c.modulation_frequencies = kThirdOctaveModulation;
  c.band_weights = {0.129, 0.143, 0.114, 0.114, 0.186, 0.171, 0.143};
  c.snr_clip_db = 15.0;
  return c;
}

StiConfig default_sti_config() {
  const auto path = default_sti_config_path();
  if (std::filesystem::exists(path)) return load_sti_config(path);
  return builtin_sti_config();
}

double ti_from_m(double m, double snr_clip_db) {
  if (!(m > 0.0)) return 0.0;
  if (!(m < 1.0)) return 1.0;
  const double snr = std::clamp(10.0 * std::log10(m / (1.0 - m)), -snr_clip_db,
                                snr_clip_db);
  return (snr + snr_clip_db) / (2.0 * snr_clip_db);
}

double mti_from_mtf(const MtfCurve& curve, const StiConfig& config) {
  if (curve.frequencies.size() != config.modulation_frequencies.size()) {
    throw ContractError("MTF curve has " + std::to_string(curve.frequencies.size()) +
                        " points, STI config expects " +
                        std::to_string(config.modulation_frequencies.size()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < curve.frequencies.size(); ++i) {
    if (std::abs(curve.frequencies[i] - config.modulation_frequencies[i]) > 1e-9) {
      throw ContractError("MTF curve frequency " + std::to_string(curve.frequencies[i]) +
                          " Hz does not match the STI configuration");
    }
    sum += ti_from_m(curve.indices[i], config.snr_clip_db);
  }
  return sum / static_cast<double>(curve.frequencies.size());
}

double sti_from_mtis(const std::array<double, kNumBands>& mti,
                     const StiConfig& config) {
  double sti = 0.0;
  for (std::size_t k = 0; k < kNumBands; ++k) sti += config.band_weights[k] * mti[k];
  for (std::size_t k = 0; k < config.redundancy_weights.size(); ++k) {
    sti -= config.redundancy_weights[k] * std::sqrt(mti[k] * mti[k + 1]);
  }
  return std::clamp(sti, 0.0, 1.0);
}

double sti_from_band_t60s(const BandT60s& bands, const StiConfig& config) {
  std::array<double, kNumBands> mti{};
  for (std::size_t k = 0; k < kNumBands; ++k) {
    mti[k] = mti_from_mtf(mtf_analytic_curve(config.modulation_frequencies, bands[k]),
                          config);
  }
  return sti_from_mtis(mti, config);
}

StiResult sti_from_rir(const Rir& rir, const StiConfig& config) {
  StiResult r;
  const double fs = rir.signal.sample_rate();
  for (std::size_t k = 0; k < kNumBands; ++k) {
    const Signal band = filter_apply(octave_band_filter(kOctaveCenters[k], fs), rir.signal);
    if (!(band.energy() > 0.0)) {
      r.mti[k] = 0.0;
      r.warnings.push_back("band " + band_label(k) + " Hz has zero energy; MTI set to 0");
      continue;
    }
    // The analysis filter smears the energy envelope by its own response; its
    // MTF (same length, same rate) is divided out so a Dirac response reads 1.
    const Signal own = filter_apply(octave_band_filter(kOctaveCenters[k], fs),
                                    Signal::impulse(rir.signal.size(), fs));
    MtfCurve m = mtf_from_rir(Rir(band), config.modulation_frequencies);
    const MtfCurve f = mtf_from_rir(Rir(own), config.modulation_frequencies);
    for (std::size_t i = 0; i < m.indices.size(); ++i) {
      m.indices[i] = std::clamp(m.indices[i] / f.indices[i], 0.0, 1.0);
    }
    r.mti[k] = mti_from_mtf(m, config);
  }
  r.sti = sti_from_mtis(r.mti, config);
  return r;
}

}  // namespace mtfcnn
