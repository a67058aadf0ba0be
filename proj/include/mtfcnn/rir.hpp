#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mtfcnn/bands.hpp"
#include "mtfcnn/signal.hpp"

namespace mtfcnn {

enum class Carrier {
  kFullBandWgn,             // white Gaussian noise over the whole band
  kThirdOctaveBandLimited,  // one band-limited noise per octave center
  kEnvelopeOnly,            // c(t) = 1; the deterministic decay envelope
};

std::string to_string(Carrier c);
Carrier carrier_from_string(const std::string& s);

constexpr double kMinT60 = 0.05;
constexpr double kMaxT60 = 10.0;
// Amplitude decay constant: exp(-6.9 t / T60) falls 60 dB in energy at T60.
constexpr double kDecayConstant = 6.9;

struct RirSpec {
  std::vector<double> t60;  // one value, or kNumBands values
  double gain_a = 1.0;
  double duration = 0.0;    // seconds
  double sample_rate = 16000.0;
  std::uint64_t seed = 0;
  Carrier carrier = Carrier::kFullBandWgn;

  // Throws RangeError when a T60 is outside [kMinT60, kMaxT60], the gain is
  // not positive, or the duration is shorter than the longest T60.
  void validate() const;
  bool operator==(const RirSpec&) const = default;
};

// ceil(1.5 * max_t60) seconds.
double default_rir_duration(double max_t60);

struct Rir {
  // Throws ContractError if the signal carries no energy.
  explicit Rir(Signal signal, std::optional<RirSpec> spec = std::nullopt);

  Signal signal;
  std::optional<RirSpec> spec;
};

struct MtfCurve {
  std::vector<double> frequencies;  // Hz, ascending
  std::vector<double> indices;      // in [0, 1]
};

// h(t) = a exp(-6.9 t / T60) c(t). Supports the full-band WGN carrier and
// the envelope-only oracle; deterministic for a fixed seed.
Rir synth_schroeder_rir(const RirSpec& spec);

// Modulation transfer function of the Schroeder model:
//   [1 + (2 pi f_m T60 / 13.8)^2]^(-1/2)
double mtf_analytic(double modulation_hz, double t60);
MtfCurve mtf_analytic_curve(const std::vector<double>& modulation_hz,
                            double t60);

// |sum h^2(t) e^(-j 2 pi f_m t)| / sum h^2(t), clipped to [0, 1].
MtfCurve mtf_from_rir(const Rir& rir, const std::vector<double>& modulation_hz);

// Point-wise mean of curves sharing one frequency grid.
MtfCurve average_mtf(const std::vector<MtfCurve>& curves);

// Unit-RMS Gaussian noise limited to the third-octave band around center_hz
// (upper corner clipped to 0.95 Nyquist).
Signal bandlimited_noise(double center_hz, double duration, double sample_rate,
                         std::uint64_t seed);

// sum_k exp(-6.9 t / T60_k) c_k(t), with c_k the third-octave noise of band k.
Rir reconstruct_rir(const BandT60s& band_t60s, double duration,
                    double sample_rate, std::uint64_t seed);

// WAV (32-bit float) plus "<stem>.json" sidecar with the RirSpec.
void save_rir(const std::filesystem::path& wav_path, const Rir& rir);
Rir load_rir(const std::filesystem::path& wav_path);
std::filesystem::path rir_sidecar_path(const std::filesystem::path& wav_path);

}  // namespace mtfcnn
