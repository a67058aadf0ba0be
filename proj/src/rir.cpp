#include "mtfcnn/rir.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>
#include <numeric>

#include "json.hpp"

#include "mtfcnn/error.hpp"
#include "mtfcnn/filter.hpp"
#include "mtfcnn/random.hpp"
#include "mtfcnn/wav.hpp"

namespace mtfcnn {

// ---- bands ---------------------------------------------------------------

std::size_t band_index(double center_hz) {
  for (std::size_t k = 0; k < kNumBands; ++k) {
    if (kOctaveCenters[k] == center_hz) return k;
  }
  throw RangeError("no octave band centered at " + std::to_string(center_hz) +
                   " Hz");
}

std::string band_label(std::size_t band) {
  return std::to_string(static_cast<int>(kOctaveCenters.at(band)));
}

BandT60s::BandT60s(std::array<double, kNumBands> values) : values_(values) {
  for (std::size_t k = 0; k < kNumBands; ++k) {
    if (!(values_[k] > 0.0) || !std::isfinite(values_[k])) {
      throw RangeError("band " + band_label(k) + " T60 must be positive, got " +
                       std::to_string(values_[k]));
    }
  }
}

BandT60s BandT60s::uniform(double t60) {
  std::array<double, kNumBands> v;
  v.fill(t60);
  return BandT60s(v);
}

double BandT60s::max() const {
  return *std::max_element(values_.begin(), values_.end());
}

double BandT60s::mean() const {
  return std::accumulate(values_.begin(), values_.end(), 0.0) / kNumBands;
}

// ---- specs ---------------------------------------------------------------

std::string to_string(Carrier c) {
  switch (c) {
    case Carrier::kFullBandWgn:
      return "full-band-wgn";
    case Carrier::kThirdOctaveBandLimited:
      return "third-octave-band-limited";
    case Carrier::kEnvelopeOnly:
      return "envelope-only";
  }
  return "unknown";
}

Carrier carrier_from_string(const std::string& s) {
  if (s == "full-band-wgn") return Carrier::kFullBandWgn;
  if (s == "third-octave-band-limited") return Carrier::kThirdOctaveBandLimited;
  if (s == "envelope-only") return Carrier::kEnvelopeOnly;
  throw RangeError("unknown carrier mode '" + s + "'");
}

void RirSpec::validate() const {
  if (t60.size() != 1 && t60.size() != kNumBands) {
    throw RangeError("RirSpec needs 1 or 7 T60 values");
  }
  for (double t : t60) {
    if (!(t >= kMinT60 && t <= kMaxT60)) {
      throw RangeError("T60 " + std::to_string(t) + " s outside [0.05, 10] s");
    }
  }
  if (!(gain_a > 0.0) || !std::isfinite(gain_a)) {
    throw RangeError("RIR gain must be positive");
  }
  if (!(sample_rate > 0.0)) throw RangeError("RIR sample rate must be positive");
  const double longest = *std::max_element(t60.begin(), t60.end());
  if (!(duration >= longest)) {
    throw RangeError("RIR duration " + std::to_string(duration) +
                     " s is shorter than T60 " + std::to_string(longest) + " s");
  }
}

double default_rir_duration(double max_t60) {
  // Guard against 1.5 * 0.2 = 0.30000000000000004 style round-up.
  return std::ceil(1.5 * max_t60 - 1e-9);
}

Rir::Rir(Signal s, std::optional<RirSpec> sp)
    : signal(std::move(s)), spec(std::move(sp)) {
  if (!(signal.energy() > 0.0)) {
    throw ContractError("RIR has zero energy");
  }
}

// ---- synthesis -----------------------------------------------------------

namespace {

std::size_t sample_count(double duration, double sample_rate) {
  return static_cast<std::size_t>(std::llround(duration * sample_rate));
}

}  // namespace

Rir synth_schroeder_rir(const RirSpec& spec) {
  spec.validate();
  if (spec.t60.size() != 1) {
    throw ContractError("synth_schroeder_rir takes a single full-band T60");
  }
  if (spec.carrier == Carrier::kThirdOctaveBandLimited) {
    throw ContractError(
        "synth_schroeder_rir does not synthesize band-limited carriers; "
        "use reconstruct_rir");
  }
  const std::size_t n = sample_count(spec.duration, spec.sample_rate);
  const double rate = kDecayConstant / (spec.t60[0] * spec.sample_rate);
  std::vector<double> h(n);
  Rng rng(derive_seed(spec.seed, {kTagRirCarrier}));
  for (std::size_t i = 0; i < n; ++i) {
    const double envelope = spec.gain_a * std::exp(-rate * static_cast<double>(i));
    const double carrier =
        spec.carrier == Carrier::kFullBandWgn ? rng.gaussian() : 1.0;
    h[i] = envelope * carrier;
  }
  return Rir(Signal(std::move(h), spec.sample_rate), spec);
}

double mtf_analytic(double modulation_hz, double t60) {
  const double x = 2.0 * std::numbers::pi * modulation_hz * t60 /
                   (2.0 * kDecayConstant);
  return 1.0 / std::sqrt(1.0 + x * x);
}

MtfCurve mtf_analytic_curve(const std::vector<double>& modulation_hz,
                            double t60) {
  MtfCurve c;
  c.frequencies = modulation_hz;
  for (double f : modulation_hz) c.indices.push_back(mtf_analytic(f, t60));
  return c;
}

MtfCurve mtf_from_rir(const Rir& rir, const std::vector<double>& modulation_hz) {
  const auto& h = rir.signal.data();
  const double fs = rir.signal.sample_rate();
  double total = 0.0;
  for (double v : h) total += v * v;
  if (!(total > 0.0)) throw ContractError("mtf_from_rir: zero-energy RIR");

  // Phasor recurrence, re-anchored every block to bound rounding drift.
  constexpr std::size_t kBlock = 2048;
  MtfCurve curve;
  curve.frequencies = modulation_hz;
  for (double f : modulation_hz) {
    const double w = -2.0 * std::numbers::pi * f / fs;
    const std::complex<double> step = std::polar(1.0, w);
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t start = 0; start < h.size(); start += kBlock) {
      std::complex<double> phasor =
          std::polar(1.0, w * static_cast<double>(start));
      const std::size_t end = std::min(h.size(), start + kBlock);
      for (std::size_t i = start; i < end; ++i) {
        acc += (h[i] * h[i]) * phasor;
        phasor *= step;
      }
    }
    curve.indices.push_back(std::clamp(std::abs(acc) / total, 0.0, 1.0));
  }
  return curve;
}

MtfCurve average_mtf(const std::vector<MtfCurve>& curves) {
  if (curves.empty()) throw ContractError("average_mtf: no curves");
  MtfCurve out;
  out.frequencies = curves.front().frequencies;
  out.indices.assign(out.frequencies.size(), 0.0);
  for (const MtfCurve& c : curves) {
    if (c.frequencies != out.frequencies) {
      throw ContractError("average_mtf: frequency grids differ");
    }
    for (std::size_t i = 0; i < c.indices.size(); ++i) out.indices[i] += c.indices[i];
  }
  for (double& v : out.indices) v /= static_cast<double>(curves.size());
  return out;
}

Signal bandlimited_noise(double center_hz, double duration, double sample_rate,
                         std::uint64_t seed) {
  const std::size_t n = sample_count(duration, sample_rate);
  if (n == 0) throw RangeError("bandlimited_noise: empty duration");
  // Half a second of discarded lead-in lets the narrow filters settle so the
  // carrier is stationary from the first kept sample.
  const std::size_t lead_in = sample_count(0.5, sample_rate);
  Rng rng(derive_seed(seed, {kTagBandNoise,
                             static_cast<std::uint64_t>(std::llround(center_hz))}));
  std::vector<double> white(n + lead_in);
  for (double& v : white) v = rng.gaussian();
  const IirFilter filter = third_octave_band_filter(center_hz, sample_rate);
  const Signal filtered = filter_apply(filter, Signal(std::move(white), sample_rate));
  std::vector<double> y(filtered.data().begin() + static_cast<std::ptrdiff_t>(lead_in),
                        filtered.data().end());
  double sq = 0.0;
  for (double v : y) sq += v * v;
  const double rms = std::sqrt(sq / static_cast<double>(y.size()));
  for (double& v : y) v /= rms;
  return Signal(std::move(y), sample_rate);
}

Rir reconstruct_rir(const BandT60s& band_t60s, double duration,
                    double sample_rate, std::uint64_t seed) {
  RirSpec spec;
  spec.t60.assign(band_t60s.values().begin(), band_t60s.values().end());
  spec.duration = duration;
  spec.sample_rate = sample_rate;
  spec.seed = seed;
  spec.carrier = Carrier::kThirdOctaveBandLimited;
  spec.validate();

  const std::size_t n = sample_count(duration, sample_rate);
  std::vector<double> h(n, 0.0);
  for (std::size_t k = 0; k < kNumBands; ++k) {
    const Signal carrier =
        bandlimited_noise(kOctaveCenters[k], duration, sample_rate, seed);
    const double rate = kDecayConstant / (band_t60s[k] * sample_rate);
    for (std::size_t i = 0; i < n; ++i) {
      h[i] += std::exp(-rate * static_cast<double>(i)) * carrier[i];
    }
  }
  return Rir(Signal(std::move(h), sample_rate), spec);
}

// ---- persistence ---------------------------------------------------------

std::filesystem::path rir_sidecar_path(const std::filesystem::path& wav_path) {
  std::filesystem::path p = wav_path;
  p.replace_extension(".json");
  return p;
}

void save_rir(const std::filesystem::path& wav_path, const Rir& rir) {
  write_wav(wav_path, rir.signal, WavEncoding::kFloat32);
  nlohmann::json j;
  j["sample_rate"] = rir.signal.sample_rate();
  j["length"] = rir.signal.size();
  if (rir.spec) {
    const RirSpec& s = *rir.spec;
    j["t60"] = s.t60;
    j["gain_a"] = s.gain_a;
    j["duration_s"] = s.duration;
    j["seed"] = s.seed;
    j["carrier"] = to_string(s.carrier);
  }
  std::ofstream out(rir_sidecar_path(wav_path));
  if (!out) throw WavError("cannot write " + rir_sidecar_path(wav_path).string());
  out << j.dump(2) << '\n';
}

Rir load_rir(const std::filesystem::path& wav_path) {
  Signal s = read_wav(wav_path);
  std::optional<RirSpec> spec;
  const auto sidecar = rir_sidecar_path(wav_path);
  if (std::filesystem::exists(sidecar)) {
    std::ifstream in(sidecar);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw WavError(sidecar.string() + ": " + e.what());
    }
    if (j.contains("t60")) {
      RirSpec r;
      r.t60 = j.at("t60").get<std::vector<double>>();
      r.gain_a = j.value("gain_a", 1.0);
      r.duration = j.value("duration_s", s.duration());
      r.sample_rate = j.value("sample_rate", s.sample_rate());
      r.seed = j.value("seed", std::uint64_t{0});
      r.carrier = carrier_from_string(j.value("carrier", "full-band-wgn"));
      spec = r;
    }
  }
  return Rir(std::move(s), spec);
}

}  // namespace mtfcnn
