#include <cmath>
#include <complex>
#include <filesystem>
#include <numbers>

#include "doctest.h"
#include "mtfcnn/acoustic_params.hpp"
#include "mtfcnn/error.hpp"
#include "mtfcnn/filter.hpp"
#include "mtfcnn/rir.hpp"
#include "mtfcnn/sti.hpp"

using namespace mtfcnn;

namespace {

RirSpec spec_for(double t60, std::uint64_t seed, Carrier c = Carrier::kFullBandWgn) {
  RirSpec s;
  s.t60 = {t60};
  s.duration = default_rir_duration(t60);
  s.seed = seed;
  s.carrier = c;
  return s;
}

}  // namespace

TEST_CASE("analytic MTF values") {
  CHECK(mtf_analytic(1.0, 0.7) == doctest::Approx(0.952780).epsilon(1e-4));
  CHECK(std::abs(mtf_analytic(12.5, 1.0) - 0.173056) < 1e-4);
  CHECK(std::abs(mtf_analytic(2.0, 1.0) - 0.739382) < 1e-5);
  CHECK(mtf_analytic(0.0, 2.5) == 1.0);
  double prev = 2.0;
  for (double f = 0.5; f < 20.0; f += 0.5) {
    const double m = mtf_analytic(f, 1.0);
    CHECK(m < prev);
    prev = m;
  }
  CHECK(mtf_analytic(4.0, 2.0) < mtf_analytic(4.0, 1.0));
}

TEST_CASE("schroeder RIR envelope, determinism and gain") {
  const RirSpec env = spec_for(1.0, 0, Carrier::kEnvelopeOnly);
  const Rir h = synth_schroeder_rir(env);
  const double ratio = h.signal[16000] / h.signal[0];
  CHECK(ratio == doctest::Approx(std::exp(-6.9)).epsilon(1e-12));
  CHECK(20.0 * std::log10(ratio) == doctest::Approx(-59.93).epsilon(1e-3));

  const RirSpec s = spec_for(0.8, 99);
  CHECK(synth_schroeder_rir(s).signal == synth_schroeder_rir(s).signal);
  RirSpec s2 = s;
  s2.gain_a = 2.0;
  const Rir a = synth_schroeder_rir(s), b = synth_schroeder_rir(s2);
  for (std::size_t i = 0; i < a.signal.size(); i += 97) CHECK(b.signal[i] == 2.0 * a.signal[i]);
}

TEST_CASE("RirSpec validation") {
  RirSpec s = spec_for(1.0, 1);
  s.duration = 0.9;
  CHECK_THROWS_AS(synth_schroeder_rir(s), RangeError);
  CHECK_THROWS_AS(synth_schroeder_rir(spec_for(0.01, 1)), RangeError);
  CHECK_THROWS_AS(synth_schroeder_rir(spec_for(11.0, 1)), RangeError);
  CHECK(default_rir_duration(0.2) == 1.0);
  CHECK(default_rir_duration(1.0) == 2.0);
  CHECK(default_rir_duration(3.0) == 5.0);
  CHECK_THROWS_AS(Rir(Signal::zeros(10, 16000.0)), ContractError);
}

TEST_CASE("MTF from RIR") {
  const std::vector<double> f = {0.0, 1.0, 4.0, 12.5};
  const MtfCurve flat = mtf_from_rir(Rir(Signal::impulse(100, 16000.0, 10)), f);
  for (double m : flat.indices) CHECK(m == doctest::Approx(1.0).epsilon(1e-12));

  const MtfCurve one = mtf_from_rir(synth_schroeder_rir(spec_for(1.0, 3)), f);
  CHECK(one.indices[0] == 1.0);

  // Deterministic envelope: discretization error only.
  RirSpec env = spec_for(1.0, 0, Carrier::kEnvelopeOnly);
  env.duration = 3.0;
  const auto& cfg = builtin_sti_config().modulation_frequencies;
  const MtfCurve c = mtf_from_rir(synth_schroeder_rir(env), cfg);
  for (std::size_t i = 0; i < cfg.size(); ++i) {
    CHECK(std::abs(c.indices[i] - mtf_analytic(cfg[i], 1.0)) < 1e-3);
  }

  // Monte-Carlo mean over seeds.
  std::vector<MtfCurve> curves;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    curves.push_back(mtf_from_rir(synth_schroeder_rir(spec_for(1.0, seed)), {2.0}));
  }
  CHECK(std::abs(average_mtf(curves).indices[0] - mtf_analytic(2.0, 1.0)) < 0.02);
}

TEST_CASE("band-limited noise") {
  const double fs = 16000.0;
  const double fc = 1000.0;
  const Signal n = bandlimited_noise(fc, 2.0, fs, 4);
  CHECK(std::sqrt(n.energy() / static_cast<double>(n.size())) ==
        doctest::Approx(1.0).epsilon(1e-6));
  CHECK(bandlimited_noise(fc, 2.0, fs, 4) == n);
  CHECK(!(bandlimited_noise(fc, 2.0, fs, 5) == n));

  // Periodogram energy inside the widened third-octave band.
  const double lo = fc / std::pow(2.0, 1.0 / 6.0) * 0.9;
  const double hi = fc * std::pow(2.0, 1.0 / 6.0) * 1.1;
  const std::size_t len = 4000;  // 0.25 s, 4 Hz bins
  double inside = 0.0, total = 0.0;
  for (std::size_t k = 0; k <= len / 2; ++k) {
    std::complex<double> acc = 0.0;
    const double w = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(len);
    for (std::size_t i = 0; i < len; ++i) acc += n[i] * std::polar(1.0, w * static_cast<double>(i));
    const double p = std::norm(acc);
    const double freq = static_cast<double>(k) * fs / static_cast<double>(len);
    total += p;
    if (freq >= lo && freq <= hi) inside += p;
  }
  CHECK(inside / total >= 0.85);
}

TEST_CASE("reconstructed RIR per-band decay") {
  const double fs = 16000.0;
  const BandT60s bands = BandT60s::uniform(1.0);
  std::array<double, kNumBands> mean{};
  const int seeds = 10;
  for (int s = 0; s < seeds; ++s) {
    const Rir h = reconstruct_rir(bands, 2.0, fs, static_cast<std::uint64_t>(s));
    for (std::size_t k = 0; k < kNumBands; ++k) {
      const Signal b = filter_apply(octave_band_filter(kOctaveCenters[k], fs), h.signal);
      mean[k] += estimate_t60(energy_decay_curve(Rir(b))) / seeds;
    }
  }
  for (std::size_t k = 0; k < kNumBands; ++k) {
    INFO("band " << kOctaveCenters[k]);
    CHECK(std::abs(mean[k] - 1.0) < 0.1);
  }
  CHECK(reconstruct_rir(bands, 2.0, fs, 3).signal == reconstruct_rir(bands, 2.0, fs, 3).signal);
  CHECK_THROWS_AS(reconstruct_rir(bands, 0.5, fs, 3), RangeError);
}

TEST_CASE("doubling band T60s doubles the center time") {
  const double fs = 16000.0;
  std::array<double, kNumBands> t{0.3, 0.35, 0.4, 0.45, 0.5, 0.4, 0.3};
  std::array<double, kNumBands> t2{};
  for (std::size_t k = 0; k < kNumBands; ++k) t2[k] = 2.0 * t[k];
  double ts1 = 0.0, ts2 = 0.0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    ts1 += center_time(reconstruct_rir(BandT60s(t), 1.0, fs, s));
    ts2 += center_time(reconstruct_rir(BandT60s(t2), 2.0, fs, s));
  }
  CHECK(ts2 / ts1 == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("RIR files carry their synthesis parameters") {
  const auto dir = std::filesystem::temp_directory_path() / "mtfcnn_test_rir";
  std::filesystem::create_directories(dir);
  const RirSpec s = spec_for(0.6, 12);
  const Rir h = synth_schroeder_rir(s);
  save_rir(dir / "h.wav", h);
  CHECK(std::filesystem::exists(rir_sidecar_path(dir / "h.wav")));
  const Rir r = load_rir(dir / "h.wav");
  REQUIRE(r.spec.has_value());
  CHECK(*r.spec == s);
  CHECK(r.signal.size() == h.signal.size());
  CHECK(to_string(carrier_from_string("envelope-only")) == "envelope-only");
}
