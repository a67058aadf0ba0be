#include <cmath>
#include <complex>
#include <filesystem>
#include <numbers>

#include "doctest.h"
#include "mtfcnn/dsp.hpp"
#include "mtfcnn/error.hpp"
#include "mtfcnn/random.hpp"
#include "mtfcnn/rir.hpp"
#include "mtfcnn/tae.hpp"

using namespace mtfcnn;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kFs = 16000.0;

Signal tone(double freq, double seconds, double amp = 0.8) {
  std::vector<double> v(static_cast<std::size_t>(seconds * kFs));
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = amp * std::sin(2.0 * kPi * freq * static_cast<double>(i) / kFs);
  }
  return Signal(v, kFs);
}

Signal noise(double seconds, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(static_cast<std::size_t>(seconds * kFs));
  for (double& x : v) x = rng.gaussian();
  return Signal(v, kFs);
}

}  // namespace

TEST_CASE("normalization") {
  const Signal s({0.25, -0.1, 0.05}, kFs);
  const NormalizedSignal n = normalize_signal(s);
  CHECK(n.gain == 4.0);
  CHECK(n.signal[0] == 1.0);
  CHECK(normalize_signal(n.signal).signal == n.signal);
  CHECK(normalize_signal(n.signal).gain == 1.0);
  CHECK_THROWS_AS(normalize_signal(Signal::zeros(10, kFs)), SilentInputError);
}

TEST_CASE("TAE of a tone at the band center is flat") {
  for (double fc : {250.0, 1000.0, 4000.0}) {
    const TaeBand b = extract_tae_band(tone(fc, 5.0), fc);
    REQUIRE(b.envelope.size() == kTaeLength);
    CHECK(!b.silent);
    for (std::size_t i = 10; i < kTaeLength; ++i) {
      CHECK(std::abs(b.envelope[i] - 1.0) < 0.05);
    }
  }
}

TEST_CASE("TAE of an out-of-band tone is silent") {
  const TaeBand b = extract_tae_band(tone(1000.0, 5.0), 125.0);
  CHECK(b.silent);
  for (double v : b.envelope) CHECK(v == 0.0);
}

TEST_CASE("TAE input contracts") {
  CHECK_THROWS_AS(extract_tae(tone(1000.0, 4.9), 1000.0), ShortInputError);
  CHECK_THROWS_AS(extract_tae(Signal(std::vector<double>(40000, 0.1), 8000.0), 1000.0),
                  ContractError);
  CHECK_THROWS_AS(tae_matrix(Signal::zeros(80000, kFs)), SilentInputError);
  // Longer input: only the first 5 s count.
  const Signal n = noise(6.0, 2);
  CHECK(tae_matrix(n).rows == tae_matrix(n.truncated(80000)).rows);
}

TEST_CASE("TAE matrix of white noise") {
  const Signal n = noise(5.0, 1);
  const TaeMatrix m = tae_matrix(n, "noise");
  for (std::size_t k = 0; k < kNumBands; ++k) {
    CHECK(!m.silent[k]);
    CHECK(m.rows[k].size() == kTaeLength);
    double peak = 0.0;
    for (double v : m.rows[k]) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      peak = std::max(peak, v);
    }
    CHECK(peak == 1.0);
  }
  CHECK(tae_matrix(n).rows == m.rows);

  const TaeMatrix scaled = tae_matrix(n.scaled(0.01));
  for (std::size_t k = 0; k < kNumBands; ++k) {
    for (std::size_t i = 0; i < kTaeLength; ++i) {
      CHECK(std::abs(scaled.rows[k][i] - m.rows[k][i]) < 1e-6);
    }
  }
}

TEST_CASE("TAE files round-trip") {
  const TaeMatrix m = tae_matrix(noise(5.0, 3), "x");
  const auto p = std::filesystem::temp_directory_path() / "mtfcnn_test.tae";
  write_tae_file(p, m);
  const TaeMatrix r = read_tae_file(p);
  for (std::size_t k = 0; k < kNumBands; ++k) {
    for (std::size_t i = 0; i < kTaeLength; ++i) {
      CHECK(r.rows[k][i] == static_cast<double>(static_cast<float>(m.rows[k][i])));
    }
  }
  write_tae_csv(std::filesystem::temp_directory_path() / "mtfcnn_test_tae.csv", m);
}

namespace {

// Intensity-modulated noise: envelope^2 = 1 + cos(2 pi f t).
Signal modulated_noise(double fm, std::uint64_t seed) {
  Signal n = noise(6.0, seed);
  std::vector<double> v(n.data());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double t = static_cast<double>(i) / kFs;
    v[i] *= std::sqrt(1.0 + std::cos(2.0 * kPi * fm * t));
  }
  return Signal(v, kFs);
}

// Modulation depth of the squared TAE at fm, over 4 s after a 1 s settle.
double depth(const std::vector<double>& tae, double fm) {
  std::complex<double> acc = 0.0;
  double dc = 0.0;
  for (std::size_t i = 40; i < kTaeLength; ++i) {
    const double p = tae[i] * tae[i];
    const double t = static_cast<double>(i) / kTaeRate;
    acc += p * std::polar(1.0, -2.0 * kPi * fm * t);
    dc += p;
  }
  return 2.0 * std::abs(acc) / dc;
}

}  // namespace

TEST_CASE("reverberation attenuates TAE modulation like the Schroeder MTF") {
  for (double t60 : {0.5, 1.0, 2.0}) {
    for (double fm : {2.0, 4.0, 8.0}) {
      double ratio = 0.0;
      const int seeds = 10;
      for (int s = 0; s < seeds; ++s) {
        const Signal dry = modulated_noise(fm, 100 + s);
        RirSpec spec;
        spec.t60 = {t60};
        spec.duration = default_rir_duration(t60);
        spec.seed = 500 + s;
        const Signal wet =
            convolve(dry, synth_schroeder_rir(spec).signal).truncated(dry.size());
        const TaeMatrix a = tae_matrix(dry);
        const TaeMatrix r = tae_matrix(wet);
        // Broadband average over the mid bands.
        for (std::size_t k = 2; k <= 5; ++k) {
          ratio += depth(r.rows[k], fm) / depth(a.rows[k], fm) / (4.0 * seeds);
        }
      }
      INFO("t60 " << t60 << " fm " << fm << " ratio " << ratio);
      CHECK(std::abs(ratio - mtf_analytic(fm, t60)) < 0.1);
    }
  }
}
