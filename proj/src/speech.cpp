#include "mtfcnn/speech.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "mtfcnn/bands.hpp"
#include "mtfcnn/filter.hpp"
#include "mtfcnn/random.hpp"
#include "mtfcnn/wav.hpp"

namespace mtfcnn {

namespace {

struct Burst {
  double start, length;
  std::array<double, kNumBands> gain;
};

}  // namespace

Signal synthetic_utterance(std::size_t index, std::uint64_t seed, double duration,
                           double sample_rate) {
  const auto n = static_cast<std::size_t>(std::llround(duration * sample_rate));
  Rng timing(derive_seed(seed, {kTagSpeech, index, 0}));

  std::vector<Burst> bursts;
  double t = timing.uniform(0.02, 0.12);
  int syllables_left = 2 + static_cast<int>(timing.uniform_index(5));
  while (t < duration - 0.1) {
    Burst b;
    b.start = t;
    b.length = timing.uniform(0.08, 0.30);
    for (std::size_t k = 0; k < kNumBands; ++k) {
      // About -3 dB per octave of tilt, with per-syllable spectral variety.
      const double tilt = std::pow(10.0, -3.0 * static_cast<double>(k) / 20.0);
      b.gain[k] = tilt * timing.uniform(0.2, 1.0);
    }
    bursts.push_back(b);
    t += b.length;
    if (--syllables_left == 0) {
      t += timing.uniform(0.25, 0.6);  // word / phrase pause
      syllables_left = 2 + static_cast<int>(timing.uniform_index(5));
    } else {
      t += timing.uniform(0.03, 0.15);
    }
  }

  std::vector<double> y(n, 0.0);
  for (std::size_t k = 0; k < kNumBands; ++k) {
    Rng noise_rng(derive_seed(seed, {kTagSpeech, index, 1 + k}));
    std::vector<double> white(n);
    for (double& v : white) v = noise_rng.gaussian();
    const Signal band = filter_apply(octave_band_filter(kOctaveCenters[k], sample_rate),
                                     Signal(std::move(white), sample_rate));
    for (const Burst& b : bursts) {
      const auto i0 = static_cast<std::size_t>(b.start * sample_rate);
      const auto len = static_cast<std::size_t>(b.length * sample_rate);
      for (std::size_t i = 0; i < len && i0 + i < n; ++i) {
        // sin^2 syllable envelope
        const double s = std::sin(std::numbers::pi * static_cast<double>(i) /
                                  static_cast<double>(len));
        y[i0 + i] += b.gain[k] * s * s * band[i0 + i];
      }
    }
  }
  double peak = 0.0;
  for (double v : y) peak = std::max(peak, std::abs(v));
  if (peak > 0.0) {
    for (double& v : y) v *= 0.9 / peak;
  }
  return Signal(std::move(y), sample_rate);
}

std::vector<std::filesystem::path> write_synthetic_speech(
    const std::filesystem::path& dir, std::size_t count, std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> paths;
  for (std::size_t i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "utt_%02zu.wav", i);
    const auto path = dir / name;
    write_wav(path, synthetic_utterance(i, seed), WavEncoding::kPcm16);
    paths.push_back(path);
  }
  return paths;
}

}  // namespace mtfcnn
