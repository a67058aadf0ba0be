#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "mtfcnn/bands.hpp"
#include "mtfcnn/signal.hpp"

namespace mtfcnn {

constexpr double kTaeInputRate = 16000.0;
constexpr double kTaeInputSeconds = 5.0;
constexpr double kTaeRate = 40.0;
constexpr std::size_t kTaeLength = 200;
constexpr double kTaeLowpassHz = 20.0;
constexpr int kTaeLowpassOrder = 6;
// The lowpass overshoots by about 8% on an onset at t = 0 and settles
// within this many TAE samples (250 ms). The silence test and the
// normalization peak use the samples after it; settling samples above that
// peak are clipped to 1.
constexpr std::size_t kTaeSettleSamples = 10;
// A band whose envelope peak stays below this fraction of the input peak
// (-40 dB) is reported silent and zeroed.
constexpr double kTaeSilenceRatio = 0.01;

struct NormalizedSignal {
  Signal signal;
  double gain = 1.0;  // applied factor: signal = gain * input
};

// Scales to peak |x| = 1. Throws SilentInputError for an all-zero input.
NormalizedSignal normalize_signal(const Signal& input);

struct TaeBand {
  std::vector<double> envelope;  // kTaeLength values in [0, 1]
  bool silent = false;
  double peak = 0.0;  // normalization reference before scaling
};

// octave bandpass -> analytic envelope -> 20 Hz lowpass -> decimate to
// 40 Hz -> first 200 samples -> scale to peak 1 (see kTaeSettleSamples). Inputs must be 16 kHz and at
// least 5 s long (ShortInputError); only the first 5 s are used.
TaeBand extract_tae_band(const Signal& input, double center_hz);
std::vector<double> extract_tae(const Signal& input, double center_hz);

struct TaeMatrix {
  // rows[k] is the envelope of band kOctaveCenters[k].
  std::array<std::vector<double>, kNumBands> rows;
  std::array<bool, kNumBands> silent{};
  std::string source_id;
  double normalization_gain = 1.0;
  double sample_rate = kTaeRate;
};

// Normalizes the input, then extracts every band in ascending order.
TaeMatrix tae_matrix(const Signal& input, std::string source_id = {});

// Binary feature file: "TAE1", u32 band count, u32 length, f32 sample rate,
// then row-major little-endian f32 values.
void write_tae_file(const std::filesystem::path& path, const TaeMatrix& tae);
TaeMatrix read_tae_file(const std::filesystem::path& path);
// One line per band: band_hz followed by the envelope values.
void write_tae_csv(const std::filesystem::path& path, const TaeMatrix& tae);

}  // namespace mtfcnn
