#pragma once

#include <filesystem>

#include "mtfcnn/signal.hpp"

namespace mtfcnn {

enum class WavEncoding { kPcm16, kFloat32 };

constexpr double kWavSampleRate = 16000.0;

// Reads a mono RIFF/WAVE file holding 16-bit PCM or 32-bit float samples.
// PCM samples are divided by 32768. Files whose rate differs from
// `expected_rate` are rejected with WavError; no resampling happens.
Signal read_wav(const std::filesystem::path& path,
                double expected_rate = kWavSampleRate);

// Writes a mono RIFF/WAVE file. PCM16 output is rounded and clipped to
// [-32768, 32767].
void write_wav(const std::filesystem::path& path, const Signal& signal,
               WavEncoding encoding = WavEncoding::kFloat32);

}  // namespace mtfcnn
