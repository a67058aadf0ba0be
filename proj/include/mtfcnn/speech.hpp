#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "mtfcnn/signal.hpp"

namespace mtfcnn {

// Speech-like test material: syllable-rate bursts of multi-band noise with
// per-band gains, pauses between words, and a downward spectral tilt.
// Deterministic in (index, seed); peak amplitude 0.9.
Signal synthetic_utterance(std::size_t index, std::uint64_t seed = 0,
                           double duration = 5.0, double sample_rate = 16000.0);

// Writes utt_00.wav .. as 16-bit PCM; returns the written paths.
std::vector<std::filesystem::path> write_synthetic_speech(
    const std::filesystem::path& dir, std::size_t count, std::uint64_t seed = 0);

}  // namespace mtfcnn
