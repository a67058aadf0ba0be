#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace mtfcnn {

// Seedable generator with a fully specified algorithm: std::mt19937_64
// (whose output sequence the C++ standard pins) plus in-house transforms for
// uniform and Gaussian variates, so streams are bit-reproducible across
// standard libraries. Gaussian draws use the Box-Muller transform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer on [0, n), n > 0.
  std::uint64_t uniform_index(std::uint64_t n);
  double gaussian();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

// Derives an independent stream seed from a base seed and a role path,
// e.g. derive_seed(corpus_seed, {kTagRir, utterance, t60_index, carrier}).
std::uint64_t derive_seed(std::uint64_t base,
                          std::initializer_list<std::uint64_t> path);

// Role tags for derive_seed.
enum SeedTag : std::uint64_t {
  kTagRirCarrier = 0x52495243,     // "RIRC"
  kTagBandNoise = 0x424e4f49,      // "BNOI"
  kTagSpeech = 0x53504348,         // "SPCH"
  kTagSplit = 0x53504c54,          // "SPLT"
  kTagInit = 0x494e4954,           // "INIT"
  kTagShuffle = 0x53484646,        // "SHFF"
  kTagDropout = 0x44524f50,        // "DROP"
  kTagValidation = 0x56414c44,     // "VALD"
};

}  // namespace mtfcnn
