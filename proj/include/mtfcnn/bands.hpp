#pragma once

#include <array>
#include <cstddef>
#include <string>

namespace mtfcnn {

constexpr std::size_t kNumBands = 7;
constexpr std::array<double, kNumBands> kOctaveCenters = {
    125.0, 250.0, 500.0, 1000.0, 2000.0, 4000.0, 8000.0};

// Index of `center_hz` in kOctaveCenters; throws RangeError if absent.
std::size_t band_index(double center_hz);
std::string band_label(std::size_t band);  // "125", ..., "8000"

// Per-octave-band reverberation times in seconds, ascending band order.
class BandT60s {
 public:
  // Every entry must be positive and finite (RangeError otherwise).
  explicit BandT60s(std::array<double, kNumBands> values);
  static BandT60s uniform(double t60);

  const std::array<double, kNumBands>& values() const { return values_; }
  double operator[](std::size_t band) const { return values_[band]; }
  double max() const;
  double mean() const;

  bool operator==(const BandT60s&) const = default;

 private:
  std::array<double, kNumBands> values_;
};

}  // namespace mtfcnn
