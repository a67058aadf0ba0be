#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mtfcnn {

// A uniformly sampled, real-valued, finite waveform.
class Signal {
 public:
  // Throws RangeError on a non-positive sample rate or non-finite samples.
  Signal(std::vector<double> samples, double sample_rate);

  static Signal zeros(std::size_t length, double sample_rate);
  static Signal impulse(std::size_t length, double sample_rate,
                        std::size_t position = 0);

  std::span<const double> samples() const { return samples_; }
  const std::vector<double>& data() const { return samples_; }
  double operator[](std::size_t i) const { return samples_[i]; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  double sample_rate() const { return sample_rate_; }
  double duration() const {
    return static_cast<double>(samples_.size()) / sample_rate_;
  }

  double peak() const;
  double energy() const;  // sum of squares, not scaled by the sample period

  Signal scaled(double gain) const;
  // First `length` samples (or all of them if shorter).
  Signal truncated(std::size_t length) const;

  bool operator==(const Signal&) const = default;

 private:
  std::vector<double> samples_;
  double sample_rate_;
};

// Throws ContractError unless the signal has at least `min_length` samples.
void require_length(const Signal& s, std::size_t min_length, const char* what);
// Throws ContractError unless both signals share the same sample rate.
void require_same_rate(double a, double b, const char* what);

}  // namespace mtfcnn
