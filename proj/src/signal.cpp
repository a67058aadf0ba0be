#include "mtfcnn/signal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mtfcnn/error.hpp"

namespace mtfcnn {

Signal::Signal(std::vector<double> samples, double sample_rate)
    : samples_(std::move(samples)), sample_rate_(sample_rate) {
  if (!(sample_rate_ > 0.0) || !std::isfinite(sample_rate_)) {
    throw RangeError("signal sample rate must be positive, got " +
                     std::to_string(sample_rate_));
  }
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!std::isfinite(samples_[i])) {
      throw RangeError("signal sample " + std::to_string(i) + " is not finite");
    }
  }
}

Signal Signal::zeros(std::size_t length, double sample_rate) {
  return Signal(std::vector<double>(length, 0.0), sample_rate);
}

Signal Signal::impulse(std::size_t length, double sample_rate,
                       std::size_t position) {
  std::vector<double> x(length, 0.0);
  if (position >= length) {
    throw RangeError("impulse position outside the signal");
  }
  x[position] = 1.0;
  return Signal(std::move(x), sample_rate);
}

double Signal::peak() const {
  double m = 0.0;
  for (double v : samples_) m = std::max(m, std::abs(v));
  return m;
}

double Signal::energy() const {
  double e = 0.0;
  for (double v : samples_) e += v * v;
  return e;
}

Signal Signal::scaled(double gain) const {
  std::vector<double> y(samples_);
  for (double& v : y) v *= gain;
  return Signal(std::move(y), sample_rate_);
}

Signal Signal::truncated(std::size_t length) const {
  const std::size_t n = std::min(length, samples_.size());
  return Signal(std::vector<double>(samples_.begin(), samples_.begin() + n),
                sample_rate_);
}

void require_length(const Signal& s, std::size_t min_length, const char* what) {
  if (s.size() < min_length) {
    throw ContractError(std::string(what) + ": signal needs at least " +
                        std::to_string(min_length) + " samples, got " +
                        std::to_string(s.size()));
  }
}

void require_same_rate(double a, double b, const char* what) {
  if (a != b) {
    throw ContractError(std::string(what) + ": sample-rate mismatch (" +
                        std::to_string(a) + " Hz vs " + std::to_string(b) +
                        " Hz)");
  }
}

}  // namespace mtfcnn
