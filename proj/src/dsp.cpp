#include "mtfcnn/dsp.hpp"

#include <cmath>
#include <complex>
#include <string>

#include "fft.hpp"
#include "mtfcnn/error.hpp"

namespace mtfcnn {

Signal analytic_envelope(const Signal& input) {
  require_length(input, 2, "analytic_envelope");
  const std::size_t n = input.size();
  std::vector<std::complex<double>> spectrum(n);
  {
    const auto half = fft::forward_real(input.data());
    // Double the strictly positive frequencies; keep DC and (even n) Nyquist.
    spectrum[0] = half[0];
    const std::size_t last = (n % 2 == 0) ? n / 2 : (n + 1) / 2;
    for (std::size_t k = 1; k < last; ++k) spectrum[k] = 2.0 * half[k];
    if (n % 2 == 0) spectrum[n / 2] = half[n / 2];
  }
  const auto analytic = fft::inverse(spectrum);
  std::vector<double> env(n);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) env[i] = std::abs(analytic[i]) * scale;
  return Signal(std::move(env), input.sample_rate());
}

Signal decimate(const Signal& input, int factor) {
  if (factor < 1) throw RangeError("decimation factor must be positive");
  const double out_rate = input.sample_rate() / factor;
  if (std::floor(out_rate) != out_rate) {
    throw RangeError("decimation factor " + std::to_string(factor) +
                     " does not divide the sample rate " +
                     std::to_string(input.sample_rate()));
  }
  const std::size_t out_len = input.size() / static_cast<std::size_t>(factor);
  std::vector<double> y(out_len);
  for (std::size_t i = 0; i < out_len; ++i) {
    y[i] = input[i * static_cast<std::size_t>(factor)];
  }
  return Signal(std::move(y), out_rate);
}

Signal convolve(const Signal& x, const Signal& h) {
  require_same_rate(x.sample_rate(), h.sample_rate(), "convolve");
  require_length(x, 1, "convolve");
  require_length(h, 1, "convolve");
  const std::size_t out_len = x.size() + h.size() - 1;
  const std::size_t n = fft::good_size(out_len);
  std::vector<double> xp(x.data()), hp(h.data());
  xp.resize(n, 0.0);
  hp.resize(n, 0.0);
  auto xs = fft::forward_real(xp);
  const auto hs = fft::forward_real(hp);
  for (std::size_t k = 0; k < xs.size(); ++k) xs[k] *= hs[k];
  auto y = fft::inverse_real(xs, n);
  y.resize(out_len);
  return Signal(std::move(y), x.sample_rate());
}

}  // namespace mtfcnn
