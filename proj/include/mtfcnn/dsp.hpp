#pragma once

#include "mtfcnn/signal.hpp"

namespace mtfcnn {

// Magnitude of the analytic signal |x + j*Hilbert(x)|, built in the
// frequency domain (negative frequencies zeroed, positive ones doubled).
// Requires at least 2 samples.
Signal analytic_envelope(const Signal& input);

// Keeps every `factor`-th sample starting at index 0. The caller band-limits
// first. `factor` must divide the sample rate evenly.
Signal decimate(const Signal& input, int factor);

// Full linear convolution via FFT; length len(x) + len(h) - 1.
Signal convolve(const Signal& x, const Signal& h);

}  // namespace mtfcnn
