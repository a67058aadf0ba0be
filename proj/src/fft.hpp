#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace mtfcnn::fft {

// Thin wrappers over FFTW. Plans use FFTW_ESTIMATE so results are
// reproducible run to run; plan creation is serialized internally.

// Real forward transform of length x.size(); returns x.size()/2 + 1 bins.
std::vector<std::complex<double>> forward_real(const std::vector<double>& x);
// Inverse of forward_real for a length-n signal, scaled by 1/n.
std::vector<double> inverse_real(const std::vector<std::complex<double>>& bins,
                                 std::size_t n);
// Unscaled complex transforms.
std::vector<std::complex<double>> forward(
    const std::vector<std::complex<double>>& x);
std::vector<std::complex<double>> inverse(
    const std::vector<std::complex<double>>& x);

// Smallest n' >= n of the form 2^a 3^b 5^c 7^d.
std::size_t good_size(std::size_t n);

}  // namespace mtfcnn::fft
