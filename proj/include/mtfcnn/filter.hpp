#pragma once

#include <complex>
#include <string>
#include <vector>

#include "mtfcnn/signal.hpp"

namespace mtfcnn {

// One second-order section, a0 normalized to 1:
//   H(z) = (b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2)
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

enum class FilterKind { kLowpass, kBandpass, kCustom };

struct FilterDesign {
  FilterKind kind = FilterKind::kCustom;
  int order = 0;                  // per side for bandpass
  std::vector<double> corners_hz;  // {cutoff} or {low, high}
  double sample_rate = 0.0;
};

// An IIR filter realized as a cascade of second-order sections.
class IirFilter {
 public:
  IirFilter(std::vector<Biquad> sections, FilterDesign design);

  // Builds a single-section filter from a transfer function of order <= 2.
  // feedback[0] must be non-zero; coefficients are normalized by it.
  static IirFilter from_transfer_function(std::vector<double> feedforward,
                                          std::vector<double> feedback,
                                          double sample_rate);

  const std::vector<Biquad>& sections() const { return sections_; }
  const FilterDesign& design() const { return design_; }
  double sample_rate() const { return design_.sample_rate; }

  // Expanded polynomials of the whole cascade; feedback()[0] == 1.
  std::vector<double> feedforward() const;
  std::vector<double> feedback() const;
  std::vector<std::complex<double>> poles() const;
  std::complex<double> response(double freq_hz) const;
  double gain_db(double freq_hz) const;

 private:
  std::vector<Biquad> sections_;
  FilterDesign design_;
};

IirFilter design_butterworth_lowpass(int order, double cutoff_hz,
                                     double sample_rate);
IirFilter design_butterworth_bandpass(int order_per_side, double low_hz,
                                      double high_hz, double sample_rate);

// Causal single-pass filtering; output length equals input length.
Signal filter_apply(const IirFilter& filter, const Signal& input);

// Octave-band analysis filter around `center_hz`: corners center/sqrt(2) and
// center*sqrt(2), the upper corner clipped to 0.95 Nyquist, 3rd order per side.
IirFilter octave_band_filter(double center_hz, double sample_rate);
// One-third-octave counterpart, corners center*2^(-+1/6).
IirFilter third_octave_band_filter(double center_hz, double sample_rate);

constexpr int kOctaveFilterOrder = 3;
constexpr double kUpperCornerNyquistFraction = 0.95;

}  // namespace mtfcnn
