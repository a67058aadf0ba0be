#include "mtfcnn/filter.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include "mtfcnn/error.hpp"

namespace mtfcnn {

namespace {

using cplx = std::complex<double>;

std::vector<double> poly_multiply(const std::vector<double>& a,
                                  const std::vector<double>& b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

// Roots of 1 + a1 z^-1 + a2 z^-2, i.e. of z^2 + a1 z + a2.
std::pair<cplx, cplx> quadratic_roots(double a1, double a2) {
  if (a2 == 0.0) return {cplx(-a1, 0.0), cplx(0.0, 0.0)};
  const cplx disc = std::sqrt(cplx(a1 * a1 - 4.0 * a2, 0.0));
  return {(-a1 + disc) / 2.0, (-a1 - disc) / 2.0};
}

cplx section_response(const Biquad& s, cplx z_inv) {
  const cplx z_inv2 = z_inv * z_inv;
  return (s.b0 + s.b1 * z_inv + s.b2 * z_inv2) /
         (1.0 + s.a1 * z_inv + s.a2 * z_inv2);
}

double prewarp(double freq_hz, double sample_rate) {
  return 2.0 * sample_rate * std::tan(std::numbers::pi * freq_hz / sample_rate);
}

// Analog Butterworth prototype poles (unit cutoff), left half-plane.
std::vector<cplx> butterworth_prototype(int order) {
  std::vector<cplx> poles;
  for (int k = 0; k < order; ++k) {
    const double theta =
        std::numbers::pi * (2.0 * k + order + 1) / (2.0 * order);
    poles.push_back(std::polar(1.0, theta));
  }
  return poles;
}

cplx bilinear(cplx s, double sample_rate) {
  const double fs2 = 2.0 * sample_rate;
  return (fs2 + s) / (fs2 - s);
}

// Groups digital poles into conjugate pairs (the real pole, if any, last)
// and attaches two zeros to every section. Each section is scaled to unit
// magnitude at `ref_hz`, where the full Butterworth design has unit gain.
std::vector<Biquad> to_sections(std::vector<cplx> poles,
                                std::vector<cplx> zeros, double ref_hz,
                                double sample_rate) {
  std::vector<cplx> upper;
  std::vector<double> real_poles;
  for (const cplx& p : poles) {
    if (std::abs(p.imag()) < 1e-12 * std::max(1.0, std::abs(p))) {
      real_poles.push_back(p.real());
    } else if (p.imag() > 0.0) {
      upper.push_back(p);
    }
  }
  // Least resonant section first.
  std::sort(upper.begin(), upper.end(),
            [](cplx a, cplx b) { return std::abs(a) < std::abs(b); });

  std::vector<double> real_zeros;
  for (const cplx& z : zeros) real_zeros.push_back(z.real());
  // Alternate +1 / -1 zeros so bandpass sections each get one of each.
  std::sort(real_zeros.begin(), real_zeros.end());
  std::vector<double> ordered_zeros;
  for (std::size_t lo = 0, hi = real_zeros.size(); lo < hi;) {
    ordered_zeros.push_back(real_zeros[--hi]);
    if (lo < hi) ordered_zeros.push_back(real_zeros[lo++]);
  }

  std::vector<Biquad> sections;
  std::size_t zi = 0;
  auto take_zero = [&]() -> std::optional<double> {
    if (zi < ordered_zeros.size()) return ordered_zeros[zi++];
    return std::nullopt;
  };
  const cplx z_inv = std::polar(1.0, -2.0 * std::numbers::pi * ref_hz / sample_rate);

  auto finish = [&](Biquad s) {
    const double g = std::abs(section_response(s, z_inv));
    s.b0 /= g;
    s.b1 /= g;
    s.b2 /= g;
    sections.push_back(s);
  };

  for (const cplx& p : upper) {
    Biquad s;
    s.a1 = -2.0 * p.real();
    s.a2 = std::norm(p);
    std::vector<double> num{1.0};
    for (int k = 0; k < 2; ++k) {
      if (auto z = take_zero()) num = poly_multiply(num, {1.0, -*z});
    }
    num.resize(3, 0.0);
    s.b0 = num[0];
    s.b1 = num[1];
    s.b2 = num[2];
    finish(s);
  }
  for (std::size_t i = 0; i < real_poles.size(); i += 2) {
    Biquad s;
    std::vector<double> den{1.0, -real_poles[i]};
    if (i + 1 < real_poles.size()) den = poly_multiply(den, {1.0, -real_poles[i + 1]});
    den.resize(3, 0.0);
    s.a1 = den[1];
    s.a2 = den[2];
    const int nz = i + 1 < real_poles.size() ? 2 : 1;
    std::vector<double> num{1.0};
    for (int k = 0; k < nz; ++k) {
      if (auto z = take_zero()) num = poly_multiply(num, {1.0, -*z});
    }
    num.resize(3, 0.0);
    s.b0 = num[0];
    s.b1 = num[1];
    s.b2 = num[2];
    finish(s);
  }
  return sections;
}

}  // namespace

IirFilter::IirFilter(std::vector<Biquad> sections, FilterDesign design)
    : sections_(std::move(sections)), design_(std::move(design)) {
  if (!(design_.sample_rate > 0.0)) {
    throw RangeError("filter design sample rate must be positive");
  }
}

IirFilter IirFilter::from_transfer_function(std::vector<double> feedforward,
                                            std::vector<double> feedback,
                                            double sample_rate) {
  if (feedback.empty() || feedback[0] == 0.0) {
    throw RangeError("first feedback coefficient must be non-zero");
  }
  if (feedforward.size() > 3 || feedback.size() > 3 || feedforward.empty()) {
    throw RangeError("from_transfer_function supports orders up to 2");
  }
  const double a0 = feedback[0];
  feedforward.resize(3, 0.0);
  feedback.resize(3, 0.0);
  Biquad s{feedforward[0] / a0, feedforward[1] / a0, feedforward[2] / a0,
           feedback[1] / a0, feedback[2] / a0};
  FilterDesign d;
  d.kind = FilterKind::kCustom;
  d.sample_rate = sample_rate;
  return IirFilter({s}, d);
}

std::vector<double> IirFilter::feedforward() const {
  std::vector<double> b{1.0};
  for (const Biquad& s : sections_) b = poly_multiply(b, {s.b0, s.b1, s.b2});
  return b;
}

std::vector<double> IirFilter::feedback() const {
  std::vector<double> a{1.0};
  for (const Biquad& s : sections_) a = poly_multiply(a, {1.0, s.a1, s.a2});
  return a;
}

std::vector<std::complex<double>> IirFilter::poles() const {
  std::vector<cplx> out;
  for (const Biquad& s : sections_) {
    if (s.a1 == 0.0 && s.a2 == 0.0) continue;
    auto [p1, p2] = quadratic_roots(s.a1, s.a2);
    out.push_back(p1);
    if (s.a2 != 0.0) out.push_back(p2);
  }
  return out;
}

std::complex<double> IirFilter::response(double freq_hz) const {
  const cplx z_inv =
      std::polar(1.0, -2.0 * std::numbers::pi * freq_hz / design_.sample_rate);
  cplx h(1.0, 0.0);
  for (const Biquad& s : sections_) h *= section_response(s, z_inv);
  return h;
}

double IirFilter::gain_db(double freq_hz) const {
  return 20.0 * std::log10(std::abs(response(freq_hz)));
}

IirFilter design_butterworth_lowpass(int order, double cutoff_hz,
                                     double sample_rate) {
  if (order < 1) throw RangeError("filter order must be positive");
  if (!(cutoff_hz > 0.0) || !(cutoff_hz < sample_rate / 2.0)) {
    throw RangeError("lowpass cutoff " + std::to_string(cutoff_hz) +
                     " Hz must lie in (0, Nyquist)");
  }
  const double wc = prewarp(cutoff_hz, sample_rate);
  std::vector<cplx> poles;
  for (const cplx& p : butterworth_prototype(order)) {
    poles.push_back(bilinear(p * wc, sample_rate));
  }
  std::vector<cplx> zeros(order, cplx(-1.0, 0.0));
  FilterDesign d{FilterKind::kLowpass, order, {cutoff_hz}, sample_rate};
  return IirFilter(to_sections(poles, zeros, 0.0, sample_rate), d);
}

IirFilter design_butterworth_bandpass(int order_per_side, double low_hz,
                                      double high_hz, double sample_rate) {
  if (order_per_side < 1) throw RangeError("filter order must be positive");
  if (!(low_hz > 0.0) || !(low_hz < high_hz) ||
      !(high_hz < sample_rate / 2.0)) {
    throw RangeError("bandpass corners (" + std::to_string(low_hz) + ", " +
                     std::to_string(high_hz) +
                     ") Hz must satisfy 0 < low < high < Nyquist");
  }
  const double w1 = prewarp(low_hz, sample_rate);
  const double w2 = prewarp(high_hz, sample_rate);
  const double bw = w2 - w1;
  const double w0 = std::sqrt(w1 * w2);
  std::vector<cplx> poles;
  for (const cplx& p : butterworth_prototype(order_per_side)) {
    const cplx lp = p * bw / 2.0;
    const cplx root = std::sqrt(lp * lp - w0 * w0);
    poles.push_back(bilinear(lp + root, sample_rate));
    poles.push_back(bilinear(lp - root, sample_rate));
  }
  std::vector<cplx> zeros;
  for (int k = 0; k < order_per_side; ++k) {
    zeros.emplace_back(1.0, 0.0);
    zeros.emplace_back(-1.0, 0.0);
  }
  // Digital frequency of the analog geometric center.
  const double center_hz =
      sample_rate / std::numbers::pi * std::atan(w0 / (2.0 * sample_rate));
  FilterDesign d{FilterKind::kBandpass, order_per_side, {low_hz, high_hz},
                 sample_rate};
  return IirFilter(to_sections(poles, zeros, center_hz, sample_rate), d);
}

Signal filter_apply(const IirFilter& filter, const Signal& input) {
  require_same_rate(filter.sample_rate(), input.sample_rate(), "filter_apply");
  std::vector<double> y(input.data());
  for (const Biquad& s : filter.sections()) {
    // Transposed direct form II.
    double z1 = 0.0, z2 = 0.0;
    for (double& v : y) {
      const double x = v;
      const double out = s.b0 * x + z1;
      z1 = s.b1 * x - s.a1 * out + z2;
      z2 = s.b2 * x - s.a2 * out;
      v = out;
    }
  }
  return Signal(std::move(y), input.sample_rate());
}

IirFilter octave_band_filter(double center_hz, double sample_rate) {
  const double nyq = sample_rate / 2.0;
  const double low = center_hz / std::numbers::sqrt2;
  const double high =
      std::min(center_hz * std::numbers::sqrt2, kUpperCornerNyquistFraction * nyq);
  return design_butterworth_bandpass(kOctaveFilterOrder, low, high, sample_rate);
}

IirFilter third_octave_band_filter(double center_hz, double sample_rate) {
  const double nyq = sample_rate / 2.0;
  const double low = center_hz * std::pow(2.0, -1.0 / 6.0);
  const double high = std::min(center_hz * std::pow(2.0, 1.0 / 6.0),
                               kUpperCornerNyquistFraction * nyq);
  return design_butterworth_bandpass(kOctaveFilterOrder, low, high, sample_rate);
}

}  // namespace mtfcnn
