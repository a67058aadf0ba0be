#include "mtfcnn/acoustic_params.hpp"

#include <cmath>
#include <limits>

#include "mtfcnn/error.hpp"

namespace mtfcnn {

namespace {

struct LineFit {
  double slope = 0.0;  // dB per second
  double intercept = 0.0;
};

// Fits level = intercept + slope * time over points with hi >= level >= lo.
LineFit fit_segment(const EnergyDecayCurve& edc, double hi_db, double lo_db,
                    const char* what) {
  double st = 0.0, sl = 0.0, stt = 0.0, stl = 0.0;
  std::size_t n = 0;
  bool reached = false;
  for (std::size_t i = 0; i < edc.level.size(); ++i) {
    const double l = edc.level[i];
    if (l <= lo_db) reached = true;
    if (l > hi_db || l < lo_db) continue;
    const double t = edc.time[i];
    st += t;
    sl += l;
    stt += t * t;
    stl += t * l;
    ++n;
  }
  if (!reached || n < 2) {
    throw InsufficientDecayError(std::string(what) +
                                 ": energy decay curve never reaches " +
                                 std::to_string(lo_db) + " dB");
  }
  const double dn = static_cast<double>(n);
  const double denom = dn * stt - st * st;
  if (!(denom > 0.0)) {
    throw InsufficientDecayError(std::string(what) + ": degenerate fit segment");
  }
  LineFit f;
  f.slope = (dn * stl - st * sl) / denom;
  f.intercept = (sl - f.slope * st) / dn;
  if (!(f.slope < 0.0)) {
    throw InsufficientDecayError(std::string(what) + ": non-decaying fit");
  }
  return f;
}

std::size_t boundary_index(double seconds, double sample_rate) {
  return static_cast<std::size_t>(std::llround(seconds * sample_rate));
}

}  // namespace

EnergyDecayCurve energy_decay_curve(const Rir& rir) {
  const auto& h = rir.signal.data();
  const double fs = rir.signal.sample_rate();
  const std::size_t n = h.size();
  std::vector<double> tail(n);
  double acc = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    acc += h[i] * h[i];
    tail[i] = acc;
  }
  const double total = acc;
  if (!(total > 0.0)) throw ContractError("energy_decay_curve: zero energy");
  EnergyDecayCurve edc;
  edc.time.resize(n);
  edc.level.resize(n);
  double prev = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    edc.time[i] = static_cast<double>(i) / fs;
    double l = tail[i] > 0.0 ? 10.0 * std::log10(tail[i] / total) : kEdcFloorDb;
    l = std::max(l, kEdcFloorDb);
    // Rounding in the running sum must not break monotonicity.
    if (i == 0) {
      l = 0.0;
    } else if (l > prev) {
      l = prev;
    }
    edc.level[i] = l;
    prev = l;
  }
  return edc;
}

double estimate_t60(const EnergyDecayCurve& edc) {
  const LineFit f = fit_segment(edc, -5.0, -35.0, "estimate_t60");
  return -60.0 / f.slope;
}

double estimate_edt(const EnergyDecayCurve& edc) {
  const LineFit f = fit_segment(edc, 0.0, -10.0, "estimate_edt");
  return -60.0 / f.slope;
}

Clarity clarity_c80(const Rir& rir) {
  const auto& h = rir.signal.data();
  const std::size_t b = boundary_index(0.080, rir.signal.sample_rate());
  if (h.size() <= b) {
    throw ContractError("clarity_c80: RIR shorter than 80 ms");
  }
  double early = 0.0, late = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    (i <= b ? early : late) += h[i] * h[i];
  }
  if (late == 0.0) {
    return Clarity{std::numeric_limits<double>::infinity(), true};
  }
  if (early == 0.0) return Clarity{-std::numeric_limits<double>::infinity(), false};
  return Clarity{10.0 * std::log10(early / late), false};
}

double deutlichkeit_d50(const Rir& rir) {
  const auto& h = rir.signal.data();
  const std::size_t b = boundary_index(0.050, rir.signal.sample_rate());
  if (h.size() <= b) {
    throw ContractError("deutlichkeit_d50: RIR shorter than 50 ms");
  }
  double early = 0.0, total = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double e = h[i] * h[i];
    total += e;
    if (i <= b) early += e;
  }
  return 100.0 * early / total;
}

double center_time(const Rir& rir) {
  const auto& h = rir.signal.data();
  const double fs = rir.signal.sample_rate();
  double moment = 0.0, total = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double e = h[i] * h[i];
    moment += e * static_cast<double>(i);
    total += e;
  }
  return moment / total / fs;
}

RoomParams room_params(const Rir& rir) {
  const EnergyDecayCurve edc = energy_decay_curve(rir);
  RoomParams p;
  p.t60 = estimate_t60(edc);
  p.edt = estimate_edt(edc);
  p.c80 = clarity_c80(rir);
  p.d50 = deutlichkeit_d50(rir);
  p.ts = center_time(rir);
  return p;
}

}  // namespace mtfcnn
