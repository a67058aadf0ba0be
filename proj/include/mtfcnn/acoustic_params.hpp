#pragma once

#include <string>
#include <vector>

#include "mtfcnn/rir.hpp"

namespace mtfcnn {

// Floor used for log10(0) once the backward integral is exhausted.
constexpr double kEdcFloorDb = -300.0;

// Schroeder backward-integrated decay, level[0] == 0 dB, non-increasing.
struct EnergyDecayCurve {
  std::vector<double> time;   // s, from 0
  std::vector<double> level;  // dB
};

EnergyDecayCurve energy_decay_curve(const Rir& rir);

// Least-squares line over the -5..-35 dB segment, extrapolated to -60 dB.
// Throws InsufficientDecayError if the curve never reaches -35 dB.
double estimate_t60(const EnergyDecayCurve& edc);
// Least-squares line over 0..-10 dB, scaled by 6.
double estimate_edt(const EnergyDecayCurve& edc);

// Clarity; an RIR with no energy after 80 ms is "anechoic" and has no finite
// value.
struct Clarity {
  double db = 0.0;
  bool anechoic = false;
};

Clarity clarity_c80(const Rir& rir);
double deutlichkeit_d50(const Rir& rir);  // percent
double center_time(const Rir& rir);       // seconds

struct RoomParams {
  double t60 = 0.0;  // s
  double edt = 0.0;  // s
  Clarity c80;       // dB
  double d50 = 0.0;  // %
  double ts = 0.0;   // s
};

// The reverberation-time fit used by room_params; recorded in reports.
inline const std::string kT60Method = "T30 (-5..-35 dB, extrapolated to -60 dB)";

RoomParams room_params(const Rir& rir);

}  // namespace mtfcnn
