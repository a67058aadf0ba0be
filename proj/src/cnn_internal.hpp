#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mtfcnn/cnn.hpp"
#include "mtfcnn/random.hpp"

namespace mtfcnn::detail {

constexpr double kBatchNormEpsilon = 1e-5;

struct SampleCache {
  std::vector<double> x;
  std::vector<double> z1, xhat1, a1;  // conv1 output, normalized, activated
  std::vector<double> p1;
  std::vector<std::uint32_t> i1;
  std::vector<double> a2, p2;
  std::vector<std::uint32_t> i2;
  std::vector<double> d2, mask;  // after dropout; empty mask when inactive
  std::vector<double> a3, p3;
  std::vector<std::uint32_t> i3;
  std::vector<double> a4;
  double fc = 0.0;   // pre-activation output
  double out = 0.0;  // ReLU(fc)
};

struct BatchNormStats {
  std::vector<double> mean, var, inv_std;
  std::size_t elements = 0;
};

struct DropoutPlan {
  double rate = 0.0;
  Rng* rng = nullptr;
};

void run_forward(const CnnModel& model, std::span<const std::vector<double>> taes,
                 Mode mode, const DropoutPlan& dropout,
                 std::vector<SampleCache>& caches, BatchNormStats& stats);

// Piecewise-linear region of a training-mode batch pass without dropout:
// every ReLU sign and max-pool winner, flattened. Two parameter vectors with
// equal patterns lie in the same smooth piece of the loss.
std::vector<std::uint32_t> activation_pattern(const CnnModel& model,
                                              std::span<const std::vector<double>> taes);

// Rounds every value to the nearest float32 so that 32-bit model files
// round-trip exactly.
void round_to_float(std::vector<double>& v);

}  // namespace mtfcnn::detail
