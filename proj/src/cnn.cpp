#include "mtfcnn/cnn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cnn_internal.hpp"
#include "mtfcnn/error.hpp"
#include "mtfcnn/random.hpp"

namespace mtfcnn {

// ---- shapes ----------------------------------------------------------------

std::vector<std::size_t> Architecture::stage_lengths() const {
  std::vector<std::size_t> out{input_length};
  std::size_t len = input_length;
  for (std::size_t layer = 0; layer < convs.size(); ++layer) {
    if (len < convs[layer].kernel) throw ShapeError("input too short for conv stack");
    len = len - convs[layer].kernel + 1;
    out.push_back(len);
    if (layer + 1 < convs.size()) {
      if (len < pool_size) throw ShapeError("input too short for pooling");
      len = (len - pool_size) / pool_stride + 1;
      out.push_back(len);
    }
  }
  return out;
}

std::size_t Architecture::flatten_width() const {
  return stage_lengths().back() * convs.back().out_channels;
}

std::size_t Architecture::conv_in_channels(std::size_t layer) const {
  return layer == 0 ? 1 : convs[layer - 1].out_channels;
}

std::size_t TensorSlot::size() const {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

ParamLayout::ParamLayout(const Architecture& arch) {
  auto add = [&](std::string name, std::vector<std::size_t> shape) {
    TensorSlot s{std::move(name), std::move(shape), total};
    total += s.size();
    slots.push_back(s);
    return s.offset;
  };
  for (std::size_t l = 0; l < 4; ++l) {
    const auto& c = arch.convs[l];
    const std::string base = "conv" + std::to_string(l + 1);
    conv_w[l] = add(base + ".weight", {c.out_channels, arch.conv_in_channels(l), c.kernel});
    conv_b[l] = add(base + ".bias", {c.out_channels});
    if (l == 0) {
      bn_gamma = add("bn1.scale", {c.out_channels});
      bn_beta = add("bn1.shift", {c.out_channels});
    }
  }
  fc_w = add("fc.weight", {arch.flatten_width()});
  fc_b = add("fc.bias", {1});
}

// ---- construction ----------------------------------------------------------

namespace detail {

void round_to_float(std::vector<double>& v) {
  for (double& x : v) x = static_cast<double>(static_cast<float>(x));
}

}  // namespace detail

CnnModel CnnModel::zeros(int band_hz, const Architecture& arch) {
  CnnModel m;
  m.arch = arch;
  m.band_hz = band_hz;
  const ParamLayout layout(arch);
  m.params.assign(layout.total, 0.0);
  m.running_mean.assign(arch.convs[0].out_channels, 0.0);
  m.running_var.assign(arch.convs[0].out_channels, 1.0);
  return m;
}

CnnModel CnnModel::initialized(int band_hz, std::uint64_t seed,
                               const Architecture& arch) {
  CnnModel m = zeros(band_hz, arch);
  const ParamLayout layout(arch);
  Rng rng(derive_seed(seed, {kTagInit, static_cast<std::uint64_t>(band_hz)}));
  auto fill_uniform = [&](std::size_t offset, std::size_t count, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (std::size_t i = 0; i < count; ++i) m.params[offset + i] = rng.uniform(-bound, bound);
  };
  for (std::size_t l = 0; l < 4; ++l) {
    const auto& c = arch.convs[l];
    const std::size_t fan_in = arch.conv_in_channels(l) * c.kernel;
    fill_uniform(layout.conv_w[l], c.out_channels * fan_in, fan_in);
  }
  fill_uniform(layout.fc_w, arch.flatten_width(), arch.flatten_width());
  for (std::size_t c = 0; c < arch.convs[0].out_channels; ++c) {
    m.params[layout.bn_gamma + c] = 1.0;
  }
  detail::round_to_float(m.params);
  return m;
}

// ---- kernels ---------------------------------------------------------------

namespace {

void conv_forward(const double* in, std::size_t cin, std::size_t lin,
                  const double* w, const double* b, std::size_t cout,
                  std::size_t k, double* out) {
  const std::size_t lout = lin - k + 1;
  for (std::size_t o = 0; o < cout; ++o) {
    double* dst = out + o * lout;
    std::fill(dst, dst + lout, b[o]);
    for (std::size_t c = 0; c < cin; ++c) {
      const double* wrow = w + (o * cin + c) * k;
      for (std::size_t kk = 0; kk < k; ++kk) {
        const double wv = wrow[kk];
        const double* src = in + c * lin + kk;
        for (std::size_t t = 0; t < lout; ++t) dst[t] += wv * src[t];
      }
    }
  }
}

// Accumulates dW, db and (when din != nullptr) dIn.
void conv_backward(const double* in, std::size_t cin, std::size_t lin,
                   const double* w, std::size_t cout, std::size_t k,
                   const double* dout, double* dw, double* db, double* din) {
  const std::size_t lout = lin - k + 1;
  for (std::size_t o = 0; o < cout; ++o) {
    const double* g = dout + o * lout;
    double gsum = 0.0;
    for (std::size_t t = 0; t < lout; ++t) gsum += g[t];
    db[o] += gsum;
    for (std::size_t c = 0; c < cin; ++c) {
      const std::size_t wbase = (o * cin + c) * k;
      for (std::size_t kk = 0; kk < k; ++kk) {
        const double* src = in + c * lin + kk;
        double s = 0.0;
        for (std::size_t t = 0; t < lout; ++t) s += g[t] * src[t];
        dw[wbase + kk] += s;
        if (din != nullptr) {
          const double wv = w[wbase + kk];
          double* dd = din + c * lin + kk;
          for (std::size_t t = 0; t < lout; ++t) dd[t] += wv * g[t];
        }
      }
    }
  }
}

void relu_inplace(std::vector<double>& v) {
  for (double& x : v) x = x > 0.0 ? x : 0.0;
}

// Ties route to the first maximal index.
void pool_forward(const std::vector<double>& in, std::size_t ch, std::size_t lin,
                  std::size_t size, std::size_t stride, std::vector<double>& out,
                  std::vector<std::uint32_t>& idx) {
  const std::size_t lout = (lin - size) / stride + 1;
  out.resize(ch * lout);
  idx.resize(ch * lout);
  for (std::size_t c = 0; c < ch; ++c) {
    for (std::size_t i = 0; i < lout; ++i) {
      std::size_t best = c * lin + i * stride;
      for (std::size_t j = 1; j < size; ++j) {
        const std::size_t cand = c * lin + i * stride + j;
        if (in[cand] > in[best]) best = cand;
      }
      out[c * lout + i] = in[best];
      idx[c * lout + i] = static_cast<std::uint32_t>(best);
    }
  }
}

void pool_backward(const std::vector<double>& dout,
                   const std::vector<std::uint32_t>& idx,
                   std::vector<double>& din) {
  for (std::size_t i = 0; i < dout.size(); ++i) din[idx[i]] += dout[i];
}

}  // namespace

// ---- network pass ----------------------------------------------------------

namespace detail {

void run_forward(const CnnModel& model, std::span<const std::vector<double>> taes,
                 Mode mode, const DropoutPlan& dropout, std::vector<SampleCache>& caches,
                 BatchNormStats& stats) {
  const Architecture& a = model.arch;
  const ParamLayout layout(a);
  const auto lengths = a.stage_lengths();
  const double* p = model.params.data();
  const std::size_t c1 = a.convs[0].out_channels;
  const std::size_t l1 = lengths[1];

  caches.resize(taes.size());
  for (std::size_t s = 0; s < taes.size(); ++s) {
    if (taes[s].size() != a.input_length) {
      throw ShapeError("regressor input must have " + std::to_string(a.input_length) +
                       " samples, got " + std::to_string(taes[s].size()));
    }
    SampleCache& sc = caches[s];
    sc.x = taes[s];
    sc.z1.resize(c1 * l1);
    conv_forward(sc.x.data(), 1, a.input_length, p + layout.conv_w[0],
                 p + layout.conv_b[0], c1, a.convs[0].kernel, sc.z1.data());
  }

  stats.mean.assign(c1, 0.0);
  stats.var.assign(c1, 0.0);
  stats.elements = taes.size() * l1;
  if (mode == Mode::kTrain) {
    const double n = static_cast<double>(stats.elements);
    for (std::size_t c = 0; c < c1; ++c) {
      double sum = 0.0;
      for (const SampleCache& sc : caches) {
        for (std::size_t t = 0; t < l1; ++t) sum += sc.z1[c * l1 + t];
      }
      const double mean = sum / n;
      double sq = 0.0;
      for (const SampleCache& sc : caches) {
        for (std::size_t t = 0; t < l1; ++t) {
          const double d = sc.z1[c * l1 + t] - mean;
          sq += d * d;
        }
      }
      stats.mean[c] = mean;
      stats.var[c] = sq / n;
    }
  } else {
    stats.mean = model.running_mean;
    stats.var = model.running_var;
  }
  stats.inv_std.resize(c1);
  for (std::size_t c = 0; c < c1; ++c) {
    stats.inv_std[c] = 1.0 / std::sqrt(stats.var[c] + kBatchNormEpsilon);
  }

  const double* fc_w = p + layout.fc_w;
  for (std::size_t s = 0; s < caches.size(); ++s) {
    SampleCache& sc = caches[s];
    sc.xhat1.resize(c1 * l1);
    sc.a1.resize(c1 * l1);
    for (std::size_t c = 0; c < c1; ++c) {
      const double g = p[layout.bn_gamma + c];
      const double b = p[layout.bn_beta + c];
      for (std::size_t t = 0; t < l1; ++t) {
        const double xh = (sc.z1[c * l1 + t] - stats.mean[c]) * stats.inv_std[c];
        sc.xhat1[c * l1 + t] = xh;
        const double y = g * xh + b;
        sc.a1[c * l1 + t] = y > 0.0 ? y : 0.0;
      }
    }
    pool_forward(sc.a1, c1, l1, a.pool_size, a.pool_stride, sc.p1, sc.i1);

    // conv2
    const std::size_t c2 = a.convs[1].out_channels;
    sc.a2.resize(c2 * lengths[3]);
    conv_forward(sc.p1.data(), c1, lengths[2], p + layout.conv_w[1], p + layout.conv_b[1],
                 c2, a.convs[1].kernel, sc.a2.data());
    relu_inplace(sc.a2);
    pool_forward(sc.a2, c2, lengths[3], a.pool_size, a.pool_stride, sc.p2, sc.i2);

    sc.d2 = sc.p2;
    sc.mask.clear();
    if (dropout.rate > 0.0) {
      sc.mask.resize(sc.p2.size());
      const double keep_scale = 1.0 / (1.0 - dropout.rate);
      for (std::size_t i = 0; i < sc.mask.size(); ++i) {
        sc.mask[i] = dropout.rng->uniform() < dropout.rate ? 0.0 : keep_scale;
        sc.d2[i] *= sc.mask[i];
      }
    }

    const std::size_t c3 = a.convs[2].out_channels;
    sc.a3.resize(c3 * lengths[5]);
    conv_forward(sc.d2.data(), c2, lengths[4], p + layout.conv_w[2], p + layout.conv_b[2],
                 c3, a.convs[2].kernel, sc.a3.data());
    relu_inplace(sc.a3);
    pool_forward(sc.a3, c3, lengths[5], a.pool_size, a.pool_stride, sc.p3, sc.i3);

    const std::size_t c4 = a.convs[3].out_channels;
    sc.a4.resize(c4 * lengths[7]);
    conv_forward(sc.p3.data(), c3, lengths[6], p + layout.conv_w[3], p + layout.conv_b[3],
                 c4, a.convs[3].kernel, sc.a4.data());
    relu_inplace(sc.a4);

    double y = p[layout.fc_b];
    for (std::size_t i = 0; i < sc.a4.size(); ++i) y += fc_w[i] * sc.a4[i];
    sc.fc = y;
    sc.out = y > 0.0 ? y : 0.0;
  }
}

std::vector<std::uint32_t> activation_pattern(const CnnModel& model,
                                              std::span<const std::vector<double>> taes) {
  std::vector<SampleCache> caches;
  BatchNormStats stats;
  run_forward(model, taes, Mode::kTrain, {}, caches, stats);
  std::vector<std::uint32_t> out;
  const auto signs = [&out](const std::vector<double>& v) {
    for (double x : v) out.push_back(x > 0.0 ? 1u : 0u);
  };
  for (const SampleCache& sc : caches) {
    signs(sc.a1);
    out.insert(out.end(), sc.i1.begin(), sc.i1.end());
    signs(sc.a2);
    out.insert(out.end(), sc.i2.begin(), sc.i2.end());
    signs(sc.a3);
    out.insert(out.end(), sc.i3.begin(), sc.i3.end());
    signs(sc.a4);
    out.push_back(sc.fc > 0.0 ? 1u : 0u);
  }
  return out;
}

}  // namespace detail

double forward(const CnnModel& model, std::span<const double> tae, Mode mode) {
  std::vector<std::vector<double>> batch{std::vector<double>(tae.begin(), tae.end())};
  std::vector<detail::SampleCache> caches;
  detail::BatchNormStats stats;
  detail::run_forward(model, batch, mode, {}, caches, stats);
  return caches[0].out;
}

std::vector<double> predict(const CnnModel& model,
                            std::span<const std::vector<double>> taes) {
  std::vector<double> out;
  out.reserve(taes.size());
  std::vector<detail::SampleCache> caches;
  detail::BatchNormStats stats;
  // Inference has no cross-sample coupling; run one at a time to bound memory.
  for (const auto& t : taes) {
    detail::run_forward(model, std::span(&t, 1), Mode::kInfer, {}, caches, stats);
    out.push_back(caches[0].out);
  }
  return out;
}

ForwardTrace forward_trace(const CnnModel& model, std::span<const double> tae) {
  std::vector<std::vector<double>> batch{std::vector<double>(tae.begin(), tae.end())};
  std::vector<detail::SampleCache> caches;
  detail::BatchNormStats stats;
  detail::run_forward(model, batch, Mode::kInfer, {}, caches, stats);
  const auto& sc = caches[0];
  const auto& a = model.arch;
  ForwardTrace tr;
  tr.lengths = {sc.x.size(),
                sc.a1.size() / a.convs[0].out_channels,
                sc.p1.size() / a.convs[0].out_channels,
                sc.a2.size() / a.convs[1].out_channels,
                sc.p2.size() / a.convs[1].out_channels,
                sc.a3.size() / a.convs[2].out_channels,
                sc.p3.size() / a.convs[2].out_channels,
                sc.a4.size() / a.convs[3].out_channels};
  tr.flatten_width = sc.a4.size();
  tr.output = sc.out;
  return tr;
}

double loss_mse(std::span<const double> predictions, std::span<const double> targets) {
  if (predictions.empty()) throw ContractError("loss_mse: empty input");
  if (predictions.size() != targets.size()) {
    throw ContractError("loss_mse: length mismatch");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double d = predictions[i] - targets[i];
    sum += d * d;
  }
  return sum / static_cast<double>(predictions.size());
}

GradientResult backward(const CnnModel& model, std::span<const std::vector<double>> taes,
                        std::span<const double> targets, const BackwardOptions& options) {
  if (taes.empty()) throw ContractError("backward: empty batch");
  if (taes.size() != targets.size()) throw ContractError("backward: batch/target mismatch");
  if (!options.sample_weights.empty() && options.sample_weights.size() != taes.size()) {
    throw ContractError("backward: sample weight count mismatch");
  }
  const Architecture& a = model.arch;
  const ParamLayout layout(a);
  const auto lengths = a.stage_lengths();
  const double* p = model.params.data();

  Rng dropout_rng(options.dropout_seed);
  detail::DropoutPlan plan{options.dropout_rate, &dropout_rng};
  std::vector<detail::SampleCache> caches;
  detail::BatchNormStats stats;
  detail::run_forward(model, taes, Mode::kTrain, plan, caches, stats);

  GradientResult r;
  r.gradient.assign(layout.total, 0.0);
  double* g = r.gradient.data();
  const double n = static_cast<double>(taes.size());

  const std::size_t c1 = a.convs[0].out_channels, c2 = a.convs[1].out_channels,
                    c3 = a.convs[2].out_channels, c4 = a.convs[3].out_channels;
  std::vector<std::vector<double>> dy1(caches.size());

  double loss = 0.0;
  for (std::size_t s = 0; s < caches.size(); ++s) {
    const detail::SampleCache& sc = caches[s];
    const double w = options.sample_weights.empty() ? 1.0 : options.sample_weights[s];
    const double diff = sc.out - targets[s];
    loss += w * diff * diff;
    r.predictions.push_back(sc.out);

    const double dout = 2.0 * w * diff / n;
    const double dfc = sc.fc > 0.0 ? dout : 0.0;
    g[layout.fc_b] += dfc;

    std::vector<double> da4(sc.a4.size());
    for (std::size_t i = 0; i < sc.a4.size(); ++i) {
      g[layout.fc_w + i] += dfc * sc.a4[i];
      da4[i] = sc.a4[i] > 0.0 ? dfc * p[layout.fc_w + i] : 0.0;
    }

    std::vector<double> dp3(sc.p3.size(), 0.0);
    conv_backward(sc.p3.data(), c3, lengths[6], p + layout.conv_w[3], c4, a.convs[3].kernel,
                  da4.data(), g + layout.conv_w[3], g + layout.conv_b[3], dp3.data());

    std::vector<double> da3(sc.a3.size(), 0.0);
    pool_backward(dp3, sc.i3, da3);
    for (std::size_t i = 0; i < da3.size(); ++i) {
      if (!(sc.a3[i] > 0.0)) da3[i] = 0.0;
    }

    std::vector<double> dd2(sc.d2.size(), 0.0);
    conv_backward(sc.d2.data(), c2, lengths[4], p + layout.conv_w[2], c3, a.convs[2].kernel,
                  da3.data(), g + layout.conv_w[2], g + layout.conv_b[2], dd2.data());
    if (!sc.mask.empty()) {
      for (std::size_t i = 0; i < dd2.size(); ++i) dd2[i] *= sc.mask[i];
    }

    std::vector<double> da2(sc.a2.size(), 0.0);
    pool_backward(dd2, sc.i2, da2);
    for (std::size_t i = 0; i < da2.size(); ++i) {
      if (!(sc.a2[i] > 0.0)) da2[i] = 0.0;
    }

    std::vector<double> dp1(sc.p1.size(), 0.0);
    conv_backward(sc.p1.data(), c1, lengths[2], p + layout.conv_w[1], c2, a.convs[1].kernel,
                  da2.data(), g + layout.conv_w[1], g + layout.conv_b[1], dp1.data());

    std::vector<double>& d1 = dy1[s];
    d1.assign(sc.a1.size(), 0.0);
    pool_backward(dp1, sc.i1, d1);
    for (std::size_t i = 0; i < d1.size(); ++i) {
      if (!(sc.a1[i] > 0.0)) d1[i] = 0.0;
    }
  }
  r.loss = loss / n;

  // Batch-norm backward couples all samples through the batch statistics.
  const std::size_t l1 = lengths[1];
  const double m = static_cast<double>(stats.elements);
  for (std::size_t c = 0; c < c1; ++c) {
    const double gamma = p[layout.bn_gamma + c];
    double sum_dy = 0.0, sum_dy_xhat = 0.0;
    for (std::size_t s = 0; s < caches.size(); ++s) {
      for (std::size_t t = 0; t < l1; ++t) {
        const double dy = dy1[s][c * l1 + t];
        sum_dy += dy;
        sum_dy_xhat += dy * caches[s].xhat1[c * l1 + t];
      }
    }
    g[layout.bn_beta + c] += sum_dy;
    g[layout.bn_gamma + c] += sum_dy_xhat;
    // dxhat = gamma * dy; dz = inv_std/m * (m dxhat - sum dxhat - xhat sum dxhat*xhat)
    const double k = gamma * stats.inv_std[c] / m;
    for (std::size_t s = 0; s < caches.size(); ++s) {
      for (std::size_t t = 0; t < l1; ++t) {
        const std::size_t i = c * l1 + t;
        dy1[s][i] = k * (m * dy1[s][i] - sum_dy - caches[s].xhat1[i] * sum_dy_xhat);
      }
    }
  }
  for (std::size_t s = 0; s < caches.size(); ++s) {
    conv_backward(caches[s].x.data(), 1, a.input_length, p + layout.conv_w[0], c1,
                  a.convs[0].kernel, dy1[s].data(), g + layout.conv_w[0],
                  g + layout.conv_b[0], nullptr);
  }

  r.batch_mean = stats.mean;
  r.batch_var = stats.var;
  r.batch_elements = stats.elements;
  return r;
}

}  // namespace mtfcnn
