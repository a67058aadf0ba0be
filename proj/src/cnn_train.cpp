#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <limits>
#include <algorithm>

#include "cnn_internal.hpp"
#include "mtfcnn/cnn.hpp"
#include "mtfcnn/error.hpp"
#include "mtfcnn/random.hpp"

namespace mtfcnn {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw RangeError("learning rate must be positive");
  if (batch_size == 0) throw RangeError("batch size must be positive");
  if (max_epochs <= 0) throw RangeError("max epochs must be positive");
  if (patience <= 0) throw RangeError("patience must be positive");
  if (!(validation_fraction > 0.0 && validation_fraction <= 0.5)) {
    throw RangeError("validation fraction must lie in (0, 0.5]");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) throw RangeError("dropout must lie in [0, 1)");
}

namespace {

void shuffle(std::vector<std::size_t>& idx, Rng& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    std::swap(idx[i - 1], idx[rng.uniform_index(i)]);
  }
}

struct Adam {
  explicit Adam(std::size_t n) : m(n, 0.0), v(n, 0.0) {}

  void step(std::vector<double>& params, const std::vector<double>& grad,
            const TrainConfig& c) {
    ++t;
    const double bc1 = 1.0 - std::pow(c.adam_beta1, t);
    const double bc2 = 1.0 - std::pow(c.adam_beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
      m[i] = c.adam_beta1 * m[i] + (1.0 - c.adam_beta1) * grad[i];
      v[i] = c.adam_beta2 * v[i] + (1.0 - c.adam_beta2) * grad[i] * grad[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      params[i] -= c.learning_rate * mhat / (std::sqrt(vhat) + c.adam_epsilon);
    }
  }

  std::vector<double> m, v;
  int t = 0;
};

}  // namespace

TrainResult train(std::span<const TrainingSample> data, const TrainConfig& config,
                  int band_hz, const Architecture& arch) {
  config.validate();
  if (data.size() < 10) {
    throw ContractError("train needs at least 10 samples, got " +
                        std::to_string(data.size()));
  }

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  {
    Rng rng(derive_seed(config.seed, {kTagValidation, static_cast<std::uint64_t>(band_hz)}));
    shuffle(order, rng);
  }
  const auto n_val = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(config.validation_fraction *
                                               static_cast<double>(data.size()))));
  std::vector<std::size_t> val_idx(order.begin(), order.begin() + n_val);
  std::vector<std::size_t> train_idx(order.begin() + n_val, order.end());

  std::vector<std::vector<double>> val_x;
  std::vector<double> val_y;
  for (std::size_t i : val_idx) {
    val_x.push_back(data[i].tae);
    val_y.push_back(data[i].t60);
  }

  CnnModel model = CnnModel::initialized(band_hz, config.seed, arch);
  const ParamLayout layout(arch);
  {
    // Start the output unit at the mean target so the final ReLU is active.
    double mean = 0.0;
    for (std::size_t i : train_idx) mean += data[i].t60;
    model.params[layout.fc_b] =
        static_cast<float>(mean / static_cast<double>(train_idx.size()));
  }

  Adam adam(model.params.size());
  Rng shuffle_rng(derive_seed(config.seed, {kTagShuffle, static_cast<std::uint64_t>(band_hz)}));
  const std::uint64_t dropout_base =
      derive_seed(config.seed, {kTagDropout, static_cast<std::uint64_t>(band_hz)});

  TrainResult result;
  result.model = model;
  result.best_val_mse = std::numeric_limits<double>::infinity();
  int since_best = 0;
  std::uint64_t step = 0;

  std::vector<std::vector<double>> batch_x;
  std::vector<double> batch_y;
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    shuffle(train_idx, shuffle_rng);
    double sq_sum = 0.0;
    for (std::size_t start = 0; start < train_idx.size(); start += config.batch_size) {
      const std::size_t end = std::min(train_idx.size(), start + config.batch_size);
      batch_x.clear();
      batch_y.clear();
      for (std::size_t i = start; i < end; ++i) {
        batch_x.push_back(data[train_idx[i]].tae);
        batch_y.push_back(data[train_idx[i]].t60);
      }
      BackwardOptions opts;
      opts.dropout_rate = config.dropout;
      opts.dropout_seed = mix64(dropout_base ^ mix64(++step));
      const GradientResult gr = backward(model, batch_x, batch_y, opts);
      if (!std::isfinite(gr.loss)) {
        throw TrainingError("training diverged (non-finite loss) in epoch " +
                                std::to_string(epoch),
                            epoch);
      }
      sq_sum += gr.loss * static_cast<double>(batch_x.size());

      adam.step(model.params, gr.gradient, config);
      detail::round_to_float(model.params);
      // A ReLU maps NaN to 0, so blown-up weights can still give a finite loss.
      if (!std::all_of(model.params.begin(), model.params.end(),
                       [](double v) { return std::isfinite(v); })) {
        throw TrainingError("training diverged (non-finite parameters) in epoch " +
                                std::to_string(epoch),
                            epoch);
      }

      const double unbias = gr.batch_elements > 1
                                ? static_cast<double>(gr.batch_elements) /
                                      static_cast<double>(gr.batch_elements - 1)
                                : 1.0;
      for (std::size_t c = 0; c < model.running_mean.size(); ++c) {
        model.running_mean[c] = (1.0 - config.bn_momentum) * model.running_mean[c] +
                                config.bn_momentum * gr.batch_mean[c];
        model.running_var[c] = (1.0 - config.bn_momentum) * model.running_var[c] +
                               config.bn_momentum * gr.batch_var[c] * unbias;
      }
      detail::round_to_float(model.running_mean);
      detail::round_to_float(model.running_var);
    }

    EpochLog entry;
    entry.epoch = epoch;
    entry.train_mse = sq_sum / static_cast<double>(train_idx.size());
    entry.val_mse = loss_mse(predict(model, val_x), val_y);
    if (!std::isfinite(entry.train_mse) || !std::isfinite(entry.val_mse)) {
      throw TrainingError("training diverged (non-finite loss) in epoch " +
                              std::to_string(epoch),
                          epoch);
    }
    result.log.push_back(entry);

    if (entry.val_mse < result.best_val_mse) {
      result.best_val_mse = entry.val_mse;
      result.best_epoch = epoch;
      result.model = model;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  return result;
}

void write_training_log(const std::filesystem::path& path,
                        const std::vector<EpochLog>& log) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << "epoch,train_mse,val_mse\n" << std::setprecision(17);
  for (const EpochLog& e : log) {
    out << e.epoch << ',' << e.train_mse << ',' << e.val_mse << '\n';
  }
}

}  // namespace mtfcnn
