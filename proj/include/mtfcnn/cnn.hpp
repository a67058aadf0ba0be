#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace mtfcnn {

// Shape table of the per-band regressor:
//   input 1x200 -> conv(32, k10) -> batch-norm -> ReLU -> maxpool
//   -> conv(16, k5) -> ReLU -> maxpool -> dropout
//   -> conv(8, k5) -> ReLU -> maxpool -> conv(4, k5) -> ReLU
//   -> flatten -> fully-connected(1) -> ReLU
// Convolutions are "valid" (no padding). Pooling uses size 2, stride 1.
struct Architecture {
  struct Conv {
    std::size_t out_channels;
    std::size_t kernel;
    bool operator==(const Conv&) const = default;
  };

  std::size_t input_length = 200;
  std::array<Conv, 4> convs = {{{32, 10}, {16, 5}, {8, 5}, {4, 5}}};
  std::size_t pool_size = 2;
  std::size_t pool_stride = 1;
  double dropout = 0.2;

  // Lengths after conv1, pool1, conv2, pool2, conv3, pool3, conv4, prefixed
  // by the input length: {200, 191, 190, 186, 185, 181, 180, 176}.
  std::vector<std::size_t> stage_lengths() const;
  std::size_t flatten_width() const;  // 704
  std::size_t conv_in_channels(std::size_t layer) const;
  bool operator==(const Architecture&) const = default;
};

// Offsets of each named tensor in the flat parameter vector.
struct TensorSlot {
  std::string name;
  std::vector<std::size_t> shape;
  std::size_t offset = 0;
  std::size_t size() const;
};

struct ParamLayout {
  explicit ParamLayout(const Architecture& arch);

  std::vector<TensorSlot> slots;  // trainable, in file order
  std::size_t total = 0;

  std::size_t conv_w[4], conv_b[4];
  std::size_t bn_gamma, bn_beta;
  std::size_t fc_w, fc_b;
};

constexpr std::uint32_t kModelFormatVersion = 1;

struct CnnModel {
  Architecture arch;
  int band_hz = 0;  // octave center this instance serves
  std::vector<double> params;        // trainable, laid out by ParamLayout
  std::vector<double> running_mean;  // batch-norm, one per conv1 channel
  std::vector<double> running_var;

  // Fan-in scaled uniform weights from the seed, zero biases, unit
  // batch-norm scale. Values are float32-representable.
  static CnnModel initialized(int band_hz, std::uint64_t seed,
                              const Architecture& arch = {});
  // All parameters zero (batch-norm scale included), running var 1.
  static CnnModel zeros(int band_hz, const Architecture& arch = {});

  ParamLayout layout() const { return ParamLayout(arch); }
};

enum class Mode { kTrain, kInfer };

// Single-sample forward pass. Train mode normalizes with the sample's own
// statistics and never draws dropout (no random stream is supplied); infer
// mode uses the running statistics. Throws ShapeError on a wrong length.
double forward(const CnnModel& model, std::span<const double> tae, Mode mode);

// Batched inference-mode forward.
std::vector<double> predict(const CnnModel& model,
                            std::span<const std::vector<double>> taes);

// Per-stage tensor lengths observed during an inference pass, in the order
// of Architecture::stage_lengths(), plus the flatten width.
struct ForwardTrace {
  std::vector<std::size_t> lengths;
  std::size_t flatten_width = 0;
  double output = 0.0;
};
ForwardTrace forward_trace(const CnnModel& model, std::span<const double> tae);

double loss_mse(std::span<const double> predictions,
                std::span<const double> targets);

struct BackwardOptions {
  double dropout_rate = 0.0;       // 0 disables dropout
  std::uint64_t dropout_seed = 0;  // stream for the mask of this call
  // Optional per-sample loss weights; loss = mean(w_i (p_i - t_i)^2).
  std::vector<double> sample_weights;
};

struct GradientResult {
  double loss = 0.0;
  std::vector<double> predictions;
  std::vector<double> gradient;  // same layout as CnnModel::params
  std::vector<double> batch_mean;  // conv1 batch statistics (biased var)
  std::vector<double> batch_var;
  std::size_t batch_elements = 0;  // samples * positions per channel
};

// Train-mode forward plus exact gradients of the batch MSE with respect to
// every trainable parameter, through the dropout mask drawn for this call.
GradientResult backward(const CnnModel& model,
                        std::span<const std::vector<double>> taes,
                        std::span<const double> targets,
                        const BackwardOptions& options = {});

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 64;
  int max_epochs = 100;
  int patience = 10;
  std::uint64_t seed = 1;
  double validation_fraction = 0.1;
  double dropout = 0.2;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double bn_momentum = 0.1;

  void validate() const;  // throws RangeError
};

struct TrainingSample {
  std::vector<double> tae;
  double t60 = 0.0;
};

struct EpochLog {
  int epoch = 0;
  double train_mse = 0.0;
  double val_mse = 0.0;
};

struct TrainResult {
  CnnModel model;  // parameters of the best validation epoch
  std::vector<EpochLog> log;
  int best_epoch = 0;
  double best_val_mse = 0.0;
};

// Mini-batch Adam on batch MSE with early stopping on validation MSE. The
// validation subset is carved from `data` by the seeded stream. Needs at
// least 10 samples. Throws TrainingError when the loss becomes non-finite.
TrainResult train(std::span<const TrainingSample> data, const TrainConfig& config,
                  int band_hz, const Architecture& arch = {});

// CSV "epoch,train_mse,val_mse".
void write_training_log(const std::filesystem::path& path,
                        const std::vector<EpochLog>& log);

// Binary model file: "MTF1", version, band id, architecture, layer table,
// little-endian f32 parameters, CRC-32 trailer.
void save_model(const CnnModel& model, const std::filesystem::path& path);
// Throws ModelError on bad magic, version mismatch, shape mismatch,
// truncation, or checksum failure.
CnnModel load_model(const std::filesystem::path& path);

std::string model_filename(int band_hz);  // "band_<hz>.mtf"

}  // namespace mtfcnn
