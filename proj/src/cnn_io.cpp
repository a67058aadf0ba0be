#include <zlib.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "mtfcnn/cnn.hpp"
#include "mtfcnn/error.hpp"

namespace mtfcnn {

namespace {

constexpr char kModelMagic[4] = {'M', 'T', 'F', '1'};

class Writer {
 public:
  template <typename T>
  void put(T v) {
    char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    bytes.insert(bytes.end(), b, b + sizeof(T));
  }
  void put_string(const std::string& s) {
    put<std::uint8_t>(static_cast<std::uint8_t>(s.size()));
    bytes.insert(bytes.end(), s.begin(), s.end());
  }
  std::vector<char> bytes;
};

class Reader {
 public:
  Reader(const std::vector<char>& b, std::size_t limit, std::string name)
      : bytes_(b), limit_(limit), name_(std::move(name)) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string get_string() {
    const auto n = get<std::uint8_t>();
    need(n);
    std::string s(bytes_.data() + pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > limit_) throw ModelError(name_ + ": truncated model file");
  }
  const std::vector<char>& bytes_;
  std::size_t limit_;
  std::size_t pos_ = 0;
  std::string name_;
};

std::uint32_t checksum(const char* data, std::size_t n) {
  return static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(data), static_cast<uInt>(n)));
}

std::vector<TensorSlot> file_tensors(const CnnModel& m) {
  const ParamLayout layout(m.arch);
  std::vector<TensorSlot> slots = layout.slots;
  const std::size_t c1 = m.arch.convs[0].out_channels;
  slots.push_back({"bn1.running_mean", {c1}, 0});
  slots.push_back({"bn1.running_var", {c1}, 0});
  return slots;
}

}  // namespace

std::string model_filename(int band_hz) {
  return "band_" + std::to_string(band_hz) + ".mtf";
}

void save_model(const CnnModel& model, const std::filesystem::path& path) {
  Writer w;
  w.bytes.insert(w.bytes.end(), kModelMagic, kModelMagic + 4);
  w.put<std::uint32_t>(kModelFormatVersion);
  w.put<std::int32_t>(model.band_hz);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(model.arch.input_length));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(model.arch.pool_size));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(model.arch.pool_stride));
  w.put<double>(model.arch.dropout);

  const auto tensors = file_tensors(model);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(tensors.size()));
  for (const TensorSlot& t : tensors) {
    w.put_string(t.name);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(t.shape.size()));
    for (std::size_t d : t.shape) w.put<std::uint32_t>(static_cast<std::uint32_t>(d));
  }
  for (double v : model.params) w.put<float>(static_cast<float>(v));
  for (double v : model.running_mean) w.put<float>(static_cast<float>(v));
  for (double v : model.running_var) w.put<float>(static_cast<float>(v));
  w.put<std::uint32_t>(checksum(w.bytes.data(), w.bytes.size()));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ModelError("cannot write " + path.string());
  out.write(w.bytes.data(), static_cast<std::streamsize>(w.bytes.size()));
  if (!out) throw ModelError("write failed for " + path.string());
}

CnnModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  const std::string name = path.string();
  if (!in) throw ModelError("cannot open model file " + name);
  const std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                                std::istreambuf_iterator<char>());
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kModelMagic, 4) != 0) {
    throw ModelError(name + ": not an MTF1 model file");
  }
  const std::size_t body = bytes.size() - 4;
  Reader r(bytes, body, name);
  r.get<std::uint32_t>();  // magic
  const auto version = r.get<std::uint32_t>();
  if (version != kModelFormatVersion) {
    throw ModelError(name + ": model format version " + std::to_string(version) +
                     " does not match supported version " +
                     std::to_string(kModelFormatVersion));
  }

  CnnModel m;
  m.band_hz = r.get<std::int32_t>();
  m.arch.input_length = r.get<std::uint32_t>();
  m.arch.pool_size = r.get<std::uint32_t>();
  m.arch.pool_stride = r.get<std::uint32_t>();
  m.arch.dropout = r.get<double>();
  if (m.arch.pool_size == 0 || m.arch.pool_stride == 0) {
    throw ModelError(name + ": invalid pooling parameters");
  }

  std::vector<TensorSlot> expected;
  try {
    expected = file_tensors(m);
  } catch (const ShapeError& e) {
    throw ModelError(name + ": " + e.what());
  }
  const auto count = r.get<std::uint32_t>();
  if (count != expected.size()) {
    throw ModelError(name + ": expected " + std::to_string(expected.size()) +
                     " tensors, found " + std::to_string(count));
  }
  for (const TensorSlot& t : expected) {
    const std::string tname = r.get_string();
    const auto rank = r.get<std::uint32_t>();
    std::vector<std::size_t> shape;
    for (std::uint32_t i = 0; i < rank; ++i) shape.push_back(r.get<std::uint32_t>());
    if (tname != t.name || shape != t.shape) {
      throw ModelError(name + ": layer table mismatch at tensor '" + t.name + "'");
    }
  }

  const ParamLayout layout(m.arch);
  const std::size_t c1 = m.arch.convs[0].out_channels;
  m.params.resize(layout.total);
  for (double& v : m.params) v = r.get<float>();
  m.running_mean.resize(c1);
  m.running_var.resize(c1);
  for (double& v : m.running_mean) v = r.get<float>();
  for (double& v : m.running_var) v = r.get<float>();
  if (r.pos() != body) throw ModelError(name + ": trailing bytes in model file");

  std::uint32_t stored;
  std::memcpy(&stored, bytes.data() + body, 4);
  if (stored != checksum(bytes.data(), body)) {
    throw ModelError(name + ": checksum mismatch");
  }
  for (double v : m.params) {
    if (!std::isfinite(v)) throw ModelError(name + ": non-finite parameter");
  }
  return m;
}

}  // namespace mtfcnn
