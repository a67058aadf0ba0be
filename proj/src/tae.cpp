#include "mtfcnn/tae.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iterator>

#include "mtfcnn/dsp.hpp"
#include "mtfcnn/error.hpp"
#include "mtfcnn/filter.hpp"

namespace mtfcnn {

NormalizedSignal normalize_signal(const Signal& input) {
  const double peak = input.peak();
  if (!(peak > 0.0)) throw SilentInputError("input signal is silent");
  const double gain = 1.0 / peak;
  return {input.scaled(gain), gain};
}

TaeBand extract_tae_band(const Signal& input, double center_hz) {
  if (input.sample_rate() != kTaeInputRate) {
    throw ContractError("TAE extraction expects 16 kHz input, got " +
                        std::to_string(input.sample_rate()) + " Hz");
  }
  const auto needed =
      static_cast<std::size_t>(std::llround(kTaeInputSeconds * kTaeInputRate));
  if (input.size() < needed) {
    throw ShortInputError("TAE extraction needs 5 s of audio, got " +
                          std::to_string(input.duration()) + " s");
  }
  const Signal x = input.truncated(needed);
  const double input_peak = x.peak();

  const Signal band = filter_apply(octave_band_filter(center_hz, kTaeInputRate), x);
  const Signal env = analytic_envelope(band);
  const Signal smooth =
      filter_apply(design_butterworth_lowpass(kTaeLowpassOrder, kTaeLowpassHz,
                                              kTaeInputRate),
                   env);
  const Signal low = decimate(smooth, static_cast<int>(kTaeInputRate / kTaeRate));

  TaeBand out;
  out.envelope.assign(low.data().begin(), low.data().begin() + kTaeLength);
  for (double& v : out.envelope) v = std::max(v, 0.0);  // lowpass undershoot
  out.peak =
      *std::max_element(out.envelope.begin() + kTaeSettleSamples, out.envelope.end());
  if (!(out.peak > kTaeSilenceRatio * input_peak)) {
    out.silent = true;
    std::fill(out.envelope.begin(), out.envelope.end(), 0.0);
    return out;
  }
  for (double& v : out.envelope) v = std::min(v / out.peak, 1.0);
  return out;
}

std::vector<double> extract_tae(const Signal& input, double center_hz) {
  return extract_tae_band(input, center_hz).envelope;
}

TaeMatrix tae_matrix(const Signal& input, std::string source_id) {
  const NormalizedSignal norm = normalize_signal(input);
  TaeMatrix m;
  m.source_id = std::move(source_id);
  m.normalization_gain = norm.gain;
  for (std::size_t k = 0; k < kNumBands; ++k) {
    TaeBand b = extract_tae_band(norm.signal, kOctaveCenters[k]);
    m.rows[k] = std::move(b.envelope);
    m.silent[k] = b.silent;
  }
  return m;
}

namespace {

constexpr char kTaeMagic[4] = {'T', 'A', 'E', '1'};

template <typename T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(const std::vector<char>& buf, std::size_t& pos, const std::string& name) {
  if (pos + sizeof(T) > buf.size()) throw Error(name + ": truncated TAE file");
  T v;
  std::memcpy(&v, buf.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace

void write_tae_file(const std::filesystem::path& path, const TaeMatrix& tae) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(kTaeMagic, 4);
  put<std::uint32_t>(out, kNumBands);
  put<std::uint32_t>(out, kTaeLength);
  put<float>(out, static_cast<float>(tae.sample_rate));
  for (const auto& row : tae.rows) {
    for (double v : row) put<float>(out, static_cast<float>(v));
  }
  if (!out) throw Error("write failed for " + path.string());
}

TaeMatrix read_tae_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  const std::vector<char> buf((std::istreambuf_iterator<char>(in)),
                              std::istreambuf_iterator<char>());
  const std::string name = path.string();
  if (buf.size() < 4 || std::memcmp(buf.data(), kTaeMagic, 4) != 0) {
    throw Error(name + ": not a TAE1 feature file");
  }
  std::size_t pos = 4;
  const auto bands = get<std::uint32_t>(buf, pos, name);
  const auto length = get<std::uint32_t>(buf, pos, name);
  const auto rate = get<float>(buf, pos, name);
  if (bands != kNumBands || length != kTaeLength) {
    throw ShapeError(name + ": expected 7 x 200 TAE, found " +
                     std::to_string(bands) + " x " + std::to_string(length));
  }
  TaeMatrix m;
  m.sample_rate = rate;
  for (auto& row : m.rows) {
    row.resize(kTaeLength);
    for (double& v : row) v = get<float>(buf, pos, name);
  }
  for (std::size_t k = 0; k < kNumBands; ++k) {
    m.silent[k] = std::all_of(m.rows[k].begin(), m.rows[k].end(),
                              [](double v) { return v == 0.0; });
  }
  m.source_id = path.filename().string();
  return m;
}

void write_tae_csv(const std::filesystem::path& path, const TaeMatrix& tae) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << "band_hz";
  for (std::size_t i = 0; i < kTaeLength; ++i) out << ",t" << i;
  out << '\n' << std::setprecision(9);
  for (std::size_t k = 0; k < kNumBands; ++k) {
    out << static_cast<int>(kOctaveCenters[k]);
    for (double v : tae.rows[k]) out << ',' << v;
    out << '\n';
  }
}

}  // namespace mtfcnn
