#include "mtfcnn/wav.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "mtfcnn/error.hpp"

namespace mtfcnn {

namespace {

static_assert(std::endian::native == std::endian::little,
              "WAV I/O assumes a little-endian host");

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

template <typename T>
T read_le(const std::vector<char>& buf, std::size_t offset) {
  T v;
  std::memcpy(&v, buf.data() + offset, sizeof(T));
  return v;
}

template <typename T>
void put_le(std::vector<char>& out, T v) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  out.insert(out.end(), bytes, bytes + sizeof(T));
}

}  // namespace

Signal read_wav(const std::filesystem::path& path, double expected_rate) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw WavError("cannot open " + path.string());
  const std::vector<char> buf((std::istreambuf_iterator<char>(in)),
                              std::istreambuf_iterator<char>());
  const std::string name = path.string();
  if (buf.size() < 12 || std::memcmp(buf.data(), "RIFF", 4) != 0 ||
      std::memcmp(buf.data() + 8, "WAVE", 4) != 0) {
    throw WavError(name + ": not a RIFF/WAVE file");
  }

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  const char* data = nullptr;
  std::size_t data_bytes = 0;

  std::size_t pos = 12;
  while (pos + 8 <= buf.size()) {
    const std::uint32_t size = read_le<std::uint32_t>(buf, pos + 4);
    const std::size_t body = pos + 8;
    const std::size_t avail = std::min<std::size_t>(size, buf.size() - body);
    if (std::memcmp(buf.data() + pos, "fmt ", 4) == 0) {
      if (avail < 16) throw WavError(name + ": short fmt chunk");
      format = read_le<std::uint16_t>(buf, body);
      channels = read_le<std::uint16_t>(buf, body + 2);
      rate = read_le<std::uint32_t>(buf, body + 4);
      bits = read_le<std::uint16_t>(buf, body + 14);
      if (format == kFormatExtensible && avail >= 26) {
        format = read_le<std::uint16_t>(buf, body + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(buf.data() + pos, "data", 4) == 0) {
      data = buf.data() + body;
      data_bytes = avail;
    }
    pos = body + size + (size & 1u);
  }
  if (!have_fmt) throw WavError(name + ": missing fmt chunk");
  if (data == nullptr) throw WavError(name + ": missing data chunk");
  if (channels != 1) {
    throw WavError(name + ": expected mono, found " + std::to_string(channels) +
                   " channels");
  }
  if (static_cast<double>(rate) != expected_rate) {
    throw WavError(name + ": sample rate " + std::to_string(rate) +
                   " Hz, expected " + std::to_string(expected_rate) + " Hz");
  }

  std::vector<double> samples;
  if (format == kFormatPcm && bits == 16) {
    const std::size_t n = data_bytes / 2;
    samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::int16_t v;
      std::memcpy(&v, data + 2 * i, 2);
      samples[i] = static_cast<double>(v) / 32768.0;
    }
  } else if (format == kFormatFloat && bits == 32) {
    const std::size_t n = data_bytes / 4;
    samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      float v;
      std::memcpy(&v, data + 4 * i, 4);
      samples[i] = static_cast<double>(v);
    }
  } else {
    throw WavError(name + ": unsupported encoding (format " +
                   std::to_string(format) + ", " + std::to_string(bits) +
                   " bits)");
  }
  try {
    return Signal(std::move(samples), static_cast<double>(rate));
  } catch (const RangeError& e) {
    throw WavError(name + ": " + e.what());
  }
}

void write_wav(const std::filesystem::path& path, const Signal& signal,
               WavEncoding encoding) {
  const bool pcm = encoding == WavEncoding::kPcm16;
  const std::uint16_t bits = pcm ? 16 : 32;
  const std::uint16_t block_align = bits / 8;
  const auto rate = static_cast<std::uint32_t>(std::lround(signal.sample_rate()));
  const auto data_bytes = static_cast<std::uint32_t>(signal.size() * block_align);

  std::vector<char> out;
  out.reserve(44 + data_bytes);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_le<std::uint32_t>(out, 36 + data_bytes);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put_le<std::uint32_t>(out, 16);
  put_le<std::uint16_t>(out, pcm ? kFormatPcm : kFormatFloat);
  put_le<std::uint16_t>(out, 1);
  put_le<std::uint32_t>(out, rate);
  put_le<std::uint32_t>(out, rate * block_align);
  put_le<std::uint16_t>(out, block_align);
  put_le<std::uint16_t>(out, bits);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_le<std::uint32_t>(out, data_bytes);
  for (double v : signal.samples()) {
    if (pcm) {
      const double scaled = std::clamp(std::round(v * 32768.0), -32768.0, 32767.0);
      put_le<std::int16_t>(out, static_cast<std::int16_t>(scaled));
    } else {
      put_le<float>(out, static_cast<float>(v));
    }
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw WavError("cannot write " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw WavError("write failed for " + path.string());
}

}  // namespace mtfcnn
