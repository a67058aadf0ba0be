#include "mtfcnn/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>

#include "json.hpp"
#include "mtfcnn/acoustic_params.hpp"
#include "mtfcnn/dsp.hpp"
#include "mtfcnn/error.hpp"
#include "mtfcnn/filter.hpp"
#include "mtfcnn/random.hpp"
#include "mtfcnn/version.hpp"
#include "mtfcnn/wav.hpp"
#include "parallel.hpp"

namespace mtfcnn {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::size_t kMinSpeechSamples =
    static_cast<std::size_t>(5.0 * 16000.0);  // 5 s at the TAE input rate

// A band estimate shorter than this multiple of the band filter's own
// impulse-response T60 is dominated by the filter and replaced.
constexpr double kRingMargin = 2.0;

double filter_ring_t60(std::size_t band, double rate) {
  static std::mutex mutex;
  static std::map<std::pair<std::size_t, double>, double> cache;
  std::lock_guard lock(mutex);
  const auto key = std::make_pair(band, rate);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  const auto n = static_cast<std::size_t>(rate);
  const Signal ring =
      filter_apply(octave_band_filter(kOctaveCenters[band], rate), Signal::impulse(n, rate));
  double t60 = 0.0;
  try {
    t60 = estimate_t60(energy_decay_curve(Rir(ring)));
  } catch (const InsufficientDecayError&) {
  }
  cache.emplace(key, t60);
  return t60;
}

struct SpeechFile {
  std::string id;
  std::string path;
  Signal signal;
};

std::vector<fs::path> wav_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw ContractError("speech directory " + dir.string() + " does not exist");
  }
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::string ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == ".wav") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

json entry_to_json(const CorpusEntry& e) {
  return json{{"kind", "entry"},
              {"utterance_id", e.utterance_id},
              {"speech_path", e.speech_path},
              {"utterance_index", e.utterance_index},
              {"t60_nominal", e.t60_nominal},
              {"t60_index", e.t60_index},
              {"carrier_index", e.carrier_index},
              {"carrier_seed", e.carrier_seed},
              {"rir_duration", e.rir_duration},
              {"reverberant_path", e.reverberant_path},
              {"band_t60", e.band_t60},
              {"band_fallback", e.band_fallback},
              {"split", to_string(e.split)}};
}

CorpusEntry entry_from_json(const json& j) {
  CorpusEntry e;
  e.utterance_id = j.at("utterance_id").get<std::string>();
  e.speech_path = j.at("speech_path").get<std::string>();
  e.utterance_index = j.at("utterance_index").get<std::size_t>();
  e.t60_nominal = j.at("t60_nominal").get<double>();
  e.t60_index = j.at("t60_index").get<std::size_t>();
  e.carrier_index = j.at("carrier_index").get<std::size_t>();
  e.carrier_seed = j.at("carrier_seed").get<std::uint64_t>();
  e.rir_duration = j.at("rir_duration").get<double>();
  e.reverberant_path = j.at("reverberant_path").get<std::string>();
  e.band_t60 = j.at("band_t60").get<std::array<double, kNumBands>>();
  e.band_fallback = j.at("band_fallback").get<std::array<bool, kNumBands>>();
  e.split = split_from_string(j.at("split").get<std::string>());
  return e;
}

}  // namespace

std::string to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kTest: return "test";
    case Split::kUnassigned: break;
  }
  return "unassigned";
}

Split split_from_string(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "test") return Split::kTest;
  if (s == "unassigned") return Split::kUnassigned;
  throw ConfigError("unknown split label '" + s + "'");
}

RirSpec CorpusEntry::rir_spec() const {
  RirSpec spec;
  spec.t60 = {t60_nominal};
  spec.duration = rir_duration;
  spec.seed = carrier_seed;
  spec.carrier = Carrier::kFullBandWgn;
  return spec;
}

std::size_t CorpusManifest::count(Split s) const {
  return static_cast<std::size_t>(std::count_if(
      entries.begin(), entries.end(), [s](const CorpusEntry& e) { return e.split == s; }));
}

std::vector<double> standard_t60_grid() {
  std::vector<double> grid;
  for (int i = 2; i <= 30; ++i) grid.push_back(i / 10.0);
  return grid;
}

std::string t60_label(double t60) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", t60);
  return buf;
}

BandGroundTruth ground_truth_per_band(const Rir& rir) {
  const double rate = rir.signal.sample_rate();
  std::array<double, kNumBands> values{};
  BandGroundTruth gt{BandT60s::uniform(1.0), {}, {}};
  for (std::size_t k = 0; k < kNumBands; ++k) {
    const Signal band = filter_apply(octave_band_filter(kOctaveCenters[k], rate), rir.signal);
    double t60 = 0.0;
    std::string problem;
    try {
      t60 = estimate_t60(energy_decay_curve(Rir(band)));
      if (t60 < kRingMargin * filter_ring_t60(k, rate)) {
        problem = "decay indistinguishable from the band filter response";
      }
    } catch (const InsufficientDecayError& e) {
      problem = e.what();
    } catch (const ContractError& e) {
      problem = e.what();
    }
    if (!problem.empty()) {
      if (!rir.spec) {
        throw InsufficientDecayError("band " + band_label(k) + " Hz: " + problem +
                                     "; no nominal T60 to fall back to");
      }
      const auto& nominal = rir.spec->t60;
      t60 = nominal.size() == kNumBands ? nominal[k] : nominal.front();
      gt.fallback[k] = true;
      gt.warnings.push_back("band " + band_label(k) + " Hz: " + problem +
                            "; using nominal T60");
    }
    values[k] = t60;
  }
  gt.t60s = BandT60s(values);
  return gt;
}

CorpusManifest gen_corpus(const fs::path& speech_dir, const CorpusConfig& config,
                          const fs::path& out_dir) {
  if (config.t60_grid.empty()) throw RangeError("empty T60 grid");
  if (config.seeds == 0) throw RangeError("seed count must be positive");
  for (double t : config.t60_grid) {
    if (!(t >= kMinT60 && t <= kMaxT60)) {
      throw RangeError("grid T60 " + std::to_string(t) + " s out of range");
    }
  }

  CorpusManifest manifest;
  manifest.config = config;
  manifest.tool_version = kToolVersion;

  // Paths are stored relative to the corpus so the manifest does not depend
  // on where the tree lives.
  const fs::path out_abs = fs::absolute(out_dir).lexically_normal();
  const auto rel = [&out_abs](const fs::path& p) {
    return fs::absolute(p).lexically_normal().lexically_relative(out_abs).generic_string();
  };
  std::vector<SpeechFile> speech;
  for (const fs::path& p : wav_files(speech_dir)) {
    try {
      Signal s = read_wav(p, config.sample_rate);
      if (s.size() < kMinSpeechSamples) {
        throw ShortInputError("shorter than 5 s");
      }
      speech.push_back({p.stem().string(), rel(p), std::move(s)});
    } catch (const Error& e) {
      manifest.failures.push_back(rel(p) + ": " + e.what());
    }
  }
  if (speech.empty()) {
    throw ContractError("no usable 16 kHz mono WAV of at least 5 s in " +
                        speech_dir.string());
  }
  for (const auto& s : speech) manifest.utterances.push_back(s.id);

  const std::size_t n_utt = speech.size();
  const std::size_t n_t60 = config.t60_grid.size();
  const std::size_t n_total = n_t60 * config.seeds * n_utt;
  manifest.entries.resize(n_total);

  fs::create_directories(out_dir);
  for (double t : config.t60_grid) {
    for (std::size_t c = 0; c < config.seeds; ++c) {
      fs::create_directories(out_dir / t60_label(t) / std::to_string(c));
    }
  }

  detail::parallel_for(n_total, [&](std::size_t idx) {
    const std::size_t u = idx % n_utt;
    const std::size_t c = (idx / n_utt) % config.seeds;
    const std::size_t ti = idx / (n_utt * config.seeds);

    CorpusEntry& e = manifest.entries[idx];
    e.utterance_id = speech[u].id;
    e.speech_path = speech[u].path;
    e.utterance_index = u;
    e.t60_nominal = config.t60_grid[ti];
    e.t60_index = ti;
    e.carrier_index = c;
    e.carrier_seed = derive_seed(config.corpus_seed, {kTagRirCarrier, u, ti, c});
    e.rir_duration = default_rir_duration(e.t60_nominal);

    RirSpec spec = e.rir_spec();
    spec.sample_rate = config.sample_rate;
    const Rir rir = synth_schroeder_rir(spec);
    const Signal& x = speech[u].signal;
    const Signal y = convolve(x, rir.signal).truncated(x.size());

    const fs::path rel = fs::path(t60_label(e.t60_nominal)) / std::to_string(c) /
                         (e.utterance_id + ".wav");
    write_wav(out_dir / rel, y, WavEncoding::kFloat32);
    e.reverberant_path = rel.generic_string();

    const BandGroundTruth gt = ground_truth_per_band(rir);
    e.band_t60 = gt.t60s.values();
    e.band_fallback = gt.fallback;
  });

  write_manifest(out_dir / "manifest.jsonl", manifest);
  return manifest;
}

CorpusManifest split(CorpusManifest manifest, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw RangeError("train fraction must lie in (0, 1)");
  }
  if (manifest.entries.empty()) throw ContractError("cannot split an empty manifest");

  std::map<std::size_t, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    strata[manifest.entries[i].t60_index].push_back(i);
  }
  for (const auto& [key, members] : strata) {
    if (members.size() < 2) {
      throw StratificationError("T60 stratum " + t60_label(manifest.entries[members[0]].t60_nominal) +
                                " s has " + std::to_string(members.size()) +
                                " entry; at least 2 are needed");
    }
  }

  // Largest-remainder allocation of the global train count over strata.
  const auto total = static_cast<std::size_t>(
      std::llround(train_fraction * static_cast<double>(manifest.entries.size())));
  std::vector<std::size_t> keys;
  std::vector<std::size_t> counts;
  std::vector<double> remainders;
  std::size_t assigned = 0;
  for (const auto& [key, members] : strata) {
    const double ideal = train_fraction * static_cast<double>(members.size());
    const auto base = static_cast<std::size_t>(std::floor(ideal));
    keys.push_back(key);
    counts.push_back(base);
    remainders.push_back(ideal - static_cast<double>(base));
    assigned += base;
  }
  std::vector<std::size_t> order(keys.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
  for (std::size_t i = 0; assigned < total && i < order.size(); ++i, ++assigned) {
    ++counts[order[i]];
  }

  for (std::size_t s = 0; s < keys.size(); ++s) {
    std::vector<std::size_t> members = strata[keys[s]];
    const std::size_t n_train = std::clamp<std::size_t>(counts[s], 1, members.size() - 1);
    Rng rng(derive_seed(seed, {kTagSplit, keys[s]}));
    for (std::size_t i = members.size(); i > 1; --i) {
      std::swap(members[i - 1], members[rng.uniform_index(i)]);
    }
    for (std::size_t i = 0; i < members.size(); ++i) {
      manifest.entries[members[i]].split = i < n_train ? Split::kTrain : Split::kTest;
    }
  }
  manifest.train_fraction = train_fraction;
  manifest.split_seed = seed;
  return manifest;
}

void write_manifest(const fs::path& path, const CorpusManifest& m) {
  const json header{{"kind", "header"},
                    {"tool_version", m.tool_version},
                    {"t60_grid", m.config.t60_grid},
                    {"seeds", m.config.seeds},
                    {"corpus_seed", m.config.corpus_seed},
                    {"sample_rate", m.config.sample_rate},
                    {"utterances", m.utterances},
                    {"failures", m.failures},
                    {"entry_count", m.entries.size()},
                    {"train_fraction", m.train_fraction},
                    {"split_seed", m.split_seed}};
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
    if (!out) throw Error("cannot write " + tmp.string());
    out << header.dump() << '\n';
    for (const CorpusEntry& e : m.entries) out << entry_to_json(e).dump() << '\n';
    if (!out) throw Error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

CorpusManifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open manifest " + path.string());
  CorpusManifest m;
  std::string line;
  bool have_header = false;
  std::size_t expected = 0;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      const std::string kind = j.at("kind").get<std::string>();
      if (kind == "header") {
        m.tool_version = j.at("tool_version").get<std::string>();
        m.config.t60_grid = j.at("t60_grid").get<std::vector<double>>();
        m.config.seeds = j.at("seeds").get<std::size_t>();
        m.config.corpus_seed = j.at("corpus_seed").get<std::uint64_t>();
        m.config.sample_rate = j.at("sample_rate").get<double>();
        m.utterances = j.at("utterances").get<std::vector<std::string>>();
        m.failures = j.at("failures").get<std::vector<std::string>>();
        expected = j.at("entry_count").get<std::size_t>();
        m.train_fraction = j.at("train_fraction").get<double>();
        m.split_seed = j.at("split_seed").get<std::uint64_t>();
        have_header = true;
      } else if (kind == "entry") {
        m.entries.push_back(entry_from_json(j));
      } else {
        throw ConfigError("unknown record kind '" + kind + "'");
      }
    } catch (const json::exception& e) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!have_header) throw ConfigError(path.string() + ": missing header line");
  if (m.entries.size() != expected) {
    throw ConfigError(path.string() + ": header announces " + std::to_string(expected) +
                      " entries, found " + std::to_string(m.entries.size()));
  }
  return m;
}

}  // namespace mtfcnn
