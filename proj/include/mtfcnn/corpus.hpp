#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mtfcnn/bands.hpp"
#include "mtfcnn/rir.hpp"

namespace mtfcnn {

enum class Split { kUnassigned, kTrain, kTest };
std::string to_string(Split s);
Split split_from_string(const std::string& s);

struct CorpusEntry {
  std::string utterance_id;
  std::string speech_path;  // relative to the corpus directory
  std::size_t utterance_index = 0;
  double t60_nominal = 0.0;  // s
  std::size_t t60_index = 0;
  std::size_t carrier_index = 0;
  std::uint64_t carrier_seed = 0;
  double rir_duration = 0.0;      // s
  std::string reverberant_path;   // relative to the corpus directory
  std::array<double, kNumBands> band_t60{};
  std::array<bool, kNumBands> band_fallback{};
  Split split = Split::kUnassigned;

  RirSpec rir_spec() const;  // regenerates the true RIR's parameters
  bool operator==(const CorpusEntry&) const = default;
};

struct CorpusConfig {
  std::vector<double> t60_grid;
  std::size_t seeds = 10;  // carrier realizations per (utterance, t60)
  std::uint64_t corpus_seed = 1;
  double sample_rate = 16000.0;
  bool operator==(const CorpusConfig&) const = default;
};

struct CorpusManifest {
  CorpusConfig config;
  std::string tool_version;
  std::vector<std::string> utterances;  // ids, in utterance_index order
  std::vector<CorpusEntry> entries;
  std::vector<std::string> failures;  // speech files that were skipped
  // Split provenance; train_fraction < 0 while unsplit.
  double train_fraction = -1.0;
  std::uint64_t split_seed = 0;

  std::size_t count(Split s) const;
  bool operator==(const CorpusManifest&) const = default;
};

// 0.2, 0.3, ..., 3.0 s.
std::vector<double> standard_t60_grid();

// For every readable utterance, grid value and carrier index: synthesize the
// Schroeder RIR, convolve, truncate to the speech length, and write a 32-bit
// float WAV at out/<t60>/<carrier>/<utterance>.wav. Unreadable or invalid
// speech files are listed in `failures`. Writes out/manifest.jsonl last,
// through a temporary file. Throws ContractError when no utterance is usable.
CorpusManifest gen_corpus(const std::filesystem::path& speech_dir,
                          const CorpusConfig& config,
                          const std::filesystem::path& out_dir);

struct BandGroundTruth {
  BandT60s t60s;
  std::array<bool, kNumBands> fallback{};
  std::vector<std::string> warnings;
};

// Octave-filters the RIR and fits T30 per band. A band whose fit fails, or
// whose decay is too short to be told apart from the band filter's own
// ringing, takes its nominal T60 from the attached RirSpec and is flagged.
// Throws InsufficientDecayError when a fallback is needed but the RIR has no
// RirSpec attached.
BandGroundTruth ground_truth_per_band(const Rir& rir);

// Stratified by nominal T60: each stratum gets round-to-largest-remainder
// train counts, at least one train and one test entry. Throws
// StratificationError for strata smaller than 2, RangeError for a fraction
// outside (0, 1).
CorpusManifest split(CorpusManifest manifest, double train_fraction,
                     std::uint64_t seed);

// JSON lines: a header object, then one object per entry.
void write_manifest(const std::filesystem::path& path,
                    const CorpusManifest& manifest);
CorpusManifest read_manifest(const std::filesystem::path& path);

// "0.20"-style directory name of a grid value.
std::string t60_label(double t60);

}  // namespace mtfcnn
