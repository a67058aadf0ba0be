// mtfcnn: blind room-acoustic parameter estimation from reverberant speech.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "mtfcnn/acoustic_params.hpp"
#include "mtfcnn/corpus.hpp"
#include "mtfcnn/error.hpp"
#include "mtfcnn/pipeline.hpp"
#include "mtfcnn/rir.hpp"
#include "mtfcnn/speech.hpp"
#include "mtfcnn/sti.hpp"
#include "mtfcnn/version.hpp"
#include "mtfcnn/wav.hpp"

namespace fs = std::filesystem;
using namespace mtfcnn;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitContract = 2;
constexpr int kExitModel = 3;
constexpr int kExitExclusions = 4;

StiConfig sti_config_from(const std::string& path) {
  return path.empty() ? default_sti_config() : load_sti_config(path);
}

// Writes to `path`, or stdout when empty.
void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(10);
  s << v;
  return s.str();
}

std::vector<double> parse_grid(const std::string& spec) {
  if (spec.empty()) return standard_t60_grid();
  // "lo:hi:step" or a comma list.
  std::vector<double> grid;
  if (spec.find(':') != std::string::npos) {
    double lo = 0, hi = 0, step = 0;
    if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3 || !(step > 0)) {
      throw RangeError("bad grid '" + spec + "', expected lo:hi:step");
    }
    const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long i = 0; i <= n; ++i) {
      grid.push_back(std::round((lo + static_cast<double>(i) * step) * 1e6) / 1e6);
    }
  } else {
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) grid.push_back(std::stod(item));
  }
  return grid;
}

int run_synth_rir(const std::vector<double>& t60, double duration, double gain,
                  std::uint64_t seed, const std::string& carrier, double rate,
                  const std::string& out) {
  RirSpec spec;
  spec.t60 = t60;
  spec.gain_a = gain;
  spec.seed = seed;
  spec.sample_rate = rate;
  spec.carrier = carrier_from_string(carrier);
  double longest = 0.0;
  for (double t : t60) longest = std::max(longest, t);
  spec.duration = duration > 0.0 ? duration : default_rir_duration(longest);
  const Rir rir = t60.size() == 1
                      ? synth_schroeder_rir(spec)
                      : reconstruct_rir(BandT60s([&] {
                                          std::array<double, kNumBands> a{};
                                          if (t60.size() != kNumBands) {
                                            throw ContractError("--t60 takes 1 or 7 values");
                                          }
                                          std::copy(t60.begin(), t60.end(), a.begin());
                                          return a;
                                        }()),
                                        spec.duration, rate, seed);
  Rir saved(rir.signal, spec);
  save_rir(out, saved);
  std::cerr << "wrote " << out << " (" << rir.signal.size() << " samples)\n";
  return kExitOk;
}

int run_analyze(const std::string& path, double rate, const std::string& sti_path,
                const std::string& format, const std::string& out) {
  const Rir rir(read_wav(path, rate));
  const RoomParams p = room_params(rir);
  const StiResult sti = sti_from_rir(rir, sti_config_from(sti_path));
  const std::string c80 = p.c80.anechoic ? "nan" : fmt(p.c80.db);
  std::string text;
  if (format == "csv") {
    text = "t60_s,edt_s,c80_db,d50_pct,ts_s,sti\n" + fmt(p.t60) + "," + fmt(p.edt) + "," +
           c80 + "," + fmt(p.d50) + "," + fmt(p.ts) + "," + fmt(sti.sti) + "\n";
  } else {
    std::ostringstream s;
    s << "{\n  \"input_id\": \"" << fs::path(path).filename().string() << "\",\n"
      << "  \"t60_s\": " << fmt(p.t60) << ",\n  \"edt_s\": " << fmt(p.edt) << ",\n"
      << "  \"c80_db\": " << (p.c80.anechoic ? "null" : c80) << ",\n"
      << "  \"d50_pct\": " << fmt(p.d50) << ",\n  \"ts_s\": " << fmt(p.ts) << ",\n"
      << "  \"sti\": " << fmt(sti.sti) << ",\n  \"t60_method\": \"" << kT60Method << "\"\n}\n";
    text = s.str();
  }
  for (const auto& w : sti.warnings) std::cerr << "warning: " << w << '\n';
  emit(out, text);
  return kExitOk;
}

std::string room_report_csv(const RoomReport& r) {
  std::string text = "input_id,t60_s,edt_s,c80_db,d50_pct,ts_s,sti,sti_reconstructed";
  for (std::size_t k = 0; k < kNumBands; ++k) text += ",t60_" + band_label(k) + "_s";
  text += "\n" + r.input_id + "," + fmt(r.params.t60) + "," + fmt(r.params.edt) + "," +
          (r.params.c80.anechoic ? "nan" : fmt(r.params.c80.db)) + "," + fmt(r.params.d50) +
          "," + fmt(r.params.ts) + "," + fmt(r.sti) + "," + fmt(r.sti_reconstructed);
  for (double v : r.band_t60s.values()) text += "," + fmt(v);
  return text + "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Blind estimation of room acoustic parameters from reverberant speech"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  std::string out, format = "json", sti_path, models_dir;
  std::size_t avg_rirs = 1;

  // synth-rir
  auto* synth = app.add_subcommand("synth-rir", "Synthesize a Schroeder RIR");
  std::vector<double> t60;
  double duration = 0.0, gain = 1.0, rate = 16000.0;
  std::string carrier = "full-band-wgn";
  synth->add_option("--t60", t60, "T60 in s (1 value, or 7 per-band values)")->required();
  synth->add_option("--duration", duration, "Length in s (default ceil(1.5 T60))");
  synth->add_option("--gain", gain, "Amplitude a");
  synth->add_option("--carrier", carrier, "full-band-wgn | envelope-only");
  synth->add_option("--rate", rate, "Sample rate in Hz");
  synth->add_option("--seed", seed, "Carrier seed");
  synth->add_option("--out", out, "Output WAV")->required();

  // analyze-rir
  auto* analyze = app.add_subcommand("analyze-rir", "Room parameters of an RIR file");
  std::string input;
  analyze->add_option("rir", input, "RIR WAV")->required()->check(CLI::ExistingFile);
  analyze->add_option("--rate", rate, "Expected sample rate in Hz");
  analyze->add_option("--sti-config", sti_path, "STI constants (YAML)");
  analyze->add_option("--format", format)->check(CLI::IsMember({"json", "csv"}));
  analyze->add_option("--out", out, "Output file (default stdout)");

  // gen-corpus
  auto* gen = app.add_subcommand("gen-corpus", "Generate a reverberant speech corpus");
  std::string speech_dir, grid_spec;
  std::size_t seeds = 10, synthetic = 0;
  gen->add_option("--speech", speech_dir, "Directory of 16 kHz mono WAVs");
  gen->add_option("--synthetic-speech", synthetic,
                  "Write N synthetic utterances to <out>/speech and use them");
  gen->add_option("--grid", grid_spec, "T60 grid lo:hi:step or list (default 0.2:3.0:0.1)");
  gen->add_option("--seeds", seeds, "Carrier seeds per T60 and utterance");
  gen->add_option("--seed", seed, "Corpus seed");
  gen->add_option("--out", out, "Corpus directory")->required();

  // split
  auto* split_cmd = app.add_subcommand("split", "Assign stratified train/test labels");
  std::string manifest_path;
  double fraction = 0.7;
  split_cmd->add_option("--manifest", manifest_path)->required()->check(CLI::ExistingFile);
  split_cmd->add_option("--fraction", fraction, "Train fraction");
  split_cmd->add_option("--seed", seed);
  split_cmd->add_option("--out", out, "Output manifest (default: in place)");

  // train
  auto* train_cmd = app.add_subcommand("train", "Train the seven band regressors");
  TrainConfig tc;
  train_cmd->add_option("--manifest", manifest_path)->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--seed", tc.seed);
  train_cmd->add_option("--epochs", tc.max_epochs);
  train_cmd->add_option("--batch", tc.batch_size);
  train_cmd->add_option("--lr", tc.learning_rate);
  train_cmd->add_option("--patience", tc.patience);
  train_cmd->add_option("--out", out, "Model directory")->required();

  // estimate
  auto* est = app.add_subcommand("estimate", "Estimate room parameters of a recording");
  est->add_option("wav", input, "Reverberant speech WAV (16 kHz, >= 5 s)")
      ->required()
      ->check(CLI::ExistingFile);
  est->add_option("--models", models_dir)->required();
  est->add_option("--sti-config", sti_path);
  est->add_option("--seed", seed, "Reconstruction seed");
  est->add_option("--avg-rirs", avg_rirs, "Average parameters over N reconstructions");
  est->add_option("--format", format)->check(CLI::IsMember({"json", "csv"}));
  est->add_option("--out", out);

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "Evaluate models on the test split");
  std::size_t max_exclusions = 0;
  eval->add_option("--manifest", manifest_path)->required()->check(CLI::ExistingFile);
  eval->add_option("--models", models_dir)->required();
  eval->add_option("--sti-config", sti_path);
  eval->add_option("--seed", seed, "Reconstruction seed");
  eval->add_option("--avg-rirs", avg_rirs);
  eval->add_option("--max-exclusions", max_exclusions,
                   "Exit with status 4 above this many excluded entries");
  eval->add_option("--out", out, "EvalReport JSON (default stdout)");

  // emit-plots
  auto* plots = app.add_subcommand("emit-plots", "Write scatter CSVs from an EvalReport");
  std::string report_path;
  plots->add_option("--report", report_path)->required()->check(CLI::ExistingFile);
  plots->add_option("--out", out, "Directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) return run_synth_rir(t60, duration, gain, seed, carrier, rate, out);
    if (*analyze) return run_analyze(input, rate, sti_path, format, out);

    if (*gen) {
      fs::path speech = speech_dir;
      if (synthetic > 0) {
        speech = fs::path(out) / "speech";
        write_synthetic_speech(speech, synthetic, seed);
      } else if (speech_dir.empty()) {
        throw ContractError("gen-corpus needs --speech or --synthetic-speech");
      }
      CorpusConfig cfg;
      cfg.t60_grid = parse_grid(grid_spec);
      cfg.seeds = seeds;
      cfg.corpus_seed = seed;
      const CorpusManifest m = gen_corpus(speech, cfg, out);
      std::cerr << "generated " << m.entries.size() << " entries in " << out << '\n';
      for (const auto& f : m.failures) std::cerr << "skipped " << f << '\n';
      return kExitOk;
    }

    if (*split_cmd) {
      const CorpusManifest m = split(read_manifest(manifest_path), fraction, seed);
      write_manifest(out.empty() ? manifest_path : out, m);
      std::cerr << m.count(Split::kTrain) << " train, " << m.count(Split::kTest) << " test\n";
      return kExitOk;
    }

    if (*train_cmd) {
      const CorpusManifest m = read_manifest(manifest_path);
      const auto samples = training_samples(m, fs::path(manifest_path).parent_path());
      const ModelTraining t = train_models(samples, tc);
      save_models(t.models, out);
      for (std::size_t k = 0; k < kNumBands; ++k) {
        write_training_log(fs::path(out) / ("train_log_" + band_label(k) + ".csv"), t.logs[k]);
        std::cerr << "band " << band_label(k) << " Hz: best epoch " << t.best_epoch[k] << '\n';
      }
      return kExitOk;
    }

    if (*est) {
      const ModelSet models = load_models(models_dir);
      const RoomReport r = estimate_all(read_wav(input), models, sti_config_from(sti_path),
                                        seed, avg_rirs, fs::path(input).filename().string());
      for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
      emit(out, format == "csv" ? room_report_csv(r) : to_json(r) + "\n");
      return kExitOk;
    }

    if (*eval) {
      const CorpusManifest m = read_manifest(manifest_path);
      const ModelSet models = load_models(models_dir);
      const EvalReport r = evaluate(m, fs::path(manifest_path).parent_path(), models,
                                    sti_config_from(sti_path), seed, avg_rirs);
      emit(out, to_json(r) + "\n");
      for (std::size_t q = 0; q < kNumQuantities; ++q) {
        std::fprintf(stderr, "%-4s n=%zu r=%.4f rmse=%.4f\n",
                     to_string(kQuantities[q]).c_str(), r.stats[q].n, r.stats[q].pearson_r,
                     r.stats[q].rmse);
      }
      if (r.excluded > max_exclusions) {
        std::cerr << r.excluded << " entries excluded:\n";
        for (const auto& e : r.exclusions) std::cerr << "  " << e << '\n';
        return kExitExclusions;
      }
      return kExitOk;
    }

    if (*plots) {
      std::ifstream in(report_path);
      std::stringstream text;
      text << in.rdbuf();
      for (const auto& p : write_scatter_csvs(eval_report_from_json(text.str()), out)) {
        std::cerr << "wrote " << p.string() << '\n';
      }
      return kExitOk;
    }
  } catch (const ModelError& e) {
    std::cerr << "model error: " << e.what() << '\n';
    return kExitModel;
  } catch (const ContractError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitContract;
  } catch (const WavError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitContract;
  } catch (const RangeError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitContract;
  } catch (const ConfigError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitContract;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}
