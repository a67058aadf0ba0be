#include <cmath>
#include <cstring>
#include <fstream>

#include "json.hpp"
#include "mtfcnn/error.hpp"
#include "mtfcnn/pipeline.hpp"

namespace mtfcnn {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// NaN has no JSON spelling; it is written as null.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double number(const json& j) { return j.is_null() ? std::nan("") : j.get<double>(); }

bool same(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

template <typename F>
auto parse(const std::string& text, F&& f) {
  try {
    return f(json::parse(text));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed report JSON: ") + e.what());
  }
}

}  // namespace

bool RoomReport::operator==(const RoomReport& o) const {
  return input_id == o.input_id && tool_version == o.tool_version &&
         band_t60s.values() == o.band_t60s.values() && params.t60 == o.params.t60 &&
         params.edt == o.params.edt && params.c80.db == o.params.c80.db &&
         params.c80.anechoic == o.params.c80.anechoic && params.d50 == o.params.d50 &&
         params.ts == o.params.ts && sti == o.sti && sti_reconstructed == o.sti_reconstructed &&
         reconstruction_seed == o.reconstruction_seed && averaged_rirs == o.averaged_rirs &&
         t60_method == o.t60_method && sti_profile == o.sti_profile && warnings == o.warnings;
}

bool EvalReport::operator==(const EvalReport& o) const {
  if (tool_version != o.tool_version || evaluated != o.evaluated || excluded != o.excluded ||
      exclusions != o.exclusions) {
    return false;
  }
  for (std::size_t q = 0; q < kNumQuantities; ++q) {
    const QuantityStats& a = stats[q];
    const QuantityStats& b = o.stats[q];
    if (!same(a.rmse, b.rmse) || !same(a.pearson_r, b.pearson_r) || a.n != b.n ||
        a.scatter != b.scatter) {
      return false;
    }
  }
  return true;
}

std::string to_json(const RoomReport& r) {
  const json j{{"input_id", r.input_id},
               {"tool_version", r.tool_version},
               {"band_centers_hz", kOctaveCenters},
               {"band_t60_s", r.band_t60s.values()},
               {"t60_s", r.params.t60},
               {"edt_s", r.params.edt},
               {"c80_db", number(r.params.c80.db)},
               {"c80_anechoic", r.params.c80.anechoic},
               {"d50_pct", r.params.d50},
               {"ts_s", r.params.ts},
               {"sti", r.sti},
               {"sti_reconstructed", r.sti_reconstructed},
               {"reconstruction_seed", r.reconstruction_seed},
               {"averaged_rirs", r.averaged_rirs},
               {"t60_method", r.t60_method},
               {"sti_profile", r.sti_profile},
               {"warnings", r.warnings}};
  return j.dump(2);
}

RoomReport room_report_from_json(const std::string& text) {
  return parse(text, [](const json& j) {
    RoomReport r;
    r.input_id = j.at("input_id").get<std::string>();
    r.tool_version = j.at("tool_version").get<std::string>();
    r.band_t60s = BandT60s(j.at("band_t60_s").get<std::array<double, kNumBands>>());
    r.params.t60 = j.at("t60_s").get<double>();
    r.params.edt = j.at("edt_s").get<double>();
    r.params.c80.db = number(j.at("c80_db"));
    r.params.c80.anechoic = j.at("c80_anechoic").get<bool>();
    r.params.d50 = j.at("d50_pct").get<double>();
    r.params.ts = j.at("ts_s").get<double>();
    r.sti = j.at("sti").get<double>();
    r.sti_reconstructed = j.at("sti_reconstructed").get<double>();
    r.reconstruction_seed = j.at("reconstruction_seed").get<std::uint64_t>();
    r.averaged_rirs = j.at("averaged_rirs").get<std::size_t>();
    r.t60_method = j.at("t60_method").get<std::string>();
    r.sti_profile = j.at("sti_profile").get<std::string>();
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
    return r;
  });
}

std::string to_json(const EvalReport& r) {
  json params = json::object();
  for (std::size_t q = 0; q < kNumQuantities; ++q) {
    const QuantityStats& s = r.stats[q];
    json scatter = json::array();
    for (const auto& [g, e] : s.scatter) scatter.push_back({g, e});
    params[to_string(kQuantities[q])] = {{"rmse", number(s.rmse)},
                                         {"pearson_r", number(s.pearson_r)},
                                         {"n", s.n},
                                         {"scatter", scatter}};
  }
  const json j{{"tool_version", r.tool_version},
               {"evaluated", r.evaluated},
               {"excluded", r.excluded},
               {"exclusions", r.exclusions},
               {"parameters", params}};
  return j.dump(2);
}

EvalReport eval_report_from_json(const std::string& text) {
  return parse(text, [](const json& j) {
    EvalReport r;
    r.tool_version = j.at("tool_version").get<std::string>();
    r.evaluated = j.at("evaluated").get<std::size_t>();
    r.excluded = j.at("excluded").get<std::size_t>();
    r.exclusions = j.at("exclusions").get<std::vector<std::string>>();
    const json& params = j.at("parameters");
    for (std::size_t q = 0; q < kNumQuantities; ++q) {
      const json& p = params.at(to_string(kQuantities[q]));
      QuantityStats& s = r.stats[q];
      s.rmse = number(p.at("rmse"));
      s.pearson_r = number(p.at("pearson_r"));
      s.n = p.at("n").get<std::size_t>();
      for (const json& pair : p.at("scatter")) {
        s.scatter.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());
      }
    }
    return r;
  });
}

std::vector<fs::path> write_scatter_csvs(const EvalReport& report, const fs::path& dir) {
  fs::create_directories(dir);
  std::vector<fs::path> paths;
  for (std::size_t q = 0; q < kNumQuantities; ++q) {
    const fs::path path = dir / ("scatter_" + to_string(kQuantities[q]) + ".csv");
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out.precision(17);
    out << "ground_truth,estimate\n";
    for (const auto& [g, e] : report.stats[q].scatter) out << g << ',' << e << '\n';
    paths.push_back(path);
  }
  return paths;
}

}  // namespace mtfcnn
