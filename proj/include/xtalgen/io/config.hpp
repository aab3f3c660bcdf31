#pragma once

// Run configuration read from the TOML subset in toml_lite.hpp. Layout:
//
//   seed = 0
//   output_dir = "out"
//   threads = 1
//   [schedule.coords]  sigma_max, sigma_min, levels
//   [schedule.types]   sigma_max, sigma_min, levels
//   [sampler]          step_size, steps_per_level
//   [field]            kind ("soft_sphere" | "zero"), stiffness, cutoff, radius_scale
//   [data]             reference, test, generated (paths, relative to the config file)
//   [perturb]          sigma_x, sigma_a
//   [reconstruct]      sigma, limit
//   [sample]           count, species, lattice_params
//   [metrics]          delta_struc, delta_comp, percentile, stol, angle_tol, ltol
//
// Every key is optional; unknown keys are rejected.

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "xtalgen/io/files.hpp"
#include "xtalgen/io/toml_lite.hpp"
#include "xtalgen/metrics/match.hpp"
#include "xtalgen/sampling/langevin.hpp"

namespace xtalgen {

struct FieldConfig {
  std::string kind = "soft_sphere";
  double stiffness = 1.0;
  double cutoff = 6.0;
  double radius_scale = 1.0;
};

struct SampleSource {
  std::size_t count = 10;
  std::vector<std::string> species;            // literal source when non-empty
  std::optional<LatticeParams> lattice_params;  // required with species
};

struct MetricConfig {
  std::optional<double> delta_struc;
  std::optional<double> delta_comp;
  double percentile = 5.0;
  MatchOptions match;
};

struct RunConfig {
  NoiseSchedule schedule = NoiseSchedule::standard();
  double step_size = 1e-4;
  int steps_per_level = 100;
  std::uint64_t seed = 0;
  FieldConfig field;
  std::optional<std::filesystem::path> reference, test, generated;
  double perturb_sigma_x = 0.0;
  double perturb_sigma_a = 0.0;
  double reconstruct_sigma = 0.5;
  std::size_t reconstruct_limit = 0;  // 0 = every record
  SampleSource sample;
  MetricConfig metrics;
  std::filesystem::path output_dir = "out";
  unsigned threads = 1;

  SamplerConfig sampler() const {
    SamplerConfig s;
    s.schedule = schedule;
    s.step_size_eps = step_size;
    s.steps_per_level = steps_per_level;
    s.seed = seed;
    return s;
  }

  // Everything that can change results; output_dir and threads are excluded.
  nlohmann::json canonical() const {
    auto spec = [](const GeometricSpec& g) {
      return nlohmann::json{{"sigma_max", g.sigma_max}, {"sigma_min", g.sigma_min}, {"levels", g.levels}};
    };
    auto path = [](const std::optional<std::filesystem::path>& p) {
      return p ? nlohmann::json(p->generic_string()) : nlohmann::json(nullptr);
    };
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    nlohmann::json lp = nullptr;
    if (sample.lattice_params) {
      const auto& p = *sample.lattice_params;
      lp = {p.a, p.b, p.c, p.alpha, p.beta, p.gamma};
    }
    return {
        {"seed", seed},
        {"schedule", {{"coords", spec(schedule.coord_spec())}, {"types", spec(schedule.type_spec())}}},
        {"sampler", {{"step_size", step_size}, {"steps_per_level", steps_per_level}}},
        {"field",
         {{"kind", field.kind},
          {"stiffness", field.stiffness},
          {"cutoff", field.cutoff},
          {"radius_scale", field.radius_scale}}},
        {"data", {{"reference", path(reference)}, {"test", path(test)}, {"generated", path(generated)}}},
        {"perturb", {{"sigma_x", perturb_sigma_x}, {"sigma_a", perturb_sigma_a}}},
        {"reconstruct", {{"sigma", reconstruct_sigma}, {"limit", reconstruct_limit}}},
        {"sample", {{"count", sample.count}, {"species", sample.species}, {"lattice_params", lp}}},
        {"metrics",
         {{"delta_struc", opt(metrics.delta_struc)},
          {"delta_comp", opt(metrics.delta_comp)},
          {"percentile", metrics.percentile},
          {"stol", metrics.match.stol},
          {"angle_tol", metrics.match.angle_tol},
          {"ltol", metrics.match.ltol}}},
    };
  }

  std::string hash() const { return io::hex64(io::fnv1a(canonical().dump())); }

  // Checks values; with `check_files`, every configured path must exist.
  void validate(bool check_files = true) const {
    SamplerConfig s = sampler();
    s.validate();
    if (field.kind != "soft_sphere" && field.kind != "zero")
      throw Error("config [field] kind must be \"soft_sphere\" or \"zero\", got \"" + field.kind + "\"");
    if (!(perturb_sigma_x >= 0.0) || !(perturb_sigma_a >= 0.0)) throw Error("config [perturb] sigmas must be >= 0");
    if (!(reconstruct_sigma >= 0.0)) throw Error("config [reconstruct] sigma must be >= 0");
    if (metrics.delta_struc && !(*metrics.delta_struc > 0.0))
      throw Error("config [metrics] delta_struc must be > 0");
    if (metrics.delta_comp && !(*metrics.delta_comp > 0.0)) throw Error("config [metrics] delta_comp must be > 0");
    if (!(metrics.percentile >= 0.0 && metrics.percentile <= 100.0))
      throw Error("config [metrics] percentile must be within [0, 100]");
    if (!(metrics.match.stol > 0.0) || !(metrics.match.angle_tol > 0.0) || !(metrics.match.ltol > 0.0))
      throw Error("config [metrics] stol, angle_tol and ltol must be > 0");
    if (!sample.species.empty() && !sample.lattice_params)
      throw Error("config [sample] species requires lattice_params");
    if (sample.lattice_params && sample.species.empty())
      throw Error("config [sample] lattice_params requires species");
    for (const auto& s : sample.species)
      if (!elements().find_symbol(s)) throw Error("config [sample] unknown element symbol '" + s + "'");
    if (sample.lattice_params) params_to_lattice(*sample.lattice_params);
    if (threads < 1) throw Error("config threads must be >= 1");
    if (check_files)
      for (const auto* p : {&reference, &test, &generated})
        if (*p && !std::filesystem::exists(**p))
          throw Error("config references missing file '" + (*p)->string() + "'");
  }
};

namespace detail {

class ConfigReader {
 public:
  explicit ConfigReader(const nlohmann::json& doc) : doc_(doc) {}

  const nlohmann::json* section(const std::string& name, const std::set<std::string>& keys) {
    seen_.insert(name);
    if (!doc_.contains(name)) return nullptr;
    const auto& s = doc_[name];
    if (!s.is_object()) throw Error("config '" + name + "' must be a section");
    for (const auto& [k, _] : s.items())
      if (!keys.count(k)) throw Error("config [" + name + "] unknown key '" + k + "'");
    return &s;
  }

  void finish() const {
    for (const auto& [k, _] : doc_.items())
      if (!seen_.count(k)) throw Error("config unknown key or section '" + k + "'");
  }

  void top(const std::string& k) { seen_.insert(k); }

 private:
  const nlohmann::json& doc_;
  std::set<std::string> seen_;
};

inline double num(const nlohmann::json& s, const char* key, const std::string& where, double fallback) {
  if (!s.contains(key)) return fallback;
  if (!s[key].is_number()) throw Error("config [" + where + "] '" + key + "' must be a number");
  return s[key].get<double>();
}

inline std::int64_t integer(const nlohmann::json& s, const char* key, const std::string& where,
                            std::int64_t fallback, std::int64_t min) {
  if (!s.contains(key)) return fallback;
  if (!s[key].is_number_integer()) throw Error("config [" + where + "] '" + key + "' must be an integer");
  const auto v = s[key].get<std::int64_t>();
  if (v < min) throw Error("config [" + where + "] '" + key + "' must be >= " + std::to_string(min));
  return v;
}

inline std::string str(const nlohmann::json& s, const char* key, const std::string& where, std::string fallback) {
  if (!s.contains(key)) return fallback;
  if (!s[key].is_string()) throw Error("config [" + where + "] '" + key + "' must be a string");
  return s[key].get<std::string>();
}

}  // namespace detail

// Relative data paths resolve against `base_dir`.
inline RunConfig run_config_from_toml(std::string_view text, const std::filesystem::path& base_dir = {}) {
  using namespace detail;
  const nlohmann::json doc = toml_lite::parse(text);
  ConfigReader r(doc);
  RunConfig c;

  for (const char* k : {"seed", "output_dir", "threads"}) r.top(k);
  c.seed = static_cast<std::uint64_t>(integer(doc, "seed", "top level", 0, 0));
  c.threads = static_cast<unsigned>(integer(doc, "threads", "top level", 1, 1));
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
  };
  if (doc.contains("output_dir")) c.output_dir = resolve(str(doc, "output_dir", "top level", ""));

  if (const auto* s = r.section("schedule", {"coords", "types"})) {
    GeometricSpec coords = c.schedule.coord_spec(), types = c.schedule.type_spec();
    if (s->contains("coords")) coords = geometric_spec_from_json((*s)["coords"], "schedule.coords");
    if (s->contains("types")) types = geometric_spec_from_json((*s)["types"], "schedule.types");
    c.schedule = NoiseSchedule(coords, types);
  }
  if (const auto* s = r.section("sampler", {"step_size", "steps_per_level"})) {
    c.step_size = num(*s, "step_size", "sampler", c.step_size);
    c.steps_per_level = static_cast<int>(integer(*s, "steps_per_level", "sampler", c.steps_per_level, 1));
  }
  if (const auto* s = r.section("field", {"kind", "stiffness", "cutoff", "radius_scale"})) {
    c.field.kind = str(*s, "kind", "field", c.field.kind);
    c.field.stiffness = num(*s, "stiffness", "field", c.field.stiffness);
    c.field.cutoff = num(*s, "cutoff", "field", c.field.cutoff);
    c.field.radius_scale = num(*s, "radius_scale", "field", c.field.radius_scale);
  }
  if (const auto* s = r.section("data", {"reference", "test", "generated"})) {
    if (s->contains("reference")) c.reference = resolve(str(*s, "reference", "data", ""));
    if (s->contains("test")) c.test = resolve(str(*s, "test", "data", ""));
    if (s->contains("generated")) c.generated = resolve(str(*s, "generated", "data", ""));
  }
  if (const auto* s = r.section("perturb", {"sigma_x", "sigma_a"})) {
    c.perturb_sigma_x = num(*s, "sigma_x", "perturb", c.perturb_sigma_x);
    c.perturb_sigma_a = num(*s, "sigma_a", "perturb", c.perturb_sigma_a);
  }
  if (const auto* s = r.section("reconstruct", {"sigma", "limit"})) {
    c.reconstruct_sigma = num(*s, "sigma", "reconstruct", c.reconstruct_sigma);
    c.reconstruct_limit = static_cast<std::size_t>(integer(*s, "limit", "reconstruct", 0, 0));
  }
  if (const auto* s = r.section("sample", {"count", "species", "lattice_params"})) {
    c.sample.count = static_cast<std::size_t>(integer(*s, "count", "sample", 10, 1));
    if (s->contains("species")) {
      const auto& sp = (*s)["species"];
      if (!sp.is_array() || sp.empty()) throw Error("config [sample] species must be a non-empty array");
      for (const auto& x : sp) {
        if (!x.is_string()) throw Error("config [sample] species must hold element symbols");
        c.sample.species.push_back(x.get<std::string>());
      }
    }
    if (s->contains("lattice_params")) {
      const auto& lp = (*s)["lattice_params"];
      if (!lp.is_array() || lp.size() != 6) throw Error("config [sample] lattice_params needs 6 numbers");
      double v[6];
      for (int k = 0; k < 6; ++k) {
        if (!lp[k].is_number()) throw Error("config [sample] lattice_params needs 6 numbers");
        v[k] = lp[k].get<double>();
      }
      c.sample.lattice_params = LatticeParams{v[0], v[1], v[2], v[3], v[4], v[5]};
    }
  }
  if (const auto* s =
          r.section("metrics", {"delta_struc", "delta_comp", "percentile", "stol", "angle_tol", "ltol"})) {
    if (s->contains("delta_struc")) c.metrics.delta_struc = num(*s, "delta_struc", "metrics", 0.0);
    if (s->contains("delta_comp")) c.metrics.delta_comp = num(*s, "delta_comp", "metrics", 0.0);
    c.metrics.percentile = num(*s, "percentile", "metrics", c.metrics.percentile);
    c.metrics.match.stol = num(*s, "stol", "metrics", c.metrics.match.stol);
    c.metrics.match.angle_tol = num(*s, "angle_tol", "metrics", c.metrics.match.angle_tol);
    c.metrics.match.ltol = num(*s, "ltol", "metrics", c.metrics.match.ltol);
  }
  r.finish();
  return c;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  RunConfig c = run_config_from_toml(io::read_file(path), path.parent_path());
  return c;
}

}  // namespace xtalgen
