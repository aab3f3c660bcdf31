#pragma once

// Batch jobs behind the command-line tool: perturbing datasets, sampling,
// oracle reconstruction, evaluation and threshold calibration. Per-record
// randomness comes from Philox(seed).split(record index), so results do not
// depend on the thread count.

#include <exception>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

#include "xtalgen/io/config.hpp"
#include "xtalgen/io/dataset.hpp"
#include "xtalgen/metrics/coverage.hpp"
#include "xtalgen/metrics/match.hpp"
#include "xtalgen/metrics/properties.hpp"
#include "xtalgen/metrics/validity.hpp"
#include "xtalgen/sampling/noise.hpp"

namespace xtalgen {

// Runs fn(0..n-1) over `threads` workers; the lowest-index exception wins.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::mutex m;
  std::size_t next = 0;
  auto worker = [&] {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard lock(m);
        if (next >= n) return;
        i = next++;
      }
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < std::min<std::size_t>(threads, n); ++t) pool.emplace_back(worker);
  pool.clear();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline std::unique_ptr<ScoreField> make_field(const FieldConfig& f) {
  if (f.kind == "zero") return std::make_unique<ZeroScoreField>();
  if (f.kind == "soft_sphere")
    return std::make_unique<SoftSphereField>(f.stiffness, f.cutoff, std::map<int, double>{}, f.radius_scale);
  throw Error("unknown score field '" + f.kind + "'");
}

// ----- perturb -------------------------------------------------------------

inline std::vector<CrystalRecord> perturb_dataset(const std::vector<CrystalRecord>& records, double sigma_x,
                                                  double sigma_a, std::uint64_t seed) {
  std::vector<CrystalRecord> out = records;
  const Philox root(seed);
  for (std::size_t i = 0; i < records.size(); ++i) {
    Philox rng = root.split(i);
    const Crystal& c = records[i].crystal;
    Crystal noisy = perturb_coords(c, sigma_x, rng).crystal;
    if (sigma_a > 0.0) noisy = noisy.with_types(perturb_types(c.types(), c.composition(), sigma_a, rng));
    out[i].crystal = std::move(noisy);
  }
  return out;
}

// ----- sample --------------------------------------------------------------

struct LevelSummary {
  std::size_t level = 0;
  double sigma_x = 0.0, sigma_a = 0.0, alpha = 0.0;
  double mean_score_norm = 0.0;  // final step of the level
  std::size_t type_changes = 0;  // summed over the level
};

struct SampledStructure {
  CrystalRecord record;
  std::string source_id;  // reference record whose aggregates were used, if any
  std::vector<LevelSummary> levels;
};

inline std::vector<LevelSummary> summarize_levels(const std::vector<TrajectoryStep>& steps) {
  std::vector<LevelSummary> out;
  for (const auto& s : steps) {
    if (out.empty() || out.back().level != s.level) out.push_back({s.level, s.sigma_x, s.sigma_a, s.alpha, 0.0, 0});
    out.back().mean_score_norm = s.mean_score_norm;
    out.back().type_changes += s.type_changes;
  }
  return out;
}

// Composition, lattice and atom count come either from the literal
// [sample] settings or from a uniformly drawn reference record.
inline std::vector<SampledStructure> sample_dataset(const RunConfig& config,
                                                    const std::vector<CrystalRecord>& reference) {
  const bool literal = !config.sample.species.empty();
  if (!literal && reference.empty())
    throw Error("sample needs [sample] species/lattice_params or a non-empty reference dataset");
  const auto field = make_field(config.field);
  std::vector<std::optional<SampledStructure>> slots(config.sample.count);
  const Philox root(config.seed);
  parallel_for(slots.size(), config.threads, [&](std::size_t i) {
    Philox rng = root.split(i);
    std::vector<int> types;
    Lattice lattice;
    std::string source;
    if (literal) {
      for (const auto& s : config.sample.species) types.push_back(elements().z_of(s));
      lattice = params_to_lattice(*config.sample.lattice_params);
    } else {
      const auto& rec = reference[rng.below(reference.size())];
      types = rec.crystal.types();
      lattice = rec.crystal.lattice();
      source = rec.id;
    }
    SamplerConfig sc = config.sampler();
    sc.seed = rng.next_u64();
    sc.record_trajectory = true;
    auto res = anneal_sample(*field, Composition::from_types(types), lattice, types.size(), sc);
    char id[32];
    std::snprintf(id, sizeof id, "gen-%06zu", i);
    slots[i] = SampledStructure{CrystalRecord{id, std::move(res.crystal), {}}, source,
                                summarize_levels(res.trajectory)};
  });
  std::vector<SampledStructure> out;
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

inline void write_level_summaries_csv(const std::vector<SampledStructure>& s, std::ostream& out) {
  out << "id,level,sigma_x,sigma_a,alpha,final_mean_score_norm,type_changes\n";
  const auto old = out.precision(12);
  for (const auto& x : s)
    for (const auto& l : x.levels)
      out << x.record.id << ',' << l.level << ',' << l.sigma_x << ',' << l.sigma_a << ',' << l.alpha << ','
          << l.mean_score_norm << ',' << l.type_changes << '\n';
  out.precision(old);
}

// ----- reconstruct ---------------------------------------------------------

struct ReconstructionItem {
  std::string id;
  bool matched = false;
  std::optional<double> rmse;  // normalized, when matched
  Crystal result;
};

struct ReconstructionReport {
  std::size_t total = 0;
  std::size_t matched = 0;
  double match_rate = 0.0;               // percent
  std::optional<double> mean_rmse;       // over matched structures
  std::vector<ReconstructionItem> items;
};

// Perturb each reference by sigma (Cartesian, per atom), anneal with the
// harmonic oracle of that reference, and match the result against it.
inline ReconstructionReport reconstruct_dataset(const std::vector<CrystalRecord>& records, double sigma,
                                                const SamplerConfig& sampler, const MatchOptions& match,
                                                unsigned threads = 1) {
  if (records.empty()) throw Error("reconstruct needs at least one record");
  std::vector<std::optional<ReconstructionItem>> items(records.size());
  const Philox root(sampler.seed);
  parallel_for(records.size(), threads, [&](std::size_t i) {
    const Crystal& ref = records[i].crystal;
    Philox rng = root.split(i);
    const Crystal noisy = perturb_coords(ref, sigma, rng).crystal;
    SamplerConfig sc = sampler;
    sc.seed = rng.next_u64();
    sc.record_trajectory = false;
    const HarmonicOracle oracle(ref);
    Crystal result = anneal_from(oracle, noisy, sc).crystal;
    const MatchResult m = structure_match(result, ref, match);
    items[i] = ReconstructionItem{records[i].id, m.matched, m.rmse_normalized, std::move(result)};
  });
  ReconstructionReport rep;
  rep.total = records.size();
  double rmse_sum = 0.0;
  for (auto& it : items) {
    if (it->matched) {
      ++rep.matched;
      rmse_sum += *it->rmse;
    }
    rep.items.push_back(std::move(*it));
  }
  rep.match_rate = 100.0 * static_cast<double>(rep.matched) / static_cast<double>(rep.total);
  if (rep.matched > 0) rep.mean_rmse = rmse_sum / static_cast<double>(rep.matched);
  return rep;
}

// ----- evaluate ------------------------------------------------------------

struct Thresholds {
  double delta_struc = 0.0;
  double delta_comp = 0.0;
  double percentile = 0.0;
  std::size_t reference_size = 0;
};

inline std::vector<FingerprintPair> fingerprints(const std::vector<CrystalRecord>& records, unsigned threads = 1) {
  std::vector<std::optional<FingerprintPair>> tmp(records.size());
  parallel_for(records.size(), threads, [&](std::size_t i) { tmp[i] = fingerprint(records[i].crystal); });
  std::vector<FingerprintPair> out;
  for (auto& f : tmp) out.push_back(std::move(*f));
  return out;
}

// Percentile of nearest-neighbour fingerprint distances within the reference
// set. Zero distances (duplicate compositions or structures) are skipped so
// the thresholds stay positive.
inline Thresholds calibrate_thresholds(const std::vector<FingerprintPair>& reference, double percentile_q) {
  if (reference.size() < 2) throw Error("calibration needs at least two reference structures");
  std::vector<Fingerprint> s, c;
  for (const auto& f : reference) {
    s.push_back(f.structure);
    c.push_back(f.composition);
  }
  auto positive = [](std::vector<double> v) {
    std::erase_if(v, [](double x) { return !(x > 0.0); });
    return v;
  };
  const auto ds = positive(nearest_neighbor_distances(s));
  const auto dc = positive(nearest_neighbor_distances(c));
  if (ds.empty()) throw Error("calibration: all reference structure fingerprints coincide");
  if (dc.empty()) throw Error("calibration: all reference compositions coincide");
  return {percentile(ds, percentile_q), percentile(dc, percentile_q), percentile_q, reference.size()};
}

struct ValiditySummary {
  std::size_t count = 0;
  double structure = 0.0;      // percent
  double composition = 0.0;    // percent of structures whose composition is valid
  double overall = 0.0;        // percent
  std::size_t indeterminate = 0;
};

inline ValiditySummary validity_summary(const std::vector<CrystalRecord>& records, unsigned threads = 1) {
  std::vector<std::optional<ValidityReport>> v(records.size());
  parallel_for(records.size(), threads, [&](std::size_t i) { v[i] = validity(records[i].crystal); });
  ValiditySummary out;
  out.count = records.size();
  std::size_t s = 0, c = 0, both = 0;
  for (const auto& r : v) {
    s += r->struct_valid;
    c += r->comp_valid();
    both += r->valid();
    out.indeterminate += r->composition.verdict == CompositionVerdict::indeterminate;
  }
  const double n = static_cast<double>(std::max<std::size_t>(out.count, 1));
  out.structure = 100.0 * static_cast<double>(s) / n;
  out.composition = 100.0 * static_cast<double>(c) / n;
  out.overall = 100.0 * static_cast<double>(both) / n;
  return out;
}

struct EvaluationReport {
  ValiditySummary generated, reference;
  CoverageReport coverage;
  Thresholds thresholds;
  bool thresholds_calibrated = false;
  PropertyStats properties;
};

// Properties listed in `property_columns` are read from each record's
// precomputed properties; every record must carry them.
inline EvaluationReport evaluate_datasets(const std::vector<CrystalRecord>& generated,
                                          const std::vector<CrystalRecord>& reference, const MetricConfig& metrics,
                                          const std::vector<std::string>& property_columns = {},
                                          unsigned threads = 1) {
  if (generated.empty() || reference.empty()) throw Error("evaluate needs non-empty generated and reference sets");
  EvaluationReport rep;
  rep.generated = validity_summary(generated, threads);
  rep.reference = validity_summary(reference, threads);
  const auto fg = fingerprints(generated, threads);
  const auto fr = fingerprints(reference, threads);
  if (metrics.delta_struc && metrics.delta_comp) {
    rep.thresholds = {*metrics.delta_struc, *metrics.delta_comp, 0.0, reference.size()};
  } else {
    const Thresholds cal = calibrate_thresholds(fr, metrics.percentile);
    rep.thresholds = cal;
    if (metrics.delta_struc) rep.thresholds.delta_struc = *metrics.delta_struc;
    if (metrics.delta_comp) rep.thresholds.delta_comp = *metrics.delta_comp;
    rep.thresholds_calibrated = true;
  }
  rep.coverage = coverage(fg, fr, rep.thresholds.delta_struc, rep.thresholds.delta_comp);

  std::map<std::string, std::pair<PropertyFn, PropertyFn>> custom;
  for (const auto& name : property_columns) {
    auto column = [name](const std::vector<CrystalRecord>& set, const char* which) -> PropertyFn {
      return [&set, name, which](std::size_t i, const Crystal&) {
        auto it = set[i].properties.find(name);
        if (it == set[i].properties.end())
          throw Error(std::string(which) + " record '" + set[i].id + "' lacks property '" + name + "'");
        return it->second;
      };
    };
    custom[name] = {column(generated, "generated"), column(reference, "reference")};
  }
  rep.properties = property_stats(crystals_of(generated), crystals_of(reference), custom);
  return rep;
}

}  // namespace xtalgen
