// xtalgen command-line tool.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "xtalgen/xtalgen.hpp"

namespace fs = std::filesystem;
using namespace xtalgen;

namespace {

// Flags shared by the run subcommands; unset values fall back to the config.
struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;
  std::optional<int> steps_per_level;
  std::optional<double> step_size;
  std::optional<unsigned> threads;
  std::optional<std::string> field;

  RunConfig resolve() const {
    RunConfig c = config.empty() ? RunConfig{} : load_run_config(config);
    if (seed) c.seed = *seed;
    if (output_dir) c.output_dir = *output_dir;
    if (steps_per_level) c.steps_per_level = *steps_per_level;
    if (step_size) c.step_size = *step_size;
    if (threads) c.threads = *threads;
    if (field) c.field.kind = *field;
    return c;
  }
};

void add_config(CLI::App* app, Overrides& o) {
  app->add_option("-c,--config", o.config, "Run configuration (TOML)")->check(CLI::ExistingFile);
  app->add_option("--seed", o.seed, "Random seed");
}

void add_sampler(CLI::App* app, Overrides& o) {
  app->add_option("--steps-per-level", o.steps_per_level, "Langevin steps per noise level");
  app->add_option("--step-size", o.step_size, "Langevin step size epsilon");
  app->add_option("--threads", o.threads, "Worker threads");
}

std::string sibling_manifest(const fs::path& out) { return out.string() + ".manifest.json"; }

void write_manifest(const fs::path& path, const std::string& command, const RunConfig& c,
                    const std::vector<std::string>& outputs) {
  report::write_json(path, report::manifest_json(command, c, outputs));
}

void emit(const std::optional<std::string>& path, const std::string& text) {
  if (path)
    io::write_file_atomic(*path, text);
  else
    std::cout << text;
}

const CrystalRecord& pick(const std::vector<CrystalRecord>& set, const std::optional<std::string>& id,
                          const std::string& source) {
  if (set.empty()) throw Error("dataset '" + source + "' is empty");
  if (!id) return set.front();
  for (const auto& r : set)
    if (r.id == *id) return r;
  throw Error("no record with id '" + *id + "' in '" + source + "'");
}

fs::path require(const std::optional<fs::path>& p, const char* what) {
  if (!p) throw Error(std::string("no ") + what + " dataset given (flag or [data] in the config)");
  return *p;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Crystal generation and evaluation toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(report::kArtifactVersion));

  // perturb
  Overrides perturb_o;
  std::optional<std::string> perturb_in;
  std::string perturb_out;
  std::optional<double> perturb_sx, perturb_sa;
  auto* perturb = app.add_subcommand("perturb", "Add coordinate/type noise to every record of a dataset");
  add_config(perturb, perturb_o);
  perturb->add_option("-i,--input", perturb_in, "Input dataset (JSON lines)");
  perturb->add_option("-o,--output", perturb_out, "Output dataset")->required();
  perturb->add_option("--sigma-x", perturb_sx, "Coordinate noise (Angstrom)");
  perturb->add_option("--sigma-a", perturb_sa, "Type noise level");

  // sample
  Overrides sample_o;
  std::optional<std::string> sample_ref;
  std::optional<std::size_t> sample_count;
  auto* sample = app.add_subcommand("sample", "Anneal new structures with a score field");
  add_config(sample, sample_o);
  add_sampler(sample, sample_o);
  sample->add_option("-r,--reference", sample_ref, "Dataset supplying composition/lattice/N aggregates");
  sample->add_option("-n,--count", sample_count, "Number of structures");
  sample->add_option("--field", sample_o.field, "Score field: soft_sphere or zero");
  sample->add_option("-o,--output-dir", sample_o.output_dir, "Output directory");

  // reconstruct
  Overrides recon_o;
  std::optional<std::string> recon_in;
  std::optional<double> recon_sigma;
  std::optional<std::size_t> recon_limit;
  auto* recon = app.add_subcommand("reconstruct", "Perturb, anneal with the harmonic oracle, and match");
  add_config(recon, recon_o);
  add_sampler(recon, recon_o);
  recon->add_option("-i,--input", recon_in, "Test dataset");
  recon->add_option("--sigma", recon_sigma, "Coordinate noise before annealing (Angstrom)");
  recon->add_option("--limit", recon_limit, "Use only the first N records (0 = all)");
  recon->add_option("-o,--output-dir", recon_o.output_dir, "Output directory");

  // evaluate
  Overrides eval_o;
  std::optional<std::string> eval_gen, eval_ref, eval_out;
  std::optional<double> eval_ds, eval_dc, eval_pct;
  std::vector<std::string> eval_props;
  auto* evaluate = app.add_subcommand("evaluate", "Validity, coverage and property EMD of a generated set");
  add_config(evaluate, eval_o);
  evaluate->add_option("-g,--generated", eval_gen, "Generated dataset");
  evaluate->add_option("-r,--reference", eval_ref, "Reference dataset");
  evaluate->add_option("--delta-struc", eval_ds, "Structure fingerprint threshold");
  evaluate->add_option("--delta-comp", eval_dc, "Composition fingerprint threshold");
  evaluate->add_option("--percentile", eval_pct, "Calibration percentile when a threshold is missing");
  evaluate->add_option("--property", eval_props, "Precomputed property column to compare (repeatable)");
  evaluate->add_option("--threads", eval_o.threads, "Worker threads");
  evaluate->add_option("-o,--output", eval_out, "Report path (default: stdout)");

  // calibrate-thresholds
  Overrides cal_o;
  std::optional<std::string> cal_ref, cal_out;
  std::optional<double> cal_pct;
  auto* calibrate = app.add_subcommand("calibrate-thresholds", "Derive coverage thresholds from a reference set");
  add_config(calibrate, cal_o);
  calibrate->add_option("-r,--reference", cal_ref, "Reference dataset");
  calibrate->add_option("--percentile", cal_pct, "Percentile of nearest-neighbour distances");
  calibrate->add_option("--threads", cal_o.threads, "Worker threads");
  calibrate->add_option("-o,--output", cal_out, "Report path (default: stdout)");

  // niggli
  std::string niggli_in;
  std::optional<std::string> niggli_out;
  auto* niggli = app.add_subcommand("niggli", "Rewrite every record in its Niggli-reduced cell");
  niggli->add_option("-i,--input", niggli_in, "Input dataset")->required()->check(CLI::ExistingFile);
  niggli->add_option("-o,--output", niggli_out, "Output dataset (default: stdout)");

  // graph
  std::string graph_in;
  std::optional<std::string> graph_id, graph_out;
  std::size_t graph_k = 12;
  auto* graph = app.add_subcommand("graph", "Periodic k-nearest-neighbour edges of one record (CSV)");
  graph->add_option("-i,--input", graph_in, "Input dataset")->required()->check(CLI::ExistingFile);
  graph->add_option("--id", graph_id, "Record id (default: first record)");
  graph->add_option("-k", graph_k, "Neighbours per atom")->check(CLI::PositiveNumber);
  graph->add_option("-o,--output", graph_out, "CSV path (default: stdout)");

  // match
  std::string match_a, match_b;
  std::optional<std::string> match_a_id, match_b_id;
  MatchOptions match_opt;
  auto* match = app.add_subcommand("match", "Compare two structures with the tolerance matcher");
  match->add_option("-a", match_a, "Dataset holding the first structure")->required()->check(CLI::ExistingFile);
  match->add_option("-b", match_b, "Dataset holding the second structure")->required()->check(CLI::ExistingFile);
  match->add_option("--a-id", match_a_id, "Record id in the first dataset (default: first)");
  match->add_option("--b-id", match_b_id, "Record id in the second dataset (default: first)");
  match->add_option("--stol", match_opt.stol, "Site tolerance (fraction of (V/N)^(1/3))");
  match->add_option("--angle-tol", match_opt.angle_tol, "Angle tolerance (degrees)");
  match->add_option("--ltol", match_opt.ltol, "Relative length tolerance");

  std::string command = "xtalgen";
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    for (auto* sub : app.get_subcommands()) command = sub->get_name();
    std::cerr << report::error_json(command, e.what()).dump() << '\n';
    return 2;
  }

  try {
    if (*perturb) {
      command = "perturb";
      RunConfig c = perturb_o.resolve();
      if (perturb_in) c.reference = *perturb_in;
      if (perturb_sx) c.perturb_sigma_x = *perturb_sx;
      if (perturb_sa) c.perturb_sigma_a = *perturb_sa;
      c.validate();
      const auto in = load_dataset(require(c.reference, "input"));
      save_dataset(perturb_dataset(in, c.perturb_sigma_x, c.perturb_sigma_a, c.seed), perturb_out);
      write_manifest(sibling_manifest(perturb_out), command, c, {fs::path(perturb_out).filename().string()});
    } else if (*sample) {
      command = "sample";
      RunConfig c = sample_o.resolve();
      if (sample_ref) c.reference = *sample_ref;
      if (sample_count) c.sample.count = *sample_count;
      c.validate();
      std::vector<CrystalRecord> ref;
      if (c.sample.species.empty()) ref = load_dataset(require(c.reference, "reference"));
      const auto out = sample_dataset(c, ref);
      std::vector<CrystalRecord> records;
      for (const auto& s : out) records.push_back(s.record);
      std::ostringstream traj;
      write_level_summaries_csv(out, traj);
      save_dataset(records, c.output_dir / "generated.jsonl");
      io::write_file_atomic(c.output_dir / "trajectories.csv", traj.str());
      write_manifest(c.output_dir / "manifest.json", command, c, {"generated.jsonl", "trajectories.csv"});
      std::cout << "sampled " << records.size() << " structures into " << c.output_dir.string() << '\n';
    } else if (*recon) {
      command = "reconstruct";
      RunConfig c = recon_o.resolve();
      if (recon_in) c.test = *recon_in;
      if (recon_sigma) c.reconstruct_sigma = *recon_sigma;
      if (recon_limit) c.reconstruct_limit = *recon_limit;
      c.validate();
      auto records = load_dataset(require(c.test ? c.test : c.reference, "test"));
      if (c.reconstruct_limit > 0 && records.size() > c.reconstruct_limit) records.erase(records.begin() + static_cast<std::ptrdiff_t>(c.reconstruct_limit), records.end());
      const auto rep = reconstruct_dataset(records, c.reconstruct_sigma, c.sampler(), c.metrics.match, c.threads);
      std::vector<CrystalRecord> results;
      for (const auto& it : rep.items) results.push_back(CrystalRecord{it.id, it.result, {}});
      save_dataset(results, c.output_dir / "reconstructed.jsonl");
      report::write_json(c.output_dir / "reconstruct.json",
                         report::reconstruction_json(rep, c.reconstruct_sigma, c.metrics.match));
      write_manifest(c.output_dir / "manifest.json", command, c, {"reconstructed.jsonl", "reconstruct.json"});
      std::cout << "match rate " << rep.match_rate << "% (" << rep.matched << "/" << rep.total << ")";
      if (rep.mean_rmse) std::cout << ", mean normalized RMSE " << *rep.mean_rmse;
      std::cout << '\n';
    } else if (*evaluate) {
      command = "evaluate";
      RunConfig c = eval_o.resolve();
      if (eval_gen) c.generated = *eval_gen;
      if (eval_ref) c.reference = *eval_ref;
      if (eval_ds) c.metrics.delta_struc = *eval_ds;
      if (eval_dc) c.metrics.delta_comp = *eval_dc;
      if (eval_pct) c.metrics.percentile = *eval_pct;
      c.validate();
      const auto gen = load_dataset(require(c.generated, "generated"));
      const auto ref = load_dataset(require(c.reference, "reference"));
      const auto rep = evaluate_datasets(gen, ref, c.metrics, eval_props, c.threads);
      emit(eval_out, report::to_text(report::evaluation_json(rep)));
      if (eval_out) write_manifest(sibling_manifest(*eval_out), command, c, {fs::path(*eval_out).filename().string()});
    } else if (*calibrate) {
      command = "calibrate-thresholds";
      RunConfig c = cal_o.resolve();
      if (cal_ref) c.reference = *cal_ref;
      if (cal_pct) c.metrics.percentile = *cal_pct;
      c.validate();
      const auto ref = load_dataset(require(c.reference, "reference"));
      const auto t = calibrate_thresholds(fingerprints(ref, c.threads), c.metrics.percentile);
      emit(cal_out, report::to_text(report::calibration_json(t)));
      if (cal_out) write_manifest(sibling_manifest(*cal_out), command, c, {fs::path(*cal_out).filename().string()});
    } else if (*niggli) {
      command = "niggli";
      auto records = load_dataset(niggli_in);
      for (auto& r : records) r.crystal = to_niggli_cell(r.crystal);
      emit(niggli_out, io::format_dataset(records));
    } else if (*graph) {
      command = "graph";
      const auto records = load_dataset(graph_in);
      std::ostringstream csv;
      write_edge_csv(knn_graph(pick(records, graph_id, graph_in).crystal, graph_k), csv);
      emit(graph_out, csv.str());
    } else if (*match) {
      command = "match";
      const auto a = load_dataset(match_a);
      const auto b = load_dataset(match_b);
      const auto& ra = pick(a, match_a_id, match_a);
      const auto& rb = pick(b, match_b_id, match_b);
      if (!(match_opt.stol > 0.0 && match_opt.angle_tol > 0.0 && match_opt.ltol > 0.0))
        throw Error("stol, angle_tol and ltol must be > 0");
      const auto m = structure_match(ra.crystal, rb.crystal, match_opt);
      std::cout << report::to_text(report::match_json(m, match_opt, ra.id, rb.id));
    }
  } catch (const std::exception& e) {
    std::cerr << report::error_json(command, e.what()).dump() << '\n';
    return 1;
  }
  return 0;
}
