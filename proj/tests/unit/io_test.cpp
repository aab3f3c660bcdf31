#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "test_support.hpp"
#include "xtalgen/io/config.hpp"
#include "xtalgen/io/dataset.hpp"
#include "xtalgen/io/report.hpp"
#include "xtalgen/workflows.hpp"

using namespace xtalgen;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("xtalgen_io_" + std::to_string(::getpid())) / name;
  fs::create_directories(p.parent_path());
  return p;
}

const char* kNaCl =
    R"({"id": "NaCl", "lattice_params": [5.64, 5.64, 5.64, 90, 90, 90], "species": ["Na", "Cl"],)"
    R"( "frac_coords": [[0, 0, 0], [0.5, 0.5, 0.5]]})";

std::vector<CrystalRecord> random_records(Philox& rng, std::size_t n) {
  const std::vector<int> pool{1, 3, 8, 11, 14, 17, 22, 26, 29, 56};
  std::vector<CrystalRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    const int atoms = 1 + static_cast<int>(rng.below(8));
    CrystalRecord r{"r" + std::to_string(i), testkit::random_crystal(rng, testkit::random_lattice(rng), atoms, pool), {}};
    if (rng.uniform() < 0.5) r.properties["energy"] = testkit::uniform(rng, -10, 10);
    if (rng.uniform() < 0.3) r.properties["gap"] = rng.uniform() * 1e-7;
    out.push_back(std::move(r));
  }
  return out;
}

std::string expect_error(const std::string& text) {
  try {
    io::parse_dataset(text, "d.jsonl", nullptr);
  } catch (const Error& e) {
    return e.what();
  }
  ADD_FAILURE() << "no error for: " << text;
  return {};
}

}  // namespace

// ----- datasets ------------------------------------------------------------

TEST(Dataset, SingleRecord) {
  const auto recs = io::parse_dataset(kNaCl, "d.jsonl", nullptr);
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].id, "NaCl");
  EXPECT_EQ(recs[0].crystal.size(), 2u);
  EXPECT_EQ(recs[0].crystal.types(), (std::vector<int>{11, 17}));
  EXPECT_NEAR(recs[0].crystal.lattice().volume(), 5.64 * 5.64 * 5.64, 1e-9);
}

TEST(Dataset, CoordinateOneWrapsWithWarning) {
  std::vector<std::string> warnings;
  const auto recs = io::parse_dataset(
      R"({"id": "a", "lattice": [[3,0,0],[0,3,0],[0,0,3]], "species": ["Cu"], "frac_coords": [[1.0, 0.25, 0]]})",
      "d.jsonl", [&](const std::string& w) { warnings.push_back(w); });
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("line 1"), std::string::npos);
  EXPECT_EQ(recs[0].crystal.frac_coords()[0], Vec3(0.0, 0.25, 0.0));
}

TEST(Dataset, BlankLinesSkippedAndLineNumbersKept) {
  const std::string text = std::string(kNaCl) + "\n\n" + R"({"id": "x", "species": ["Na"]})" + "\n";
  const std::string msg = expect_error(text);
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("lattice"), std::string::npos) << msg;
}

TEST(Dataset, Errors) {
  EXPECT_NE(expect_error("{not json").find("line 1: malformed JSON"), std::string::npos);
  EXPECT_NE(expect_error(R"({"id": "a", "lattice_params": [3,3,3,90,90,90], "species": ["Xx"], "frac_coords": [[0,0,0]]})")
                .find("unknown element symbol 'Xx'"),
            std::string::npos);
  EXPECT_NE(expect_error(R"({"id": "a", "lattice_params": [3,3,3,90,90,90], "species": ["Na"], "frac_coords": [[0,0]]})")
                .find("field 'frac_coords'"),
            std::string::npos);
  EXPECT_NE(expect_error(R"({"id": "a", "lattice_params": [3,3,3,90,90,90], "species": ["Na","Cl"], "frac_coords": [[0,0,0]]})")
                .find("field 'frac_coords'"),
            std::string::npos);
  EXPECT_NE(expect_error(R"({"id": "a", "lattice": [[3,0,0],[0,3,0],[0,0,-3]], "species": ["Na"], "frac_coords": [[0,0,0]]})")
                .find("field 'lattice'"),
            std::string::npos);
  EXPECT_NE(expect_error(R"({"id": "a", "lattice_params": [3,3,3,10,10,150], "species": ["Na"], "frac_coords": [[0,0,0]]})")
                .find("field 'lattice_params'"),
            std::string::npos);
  EXPECT_NE(expect_error(R"({"lattice_params": [3,3,3,90,90,90], "species": ["Na"], "frac_coords": [[0,0,0]]})")
                .find("field 'id'"),
            std::string::npos);
  EXPECT_NE(expect_error(R"({"id": "a", "lattice_params": [3,3,3,90,90,90], "species": ["Na"], "frac_coords": [[0,0,0]], "colour": 1})")
                .find("field 'colour'"),
            std::string::npos);
  EXPECT_NE(expect_error(R"({"id": "a", "lattice_params": [3,3,3,90,90,90], "species": ["Na"], "frac_coords": [[0,0,0]], "properties": {"e": "x"}})")
                .find("field 'properties'"),
            std::string::npos);
  const std::string dup = std::string(kNaCl) + "\n" + kNaCl + "\n";
  const std::string msg = expect_error(dup);
  EXPECT_NE(msg.find("line 2"), std::string::npos);
  EXPECT_NE(msg.find("duplicate id"), std::string::npos);
}

TEST(Dataset, MissingFile) { EXPECT_THROW(load_dataset("/nonexistent/x.jsonl"), Error); }

TEST(Dataset, EmptyAndSingleSave) {
  const fs::path p = scratch("empty.jsonl");
  save_dataset({}, p);
  EXPECT_EQ(io::read_file(p), "");
  EXPECT_TRUE(load_dataset(p).empty());
  save_dataset(io::parse_dataset(kNaCl, "d", nullptr), p);
  const std::string text = io::read_file(p);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1);
  EXPECT_EQ(text.back(), '\n');
}

TEST(Dataset, CanonicalLayout) {
  auto recs = io::parse_dataset(kNaCl, "d", nullptr);
  recs[0].properties["energy"] = -1.0 / 3.0;
  EXPECT_EQ(io::format_dataset(recs),
            R"({"frac_coords":[[0.0,0.0,0.0],[0.5,0.5,0.5]],"id":"NaCl",)"
            R"("lattice":[[5.64,0.0,0.0],[0.0,5.64,0.0],[0.0,0.0,5.64]],)"
            R"("properties":{"energy":-0.333333333333},"species":["Na","Cl"]})"
            "\n");
}

// 12 significant digits: parsing then reprinting the rounded value is stable,
// and the relative change from rounding is below 5e-12.
TEST(Dataset, RoundSig12) {
  Philox rng(3);
  for (int t = 0; t < 10000; ++t) {
    const double x = (rng.uniform() - 0.5) * std::pow(10.0, testkit::uniform(rng, -20, 20));
    const double r = io::round_sig12(x);
    EXPECT_EQ(io::round_sig12(r), r);
    EXPECT_LE(std::abs(r - x), 5e-12 * std::abs(x));
  }
  EXPECT_EQ(std::signbit(io::round_sig12(-0.0)), false);
}

// save -> load -> save is byte-identical, and load(save(.)) is the identity
// once values are on the 12-digit grid.
TEST(Dataset, RoundTripThousandRecords) {
  Philox rng(11);
  const auto recs = random_records(rng, 1000);
  const fs::path p = scratch("rt.jsonl");
  save_dataset(recs, p);
  const std::string first = io::read_file(p);
  const auto loaded = load_dataset(p, nullptr);
  ASSERT_EQ(loaded.size(), recs.size());
  save_dataset(loaded, p);
  EXPECT_EQ(io::read_file(p), first);
  EXPECT_EQ(load_dataset(p, nullptr), loaded);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    EXPECT_EQ(loaded[i].id, recs[i].id);
    EXPECT_EQ(loaded[i].crystal.types(), recs[i].crystal.types());
    EXPECT_TRUE(loaded[i].crystal.lattice().matrix().isApprox(recs[i].crystal.lattice().matrix(), 1e-11));
  }
}

TEST(Dataset, NearOneCoordinateSavesAsZero) {
  CrystalRecord r{"a", Crystal({29}, {Vec3(1.0 - 1e-14, 0.5, 0.0)}, Lattice::cubic(3.0)), {}};
  std::vector<std::string> warnings;
  const auto back = io::parse_dataset(io::format_dataset({r}), "d", [&](const std::string& w) { warnings.push_back(w); });
  EXPECT_TRUE(warnings.empty());
  EXPECT_EQ(back[0].crystal.frac_coords()[0], Vec3(0.0, 0.5, 0.0));
}

TEST(Dataset, AtomicWriteLeavesNoTemporary) {
  const fs::path dir = scratch("atomic");
  fs::create_directories(dir);
  io::write_file_atomic(dir / "a.txt", "hello");
  io::write_file_atomic(dir / "a.txt", "world");
  EXPECT_EQ(io::read_file(dir / "a.txt"), "world");
  EXPECT_EQ(std::distance(fs::directory_iterator(dir), fs::directory_iterator{}), 1);
  EXPECT_THROW(io::write_file_atomic("/proc/xtalgen/forbidden.txt", "x"), Error);
}

TEST(Dataset, Fnv1aKnownValues) {
  EXPECT_EQ(io::fnv1a(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(io::fnv1a("a"), 0xaf63dc4c8601ec8cull);
  EXPECT_EQ(io::hex64(0xaf63dc4c8601ec8cull), "af63dc4c8601ec8c");
}

// ----- config --------------------------------------------------------------

TEST(RunConfig, DefaultsMatchSamplerDefaults) {
  const RunConfig c = run_config_from_toml("");
  EXPECT_EQ(c.step_size, 1e-4);
  EXPECT_EQ(c.steps_per_level, 100);
  EXPECT_EQ(c.schedule.size(), 50u);
  EXPECT_EQ(c.schedule.sigma_x(0), 10.0);
  EXPECT_EQ(c.schedule.sigma_x(49), 0.01);
  EXPECT_EQ(c.schedule.sigma_a(0), 5.0);
  EXPECT_NO_THROW(c.validate());
}

TEST(RunConfig, ParsesEverySection) {
  const fs::path dir = scratch("cfg");
  fs::create_directories(dir);
  std::ofstream(dir / "ref.jsonl") << kNaCl << '\n';
  const std::string text = R"(
seed = 42
threads = 3
output_dir = "runs"
[schedule.coords]
sigma_max = 2.0
sigma_min = 0.1
levels = 5
[schedule.types]
sigma_max = 1.0
sigma_min = 0.1
levels = 5
[sampler]
step_size = 2e-4
steps_per_level = 7
[field]
kind = "zero"
[data]
reference = "ref.jsonl"
[perturb]
sigma_x = 0.25
sigma_a = 0.5
[reconstruct]
sigma = 0.3
limit = 4
[sample]
count = 3
species = ["Na", "Cl"]
lattice_params = [5.64, 5.64, 5.64, 90, 90, 90]
[metrics]
delta_struc = 0.2
delta_comp = 4
percentile = 10
stol = 0.4
angle_tol = 5
ltol = 0.2
)";
  const RunConfig c = run_config_from_toml(text, dir);
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.threads, 3u);
  EXPECT_EQ(c.output_dir, dir / "runs");
  EXPECT_EQ(c.schedule.size(), 5u);
  EXPECT_EQ(c.schedule.sigma_a(0), 1.0);
  EXPECT_EQ(c.step_size, 2e-4);
  EXPECT_EQ(c.steps_per_level, 7);
  EXPECT_EQ(c.field.kind, "zero");
  EXPECT_EQ(*c.reference, dir / "ref.jsonl");
  EXPECT_EQ(c.perturb_sigma_x, 0.25);
  EXPECT_EQ(c.reconstruct_limit, 4u);
  EXPECT_EQ(c.sample.species.size(), 2u);
  EXPECT_EQ(c.sample.lattice_params->alpha, 90.0);
  EXPECT_EQ(*c.metrics.delta_comp, 4.0);
  EXPECT_EQ(c.metrics.match.ltol, 0.2);
  EXPECT_NO_THROW(c.validate());
  const SamplerConfig s = c.sampler();
  EXPECT_EQ(s.seed, 42u);
  EXPECT_EQ(s.steps_per_level, 7);
}

TEST(RunConfig, Rejections) {
  EXPECT_THROW(run_config_from_toml("bogus = 1"), Error);
  EXPECT_THROW(run_config_from_toml("[sampler]\nstepsize = 1"), Error);
  EXPECT_THROW(run_config_from_toml("[sampler]\nsteps_per_level = 0"), Error);
  EXPECT_THROW(run_config_from_toml("seed = -1"), Error);
  EXPECT_THROW(run_config_from_toml("[metrics]\nstol = \"x\""), Error);
  EXPECT_THROW(run_config_from_toml("[metrics]\ndelta_struc = -1").validate(false), Error);
  EXPECT_THROW(run_config_from_toml("[metrics]\nstol = 0").validate(false), Error);
  EXPECT_THROW(run_config_from_toml("[field]\nkind = \"neural\"").validate(false), Error);
  EXPECT_THROW(run_config_from_toml("[sample]\nspecies = [\"Na\"]").validate(false), Error);
  EXPECT_THROW(run_config_from_toml("[sample]\nspecies = [\"Qq\"]\nlattice_params = [3,3,3,90,90,90]").validate(false),
               Error);
  EXPECT_THROW(run_config_from_toml("[data]\nreference = \"/nonexistent/file.jsonl\"").validate(true), Error);
  EXPECT_NO_THROW(run_config_from_toml("[data]\nreference = \"/nonexistent/file.jsonl\"").validate(false));
}

TEST(RunConfig, HashTracksResultAffectingFields) {
  const RunConfig a = run_config_from_toml("seed = 1");
  EXPECT_EQ(a.hash(), run_config_from_toml("seed = 1\noutput_dir = \"elsewhere\"\nthreads = 8").hash());
  EXPECT_NE(a.hash(), run_config_from_toml("seed = 2").hash());
  EXPECT_NE(a.hash(), run_config_from_toml("seed = 1\n[sampler]\nsteps_per_level = 99").hash());
  EXPECT_EQ(a.hash().size(), 16u);
}

// ----- workflows -----------------------------------------------------------

TEST(Workflows, PerturbZeroSigmaIsIdentity) {
  Philox rng(5);
  const auto recs = random_records(rng, 20);
  EXPECT_EQ(perturb_dataset(recs, 0.0, 0.0, 9), recs);
}

TEST(Workflows, PerturbIsSeeded) {
  Philox rng(6);
  const auto recs = random_records(rng, 10);
  EXPECT_EQ(perturb_dataset(recs, 0.3, 0.5, 9), perturb_dataset(recs, 0.3, 0.5, 9));
  EXPECT_NE(perturb_dataset(recs, 0.3, 0.5, 9), perturb_dataset(recs, 0.3, 0.5, 10));
}

TEST(Workflows, ParallelForPropagatesLowestIndexError) {
  std::vector<int> hit(50, 0);
  parallel_for(50, 4, [&](std::size_t i) { hit[i] = 1; });
  EXPECT_EQ(std::count(hit.begin(), hit.end(), 1), 50);
  try {
    parallel_for(50, 4, [](std::size_t i) {
      if (i == 7 || i == 30) throw Error("at " + std::to_string(i));
    });
    FAIL();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "at 7");
  }
}

TEST(Workflows, ReconstructionIndependentOfThreads) {
  Philox rng(12);
  const auto recs = random_records(rng, 6);
  SamplerConfig sc;
  sc.schedule = make_schedule(1.0, 0.01, 6);
  sc.steps_per_level = 5;
  sc.step_size_eps = 1e-4;
  sc.seed = 3;
  const auto a = reconstruct_dataset(recs, 0.2, sc, {}, 1);
  const auto b = reconstruct_dataset(recs, 0.2, sc, {}, 3);
  ASSERT_EQ(a.items.size(), b.items.size());
  for (std::size_t i = 0; i < a.items.size(); ++i) {
    EXPECT_EQ(a.items[i].result, b.items[i].result);
    EXPECT_EQ(a.items[i].rmse, b.items[i].rmse);
  }
  EXPECT_EQ(report::reconstruction_json(a, 0.2, {}).dump(), report::reconstruction_json(b, 0.2, {}).dump());
}

TEST(Workflows, SampleLiteralSource) {
  RunConfig c = run_config_from_toml(
      "seed = 4\n[schedule.coords]\nsigma_max = 1.0\nsigma_min = 0.1\nlevels = 3\n"
      "[schedule.types]\nsigma_max = 1.0\nsigma_min = 0.1\nlevels = 3\n[sampler]\nsteps_per_level = 4\n"
      "[sample]\ncount = 3\nspecies = [\"Na\", \"Na\", \"Cl\"]\nlattice_params = [5, 5, 5, 90, 90, 90]\n");
  c.threads = 2;
  const auto out = sample_dataset(c, {});
  ASSERT_EQ(out.size(), 3u);
  for (const auto& s : out) {
    EXPECT_EQ(s.record.crystal.size(), 3u);
    EXPECT_EQ(s.levels.size(), 3u);
    EXPECT_TRUE(s.source_id.empty());
  }
  EXPECT_EQ(out[0].record.id, "gen-000000");
  c.threads = 1;
  const auto again = sample_dataset(c, {});
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i].record, again[i].record);
}

TEST(Workflows, SampleFromReferenceAggregates) {
  Philox rng(8);
  const auto ref = random_records(rng, 5);
  RunConfig c = run_config_from_toml("[sampler]\nsteps_per_level = 2\n[sample]\ncount = 6\n");
  c.schedule = make_schedule(1.0, 0.1, 2);
  const auto out = sample_dataset(c, ref);
  for (const auto& s : out) {
    const auto it = std::find_if(ref.begin(), ref.end(), [&](const auto& r) { return r.id == s.source_id; });
    ASSERT_NE(it, ref.end());
    EXPECT_EQ(it->crystal.size(), s.record.crystal.size());
    EXPECT_EQ(it->crystal.lattice().matrix(), s.record.crystal.lattice().matrix());
  }
  EXPECT_THROW(sample_dataset(c, {}), Error);
}

TEST(Workflows, SelfEvaluation) {
  Philox rng(9);
  auto recs = random_records(rng, 12);
  MetricConfig m;
  const auto rep = evaluate_datasets(recs, recs, m);
  EXPECT_EQ(rep.coverage.cov_r, 100.0);
  EXPECT_EQ(rep.coverage.cov_p, 100.0);
  EXPECT_EQ(rep.coverage.amsd_r, 0.0);
  EXPECT_EQ(rep.coverage.amcd_p, 0.0);
  EXPECT_EQ(rep.properties.emd_density, 0.0);
  EXPECT_EQ(rep.generated.overall, rep.reference.overall);
  EXPECT_TRUE(rep.thresholds_calibrated);
  EXPECT_GT(rep.thresholds.delta_struc, 0.0);
  EXPECT_GT(rep.thresholds.delta_comp, 0.0);
}

TEST(Workflows, CustomPropertyColumns) {
  std::vector<CrystalRecord> a, b;
  for (int i = 0; i < 4; ++i) {
    a.push_back({"a" + std::to_string(i), Crystal({29}, {Vec3::Zero()}, Lattice::cubic(2.5 + i)), {{"e", double(i)}}});
    b.push_back({"b" + std::to_string(i), Crystal({29}, {Vec3::Zero()}, Lattice::cubic(2.5 + i)), {{"e", double(i + 2)}}});
  }
  MetricConfig m;
  m.delta_struc = 1.0;
  m.delta_comp = 1.0;
  const auto rep = evaluate_datasets(a, b, m, {"e"});
  EXPECT_EQ(rep.properties.emd_custom.at("e"), 2.0);
  EXPECT_FALSE(rep.thresholds_calibrated);
  b[2].properties.clear();
  EXPECT_THROW(evaluate_datasets(a, b, m, {"e"}), Error);
}

TEST(Workflows, CalibrationSkipsDuplicates) {
  std::vector<FingerprintPair> fps;
  std::vector<CrystalRecord> recs;
  for (double a : {3.0, 3.0, 3.5, 4.0})
    recs.push_back({std::to_string(recs.size()), Crystal({29}, {Vec3::Zero()}, Lattice::cubic(a)), {}});
  recs.push_back({"x", Crystal({11, 17}, {Vec3::Zero(), Vec3::Constant(0.5)}, Lattice::cubic(3.0)), {}});
  const auto t = calibrate_thresholds(fingerprints(recs), 0.0);
  EXPECT_GT(t.delta_struc, 0.0);
  EXPECT_GT(t.delta_comp, 0.0);
  std::vector<CrystalRecord> same(3, recs[0]);
  EXPECT_THROW(calibrate_thresholds(fingerprints(same), 5.0), Error);
}

TEST(Report, HeaderAndKinds) {
  const auto j = report::calibration_json({0.1, 0.2, 5.0, 10});
  EXPECT_EQ(j["schema"], "xtalgen.report");
  EXPECT_EQ(j["schema_version"], report::kSchemaVersion);
  EXPECT_EQ(j["kind"], "calibrate-thresholds");
  EXPECT_EQ(j["thresholds"]["source"], "calibrated");
  const auto e = report::error_json("sample", "boom");
  EXPECT_EQ(e["kind"], "error");
  EXPECT_EQ(e["error"], "boom");
}

TEST(Report, ManifestIsDeterministic) {
  const RunConfig c = run_config_from_toml("seed = 5");
  const auto a = report::manifest_json("sample", c, {"generated.jsonl"}).dump();
  EXPECT_EQ(a, report::manifest_json("sample", c, {"generated.jsonl"}).dump());
  EXPECT_NE(a.find(c.hash()), std::string::npos);
}
