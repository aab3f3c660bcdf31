// End-to-end runs of the xtalgen binary.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "xtalgen/io/dataset.hpp"
#include "xtalgen/io/files.hpp"

using namespace xtalgen;
namespace fs = std::filesystem;

namespace {

const fs::path kDemo = XTALGEN_DEMO_DIR;

struct CliRun {
  int status = -1;
  std::string out, err;
};

fs::path workdir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("xtalgen_cli_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

CliRun run(const std::string& args) {
  static int counter = 0;
  const fs::path out = workdir() / ("stdout." + std::to_string(counter));
  const fs::path err = workdir() / ("stderr." + std::to_string(counter++));
  const std::string cmd = std::string("\"") + XTALGEN_CLI + "\" " + args + " >\"" + out.string() + "\" 2>\"" +
                          err.string() + "\"";
  const int raw = std::system(cmd.c_str());
  CliRun r;
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = io::read_file(out);
  r.err = io::read_file(err);
  return r;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

// Short schedule so the suite stays quick.
const char* kFast = "--steps-per-level 10";

}  // namespace

TEST(Cli, HelpAndVersion) {
  EXPECT_EQ(run("--help").status, 0);
  const CliRun v = run("--version");
  EXPECT_EQ(v.status, 0);
  EXPECT_NE(v.out.find('.'), std::string::npos);
}

TEST(Cli, SampleIsByteIdenticalAcrossRuns) {
  const fs::path a = workdir() / "sample_a", b = workdir() / "sample_b";
  for (const auto& d : {a, b}) {
    const CliRun r = run("sample -c " + q(kDemo / "run.toml") + " " + kFast + " -n 4 -o " + q(d));
    ASSERT_EQ(r.status, 0) << r.err;
  }
  for (const char* f : {"generated.jsonl", "trajectories.csv", "manifest.json"})
    EXPECT_EQ(io::read_file(a / f), io::read_file(b / f)) << f;
  EXPECT_EQ(load_dataset(a / "generated.jsonl").size(), 4u);
}

TEST(Cli, ReconstructIsByteIdenticalAcrossRunsAndThreads) {
  const fs::path a = workdir() / "recon_a", b = workdir() / "recon_b";
  const std::string base = "reconstruct -c " + q(kDemo / "run.toml") + " " + kFast + " -o ";
  ASSERT_EQ(run(base + q(a)).status, 0);
  ASSERT_EQ(run(base + q(b) + " --threads 3").status, 0);
  for (const char* f : {"reconstructed.jsonl", "reconstruct.json", "manifest.json"})
    EXPECT_EQ(io::read_file(a / f), io::read_file(b / f)) << f;
  const auto j = nlohmann::json::parse(io::read_file(a / "reconstruct.json"));
  EXPECT_EQ(j["total"], 12);
  EXPECT_EQ(j["matched"], 12);
}

TEST(Cli, PerturbAtZeroNoiseReproducesInput) {
  const fs::path out = workdir() / "p0.jsonl";
  const CliRun r = run("perturb -i " + q(kDemo / "reference.jsonl") + " -o " + q(out) + " --sigma-x 0 --sigma-a 0");
  ASSERT_EQ(r.status, 0) << r.err;
  // The demo gives some cells as parameters; output is the canonical matrix
  // form of the same data.
  const auto in = load_dataset(kDemo / "reference.jsonl");
  EXPECT_EQ(io::read_file(out), io::format_dataset(in));
  const auto back = load_dataset(out);
  ASSERT_EQ(back.size(), in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    EXPECT_EQ(back[i].crystal.types(), in[i].crystal.types());
    EXPECT_TRUE(back[i].crystal.lattice().matrix().isApprox(in[i].crystal.lattice().matrix(), 1e-11));
    for (std::size_t k = 0; k < in[i].crystal.size(); ++k)
      EXPECT_LT((back[i].crystal.frac_coords()[k] - in[i].crystal.frac_coords()[k]).norm(), 1e-11);
  }
  EXPECT_TRUE(fs::exists(out.string() + ".manifest.json"));
}

TEST(Cli, PerturbChangesCoordinates) {
  const fs::path out = workdir() / "p1.jsonl";
  ASSERT_EQ(run("perturb -i " + q(kDemo / "reference.jsonl") + " -o " + q(out) + " --sigma-x 0.1 --seed 3").status, 0);
  const auto a = load_dataset(out), b = load_dataset(kDemo / "reference.jsonl");
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].crystal.types(), b[i].crystal.types());
    EXPECT_NE(a[i].crystal.frac_coords(), b[i].crystal.frac_coords());
  }
}

TEST(Cli, SelfEvaluation) {
  const fs::path out = workdir() / "self.json";
  const fs::path ref = kDemo / "reference.jsonl";
  const CliRun r = run("evaluate -g " + q(ref) + " -r " + q(ref) + " --property band_gap -o " + q(out));
  ASSERT_EQ(r.status, 0) << r.err;
  const auto j = nlohmann::json::parse(io::read_file(out));
  EXPECT_EQ(j["coverage"]["cov_r_pct"], 100.0);
  EXPECT_EQ(j["coverage"]["cov_p_pct"], 100.0);
  EXPECT_EQ(j["coverage"]["amsd_r"], 0.0);
  EXPECT_EQ(j["coverage"]["amcd_p"], 0.0);
  EXPECT_EQ(j["validity"]["generated"], j["validity"]["reference"]);
  EXPECT_EQ(j["property_emd"]["custom"]["band_gap"], 0.0);
}

TEST(Cli, UtilitiesRun) {
  const fs::path ref = kDemo / "reference.jsonl";
  const CliRun n = run("niggli -i " + q(ref));
  ASSERT_EQ(n.status, 0) << n.err;
  EXPECT_EQ(std::count(n.out.begin(), n.out.end(), '\n'), 12);
  const CliRun g = run("graph -i " + q(ref) + " --id Si-diamond -k 4");
  ASSERT_EQ(g.status, 0) << g.err;
  EXPECT_EQ(g.out.rfind("src,dst,k1,k2,k3,distance\n", 0), 0u);
  EXPECT_EQ(std::count(g.out.begin(), g.out.end(), '\n'), 1 + 2 * 4);
  const CliRun m = run("match -a " + q(ref) + " -b " + q(ref) + " --a-id NaCl-rocksalt --b-id KCl-rocksalt");
  ASSERT_EQ(m.status, 0) << m.err;
  EXPECT_EQ(nlohmann::json::parse(m.out)["matched"], false);
}

TEST(Cli, ErrorsAreJsonWithNonzeroExit) {
  const fs::path bad = workdir() / "bad.jsonl";
  std::ofstream(bad) << R"({"id": "a", "lattice_params": [3,3,3,90,90,90], "species": ["Qq"], "frac_coords": [[0,0,0]]})"
                     << '\n';
  const CliRun r = run("niggli -i " + q(bad));
  EXPECT_EQ(r.status, 1);
  const auto j = nlohmann::json::parse(r.err);
  EXPECT_EQ(j["kind"], "error");
  EXPECT_EQ(j["command"], "niggli");
  EXPECT_NE(j["error"].get<std::string>().find("line 1"), std::string::npos);

  const CliRun missing = run("evaluate -r " + q(kDemo / "reference.jsonl"));
  EXPECT_EQ(missing.status, 1);
  EXPECT_EQ(nlohmann::json::parse(missing.err)["command"], "evaluate");

  const CliRun parse = run("sample --count notanumber");
  EXPECT_EQ(parse.status, 2);
  EXPECT_EQ(nlohmann::json::parse(parse.err)["kind"], "error");
}

TEST(Cli, ReportsMatchSchema) {
  const fs::path ref = kDemo / "reference.jsonl";
  const fs::path d = workdir() / "schema";
  fs::create_directories(d);
  ASSERT_EQ(run("evaluate -g " + q(ref) + " -r " + q(ref) + " -o " + q(d / "eval.json")).status, 0);
  ASSERT_EQ(run("calibrate-thresholds -r " + q(ref) + " -o " + q(d / "cal.json")).status, 0);
  ASSERT_EQ(run("reconstruct -c " + q(kDemo / "run.toml") + " " + kFast + " --limit 2 -o " + q(d / "rec")).status, 0);
  const CliRun m = run("match -a " + q(ref) + " -b " + q(ref));
  std::ofstream(d / "match.json") << m.out;
  const CliRun e = run("niggli -i " + q(d / "missing.jsonl"));
  std::ofstream(d / "error.err") << e.err;

  std::string cmd = "python3 \"" XTALGEN_SOURCE_DIR "/tests/cli/check_reports.py\" \"" XTALGEN_SOURCE_DIR
                    "/docs/report_schema.json\"";
  for (const fs::path p : {d / "eval.json", d / "eval.json.manifest.json", d / "cal.json", d / "rec" / "reconstruct.json",
                           d / "rec" / "manifest.json", d / "match.json", d / "error.err"})
    cmd += " " + q(p);
  const int raw = std::system(cmd.c_str());
  const int status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  if (status == 77 || status == 127) GTEST_SKIP() << "python3 with jsonschema unavailable";
  EXPECT_EQ(status, 0);
}
