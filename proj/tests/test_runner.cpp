#include <gtest/gtest.h>

#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "colltime/runner/config.hpp"
#include "colltime/runner/experiments.hpp"
#include "colltime/runner/manifest.hpp"
#include "colltime/runner/report.hpp"
#include "colltime/runner/verify.hpp"

using namespace colltime::runner;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("colltime-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& s) const { return path_ / s; }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::map<std::string, std::string> hashes_by_role(const RunManifest& m, bool with_logs) {
  std::map<std::string, std::string> out;
  for (const auto& f : m.files)
    if (with_logs || f.role != "log") out[f.path] = f.sha256;
  return out;
}

ExperimentConfig random_config(std::mt19937_64& g) {
  std::uniform_real_distribution<double> u(-3.0, 0.999);
  std::uniform_int_distribution<int> small(0, 5);
  ExperimentConfig c;
  const auto kinds = all_kinds();
  if (g() % 5) c.kind = kinds[g() % kinds.size()];
  for (int i = small(g); i > 0; --i) c.N.push_back(2 + static_cast<std::int64_t>(g() % 10000000));
  c.h = 2 + small(g);
  const int pairs = c.h * (c.h - 1) / 2;
  if (g() % 2)
    for (int i = 0; i < pairs; ++i) c.pair_betas.push_back(u(g));
  for (int i = small(g); i > 0; --i) c.walk_betas.push_back(u(g) / 3);
  for (int i = small(g); i > 0; --i) c.beta_grid.push_back(u(g));
  c.replicates = 1 + static_cast<std::int64_t>(g() % 1000000);
  c.seed = g();
  switch (g() % 3) {
    case 0: c.radius = RadiusPolicy{RadiusPolicy::Mode::sqrt_scaled, 0.5 + u(g) + 4}; break;
    case 1: c.radius = RadiusPolicy{RadiusPolicy::Mode::fixed, double(1 + g() % 500)}; break;
    default: c.radius = RadiusPolicy{RadiusPolicy::Mode::tail, 0.0}; break;
  }
  c.r_max = small(g);
  c.write_samples = g() % 2;
  if (g() % 2) c.tolerance["mean_rel"] = std::ldexp(double(g() % 1000 + 1), -int(g() % 40));
  if (g() % 2) c.tolerance["z_max"] = 3.0 + u(g);
  if (g() % 3 == 0) c.output_dir = "runs/out-" + std::to_string(g() % 100);
  return c;
}

ExperimentConfig mk(const std::string& text) { return parse_config_string(text); }

}  // namespace

TEST(Config, RoundTripProperty) {
  std::mt19937_64 g(20261014);
  for (int i = 0; i < 500; ++i) {
    const auto c = random_config(g);
    const auto text = serialize_config(c);
    const auto back = parse_config_string(text);
    ASSERT_EQ(back, c) << text;
    ASSERT_EQ(serialize_config(back), text);
  }
}

TEST(Config, ParsesSectionsAndExpandsAll) {
  const auto c = mk(
      "[experiment]\nkind = laplace\nN = 1000, 10000\nh = 3\nreplicates = 200\nseed = 7\n"
      "[betas]\nall = 0.3\n[tolerance]\nmean_rel = 0.05\n");
  EXPECT_EQ(c.kind, ExperimentKind::laplace);
  EXPECT_EQ(c.N, (std::vector<std::int64_t>{1000, 10000}));
  EXPECT_EQ(c.pair_betas, (std::vector<double>{0.3, 0.3, 0.3}));
  EXPECT_EQ(c.tol("mean_rel", 1.0), 0.05);
  EXPECT_EQ(c.tol("absent", 1.5), 1.5);
  // `all` before `h` in the file still expands to the final h
  const auto d = mk("[betas]\nall = 0.2\n[experiment]\nkind = laplace\nN = 10\nh = 4\n");
  EXPECT_EQ(d.pair_betas.size(), 6u);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  try {
    mk("[experiment]\nkind = laplace\nnn = 3\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.invariant(), "unknown_key");
  }
  EXPECT_THROW(mk("[nope]\nx = 1\n"), ConfigError);
  EXPECT_THROW(mk("[experiment]\nkind = quantum\n"), ConfigError);
  EXPECT_THROW(mk("[experiment]\nN = ten\n"), ConfigError);
}

TEST(Config, Validation) {
  auto expect_invariant = [](const std::string& text, const std::string& invariant) {
    try {
      validate(mk(text));
      ADD_FAILURE() << "accepted: " << text;
    } catch (const ConfigError& e) {
      EXPECT_EQ(e.invariant(), invariant) << e.what();
    }
  };
  expect_invariant("", "kind");
  expect_invariant("[experiment]\nkind = laplace\n", "N");
  expect_invariant("[experiment]\nkind = laplace\nN = 100\nreplicates = 10\n[betas]\nall = 1.0\n", "beta");
  expect_invariant("[experiment]\nkind = erdos-taylor\nN = 100\nreplicates = 10\n", "replicates");
  expect_invariant("[experiment]\nkind = rewired\nN = 16\nh = 3\n[betas]\nall = 0.3\n", "r_max");
  EXPECT_NO_THROW(validate(mk("[experiment]\nkind = oracle-chain\nN = 4\nh = 3\n[betas]\nall = 0.3\n")));
}

TEST(Run, EmptyConfigWritesNothing) {
  TempDir tmp;
  EXPECT_THROW(run(ExperimentConfig{}, {}, tmp.path()), ConfigError);
  EXPECT_FALSE(fs::exists(tmp.path()));
}

TEST(Run, OracleChainProducesVerifiedManifest) {
  TempDir tmp;
  const auto c = mk("[experiment]\nkind = oracle-chain\nN = 4\nh = 3\n[betas]\npairs = 0.3, -0.2, 0.5\n");
  const auto res = run(c, {}, tmp.path());
  ASSERT_TRUE(res.passed());
  for (const auto& a : res.output.assertions) {
    EXPECT_TRUE(a.passed) << a.name;
    if (!std::isnan(a.threshold)) EXPECT_LE(a.value, 1e-12) << a.name;
  }
  for (const char* f : {"oracle_chain.csv", "summary.csv", "assertions.json", "run.log", "manifest.json"})
    EXPECT_TRUE(fs::exists(tmp / f)) << f;
  EXPECT_FALSE(fs::exists(tmp / "failures.json"));
  const auto m = read_manifest(tmp / "manifest.json");
  EXPECT_EQ(m.kind, "oracle-chain");
  EXPECT_EQ(m.h, 3);
  EXPECT_EQ(parse_config_string(m.config), c);
  EXPECT_NO_THROW(verify_files(m, tmp.path()));
  EXPECT_EQ(RunManifest::from_json(m.to_json()).files, m.files);
}

TEST(Run, TamperedFileIsAnIntegrityError) {
  TempDir tmp;
  run(mk("[experiment]\nkind = renewal\nN = 32\n[betas]\ngrid = 0.5\n"), {}, tmp.path());
  const auto m = read_manifest(tmp / "manifest.json");
  {
    std::ofstream f(tmp / "renewal.csv", std::ios::app);
    f << "0,0,0\n";
  }
  EXPECT_THROW(verify_files(m, tmp.path()), IntegrityError);
  EXPECT_THROW(report({tmp.path()}, tmp / "report"), IntegrityError);
  fs::remove(tmp / "renewal.csv");
  EXPECT_THROW(verify_files(m, tmp.path()), IntegrityError);
}

TEST(Run, DataFilesIndependentOfWorkers) {
  const auto c = mk(
      "[experiment]\nkind = laplace\nN = 200, 400\nh = 3\nreplicates = 300\nseed = 4\nwrite_samples = true\n"
      "[betas]\nall = 0.3\n");
  TempDir a, b;
  const auto ra = run(c, {1, false}, a.path());
  const auto rb = run(c, {3, false}, b.path());
  EXPECT_EQ(hashes_by_role(ra.manifest, false), hashes_by_role(rb.manifest, false));
  EXPECT_EQ(slurp(a / "laplace.csv"), slurp(b / "laplace.csv"));
  EXPECT_EQ(slurp(a / "samples_N400.ndjson"), slurp(b / "samples_N400.ndjson"));
}

TEST(Run, FailedAssertionWritesFailureReport) {
  TempDir tmp;
  // a zero tolerance cannot be met by the asymptotic residual
  const auto r = run(mk("[experiment]\nkind = rn-asymptotics\nN = 1000, 10000\n[tolerance]\nresidual = 0\n"), {},
                     tmp.path());
  EXPECT_FALSE(r.passed());
  ASSERT_TRUE(fs::exists(tmp / "failures.json"));
  EXPECT_EQ(read_manifest(tmp / "manifest.json").status, "fail");
}

TEST(OutputDir, Priority) {
  ExperimentConfig c;
  c.kind = ExperimentKind::renewal;
  c.seed = 12;
  ::unsetenv("COLLTIME_OUT_DIR");
  EXPECT_EQ(resolve_output_dir(c, std::nullopt), fs::path("runs/renewal-seed12"));
  c.output_dir = "from-config";
  EXPECT_EQ(resolve_output_dir(c, std::nullopt), fs::path("from-config"));
  ::setenv("COLLTIME_OUT_DIR", "from-env", 1);
  EXPECT_EQ(resolve_output_dir(c, std::nullopt), fs::path("from-env"));
  EXPECT_EQ(resolve_output_dir(c, std::string("from-flag")), fs::path("from-flag"));
  ::unsetenv("COLLTIME_OUT_DIR");
}

TEST(SummaryCsv, RoundTripWithEmptyCells) {
  const std::vector<SummaryRow> rows{{"A", 1000, "ks_exp1", 0.0123, 0.0, 0.0123, NAN},
                                     {"1.1", 10, "joint", 1.0 / 3, 2.5, 1.0 / 3 - 2.5, 1e-17}};
  const auto text = summary_csv(rows);
  EXPECT_EQ(text.substr(0, text.find('\n')), "theorem,N,quantity,statistic,target,gap,SE");
  const auto back = parse_summary_csv(text);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_TRUE(std::isnan(back[0].se));
  EXPECT_EQ(back[1], rows[1]);
}

TEST(Report, TwoTheoremARunsGiveTwoRows) {
  TempDir tmp;
  const std::string base = "[experiment]\nkind = erdos-taylor\nreplicates = 1000\nseed = 3\nN = ";
  run(mk(base + "100\n"), {}, tmp / "a");
  run(mk(base + "400\n"), {}, tmp / "b");
  const auto r = report({tmp / "b", tmp / "a" / "manifest.json"}, tmp / "rep");
  EXPECT_EQ(r.runs, 2u);
  const auto text = slurp(tmp / "rep" / "theorem_A.csv");
  std::istringstream in(text);
  std::string header, l1, l2, extra;
  std::getline(in, header);
  std::getline(in, l1);
  std::getline(in, l2);
  EXPECT_FALSE(std::getline(in, extra));
  EXPECT_EQ(header, "N,statistic,target,gap,SE");
  EXPECT_EQ(l1.substr(0, 4), "100,");
  EXPECT_EQ(l2.substr(0, 4), "400,");
  EXPECT_TRUE(fs::exists(tmp / "rep" / "summary_long.csv"));
  EXPECT_THROW(report({tmp / "a", tmp / "a"}, tmp / "rep2"), ReportError);
}

TEST(Report, BaselineFillsFactorizationGap) {
  TempDir tmp;
  run(mk("[experiment]\nkind = laplace\nN = 300\nh = 3\nreplicates = 500\n[betas]\nall = 0.3\n"), {}, tmp / "mc");
  run(mk("[experiment]\nkind = pair-baseline\nN = 300\nh = 3\n[betas]\nall = 0.3\n"), {}, tmp / "base");
  report({tmp / "mc", tmp / "base"}, tmp / "rep");
  const auto text = slurp(tmp / "rep" / "theorem_1_1.csv");
  std::istringstream in(text);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header, "N,statistic,target,gap,SE,factorization_gap");
  ASSERT_EQ(row.substr(0, 4), "300,");
  EXPECT_NE(row.back(), ',');  // last cell filled
  const double gap = std::stod(row.substr(row.rfind(',') + 1));
  EXPECT_TRUE(std::isfinite(gap));
}

TEST(Report, MismatchedCouplingsAreRejected) {
  TempDir tmp;
  run(mk("[experiment]\nkind = laplace\nN = 100\nh = 3\nreplicates = 50\n[betas]\nall = 0.3\n"), {}, tmp / "x");
  run(mk("[experiment]\nkind = laplace\nN = 200\nh = 3\nreplicates = 50\n[betas]\nall = 0.4\n"), {}, tmp / "y");
  EXPECT_THROW(report({tmp / "x", tmp / "y"}, tmp / "rep"), ReportError);
}

TEST(Verify, InvariantSuitePasses) {
  for (const auto& r : run_invariant_suite(2)) EXPECT_TRUE(r.passed) << r.name << ": " << r.detail;
}
