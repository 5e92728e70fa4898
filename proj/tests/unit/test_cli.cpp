#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "app/commands.hpp"
#include "test_support.hpp"

namespace strom::app {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

/// key = value lookup in a report file.
std::string report_value(const fs::path& p, const std::string& key) {
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line))
    if (line.rfind(key + " = ", 0) == 0) return line.substr(key.size() + 3);
  return {};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("strom_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  RunConfig small_heat(std::size_t nx, std::size_t steps, std::vector<Vector> samples) const {
    RunConfig c;
    c.problem.nx = nx;
    c.problem.x0_amplitude = 1.0;
    c.dt = 1e-3;
    c.steps = steps;
    c.samples = std::move(samples);
    c.test_params = {c.samples.front()};
    c.n_s = 1;
    c.n_t = 1;
    c.repeats = 1;
    c.out = dir_ / "out";
    return c;
  }

  static int run_cli(const std::string& args) {
    const std::string cmd = std::string(STROM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  fs::path dir_;
};

TEST(Config, ParsesKeysCommentsAndLists) {
  const RunConfig c = parse_config(
      "# comment line\n"
      "problem.kind = advdiff2d   # trailing comment\n"
      "problem.nx = 12\n"
      "problem.sigma_t = 1, 2.5\n"
      "time.dt = 0.01\n"
      "time.nt = 30\n"
      "params = kappa, vx\n"
      "samples = 0.1, 1; 0.2, 1.5\n"
      "test_params = 0.15, 1.2\n"
      "rom.ns = 3\n"
      "rom.nt = 2\n"
      "svd.tol = 1e-9\n"
      "svd.max_rank = 20\n"
      "svd.at_max_rank = reject\n"
      "ref_mode = zero\n"
      "\n"
      "seed = 7\n");
  EXPECT_EQ(c.problem.kind, ProblemKind::advdiff2d);
  EXPECT_EQ(c.problem.nx, 12u);
  EXPECT_EQ(c.problem.sigma_t, (Vector{1.0, 2.5}));
  EXPECT_EQ(c.dt, 0.01);
  EXPECT_EQ(c.steps, 30u);
  EXPECT_EQ(c.param_names, (std::vector<std::string>{"kappa", "vx"}));
  ASSERT_EQ(c.samples.size(), 2u);
  EXPECT_EQ(c.samples[1], (Vector{0.2, 1.5}));
  EXPECT_EQ(c.test_params.front(), (Vector{0.15, 1.2}));
  EXPECT_EQ(c.svd.tol_svd, 1e-9);
  EXPECT_EQ(c.svd.max_rank, 20u);
  EXPECT_EQ(c.svd.at_max_rank, MaxRankPolicy::reject);
  EXPECT_EQ(c.ref_mode, RefMode::zero);
  EXPECT_EQ(c.seed, 7u);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, RejectsMalformedInput) {
  EXPECT_THROW(parse_config("rom.nss = 3\n"), UsageError);
  EXPECT_THROW(parse_config("rom.ns 3\n"), UsageError);
  EXPECT_THROW(parse_config("time.dt = fast\n"), UsageError);
  EXPECT_THROW(parse_config("rom.ns = -1\n"), UsageError);
  EXPECT_THROW(parse_config("problem.kind = wave\n"), UsageError);
  EXPECT_THROW(parse_config("rom.nt = 4\n").validate(), UsageError);  // only three samples
  EXPECT_THROW(parse_config("svd.tol = 0\n").validate(), UsageError);
  EXPECT_THROW(parse_config("samples = 1, 2\n").validate(), UsageError);  // one name, two values
  EXPECT_NO_THROW(parse_config("").validate());
}

TEST(Config, ParamFlag) {
  const std::vector<std::string> names{"kappa", "vx"};
  EXPECT_EQ(parse_param("0.5, 2", names), (Vector{0.5, 2.0}));
  EXPECT_EQ(parse_param("vx=2,kappa=0.5", names), (Vector{0.5, 2.0}));
  EXPECT_THROW(parse_param("0.5", names), UsageError);
  EXPECT_THROW(parse_param("kappa=0.5", names), UsageError);
  EXPECT_THROW(parse_param("nu=1,kappa=0.5", names), UsageError);
  EXPECT_THROW(parse_param("", names), UsageError);
}

TEST_F(CliTest, TrainSingleSample) {
  const RunConfig c = small_heat(8, 4, {{1.0}});
  std::ostringstream log;
  EXPECT_EQ(cmd_train(c, log), kSuccess);
  for (const char* f : {"basis_spatial.mat", "basis_temporal_0.mat", "svd_sigma.mat", "svd_right.mat", "train_report.txt"})
    EXPECT_TRUE(fs::exists(c.out / f)) << f;
  EXPECT_LE(read_matrix(c.out / "svd_sigma.mat").rows(), 4u);
  EXPECT_EQ(read_matrix(c.out / "svd_right.mat").rows(), 4u);
  EXPECT_EQ(report_value(c.out / "train_report.txt", "columns"), "4");
}

TEST_F(CliTest, ThreeSamplesAllowThreeTemporalModes) {
  RunConfig c = small_heat(10, 6, {{0.5}, {1.0}, {1.5}});
  c.n_s = 2;
  c.n_t = 3;
  const TrainResult r = train(c);
  EXPECT_EQ(r.basis.n_t, 3u);
  for (const auto& psi : r.basis.temporal) {
    EXPECT_EQ(psi.cols(), 3u);
    EXPECT_LE(orthogonality_defect(psi), 1e-10);
  }
  c.n_t = 4;
  EXPECT_THROW(train(c), UsageError);
}

TEST_F(CliTest, RankHistoryMatchesBatch) {
  RunConfig c = small_heat(6, 4, {{0.5}, {1.0}, {2.0}});
  c.problem.source_lo = 0.1;
  c.problem.source_hi = 0.4;
  c.svd.tol_svd = 1e-300;
  c.svd.tol_sv = 0.0;
  const TrainResult r = train(c);
  DenseMatrix all;
  std::size_t col = 0;
  for (const Vector& s : c.samples) {
    const DenseMatrix u = fom_march(make_system(c.problem, c.point(s)), c.grid()).states;
    for (std::size_t j = 0; j < u.cols(); ++j) {
      all.append_col(u.col(j));
      const Vector sigma = thin_svd(all).sigma;
      const auto rank = static_cast<std::size_t>(
          std::count_if(sigma.begin(), sigma.end(), [&](double v) { return v > 1e-13 * sigma.front(); }));
      EXPECT_EQ(r.rank_history[col], rank) << "column " << col + 1 << " smallest " << sigma.back();
      ++col;
    }
  }
  EXPECT_EQ(r.sample_end, (std::vector<std::size_t>{4, 8, 12}));
}

TEST_F(CliTest, ReproductiveRunIsAccurate) {
  RunConfig c = small_heat(20, 12, {{0.5}, {1.0}, {1.5}});
  c.n_s = 8;
  c.n_t = 3;
  std::ostringstream log;
  ASSERT_EQ(cmd_train(c, log), kSuccess);
  ASSERT_EQ(cmd_run(c, {{1.0}}, log), kSuccess);
  const double err = std::stod(report_value(c.out / "report.txt", "max_rel_error_strom"));
  EXPECT_LE(err, 1e-6);
  EXPECT_LE(std::stod(report_value(c.out / "report.txt", "max_rel_error_srom")), 1e-6);
  const double speedup = std::stod(report_value(c.out / "report.txt", "speedup_wall_strom"));
  EXPECT_TRUE(std::isfinite(speedup));
  EXPECT_GT(speedup, 0.0);
  const double fom = std::stod(report_value(c.out / "report.txt", "fom_wall_seconds"));
  const double rom = std::stod(report_value(c.out / "report.txt", "strom_online_wall_seconds"));
  EXPECT_NEAR(speedup * rom, fom, 1e-6 * fom);
  const std::string csv = slurp(c.out / "series.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "step,fom_norm,rel_error_srom,rel_error_strom,bound1,bound2,bound3");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 13);
  EXPECT_EQ(report_value(c.out / "report.txt", "bound1"), "valid");
  EXPECT_EQ(report_value(c.out / "report.txt", "bound3"), "valid");
}

TEST_F(CliTest, FullBasisRunIsExact) {
  RunConfig c = small_heat(4, 3, {{0.5}, {1.0}, {1.5}});
  c.problem.source_lo = 0.1;
  c.problem.source_hi = 0.4;
  c.n_s = 4;
  c.n_t = 3;
  c.svd.tol_svd = 1e-14;
  c.svd.tol_sv = 0.0;
  const TrainResult t = train(c);
  const OnlineResult r = evaluate_online(c, t.basis, c.point({0.8}));
  EXPECT_LE(r.max_rel_error_srom, 1e-9);
  EXPECT_LE(r.max_rel_error_strom, 1e-9);
  EXPECT_NE(r.bound2_status, "violated");
  EXPECT_EQ(r.bound3_status, "valid");
}

TEST_F(CliTest, RunWithoutArtifactsFails) {
  const RunConfig c = small_heat(8, 4, {{1.0}});
  std::ostringstream log;
  EXPECT_THROW(cmd_run(c, {}, log), std::runtime_error);
  EXPECT_EQ(run_cli("run --out " + (dir_ / "nothing").string()), kRuntimeFailure);
}

TEST_F(CliTest, TrainIsDeterministicAcrossWorkerCounts) {
  RunConfig c = small_heat(30, 20, {{0.5}, {1.0}, {1.5}, {2.0}});
  c.n_s = 4;
  c.n_t = 2;
  std::ostringstream log;
  c.workers = 1;
  c.out = dir_ / "a";
  ASSERT_EQ(cmd_train(c, log), kSuccess);
  c.workers = 3;
  c.out = dir_ / "b";
  ASSERT_EQ(cmd_train(c, log), kSuccess);
  for (const char* f : {"basis_spatial.mat", "basis_temporal_0.mat", "basis_temporal_3.mat", "svd_sigma.mat", "svd_right.mat"})
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
}

TEST(Verify, DefaultsPassAndPerturbationIsCaught) {
  RunConfig c;
  std::ostringstream log;
  EXPECT_EQ(cmd_verify(c, log), kSuccess) << log.str();
  c.perturb = 1e-6;
  const auto suites = run_verification(c);
  for (const auto& s : suites) EXPECT_EQ(s.pass, s.name != "block_assembly") << s.name << ": " << s.detail;
}

TEST_F(CliTest, ExitStatuses) {
  EXPECT_EQ(run_cli("verify"), kSuccess);
  EXPECT_EQ(run_cli("verify --perturb 1e-6"), kVerificationFailed);
  EXPECT_EQ(run_cli(""), kUsage);
  EXPECT_EQ(run_cli("frobnicate"), kUsage);
  EXPECT_EQ(run_cli("train --config /no/such/file"), kUsage);
  const fs::path bad = dir_ / "bad.cfg";
  std::ofstream(bad) << "rom.ns = 0\n";
  EXPECT_EQ(run_cli("train --config " + bad.string()), kUsage);
  const fs::path good = dir_ / "good.cfg";
  std::ofstream(good) << "problem.nx = 10\ntime.nt = 6\nrom.ns = 2\nrom.nt = 2\n";
  EXPECT_EQ(run_cli("train --config " + good.string() + " --out " + (dir_ / "o").string()), kSuccess);
  EXPECT_EQ(run_cli("run --config " + good.string() + " --out " + (dir_ / "o").string() + " --param 0.9"), kSuccess);
  EXPECT_TRUE(fs::exists(dir_ / "o" / "report.txt"));
  EXPECT_EQ(run_cli("run --config " + good.string() + " --out " + (dir_ / "o").string() + " --param nu=1"), kUsage);
}

}  // namespace
}  // namespace strom::app
