#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"

namespace strom::app {

/// Exit statuses of the command-line tool.
enum ExitCode : int { kSuccess = 0, kUsage = 1, kVerificationFailed = 2, kRuntimeFailure = 3 };

struct Timing {
  double wall = 0.0;  // seconds, steady clock
  double cpu = 0.0;   // seconds of process CPU time
};

// ---------------------------------------------------------------- offline

struct TrainResult {
  SvdState svd;
  BasisSet basis;
  std::vector<Timing> fom;                // per sample
  std::vector<std::size_t> rank_history;  // rank after every ingested column
  std::vector<std::size_t> sample_end;    // columns ingested after each sample
  double fom_phase_wall = 0.0;
  double ingest_wall = 0.0;
  double total_wall = 0.0;
  std::size_t workers = 1;
};

/// FOM sweep over the samples (up to cfg.workers concurrent runs), ordered
/// ingestion into the incremental SVD, and the basis split. Deterministic
/// regardless of the worker count.
TrainResult train(const RunConfig& cfg);

/// basis_spatial.mat, basis_temporal_<i>.mat, svd_sigma.mat, svd_right.mat
/// and train_report.txt.
void write_training_artifacts(const RunConfig& cfg, const TrainResult& result, const std::filesystem::path& dir);

/// Reads the bases written by train, truncated to cfg.n_s and cfg.n_t.
BasisSet load_basis(const RunConfig& cfg, const std::filesystem::path& dir);

// ----------------------------------------------------------------- online

struct StepSeries {
  Vector fom_norm;
  Vector rel_error_srom;
  Vector rel_error_strom;
  Vector bound1;
  Vector bound2;
  Vector bound3;
};

struct OnlineResult {
  ParamPoint param;
  std::size_t state_dim = 0;
  std::size_t steps = 0;
  std::size_t n_s = 0;
  std::size_t n_t = 0;

  Timing fom;               // full-order march
  Timing srom_operators;    // Phi^T A Phi and friends, shared by both ROMs
  Timing srom_march;        // reduced march
  Timing strom_assembly;    // space-time blocks beyond the spatial operators
  Timing strom_solve;       // dense reduced solve
  Timing strom_online;      // assembly plus solve, timed together
  Timing strom_reconstruct; // all N_t full states

  double max_rel_error_srom = 0.0;
  double max_rel_error_strom = 0.0;
  StepSeries series;
  std::string bound1_status = "off";
  std::string bound2_status = "off";
  std::string bound3_status = "off";
  double bound3_inverse_norm = 0.0;

  double speedup_wall() const { return fom.wall / strom_online.wall; }
  double speedup_cpu() const { return fom.cpu / strom_online.cpu; }
};

/// Builds and solves both ROMs at `param`, measures them against the FOM and
/// evaluates the error bounds selected by cfg.bounds.
OnlineResult evaluate_online(const RunConfig& cfg, const BasisSet& basis, const ParamPoint& param);

void write_run_report(const RunConfig& cfg, const OnlineResult& result, const std::filesystem::path& dir);

// ------------------------------------------------------------ verification

struct SuiteResult {
  std::string name;
  bool pass = false;
  double measured = 0.0;   // worst residual or failure count
  double tolerance = 0.0;
  std::string detail;
};

/// Oracle suites at verification scale, seeded from cfg.seed. cfg.perturb is
/// added to one reduced space-time matrix entry before comparison.
std::vector<SuiteResult> run_verification(const RunConfig& cfg);

// -------------------------------------------------------------- benchmark

struct BenchResult {
  TrainResult train;
  OnlineResult online;
  double total_seconds = 0.0;
  double speedup_gate = 100.0;
  double error_gate = 0.05;
  bool pass() const {
    return online.speedup_wall() >= speedup_gate && online.max_rel_error_strom <= error_gate;
  }
};

/// Offline training plus one online evaluation at the first test parameter.
BenchResult run_bench(const RunConfig& cfg);

// --------------------------------------------------------------- commands

int cmd_train(const RunConfig& cfg, std::ostream& log);
int cmd_run(const RunConfig& cfg, const std::vector<Vector>& params, std::ostream& log);
int cmd_verify(const RunConfig& cfg, std::ostream& log);
int cmd_bench(const RunConfig& cfg, std::ostream& log);

}  // namespace strom::app
