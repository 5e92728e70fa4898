#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>
#include <thread>

namespace strom::app {

namespace fs = std::filesystem;

namespace {

double wall_now() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

double cpu_now() { return static_cast<double>(std::clock()) / CLOCKS_PER_SEC; }

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Median wall and CPU time of `repeats` calls.
template <class F>
Timing time_median(std::size_t repeats, F&& fn) {
  std::vector<double> wall, cpu;
  for (std::size_t r = 0; r < repeats; ++r) {
    const double w0 = wall_now(), c0 = cpu_now();
    fn();
    cpu.push_back(cpu_now() - c0);
    wall.push_back(wall_now() - w0);
  }
  return {median(wall), median(cpu)};
}

/// Re-raises the active exception with the failing stage prepended.
[[noreturn]] void rethrow_in_stage(const std::string& stage) {
  try {
    throw;
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    throw std::runtime_error(stage + ": " + e.what());
  }
}

std::string temporal_name(std::size_t i) { return "basis_temporal_" + std::to_string(i) + ".mat"; }

Vector relative_errors(const DenseMatrix& reference, const DenseMatrix& approx, Vector* norms = nullptr) {
  Vector out(reference.cols());
  if (norms) norms->assign(reference.cols(), 0.0);
  Vector diff(reference.rows());
  for (std::size_t k = 0; k < reference.cols(); ++k) {
    const auto x = reference.col(k);
    const auto y = approx.col(k);
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = x[i] - y[i];
    const double nx = norm2(x);
    out[k] = nx > 0.0 ? norm2(diff) / nx : norm2(diff);
    if (norms) (*norms)[k] = nx;
  }
  return out;
}

double max_of(const Vector& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); }

std::string bound_status(const BoundReport& r) { return r.valid ? "valid" : "violated"; }

void write_series(std::ostream& out, const StepSeries& s) {
  out << "step,fom_norm,rel_error_srom,rel_error_strom,bound1,bound2,bound3\n";
  out << std::setprecision(10) << std::scientific;
  auto at = [](const Vector& v, std::size_t k) {
    return k < v.size() ? v[k] : std::numeric_limits<double>::quiet_NaN();
  };
  for (std::size_t k = 0; k < s.fom_norm.size(); ++k)
    out << (k + 1) << ',' << at(s.fom_norm, k) << ',' << at(s.rel_error_srom, k) << ','
        << at(s.rel_error_strom, k) << ',' << at(s.bound1, k) << ',' << at(s.bound2, k) << ',' << at(s.bound3, k)
        << '\n';
  out << std::defaultfloat;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << std::setprecision(10);
  return out;
}

}  // namespace

// ---------------------------------------------------------------- offline

TrainResult train(const RunConfig& cfg) {
  cfg.validate();
  const double t0 = wall_now();
  const TimeGrid grid = cfg.grid();
  const std::size_t n_mu = cfg.samples.size();

  TrainResult result;
  result.workers = std::min(cfg.workers, n_mu);
  std::vector<DenseMatrix> states(n_mu);
  std::vector<std::exception_ptr> failures(n_mu);
  result.fom.resize(n_mu);

  // FOM sweep: workers take samples in index order; results land in fixed
  // slots so ingestion below never depends on completion order.
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < n_mu; i = next++) {
      try {
        const LinearDynamicalSystem sys = make_system(cfg.problem, cfg.point(cfg.samples[i]));
        FomResult fom = fom_march(sys, grid);
        result.fom[i] = {fom.wall_seconds, fom.cpu_seconds};
        states[i] = std::move(fom.states);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  {
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < result.workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
  }
  for (std::size_t i = 0; i < n_mu; ++i) {
    if (!failures[i]) continue;
    try {
      std::rethrow_exception(failures[i]);
    } catch (...) {
      rethrow_in_stage("train/fom[sample " + std::to_string(i) + "]");
    }
  }
  result.fom_phase_wall = wall_now() - t0;

  const double t1 = wall_now();
  try {
    SvdState s = isvd_empty(states.front().rows(), cfg.svd);
    for (const DenseMatrix& u : states) {
      for (std::size_t c = 0; c < u.cols(); ++c) {
        s = isvd_update(std::move(s), u.col(c));
        result.rank_history.push_back(s.rank());
      }
      result.sample_end.push_back(s.k);
    }
    result.svd = std::move(s);
  } catch (...) {
    rethrow_in_stage("train/isvd");
  }
  result.ingest_wall = wall_now() - t1;

  try {
    result.basis = build_basis_set(result.svd, cfg.n_s, cfg.n_t, cfg.steps, n_mu);
  } catch (...) {
    rethrow_in_stage("train/basis");
  }
  result.total_wall = wall_now() - t0;
  return result;
}

void write_training_artifacts(const RunConfig& cfg, const TrainResult& r, const fs::path& dir) {
  try {
    fs::create_directories(dir);
    write_matrix(dir / "basis_spatial.mat", r.basis.Phi_s);
    for (std::size_t i = 0; i < r.basis.n_s; ++i) write_matrix(dir / temporal_name(i), r.basis.temporal[i]);
    write_matrix(dir / "svd_sigma.mat", DenseMatrix::from_columns(r.svd.sigma.size(), r.svd.sigma));
    write_matrix(dir / "svd_right.mat", r.svd.V);
  } catch (...) {
    rethrow_in_stage("train/write");
  }

  std::ofstream out = open_out(dir / "train_report.txt");
  const auto& c = r.svd.counters;
  out << "command = train\n"
      << "problem = " << to_string(cfg.problem.kind) << '\n'
      << "state_dim = " << r.svd.state_dim << '\n'
      << "steps = " << cfg.steps << '\n'
      << "dt = " << cfg.dt << '\n'
      << "samples = " << cfg.samples.size() << '\n'
      << "workers = " << r.workers << '\n'
      << "svd.tol = " << cfg.svd.tol_svd << '\n'
      << "svd.sv_tol = " << cfg.svd.tol_sv << '\n'
      << "svd.max_rank = "
      << (cfg.svd.max_rank == std::numeric_limits<std::size_t>::max() ? std::string("none")
                                                                       : std::to_string(cfg.svd.max_rank))
      << '\n'
      << "columns = " << r.svd.k << '\n'
      << "rank = " << r.svd.rank() << '\n'
      << "rejected = " << c.rejected << '\n'
      << "dependent = " << c.dependent << '\n'
      << "truncations = " << c.truncations << '\n'
      << "reorthogonalizations = " << c.reorthogonalizations << '\n'
      << "reinitializations = " << c.reinitializations << '\n'
      << "rom.ns = " << r.basis.n_s << '\n'
      << "rom.nt = " << r.basis.n_t << '\n'
      << "sigma_first = " << (r.svd.sigma.empty() ? 0.0 : r.svd.sigma.front()) << '\n'
      << "sigma_last = " << (r.svd.sigma.empty() ? 0.0 : r.svd.sigma.back()) << '\n'
      << "fom_phase_wall_seconds = " << r.fom_phase_wall << '\n'
      << "isvd_wall_seconds = " << r.ingest_wall << '\n'
      << "total_wall_seconds = " << r.total_wall << '\n';
  out << "\n[fom_timings]\nsample,param,wall_seconds,cpu_seconds\n";
  for (std::size_t i = 0; i < r.fom.size(); ++i)
    out << i << ",\"" << describe(cfg.point(cfg.samples[i])) << "\"," << r.fom[i].wall << ',' << r.fom[i].cpu
        << '\n';
  out << "\n[rank_history]\ncolumn,rank\n";
  for (std::size_t i = 0; i < r.rank_history.size(); ++i) out << (i + 1) << ',' << r.rank_history[i] << '\n';
}

BasisSet load_basis(const RunConfig& cfg, const fs::path& dir) {
  try {
    const fs::path spatial = dir / "basis_spatial.mat";
    if (!fs::exists(spatial))
      throw std::runtime_error("missing " + spatial.string() + "; run `strom train` with the same --out first");
    const DenseMatrix phi = read_matrix(spatial);
    if (cfg.n_s > phi.cols()) {
      std::ostringstream m;
      m << "rom.ns = " << cfg.n_s << " exceeds the trained spatial basis size " << phi.cols();
      throw PreconditionError(m.str());
    }
    BasisSet b;
    b.n_s = cfg.n_s;
    b.Phi_s = phi.left_cols(cfg.n_s);
    for (std::size_t i = 0; i < cfg.n_s; ++i) {
      const fs::path p = dir / temporal_name(i);
      if (!fs::exists(p)) throw std::runtime_error("missing " + p.string());
      const DenseMatrix psi = read_matrix(p);
      if (cfg.n_t > psi.cols()) {
        std::ostringstream m;
        m << "rom.nt = " << cfg.n_t << " exceeds the trained temporal basis size " << psi.cols();
        throw PreconditionError(m.str());
      }
      if (psi.rows() != cfg.steps) {
        std::ostringstream m;
        m << p.string() << " has " << psi.rows() << " time steps, config has time.nt = " << cfg.steps;
        throw DimensionError(m.str());
      }
      b.temporal.push_back(psi.left_cols(cfg.n_t));
    }
    b.n_t = cfg.n_t;
    b.n_time = cfg.steps;
    b.n_mu = cfg.samples.size();
    return b;
  } catch (...) {
    rethrow_in_stage("run/load");
  }
}

// ----------------------------------------------------------------- online

OnlineResult evaluate_online(const RunConfig& cfg, const BasisSet& basis, const ParamPoint& param) {
  OnlineResult r;
  r.param = param;
  const TimeGrid grid = cfg.grid();
  LinearDynamicalSystem sys;
  try {
    sys = make_system(cfg.problem, param);
  } catch (...) {
    rethrow_in_stage("run/system");
  }
  if (basis.state_dim() != sys.state_dim()) {
    std::ostringstream m;
    m << "run/load: basis has " << basis.state_dim() << " rows, the system has " << sys.state_dim() << " unknowns";
    throw DimensionError(m.str());
  }
  r.state_dim = sys.state_dim();
  r.steps = grid.steps();
  r.n_s = basis.n_s;
  r.n_t = basis.n_t;

  FomResult fom;
  r.fom = time_median(cfg.repeats, [&] { fom = fom_march(sys, grid); });

  SpatialRom srom;
  DenseMatrix srom_hat;
  r.srom_operators = time_median(cfg.repeats, [&] { srom = build_spatial_rom(sys, basis, cfg.ref_mode); });
  r.srom_march = time_median(cfg.repeats, [&] { srom_hat = srom_march(srom, grid); });
  const DenseMatrix srom_states = srom_reconstruct(srom, srom_hat);

  SpaceTimeRom st;
  Vector st_hat;
  try {
    r.strom_assembly = time_median(cfg.repeats, [&] { st = build_space_time_rom(srom, basis, grid); });
    r.strom_solve = time_median(cfg.repeats, [&] { st_hat = solve_strom(st); });
    r.strom_online = time_median(cfg.repeats, [&] {
      st = build_space_time_rom(srom, basis, grid);
      st_hat = solve_strom(st);
    });
  } catch (...) {
    rethrow_in_stage("run/space-time");
  }
  DenseMatrix strom_states;
  r.strom_reconstruct = time_median(cfg.repeats, [&] { strom_states = reconstruct_all(basis, st_hat); });

  r.series.rel_error_srom = relative_errors(fom.states, srom_states, &r.series.fom_norm);
  r.series.rel_error_strom = relative_errors(fom.states, strom_states);
  r.max_rel_error_srom = max_of(r.series.rel_error_srom);
  r.max_rel_error_strom = max_of(r.series.rel_error_strom);

  const bool bounds = cfg.bounds == BoundsMode::on ||
                      (cfg.bounds == BoundsMode::automatic && sys.state_dim() * grid.steps() <= 200000);
  if (!bounds) return r;
  BoundOptions opts;
  opts.power.seed = cfg.seed;
  auto guarded = [](std::string& status, auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      status = std::string("skipped: ") + e.what();
    }
  };
  guarded(r.bound1_status, [&] {
    BoundReport b = bound_theorem1(sys, grid, srom_states, opts);
    attach_errors(b, fom.states, srom_states);
    r.series.bound1 = b.bound;
    r.bound1_status = bound_status(b);
  });
  guarded(r.bound2_status, [&] {
    BoundReport b = bound_theorem2(sys, grid, srom_states, opts);
    attach_errors(b, fom.states, srom_states);
    r.series.bound2 = b.bound;
    r.bound2_status = bound_status(b);
  });
  guarded(r.bound3_status, [&] {
    BoundReport b = bound_theorem3(sys, grid, strom_states, opts);
    attach_errors(b, fom.states, strom_states);
    r.series.bound3 = b.bound;
    r.bound3_inverse_norm = b.inverse_norm;
    r.bound3_status = bound_status(b);
  });
  if (cfg.ref_mode != RefMode::initial_state) {
    // the step-wise bounds assume the approximation starts at x0 exactly
    for (std::string* s : {&r.bound1_status, &r.bound2_status})
      if (s->rfind("skipped", 0) != 0) *s += " (ref_mode = zero, start not exact)";
  }
  return r;
}

void write_run_report(const RunConfig& cfg, const OnlineResult& r, const fs::path& dir) {
  fs::create_directories(dir);
  std::ofstream out = open_out(dir / "report.txt");
  out << "command = run\n"
      << "problem = " << to_string(cfg.problem.kind) << '\n'
      << "param = " << describe(r.param) << '\n'
      << "state_dim = " << r.state_dim << '\n'
      << "steps = " << r.steps << '\n'
      << "rom.ns = " << r.n_s << '\n'
      << "rom.nt = " << r.n_t << '\n'
      << "ref_mode = " << to_string(cfg.ref_mode) << '\n'
      << "timing_repeats = " << cfg.repeats << '\n'
      << "fom_workers = 1\n"
      << "rom_workers = 1\n";
  auto timing = [&out](const char* name, const Timing& t) {
    out << name << "_wall_seconds = " << t.wall << '\n' << name << "_cpu_seconds = " << t.cpu << '\n';
  };
  timing("fom", r.fom);
  timing("srom_operators", r.srom_operators);
  timing("srom_march", r.srom_march);
  timing("strom_assembly", r.strom_assembly);
  timing("strom_solve", r.strom_solve);
  timing("strom_online", r.strom_online);
  timing("strom_reconstruct", r.strom_reconstruct);
  out << "speedup_wall_strom = " << r.speedup_wall() << '\n'
      << "speedup_cpu_strom = " << r.speedup_cpu() << '\n'
      << "speedup_wall_strom_with_operators_and_reconstruction = "
      << r.fom.wall / (r.strom_online.wall + r.srom_operators.wall + r.strom_reconstruct.wall) << '\n'
      << "speedup_wall_srom = " << r.fom.wall / r.srom_march.wall << '\n'
      << "max_rel_error_srom = " << r.max_rel_error_srom << '\n'
      << "max_rel_error_strom = " << r.max_rel_error_strom << '\n'
      << "bound1 = " << r.bound1_status << '\n'
      << "bound2 = " << r.bound2_status << '\n'
      << "bound3 = " << r.bound3_status << '\n';
  if (r.bound3_inverse_norm > 0.0) out << "bound3_inverse_norm = " << r.bound3_inverse_norm << '\n';
  out << "\n[series]\n";
  write_series(out, r.series);

  std::ofstream csv = open_out(dir / "series.csv");
  write_series(csv, r.series);
}

// -------------------------------------------------------------- benchmark

BenchResult run_bench(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.test_params.empty()) throw UsageError("bench: test_params is empty");
  const double t0 = wall_now();
  BenchResult b;
  b.train = train(cfg);
  b.online = evaluate_online(cfg, b.train.basis, cfg.point(cfg.test_params.front()));
  b.total_seconds = wall_now() - t0;
  return b;
}

// --------------------------------------------------------------- commands

int cmd_train(const RunConfig& cfg, std::ostream& log) {
  const TrainResult r = train(cfg);
  write_training_artifacts(cfg, r, cfg.out);
  log << "train: " << cfg.samples.size() << " samples, N_s = " << r.svd.state_dim << ", N_t = " << cfg.steps
      << ", rank " << r.svd.rank() << ", basis " << r.basis.n_s << " x " << r.basis.n_t << " written to "
      << cfg.out.string() << " (" << r.total_wall << " s)\n";
  return kSuccess;
}

int cmd_run(const RunConfig& cfg, const std::vector<Vector>& params, std::ostream& log) {
  cfg.validate();
  const std::vector<Vector>& points = params.empty() ? cfg.test_params : params;
  if (points.empty()) throw UsageError("run: no --param given and test_params is empty");
  const BasisSet basis = load_basis(cfg, cfg.out);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const OnlineResult r = evaluate_online(cfg, basis, cfg.point(points[i]));
    const fs::path dir = points.size() == 1 ? cfg.out : cfg.out / ("run_" + std::to_string(i));
    write_run_report(cfg, r, dir);
    log << "run " << describe(r.param) << ": max rel error srom " << r.max_rel_error_srom << ", strom "
        << r.max_rel_error_strom << ", speedup " << r.speedup_wall() << "x wall, " << r.speedup_cpu()
        << "x cpu; report in " << dir.string() << '\n';
  }
  return kSuccess;
}

int cmd_verify(const RunConfig& cfg, std::ostream& log) {
  const auto suites = run_verification(cfg);
  std::size_t failed = 0;
  for (const auto& s : suites) {
    log << (s.pass ? "PASS " : "FAIL ") << std::left << std::setw(24) << s.name << std::right
        << " measured = " << std::setprecision(3) << std::scientific << s.measured << "  tolerance = " << s.tolerance
        << std::defaultfloat << std::setprecision(6);
    if (!s.detail.empty()) log << "  " << s.detail;
    log << '\n';
    if (!s.pass) ++failed;
  }
  log << (failed == 0 ? "all " + std::to_string(suites.size()) + " suites passed"
                      : std::to_string(failed) + " of " + std::to_string(suites.size()) + " suites failed")
      << '\n';
  return failed == 0 ? kSuccess : kVerificationFailed;
}

int cmd_bench(const RunConfig& cfg, std::ostream& log) {
  const BenchResult b = run_bench(cfg);
  write_run_report(cfg, b.online, cfg.out);
  std::ofstream out = open_out(cfg.out / "bench_report.txt");
  const auto& o = b.online;
  out << "command = bench\n"
      << "problem = " << to_string(cfg.problem.kind) << '\n'
      << "state_dim = " << o.state_dim << '\n'
      << "steps = " << o.steps << '\n'
      << "samples = " << cfg.samples.size() << '\n'
      << "test_param = " << describe(o.param) << '\n'
      << "rom.ns = " << o.n_s << '\n'
      << "rom.nt = " << o.n_t << '\n'
      << "train_wall_seconds = " << b.train.total_wall << '\n'
      << "fom_wall_seconds = " << o.fom.wall << '\n'
      << "strom_online_wall_seconds = " << o.strom_online.wall << '\n'
      << "speedup_wall = " << o.speedup_wall() << '\n'
      << "speedup_cpu = " << o.speedup_cpu() << '\n'
      << "max_rel_error_strom = " << o.max_rel_error_strom << '\n'
      << "max_rel_error_srom = " << o.max_rel_error_srom << '\n'
      << "total_seconds = " << b.total_seconds << '\n'
      << "speedup_gate = " << b.speedup_gate << '\n'
      << "error_gate = " << b.error_gate << '\n'
      << "pass = " << (b.pass() ? "true" : "false") << '\n';
  log << "bench: N_s = " << o.state_dim << ", N_t = " << o.steps << ", n_s n_t = " << o.n_s * o.n_t
      << ", speedup " << o.speedup_wall() << "x wall (" << o.speedup_cpu() << "x cpu), max rel error "
      << o.max_rel_error_strom << ", total " << b.total_seconds << " s -> " << (b.pass() ? "PASS" : "FAIL") << '\n';
  return b.pass() ? kSuccess : kVerificationFailed;
}

}  // namespace strom::app
