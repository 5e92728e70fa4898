// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Eigen supplies the independent dense and sparse oracles.

#include <Eigen/SparseLU>
#include <unsupported/Eigen/KroneckerProduct>

#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "app/commands.hpp"
#include "test_support.hpp"

namespace {

using namespace strom;
using testing::from_eigen;
using testing::random_matrix;
using testing::Rng;
using testing::to_eigen;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double rel_step_error(std::span<const double> ref, std::span<const double> approx) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    num += (ref[i] - approx[i]) * (ref[i] - approx[i]);
    den += ref[i] * ref[i];
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << std::scientific << v;
  return s.str();
}

// 1 -------------------------------------------------------------------------
Outcome incremental_svd() {
  Rng rng(1001);
  const DenseMatrix u = random_matrix(200, 40, rng);
  IsvdOptions zero;
  zero.tol_svd = 0.0;
  zero.tol_sv = 0.0;
  const auto t0 = std::chrono::steady_clock::now();
  SvdState s = isvd_empty(200, zero);
  for (std::size_t c = 0; c < u.cols(); ++c) s = isvd_update(std::move(s), u.col(c));
  const double elapsed = seconds_since(t0);

  const Vector ref = thin_svd(u).sigma;
  const Eigen::VectorXd eig = Eigen::BDCSVD<Eigen::MatrixXd>(to_eigen(u)).singularValues();
  double worst = 0.0, oracle_gap = 0.0;
  const bool same_rank = s.rank() == ref.size();
  for (std::size_t i = 0; i < ref.size() && same_rank; ++i) {
    worst = std::max(worst, std::abs(s.sigma[i] - ref[i]) / ref[i]);
    oracle_gap = std::max(oracle_gap, std::abs(ref[i] - eig(static_cast<Eigen::Index>(i))) / ref[i]);
  }
  return {same_rank && worst <= 1e-8 && oracle_gap <= 1e-10 && elapsed < 2.0,
          "rank " + std::to_string(s.rank()) + ", max rel sigma error " + fmt(worst) + " (thin_svd vs Eigen " +
              fmt(oracle_gap) + "), " + fmt(elapsed) + " s"};
}

// 2 -------------------------------------------------------------------------
Outcome block_assembly() {
  constexpr std::size_t N_s = 12, N_t = 8, n_s = 3, n_t = 2;
  double worst_a = 0.0, worst_f = 0.0, worst_x = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(2000 + seed);
    const LinearDynamicalSystem sys = testing::random_system(N_s, rng, seed % 2 == 0);
    std::uniform_real_distribution<double> step(0.01, 0.3);
    Vector dt(N_t);
    for (double& d : dt) d = step(rng);
    const TimeGrid grid(dt);
    const BasisSet b = testing::random_basis_set(N_s, N_t, n_s, n_t, rng);
    const SpatialRom srom = build_spatial_rom(sys, b, RefMode::zero);
    const SpaceTimeRom rom = build_space_time_rom(srom, b, grid);

    // explicit space-time operator and basis, built here from scratch
    const Eigen::MatrixXd a = to_eigen(sys.A.to_dense());
    const Eigen::MatrixXd bm = to_eigen(sys.B.to_dense());
    const auto n = static_cast<Eigen::Index>(N_s);
    Eigen::MatrixXd a_st = Eigen::MatrixXd::Zero(n * N_t, n * N_t);
    Eigen::VectorXd f_st(n * N_t), x0_st = Eigen::VectorXd::Zero(n * N_t);
    x0_st.head(n) = to_eigen(sys.x0);
    for (std::size_t k = 0; k < N_t; ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      a_st.block(kk * n, kk * n, n, n) = Eigen::MatrixXd::Identity(n, n) - dt[k] * a;
      if (k > 0) a_st.block(kk * n, (kk - 1) * n, n, n) = -Eigen::MatrixXd::Identity(n, n);
      f_st.segment(kk * n, n) = dt[k] * bm * to_eigen(sys.input.at(k));
    }
    Eigen::MatrixXd phi(n * N_t, n_s * n_t);
    for (std::size_t j = 0; j < n_t; ++j)
      for (std::size_t i = 0; i < n_s; ++i) {
        Eigen::VectorXd psi(N_t);
        for (std::size_t k = 0; k < N_t; ++k) psi(static_cast<Eigen::Index>(k)) = b.temporal[i](k, j);
        const Eigen::VectorXd col = Eigen::kroneckerProduct(psi, to_eigen(b.Phi_s.col(i))).eval();
        phi.col(static_cast<Eigen::Index>(i + n_s * j)) = col;
      }
    worst_a = std::max(worst_a, (to_eigen(rom.A_st_hat) - phi.transpose() * a_st * phi).cwiseAbs().maxCoeff());
    worst_f = std::max(worst_f, (to_eigen(rom.f_st_hat) - phi.transpose() * f_st).cwiseAbs().maxCoeff());
    worst_x = std::max(worst_x, (to_eigen(rom.x0_st_hat) - phi.transpose() * x0_st).cwiseAbs().maxCoeff());
  }
  const double worst = std::max({worst_a, worst_f, worst_x});
  return {worst <= 1e-11, "20 seeds, max-abs matrix " + fmt(worst_a) + ", input " + fmt(worst_f) + ", init " +
                              fmt(worst_x)};
}

// 3 -------------------------------------------------------------------------
Outcome exactness() {
  double worst_s = 0.0, worst_st = 0.0;
  std::string detail;
  for (ProblemKind kind : {ProblemKind::heat1d, ProblemKind::advdiff2d, ProblemKind::transport1d}) {
    ProblemSpec spec;
    spec.kind = kind;
    spec.nx = kind == ProblemKind::heat1d ? 10 : 3;
    spec.ny = 3;
    spec.nz = 3;
    spec.nd = 2;
    spec.source_lo = 0.1;
    spec.source_hi = 0.4;
    spec.blob_x = 0.2;
    spec.blob_y = 0.7;
    spec.vx = 1.0;
    spec.vy = 0.3;
    spec.x0_amplitude = 1.0;
    const std::string pname = kind == ProblemKind::transport1d ? "nu" : "kappa";
    const std::size_t N_t = 9;
    const TimeGrid grid = TimeGrid::uniform(kind == ProblemKind::heat1d ? 2e-3 : 2e-2, N_t);
    const Vector samples{0.5, 0.65, 0.8, 0.95, 1.1, 1.25, 1.4, 1.55, 1.7};
    IsvdOptions opts;
    opts.tol_svd = 1e-14;
    opts.tol_sv = 0.0;
    SvdState s = isvd_empty(make_system(spec, {}).state_dim(), opts);
    for (double v : samples) s = ingest_simulation(std::move(s), fom_march(make_system(spec, {{pname}, {v}}), grid).states);
    const std::size_t N_s = s.state_dim;
    const BasisSet b = build_basis_set(s, N_s, N_t, N_t, samples.size());
    const LinearDynamicalSystem sys = make_system(spec, {{pname}, {0.8}});
    const DenseMatrix fom = fom_march(sys, grid).states;
    const SpatialRom srom = build_spatial_rom(sys, b, RefMode::initial_state);
    const DenseMatrix xs = srom_reconstruct(srom, srom_march(srom, grid));
    const DenseMatrix xst = reconstruct_all(b, solve_strom(build_space_time_rom(srom, b, grid)));
    for (std::size_t k = 0; k < N_t; ++k) {
      worst_s = std::max(worst_s, rel_step_error(fom.col(k), xs.col(k)));
      worst_st = std::max(worst_st, rel_step_error(fom.col(k), xst.col(k)));
    }
    detail += to_string(kind) + " N_s=" + std::to_string(N_s) + " ";
  }
  return {worst_s <= 1e-9 && worst_st <= 1e-9,
          detail + "unseen parameter, max step error spatial " + fmt(worst_s) + ", space-time " + fmt(worst_st)};
}

// 4 -------------------------------------------------------------------------
bool dominates(const BoundReport& r, const DenseMatrix& fom, const DenseMatrix& approx, bool space_time) {
  double max_err = 0.0;
  for (std::size_t k = 0; k < fom.cols(); ++k) {
    Vector d(fom.rows());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = fom(i, k) - approx(i, k);
    const double e = norm2(d);
    max_err = std::max(max_err, e);
    if (!space_time && e > r.bound[k] + 1e-12 * std::max(1.0, r.bound[k])) return false;
  }
  return !space_time || max_err <= r.st_bound + 1e-12 * std::max(1.0, r.st_bound);
}

Outcome bound_dominance() {
  Rng rng(4004);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::size_t configs = 0, checks = 0, violations = 0;
  for (int trial = 0; trial < 24; ++trial) {
    const bool heat = trial % 2 == 0;
    ProblemSpec spec;
    spec.kind = heat ? ProblemKind::heat1d : ProblemKind::transport1d;
    spec.nx = 16;
    spec.nz = 8;
    spec.nd = 4;
    spec.x0_amplitude = uni(rng) < 0.5 ? 1.0 : 0.0;
    spec.source_lo = 0.1 + 0.2 * uni(rng);
    spec.source_hi = spec.source_lo + 0.3;
    const std::string pname = heat ? "kappa" : "sigma_t";
    auto param = [&](double v) { return ParamPoint{{pname}, {v}}; };
    auto draw = [&] { return heat ? 0.3 + 1.7 * uni(rng) : 0.8 + 1.5 * uni(rng); };
    const LinearDynamicalSystem sys = make_system(spec, param(draw()));
    const double norm_a = Eigen::BDCSVD<Eigen::MatrixXd>(to_eigen(sys.A.to_dense())).singularValues()(0);
    const double dt = (0.2 + 0.6 * uni(rng)) / norm_a;  // meets the spatial-ROM bound's step limit
    const std::size_t N_t = 8 + static_cast<std::size_t>(8 * uni(rng));
    const TimeGrid grid = TimeGrid::uniform(dt, N_t);

    SvdState s = isvd_empty(sys.state_dim(), IsvdOptions{});
    for (int k = 0; k < 3; ++k) s = ingest_simulation(std::move(s), fom_march(make_system(spec, param(draw())), grid).states);
    const std::size_t n_s = std::min<std::size_t>(2 + trial % 3, s.rank());
    const std::size_t n_t = 1 + static_cast<std::size_t>(trial % 2);
    const BasisSet b = build_basis_set(s, n_s, n_t, N_t, 3);
    const DenseMatrix fom = fom_march(sys, grid).states;
    const SpatialRom srom = build_spatial_rom(sys, b, RefMode::initial_state);
    const DenseMatrix xs = srom_reconstruct(srom, srom_march(srom, grid));
    const DenseMatrix xst = reconstruct_all(b, solve_strom(build_space_time_rom(srom, b, grid)));

    ++configs;
    const BoundReport b1 = bound_theorem1(sys, grid, xs);
    const BoundReport b2 = bound_theorem2(sys, grid, xs);
    const BoundReport b3 = bound_theorem3(sys, grid, xst);
    checks += 3;
    violations += !dominates(b1, fom, xs, false);
    violations += !dominates(b2, fom, xs, false);
    violations += !dominates(b3, fom, xst, true);
  }

  // stability-constant products at a fixed step count as dt shrinks tenfold
  ProblemSpec spec;
  spec.nx = 32;
  const LinearDynamicalSystem sys = make_heat1d(spec, {});
  const double norm_a = Eigen::BDCSVD<Eigen::MatrixXd>(to_eigen(sys.A.to_dense())).singularValues()(0);
  std::vector<double> products;
  for (double scale : {0.5, 0.05, 0.005, 0.0005}) {
    const TimeGrid grid = TimeGrid::uniform(scale / norm_a, 20);
    const BoundReport r = bound_theorem2(sys, grid, fom_march(sys, grid).states);
    double p = 1.0;
    for (double g : r.stability) p *= g;
    products.push_back(p);
  }
  bool shrinking = products.back() - 1.0 < 0.02;
  std::string trail;
  for (std::size_t i = 0; i < products.size(); ++i) {
    if (i > 0) shrinking = shrinking && products[i] < products[i - 1] && products[i] > 1.0;
    trail += (i ? ", " : "") + fmt(products[i] - 1.0);
  }
  return {violations == 0 && configs >= 20 && shrinking,
          std::to_string(configs) + " heat1d/transport1d configs, " + std::to_string(violations) + " violations in " +
              std::to_string(checks) + " bound checks; gamma product - 1 as dt shrinks: " + trail};
}

// 5 -------------------------------------------------------------------------
Outcome kronecker() {
  Rng rng(5005);
  std::uniform_int_distribution<std::size_t> dim(1, 5);
  double worst[5] = {0, 0, 0, 0, 0};
  auto rel = [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
  };
  auto K = [](const DenseMatrix& a, const DenseMatrix& b) { return to_eigen(kron(a, b)); };
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = dim(rng), n = dim(rng), p = dim(rng), q = dim(rng), s = dim(rng), t = dim(rng);
    const DenseMatrix A = random_matrix(m, n, rng), B = random_matrix(p, q, rng);
    const DenseMatrix A2 = random_matrix(m, n, rng), B2 = random_matrix(p, q, rng);
    const DenseMatrix C = random_matrix(n, s, rng), D = random_matrix(q, t, rng);
    DenseMatrix As = random_matrix(m, m, rng), Bs = random_matrix(p, p, rng);
    for (std::size_t i = 0; i < m; ++i) As(i, i) += 2.0 * static_cast<double>(m) + 2.0;
    for (std::size_t i = 0; i < p; ++i) Bs(i, i) += 2.0 * static_cast<double>(p) + 2.0;
    const Eigen::MatrixXd ea = to_eigen(A), eb = to_eigen(B);
    // the library's kron against Eigen's, then the five identities
    worst[0] = std::max(worst[0], rel(K(A, B), Eigen::kroneckerProduct(ea, eb).eval()));
    worst[0] = std::max(worst[0], rel(K(As, Bs).inverse(),
                                      K(from_eigen(to_eigen(As).inverse()), from_eigen(to_eigen(Bs).inverse()))));
    worst[1] = std::max(worst[1], rel(K(A, B).transpose(), K(A.transpose(), B.transpose())));
    worst[2] = std::max(worst[2], rel(K(A, B) * K(C, D), K(A * C, B * D)));
    worst[3] = std::max(worst[3], rel(K(A, B + B2), K(A, B) + K(A, B2)));
    worst[4] = std::max(worst[4], rel(K(A + A2, B), K(A, B) + K(A2, B)));
  }
  const double w = *std::max_element(std::begin(worst), std::end(worst));
  return {w <= 1e-12, "100 trials; inverse " + fmt(worst[0]) + ", transpose " + fmt(worst[1]) + ", mixed product " +
                          fmt(worst[2]) + ", left distributive " + fmt(worst[3]) + ", right distributive " +
                          fmt(worst[4])};
}

// 6 -------------------------------------------------------------------------
Outcome desk_scale() {
  app::RunConfig cfg = app::desk_scale_config();
  const auto t0 = std::chrono::steady_clock::now();
  const app::BenchResult b = app::run_bench(cfg);
  const double total = seconds_since(t0);
  const auto& o = b.online;
  const bool shape = o.state_dim == 10000 && o.steps == 200 && cfg.samples.size() == 3 && o.n_s * o.n_t <= 30;
  return {shape && o.speedup_wall() >= 100.0 && o.max_rel_error_strom <= 0.05 && total < 300.0,
          "advdiff2d N_s=" + std::to_string(o.state_dim) + " N_t=" + std::to_string(o.steps) +
              " n_s*n_t=" + std::to_string(o.n_s * o.n_t) + ", speedup " + fmt(o.speedup_wall()) + "x wall (" +
              fmt(o.speedup_cpu()) + "x cpu), max step error " + fmt(o.max_rel_error_strom) + ", total " +
              fmt(total) + " s"};
}

// 7 -------------------------------------------------------------------------
Outcome fom_vs_spacetime() {
  double worst = 0.0;
  std::string detail;
  for (ProblemKind kind : {ProblemKind::heat1d, ProblemKind::advdiff2d, ProblemKind::transport1d}) {
    ProblemSpec spec;
    spec.kind = kind;
    spec.x0_amplitude = 1.0;
    std::size_t N_t = 0;
    double dt = 0.0;
    switch (kind) {
      case ProblemKind::heat1d: spec.nx = 200, N_t = 100, dt = 1e-4; break;
      case ProblemKind::advdiff2d: spec.nx = spec.ny = 20, N_t = 50, dt = 1e-3, spec.vx = 1.0; break;
      case ProblemKind::transport1d: spec.nz = 50, spec.nd = 8, N_t = 50, dt = 1e-2; break;
    }
    const LinearDynamicalSystem sys = make_system(spec, {});
    const TimeGrid grid = TimeGrid::uniform(dt, N_t);
    const SpaceTimeSystem st = assemble_st(sys, grid);
    std::vector<Eigen::Triplet<double>> t;
    for (const auto& e : st.A_st.triplets())
      t.emplace_back(static_cast<int>(e.row), static_cast<int>(e.col), e.value);
    Eigen::SparseMatrix<double> a(static_cast<Eigen::Index>(st.A_st.rows()), static_cast<Eigen::Index>(st.A_st.cols()));
    a.setFromTriplets(t.begin(), t.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(a);
    const Eigen::VectorXd x = lu.solve(to_eigen(st.f_st) + to_eigen(st.x0_st));
    const Vector marched = stack_states(fom_march(sys, grid).states);
    const double rel = (to_eigen(marched) - x).norm() / x.norm();
    worst = std::max(worst, rel);
    detail += to_string(kind) + " N_sN_t=" + std::to_string(st.A_st.rows()) + " rel " + fmt(rel) + "; ";
  }
  return {worst <= 1e-9, detail};
}

// 8 -------------------------------------------------------------------------
Outcome persistence() {
  Rng rng(8008);
  const fs::path dir = fs::temp_directory_path() / "strom_acceptance_persist";
  fs::create_directories(dir);
  std::uniform_int_distribution<std::size_t> dim(1, 40);
  std::size_t round_trip_failures = 0, undetected = 0, corruptions = 0;
  const auto read_bytes = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  const auto write_bytes = [](const fs::path& p, const std::string& b) {
    std::ofstream(p, std::ios::binary | std::ios::trunc).write(b.data(), static_cast<std::streamsize>(b.size()));
  };
  for (int trial = 0; trial < 50; ++trial) {
    DenseMatrix m = random_matrix(dim(rng), dim(rng), rng);
    m.data()[0] = trial % 3 == 0 ? -0.0 : m.data()[0] * 1e300;
    const fs::path p = dir / "m.mat";
    write_matrix(p, m);
    const DenseMatrix back = read_matrix(p);
    if (back.rows() != m.rows() || back.cols() != m.cols() || std::memcmp(back.data(), m.data(), 8 * m.size()) != 0)
      ++round_trip_failures;

    const std::string good = read_bytes(p);
    std::vector<std::string> bad;
    for (std::size_t byte = 0; byte < kMatrixHeaderBytes; ++byte) {
      std::string b = good;
      b[byte] = static_cast<char>(b[byte] ^ (1 << (byte % 8)));
      bad.push_back(b);
    }
    bad.push_back(good.substr(0, good.size() - 1 - trial % 8));
    bad.push_back(good.substr(0, trial % static_cast<int>(kMatrixHeaderBytes)));
    bad.push_back(good + std::string(1 + trial % 3, '\0'));
    std::string nan = good;
    const double q = std::numeric_limits<double>::quiet_NaN();
    std::memcpy(nan.data() + kMatrixHeaderBytes + 8 * (m.size() - 1), &q, 8);
    bad.push_back(nan);
    for (const auto& b : bad) {
      write_bytes(p, b);
      ++corruptions;
      try {
        (void)read_matrix(p);
        ++undetected;
      } catch (const FormatError&) {
      }
    }
  }
  fs::remove_all(dir);
  return {round_trip_failures == 0 && undetected == 0,
          "50 shapes, " + std::to_string(round_trip_failures) + " round-trip mismatches, " +
              std::to_string(undetected) + " of " + std::to_string(corruptions) + " corruptions undetected"};
}

// 9 -------------------------------------------------------------------------
Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "strom_acceptance_determinism";
  fs::remove_all(dir);
  app::RunConfig cfg = app::parse_config(
      "problem.kind = advdiff2d\nproblem.nx = 24\nproblem.ny = 24\nproblem.vx = 1\nproblem.x0_amplitude = 1\n"
      "time.dt = 0.01\ntime.nt = 40\nparams = kappa, vy\nsamples = 0.05, 0; 0.1, 0.5; 0.15, -0.5; 0.2, 0.2\n"
      "test_params = 0.12, 0.1\nrom.ns = 6\nrom.nt = 3\nworkers = 3\nseed = 99\n");
  std::ostringstream log;
  for (const char* run : {"a", "b"}) {
    cfg.out = dir / run;
    app::cmd_train(cfg, log);
  }
  const auto bytes = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  std::size_t files = 0, differing = 0;
  for (const auto& e : fs::directory_iterator(dir / "a")) {
    if (e.path().extension() != ".mat") continue;
    ++files;
    const fs::path other = dir / "b" / e.path().filename();
    if (!fs::exists(other) || bytes(e.path()) != bytes(other)) ++differing;
  }
  fs::remove_all(dir);
  return {files == 1 + cfg.n_s + 2 && differing == 0,
          std::to_string(files) + " basis and SVD files compared, " + std::to_string(differing) + " differ"};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"incremental SVD matches batch", incremental_svd},
      {"block assembly equals explicit projection", block_assembly},
      {"full bases reproduce the FOM", exactness},
      {"error bounds dominate", bound_dominance},
      {"Kronecker identities", kronecker},
      {"desk-scale speedup", desk_scale},
      {"FOM equals explicit space-time solve", fom_vs_spacetime},
      {"persistence round trip and corruption", persistence},
      {"deterministic training", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%s] criterion %zu: %s; %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
