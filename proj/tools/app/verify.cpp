// Oracle suites behind `strom verify`. Each compares a fast path with an
// explicit, slower construction at verification scale.

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>
#include <sstream>

#include "commands.hpp"

namespace strom::app {

namespace {

using Rng = std::mt19937_64;

DenseMatrix gaussian(std::size_t rows, std::size_t cols, Rng& rng) {
  std::normal_distribution<double> normal;
  DenseMatrix m(rows, cols);
  for (std::size_t j = 0; j < cols; ++j)
    for (double& x : m.col(j)) x = normal(rng);
  return m;
}

DenseMatrix orthonormal(std::size_t rows, std::size_t cols, Rng& rng) { return qr(gaussian(rows, cols, rng)).Q; }

DenseMatrix inverse(const DenseMatrix& a) {
  const DenseLu lu(a);
  DenseMatrix out(a.rows(), a.cols());
  Vector e(a.rows(), 0.0);
  for (std::size_t j = 0; j < a.cols(); ++j) {
    e[j] = 1.0;
    const Vector c = lu.solve(e);
    std::copy(c.begin(), c.end(), out.col(j).begin());
    e[j] = 0.0;
  }
  return out;
}

/// Random stable sparse system: dominant negative diagonal, bidirectional
/// couplings at distances one and three, two inputs.
LinearDynamicalSystem random_system(std::size_t n, Rng& rng) {
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<SparseMatrix::Triplet> t;
  Vector off(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j : {i + 1, i + 3}) {
      if (j >= n) continue;
      const double a = uni(rng), b = uni(rng);
      t.push_back({i, j, a});
      t.push_back({j, i, b});
      off[i] += std::abs(a);
      off[j] += std::abs(b);
    }
  for (std::size_t i = 0; i < n; ++i) t.push_back({i, i, -(1.0 + off[i] + std::abs(uni(rng)))});
  LinearDynamicalSystem sys;
  sys.A = SparseMatrix::from_triplets(n, n, t);
  sys.B = SparseMatrix::from_dense(gaussian(n, 2, rng));
  sys.C = gaussian(n, 1, rng);
  const DenseMatrix x0 = gaussian(n, 1, rng);
  sys.x0.assign(x0.values().begin(), x0.values().end());
  const double p0 = uni(rng), p1 = uni(rng);
  sys.input = InputSignal::from_function(2, [p0, p1](std::size_t k) {
    const double s = static_cast<double>(k);
    return Vector{std::sin(0.3 * s + p0), std::cos(0.2 * s + p1)};
  });
  return sys;
}

SuiteResult isvd_suite(Rng& rng) {
  SuiteResult r{"isvd_vs_batch", false, 0.0, 1e-8, {}};
  IsvdOptions zero;
  zero.tol_svd = 0.0;
  zero.tol_sv = 0.0;
  for (auto [rows, cols, rank] : {std::tuple<std::size_t, std::size_t, std::size_t>{60, 20, 20}, {80, 30, 30}, {50, 25, 6}}) {
    const DenseMatrix u = gaussian(rows, rank, rng) * gaussian(rank, cols, rng);
    SvdState s = isvd_empty(rows, zero);
    s = ingest_simulation(std::move(s), u);
    const Vector ref = thin_svd(u).sigma;
    const double scale = ref.front();
    for (std::size_t i = 0; i < ref.size(); ++i) {
      const double got = i < s.rank() ? s.sigma[i] : 0.0;
      // singular values at rounding level have no relative accuracy
      const double denom = ref[i] > 1e-10 * scale ? ref[i] : scale;
      r.measured = std::max(r.measured, std::abs(got - ref[i]) / denom);
    }
  }
  r.pass = r.measured <= r.tolerance;
  r.detail = "3 streamed matrices, relative singular value error";
  return r;
}

SuiteResult block_suite(Rng& rng, double perturb) {
  SuiteResult r{"block_assembly", false, 0.0, 1e-11, {}};
  constexpr std::size_t N_s = 12, N_t = 8, n_s = 3, n_t = 2;
  for (int trial = 0; trial < 5; ++trial) {
    const LinearDynamicalSystem sys = random_system(N_s, rng);
    std::uniform_real_distribution<double> step(0.02, 0.2);
    Vector dt(N_t);
    for (double& d : dt) d = step(rng);
    const TimeGrid grid(dt);
    BasisSet b;
    b.Phi_s = orthonormal(N_s, n_s, rng);
    for (std::size_t i = 0; i < n_s; ++i) b.temporal.push_back(orthonormal(N_t, n_t, rng));
    b.n_s = n_s;
    b.n_t = n_t;
    b.n_time = N_t;
    b.n_mu = n_t;
    const SpatialRom srom = build_spatial_rom(sys, b, RefMode::zero);
    SpaceTimeRom rom = build_space_time_rom(srom, b, grid);
    if (trial == 0) rom.A_st_hat(0, 0) += perturb;

    const DenseMatrix phi = explicit_st_basis(b);
    const SpaceTimeSystem st = assemble_st(sys, grid);
    r.measured = std::max({r.measured, max_abs_diff(rom.A_st_hat, transpose_times(phi, st.A_st.multiply(phi))),
                           max_abs_diff(rom.f_st_hat, matvec_transpose(phi, st.f_st)),
                           max_abs_diff(rom.x0_st_hat, matvec_transpose(phi, st.x0_st))});
  }
  r.pass = r.measured <= r.tolerance;
  r.detail = "5 random systems, max-abs difference against the explicit Kronecker basis";
  if (perturb != 0.0) r.detail += " (perturbed)";
  return r;
}

SuiteResult fom_st_suite() {
  SuiteResult r{"fom_vs_spacetime", false, 0.0, 1e-9, {}};
  const TimeGrid grid = TimeGrid::uniform(0.01, 12);
  ProblemSpec spec;
  spec.x0_amplitude = 1.0;
  std::ostringstream detail;
  for (ProblemKind kind : {ProblemKind::heat1d, ProblemKind::advdiff2d, ProblemKind::transport1d}) {
    spec.kind = kind;
    spec.nx = kind == ProblemKind::heat1d ? 24 : 6;
    spec.ny = 6;
    spec.nz = 6;
    const LinearDynamicalSystem sys = make_system(spec, {});
    const SpaceTimeSystem st = assemble_st(sys, grid);
    Vector rhs = st.f_st;
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += st.x0_st[i];
    const Vector explicit_x = solve_dense(st.A_st.to_dense(), rhs);
    const Vector marched = stack_states(fom_march(sys, grid).states);
    Vector diff(marched.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = marched[i] - explicit_x[i];
    const double rel = norm2(diff) / std::max(norm2(explicit_x), 1e-300);
    r.measured = std::max(r.measured, rel);
    detail << to_string(kind) << ' ' << rel << "; ";
  }
  r.pass = r.measured <= r.tolerance;
  r.detail = detail.str();
  return r;
}

SuiteResult bounds_suite(Rng& rng, std::uint64_t seed) {
  SuiteResult r{"bound_dominance", false, 0.0, 0.0, {}};
  std::uniform_real_distribution<double> kappa(0.3, 2.0);
  ProblemSpec spec;
  spec.nx = 24;
  spec.x0_amplitude = 1.0;
  BoundOptions opts;
  opts.power.seed = seed;
  std::size_t cases = 0;
  for (int trial = 0; trial < 4; ++trial) {
    const TimeGrid grid = TimeGrid::uniform(2e-3, 12);
    std::vector<DenseMatrix> runs;
    for (int s = 0; s < 3; ++s)
      runs.push_back(fom_march(make_heat1d(spec, ParamPoint{{"kappa"}, {kappa(rng)}}), grid).states);
    IsvdOptions io;
    SvdState svd = isvd_empty(spec.nx, io);
    for (const auto& u : runs) svd = ingest_simulation(std::move(svd), u);
    const BasisSet b = build_basis_set(svd, 2, 2, grid.steps(), 3);
    const LinearDynamicalSystem sys = make_heat1d(spec, ParamPoint{{"kappa"}, {kappa(rng)}});
    const DenseMatrix fom = fom_march(sys, grid).states;
    const SpatialRom srom = build_spatial_rom(sys, b, RefMode::initial_state);
    const DenseMatrix xs = srom_reconstruct(srom, srom_march(srom, grid));
    const DenseMatrix xst = reconstruct_all(b, solve_strom(build_space_time_rom(srom, b, grid)));

    BoundReport b1 = bound_theorem1(sys, grid, xs, opts);
    attach_errors(b1, fom, xs);
    BoundReport b3 = bound_theorem3(sys, grid, xst, opts);
    attach_errors(b3, fom, xst);
    const double small_dt = 0.5 / operator_norm(sys.A, opts);
    const TimeGrid fine = TimeGrid::uniform(small_dt, 12);
    const DenseMatrix fom_fine = fom_march(sys, fine).states;
    const DenseMatrix xs_fine = srom_reconstruct(srom, srom_march(srom, fine));
    BoundReport b2 = bound_theorem2(sys, fine, xs_fine, opts);
    attach_errors(b2, fom_fine, xs_fine);
    for (const BoundReport* rep : {&b1, &b2, &b3}) {
      ++cases;
      if (!rep->valid) r.measured += 1.0;
    }
  }
  r.pass = r.measured == 0.0;
  r.detail = std::to_string(cases) + " bound evaluations on heat1d, measured = violations";
  return r;
}

SuiteResult kron_suite(Rng& rng) {
  SuiteResult r{"kronecker_identities", false, 0.0, 1e-12, {}};
  std::uniform_int_distribution<std::size_t> dim(1, 4);
  auto well_conditioned = [&](std::size_t n) {
    DenseMatrix m = gaussian(n, n, rng);
    for (std::size_t i = 0; i < n; ++i) m(i, i) += 2.0 * static_cast<double>(n) + 2.0;
    return m;
  };
  auto rel = [](const DenseMatrix& a, const DenseMatrix& b) {
    return max_abs_diff(a, b) / std::max(1.0, max_abs(b));
  };
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t m = dim(rng), n = dim(rng), p = dim(rng), q = dim(rng), s = dim(rng), t = dim(rng);
    const DenseMatrix A = gaussian(m, n, rng), B = gaussian(p, q, rng);
    const DenseMatrix C = gaussian(n, s, rng), D = gaussian(q, t, rng);
    const DenseMatrix A2 = gaussian(m, n, rng), B2 = gaussian(p, q, rng);
    const DenseMatrix As = well_conditioned(m), Bs = well_conditioned(p);
    r.measured = std::max({r.measured, rel(inverse(kron(As, Bs)), kron(inverse(As), inverse(Bs))),
                           rel(kron(A, B).transpose(), kron(A.transpose(), B.transpose())),
                           rel(kron(A, B) * kron(C, D), kron(A * C, B * D)),
                           rel(kron(A, B + B2), kron(A, B) + kron(A, B2)),
                           rel(kron(A + A2, B), kron(A, B) + kron(A2, B))});
  }
  r.pass = r.measured <= r.tolerance;
  r.detail = "20 trials x 5 identities";
  return r;
}

SuiteResult persist_suite(Rng& rng) {
  SuiteResult r{"persistence", false, 0.0, 0.0, {}};
  std::uniform_int_distribution<std::size_t> dim(1, 12);
  std::size_t failures = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const DenseMatrix m = gaussian(dim(rng), dim(rng), rng);
    const std::string bytes = encode_matrix(m);
    const DenseMatrix back = decode_matrix(bytes);
    if (back.rows() != m.rows() || back.cols() != m.cols() ||
        std::memcmp(back.data(), m.data(), 8 * m.size()) != 0 || bytes.size() != kMatrixHeaderBytes + 8 * m.size())
      ++failures;
    // flip one header byte; every header byte participates in validation
    std::string bad = bytes;
    bad[std::uniform_int_distribution<std::size_t>(0, kMatrixHeaderBytes - 1)(rng)] ^= 0x40;
    try {
      (void)decode_matrix(bad);
      ++failures;
    } catch (const FormatError&) {
    }
  }
  r.measured = static_cast<double>(failures);
  r.pass = failures == 0;
  r.detail = "20 round trips and 20 corrupted headers, measured = failures";
  return r;
}

}  // namespace

std::vector<SuiteResult> run_verification(const RunConfig& cfg) {
  Rng rng(cfg.seed);
  std::vector<SuiteResult> out;
  auto guarded = [&out](const char* name, auto&& fn) {
    try {
      out.push_back(fn());
    } catch (const std::exception& e) {
      out.push_back({name, false, std::numeric_limits<double>::infinity(), 0.0, std::string("error: ") + e.what()});
    }
  };
  guarded("isvd_vs_batch", [&] { return isvd_suite(rng); });
  guarded("block_assembly", [&] { return block_suite(rng, cfg.perturb); });
  guarded("fom_vs_spacetime", [&] { return fom_st_suite(); });
  guarded("bound_dominance", [&] { return bounds_suite(rng, cfg.seed); });
  guarded("kronecker_identities", [&] { return kron_suite(rng); });
  guarded("persistence", [&] { return persist_suite(rng); });
  return out;
}

}  // namespace strom::app
