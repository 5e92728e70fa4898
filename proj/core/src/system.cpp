#include "strom/system.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <numeric>
#include <sstream>

#include "strom/error.hpp"

namespace strom {

// ---------------------------------------------------------------------------
// ParamPoint / TimeGrid / InputSignal

std::optional<double> ParamPoint::find(const std::string& name) const {
  for (std::size_t i = 0; i < names.size() && i < values.size(); ++i)
    if (names[i] == name) return values[i];
  return std::nullopt;
}

double ParamPoint::get(const std::string& name, double fallback) const {
  return find(name).value_or(fallback);
}

void ParamPoint::validate() const {
  if (names.size() != values.size())
    throw DimensionError("ParamPoint: " + std::to_string(names.size()) + " names for " +
                         std::to_string(values.size()) + " values");
  if (!all_finite(values)) throw PreconditionError("ParamPoint: non-finite value");
}

TimeGrid::TimeGrid(Vector dt) : dt_(std::move(dt)) {
  for (double d : dt_)
    if (!(d > 0.0) || !std::isfinite(d)) throw PreconditionError("TimeGrid: step sizes must be positive and finite");
}

TimeGrid TimeGrid::uniform(double dt, std::size_t steps) { return TimeGrid(Vector(steps, dt)); }

double TimeGrid::time_after(std::size_t k) const {
  return std::accumulate(dt_.begin(), dt_.begin() + static_cast<std::ptrdiff_t>(k + 1), 0.0);
}

double TimeGrid::final_time() const { return std::accumulate(dt_.begin(), dt_.end(), 0.0); }

bool TimeGrid::is_uniform() const noexcept {
  return std::all_of(dt_.begin(), dt_.end(), [&](double d) { return d == dt_.front(); });
}

InputSignal InputSignal::constant(Vector f) {
  InputSignal s;
  s.dim_ = f.size();
  s.constant_ = std::move(f);
  return s;
}

InputSignal InputSignal::from_function(std::size_t dim, Function fn) {
  InputSignal s;
  s.dim_ = dim;
  s.fn_ = std::move(fn);
  return s;
}

Vector InputSignal::at(std::size_t k) const {
  if (!fn_) return constant_;
  Vector f = fn_(k);
  if (f.size() != dim_) throw DimensionError("InputSignal: function returned wrong length");
  return f;
}

const Vector& InputSignal::constant_value() const {
  if (fn_) throw PreconditionError("InputSignal: signal is not constant");
  return constant_;
}

void LinearDynamicalSystem::validate() const {
  A.validate();
  B.validate();
  const std::size_t n = A.rows();
  if (A.cols() != n) throw DimensionError("system: A is not square");
  if (B.rows() != n) throw DimensionError("system: B row count differs from N_s");
  if (C.rows() != n) throw DimensionError("system: C row count differs from N_s");
  if (x0.size() != n) throw DimensionError("system: x0 length differs from N_s");
  if (input.dim() != B.cols()) throw DimensionError("system: input dimension differs from B columns");
  if (!all_finite(C.values()) || !all_finite(x0)) throw PreconditionError("system: non-finite C or x0");
  param.validate();
}

// ---------------------------------------------------------------------------
// BackwardEulerSolver

namespace {

using EigenSparse = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using EigenLu = Eigen::SparseLU<EigenSparse, Eigen::COLAMDOrdering<int>>;

EigenSparse to_eigen(const SparseMatrix& a) {
  std::vector<Eigen::Triplet<double, int>> t;
  t.reserve(a.nonzeros());
  for (const auto& e : a.triplets())
    t.emplace_back(static_cast<int>(e.row), static_cast<int>(e.col), e.value);
  EigenSparse m(static_cast<int>(a.rows()), static_cast<int>(a.cols()));
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

struct CachedFactor {
  double dt = std::numeric_limits<double>::quiet_NaN();
  EigenSparse step_matrix;
  std::unique_ptr<EigenLu> lu;
};

}  // namespace

struct BackwardEulerSolver::Impl {
  EigenSparse a;
  EigenSparse at;
  EigenSparse identity;
  CachedFactor forward;
  CachedFactor adjoint;
  std::size_t factorizations = 0;

  void factor(CachedFactor& cache, const EigenSparse& op, double dt) {
    if (cache.lu && cache.dt == dt) return;
    cache.step_matrix = identity - dt * op;
    cache.step_matrix.makeCompressed();
    cache.lu = std::make_unique<EigenLu>();
    cache.lu->compute(cache.step_matrix);
    cache.dt = dt;
    ++factorizations;
    if (cache.lu->info() != Eigen::Success) {
      const auto msg = "backward Euler: factorisation of (I - dt A) failed for dt = " + std::to_string(dt) +
                       ": " + cache.lu->lastErrorMessage();
      cache.lu.reset();
      throw SingularMatrixError(msg, 0);
    }
  }

  Vector solve(CachedFactor& cache, const EigenSparse& op, double dt, std::span<const double> rhs) {
    factor(cache, op, dt);
    const Eigen::Map<const Eigen::VectorXd> b(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
    Eigen::VectorXd x = cache.lu->solve(b);
    const double bnorm = b.norm();
    Eigen::VectorXd r = b - cache.step_matrix * x;
    if (r.norm() > kStepSolveTolerance * bnorm) {
      x += cache.lu->solve(r);
      r = b - cache.step_matrix * x;
    }
    if (!(r.norm() <= kStepSolveTolerance * bnorm) && bnorm > 0.0) {
      std::ostringstream msg;
      msg << "backward Euler: step solve breakdown, relative residual " << r.norm() / bnorm
          << " after one refinement (dt = " << dt << ")";
      throw ConvergenceError(msg.str(), r.norm() / bnorm);
    }
    return Vector(x.data(), x.data() + x.size());
  }
};

BackwardEulerSolver::BackwardEulerSolver(const SparseMatrix& a) : impl_(std::make_unique<Impl>()) {
  if (a.rows() != a.cols()) throw DimensionError("BackwardEulerSolver: A is not square");
  impl_->a = to_eigen(a);
  impl_->at = impl_->a.transpose();
  impl_->identity.resize(impl_->a.rows(), impl_->a.cols());
  impl_->identity.setIdentity();
}

BackwardEulerSolver::~BackwardEulerSolver() = default;
BackwardEulerSolver::BackwardEulerSolver(BackwardEulerSolver&&) noexcept = default;
BackwardEulerSolver& BackwardEulerSolver::operator=(BackwardEulerSolver&&) noexcept = default;

Vector BackwardEulerSolver::solve(double dt, std::span<const double> rhs) {
  if (rhs.size() != static_cast<std::size_t>(impl_->a.rows()))
    throw DimensionError("BackwardEulerSolver::solve: dimension mismatch");
  return impl_->solve(impl_->forward, impl_->a, dt, rhs);
}

Vector BackwardEulerSolver::solve_transpose(double dt, std::span<const double> rhs) {
  if (rhs.size() != static_cast<std::size_t>(impl_->a.rows()))
    throw DimensionError("BackwardEulerSolver::solve_transpose: dimension mismatch");
  return impl_->solve(impl_->adjoint, impl_->at, dt, rhs);
}

std::size_t BackwardEulerSolver::factorizations() const noexcept { return impl_->factorizations; }

// ---------------------------------------------------------------------------
// Full-order march

namespace {

Vector step_rhs(const LinearDynamicalSystem& sys, double dt, std::span<const double> x_prev,
                std::span<const double> f_k) {
  Vector rhs(x_prev.begin(), x_prev.end());
  const Vector bf = sys.B.multiply(f_k);
  axpy(dt, bf, rhs);
  return rhs;
}

}  // namespace

Vector backward_euler_step(const LinearDynamicalSystem& sys, double dt, std::span<const double> x_prev,
                           std::span<const double> f_k) {
  if (!(dt > 0.0)) throw PreconditionError("backward_euler_step: dt must be positive");
  if (x_prev.size() != sys.state_dim() || f_k.size() != sys.input_dim())
    throw DimensionError("backward_euler_step: dimension mismatch");
  BackwardEulerSolver solver(sys.A);
  return solver.solve(dt, step_rhs(sys, dt, x_prev, f_k));
}

FomResult fom_march(const LinearDynamicalSystem& sys, const TimeGrid& grid) {
  if (grid.steps() == 0) throw PreconditionError("fom_march: empty time grid");
  const std::size_t n = sys.state_dim();
  FomResult out;
  out.states = DenseMatrix(n, grid.steps());
  out.outputs = DenseMatrix(sys.output_dim(), grid.steps());

  const auto wall0 = std::chrono::steady_clock::now();
  const std::clock_t cpu0 = std::clock();
  BackwardEulerSolver solver(sys.A);
  Vector x = sys.x0;
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    const Vector f = sys.input.at(k);
    x = solver.solve(grid.dt(k), step_rhs(sys, grid.dt(k), x, f));
    std::copy(x.begin(), x.end(), out.states.col(k).begin());
  }
  out.cpu_seconds = static_cast<double>(std::clock() - cpu0) / CLOCKS_PER_SEC;
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();

  for (std::size_t k = 0; k < grid.steps(); ++k) {
    const Vector y = matvec_transpose(sys.C, out.states.col(k));
    std::copy(y.begin(), y.end(), out.outputs.col(k).begin());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Space-time formulation

SpaceTimeSystem assemble_st(const LinearDynamicalSystem& sys, const TimeGrid& grid, std::size_t cap) {
  const std::size_t n = sys.state_dim();
  const std::size_t nt = grid.steps();
  if (n * nt > cap) {
    std::ostringstream msg;
    msg << "assemble_st: N_s*N_t = " << n * nt << " exceeds the verification cap " << cap
        << "; the explicit space-time system exists only as a test oracle, time marching solves the same "
           "system without assembling it";
    throw CapExceededError(msg.str());
  }
  std::vector<SparseMatrix::Triplet> t;
  t.reserve(nt * (sys.A.nonzeros() + 2 * n));
  const auto a = sys.A.triplets();
  SpaceTimeSystem st;
  st.f_st.assign(n * nt, 0.0);
  st.x0_st.assign(n * nt, 0.0);
  for (std::size_t k = 0; k < nt; ++k) {
    const std::size_t off = k * n;
    const double dt = grid.dt(k);
    for (std::size_t i = 0; i < n; ++i) t.push_back({off + i, off + i, 1.0});
    for (const auto& e : a) t.push_back({off + e.row, off + e.col, -dt * e.value});
    if (k > 0)
      for (std::size_t i = 0; i < n; ++i) t.push_back({off + i, off - n + i, -1.0});
    const Vector bf = sys.B.multiply(sys.input.at(k));
    for (std::size_t i = 0; i < n; ++i) st.f_st[off + i] = dt * bf[i];
  }
  std::copy(sys.x0.begin(), sys.x0.end(), st.x0_st.begin());
  st.A_st = SparseMatrix::from_triplets(n * nt, n * nt, std::move(t));
  return st;
}

SpaceTimeOperator::SpaceTimeOperator(const LinearDynamicalSystem& sys, const TimeGrid& grid)
    : sys_(&sys), grid_(&grid), solver_(sys.A) {}

Vector SpaceTimeOperator::apply_inverse(std::span<const double> v) {
  const std::size_t n = sys_->state_dim();
  if (v.size() != dim()) throw DimensionError("st_apply_inverse: dimension mismatch");
  Vector out(v.size());
  Vector x(n, 0.0);
  for (std::size_t k = 0; k < grid_->steps(); ++k) {
    const auto vk = v.subspan(k * n, n);
    for (std::size_t i = 0; i < n; ++i) x[i] += vk[i];
    x = solver_.solve(grid_->dt(k), x);
    std::copy(x.begin(), x.end(), out.begin() + static_cast<std::ptrdiff_t>(k * n));
  }
  return out;
}

Vector SpaceTimeOperator::apply_inverse_adjoint(std::span<const double> w) {
  const std::size_t n = sys_->state_dim();
  if (w.size() != dim()) throw DimensionError("st_apply_inverse_adjoint: dimension mismatch");
  Vector out(w.size());
  Vector y(n, 0.0);
  for (std::size_t k = grid_->steps(); k-- > 0;) {
    const auto wk = w.subspan(k * n, n);
    for (std::size_t i = 0; i < n; ++i) y[i] += wk[i];
    y = solver_.solve_transpose(grid_->dt(k), y);
    std::copy(y.begin(), y.end(), out.begin() + static_cast<std::ptrdiff_t>(k * n));
  }
  return out;
}

Vector SpaceTimeOperator::residual(std::span<const double> x_st) const {
  return st_residual(*sys_, *grid_, x_st);
}

Vector st_apply_inverse(const LinearDynamicalSystem& sys, const TimeGrid& grid, std::span<const double> v) {
  return SpaceTimeOperator(sys, grid).apply_inverse(v);
}

Vector st_apply_inverse_adjoint(const LinearDynamicalSystem& sys, const TimeGrid& grid,
                                std::span<const double> w) {
  return SpaceTimeOperator(sys, grid).apply_inverse_adjoint(w);
}

Vector step_residual(const LinearDynamicalSystem& sys, double dt, std::span<const double> x_k,
                     std::span<const double> x_prev, std::span<const double> f_k) {
  const std::size_t n = sys.state_dim();
  if (x_k.size() != n || x_prev.size() != n || f_k.size() != sys.input_dim())
    throw DimensionError("step_residual: dimension mismatch");
  const Vector ax = sys.A.multiply(x_k);
  const Vector bf = sys.B.multiply(f_k);
  Vector r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = x_k[i] - x_prev[i] - dt * ax[i] - dt * bf[i];
  return r;
}

Vector st_residual(const LinearDynamicalSystem& sys, const TimeGrid& grid, std::span<const double> x_st) {
  const std::size_t n = sys.state_dim();
  if (x_st.size() != n * grid.steps()) throw DimensionError("st_residual: dimension mismatch");
  Vector r(x_st.size());
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    const auto xk = x_st.subspan(k * n, n);
    const auto xprev = k == 0 ? std::span<const double>(sys.x0) : x_st.subspan((k - 1) * n, n);
    const Vector rk = step_residual(sys, grid.dt(k), xk, xprev, sys.input.at(k));
    std::copy(rk.begin(), rk.end(), r.begin() + static_cast<std::ptrdiff_t>(k * n));
  }
  return r;
}

Vector step_residual_norms(const LinearDynamicalSystem& sys, const TimeGrid& grid, const DenseMatrix& states) {
  if (states.rows() != sys.state_dim() || states.cols() != grid.steps())
    throw DimensionError("step_residual_norms: state matrix must be N_s x N_t");
  Vector norms(grid.steps());
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    const auto xprev = k == 0 ? std::span<const double>(sys.x0) : states.col(k - 1);
    norms[k] = norm2(step_residual(sys, grid.dt(k), states.col(k), xprev, sys.input.at(k)));
  }
  return norms;
}

Vector stack_states(const DenseMatrix& states) { return Vector(states.values().begin(), states.values().end()); }

DenseMatrix unstack_states(std::span<const double> x_st, std::size_t state_dim) {
  return DenseMatrix::from_columns(state_dim, x_st);
}

double symmetric_part_max_eigenvalue(const SparseMatrix& a, const PowerIterationOptions& options) {
  if (a.rows() != a.cols()) throw DimensionError("symmetric_part_max_eigenvalue: A is not square");
  auto sym = [&](std::span<const double> x) {
    Vector y = a.multiply(x);
    const Vector yt = a.multiply_transpose(x);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = 0.5 * (y[i] + yt[i]);
    return y;
  };
  const double spectral_radius = largest_singular_value(sym, sym, a.rows(), a.rows(), options);
  // S + rho I is positive semidefinite; its top eigenvalue is rho + lambda_max(S)
  auto shifted = [&](std::span<const double> x) {
    Vector y = sym(x);
    axpy(spectral_radius, x, y);
    return y;
  };
  PowerIterationOptions o = options;
  o.adjoint_check_tol = -1.0;
  const double top = largest_singular_value(shifted, shifted, a.rows(), a.rows(), o);
  return top - spectral_radius;
}

DenseMatrix concatenate_snapshots(const std::vector<DenseMatrix>& simulations) {
  DenseMatrix u;
  for (const auto& sim : simulations)
    for (std::size_t k = 0; k < sim.cols(); ++k) u.append_col(sim.col(k));
  return u;
}

}  // namespace strom
