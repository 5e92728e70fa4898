#include "strom/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "strom/error.hpp"

namespace strom {

namespace {

void check_states(const LinearDynamicalSystem& sys, const TimeGrid& grid, const DenseMatrix& approx,
                  const char* where) {
  if (approx.rows() != sys.state_dim() || approx.cols() != grid.steps()) {
    std::ostringstream msg;
    msg << where << ": approximate states are " << approx.rows() << "x" << approx.cols() << ", expected "
        << sys.state_dim() << "x" << grid.steps();
    throw DimensionError(msg.str());
  }
}

DenseMatrix step_matrix(const SparseMatrix& a, double dt) {
  DenseMatrix m = a.to_dense();
  m *= -dt;
  for (std::size_t i = 0; i < m.rows(); ++i) m(i, i) += 1.0;
  return m;
}

double max_of(std::span<const double> v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); }

}  // namespace

double step_inverse_norm(const SparseMatrix& a, double dt, const BoundOptions& options) {
  const std::size_t n = a.rows();
  if (n <= options.dense_threshold) {
    const Vector sigma = thin_svd(step_matrix(a, dt)).sigma;
    const double smin = sigma.back();
    if (smin == 0.0) throw SingularMatrixError("step_inverse_norm: I - dt A is singular", n - 1);
    return 1.0 / smin;
  }
  BackwardEulerSolver solver(a);
  return largest_singular_value([&](std::span<const double> v) { return solver.solve(dt, v); },
                                [&](std::span<const double> v) { return solver.solve_transpose(dt, v); }, n, n,
                                options.power);
}

double operator_norm(const SparseMatrix& a, const BoundOptions& options) {
  if (std::max(a.rows(), a.cols()) <= options.dense_threshold) return thin_svd(a.to_dense()).sigma.front();
  return largest_singular_value([&](std::span<const double> v) { return a.multiply(v); },
                                [&](std::span<const double> v) { return a.multiply_transpose(v); }, a.cols(),
                                a.rows(), options.power);
}

double st_inverse_norm(const LinearDynamicalSystem& sys, const TimeGrid& grid, const BoundOptions& options) {
  SpaceTimeOperator op(sys, grid);
  const std::size_t n = op.dim();
  if (n <= options.dense_threshold) {
    const SpaceTimeSystem st = assemble_st(sys, grid, n);
    const Vector sigma = thin_svd(st.A_st.to_dense()).sigma;
    return 1.0 / sigma.back();
  }
  return largest_singular_value([&](std::span<const double> v) { return op.apply_inverse(v); },
                                [&](std::span<const double> v) { return op.apply_inverse_adjoint(v); }, n, n,
                                options.power);
}

Vector stability_chain(std::span<const double> constants, std::span<const double> driving) {
  if (constants.size() != driving.size()) throw DimensionError("stability_chain: length mismatch");
  // b_k = c_k (b_{k-1} + d_k) expands to the sum of products
  Vector out(constants.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < constants.size(); ++k) {
    acc = constants[k] * (acc + driving[k]);
    out[k] = acc;
  }
  return out;
}

BoundReport bound_theorem1(const LinearDynamicalSystem& sys, const TimeGrid& grid, const DenseMatrix& approx,
                           const BoundOptions& options) {
  check_states(sys, grid, approx, "bound_theorem1");
  BoundReport rep;
  rep.driving_norms = step_residual_norms(sys, grid, approx);
  std::map<double, double> cache;
  rep.stability.resize(grid.steps());
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    const double dt = grid.dt(k);
    auto it = cache.find(dt);
    if (it == cache.end()) it = cache.emplace(dt, step_inverse_norm(sys.A, dt, options)).first;
    rep.stability[k] = it->second;
  }
  rep.bound = stability_chain(rep.stability, rep.driving_norms);
  rep.st_bound = max_of(rep.bound);
  return rep;
}

BoundReport bound_theorem2(const LinearDynamicalSystem& sys, const TimeGrid& grid, const DenseMatrix& approx,
                           const BoundOptions& options) {
  check_states(sys, grid, approx, "bound_theorem2");
  const double norm_a = operator_norm(sys.A, options);
  BoundReport rep;
  rep.stability.resize(grid.steps());
  rep.driving_norms.resize(grid.steps());
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    const double dt = grid.dt(k);
    if (!(dt * norm_a < 1.0)) {
      std::ostringstream msg;
      msg << "bound_theorem2: the spatial-ROM bound assumes dt < 1/||A||_2 = " << 1.0 / norm_a << ", but step "
          << k << " has dt = " << dt;
      throw PreconditionError(msg.str());
    }
    rep.stability[k] = 1.0 / (1.0 - dt * norm_a);
    Vector w = sys.A.multiply(approx.col(k));
    axpy(1.0, sys.B.multiply(sys.input.at(k)), w);
    rep.driving_norms[k] = dt * norm2(w);
  }
  rep.bound = stability_chain(rep.stability, rep.driving_norms);
  rep.st_bound = max_of(rep.bound);
  return rep;
}

BoundReport bound_theorem3(const LinearDynamicalSystem& sys, const TimeGrid& grid, std::span<const double> approx_st,
                           const BoundOptions& options) {
  if (approx_st.size() != sys.state_dim() * grid.steps())
    throw DimensionError("bound_theorem3: space-time vector must have N_s * N_t entries");
  return bound_theorem3(sys, grid, unstack_states(approx_st, sys.state_dim()), options);
}

BoundReport bound_theorem3(const LinearDynamicalSystem& sys, const TimeGrid& grid, const DenseMatrix& approx,
                           const BoundOptions& options) {
  check_states(sys, grid, approx, "bound_theorem3");
  BoundReport rep;
  rep.driving_norms = step_residual_norms(sys, grid, approx);
  rep.inverse_norm = st_inverse_norm(sys, grid, options);
  rep.st_bound = std::sqrt(static_cast<double>(grid.steps())) * rep.inverse_norm * max_of(rep.driving_norms);
  rep.bound.assign(grid.steps(), rep.st_bound);
  return rep;
}

void attach_errors(BoundReport& report, const DenseMatrix& reference, const DenseMatrix& approx) {
  if (reference.rows() != approx.rows() || reference.cols() != approx.cols())
    throw DimensionError("attach_errors: reference and approximate states differ in shape");
  if (report.bound.size() != approx.cols()) throw DimensionError("attach_errors: report has the wrong step count");
  report.has_reference = true;
  report.error.resize(approx.cols());
  Vector diff(approx.rows());
  for (std::size_t k = 0; k < approx.cols(); ++k) {
    const auto x = reference.col(k);
    const auto y = approx.col(k);
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = x[i] - y[i];
    report.error[k] = norm2(diff);
  }
  report.st_error = max_of(report.error);
  report.valid = true;
  for (std::size_t k = 0; k < approx.cols(); ++k) {
    const double slack = 1e-12 * std::max({1.0, report.bound[k], norm2(reference.col(k))});
    if (!(report.bound[k] + slack >= report.error[k])) report.valid = false;
  }
}

}  // namespace strom
