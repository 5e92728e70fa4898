#pragma once

// Parametric linear dynamical systems  dx/dt = A x + B f(t),  y = C^T x,
// their backward-Euler full-order march, and the equivalent space-time
// (all time steps at once) formulation used for verification and for the
// space-time error bound.
//
// Indexing: step k = 0 .. N_t-1 advances x_k -> x_{k+1}; column k of a state
// matrix holds x_{k+1}, grid.dt(k) is its step size and the input at that
// step is input.at(k). The initial state x_0 is never stored as a column.

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "strom/linalg.hpp"

namespace strom {

/// Named parameter values (the point mu of the parameter domain).
struct ParamPoint {
  std::vector<std::string> names;
  Vector values;

  std::size_t size() const noexcept { return values.size(); }
  std::optional<double> find(const std::string& name) const;
  double get(const std::string& name, double fallback) const;
  void validate() const;
};

/// Step sizes of a (possibly non-uniform) time grid.
class TimeGrid {
 public:
  TimeGrid() = default;
  explicit TimeGrid(Vector dt);
  static TimeGrid uniform(double dt, std::size_t steps);

  std::size_t steps() const noexcept { return dt_.size(); }
  double dt(std::size_t k) const { return dt_.at(k); }
  std::span<const double> step_sizes() const noexcept { return dt_; }
  /// t_{k+1} = dt(0) + ... + dt(k)
  double time_after(std::size_t k) const;
  double final_time() const;
  bool is_uniform() const noexcept;

 private:
  Vector dt_;
};

/// Input signal f_k. Constant by default.
class InputSignal {
 public:
  using Function = std::function<Vector(std::size_t)>;

  InputSignal() = default;
  static InputSignal constant(Vector f);
  static InputSignal from_function(std::size_t dim, Function fn);

  bool is_constant() const noexcept { return !fn_; }
  std::size_t dim() const noexcept { return dim_; }
  /// Input at step k (0-based).
  Vector at(std::size_t k) const;
  const Vector& constant_value() const;

 private:
  std::size_t dim_ = 0;
  Vector constant_;
  Function fn_;
};

struct LinearDynamicalSystem {
  SparseMatrix A;  // N_s x N_s
  SparseMatrix B;  // N_s x N_i
  DenseMatrix C;   // N_s x N_o
  Vector x0;       // N_s
  InputSignal input;
  ParamPoint param;

  std::size_t state_dim() const noexcept { return A.rows(); }
  std::size_t input_dim() const noexcept { return B.cols(); }
  std::size_t output_dim() const noexcept { return C.cols(); }

  /// Dimension and finiteness checks; throws DimensionError/PreconditionError.
  void validate() const;
};

/// Solves (I - dt A) x = b with a sparse direct factorisation that is cached
/// for the most recent step size (uniform grids factorise once). Transposed
/// solves use a separate cached factorisation.
class BackwardEulerSolver {
 public:
  explicit BackwardEulerSolver(const SparseMatrix& a);
  ~BackwardEulerSolver();
  BackwardEulerSolver(BackwardEulerSolver&&) noexcept;
  BackwardEulerSolver& operator=(BackwardEulerSolver&&) noexcept;

  Vector solve(double dt, std::span<const double> rhs);
  /// Solves (I - dt A)^T x = b.
  Vector solve_transpose(double dt, std::span<const double> rhs);

  std::size_t factorizations() const noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Relative residual required of every step solve.
inline constexpr double kStepSolveTolerance = 1e-10;

Vector backward_euler_step(const LinearDynamicalSystem& sys, double dt, std::span<const double> x_prev,
                           std::span<const double> f_k);

struct FomResult {
  DenseMatrix states;   // N_s x N_t
  DenseMatrix outputs;  // N_o x N_t
  double wall_seconds = 0.0;
  double cpu_seconds = 0.0;
};

FomResult fom_march(const LinearDynamicalSystem& sys, const TimeGrid& grid);

/// Explicit space-time system (verification scale only).
struct SpaceTimeSystem {
  SparseMatrix A_st;  // N_s N_t square, lower block bidiagonal
  Vector f_st;        // stacks dt_k B f_k
  Vector x0_st;       // (x0, 0, ..., 0)
};

inline constexpr std::size_t kDefaultSpaceTimeCap = 20000;

/// Refuses (CapExceededError) when N_s * N_t exceeds `cap`.
SpaceTimeSystem assemble_st(const LinearDynamicalSystem& sys, const TimeGrid& grid,
                            std::size_t cap = kDefaultSpaceTimeCap);

/// Matrix-free space-time operator: inverse applies by time marching and the
/// block-wise residual. Holds references to `sys` and `grid`.
class SpaceTimeOperator {
 public:
  SpaceTimeOperator(const LinearDynamicalSystem& sys, const TimeGrid& grid);

  std::size_t dim() const noexcept { return sys_->state_dim() * grid_->steps(); }

  /// (A^st)^{-1} v by forward block substitution.
  Vector apply_inverse(std::span<const double> v);
  /// (A^st)^{-T} w by reverse-time substitution with A^T.
  Vector apply_inverse_adjoint(std::span<const double> w);
  /// A^st x - f^st - x0^st, block-wise.
  Vector residual(std::span<const double> x_st) const;

 private:
  const LinearDynamicalSystem* sys_;
  const TimeGrid* grid_;
  BackwardEulerSolver solver_;
};

Vector st_apply_inverse(const LinearDynamicalSystem& sys, const TimeGrid& grid, std::span<const double> v);
Vector st_apply_inverse_adjoint(const LinearDynamicalSystem& sys, const TimeGrid& grid,
                                std::span<const double> w);

/// r_k = x_k - x_prev - dt A x_k - dt B f_k
Vector step_residual(const LinearDynamicalSystem& sys, double dt, std::span<const double> x_k,
                     std::span<const double> x_prev, std::span<const double> f_k);

Vector st_residual(const LinearDynamicalSystem& sys, const TimeGrid& grid, std::span<const double> x_st);

/// Per-step residual norms ||r_k(x_k, x_{k-1})||_2 of a state history, with
/// x_0 taken from the system.
Vector step_residual_norms(const LinearDynamicalSystem& sys, const TimeGrid& grid, const DenseMatrix& states);

/// Stacks state columns into the space-time vector (x_1; ...; x_Nt) and back.
Vector stack_states(const DenseMatrix& states);
DenseMatrix unstack_states(std::span<const double> x_st, std::size_t state_dim);

/// Largest eigenvalue of the symmetric part (A + A^T)/2 by shifted power
/// iteration; negative means A is dissipative (and hence stable).
double symmetric_part_max_eigenvalue(const SparseMatrix& a, const PowerIterationOptions& options = {});

/// Snapshot matrix of several simulations: columns ordered parameter-major,
/// then time.
DenseMatrix concatenate_snapshots(const std::vector<DenseMatrix>& simulations);

}  // namespace strom
