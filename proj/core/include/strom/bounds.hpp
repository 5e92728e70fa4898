#pragma once

// A-posteriori error bounds for approximate backward-Euler trajectories.
//
// All three bounds assume the approximation starts exactly at x0 (so the
// spatial ROM should use ref_mode = initial_state). Approximate states are
// passed in the system's column convention: column k holds x~_{k+1}.
//
//   residual bound       ||e_k|| <= sum_{i<=k} (prod_{j=i..k} beta_j) ||r_i||,
//                        beta_j = ||(I - dt_j A)^{-1}||_2
//   spatial-ROM bound    ||e_k|| <= sum_{i<=k} (prod_{j=i..k} gamma_j) ||w_i||,
//                        gamma_j = 1 / (1 - dt_j ||A||_2), w_i = dt_i (A x~_i + B f_i)
//   space-time bound     max_k ||e_k|| <= sqrt(N_t) ||(A^st)^{-1}||_2 max_k ||r_k||

#include <cstddef>

#include "strom/linalg.hpp"
#include "strom/system.hpp"

namespace strom {

struct BoundOptions {
  PowerIterationOptions power;
  /// Dense SVD replaces power iteration when the operator dimension is at
  /// most this.
  std::size_t dense_threshold = 256;
};

struct BoundReport {
  Vector bound;           // per step (the space-time bound repeats its scalar)
  Vector stability;       // beta_k or gamma_k per step; empty for the space-time bound
  Vector driving_norms;   // ||r_k|| or ||w_k|| per step
  double st_bound = 0.0;  // space-time bound scalar (max_k bound_k for the others)
  double inverse_norm = 0.0;  // ||(A^st)^{-1}||_2 (space-time bound only)

  // filled by attach_errors
  bool has_reference = false;
  Vector error;           // ||x_k - x~_k|| per step
  double st_error = 0.0;  // max_k ||x_k - x~_k||
  bool valid = false;     // bound >= error everywhere, up to a 1e-12 relative slack
};

/// beta = ||(I - dt A)^{-1}||_2.
double step_inverse_norm(const SparseMatrix& a, double dt, const BoundOptions& options = {});
/// ||A||_2.
double operator_norm(const SparseMatrix& a, const BoundOptions& options = {});
/// ||(A^st)^{-1}||_2, matrix-free through forward and adjoint marches.
double st_inverse_norm(const LinearDynamicalSystem& sys, const TimeGrid& grid, const BoundOptions& options = {});

/// Product chain sum_{i<=k} (prod_{j=i..k} c_j) d_i for every k.
Vector stability_chain(std::span<const double> constants, std::span<const double> driving);

BoundReport bound_theorem1(const LinearDynamicalSystem& sys, const TimeGrid& grid, const DenseMatrix& approx,
                           const BoundOptions& options = {});
/// Refuses (PreconditionError) unless dt_k ||A||_2 < 1 at every step.
BoundReport bound_theorem2(const LinearDynamicalSystem& sys, const TimeGrid& grid, const DenseMatrix& approx,
                           const BoundOptions& options = {});
BoundReport bound_theorem3(const LinearDynamicalSystem& sys, const TimeGrid& grid, std::span<const double> approx_st,
                           const BoundOptions& options = {});
BoundReport bound_theorem3(const LinearDynamicalSystem& sys, const TimeGrid& grid, const DenseMatrix& approx,
                           const BoundOptions& options = {});

/// Measures ||x_k - x~_k|| against reference states and sets the validity flag.
void attach_errors(BoundReport& report, const DenseMatrix& reference, const DenseMatrix& approx);

}  // namespace strom
