#pragma once

// Streaming (rank-one update) SVD of a snapshot stream, the batch POD it
// replaces, and the split of the final right singular vectors into per-mode
// temporal snapshot matrices from which the temporal bases are taken.

#include <cstddef>
#include <limits>
#include <vector>

#include "strom/linalg.hpp"

namespace strom {

enum class MaxRankPolicy {
  reinitialize,  // restart from the incoming column when r reaches r_max
  reject,        // stop growing: columns arriving at r = r_max are skipped
};

struct IsvdOptions {
  double tol_svd = 2e-8;  // linear-dependence / initial-norm threshold
  double tol_sv = 1e-14;  // trailing singular values below this are dropped
  std::size_t max_rank = std::numeric_limits<std::size_t>::max();
  MaxRankPolicy at_max_rank = MaxRankPolicy::reinitialize;
};

struct IsvdCounters {
  std::size_t rejected = 0;           // columns dropped by the initial norm test
  std::size_t dependent = 0;          // columns folded in without rank growth
  std::size_t truncations = 0;        // trailing singular values dropped
  std::size_t reorthogonalizations = 0;
  std::size_t reinitializations = 0;  // restarts at r = r_max
};

/// Running factorisation Phi diag(sigma) V^T of the k columns seen so far.
/// V always has k rows (one per ingested column, rejected ones included).
struct SvdState {
  DenseMatrix Phi;    // N_s x r
  Vector sigma;       // r, non-increasing
  DenseMatrix V;      // k x r
  std::size_t k = 0;  // columns ingested
  std::size_t state_dim = 0;
  IsvdOptions options;
  IsvdCounters counters;

  std::size_t rank() const noexcept { return sigma.size(); }
};

/// Starts a factorisation from a first column, which becomes column `k` of
/// the stream (earlier columns, if any, were all rejected and count as zero).
SvdState isvd_init(std::span<const double> x, const IsvdOptions& options, std::size_t k = 1);

/// Folds one more column into the factorisation.
SvdState isvd_update(SvdState state, std::span<const double> x);

/// Empty state ready to receive columns of length `state_dim`.
SvdState isvd_empty(std::size_t state_dim, const IsvdOptions& options);

/// Folds the time-step columns of one simulation, left to right.
SvdState ingest_simulation(SvdState state, const DenseMatrix& states);

struct PodResult {
  DenseMatrix Phi_s;  // N_s x n_s
  Vector sigma;       // all singular values of U
  DenseMatrix V;      // right singular vectors
};

/// Batch POD of a full snapshot matrix; the oracle for the incremental path.
PodResult batch_pod(const DenseMatrix& snapshots, std::size_t n_s, double rank_tol = 0.0);

/// Temporal snapshot matrix of spatial mode `mode`: column p is the N_t-long
/// slice p of column `mode` of V.
DenseMatrix temporal_snapshots(const DenseMatrix& V, std::size_t mode, std::size_t n_time, std::size_t n_mu);

struct BasisSet {
  DenseMatrix Phi_s;                  // N_s x n_s
  std::vector<DenseMatrix> temporal;  // n_s matrices, each N_t x n_t
  std::size_t n_s = 0;
  std::size_t n_t = 0;
  std::size_t n_time = 0;  // N_t
  std::size_t n_mu = 0;

  std::size_t state_dim() const noexcept { return Phi_s.rows(); }
  /// Temporal basis element Psi_i(k, j).
  double psi(std::size_t mode, std::size_t step, std::size_t j) const { return temporal[mode](step, j); }
};

/// Spatial basis = leading n_s left singular vectors; temporal basis of mode i
/// = leading n_t left singular vectors of its temporal snapshot matrix.
BasisSet build_basis_set(const SvdState& state, std::size_t n_s, std::size_t n_t, std::size_t n_time,
                         std::size_t n_mu);

/// Same construction from an explicit factorisation (used by the batch path).
BasisSet build_basis_set(const DenseMatrix& Phi, const DenseMatrix& V, std::size_t n_s, std::size_t n_t,
                         std::size_t n_time, std::size_t n_mu);

}  // namespace strom
