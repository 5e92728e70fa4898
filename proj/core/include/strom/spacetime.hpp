#pragma once

// Space-time Galerkin ROM assembled from its block structure.
//
// The space-time basis column i + n_s j is psi_i^j (x) phi_i. Row block k of
// the basis is Phi_s E_k^(j) with E_k^(j) = diag(Psi_1(k, j), ..., Psi_ns(k, j)),
// so every reduced operator reduces to sums over k of diagonal scalings of
// the spatial reduced operators; the N_s N_t x n_s n_t basis is never formed
// (explicit_st_basis exists for verification only).
//
// Reduced unknowns are ordered i + n_s j (mode fastest); block (j', j) of the
// reduced matrix is n_s x n_s.

#include <cstddef>

#include "strom/basis.hpp"
#include "strom/srom.hpp"
#include "strom/system.hpp"

namespace strom {

/// Diagonals of E_k^(j) for all (k, j), contiguous in i.
class TemporalDiag {
 public:
  explicit TemporalDiag(const BasisSet& basis);

  std::size_t n_s() const noexcept { return n_s_; }
  std::size_t n_t() const noexcept { return n_t_; }
  std::size_t n_time() const noexcept { return n_time_; }

  /// (Psi_1(k, j), ..., Psi_ns(k, j)); k and j are 0-based.
  std::span<const double> diag(std::size_t k, std::size_t j) const {
    return {data_.data() + (j * n_time_ + k) * n_s_, n_s_};
  }

 private:
  std::size_t n_s_ = 0;
  std::size_t n_t_ = 0;
  std::size_t n_time_ = 0;
  Vector data_;
};

/// Bounds-checked single diagonal.
Vector temporal_diag(const BasisSet& basis, std::size_t k, std::size_t j);

struct SpaceTimeRom {
  DenseMatrix A_st_hat;  // (n_s n_t)^2
  Vector f_st_hat;       // n_s n_t
  Vector x0_st_hat;      // n_s n_t
  std::size_t n_s = 0;
  std::size_t n_t = 0;
};

DenseMatrix build_st_matrix(const DenseMatrix& A_hat, const TemporalDiag& diag, const TimeGrid& grid);
DenseMatrix build_st_matrix(const SpatialRom& srom, const BasisSet& basis, const TimeGrid& grid);

enum class InputPath { automatic, general, constant };

/// Block j = sum_k dt_k E_k^(j) B_hat f_k. For constant inputs the automatic
/// path sums the scaled diagonals first and applies them to B_hat f once.
Vector build_st_input(const DenseMatrix& B_hat, const TemporalDiag& diag, const TimeGrid& grid,
                      const InputSignal& input, InputPath path = InputPath::automatic);
Vector build_st_input(const SpatialRom& srom, const BasisSet& basis, const TimeGrid& grid,
                      const InputSignal& input, InputPath path = InputPath::automatic);

/// Projection Phi_st^T (x0, 0, ..., 0): block j = E_1^(j) x0_hat.
Vector build_st_init(std::span<const double> x0_hat, const TemporalDiag& diag);
/// Uses the spatial ROM's reduced initial state as is.
Vector build_st_init(const SpatialRom& srom, const BasisSet& basis);

/// Assembles all three operators. The space-time path has no reference
/// state: the initial block uses Phi_s^T x0 whatever the spatial ref_mode.
SpaceTimeRom build_space_time_rom(const SpatialRom& srom, const BasisSet& basis, const TimeGrid& grid);

/// Solves A_st_hat xhat = f_st_hat + x0_st_hat.
Vector solve_strom(const SpaceTimeRom& rom);

/// x~_k = Phi_s sum_j E_k^(j) xhat^(j), for 0-based step k.
Vector reconstruct(const BasisSet& basis, std::span<const double> x_hat_st, std::size_t k);
/// All N_t reconstructed states as columns.
DenseMatrix reconstruct_all(const BasisSet& basis, std::span<const double> x_hat_st);

/// Explicit N_s N_t x n_s n_t space-time basis through Kronecker products.
/// Verification only; refuses above `cap` = N_s N_t.
DenseMatrix explicit_st_basis(const BasisSet& basis, std::size_t cap = kDefaultSpaceTimeCap);

}  // namespace strom
