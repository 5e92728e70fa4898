#pragma once

// Galerkin spatial reduced-order model: x(t) ~ x_ref + Phi_s xhat(t).

#include <string>

#include "strom/basis.hpp"
#include "strom/system.hpp"

namespace strom {

enum class RefMode {
  zero,           // x_ref = 0
  initial_state,  // x_ref = x0, so xhat_0 = 0 for every parameter
};

RefMode parse_ref_mode(const std::string& name);
std::string to_string(RefMode mode);

struct SpatialRom {
  DenseMatrix Phi_s;   // N_s x n_s (copy of the spatial basis)
  DenseMatrix A_hat;   // Phi^T A Phi
  DenseMatrix B_hat;   // Phi^T B
  DenseMatrix C_hat;   // Phi^T C
  Vector x_ref;        // N_s
  Vector x_ref_hat;    // Phi^T A x_ref
  Vector x0_hat;       // Phi^T (x0 - x_ref)
  Vector x0_proj;      // Phi^T x0, the reduced initial state with no reference shift
  Vector C_x_ref;      // C^T x_ref, the constant output offset
  RefMode ref_mode = RefMode::initial_state;
  InputSignal input;

  std::size_t reduced_dim() const noexcept { return A_hat.rows(); }
};

SpatialRom build_spatial_rom(const LinearDynamicalSystem& sys, const DenseMatrix& Phi_s,
                             RefMode ref_mode = RefMode::initial_state);
inline SpatialRom build_spatial_rom(const LinearDynamicalSystem& sys, const BasisSet& basis,
                                    RefMode ref_mode = RefMode::initial_state) {
  return build_spatial_rom(sys, basis.Phi_s, ref_mode);
}

/// Reduced backward-Euler march; column k holds xhat_{k+1}.
DenseMatrix srom_march(const SpatialRom& rom, const TimeGrid& grid);

/// y_k = C_hat^T xhat_k + C^T x_ref
Vector srom_output(const SpatialRom& rom, std::span<const double> x_hat_k);

/// Full-order reconstruction x_ref + Phi_s xhat_k of every column.
DenseMatrix srom_reconstruct(const SpatialRom& rom, const DenseMatrix& x_hat);

}  // namespace strom
