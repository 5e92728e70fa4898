#include "strom/srom.hpp"

#include <memory>

#include "strom/error.hpp"

namespace strom {

RefMode parse_ref_mode(const std::string& name) {
  if (name == "zero") return RefMode::zero;
  if (name == "initial_state") return RefMode::initial_state;
  throw PreconditionError("unknown ref_mode '" + name + "' (expected zero or initial_state)");
}

std::string to_string(RefMode mode) { return mode == RefMode::zero ? "zero" : "initial_state"; }

SpatialRom build_spatial_rom(const LinearDynamicalSystem& sys, const DenseMatrix& Phi_s, RefMode ref_mode) {
  if (Phi_s.rows() != sys.state_dim())
    throw DimensionError("build_spatial_rom: basis has " + std::to_string(Phi_s.rows()) + " rows, system has N_s = " +
                         std::to_string(sys.state_dim()));
  SpatialRom rom;
  rom.Phi_s = Phi_s;
  rom.ref_mode = ref_mode;
  rom.input = sys.input;
  rom.A_hat = transpose_times(Phi_s, sys.A.multiply(Phi_s));
  rom.B_hat = sys.B.transpose_multiply(Phi_s).transpose();
  rom.C_hat = transpose_times(Phi_s, sys.C);
  rom.x_ref = ref_mode == RefMode::initial_state ? sys.x0 : Vector(sys.state_dim(), 0.0);
  rom.x_ref_hat = matvec_transpose(Phi_s, sys.A.multiply(rom.x_ref));
  rom.x0_proj = matvec_transpose(Phi_s, sys.x0);
  if (ref_mode == RefMode::initial_state) {
    rom.x0_hat.assign(Phi_s.cols(), 0.0);
  } else {
    rom.x0_hat = rom.x0_proj;
  }
  rom.C_x_ref = matvec_transpose(sys.C, rom.x_ref);
  return rom;
}

DenseMatrix srom_march(const SpatialRom& rom, const TimeGrid& grid) {
  if (grid.steps() == 0) throw PreconditionError("srom_march: empty time grid");
  const std::size_t n = rom.reduced_dim();
  DenseMatrix out(n, grid.steps());
  Vector x = rom.x0_hat;
  std::unique_ptr<DenseLu> lu;
  double factored_dt = 0.0;
  const bool constant_input = rom.input.is_constant();
  const Vector bf_const = constant_input ? matvec(rom.B_hat, rom.input.constant_value()) : Vector{};
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    const double dt = grid.dt(k);
    if (!lu || dt != factored_dt) {
      DenseMatrix step = DenseMatrix::identity(n);
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) step(i, j) -= dt * rom.A_hat(i, j);
      lu = std::make_unique<DenseLu>(step);
      factored_dt = dt;
    }
    const Vector bf = constant_input ? bf_const : matvec(rom.B_hat, rom.input.at(k));
    for (std::size_t i = 0; i < n; ++i) x[i] += dt * (bf[i] + rom.x_ref_hat[i]);
    x = lu->solve(x);
    std::copy(x.begin(), x.end(), out.col(k).begin());
  }
  return out;
}

Vector srom_output(const SpatialRom& rom, std::span<const double> x_hat_k) {
  Vector y = matvec_transpose(rom.C_hat, x_hat_k);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += rom.C_x_ref[i];
  return y;
}

DenseMatrix srom_reconstruct(const SpatialRom& rom, const DenseMatrix& x_hat) {
  DenseMatrix x = rom.Phi_s * x_hat;
  for (std::size_t k = 0; k < x.cols(); ++k) axpy(1.0, rom.x_ref, x.col(k));
  return x;
}

}  // namespace strom
