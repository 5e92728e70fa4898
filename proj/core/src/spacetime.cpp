#include "strom/spacetime.hpp"

#include <sstream>

#include "strom/error.hpp"

namespace strom {

namespace {

void check_grid(const TemporalDiag& diag, const TimeGrid& grid, const char* where) {
  if (grid.steps() != diag.n_time()) {
    std::ostringstream msg;
    msg << where << ": time grid has " << grid.steps() << " steps, temporal basis has N_t = " << diag.n_time();
    throw DimensionError(msg.str());
  }
}

}  // namespace

TemporalDiag::TemporalDiag(const BasisSet& basis)
    : n_s_(basis.n_s), n_t_(basis.n_t), n_time_(basis.n_time), data_(basis.n_s * basis.n_t * basis.n_time) {
  if (basis.temporal.size() != n_s_) throw DimensionError("TemporalDiag: expected one temporal basis per spatial mode");
  for (std::size_t i = 0; i < n_s_; ++i) {
    const DenseMatrix& psi = basis.temporal[i];
    if (psi.rows() != n_time_ || psi.cols() != n_t_) {
      std::ostringstream msg;
      msg << "TemporalDiag: temporal basis " << i << " is " << psi.rows() << "x" << psi.cols() << ", expected "
          << n_time_ << "x" << n_t_;
      throw DimensionError(msg.str());
    }
    for (std::size_t j = 0; j < n_t_; ++j)
      for (std::size_t k = 0; k < n_time_; ++k) data_[(j * n_time_ + k) * n_s_ + i] = psi(k, j);
  }
}

Vector temporal_diag(const BasisSet& basis, std::size_t k, std::size_t j) {
  if (k >= basis.n_time || j >= basis.n_t) {
    std::ostringstream msg;
    msg << "temporal_diag: (k, j) = (" << k << ", " << j << ") outside N_t = " << basis.n_time
        << ", n_t = " << basis.n_t;
    throw PreconditionError(msg.str());
  }
  Vector d(basis.n_s);
  for (std::size_t i = 0; i < basis.n_s; ++i) d[i] = basis.psi(i, k, j);
  return d;
}

DenseMatrix build_st_matrix(const DenseMatrix& A_hat, const TemporalDiag& diag, const TimeGrid& grid) {
  check_grid(diag, grid, "build_st_matrix");
  const std::size_t ns = diag.n_s();
  const std::size_t nt = diag.n_t();
  const std::size_t N = diag.n_time();
  if (A_hat.rows() != ns || A_hat.cols() != ns) throw DimensionError("build_st_matrix: A_hat must be n_s x n_s");

  DenseMatrix out(ns * nt, ns * nt);
  DenseMatrix weight(ns, ns);  // sum_k dt_k d_k^{j'}(a) d_k^{j}(b)
  Vector mass(ns);             // sum_k d_k^{j'} d_k^{j}
  Vector shift(ns);            // sum_{k < N-1} d_{k+1}^{j'} d_k^{j}
  for (std::size_t jb = 0; jb < nt; ++jb) {
    for (std::size_t ja = 0; ja < nt; ++ja) {
      std::fill(weight.data(), weight.data() + weight.size(), 0.0);
      std::fill(mass.begin(), mass.end(), 0.0);
      std::fill(shift.begin(), shift.end(), 0.0);
      for (std::size_t k = 0; k < N; ++k) {
        const auto da = diag.diag(k, ja);
        const auto db = diag.diag(k, jb);
        const double dt = grid.dt(k);
        for (std::size_t b = 0; b < ns; ++b) {
          const double sb = dt * db[b];
          auto w = weight.col(b);
          for (std::size_t a = 0; a < ns; ++a) w[a] += da[a] * sb;
        }
        for (std::size_t i = 0; i < ns; ++i) mass[i] += da[i] * db[i];
        if (k + 1 < N) {
          const auto dnext = diag.diag(k + 1, ja);
          for (std::size_t i = 0; i < ns; ++i) shift[i] += dnext[i] * db[i];
        }
      }
      for (std::size_t b = 0; b < ns; ++b)
        for (std::size_t a = 0; a < ns; ++a) out(ja * ns + a, jb * ns + b) = -A_hat(a, b) * weight(a, b);
      for (std::size_t i = 0; i < ns; ++i) out(ja * ns + i, jb * ns + i) += mass[i] - shift[i];
    }
  }
  return out;
}

DenseMatrix build_st_matrix(const SpatialRom& srom, const BasisSet& basis, const TimeGrid& grid) {
  return build_st_matrix(srom.A_hat, TemporalDiag(basis), grid);
}

Vector build_st_input(const DenseMatrix& B_hat, const TemporalDiag& diag, const TimeGrid& grid,
                      const InputSignal& input, InputPath path) {
  check_grid(diag, grid, "build_st_input");
  const std::size_t ns = diag.n_s();
  const std::size_t nt = diag.n_t();
  const std::size_t N = diag.n_time();
  if (B_hat.rows() != ns || B_hat.cols() != input.dim())
    throw DimensionError("build_st_input: B_hat shape does not match n_s and the input dimension");
  if (path == InputPath::automatic) path = input.is_constant() ? InputPath::constant : InputPath::general;
  if (path == InputPath::constant && !input.is_constant())
    throw PreconditionError("build_st_input: constant path requested for a time-varying input");

  Vector out(ns * nt, 0.0);
  if (path == InputPath::constant) {
    const Vector bf = matvec(B_hat, input.constant_value());
    for (std::size_t j = 0; j < nt; ++j) {
      Vector scale(ns, 0.0);
      for (std::size_t k = 0; k < N; ++k) axpy(grid.dt(k), diag.diag(k, j), scale);
      for (std::size_t i = 0; i < ns; ++i) out[j * ns + i] = scale[i] * bf[i];
    }
    return out;
  }
  for (std::size_t k = 0; k < N; ++k) {
    const Vector bf = matvec(B_hat, input.at(k));
    const double dt = grid.dt(k);
    for (std::size_t j = 0; j < nt; ++j) {
      const auto d = diag.diag(k, j);
      for (std::size_t i = 0; i < ns; ++i) out[j * ns + i] += dt * d[i] * bf[i];
    }
  }
  return out;
}

Vector build_st_input(const SpatialRom& srom, const BasisSet& basis, const TimeGrid& grid,
                      const InputSignal& input, InputPath path) {
  return build_st_input(srom.B_hat, TemporalDiag(basis), grid, input, path);
}

Vector build_st_init(std::span<const double> x0_hat, const TemporalDiag& diag) {
  const std::size_t ns = diag.n_s();
  if (x0_hat.size() != ns) throw DimensionError("build_st_init: x0_hat must have n_s entries");
  if (diag.n_time() == 0) throw PreconditionError("build_st_init: empty temporal basis");
  // x0^st is non-zero only in time block 1, so only E_1^(j) survives the projection
  Vector out(ns * diag.n_t(), 0.0);
  for (std::size_t j = 0; j < diag.n_t(); ++j) {
    const auto d = diag.diag(0, j);
    for (std::size_t i = 0; i < ns; ++i) out[j * ns + i] = d[i] * x0_hat[i];
  }
  return out;
}

Vector build_st_init(const SpatialRom& srom, const BasisSet& basis) {
  return build_st_init(srom.x0_hat, TemporalDiag(basis));
}

SpaceTimeRom build_space_time_rom(const SpatialRom& srom, const BasisSet& basis, const TimeGrid& grid) {
  if (srom.reduced_dim() != basis.n_s) throw DimensionError("build_space_time_rom: spatial ROM and basis disagree on n_s");
  const TemporalDiag diag(basis);
  SpaceTimeRom rom;
  rom.n_s = basis.n_s;
  rom.n_t = basis.n_t;
  rom.A_st_hat = build_st_matrix(srom.A_hat, diag, grid);
  rom.f_st_hat = build_st_input(srom.B_hat, diag, grid, srom.input);
  rom.x0_st_hat = build_st_init(srom.x0_proj, diag);
  return rom;
}

Vector solve_strom(const SpaceTimeRom& rom) {
  Vector rhs = rom.f_st_hat;
  if (rom.x0_st_hat.size() != rhs.size() || rom.A_st_hat.rows() != rhs.size())
    throw DimensionError("solve_strom: operator sizes disagree");
  for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += rom.x0_st_hat[i];
  try {
    return DenseLu(rom.A_st_hat).solve(rhs);
  } catch (const SingularMatrixError& e) {
    std::ostringstream msg;
    msg << "solve_strom: reduced space-time matrix is singular at pivot " << e.pivot()
        << "; try a smaller n_s * n_t (currently " << rom.n_s << " * " << rom.n_t << ")";
    throw SingularMatrixError(msg.str(), e.pivot());
  }
}

Vector reconstruct(const BasisSet& basis, std::span<const double> x_hat_st, std::size_t k) {
  const std::size_t ns = basis.n_s;
  if (x_hat_st.size() != ns * basis.n_t) throw DimensionError("reconstruct: coefficient vector must have n_s * n_t entries");
  if (k >= basis.n_time) throw PreconditionError("reconstruct: step index outside the time grid");
  Vector coef(ns, 0.0);
  for (std::size_t j = 0; j < basis.n_t; ++j)
    for (std::size_t i = 0; i < ns; ++i) coef[i] += basis.psi(i, k, j) * x_hat_st[j * ns + i];
  return matvec(basis.Phi_s, coef);
}

DenseMatrix reconstruct_all(const BasisSet& basis, std::span<const double> x_hat_st) {
  const std::size_t ns = basis.n_s;
  if (x_hat_st.size() != ns * basis.n_t)
    throw DimensionError("reconstruct_all: coefficient vector must have n_s * n_t entries");
  // coefficients for every step, then one dense product
  DenseMatrix coef(ns, basis.n_time);
  for (std::size_t k = 0; k < basis.n_time; ++k)
    for (std::size_t j = 0; j < basis.n_t; ++j)
      for (std::size_t i = 0; i < ns; ++i) coef(i, k) += basis.psi(i, k, j) * x_hat_st[j * ns + i];
  return basis.Phi_s * coef;
}

DenseMatrix explicit_st_basis(const BasisSet& basis, std::size_t cap) {
  const std::size_t rows = basis.state_dim() * basis.n_time;
  if (rows > cap) {
    std::ostringstream msg;
    msg << "explicit_st_basis: N_s * N_t = " << rows << " exceeds the cap " << cap
        << "; the explicit basis is for verification on small problems only";
    throw CapExceededError(msg.str());
  }
  const std::size_t ns = basis.n_s;
  DenseMatrix out(rows, ns * basis.n_t);
  for (std::size_t j = 0; j < basis.n_t; ++j) {
    for (std::size_t i = 0; i < ns; ++i) {
      const DenseMatrix psi = DenseMatrix::from_columns(basis.n_time, basis.temporal[i].col(j));
      const DenseMatrix phi = DenseMatrix::from_columns(basis.state_dim(), basis.Phi_s.col(i));
      const DenseMatrix col = kron(psi, phi);
      std::copy(col.values().begin(), col.values().end(), out.col(j * ns + i).begin());
    }
  }
  return out;
}

}  // namespace strom
