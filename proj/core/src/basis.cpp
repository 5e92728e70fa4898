#include "strom/basis.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <sstream>

#include "strom/error.hpp"

namespace strom {

namespace {

// [V 0; 0 1] * Vbar(:, 0:cols)
DenseMatrix extend_right(const DenseMatrix& v, std::size_t k_prev, const DenseMatrix& vbar, std::size_t cols) {
  const std::size_t r = vbar.rows() - 1;
  DenseMatrix out(k_prev + 1, cols);
  for (std::size_t c = 0; c < cols; ++c) {
    auto dst = out.col(c);
    for (std::size_t l = 0; l < r; ++l) {
      const double coef = vbar(l, c);
      if (coef == 0.0) continue;
      auto src = v.col(l);
      for (std::size_t i = 0; i < k_prev; ++i) dst[i] += coef * src[i];
    }
    dst[k_prev] = vbar(r, c);
  }
  return out;
}

void drop_last_triple(SvdState& s) {
  const std::size_t r = s.rank() - 1;
  s.sigma.resize(r);
  s.Phi.resize_cols(r);
  s.V.resize_cols(r);
}

}  // namespace

SvdState isvd_empty(std::size_t state_dim, const IsvdOptions& options) {
  SvdState s;
  s.state_dim = state_dim;
  s.options = options;
  s.Phi = DenseMatrix(state_dim, 0);
  s.V = DenseMatrix(0, 0);
  return s;
}

SvdState isvd_init(std::span<const double> x, const IsvdOptions& options, std::size_t k) {
  if (k == 0) throw PreconditionError("isvd_init: column index k is 1-based");
  SvdState s = isvd_empty(x.size(), options);
  s.k = k;
  const double nx = norm2(x);
  if (nx > options.tol_svd) {
    s.sigma = {nx};
    s.Phi = DenseMatrix(x.size(), 1);
    for (std::size_t i = 0; i < x.size(); ++i) s.Phi(i, 0) = x[i] / nx;
    // earlier (rejected) columns contribute zero rows
    s.V = DenseMatrix(k, 1);
    s.V(k - 1, 0) = 1.0;
  } else {
    s.V = DenseMatrix(k, 0);
    ++s.counters.rejected;
  }
  return s;
}

SvdState isvd_update(SvdState s, std::span<const double> x) {
  if (s.k == 0 && s.rank() == 0 && s.state_dim == 0) s.state_dim = x.size();
  if (x.size() != s.state_dim) {
    std::ostringstream msg;
    msg << "isvd_update: column has length " << x.size() << ", expected " << s.state_dim;
    throw DimensionError(msg.str());
  }
  const std::size_t r = s.rank();
  const auto restart = [&]() {
    SvdState fresh = isvd_init(x, s.options, s.k + 1);
    fresh.counters.rejected += s.counters.rejected;
    fresh.counters.dependent = s.counters.dependent;
    fresh.counters.truncations = s.counters.truncations;
    fresh.counters.reorthogonalizations = s.counters.reorthogonalizations;
    fresh.counters.reinitializations = s.counters.reinitializations;
    return fresh;
  };
  if (r == 0) return restart();
  if (r >= s.options.max_rank && s.options.at_max_rank == MaxRankPolicy::reinitialize) {
    if (s.counters.reinitializations == 0)
      std::clog << "warning: incremental SVD reached the rank cap " << s.options.max_rank
                << "; restarting from the incoming column and discarding the accumulated basis\n";
    ++s.counters.reinitializations;
    return restart();
  }

  // projection onto the current left singular space, with one re-projection
  // pass so the new direction is orthogonal to working precision
  Vector ell = matvec_transpose(s.Phi, x);
  Vector residual(x.begin(), x.end());
  {
    const Vector proj = matvec(s.Phi, ell);
    for (std::size_t i = 0; i < residual.size(); ++i) residual[i] -= proj[i];
    const Vector ell2 = matvec_transpose(s.Phi, residual);
    const Vector proj2 = matvec(s.Phi, ell2);
    for (std::size_t i = 0; i < residual.size(); ++i) residual[i] -= proj2[i];
    for (std::size_t i = 0; i < r; ++i) ell[i] += ell2[i];
  }
  const double p = norm2(residual);
  // at r = N_s nothing is left to span; any residual is rounding noise
  const bool dependent = p < s.options.tol_svd || p == 0.0 || r >= s.state_dim;

  DenseMatrix q(r + 1, r + 1);
  for (std::size_t i = 0; i < r; ++i) {
    q(i, i) = s.sigma[i];
    q(i, r) = ell[i];
  }
  q(r, r) = dependent ? 0.0 : p;
  const SvdResult small = thin_svd(q);

  const std::size_t k_prev = s.k;
  if (dependent) {
    s.Phi = s.Phi * small.W.block(0, 0, r, r);
    s.sigma.assign(small.sigma.begin(), small.sigma.begin() + static_cast<std::ptrdiff_t>(r));
    s.V = extend_right(s.V, k_prev, small.V, r);
    ++s.counters.dependent;
  } else {
    DenseMatrix bordered = s.Phi;
    for (double& v : residual) v /= p;
    bordered.append_col(residual);
    s.Phi = bordered * small.W;
    s.sigma = small.sigma;
    s.V = extend_right(s.V, k_prev, small.V, r + 1);
  }
  s.k = k_prev + 1;

  if (s.rank() > 0 && s.sigma.back() < s.options.tol_sv) {
    drop_last_triple(s);
    ++s.counters.truncations;
  }
  if (s.rank() > s.options.max_rank) {
    drop_last_triple(s);
    ++s.counters.truncations;
  }

  if (s.rank() >= 2) {
    const double drift = std::abs(dot(s.Phi.col(0), s.Phi.col(s.rank() - 1)));
    const double threshold =
        std::min(s.options.tol_svd, std::numeric_limits<double>::epsilon() * static_cast<double>(s.state_dim));
    if (drift > threshold) {
      s.Phi = qr(s.Phi).Q;
      ++s.counters.reorthogonalizations;
    }
  }
  return s;
}

SvdState ingest_simulation(SvdState state, const DenseMatrix& states) {
  if (state.state_dim == 0 && state.k == 0) state.state_dim = states.rows();
  if (states.rows() != state.state_dim) throw DimensionError("ingest_simulation: state length mismatch");
  for (std::size_t c = 0; c < states.cols(); ++c) state = isvd_update(std::move(state), states.col(c));
  return state;
}

PodResult batch_pod(const DenseMatrix& snapshots, std::size_t n_s, double rank_tol) {
  if (n_s == 0) throw PreconditionError("batch_pod: n_s must be at least 1");
  SvdResult svd = thin_svd(snapshots);
  const double threshold =
      rank_tol > 0.0 ? rank_tol
                     : (svd.sigma.empty() ? 0.0
                                          : svd.sigma.front() * std::numeric_limits<double>::epsilon() *
                                                static_cast<double>(std::max(snapshots.rows(), snapshots.cols())));
  const auto rank = static_cast<std::size_t>(
      std::count_if(svd.sigma.begin(), svd.sigma.end(), [&](double s) { return s > threshold; }));
  if (n_s > rank) {
    std::ostringstream msg;
    msg << "batch_pod: requested n_s = " << n_s << " but the snapshot matrix has numerical rank " << rank;
    throw PreconditionError(msg.str());
  }
  return {svd.W.left_cols(n_s), std::move(svd.sigma), std::move(svd.V)};
}

DenseMatrix temporal_snapshots(const DenseMatrix& V, std::size_t mode, std::size_t n_time, std::size_t n_mu) {
  if (V.rows() != n_time * n_mu) {
    std::ostringstream msg;
    msg << "temporal_snapshots: V has " << V.rows() << " rows, expected n_mu * N_t = " << n_mu * n_time;
    throw DimensionError(msg.str());
  }
  if (mode >= V.cols()) {
    std::ostringstream msg;
    msg << "temporal_snapshots: mode " << mode << " out of range (rank " << V.cols() << ")";
    throw PreconditionError(msg.str());
  }
  DenseMatrix t(n_time, n_mu);
  const auto v = V.col(mode);
  for (std::size_t p = 0; p < n_mu; ++p)
    for (std::size_t k = 0; k < n_time; ++k) t(k, p) = v[p * n_time + k];
  return t;
}

BasisSet build_basis_set(const DenseMatrix& Phi, const DenseMatrix& V, std::size_t n_s, std::size_t n_t,
                         std::size_t n_time, std::size_t n_mu) {
  const std::size_t r = Phi.cols();
  if (n_s == 0 || n_t == 0) throw PreconditionError("build_basis_set: n_s and n_t must be at least 1");
  if (n_s > r) {
    std::ostringstream msg;
    msg << "build_basis_set: n_s = " << n_s << " exceeds the available rank " << r;
    throw PreconditionError(msg.str());
  }
  if (n_t > std::min(n_time, n_mu)) {
    std::ostringstream msg;
    msg << "build_basis_set: n_t = " << n_t << " exceeds min(N_t, n_mu) = " << std::min(n_time, n_mu);
    throw PreconditionError(msg.str());
  }
  BasisSet b;
  b.Phi_s = Phi.left_cols(n_s);
  b.n_s = n_s;
  b.n_t = n_t;
  b.n_time = n_time;
  b.n_mu = n_mu;
  b.temporal.reserve(n_s);
  for (std::size_t i = 0; i < n_s; ++i) {
    const DenseMatrix t = temporal_snapshots(V, i, n_time, n_mu);
    b.temporal.push_back(thin_svd(t).W.left_cols(n_t));
  }
  return b;
}

BasisSet build_basis_set(const SvdState& state, std::size_t n_s, std::size_t n_t, std::size_t n_time,
                         std::size_t n_mu) {
  if (state.k != n_time * n_mu) {
    std::ostringstream msg;
    msg << "build_basis_set: " << state.k << " columns ingested, expected n_mu * N_t = " << n_time * n_mu;
    throw DimensionError(msg.str());
  }
  return build_basis_set(state.Phi, state.V, n_s, n_t, n_time, n_mu);
}

}  // namespace strom
