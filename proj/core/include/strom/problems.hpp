#pragma once

// Deterministic generators of stable linear dynamical systems.
//
//  heat1d       kappa u_xx on n_x interior nodes of [0, 1], Dirichlet-zero ends.
//  advdiff2d    kappa (u_xx + u_yy) - v . grad u on an n_x x n_y interior grid of
//               the unit square, first-order upwind advection, Dirichlet-zero.
//  transport1d  mono-energetic slab discrete ordinates with isotropic
//               scattering and vacuum boundaries:
//               dpsi/dt = nu (L+ Sigma_s L - H) psi + nu q,  H = C + Sigma.
//
// Parameter points override the matching named coefficients of the spec
// ("kappa", "vx", "vy", "sigma_t", "sigma_s", "nu", "q").

#include <cstddef>
#include <string>
#include <utility>

#include "strom/system.hpp"

namespace strom {

enum class ProblemKind { heat1d, advdiff2d, transport1d };

ProblemKind parse_problem_kind(const std::string& name);
std::string to_string(ProblemKind kind);

struct ProblemSpec {
  ProblemKind kind = ProblemKind::heat1d;

  std::size_t nx = 32;  // heat1d, advdiff2d
  std::size_t ny = 32;  // advdiff2d
  std::size_t nz = 20;  // transport1d zones
  std::size_t nd = 4;   // transport1d directions (even)

  double kappa = 1.0;
  double vx = 0.0;
  double vy = 0.0;

  double length = 1.0;   // transport1d slab width
  Vector sigma_t{1.0};   // per zone, or a single uniform value
  Vector sigma_s{0.5};   // per zone, or a single uniform value
  double nu = 1.0;       // particle speed
  double q = 1.0;        // source strength (the constant input value)

  /// Source occupies [source_lo, source_hi] (fraction of the domain, heat1d
  /// and transport1d) and is centred at (blob_x, blob_y) with width blob_width
  /// for advdiff2d.
  double source_lo = 0.25;
  double source_hi = 0.75;
  double blob_x = 0.3;
  double blob_y = 0.3;
  double blob_width = 0.08;

  /// Amplitude of a smooth bump used as x0; zero gives x0 = 0.
  double x0_amplitude = 0.0;

  void validate() const;
  std::size_t state_dim() const;
};

LinearDynamicalSystem make_heat1d(const ProblemSpec& spec, const ParamPoint& param);
LinearDynamicalSystem make_advdiff2d(const ProblemSpec& spec, const ParamPoint& param);
LinearDynamicalSystem make_transport1d(const ProblemSpec& spec, const ParamPoint& param);
/// Dispatches on spec.kind.
LinearDynamicalSystem make_system(const ProblemSpec& spec, const ParamPoint& param);

/// Gauss-Legendre nodes on (-1, 1) in increasing order, with weights scaled to
/// sum to one (unit total measure of the direction set).
std::pair<Vector, Vector> gauss_legendre_normalized(std::size_t n);

/// Zone-major index of unknown psi_{zone, direction} in transport1d.
inline std::size_t transport_index(std::size_t zone, std::size_t direction, std::size_t directions) {
  return zone * directions + direction;
}

}  // namespace strom
