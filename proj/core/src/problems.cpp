#include "strom/problems.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "strom/error.hpp"

namespace strom {

ProblemKind parse_problem_kind(const std::string& name) {
  if (name == "heat1d") return ProblemKind::heat1d;
  if (name == "advdiff2d") return ProblemKind::advdiff2d;
  if (name == "transport1d") return ProblemKind::transport1d;
  throw PreconditionError("unknown problem kind '" + name + "' (expected heat1d, advdiff2d or transport1d)");
}

std::string to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::heat1d: return "heat1d";
    case ProblemKind::advdiff2d: return "advdiff2d";
    case ProblemKind::transport1d: return "transport1d";
  }
  return "unknown";
}

namespace {

double zone_value(const Vector& values, std::size_t zone) {
  return values.size() == 1 ? values.front() : values.at(zone);
}

void check_zone_vector(const Vector& values, std::size_t zones, const char* name) {
  if (values.size() != 1 && values.size() != zones)
    throw PreconditionError(std::string("transport1d: ") + name + " needs 1 or n_z entries");
}

}  // namespace

void ProblemSpec::validate() const {
  switch (kind) {
    case ProblemKind::heat1d:
      if (nx < 2) throw PreconditionError("heat1d: nx must be at least 2");
      break;
    case ProblemKind::advdiff2d:
      if (nx < 2 || ny < 2) throw PreconditionError("advdiff2d: nx and ny must be at least 2");
      break;
    case ProblemKind::transport1d: {
      if (nz < 2) throw PreconditionError("transport1d: nz must be at least 2");
      if (nd < 2 || nd % 2 != 0) throw PreconditionError("transport1d: direction count must be even and >= 2");
      if (!(length > 0.0)) throw PreconditionError("transport1d: slab length must be positive");
      check_zone_vector(sigma_t, nz, "sigma_t");
      check_zone_vector(sigma_s, nz, "sigma_s");
      break;
    }
  }
  if (!(source_lo <= source_hi)) throw PreconditionError("problem: source_lo must not exceed source_hi");
}

std::size_t ProblemSpec::state_dim() const {
  switch (kind) {
    case ProblemKind::heat1d: return nx;
    case ProblemKind::advdiff2d: return nx * ny;
    case ProblemKind::transport1d: return nz * nd;
  }
  return 0;
}

LinearDynamicalSystem make_heat1d(const ProblemSpec& spec, const ParamPoint& param) {
  spec.validate();
  param.validate();
  const double kappa = param.get("kappa", spec.kappa);
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw PreconditionError("heat1d: kappa must be positive");
  const std::size_t n = spec.nx;
  const double h = 1.0 / static_cast<double>(n + 1);
  const double c = kappa / (h * h);

  std::vector<SparseMatrix::Triplet> a;
  std::vector<SparseMatrix::Triplet> b;
  LinearDynamicalSystem sys;
  sys.C = DenseMatrix(n, 1, 1.0 / static_cast<double>(n));
  sys.x0.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) a.push_back({i, i - 1, c});
    a.push_back({i, i, -2.0 * c});
    if (i + 1 < n) a.push_back({i, i + 1, c});
    const double x = static_cast<double>(i + 1) * h;
    if (x >= spec.source_lo && x <= spec.source_hi) b.push_back({i, 0, 1.0});
    sys.x0[i] = spec.x0_amplitude * std::sin(std::numbers::pi * x);
  }
  sys.A = SparseMatrix::from_triplets(n, n, std::move(a));
  sys.B = SparseMatrix::from_triplets(n, 1, std::move(b));
  sys.input = InputSignal::constant({param.get("q", spec.q)});
  sys.param = param;
  sys.validate();
  return sys;
}

LinearDynamicalSystem make_advdiff2d(const ProblemSpec& spec, const ParamPoint& param) {
  spec.validate();
  param.validate();
  const double kappa = param.get("kappa", spec.kappa);
  const double vx = param.get("vx", spec.vx);
  const double vy = param.get("vy", spec.vy);
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw PreconditionError("advdiff2d: kappa must be positive");
  if (!std::isfinite(vx) || !std::isfinite(vy)) throw PreconditionError("advdiff2d: velocity must be finite");

  const std::size_t nx = spec.nx;
  const std::size_t ny = spec.ny;
  const std::size_t n = nx * ny;
  const double hx = 1.0 / static_cast<double>(nx + 1);
  const double hy = 1.0 / static_cast<double>(ny + 1);
  const double dx = kappa / (hx * hx);
  const double dy = kappa / (hy * hy);
  const double ax = std::abs(vx) / hx;
  const double ay = std::abs(vy) / hy;

  std::vector<SparseMatrix::Triplet> a;
  a.reserve(5 * n);
  std::vector<SparseMatrix::Triplet> b;
  LinearDynamicalSystem sys;
  sys.C = DenseMatrix(n, 1, 0.0);
  sys.x0.assign(n, 0.0);
  const double two_w2 = 2.0 * spec.blob_width * spec.blob_width;
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      const std::size_t row = j * nx + i;
      // upwind: the neighbour the flow comes from carries the advective weight
      const double west = dx + (vx > 0.0 ? ax : 0.0);
      const double east = dx + (vx < 0.0 ? ax : 0.0);
      const double south = dy + (vy > 0.0 ? ay : 0.0);
      const double north = dy + (vy < 0.0 ? ay : 0.0);
      if (j > 0) a.push_back({row, row - nx, south});
      if (i > 0) a.push_back({row, row - 1, west});
      a.push_back({row, row, -2.0 * dx - 2.0 * dy - ax - ay});
      if (i + 1 < nx) a.push_back({row, row + 1, east});
      if (j + 1 < ny) a.push_back({row, row + nx, north});

      const double x = static_cast<double>(i + 1) * hx;
      const double y = static_cast<double>(j + 1) * hy;
      const double r2 = (x - spec.blob_x) * (x - spec.blob_x) + (y - spec.blob_y) * (y - spec.blob_y);
      const double blob = std::exp(-r2 / two_w2);
      if (blob > 1e-12) b.push_back({row, 0, blob});
      if (x > 0.5 && y > 0.5) sys.C(row, 0) = hx * hy;
      sys.x0[row] = spec.x0_amplitude * std::sin(std::numbers::pi * x) * std::sin(std::numbers::pi * y);
    }
  }
  sys.A = SparseMatrix::from_triplets(n, n, std::move(a));
  sys.B = SparseMatrix::from_triplets(n, 1, std::move(b));
  sys.input = InputSignal::constant({param.get("q", spec.q)});
  sys.param = param;
  sys.validate();
  return sys;
}

namespace {

// P_n(x) and P_n'(x) by the three-term recurrence.
std::pair<double, double> legendre(std::size_t n, double x) {
  double p0 = 1.0;
  double p1 = x;
  for (std::size_t k = 2; k <= n; ++k) {
    const double kk = static_cast<double>(k);
    const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
    p0 = p1;
    p1 = p2;
  }
  const double dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
  return {p1, dp};
}

}  // namespace

std::pair<Vector, Vector> gauss_legendre_normalized(std::size_t n) {
  if (n == 0) throw PreconditionError("gauss_legendre: need at least one node");
  if (n == 1) return {Vector{0.0}, Vector{1.0}};
  Vector nodes(n);
  Vector weights(n);
  for (std::size_t i = 0; i < n / 2; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(n, x);
      const double step = p / dp;
      x -= step;
      if (std::abs(step) < 1e-16) break;
    }
    const double dp = legendre(n, x).second;
    // standard weights sum to 2 on (-1, 1); halve them for unit measure
    const double w = 1.0 / ((1.0 - x * x) * dp * dp);
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    weights[i] = weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) {
    nodes[n / 2] = 0.0;
    const double dp = legendre(n, 0.0).second;
    weights[n / 2] = 1.0 / (dp * dp);
  }
  return {nodes, weights};
}

LinearDynamicalSystem make_transport1d(const ProblemSpec& spec, const ParamPoint& param) {
  spec.validate();
  param.validate();
  const std::size_t nz = spec.nz;
  const std::size_t nd = spec.nd;
  const double nu = param.get("nu", spec.nu);
  if (!(nu > 0.0) || !std::isfinite(nu)) throw PreconditionError("transport1d: particle speed must be positive");

  Vector sigma_t(nz);
  Vector sigma_s(nz);
  const auto st_override = param.find("sigma_t");
  const auto ss_override = param.find("sigma_s");
  for (std::size_t z = 0; z < nz; ++z) {
    sigma_t[z] = st_override.value_or(zone_value(spec.sigma_t, z));
    sigma_s[z] = ss_override.value_or(zone_value(spec.sigma_s, z));
    if (!(sigma_s[z] >= 0.0) || sigma_s[z] > sigma_t[z])
      throw PreconditionError("transport1d: need sigma_t >= sigma_s >= 0 in every zone");
  }

  const auto [mu, w] = gauss_legendre_normalized(nd);
  const double h = spec.length / static_cast<double>(nz);
  const std::size_t n = nz * nd;

  std::vector<SparseMatrix::Triplet> a;
  a.reserve(n * (nd + 1));
  std::vector<SparseMatrix::Triplet> b;
  LinearDynamicalSystem sys;
  sys.x0.assign(n, 0.0);
  sys.C = DenseMatrix(n, 1, 0.0);
  for (std::size_t z = 0; z < nz; ++z) {
    const double centre = (static_cast<double>(z) + 0.5) * h;
    const double frac = centre / spec.length;
    const bool in_source = frac >= spec.source_lo && frac <= spec.source_hi;
    for (std::size_t l = 0; l < nd; ++l) {
      const std::size_t row = transport_index(z, l, nd);
      const double stream = std::abs(mu[l]) / h;
      // -H = -(C_l + Sigma): upwind streaming, vacuum inflow at both faces
      if (mu[l] > 0.0 && z > 0) a.push_back({row, transport_index(z - 1, l, nd), nu * stream});
      if (mu[l] < 0.0 && z + 1 < nz) a.push_back({row, transport_index(z + 1, l, nd), nu * stream});
      // isotropic scattering L+ Sigma_s L: sigma_s times the weighted angular mean
      for (std::size_t lp = 0; lp < nd; ++lp) {
        double v = nu * sigma_s[z] * w[lp];
        if (lp == l) v -= nu * (stream + sigma_t[z]);
        if (v != 0.0 || lp == l) a.push_back({row, transport_index(z, lp, nd), v});
      }
      if (in_source) b.push_back({row, 0, nu});
      sys.C(row, 0) = w[l] * h;  // scalar flux integrated over the slab
      sys.x0[row] = spec.x0_amplitude * std::sin(std::numbers::pi * frac);
    }
  }
  sys.A = SparseMatrix::from_triplets(n, n, std::move(a));
  sys.B = SparseMatrix::from_triplets(n, 1, std::move(b));
  sys.input = InputSignal::constant({param.get("q", spec.q)});
  sys.param = param;
  sys.validate();
  return sys;
}

LinearDynamicalSystem make_system(const ProblemSpec& spec, const ParamPoint& param) {
  static const std::map<ProblemKind, std::vector<std::string>> accepted = {
      {ProblemKind::heat1d, {"kappa", "q"}},
      {ProblemKind::advdiff2d, {"kappa", "vx", "vy", "q"}},
      {ProblemKind::transport1d, {"nu", "q", "sigma_t", "sigma_s"}},
  };
  const auto& names = accepted.at(spec.kind);
  for (const auto& n : param.names)
    if (std::find(names.begin(), names.end(), n) == names.end())
      throw PreconditionError("make_system: " + to_string(spec.kind) + " has no parameter '" + n + "'");
  switch (spec.kind) {
    case ProblemKind::heat1d: return make_heat1d(spec, param);
    case ProblemKind::advdiff2d: return make_advdiff2d(spec, param);
    case ProblemKind::transport1d: return make_transport1d(spec, param);
  }
  throw PreconditionError("make_system: unknown problem kind");
}

}  // namespace strom
