#include "kahler/geometry.hpp"

#include "kahler/errors.hpp"

#include <Eigen/Dense>

#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

namespace kahler {

std::string ProfileGeometry::name() const {
  switch (kind) {
    case GeometryKind::cp1:
      return "cp1";
    case GeometryKind::cpm:
      return "cpm:" + std::to_string(dim);
    case GeometryKind::custom:
      break;
  }
  return "custom";
}

double cpm_base_coefficient(int m) { return 2.0 * m * (m - 1); }

GeometryPtr make_cp1_geometry(int nodes) {
  auto g = std::make_shared<ProfileGeometry>();
  g->kind = GeometryKind::cp1;
  g->dim = 1;
  g->grid = SpectralGrid::make(nodes, -1.0, 1.0);
  g->weight = SampledFunction::constant(g->grid, 1.0);
  g->base_term = SampledFunction::constant(g->grid, 0.0);
  g->slope_lo = 2.0;
  g->slope_hi = -2.0;
  g->vol_const = 2.0 * std::numbers::pi;
  return g;
}

GeometryPtr make_cpm_geometry(int m, int nodes) {
  if (m < 2) throw std::invalid_argument("cpm geometry needs m >= 2");
  auto g = std::make_shared<ProfileGeometry>();
  g->kind = GeometryKind::cpm;
  g->dim = m;
  g->grid = SpectralGrid::make(nodes, 0.0, 1.0);
  g->base_coeff = cpm_base_coefficient(m);
  g->weight = SampledFunction::from(g->grid, [m](double x) { return std::pow(x, m - 1); });
  const double a = g->base_coeff;
  g->base_term = SampledFunction::from(g->grid, [m, a](double x) { return a * std::pow(x, m - 2); });
  g->slope_lo = 2.0;
  g->slope_hi = -2.0;
  g->vol_const = 2.0 * std::numbers::pi;
  return g;
}

GeometryPtr make_custom_geometry(GridPtr grid, SampledFunction weight, SampledFunction base_term,
                                 double slope_lo, double slope_hi, int dim, double vol_const) {
  if (dim < 1) throw std::invalid_argument("dimension must be positive");
  if (!(vol_const > 0.0)) throw std::invalid_argument("vol_const must be positive");
  for (int i = 1; i + 1 < weight.size(); ++i) {
    if (!(weight[i] > 0.0))
      throw DegenerateWeight("weight must be positive on the open interval (node " +
                             std::to_string(i) + ")");
  }
  auto g = std::make_shared<ProfileGeometry>();
  g->kind = GeometryKind::custom;
  g->dim = dim;
  g->grid = std::move(grid);
  g->weight = std::move(weight);
  g->base_term = std::move(base_term);
  g->slope_lo = slope_lo;
  g->slope_hi = slope_hi;
  g->vol_const = vol_const;
  return g;
}

GeometryPtr make_named_geometry(const std::string& name, int nodes) {
  if (name == "cp1") return make_cp1_geometry(nodes);
  if (name.rfind("cpm:", 0) == 0) {
    int m = 0;
    const auto digits = std::string_view(name).substr(4);
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), m);
    if (ec != std::errc() || ptr != digits.data() + digits.size() || m < 2) {
      throw UnsupportedGeometry("geometry '" + name + "' needs an integer m >= 2");
    }
    return make_cpm_geometry(m, nodes);
  }
  throw UnsupportedGeometry("unknown geometry '" + name + "'");
}

MetricProfile round_profile(const GeometryPtr& geom) {
  switch (geom->kind) {
    case GeometryKind::cp1:
      return {geom, SampledFunction::from(geom->grid, [](double x) { return 1.0 - x * x; })};
    case GeometryKind::cpm:
      return {geom, SampledFunction::from(geom->grid, [](double x) { return 2.0 * x * (1.0 - x); })};
    case GeometryKind::custom:
      break;
  }
  throw UnsupportedGeometry("no canonical round profile for a custom geometry");
}

std::vector<Violation> validate(const MetricProfile& profile, ValidationTolerances tol) {
  std::vector<Violation> out;
  const auto& g = *profile.geometry;
  const auto& th = profile.theta;
  const int n = th.size();
  if (th.grid() != g.grid) {
    out.push_back({"grid mismatch", 0.0, std::abs(static_cast<double>(n - g.nodes()))});
    return out;
  }
  if (std::abs(th.front()) > tol.boundary) out.push_back({"theta(x_lo) = 0", g.x_lo(), th.front()});
  if (std::abs(th.back()) > tol.boundary) out.push_back({"theta(x_hi) = 0", g.x_hi(), th.back()});
  const auto& d1 = g.grid->d1();
  double slope_lo = 0.0, slope_hi = 0.0;
  for (int j = 0; j < n; ++j) {
    slope_lo += d1(0, j) * th[j];
    slope_hi += d1(n - 1, j) * th[j];
  }
  if (std::abs(slope_lo - g.slope_lo) > tol.boundary)
    out.push_back({"theta'(x_lo) = slope_lo", g.x_lo(), slope_lo - g.slope_lo});
  if (std::abs(slope_hi - g.slope_hi) > tol.boundary)
    out.push_back({"theta'(x_hi) = slope_hi", g.x_hi(), slope_hi - g.slope_hi});
  for (int i = 1; i + 1 < n; ++i) {
    if (!(th[i] > 0.0)) out.push_back({"theta > 0 on interior", g.grid->node(i), th[i]});
  }
  return out;
}

void require_admissible(const MetricProfile& profile, ValidationTolerances tol) {
  auto v = validate(profile, tol);
  if (v.empty()) return;
  std::ostringstream os;
  os << "profile is not admissible: " << v.size() << " violation(s); first: " << v.front().invariant
     << " at x = " << v.front().location << " (magnitude " << v.front().magnitude << ")";
  throw AdmissibilityError(os.str());
}

SampledFunction divide_by_weight(const ProfileGeometry& geom, const SampledFunction& numerator) {
  const auto& w = geom.weight;
  const int n = w.size();
  std::vector<double> out(n, 0.0);
  bool lo_degenerate = false, hi_degenerate = false;
  for (int i = 0; i < n; ++i) {
    if (w[i] == 0.0) {
      if (i == 0) {
        lo_degenerate = true;
      } else if (i == n - 1) {
        hi_degenerate = true;
      } else {
        throw DegenerateWeight("weight vanishes at interior node " + std::to_string(i));
      }
      continue;
    }
    out[i] = numerator[i] / w[i];
  }
  if (lo_degenerate) out[0] = geom.grid->extrapolate_endpoint(out, 0);
  if (hi_degenerate) out[n - 1] = geom.grid->extrapolate_endpoint(out, n - 1);
  return SampledFunction(geom.grid, std::move(out));
}

double volume_integral(const ProfileGeometry& geom, const SampledFunction& values) {
  return geom.vol_const * (values * geom.weight).integral();
}

namespace {

// CP^m ansatz (w = x^(m-1), A = a x^(m-2), x_lo = 0). Writing Theta = x P,
//   s = m(m-1) (c0 - P) / x - 2m P' - x P'',   c0 = a / (m(m-1)),
// which avoids dividing the near-cancelling numerator by x^(m-1) close to x = 0.
SampledFunction cpm_scalar_curvature(const ProfileGeometry& g, const SampledFunction& theta) {
  const auto& grid = *g.grid;
  const int n = theta.size();
  const int m = g.dim;
  const double c0 = g.base_coeff / (m * (m - 1.0));
  std::vector<double> p(n);
  for (int i = 1; i < n; ++i) p[i] = theta[i] / grid.node(i);
  p[0] = grid.extrapolate_endpoint(p, 0);
  const auto dp = grid.differentiate(p, 1);
  const auto ddp = grid.differentiate(p, 2);
  std::vector<double> s(n);
  for (int i = 1; i < n; ++i) {
    const double x = grid.node(i);
    s[i] = m * (m - 1.0) * (c0 - p[i]) / x - 2.0 * m * dp[i] - x * ddp[i];
  }
  // At x = 0 the quotient (c0 - P)/x tends to -P'(0).
  s[0] = -m * (m - 1.0) * dp[0] - 2.0 * m * dp[0];
  return SampledFunction(g.grid, std::move(s));
}

}  // namespace

SampledFunction scalar_curvature(const MetricProfile& profile) {
  require_admissible(profile);
  const auto& g = *profile.geometry;
  if (g.kind == GeometryKind::cpm) return cpm_scalar_curvature(g, profile.theta);
  auto numerator = g.base_term - (g.weight * profile.theta).derivative(2);
  return divide_by_weight(g, numerator);
}

ClassConstants class_constants(const ProfileGeometry& geom) {
  const int n = geom.nodes();
  const double volume = geom.vol_const * geom.weight.integral();
  // (w Theta)' = w Theta' at the endpoints, where Theta vanishes.
  const double boundary = geom.weight[n - 1] * geom.slope_hi - geom.weight[0] * geom.slope_lo;
  const double scalar = geom.vol_const * (geom.base_term.integral() - boundary);
  return {volume, scalar, scalar / volume};
}

FubiniStudyPin pin_fubini_study(int m, int nodes) {
  if (m < 2) throw std::invalid_argument("cpm geometry needs m >= 2");
  FubiniStudyPin pin;
  pin.m = m;
  const auto grid = SpectralGrid::make(nodes, 0.0, 1.0);
  const int n = grid->size();
  std::vector<double> y(n);
  for (int i = 0; i < n; ++i) {
    const double x = grid->node(i);
    y[i] = std::pow(x, m - 1) * 2.0 * x * (1.0 - x);
  }
  const auto ddy = grid->differentiate(y, 2);
  Eigen::MatrixXd basis(n, 2);
  Eigen::VectorXd rhs(n);
  for (int i = 0; i < n; ++i) {
    const double x = grid->node(i);
    basis(i, 0) = std::pow(x, m - 2);
    basis(i, 1) = std::pow(x, m - 1);
    rhs[i] = ddy[i];
  }
  const Eigen::Vector2d cb = basis.colPivHouseholderQr().solve(rhs);
  pin.coefficient = cb[0];
  pin.fit_residual = (basis * cb - rhs).cwiseAbs().maxCoeff();

  const auto geom = make_cpm_geometry(m, nodes);
  const auto s = scalar_curvature(round_profile(geom));
  double mean = 0.0;
  for (int i = 1; i + 1 < n; ++i) mean += s[i];
  mean /= n - 2;
  double var = 0.0;
  for (int i = 1; i + 1 < n; ++i) var += (s[i] - mean) * (s[i] - mean);
  pin.s_mean = mean;
  pin.s_std = std::sqrt(var / (n - 2));
  pin.ok = std::abs(pin.coefficient - cpm_base_coefficient(m)) <= 1e-8 && pin.s_std < 1e-8;
  return pin;
}

}  // namespace kahler
