#include "kahler/discretization.hpp"

#include "kahler/errors.hpp"

#include <cmath>
#include <numbers>

namespace kahler {

SampledFunction differentiate(const SampledFunction& f, int order) { return f.derivative(order); }

double integrate(const SampledFunction& f) { return f.integral(); }

AffineFit affine_projection(const SampledFunction& psi, const SampledFunction& weight) {
  const auto& grid = *psi.grid();
  const int n = psi.size();
  // Normal equations in the centred basis {1, x - xbar} are diagonal.
  double m0 = 0.0, m1 = 0.0;
  for (int i = 0; i < n; ++i) {
    if (weight[i] < 0.0) throw DegenerateWeight("affine projection needs a nonnegative weight");
    const double qw = grid.quadrature_weights()[i] * weight[i];
    m0 += qw;
    m1 += qw * grid.node(i);
  }
  if (!(m0 > 0.0)) throw DegenerateWeight("affine projection weight vanishes almost everywhere");
  const double xbar = m1 / m0;
  double m2 = 0.0, b0 = 0.0, b1 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double qw = grid.quadrature_weights()[i] * weight[i];
    const double d = grid.node(i) - xbar;
    m2 += qw * d * d;
    b0 += qw * psi[i];
    b1 += qw * d * psi[i];
  }
  if (!(m2 > 1e-300)) throw DegenerateWeight("affine projection normal equations are singular");
  const double slope = b1 / m2;
  const double mean = b0 / m0;
  double r2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double qw = grid.quadrature_weights()[i] * weight[i];
    const double r = psi[i] - mean - slope * (grid.node(i) - xbar);
    r2 += qw * r * r;
  }
  return {slope, mean - slope * xbar, std::sqrt(std::max(r2, 0.0))};
}

double ComplexAffineFit::residual_norm() const { return std::hypot(re.residual_norm, im.residual_norm); }

ComplexAffineFit affine_projection(const ComplexSampled& psi, const SampledFunction& weight) {
  return {affine_projection(psi.re, weight), affine_projection(psi.im, weight)};
}

std::uint64_t SplitMix64::next() {
  state_ += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double SplitMix64::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::vector<double> random_chebyshev_coefficients(std::uint64_t seed, int degree, double amplitude) {
  SplitMix64 rng(seed);
  std::vector<double> c(degree + 1);
  for (auto& v : c) v = amplitude * rng.symmetric();
  return c;
}

SampledFunction boundary_bump(const ProfileGeometry& geom) {
  const double lo = geom.x_lo(), hi = geom.x_hi();
  return SampledFunction::from(geom.grid, [lo, hi](double x) {
    const double a = (x - lo) * (hi - x);
    return a * a;
  });
}

MetricProfile random_admissible_profile(const GeometryPtr& geom, std::uint64_t seed, double amplitude,
                                        RandomProfileOptions options) {
  if (!(amplitude >= 0.0)) throw std::invalid_argument("amplitude must be nonnegative");
  const auto base = round_profile(geom);
  if (amplitude == 0.0) return base;

  const double lo = geom->x_lo(), hi = geom->x_hi();
  const auto coeffs = random_chebyshev_coefficients(seed, options.degree, 1.0);
  const ChebSeries q(lo, hi, coeffs);
  auto round_at = [&](double x) {
    return geom->kind == GeometryKind::cp1 ? 1.0 - x * x : 2.0 * x * (1.0 - x);
  };
  auto bump_at = [&](double x) {
    const double a = (x - lo) * (hi - x);
    return a * a;
  };

  // Positivity is checked at the grid nodes and on a four-times denser Chebyshev set.
  std::vector<double> probe(geom->grid->nodes().begin() + 1, geom->grid->nodes().end() - 1);
  const int dense = 4 * geom->nodes();
  for (int k = 1; k < dense; ++k) {
    probe.push_back(0.5 * (lo + hi) - 0.5 * (hi - lo) * std::cos(std::numbers::pi * k / dense));
  }

  double amp = amplitude;
  for (int attempt = 0; attempt <= options.max_halvings; ++attempt, amp *= 0.5) {
    bool positive = std::isfinite(amp);
    for (double x : probe) {
      if (!positive) break;
      positive = round_at(x) + amp * bump_at(x) * q(x) > 0.0;
    }
    if (!positive) continue;
    auto theta = SampledFunction::from(geom->grid, [&](double x) { return round_at(x) + amp * bump_at(x) * q(x); });
    // Endpoint values are exact zeros of both terms.
    theta[0] = 0.0;
    theta[theta.size() - 1] = 0.0;
    return {geom, std::move(theta)};
  }
  throw AdmissibilityError("random profile: positivity not reached after " +
                           std::to_string(options.max_halvings) + " halvings");
}

}  // namespace kahler
