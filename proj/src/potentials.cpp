#include "kahler/potentials.hpp"

#include "kahler/errors.hpp"

#include <cmath>
#include <sstream>

namespace kahler {

SampledFunction HolomorphyPotential::sampled(const GridPtr& grid) const {
  return SampledFunction::from(grid, [this](double x) { return (*this)(x); });
}

double default_normalization_target(const ProfileGeometry& geom, double scale) {
  auto x = SampledFunction::from(geom.grid, [](double v) { return v; });
  return scale * volume_integral(geom, x);
}

HolomorphyPotential normalize_potential(const ProfileGeometry& geom, std::optional<double> target, double scale) {
  const double base = default_normalization_target(geom, scale);
  const double t = target.value_or(base);
  const double volume = geom.vol_const * geom.weight.integral();
  return {scale, (t - base) / volume, t};
}

ComplexSampled apply(const FunctionDescriptor& fn, const SampledFunction& arg, const char* label) {
  const auto& grid = arg.grid();
  std::vector<double> re(arg.size()), im(arg.size());
  for (int i = 0; i < arg.size(); ++i) {
    if (!fn.in_domain(arg[i])) {
      std::ostringstream os;
      os.precision(17);
      os << label << " = " << fn.render() << " is undefined at argument " << arg[i] << " (node " << i
         << ", x = " << grid->node(i) << ")";
      throw DomainError(os.str(), i, arg[i]);
    }
    const Complex v = fn.value(arg[i]);
    re[i] = v.real();
    im[i] = v.imag();
  }
  return {SampledFunction(grid, std::move(re)), SampledFunction(grid, std::move(im))};
}

namespace {

void require_real(const FunctionDescriptor& f) {
  if (!f.is_real()) throw Error("f must be real valued, got " + f.render());
}

}  // namespace

Complex eval_S(const MetricProfile& profile, const FunctionDescriptor& f, const FunctionDescriptor& h,
               const HolomorphyPotential& phi) {
  require_real(f);
  const auto& g = *profile.geometry;
  const auto s = scalar_curvature(profile);
  const auto fs = apply(f, s, "f").re;
  const auto hp = apply(h, phi.sampled(g.grid), "h");
  return {volume_integral(g, fs * hp.re), volume_integral(g, fs * hp.im)};
}

ComplexSampled el_potential(const MetricProfile& profile, const FunctionDescriptor& f, const FunctionDescriptor& h,
                            const HolomorphyPotential& phi) {
  require_real(f);
  const auto& g = *profile.geometry;
  const auto s = scalar_curvature(profile);
  const auto hp = apply(h, phi.sampled(g.grid), "h");
  std::vector<double> fprime(s.size());
  for (int i = 0; i < s.size(); ++i) {
    if (!f.in_domain(s[i])) {
      std::ostringstream os;
      os.precision(17);
      os << "f = " << f.render() << " is undefined at s = " << s[i] << " (node " << i << ", x = " << g.grid->node(i)
         << ")";
      throw DomainError(os.str(), i, s[i]);
    }
    fprime[i] = f.derivative(s[i]).real();
  }
  const SampledFunction fp(g.grid, std::move(fprime));
  return {fp * hp.re, fp * hp.im};
}

SampledFunction lichnerowicz(const MetricProfile& profile, const SampledFunction& psi) {
  require_admissible(profile);
  const auto& g = *profile.geometry;
  const auto& th = profile.theta;
  auto inner = g.weight * th * th * psi.derivative(2);
  return divide_by_weight(g, inner.derivative(2));
}

double lichnerowicz_form(const MetricProfile& profile, const SampledFunction& psi) {
  const auto& g = *profile.geometry;
  const auto d2 = psi.derivative(2);
  const auto& th = profile.theta;
  return g.vol_const * (g.weight * th * th * d2 * d2).integral();
}

ELReport holomorphy_defect(const MetricProfile& profile, const ComplexSampled& psi, DefectOptions options) {
  require_admissible(profile);
  const auto& g = *profile.geometry;
  const auto fit = affine_projection(psi, g.weight);
  ELReport r;
  r.psi = psi;
  r.alpha = {fit.re.alpha, fit.im.alpha};
  r.beta = {fit.re.beta, fit.im.beta};
  r.defect_affine = std::sqrt(g.vol_const) * fit.residual_norm();
  const double q = lichnerowicz_form(profile, psi.re) + lichnerowicz_form(profile, psi.im);
  r.defect_operator = std::sqrt(std::max(q, 0.0));
  double norm = 0.0;
  for (int i = 0; i < psi.re.size(); ++i) norm = std::max(norm, std::hypot(psi.re[i], psi.im[i]));
  r.tolerance = options.tol_affine * (1.0 + norm);
  r.is_critical = r.defect_affine <= r.tolerance;
  return r;
}

ELReport holomorphy_defect(const MetricProfile& profile, const SampledFunction& psi, DefectOptions options) {
  return holomorphy_defect(profile, ComplexSampled{psi, SampledFunction::constant(psi.grid(), 0.0)}, options);
}

double futaki(const MetricProfile& profile, const HolomorphyPotential& phi) {
  const auto& g = *profile.geometry;
  auto s = scalar_curvature(profile);
  const double s0 = class_constants(g).s0;
  for (auto& v : s.values()) v -= s0;
  return volume_integral(g, s * phi.sampled(g.grid));
}

Complex equivariant_integral(const MetricProfile& profile, const FunctionDescriptor& h,
                             const HolomorphyPotential& phi) {
  const auto& g = *profile.geometry;
  const auto hp = apply(h, phi.sampled(g.grid), "h");
  return {volume_integral(g, hp.re), volume_integral(g, hp.im)};
}

}  // namespace kahler
