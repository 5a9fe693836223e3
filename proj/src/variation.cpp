#include "kahler/variation.hpp"

#include "kahler/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <limits>
#include <mutex>

namespace kahler {

FirstOrder first_order(const MetricProfile& profile, const DeformationPath& path, const HolomorphyPotential& phi,
                       const Conventions& conv) {
  require_admissible(profile);
  const auto& g = *profile.geometry;
  const auto& th = profile.theta;
  const auto du = path.u.derivative(1);
  const auto ddu = path.u.derivative(2);
  auto d_theta = conv.kappa_theta * (th * th * ddu);
  auto flux = th * du;
  auto d_phi = (conv.kappa_phi * phi.scale) * flux;
  auto density = conv.kappa_theta * divide_by_weight(g, (g.weight * flux).derivative(1));
  return {std::move(d_theta), std::move(d_phi), std::move(density)};
}

FirstOrder first_order(const MetricProfile& profile, const DeformationPath& path) {
  return first_order(profile, path, HolomorphyPotential{}, pinned_conventions());
}

ScalarVariation delta_s(const MetricProfile& profile, const DeformationPath& path, const Conventions& conv) {
  const auto fo = first_order(profile, path, HolomorphyPotential{}, conv);
  const auto& g = *profile.geometry;
  auto fixed_x = -1.0 * divide_by_weight(g, (g.weight * fo.d_theta).derivative(2));
  const auto ds = scalar_curvature(profile).derivative(1);
  auto fixed_point = fixed_x + fo.d_phi * ds;
  return {std::move(fixed_x), std::move(fixed_point)};
}

ScalarVariation delta_s(const MetricProfile& profile, const DeformationPath& path) {
  return delta_s(profile, path, pinned_conventions());
}

Complex delta_S_analytic(const MetricProfile& profile, const FunctionDescriptor& f, const FunctionDescriptor& h,
                         const HolomorphyPotential& phi, const DeformationPath& path, const Conventions& conv) {
  const auto& g = *profile.geometry;
  const auto psi = el_potential(profile, f, h, phi);
  const auto& th = profile.theta;
  // int(w Theta^2 u'' psi'') = int(psi (w Theta^2 u'')''): the boundary terms vanish with
  // Theta^2, and psi'' (which amplifies the noise in s) is never formed.
  const auto kernel = (g.weight * th * th * path.u.derivative(2)).derivative(2);
  const double c = -conv.kappa_theta * g.vol_const;
  return {c * (kernel * psi.re).integral(), c * (kernel * psi.im).integral()};
}

Complex delta_S_analytic(const MetricProfile& profile, const FunctionDescriptor& f, const FunctionDescriptor& h,
                         const HolomorphyPotential& phi, const DeformationPath& path) {
  return delta_S_analytic(profile, f, h, phi, path, pinned_conventions());
}

Transported transport(const MetricProfile& profile, const HolomorphyPotential& phi, const DeformationPath& path,
                      double t) {
  if (t == 0.0) return {profile, phi};
  const auto& th = profile.theta;
  const auto ddu = path.u.derivative(2);
  std::vector<double> out(th.size());
  for (int i = 0; i < th.size(); ++i) {
    const double denom = 1.0 - t * th[i] * ddu[i];
    const bool interior = i > 0 && i + 1 < th.size();
    if (interior && !(denom > 0.0)) {
      throw PathExitsClass("transport leaves the Kähler class: G_t'' <= 0 at x = " +
                               format_real(th.grid()->node(i)) + " for t = " + format_real(t),
                           t);
    }
    out[i] = th[i] / denom;
  }
  out.front() = th.front();
  out.back() = th.back();
  return {MetricProfile{profile.geometry, SampledFunction(th.grid(), std::move(out))}, phi};
}

Complex delta_S_numeric(const MetricProfile& profile, const FunctionDescriptor& f, const FunctionDescriptor& h,
                        const HolomorphyPotential& phi, const DeformationPath& path, double step, bool richardson) {
  auto central = [&](double hstep) {
    const auto plus = transport(profile, phi, path, hstep);
    const auto minus = transport(profile, phi, path, -hstep);
    return (eval_S(plus.profile, f, h, plus.phi) - eval_S(minus.profile, f, h, minus.phi)) / (2.0 * hstep);
  };
  if (!richardson) return central(step);
  return (4.0 * central(0.5 * step) - central(step)) / 3.0;
}

Complex equivariant_first_variation(const MetricProfile& profile, const FunctionDescriptor& h,
                                    const HolomorphyPotential& phi, const DeformationPath& path,
                                    const Conventions& conv) {
  const auto& g = *profile.geometry;
  const auto fo = first_order(profile, path, phi, conv);
  const auto arg = phi.sampled(g.grid);
  std::vector<double> re(arg.size()), im(arg.size());
  for (int i = 0; i < arg.size(); ++i) {
    if (!h.in_domain(arg[i])) throw DomainError("h undefined at phi = " + format_real(arg[i]), i, arg[i]);
    const Complex v = h.derivative(arg[i]) * fo.d_phi[i] + h.value(arg[i]) * fo.volume_density[i];
    re[i] = v.real();
    im[i] = v.imag();
  }
  return {volume_integral(g, SampledFunction(g.grid, std::move(re))),
          volume_integral(g, SampledFunction(g.grid, std::move(im)))};
}

ConvergenceStudy convergence_study(const MetricProfile& profile, const FunctionDescriptor& f,
                                   const FunctionDescriptor& h, const HolomorphyPotential& phi,
                                   const DeformationPath& path, std::vector<double> steps) {
  std::sort(steps.begin(), steps.end(), std::greater<>());
  ConvergenceStudy study;
  study.steps = steps;
  study.analytic = delta_S_analytic(profile, f, h, phi, path);
  std::vector<std::future<Complex>> jobs;
  jobs.reserve(steps.size());
  for (double step : steps) {
    jobs.push_back(std::async(std::launch::async, [&, step] { return delta_S_numeric(profile, f, h, phi, path, step); }));
  }
  for (auto& j : jobs) study.errors.push_back(std::abs(j.get() - study.analytic));
  study.min_order = std::numeric_limits<double>::infinity();
  for (size_t k = 0; k + 1 < steps.size(); ++k) {
    const double order = std::log10(study.errors[k] / study.errors[k + 1]) / std::log10(steps[k] / steps[k + 1]);
    study.orders.push_back(order);
    study.min_order = std::min(study.min_order, order);
  }
  return study;
}

namespace {

constexpr double kCandidates[] = {1.0, -1.0, 0.5, -0.5};

struct PinningFixture {
  std::vector<MetricProfile> profiles;
  std::vector<DeformationPath> paths;
};

PinningFixture pinning_fixture() {
  auto geom = make_cp1_geometry();
  PinningFixture fx;
  fx.profiles.push_back(round_profile(geom));
  fx.profiles.push_back(random_admissible_profile(geom, 1, 0.3));
  for (auto fn : std::initializer_list<double (*)(double)>{
           [](double x) { return x * x; }, [](double x) { return x * x * x - 0.5 * x; },
           [](double x) { return x * x * x * x + x; }}) {
    fx.paths.push_back({SampledFunction::from(geom->grid, fn)});
  }
  return fx;
}

}  // namespace

PinningReport pin_conventions() {
  const auto fx = pinning_fixture();
  PinningReport report;
  const double t = 1e-4;

  std::vector<double> theta_pass;
  for (double kappa : kCandidates) {
    const Conventions conv{kappa, kappa};
    double worst = 0.0;
    bool passed = true;
    for (const auto& p : fx.profiles) {
      for (const auto& path : fx.paths) {
        const auto plus = transport(p, {}, path, t).profile.theta;
        const auto minus = transport(p, {}, path, -t).profile.theta;
        const auto fo = first_order(p, path, {}, conv);
        double err = 0.0;
        for (int i = 0; i < plus.size(); ++i) {
          err = std::max(err, std::abs((plus[i] - minus[i]) / (2.0 * t) - fo.d_theta[i]));
        }
        const double scale = 1.0 + fo.d_theta.max_abs();
        worst = std::max(worst, err / scale);
        passed = passed && err <= 1e-6 * scale;
      }
    }
    // The same factor must reproduce the numerical variation of S.
    const auto& p = fx.profiles[1];
    const auto f = FunctionDescriptor::exponential();
    const auto h = FunctionDescriptor::identity();
    const HolomorphyPotential phi{};
    for (const auto& path : fx.paths) {
      const Complex analytic = delta_S_analytic(p, f, h, phi, path, conv);
      const Complex numeric = delta_S_numeric(p, f, h, phi, path, 1e-4);
      const double rel = std::abs(numeric - analytic) / (1.0 + std::abs(analytic));
      worst = std::max(worst, rel);
      passed = passed && rel <= 1e-4;
    }
    report.kappa_theta_candidates.push_back({kappa, worst, passed});
    if (passed) theta_pass.push_back(kappa);
  }
  if (theta_pass.size() != 1) return report;
  report.conventions.kappa_theta = theta_pass.front();

  std::vector<double> phi_pass;
  for (double kappa : kCandidates) {
    const Conventions conv{report.conventions.kappa_theta, kappa};
    double worst = 0.0;
    bool passed = true;
    for (const auto& h : {FunctionDescriptor::identity(), FunctionDescriptor::power(2.0)}) {
      for (const auto& p : fx.profiles) {
        for (const auto& path : fx.paths) {
          const double v = std::abs(equivariant_first_variation(p, h, {}, path, conv));
          worst = std::max(worst, v);
          passed = passed && v < 1e-8;
        }
      }
    }
    report.kappa_phi_candidates.push_back({kappa, worst, passed});
    if (passed) phi_pass.push_back(kappa);
  }
  if (phi_pass.size() != 1) return report;
  report.conventions.kappa_phi = phi_pass.front();
  report.ok = true;
  return report;
}

const Conventions& pinned_conventions() {
  static const Conventions conv = [] {
    const auto report = pin_conventions();
    if (!report.ok) throw Error("convention pinning failed: no unique candidate passes the oracles");
    return report.conventions;
  }();
  return conv;
}

}  // namespace kahler
