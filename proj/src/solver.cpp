#include "kahler/solver.hpp"

#include "kahler/discretization.hpp"
#include "kahler/errors.hpp"

#include <cmath>
#include <sstream>

namespace kahler {

std::string to_string(IterationStatus status) {
  switch (status) {
    case IterationStatus::continued:
      return "continued";
    case IterationStatus::converged:
      return "converged";
    case IterationStatus::zero_field:
      return "zero_field";
    case IterationStatus::failed:
      return "failed";
  }
  return "failed";
}

std::string to_string(SolveOutcome outcome) {
  return outcome == SolveOutcome::solved ? "solved" : "every_metric_critical";
}

namespace {

enum class Mode { shooting, extremal };

struct Problem {
  GeometryPtr geom;
  FunctionDescriptor f;
  FunctionDescriptor h;
  HolomorphyPotential phi;
  Mode mode = Mode::shooting;
  std::vector<double> h_real;  // Re h(phi) at the nodes
};

struct Shot {
  std::vector<double> s;
  double value_mismatch = 0.0;
  double slope_mismatch = 0.0;
  double y_hi = 0.0;   // (w Theta)(x_hi) from the left
  double dy_hi = 0.0;  // (w Theta)'(x_hi) from the left

  double norm() const { return std::max(std::abs(value_mismatch), std::abs(slope_mismatch)); }
};

// Decides between shooting and the extremal representative, and rejects inputs for
// which no critical metric exists.
Problem set_up(const GeometryPtr& geom, const FunctionDescriptor& f, const FunctionDescriptor& h,
               const HolomorphyPotential& phi, DefectOptions defect) {
  if (!f.is_real()) throw Error("f must be real valued, got " + f.render());
  Problem p{geom, f, h, phi};
  const auto hp = apply(h, phi.sampled(geom->grid), "h");
  p.h_real = hp.re.values();

  if (auto k = f.constant_derivative()) {
    // psi = k h(phi) does not depend on the metric.
    const ComplexSampled psi{k->real() * hp.re, k->real() * hp.im};
    const auto fit = affine_projection(psi, geom->weight);
    double norm = 0.0;
    for (int i = 0; i < psi.re.size(); ++i) norm = std::max(norm, std::hypot(psi.re[i], psi.im[i]));
    if (std::sqrt(geom->vol_const) * fit.residual_norm() > defect.tol_affine * (1.0 + norm)) {
      throw NoCriticalMetric("f' is constant and " + h.render() +
                             " is not affine in phi: no metric in the class is critical");
    }
    p.mode = Mode::extremal;
    return p;
  }
  if (!f.has_derivative_inverse()) {
    throw RangeError("f' = (" + f.render() + ")' has no monotone inverse; use residual_minimize");
  }
  const double first = p.h_real.front();
  for (double v : p.h_real) {
    if (v == 0.0 || (v > 0.0) != (first > 0.0)) {
      throw SingularPotential("h(phi) = " + h.render() + " vanishes on [x_lo, x_hi]");
    }
  }
  return p;
}

std::vector<double> curvature_for(const Problem& p, double alpha, double beta) {
  const auto& grid = *p.geom->grid;
  std::vector<double> s(grid.size());
  for (int i = 0; i < grid.size(); ++i) {
    const double target = alpha * grid.node(i) + beta;
    if (p.mode == Mode::extremal) {
      s[i] = target;
    } else {
      s[i] = p.f.derivative_inverse(target / p.h_real[i]);
      if (!std::isfinite(s[i])) throw RangeError("inverse of f' is not finite at x = " + format_real(grid.node(i)));
    }
  }
  return s;
}

const SpectralGrid& tau_grid() {
  static const auto tau = SpectralGrid::make(2 * SpectralGrid::kDefaultNodes - 1, 0.0, 1.0);
  return *tau;
}

// Integrates (w Theta)'' = A - w s twice from x_lo in Chebyshev coefficient space and
// reports the mismatch against the conditions at x_hi.
Shot shoot(const ProfileGeometry& g, std::vector<double> s) {
  const auto& grid = *g.grid;
  const int n = grid.size();
  std::vector<double> r(n);
  for (int i = 0; i < n; ++i) r[i] = g.base_term[i] - g.weight[i] * s[i];
  const auto i1 = grid.series(r).antiderivative();
  const auto i2 = i1.antiderivative();
  const double lo = grid.lo(), hi = grid.hi();
  const double y1 = g.weight[0] * g.slope_lo;
  const double w_hi = g.weight[n - 1];
  if (!(w_hi > 0.0)) throw UnsupportedGeometry("shooting needs w(x_hi) > 0");
  double dw_hi = 0.0;
  for (int j = 0; j < n; ++j) dw_hi += grid.d1()(n - 1, j) * g.weight[j];

  Shot shot;
  shot.y_hi = y1 * (hi - lo) + i2(hi);
  shot.dy_hi = y1 + i1(hi);
  const double theta_hi = shot.y_hi / w_hi;
  shot.value_mismatch = theta_hi;
  shot.slope_mismatch = (shot.dy_hi - dw_hi * theta_hi) / w_hi - g.slope_hi;
  shot.s = std::move(s);
  return shot;
}

// Theta at the nodes for a converged shot. Summing the antiderivative series leaves
// absolute errors of order eps where Theta itself is tiny, and D2 amplifies those near
// the ends. Each half is therefore written relative to its own endpoint,
//   Y(x) = (x - lo) (Y'(lo) + (x - lo) int_0^1 (1 - tau) r(lo + (x - lo) tau) dtau),
// and mirrored from x_hi; the leftover affine mismatch E is spread with weight
// b = ((x - lo) / L)^dim so both halves describe one smooth function.
std::vector<double> assemble(const ProfileGeometry& g, const Shot& shot) {
  const auto& grid = *g.grid;
  const auto& tau = tau_grid();
  const int n = grid.size();
  const double lo = grid.lo(), hi = grid.hi(), len = hi - lo;
  std::vector<double> r(n);
  for (int i = 0; i < n; ++i) r[i] = g.base_term[i] - g.weight[i] * shot.s[i];
  const auto r_series = grid.series(r);
  const auto s_series = grid.series(shot.s);
  const double w_hi = g.weight[n - 1];

  std::vector<double> k_lin(tau.size()), k_cpm(tau.size());
  for (int j = 0; j < tau.size(); ++j) {
    const double t = tau.node(j), tw = tau.quadrature_weights()[j];
    k_lin[j] = tw * (1.0 - t);
    k_cpm[j] = tw * (1.0 - t) * std::pow(t, g.dim - 1);
  }
  auto mismatch = [&](double x) { return shot.y_hi + (shot.dy_hi - w_hi * g.slope_hi) * (x - hi); };
  auto blend = [&](double x) { return std::pow((x - lo) / len, g.dim); };

  std::vector<double> theta(n, 0.0);
  for (int i = 1; i + 1 < n; ++i) {
    const double x = grid.node(i);
    double acc = 0.0;
    if (x - lo <= hi - x) {
      const double d = x - lo;
      double th;
      if (g.kind == GeometryKind::cpm) {
        // With w = x^(m-1) the factor x^(m-1) cancels exactly.
        for (int j = 0; j < tau.size(); ++j) acc += k_cpm[j] * s_series(x * tau.node(j));
        th = x * (g.slope_lo - x * acc);
      } else {
        for (int j = 0; j < tau.size(); ++j) acc += k_lin[j] * r_series(lo + d * tau.node(j));
        th = d * (g.weight[0] * g.slope_lo + d * acc) / g.weight[i];
      }
      theta[i] = th - blend(x) * mismatch(x) / g.weight[i];
    } else {
      const double d = hi - x;
      for (int j = 0; j < tau.size(); ++j) acc += k_lin[j] * r_series(hi - d * tau.node(j));
      const double y = d * (-w_hi * g.slope_hi + d * acc);
      theta[i] = (y + (1.0 - blend(x)) * mismatch(x)) / g.weight[i];
    }
  }
  return theta;
}

Shot shoot_at(const Problem& p, double alpha, double beta) {
  return shoot(*p.geom, curvature_for(p, alpha, beta));
}

CriticalSolveResult finish(const Problem& p, std::vector<double> theta, DefectOptions defect,
                           std::optional<AffineGuess> shot_coeffs = std::nullopt) {
  CriticalSolveResult res;
  res.profile = MetricProfile{p.geom, SampledFunction(p.geom->grid, std::move(theta))};
  const auto violations = validate(res.profile);
  if (!violations.empty()) {
    throw AdmissibilityError("critical profile is not admissible: " + violations.front().invariant + " at x = " +
                             format_real(violations.front().location));
  }
  res.report = holomorphy_defect(res.profile, el_potential(res.profile, p.f, p.h, p.phi), defect);
  if (p.mode == Mode::extremal) {
    res.outcome = SolveOutcome::every_metric_critical;
    // Here s itself is affine; report its coefficients.
    if (shot_coeffs) {
      res.alpha = shot_coeffs->alpha;
      res.beta = shot_coeffs->beta;
    } else {
      const auto fit = affine_projection(scalar_curvature(res.profile), p.geom->weight);
      res.alpha = fit.alpha;
      res.beta = fit.beta;
    }
  } else {
    res.alpha = res.report.alpha;
    res.beta = res.report.beta;
  }
  res.converged = true;
  return res;
}

}  // namespace

AffineGuess default_initial_guess(const ProfileGeometry& geom, const FunctionDescriptor& f,
                                  const FunctionDescriptor& h, const HolomorphyPotential& phi) {
  const double s0 = class_constants(geom).s0;
  if (!f.in_domain(s0)) return {0.0, 1.0};
  const double fp = f.derivative(s0).real();
  try {
    const auto hp = apply(h, phi.sampled(geom.grid), "h");
    const auto fit = affine_projection(fp * hp.re, geom.weight);
    if (std::isfinite(fit.alpha) && std::isfinite(fit.beta)) return {fit.alpha, fit.beta};
  } catch (const DomainError&) {
  }
  return {0.0, 1.0};
}

CriticalSolveResult solve_critical(const GeometryPtr& geom, const FunctionDescriptor& f,
                                   const FunctionDescriptor& h, const HolomorphyPotential& phi,
                                   std::optional<AffineGuess> init, SolverOptions options) {
  const Problem p = set_up(geom, f, h, phi, options.defect);
  AffineGuess x0;
  if (init) {
    x0 = *init;
  } else if (p.mode == Mode::extremal) {
    x0 = {0.0, class_constants(*geom).s0};
  } else {
    x0 = default_initial_guess(*geom, f, h, phi);
  }

  double a = x0.alpha, b = x0.beta;
  Shot cur = shoot_at(p, a, b);
  std::vector<double> trace{cur.norm()};
  int it = 0;
  for (; it < options.max_iter && cur.norm() > 1e-13; ++it) {
    const double ha = options.fd_step * std::max(1.0, std::abs(a));
    const double hb = options.fd_step * std::max(1.0, std::abs(b));
    const Shot sa = shoot_at(p, a + ha, b);
    const Shot sb = shoot_at(p, a, b + hb);
    Eigen::Matrix2d jac;
    jac << (sa.value_mismatch - cur.value_mismatch) / ha, (sb.value_mismatch - cur.value_mismatch) / hb,
        (sa.slope_mismatch - cur.slope_mismatch) / ha, (sb.slope_mismatch - cur.slope_mismatch) / hb;
    const double det = jac.determinant();
    if (!(std::abs(det) > 1e-14 * jac.squaredNorm())) {
      throw ConvergenceError("rank-deficient shooting Jacobian at (alpha, beta) = (" + format_real(a) + ", " +
                                 format_real(b) + ")",
                             trace);
    }
    const Eigen::Vector2d step = -jac.inverse() * Eigen::Vector2d(cur.value_mismatch, cur.slope_mismatch);

    double lambda = 1.0;
    bool accepted = false;
    for (int k = 0; k < 40 && !accepted; ++k, lambda *= 0.5) {
      try {
        Shot trial = shoot_at(p, a + lambda * step[0], b + lambda * step[1]);
        if (trial.norm() < cur.norm()) {
          a += lambda * step[0];
          b += lambda * step[1];
          cur = std::move(trial);
          accepted = true;
        }
      } catch (const RangeError&) {
      }
    }
    trace.push_back(cur.norm());
    if (!accepted) break;
  }
  if (!(cur.norm() <= options.boundary_tol)) {
    std::ostringstream os;
    os << "Newton stagnated after " << it << " iterations with boundary mismatch " << cur.norm();
    throw ConvergenceError(os.str(), trace);
  }
  auto res = finish(p, assemble(*geom, cur), options.defect, AffineGuess{a, b});
  res.iterations = it;
  res.residual_trace = std::move(trace);
  return res;
}

MetricProfile profile_from_coefficients(const GeometryPtr& geom, const Eigen::VectorXd& q) {
  const ChebSeries series(geom->x_lo(), geom->x_hi(), std::vector<double>(q.data(), q.data() + q.size()));
  auto theta = round_profile(geom).theta;
  const auto bump = boundary_bump(*geom);
  for (int i = 0; i < theta.size(); ++i) theta[i] += bump[i] * series(geom->grid->node(i));
  return {geom, std::move(theta)};
}

DefectResidual defect_residual(const GeometryPtr& geom, const FunctionDescriptor& f, const FunctionDescriptor& h,
                               const HolomorphyPotential& phi, const Eigen::VectorXd& q, bool with_jacobian) {
  const auto& g = *geom;
  const auto& grid = *g.grid;
  const int n = grid.size();
  const bool extremal = f.constant_derivative().has_value();
  DefectResidual out{Eigen::VectorXd(n), Eigen::MatrixXd(), profile_from_coefficients(geom, q)};

  const auto s = scalar_curvature(out.profile);
  const auto hp = apply(h, phi.sampled(g.grid), "h").re;
  std::vector<double> chi(n), dchi_ds(n);
  for (int i = 0; i < n; ++i) {
    if (extremal) {
      chi[i] = s[i];
      dchi_ds[i] = 1.0;
      continue;
    }
    if (!f.in_domain(s[i])) throw DomainError("f = " + f.render() + " is undefined at s = " + format_real(s[i]), i, s[i]);
    chi[i] = f.derivative(s[i]).real() * hp[i];
    dchi_ds[i] = f.second_derivative(s[i]).real() * hp[i];
  }

  std::vector<double> sqrt_w(n);
  for (int i = 0; i < n; ++i) sqrt_w[i] = std::sqrt(g.vol_const * grid.quadrature_weights()[i] * g.weight[i]);
  auto project_out = [&](const std::vector<double>& v, Eigen::Ref<Eigen::VectorXd> dst) {
    const auto fit = affine_projection(SampledFunction(g.grid, v), g.weight);
    for (int i = 0; i < n; ++i) dst[i] = sqrt_w[i] * (v[i] - fit.alpha * grid.node(i) - fit.beta);
  };
  project_out(chi, out.residual);
  if (!with_jacobian) return out;

  const auto bump = boundary_bump(g);
  out.jacobian.resize(n, q.size());
  for (int k = 0; k < q.size(); ++k) {
    std::vector<double> unit(k + 1, 0.0);
    unit[k] = 1.0;
    const ChebSeries tk(g.x_lo(), g.x_hi(), unit);
    // dTheta = B T_k, ds = -(w dTheta)'' / w.
    auto dtheta = SampledFunction::from(g.grid, [&](double x) { return tk(x); }) * bump;
    const auto ds = divide_by_weight(g, (g.weight * dtheta).derivative(2));
    std::vector<double> dchi(n);
    for (int i = 0; i < n; ++i) dchi[i] = -dchi_ds[i] * ds[i];
    project_out(dchi, out.jacobian.col(k));
  }
  return out;
}

CriticalSolveResult residual_minimize(const GeometryPtr& geom, const FunctionDescriptor& f,
                                      const FunctionDescriptor& h, const HolomorphyPotential& phi,
                                      const MetricProfile& init_profile, MinimizeOptions options) {
  if (!f.is_real()) throw Error("f must be real valued, got " + f.render());
  require_admissible(init_profile);
  const auto& grid = *geom->grid;
  const int n = grid.size();
  const int m = options.degree + 1;

  // Initial coefficients: least-squares fit of (Theta_init - Theta_round) by B T_k.
  const auto round = round_profile(geom).theta;
  const auto bump = boundary_bump(*geom);
  Eigen::MatrixXd basis(n, m);
  Eigen::VectorXd rhs(n);
  for (int k = 0; k < m; ++k) {
    std::vector<double> unit(k + 1, 0.0);
    unit[k] = 1.0;
    const ChebSeries tk(geom->x_lo(), geom->x_hi(), unit);
    for (int i = 0; i < n; ++i) basis(i, k) = bump[i] * tk(grid.node(i));
  }
  for (int i = 0; i < n; ++i) rhs[i] = init_profile.theta[i] - round[i];
  Eigen::VectorXd q = basis.colPivHouseholderQr().solve(rhs);

  auto objective = [](const DefectResidual& r) { return r.residual.squaredNorm(); };
  auto admissible = [&](const MetricProfile& pr) {
    for (int i = 1; i + 1 < n; ++i)
      if (!(pr.theta[i] > 0.0)) return false;
    return true;
  };

  DefectResidual cur = defect_residual(geom, f, h, phi, q);
  std::vector<double> trace{objective(cur)};
  int it = 0;
  for (;; ++it) {
    const Eigen::VectorXd grad = 2.0 * cur.jacobian.transpose() * cur.residual;
    if (grad.norm() < options.grad_tol || objective(cur) < 1e-28) break;
    if (it >= options.max_iter) throw ConvergenceError("residual_minimize: iteration limit reached", trace);
    const Eigen::VectorXd dir = cur.jacobian.completeOrthogonalDecomposition().solve(-cur.residual);
    const double slope = grad.dot(dir);
    double lambda = 1.0;
    bool accepted = false;
    for (int k = 0; k < 40 && !accepted; ++k, lambda *= 0.5) {
      const Eigen::VectorXd trial_q = q + lambda * dir;
      if (!admissible(profile_from_coefficients(geom, trial_q))) continue;
      try {
        DefectResidual trial = defect_residual(geom, f, h, phi, trial_q);
        if (objective(trial) <= objective(cur) + 1e-4 * lambda * slope) {
          q = trial_q;
          cur = std::move(trial);
          accepted = true;
        }
      } catch (const DomainError&) {
      }
    }
    trace.push_back(objective(cur));
    if (!accepted) throw ConvergenceError("residual_minimize: line search failed", trace);
  }

  const Problem p{geom, f, h, phi, f.constant_derivative() ? Mode::extremal : Mode::shooting, {}};
  auto res = finish(p, cur.profile.theta.values(), options.defect);
  res.iterations = it;
  res.residual_trace = std::move(trace);
  return res;
}

IterationTrace iterate(const GeometryPtr& geom, const FunctionDescriptor& f, const FunctionDescriptor& h,
                       const HolomorphyPotential& phi0, IterationOptions options) {
  if (options.max_steps < 1) throw std::invalid_argument("max_steps must be at least 1");
  IterationTrace trace;
  HolomorphyPotential phi = phi0;
  for (int i = 0; i < options.max_steps; ++i) {
    IterationStep step;
    step.index = i;
    step.phi = phi;
    try {
      const auto res = solve_critical(geom, f, h, phi, std::nullopt, options.solver);
      step.alpha = res.alpha.real();
      step.beta = res.beta.real();
      step.defect_affine = res.report.defect_affine;
      step.theta_max = res.profile.theta.max_abs();
      step.newton_iterations = res.iterations;
      step.outcome = res.outcome;
      trace.fields_collinear = trace.fields_collinear && res.report.is_critical;
    } catch (const Error& e) {
      step.status = IterationStatus::failed;
      step.message = e.what();
      trace.steps.push_back(std::move(step));
      break;
    }
    if (std::abs(step.alpha) < options.zero_field_tol) {
      step.status = IterationStatus::zero_field;
    } else if (!trace.steps.empty() &&
               std::max(std::abs(step.alpha - trace.steps.back().alpha), std::abs(step.beta - trace.steps.back().beta)) <
                   options.converged_tol) {
      step.status = IterationStatus::converged;
    } else {
      step.status = IterationStatus::continued;
    }
    const bool stop = step.status != IterationStatus::continued;
    // The next field is alpha X, with the critical psi as its preassigned potential.
    HolomorphyPotential next{step.alpha, step.beta, 0.0};
    next.target = volume_integral(*geom, next.sampled(geom->grid));
    trace.steps.push_back(std::move(step));
    if (stop) break;
    phi = next;
  }
  return trace;
}

}  // namespace kahler
