#pragma once

#include "kahler/discretization.hpp"
#include "kahler/function_descriptor.hpp"
#include "kahler/geometry.hpp"

#include <optional>

namespace kahler {

/// Holomorphy potential scale * x + shift of the field scale * X, where x is the moment
/// coordinate of X. `target` is the prescribed value of int(phi omega^m).
struct HolomorphyPotential {
  double scale = 1.0;
  double shift = 0.0;
  double target = 0.0;

  double operator()(double x) const { return scale * x + shift; }
  SampledFunction sampled(const GridPtr& grid) const;
};

/// C_vol * int(scale * x * w dx): the target that makes the shift vanish.
double default_normalization_target(const ProfileGeometry& geom, double scale = 1.0);

/// Chooses the shift so that int(phi omega^m) = target.
HolomorphyPotential normalize_potential(const ProfileGeometry& geom, std::optional<double> target = std::nullopt,
                                        double scale = 1.0);

/// C_vol * int(f(s) h(phi) w dx).
Complex eval_S(const MetricProfile& profile, const FunctionDescriptor& f, const FunctionDescriptor& h,
               const HolomorphyPotential& phi);

/// psi = f'(s) h(phi) at every node.
ComplexSampled el_potential(const MetricProfile& profile, const FunctionDescriptor& f, const FunctionDescriptor& h,
                            const HolomorphyPotential& phi);

/// L psi = (w Theta^2 psi'')'' / w. Its kernel is the affine functions.
SampledFunction lichnerowicz(const MetricProfile& profile, const SampledFunction& psi);

/// C_vol * int(w Theta^2 (psi'')^2 dx), the quadratic form of L.
double lichnerowicz_form(const MetricProfile& profile, const SampledFunction& psi);

struct DefectOptions {
  /// Criticality threshold is tol_affine * (1 + max|psi|).
  double tol_affine = 1e-8;
};

struct ELReport {
  ComplexSampled psi;
  Complex alpha;
  Complex beta;
  /// sqrt(C_vol) times the weighted L2 distance from psi to the affine functions.
  double defect_affine = 0.0;
  /// sqrt(C_vol * int(w Theta^2 |psi''|^2 dx)).
  double defect_operator = 0.0;
  double tolerance = 0.0;
  bool is_critical = false;
};

ELReport holomorphy_defect(const MetricProfile& profile, const ComplexSampled& psi, DefectOptions options = {});
ELReport holomorphy_defect(const MetricProfile& profile, const SampledFunction& psi, DefectOptions options = {});

/// C_vol * int((s - s0) phi w dx).
double futaki(const MetricProfile& profile, const HolomorphyPotential& phi);

/// C_vol * int(h(phi) w dx).
Complex equivariant_integral(const MetricProfile& profile, const FunctionDescriptor& h,
                             const HolomorphyPotential& phi);

/// Evaluates fn at every sample, raising DomainError at the first node outside its domain.
ComplexSampled apply(const FunctionDescriptor& fn, const SampledFunction& arg, const char* label);

}  // namespace kahler
