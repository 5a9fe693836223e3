#pragma once

#include "kahler/potentials.hpp"

#include <vector>

namespace kahler {

/// Real-convention factors of the first-order dictionary
///   dTheta = kappa_theta * Theta^2 u'',   dphi = kappa_phi * Theta u' phi'.
/// They are fixed by the oracles in pin_conventions(), never by hand.
struct Conventions {
  double kappa_theta = 0.0;
  double kappa_phi = 0.0;
};

/// A direction in the Kähler class: the variation u of the Kähler potential, as an
/// invariant function of the moment coordinate.
struct DeformationPath {
  SampledFunction u;
};

struct FirstOrder {
  SampledFunction d_theta;
  /// Variation of the holomorphy potential at a fixed point of the manifold.
  SampledFunction d_phi;
  /// delta(omega^m) / omega^m at a fixed point.
  SampledFunction volume_density;
};

FirstOrder first_order(const MetricProfile& profile, const DeformationPath& path, const HolomorphyPotential& phi,
                       const Conventions& conv);
FirstOrder first_order(const MetricProfile& profile, const DeformationPath& path);

struct ScalarVariation {
  /// At fixed moment coordinate: -(w dTheta)'' / w.
  SampledFunction fixed_x;
  /// At a fixed point of the manifold: fixed_x + dphi * s'.
  SampledFunction fixed_point;
};

ScalarVariation delta_s(const MetricProfile& profile, const DeformationPath& path, const Conventions& conv);
ScalarVariation delta_s(const MetricProfile& profile, const DeformationPath& path);

/// -kappa_theta * C_vol * int(w Theta^2 psi'' u'' dx) with psi the EL potential, evaluated
/// as -kappa_theta * C_vol * int(psi (w Theta^2 u'')'' dx).
Complex delta_S_analytic(const MetricProfile& profile, const FunctionDescriptor& f, const FunctionDescriptor& h,
                         const HolomorphyPotential& phi, const DeformationPath& path, const Conventions& conv);
Complex delta_S_analytic(const MetricProfile& profile, const FunctionDescriptor& f, const FunctionDescriptor& h,
                         const HolomorphyPotential& phi, const DeformationPath& path);

struct Transported {
  MetricProfile profile;
  HolomorphyPotential phi;
};

/// Finite motion G_t = G - t u of the symplectic potential (G'' = 1 / Theta), i.e.
/// Theta_t = Theta / (1 - t Theta u''). The potential keeps its normalization, so as a
/// function of the moment coordinate it is unchanged. Raises PathExitsClass when
/// G_t'' loses positivity.
Transported transport(const MetricProfile& profile, const HolomorphyPotential& phi, const DeformationPath& path,
                      double t);

/// Central difference of S along transport; with `richardson`, the extrapolation
/// (4 D(step/2) - D(step)) / 3.
Complex delta_S_numeric(const MetricProfile& profile, const FunctionDescriptor& f, const FunctionDescriptor& h,
                        const HolomorphyPotential& phi, const DeformationPath& path, double step,
                        bool richardson = false);

/// First-order change of C_vol * int(h(phi) omega^m) computed at fixed points of the
/// manifold from the dictionary: int((h'(phi) dphi + h(phi) volume_density) omega^m).
Complex equivariant_first_variation(const MetricProfile& profile, const FunctionDescriptor& h,
                                    const HolomorphyPotential& phi, const DeformationPath& path,
                                    const Conventions& conv);

struct ConvergenceStudy {
  std::vector<double> steps;
  std::vector<double> errors;
  /// log10(errors[k] / errors[k+1]) / log10(steps[k] / steps[k+1]).
  std::vector<double> orders;
  double min_order = 0.0;
  Complex analytic;
};

/// |delta_S_numeric(step) - delta_S_analytic| over the given steps. Steps are evaluated
/// concurrently and reported in descending step order.
ConvergenceStudy convergence_study(const MetricProfile& profile, const FunctionDescriptor& f,
                                   const FunctionDescriptor& h, const HolomorphyPotential& phi,
                                   const DeformationPath& path, std::vector<double> steps = {1e-2, 1e-3, 1e-4});

struct CandidateCheck {
  double value;
  double max_error;
  bool passed;
};

struct PinningReport {
  Conventions conventions;
  std::vector<CandidateCheck> kappa_theta_candidates;
  std::vector<CandidateCheck> kappa_phi_candidates;
  bool ok = false;
};

/// Runs the pinning oracles over the candidate set {1, -1, 1/2, -1/2}:
///  kappa_theta: finite differences of transport against kappa Theta^2 u'', together with
///    delta_S_numeric against delta_S_analytic;
///  kappa_phi: vanishing of equivariant_first_variation for h = id and h = pow:2.
PinningReport pin_conventions();

/// The pinned conventions, computed once per process. Throws Error if pinning fails.
const Conventions& pinned_conventions();

}  // namespace kahler
