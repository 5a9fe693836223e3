#pragma once

#include "kahler/potentials.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace kahler {

enum class SolveOutcome {
  solved,
  /// f' is constant and h(phi) affine: every metric is critical. The returned profile is
  /// the extremal representative of the class (s affine) and (alpha, beta) are the
  /// coefficients of s.
  every_metric_critical,
};

struct AffineGuess {
  double alpha;
  double beta;
};

struct SolverOptions {
  int max_iter = 50;
  double fd_step = 1e-7;
  double boundary_tol = 1e-10;
  DefectOptions defect;
};

struct CriticalSolveResult {
  MetricProfile profile;
  Complex alpha;
  Complex beta;
  ELReport report;
  int iterations = 0;
  bool converged = false;
  SolveOutcome outcome = SolveOutcome::solved;
  std::vector<double> residual_trace;
};

/// Shooting on the affine coefficients of the EL potential: with
///   s(x) = (f')^{-1}((alpha x + beta) / h(phi(x))),
/// (w Theta)'' = A - w s is integrated from x_lo with Theta = 0, Theta' = slope_lo and
/// Newton drives the two mismatches at x_hi to zero.
CriticalSolveResult solve_critical(const GeometryPtr& geom, const FunctionDescriptor& f,
                                   const FunctionDescriptor& h, const HolomorphyPotential& phi,
                                   std::optional<AffineGuess> init = std::nullopt, SolverOptions options = {});

/// Default Newton start: affine projection of f'(s0) h(phi), or (0, 1) if f'(s0) is undefined.
AffineGuess default_initial_guess(const ProfileGeometry& geom, const FunctionDescriptor& f,
                                  const FunctionDescriptor& h, const HolomorphyPotential& phi);

struct MinimizeOptions {
  /// Degree of q in Theta = Theta_round + B q.
  int degree = 24;
  int max_iter = 100;
  double grad_tol = 1e-6;
  DefectOptions defect;
};

/// Weighted residual whose squared norm is the squared affine defect of the criticality
/// potential (psi, or s when f' is constant), with its analytic Jacobian in q.
struct DefectResidual {
  Eigen::VectorXd residual;
  Eigen::MatrixXd jacobian;
  MetricProfile profile;
};

DefectResidual defect_residual(const GeometryPtr& geom, const FunctionDescriptor& f, const FunctionDescriptor& h,
                               const HolomorphyPotential& phi, const Eigen::VectorXd& q, bool with_jacobian = true);

/// Theta_round + B q for Chebyshev coefficients q.
MetricProfile profile_from_coefficients(const GeometryPtr& geom, const Eigen::VectorXd& q);

/// Gauss-Newton descent with Armijo backtracking on the squared affine defect over the
/// admissible family Theta_round + B q.
CriticalSolveResult residual_minimize(const GeometryPtr& geom, const FunctionDescriptor& f,
                                      const FunctionDescriptor& h, const HolomorphyPotential& phi,
                                      const MetricProfile& init_profile, MinimizeOptions options = {});

enum class IterationStatus { continued, converged, zero_field, failed };

std::string to_string(IterationStatus status);
std::string to_string(SolveOutcome outcome);

struct IterationStep {
  int index = 0;
  HolomorphyPotential phi;
  double alpha = 0.0;
  double beta = 0.0;
  double defect_affine = 0.0;
  double theta_max = 0.0;
  int newton_iterations = 0;
  SolveOutcome outcome = SolveOutcome::solved;
  IterationStatus status = IterationStatus::failed;
  std::string message;
};

struct IterationOptions {
  int max_steps = 5;
  double zero_field_tol = 1e-10;
  double converged_tol = 1e-8;
  SolverOptions solver;
};

struct IterationTrace {
  std::vector<IterationStep> steps;
  /// Every critical psi_i lies in span{1, x}, i.e. each new field is a multiple of X.
  /// In the circle-symmetric reduction this always holds, so fields linearly
  /// independent of X cannot arise.
  bool fields_collinear = true;
};

/// Solves for a critical metric, takes psi_i = alpha_i x + beta_i as the potential of the
/// next field alpha_i X, and repeats.
IterationTrace iterate(const GeometryPtr& geom, const FunctionDescriptor& f, const FunctionDescriptor& h,
                       const HolomorphyPotential& phi0, IterationOptions options = {});

}  // namespace kahler
