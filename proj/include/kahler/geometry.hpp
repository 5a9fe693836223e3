#pragma once

#include "kahler/spectral_grid.hpp"

#include <memory>
#include <string>
#include <vector>

namespace kahler {

enum class GeometryKind { cp1, cpm, custom };

/// Fixed Kähler-class data of a circle-symmetric geometry in momentum form.
///
/// A metric in the class is a profile Theta(x) >= 0 on [x_lo, x_hi] vanishing at the
/// ends with the prescribed slopes; its scalar curvature is s = (A - (w Theta)'') / w and
/// integrals against the volume form are vol_const * int(. w dx).
struct ProfileGeometry {
  GeometryKind kind = GeometryKind::custom;
  int dim = 1;
  GridPtr grid;
  SampledFunction weight;
  SampledFunction base_term;
  double slope_lo = 2.0;
  double slope_hi = -2.0;
  double vol_const = 0.0;
  /// For cpm geometries A(x) = base_coeff * x^(m-2).
  double base_coeff = 0.0;

  double x_lo() const { return grid->lo(); }
  double x_hi() const { return grid->hi(); }
  int nodes() const { return grid->size(); }
  /// "cp1", "cpm:<m>" or "custom".
  std::string name() const;
};

using GeometryPtr = std::shared_ptr<const ProfileGeometry>;

/// Coefficient of A(x) = c x^(m-2) on the U(m)-invariant CP^m ansatz with w = x^(m-1).
/// Checked against the Fubini-Study constancy oracle by pin_fubini_study.
double cpm_base_coefficient(int m);

struct FubiniStudyPin {
  int m = 2;
  /// Least-squares c in (x^(m-1) Theta_FS)'' = c x^(m-2) + b x^(m-1).
  double coefficient = 0.0;
  /// Max deviation of that fit over the nodes.
  double fit_residual = 0.0;
  /// Mean and standard deviation of s for Theta_FS on make_cpm_geometry(m).
  double s_mean = 0.0;
  double s_std = 0.0;
  /// |coefficient - cpm_base_coefficient(m)| <= 1e-8 and s_std < 1e-8.
  bool ok = false;
};

/// Recovers the coefficient of A(x) from the requirement that Theta_FS = 2x(1-x) has
/// constant scalar curvature, then measures that curvature on the shipped geometry.
FubiniStudyPin pin_fubini_study(int m, int nodes = SpectralGrid::kDefaultNodes);

GeometryPtr make_cp1_geometry(int nodes = SpectralGrid::kDefaultNodes);
GeometryPtr make_cpm_geometry(int m, int nodes = SpectralGrid::kDefaultNodes);
/// User-supplied class data; validates the ProfileGeometry invariants.
GeometryPtr make_custom_geometry(GridPtr grid, SampledFunction weight, SampledFunction base_term,
                                 double slope_lo, double slope_hi, int dim, double vol_const);
/// Rebuilds a named geometry ("cp1", "cpm:<m>") at a given grid size.
GeometryPtr make_named_geometry(const std::string& name, int nodes);

/// One metric in the class, represented by its momentum profile.
struct MetricProfile {
  GeometryPtr geometry;
  SampledFunction theta;

  const SpectralGrid& grid() const { return *geometry->grid; }
};

struct Violation {
  std::string invariant;
  double location;
  double magnitude;
};

struct ValidationTolerances {
  double boundary = 1e-8;
};

MetricProfile round_profile(const GeometryPtr& geom);
std::vector<Violation> validate(const MetricProfile& profile, ValidationTolerances tol = {});
/// Throws AdmissibilityError listing the violations, if any.
void require_admissible(const MetricProfile& profile, ValidationTolerances tol = {});

SampledFunction scalar_curvature(const MetricProfile& profile);

struct ClassConstants {
  double total_volume;
  double total_scalar;
  double s0;
};

/// Volume, total scalar curvature and average scalar curvature of the class, from
/// boundary data only (independent of the metric chosen in the class).
ClassConstants class_constants(const ProfileGeometry& geom);

/// numerator / w at every node. Interior zeros of w raise DegenerateWeight; an endpoint
/// where w vanishes gets the value extrapolated from the remaining nodes.
SampledFunction divide_by_weight(const ProfileGeometry& geom, const SampledFunction& numerator);

/// C_vol * int(values * w dx).
double volume_integral(const ProfileGeometry& geom, const SampledFunction& values);

}  // namespace kahler
