#pragma once

#include "kahler/geometry.hpp"
#include "kahler/spectral_grid.hpp"

#include <cstdint>

namespace kahler {

SampledFunction differentiate(const SampledFunction& f, int order);
double integrate(const SampledFunction& f);

/// Weighted least-squares fit of alpha*x + beta.
struct AffineFit {
  double alpha;
  double beta;
  /// sqrt of min int |psi - (alpha x + beta)|^2 w dx.
  double residual_norm;
};

AffineFit affine_projection(const SampledFunction& psi, const SampledFunction& weight);

struct ComplexAffineFit {
  AffineFit re;
  AffineFit im;
  double residual_norm() const;
};

ComplexAffineFit affine_projection(const ComplexSampled& psi, const SampledFunction& weight);

/// SplitMix64. The stream for a seed s is: state = s; each draw adds 0x9E3779B97F4A7C15
/// to the state and returns the standard splitmix finalizer of it. uniform() maps the top
/// 53 bits to [0, 1).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  double uniform();
  /// Uniform on [-1, 1).
  double symmetric() { return 2.0 * uniform() - 1.0; }

 private:
  std::uint64_t state_;
};

struct RandomProfileOptions {
  int degree = 6;
  int max_halvings = 20;
};

/// Theta_round + B(x) q(x), B = (x - x_lo)^2 (x_hi - x)^2, q = sum_k c_k T_k(t) with
/// c_k = amplitude * (2U_k - 1) drawn in order k = 0..degree. The amplitude is halved
/// until Theta > 0 on the interior.
MetricProfile random_admissible_profile(const GeometryPtr& geom, std::uint64_t seed, double amplitude,
                                        RandomProfileOptions options = {});

/// Coefficients drawn exactly as random_admissible_profile draws them (before halving).
std::vector<double> random_chebyshev_coefficients(std::uint64_t seed, int degree, double amplitude);

/// B(x) = (x - x_lo)^2 (x_hi - x)^2 on the geometry's grid.
SampledFunction boundary_bump(const ProfileGeometry& geom);

}  // namespace kahler
