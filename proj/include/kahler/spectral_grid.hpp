#pragma once

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace kahler {

/// Chebyshev series sum_k c_k T_k(t) on [lo, hi], with t the affine image of x in [-1, 1].
class ChebSeries {
 public:
  ChebSeries(double lo, double hi, std::vector<double> coeffs);

  double operator()(double x) const;
  ChebSeries derivative() const;
  /// Antiderivative vanishing at lo; degree grows by one.
  ChebSeries antiderivative() const;

  const std::vector<double>& coeffs() const { return coeffs_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }

 private:
  double lo_, hi_;
  std::vector<double> coeffs_;
};

/// Chebyshev-Gauss-Lobatto collocation grid on [lo, hi], nodes in ascending order.
///
/// Holds dense first- and second-derivative matrices (built with the trigonometric
/// node-difference identities and the negative-sum trick) and Clenshaw-Curtis weights.
class SpectralGrid {
 public:
  static constexpr int kMinNodes = 8;
  static constexpr int kDefaultNodes = 129;

  static std::shared_ptr<const SpectralGrid> make(int n_nodes, double lo, double hi);

  int size() const { return static_cast<int>(nodes_.size()); }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double length() const { return hi_ - lo_; }
  std::span<const double> nodes() const { return nodes_; }
  double node(int i) const { return nodes_[i]; }
  const Eigen::MatrixXd& d1() const { return d1_; }
  const Eigen::MatrixXd& d2() const { return d2_; }
  std::span<const double> quadrature_weights() const { return weights_; }

  std::vector<double> differentiate(std::span<const double> values, int order) const;
  double integrate(std::span<const double> values) const;
  ChebSeries series(std::span<const double> values) const;
  /// Barycentric evaluation of the interpolant through all nodes.
  double interpolate(std::span<const double> values, double x) const;
  /// Value at an endpoint node (index 0 or size()-1) extrapolated from the
  /// interpolant through the remaining nodes. Used where a quantity is a 0/0
  /// limit at a degenerate endpoint.
  double extrapolate_endpoint(std::span<const double> values, int endpoint) const;

  std::vector<double> sample(const std::function<double(double)>& fn) const;

 private:
  SpectralGrid(int n_nodes, double lo, double hi);

  double lo_, hi_;
  std::vector<double> nodes_;
  std::vector<double> bary_;
  std::vector<double> weights_;
  Eigen::MatrixXd d1_, d2_;
  // Barycentric weights of the node sets with one endpoint removed.
  std::vector<double> bary_drop_lo_, bary_drop_hi_;
};

using GridPtr = std::shared_ptr<const SpectralGrid>;

/// Real values at the nodes of a spectral grid.
class SampledFunction {
 public:
  SampledFunction() = default;
  SampledFunction(GridPtr grid, std::vector<double> values);
  static SampledFunction from(GridPtr grid, const std::function<double(double)>& fn);
  static SampledFunction constant(GridPtr grid, double c);

  const GridPtr& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }
  int size() const { return static_cast<int>(values_.size()); }
  double operator[](int i) const { return values_[i]; }
  double& operator[](int i) { return values_[i]; }
  double front() const { return values_.front(); }
  double back() const { return values_.back(); }

  SampledFunction derivative(int order = 1) const;
  double integral() const;
  double at(double x) const { return grid_->interpolate(values_, x); }
  double max_abs() const;

  SampledFunction& operator+=(const SampledFunction& o);
  SampledFunction& operator-=(const SampledFunction& o);
  SampledFunction& operator*=(double c);

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

SampledFunction operator+(SampledFunction a, const SampledFunction& b);
SampledFunction operator-(SampledFunction a, const SampledFunction& b);
SampledFunction operator*(SampledFunction a, double c);
SampledFunction operator*(double c, SampledFunction a);
/// Pointwise product.
SampledFunction operator*(const SampledFunction& a, const SampledFunction& b);

/// Real and imaginary parts of a complex-valued sampled function.
struct ComplexSampled {
  SampledFunction re;
  SampledFunction im;

  bool is_real() const { return im.max_abs() == 0.0; }
};

}  // namespace kahler
