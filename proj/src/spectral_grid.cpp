#include "kahler/spectral_grid.hpp"

#include "kahler/errors.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace kahler {

namespace {

double to_unit(double x, double lo, double hi) { return (2.0 * x - lo - hi) / (hi - lo); }

// Barycentric weights of an arbitrary node set, computed on a rescaled copy of the
// nodes (interval length 4) so the products neither overflow nor underflow.
std::vector<double> generic_barycentric(const std::vector<double>& x, double lo, double hi) {
  const double scale = 4.0 / (hi - lo);
  std::vector<double> w(x.size(), 1.0);
  for (size_t j = 0; j < x.size(); ++j) {
    double p = 1.0;
    for (size_t k = 0; k < x.size(); ++k) {
      if (k != j) p *= (x[j] - x[k]) * scale;
    }
    w[j] = 1.0 / p;
  }
  return w;
}

double barycentric_eval(std::span<const double> x, std::span<const double> w,
                        std::span<const double> f, double at) {
  double num = 0.0, den = 0.0;
  for (size_t j = 0; j < x.size(); ++j) {
    const double d = at - x[j];
    if (d == 0.0) return f[j];
    const double t = w[j] / d;
    num += t * f[j];
    den += t;
  }
  return num / den;
}

}  // namespace

ChebSeries::ChebSeries(double lo, double hi, std::vector<double> coeffs)
    : lo_(lo), hi_(hi), coeffs_(std::move(coeffs)) {}

double ChebSeries::operator()(double x) const {
  const double t = to_unit(x, lo_, hi_);
  // Clenshaw recurrence.
  double b1 = 0.0, b2 = 0.0;
  for (size_t k = coeffs_.size(); k-- > 1;) {
    const double b0 = coeffs_[k] + 2.0 * t * b1 - b2;
    b2 = b1;
    b1 = b0;
  }
  return (coeffs_.empty() ? 0.0 : coeffs_[0]) + t * b1 - b2;
}

ChebSeries ChebSeries::derivative() const {
  const size_t n = coeffs_.size();
  if (n <= 1) return ChebSeries(lo_, hi_, {0.0});
  std::vector<double> d(n + 1, 0.0);
  for (int k = static_cast<int>(n) - 1; k >= 1; --k) d[k - 1] = d[k + 1] + 2.0 * k * coeffs_[k];
  d.resize(n - 1);
  d[0] *= 0.5;
  const double scale = 2.0 / (hi_ - lo_);
  for (auto& v : d) v *= scale;
  return ChebSeries(lo_, hi_, std::move(d));
}

ChebSeries ChebSeries::antiderivative() const {
  const size_t n = coeffs_.size();
  std::vector<double> a(coeffs_);
  a.resize(n + 2, 0.0);
  std::vector<double> b(n + 1, 0.0);
  for (size_t k = 1; k <= n; ++k) {
    const double prev = (k == 1) ? 2.0 * a[0] : a[k - 1];
    b[k] = (prev - a[k + 1]) / (2.0 * static_cast<double>(k));
  }
  const double half = 0.5 * (hi_ - lo_);
  for (auto& v : b) v *= half;
  // Fix the constant so the antiderivative vanishes at t = -1.
  double at_lo = 0.0;
  for (size_t k = 1; k <= n; ++k) at_lo += (k % 2 == 0 ? 1.0 : -1.0) * b[k];
  b[0] = -at_lo;
  return ChebSeries(lo_, hi_, std::move(b));
}

std::shared_ptr<const SpectralGrid> SpectralGrid::make(int n_nodes, double lo, double hi) {
  if (n_nodes < kMinNodes) throw std::invalid_argument("spectral grid needs at least 8 nodes");
  if (!(lo < hi)) throw std::invalid_argument("spectral grid interval must satisfy lo < hi");
  return std::shared_ptr<const SpectralGrid>(new SpectralGrid(n_nodes, lo, hi));
}

SpectralGrid::SpectralGrid(int n_nodes, double lo, double hi) : lo_(lo), hi_(hi) {
  const int N = n_nodes;
  const int n = N - 1;
  const double pi = std::numbers::pi;
  const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);

  // Descending reference nodes t_k = cos(k pi / n), written symmetrically as a sine.
  std::vector<double> t(N);
  for (int k = 0; k < N; ++k) t[k] = std::sin(pi * (n - 2.0 * k) / (2.0 * n));

  // Weideman-Reddy differentiation matrices on the descending reference nodes.
  Eigen::MatrixXd dx(N, N), c(N, N), z(N, N);
  for (int j = 0; j < N; ++j) {
    for (int k = 0; k < N; ++k) {
      dx(j, k) = (j == k) ? 1.0
                          : 2.0 * std::sin((j + k) * pi / (2.0 * n)) *
                                std::sin((k - j) * pi / (2.0 * n));
      const double cj = (j == 0 || j == n) ? 2.0 : 1.0;
      const double ck = (k == 0 || k == n) ? 2.0 : 1.0;
      c(j, k) = ((j + k) % 2 == 0 ? 1.0 : -1.0) * cj / ck;
      z(j, k) = (j == k) ? 0.0 : 1.0 / dx(j, k);
    }
  }
  Eigen::MatrixXd d = Eigen::MatrixXd::Identity(N, N);
  Eigen::MatrixXd ref[2];
  for (int ell = 1; ell <= 2; ++ell) {
    Eigen::MatrixXd diag_rep = d.diagonal().replicate(1, N);
    d = static_cast<double>(ell) * z.cwiseProduct(c.cwiseProduct(diag_rep) - d);
    for (int j = 0; j < N; ++j) {
      double s = 0.0;
      for (int k = 0; k < N; ++k)
        if (k != j) s += d(j, k);
      d(j, j) = -s;
    }
    ref[ell - 1] = d;
  }

  // Flip to ascending order and map to [lo, hi].
  nodes_.resize(N);
  d1_.resize(N, N);
  d2_.resize(N, N);
  for (int i = 0; i < N; ++i) {
    nodes_[i] = mid - half * t[i];
    for (int j = 0; j < N; ++j) {
      d1_(i, j) = ref[0](n - i, n - j) / half;
      d2_(i, j) = ref[1](n - i, n - j) / (half * half);
    }
  }
  nodes_.front() = lo;
  nodes_.back() = hi;

  // Clenshaw-Curtis weights (symmetric, so the flip is harmless).
  weights_.assign(N, 0.0);
  for (int k = 0; k <= n; ++k) {
    double s = 0.0;
    for (int j = 1; j <= n / 2; ++j) {
      const double b = (2 * j == n) ? 1.0 : 2.0;
      s += b / (4.0 * j * j - 1.0) * std::cos(2.0 * j * k * pi / n);
    }
    const double ck = (k == 0 || k == n) ? 1.0 : 2.0;
    weights_[k] = ck / n * (1.0 - s) * half;
  }

  bary_.resize(N);
  for (int j = 0; j < N; ++j) {
    bary_[j] = (j % 2 == 0 ? 1.0 : -1.0) * ((j == 0 || j == n) ? 0.5 : 1.0);
  }
  std::vector<double> without_lo(nodes_.begin() + 1, nodes_.end());
  std::vector<double> without_hi(nodes_.begin(), nodes_.end() - 1);
  bary_drop_lo_ = generic_barycentric(without_lo, lo, hi);
  bary_drop_hi_ = generic_barycentric(without_hi, lo, hi);
}

std::vector<double> SpectralGrid::differentiate(std::span<const double> values, int order) const {
  if (order != 1 && order != 2) throw std::invalid_argument("derivative order must be 1 or 2");
  const auto& m = (order == 1) ? d1_ : d2_;
  // Rows of D sum to zero, so D f = sum_j D_ij (f_j - f_i). The differences keep
  // constants exact and avoid cancellation between the large diagonal and the row.
  const int n = size();
  std::vector<double> r(n, 0.0);
  for (int j = 0; j < n; ++j) {
    const double fj = values[j];
    for (int i = 0; i < n; ++i) r[i] += m(i, j) * (fj - values[i]);
  }
  return r;
}

double SpectralGrid::integrate(std::span<const double> values) const {
  double s = 0.0;
  for (size_t i = 0; i < values.size(); ++i) s += weights_[i] * values[i];
  return s;
}

ChebSeries SpectralGrid::series(std::span<const double> values) const {
  const int N = size();
  const int n = N - 1;
  const double pi = std::numbers::pi;
  // Node i (ascending) is t = -cos(i pi / n) = cos((n - i) pi / n).
  std::vector<double> a(N, 0.0);
  for (int j = 0; j < N; ++j) {
    double s = 0.0;
    for (int k = 0; k <= n; ++k) {
      const double f = values[n - k];
      const double wk = (k == 0 || k == n) ? 0.5 : 1.0;
      s += wk * f * std::cos(static_cast<double>((static_cast<long>(j) * k) % (2L * n)) * pi / n);
    }
    a[j] = 2.0 / n * s;
  }
  a[0] *= 0.5;
  a[n] *= 0.5;
  return ChebSeries(lo_, hi_, std::move(a));
}

double SpectralGrid::interpolate(std::span<const double> values, double x) const {
  return barycentric_eval(nodes_, bary_, values, x);
}

double SpectralGrid::extrapolate_endpoint(std::span<const double> values, int endpoint) const {
  if (endpoint == 0) {
    return barycentric_eval(std::span(nodes_).subspan(1), bary_drop_lo_, values.subspan(1), lo_);
  }
  const size_t m = nodes_.size() - 1;
  return barycentric_eval(std::span(nodes_).first(m), bary_drop_hi_, values.first(m), hi_);
}

std::vector<double> SpectralGrid::sample(const std::function<double(double)>& fn) const {
  std::vector<double> v(nodes_.size());
  for (size_t i = 0; i < v.size(); ++i) v[i] = fn(nodes_[i]);
  return v;
}

SampledFunction::SampledFunction(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw std::invalid_argument("sampled function needs a grid");
  if (static_cast<int>(values_.size()) != grid_->size())
    throw std::invalid_argument("sample count does not match grid size");
  for (double v : values_)
    if (!std::isfinite(v)) throw std::invalid_argument("sampled function values must be finite");
}

SampledFunction SampledFunction::from(GridPtr grid, const std::function<double(double)>& fn) {
  auto v = grid->sample(fn);
  return SampledFunction(std::move(grid), std::move(v));
}

SampledFunction SampledFunction::constant(GridPtr grid, double c) {
  std::vector<double> v(grid->size(), c);
  return SampledFunction(std::move(grid), std::move(v));
}

SampledFunction SampledFunction::derivative(int order) const {
  return SampledFunction(grid_, grid_->differentiate(values_, order));
}

double SampledFunction::integral() const { return grid_->integrate(values_); }

double SampledFunction::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

SampledFunction& SampledFunction::operator+=(const SampledFunction& o) {
  for (size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
  return *this;
}

SampledFunction& SampledFunction::operator-=(const SampledFunction& o) {
  for (size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
  return *this;
}

SampledFunction& SampledFunction::operator*=(double c) {
  for (auto& v : values_) v *= c;
  return *this;
}

SampledFunction operator+(SampledFunction a, const SampledFunction& b) { return a += b; }
SampledFunction operator-(SampledFunction a, const SampledFunction& b) { return a -= b; }
SampledFunction operator*(SampledFunction a, double c) { return a *= c; }
SampledFunction operator*(double c, SampledFunction a) { return a *= c; }

SampledFunction operator*(const SampledFunction& a, const SampledFunction& b) {
  std::vector<double> v(a.values());
  for (size_t i = 0; i < v.size(); ++i) v[i] *= b[static_cast<int>(i)];
  return SampledFunction(a.grid(), std::move(v));
}

}  // namespace kahler
