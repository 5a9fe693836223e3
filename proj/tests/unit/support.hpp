#pragma once

#include "kahler/discretization.hpp"
#include "kahler/geometry.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace kt {

inline constexpr double pi = std::numbers::pi;

inline double max_abs_diff(const kahler::SampledFunction& f, double (*g)(double)) {
  double m = 0.0;
  for (int i = 0; i < f.size(); ++i) m = std::max(m, std::abs(f[i] - g(f.grid()->node(i))));
  return m;
}

template <typename Fn>
double max_abs_diff(const kahler::SampledFunction& f, Fn g) {
  double m = 0.0;
  for (int i = 0; i < f.size(); ++i) m = std::max(m, std::abs(f[i] - g(f.grid()->node(i))));
  return m;
}

inline double stddev(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(v.size()));
}

inline kahler::GeometryPtr cp1() {
  static const auto g = kahler::make_cp1_geometry();
  return g;
}

}  // namespace kt
