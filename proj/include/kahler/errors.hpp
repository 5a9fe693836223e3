#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace kahler {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class AdmissibilityError : public Error {
 public:
  using Error::Error;
};

class DegenerateWeight : public Error {
 public:
  using Error::Error;
};

class UnsupportedGeometry : public Error {
 public:
  using Error::Error;
};

/// A function argument left the declared domain of f or h.
class DomainError : public Error {
 public:
  DomainError(const std::string& what, int node, double value)
      : Error(what), node_(node), value_(value) {}
  int node() const { return node_; }
  double value() const { return value_; }

 private:
  int node_;
  double value_;
};

/// Finite transport left the admissible cone (G'' lost positivity).
class PathExitsClass : public Error {
 public:
  PathExitsClass(const std::string& what, double t) : Error(what), t_(t) {}
  double t() const { return t_; }

 private:
  double t_;
};

class SingularPotential : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> residuals)
      : Error(what), residuals_(std::move(residuals)) {}
  const std::vector<double>& residual_trace() const { return residuals_; }

 private:
  std::vector<double> residuals_;
};

/// f' is constant and h(phi) is not affine: no metric in the class is critical.
class NoCriticalMetric : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace kahler
