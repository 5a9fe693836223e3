#pragma once

#include <complex>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace kahler {

using Complex = std::complex<double>;

/// A function from the closed catalog used for f (real) and h (possibly complex valued).
///
/// Grammar (colon separated prefix form):
///   const:<c> | id | affine:<a>:<b> | pow:<p> | exp | log |
///   scaled:<c>:<inner> | sum:<inner>:<inner> | comp:<a>:<b>:<inner>
/// where comp means inner(a z + b). Numbers c, a, b of const/affine/scaled may be complex
/// ("1.5", "2i", "1-0.5i"); p and the comp coefficients are real.
class FunctionDescriptor {
 public:
  enum class Tag { constant, identity, affine, power, exponential, log_guarded, scaled, sum, composed_with_affine };

  static FunctionDescriptor constant(Complex c);
  static FunctionDescriptor identity();
  static FunctionDescriptor affine(Complex a, Complex b);
  static FunctionDescriptor power(double p);
  static FunctionDescriptor exponential();
  static FunctionDescriptor log_guarded();
  static FunctionDescriptor scaled(Complex c, FunctionDescriptor inner);
  static FunctionDescriptor sum(FunctionDescriptor a, FunctionDescriptor b);
  static FunctionDescriptor composed_with_affine(FunctionDescriptor inner, double a, double b);

  static FunctionDescriptor parse(std::string_view text);
  std::string render() const;

  Tag tag() const { return node_->tag; }

  bool in_domain(double z) const;
  Complex value(double z) const;
  Complex derivative(double z) const;
  Complex second_derivative(double z) const;

  /// All coefficients real, so the function maps reals to reals.
  bool is_real() const;
  /// The derivative is constant (as a function); its value if so.
  std::optional<Complex> constant_derivative() const;
  bool is_constant() const;

  /// Monotone inverse of the function itself, for identity, affine (a != 0),
  /// power (p != 0), exponential, log and real scalings/compositions of these.
  bool has_inverse() const;
  double inverse(double y) const;

  /// Monotone inverse of the derivative on its declared branch: y -> z with f'(z) = y.
  /// Raises RangeError when y lies outside the image of f'.
  bool has_derivative_inverse() const;
  double derivative_inverse(double y) const;

  bool operator==(const FunctionDescriptor& o) const;

 private:
  struct Node {
    Tag tag;
    Complex c1{0.0};
    Complex c2{0.0};
    double p = 0.0;
    std::shared_ptr<const Node> a;
    std::shared_ptr<const Node> b;
  };
  explicit FunctionDescriptor(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  std::shared_ptr<const Node> node_;
};

/// Decimal rendering with 17 significant digits.
std::string format_real(double v);
/// Whole-string decimal parse (std::from_chars); ParseError otherwise.
double parse_real(std::string_view text);
/// "re", "re+imi" or "re-imi".
std::string format_complex(Complex v);
Complex parse_complex(std::string_view text);

}  // namespace kahler
