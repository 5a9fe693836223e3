#include "kahler/function_descriptor.hpp"

#include "kahler/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <vector>

namespace kahler {

namespace {

bool is_integer(double p) { return std::isfinite(p) && std::floor(p) == p; }

bool real_scalar(Complex c) { return c.imag() == 0.0; }

// Real root y^(1/k), continued to negative y with the sign of y when `odd_branch`.
double signed_root(double y, double k, bool odd_branch) {
  if (odd_branch) return std::copysign(std::pow(std::abs(y), 1.0 / k), y);
  return std::pow(y, 1.0 / k);
}

}  // namespace

double parse_real(std::string_view t) {
  double v = 0.0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (!t.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || first == last)
    throw ParseError("invalid number '" + std::string(t) + "'");
  return v;
}

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_complex(Complex v) {
  if (v.imag() == 0.0) return format_real(v.real());
  return format_real(v.real()) + (std::signbit(v.imag()) ? "-" : "+") + format_real(std::abs(v.imag())) + "i";
}

Complex parse_complex(std::string_view text) {
  if (text.empty()) throw ParseError("empty number");
  if (text.back() != 'i') return {parse_real(text), 0.0};
  const std::string_view body = text.substr(0, text.size() - 1);
  size_t split = std::string_view::npos;
  for (size_t k = body.size(); k-- > 1;) {
    if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
      split = k;
      break;
    }
  }
  auto imag_part = [](std::string_view s) {
    if (s.empty() || s == "+") return 1.0;
    if (s == "-") return -1.0;
    return parse_real(s);
  };
  if (split == std::string_view::npos) return {0.0, imag_part(body)};
  return {parse_real(body.substr(0, split)), imag_part(body.substr(split))};
}

FunctionDescriptor FunctionDescriptor::constant(Complex c) {
  return FunctionDescriptor(std::make_shared<Node>(Node{Tag::constant, c}));
}
FunctionDescriptor FunctionDescriptor::identity() {
  return FunctionDescriptor(std::make_shared<Node>(Node{Tag::identity}));
}
FunctionDescriptor FunctionDescriptor::affine(Complex a, Complex b) {
  return FunctionDescriptor(std::make_shared<Node>(Node{Tag::affine, a, b}));
}
FunctionDescriptor FunctionDescriptor::power(double p) {
  if (!std::isfinite(p)) throw ParseError("power exponent must be finite");
  Node n{Tag::power};
  n.p = p;
  return FunctionDescriptor(std::make_shared<Node>(n));
}
FunctionDescriptor FunctionDescriptor::exponential() {
  return FunctionDescriptor(std::make_shared<Node>(Node{Tag::exponential}));
}
FunctionDescriptor FunctionDescriptor::log_guarded() {
  return FunctionDescriptor(std::make_shared<Node>(Node{Tag::log_guarded}));
}
FunctionDescriptor FunctionDescriptor::scaled(Complex c, FunctionDescriptor inner) {
  Node n{Tag::scaled, c};
  n.a = inner.node_;
  return FunctionDescriptor(std::make_shared<Node>(n));
}
FunctionDescriptor FunctionDescriptor::sum(FunctionDescriptor a, FunctionDescriptor b) {
  Node n{Tag::sum};
  n.a = a.node_;
  n.b = b.node_;
  return FunctionDescriptor(std::make_shared<Node>(n));
}
FunctionDescriptor FunctionDescriptor::composed_with_affine(FunctionDescriptor inner, double a, double b) {
  Node n{Tag::composed_with_affine, Complex(a), Complex(b)};
  n.a = inner.node_;
  return FunctionDescriptor(std::make_shared<Node>(n));
}

namespace {

struct Parser {
  std::vector<std::string_view> tokens;
  size_t pos = 0;

  std::string_view next() {
    if (pos >= tokens.size()) throw ParseError("unexpected end of function expression");
    return tokens[pos++];
  }

  FunctionDescriptor parse() {
    const auto t = next();
    if (t == "const" || t == "constant") return FunctionDescriptor::constant(parse_complex(next()));
    if (t == "id" || t == "identity") return FunctionDescriptor::identity();
    if (t == "affine") {
      const auto a = parse_complex(next());
      return FunctionDescriptor::affine(a, parse_complex(next()));
    }
    if (t == "pow" || t == "power") return FunctionDescriptor::power(parse_real(next()));
    if (t == "exp" || t == "exponential") return FunctionDescriptor::exponential();
    if (t == "log" || t == "log_guarded") return FunctionDescriptor::log_guarded();
    if (t == "scaled") {
      const auto c = parse_complex(next());
      return FunctionDescriptor::scaled(c, parse());
    }
    if (t == "sum") {
      auto a = parse();
      return FunctionDescriptor::sum(std::move(a), parse());
    }
    if (t == "comp" || t == "composed_with_affine") {
      const double a = parse_real(next());
      const double b = parse_real(next());
      return FunctionDescriptor::composed_with_affine(parse(), a, b);
    }
    throw ParseError("unknown function tag '" + std::string(t) + "'");
  }
};

}  // namespace

FunctionDescriptor FunctionDescriptor::parse(std::string_view text) {
  Parser p;
  size_t start = 0;
  while (true) {
    const size_t colon = text.find(':', start);
    p.tokens.push_back(text.substr(start, colon == std::string_view::npos ? std::string_view::npos : colon - start));
    if (colon == std::string_view::npos) break;
    start = colon + 1;
  }
  auto f = p.parse();
  if (p.pos != p.tokens.size())
    throw ParseError("trailing tokens in function expression '" + std::string(text) + "'");
  return f;
}

std::string FunctionDescriptor::render() const {
  const Node& n = *node_;
  switch (n.tag) {
    case Tag::constant:
      return "const:" + format_complex(n.c1);
    case Tag::identity:
      return "id";
    case Tag::affine:
      return "affine:" + format_complex(n.c1) + ":" + format_complex(n.c2);
    case Tag::power:
      return "pow:" + format_real(n.p);
    case Tag::exponential:
      return "exp";
    case Tag::log_guarded:
      return "log";
    case Tag::scaled:
      return "scaled:" + format_complex(n.c1) + ":" + FunctionDescriptor(n.a).render();
    case Tag::sum:
      return "sum:" + FunctionDescriptor(n.a).render() + ":" + FunctionDescriptor(n.b).render();
    case Tag::composed_with_affine:
      return "comp:" + format_real(n.c1.real()) + ":" + format_real(n.c2.real()) + ":" +
             FunctionDescriptor(n.a).render();
  }
  return {};
}

bool FunctionDescriptor::in_domain(double z) const {
  if (!std::isfinite(z)) return false;
  const Node& n = *node_;
  switch (n.tag) {
    case Tag::constant:
    case Tag::identity:
    case Tag::affine:
    case Tag::exponential:
      return true;
    case Tag::power:
      if (is_integer(n.p)) return n.p >= 0.0 || z != 0.0;
      return z > 0.0;
    case Tag::log_guarded:
      return z > 0.0;
    case Tag::scaled:
      return FunctionDescriptor(n.a).in_domain(z);
    case Tag::sum:
      return FunctionDescriptor(n.a).in_domain(z) && FunctionDescriptor(n.b).in_domain(z);
    case Tag::composed_with_affine:
      return FunctionDescriptor(n.a).in_domain(n.c1.real() * z + n.c2.real());
  }
  return false;
}

Complex FunctionDescriptor::value(double z) const {
  const Node& n = *node_;
  switch (n.tag) {
    case Tag::constant:
      return n.c1;
    case Tag::identity:
      return z;
    case Tag::affine:
      return n.c1 * z + n.c2;
    case Tag::power:
      return std::pow(z, n.p);
    case Tag::exponential:
      return std::exp(z);
    case Tag::log_guarded:
      return std::log(z);
    case Tag::scaled:
      return n.c1 * FunctionDescriptor(n.a).value(z);
    case Tag::sum:
      return FunctionDescriptor(n.a).value(z) + FunctionDescriptor(n.b).value(z);
    case Tag::composed_with_affine:
      return FunctionDescriptor(n.a).value(n.c1.real() * z + n.c2.real());
  }
  return {};
}

Complex FunctionDescriptor::derivative(double z) const {
  const Node& n = *node_;
  switch (n.tag) {
    case Tag::constant:
      return 0.0;
    case Tag::identity:
      return 1.0;
    case Tag::affine:
      return n.c1;
    case Tag::power:
      if (n.p == 0.0) return 0.0;
      return n.p * std::pow(z, n.p - 1.0);
    case Tag::exponential:
      return std::exp(z);
    case Tag::log_guarded:
      return 1.0 / z;
    case Tag::scaled:
      return n.c1 * FunctionDescriptor(n.a).derivative(z);
    case Tag::sum:
      return FunctionDescriptor(n.a).derivative(z) + FunctionDescriptor(n.b).derivative(z);
    case Tag::composed_with_affine:
      return n.c1.real() * FunctionDescriptor(n.a).derivative(n.c1.real() * z + n.c2.real());
  }
  return {};
}

Complex FunctionDescriptor::second_derivative(double z) const {
  const Node& n = *node_;
  switch (n.tag) {
    case Tag::constant:
    case Tag::identity:
    case Tag::affine:
      return 0.0;
    case Tag::power:
      if (n.p == 0.0 || n.p == 1.0) return 0.0;
      return n.p * (n.p - 1.0) * std::pow(z, n.p - 2.0);
    case Tag::exponential:
      return std::exp(z);
    case Tag::log_guarded:
      return -1.0 / (z * z);
    case Tag::scaled:
      return n.c1 * FunctionDescriptor(n.a).second_derivative(z);
    case Tag::sum:
      return FunctionDescriptor(n.a).second_derivative(z) + FunctionDescriptor(n.b).second_derivative(z);
    case Tag::composed_with_affine: {
      const double a = n.c1.real();
      return a * a * FunctionDescriptor(n.a).second_derivative(a * z + n.c2.real());
    }
  }
  return {};
}

bool FunctionDescriptor::is_real() const {
  const Node& n = *node_;
  switch (n.tag) {
    case Tag::constant:
      return real_scalar(n.c1);
    case Tag::affine:
      return real_scalar(n.c1) && real_scalar(n.c2);
    case Tag::scaled:
      return real_scalar(n.c1) && FunctionDescriptor(n.a).is_real();
    case Tag::sum:
      return FunctionDescriptor(n.a).is_real() && FunctionDescriptor(n.b).is_real();
    case Tag::composed_with_affine:
      return FunctionDescriptor(n.a).is_real();
    default:
      return true;
  }
}

std::optional<Complex> FunctionDescriptor::constant_derivative() const {
  const Node& n = *node_;
  switch (n.tag) {
    case Tag::constant:
      return Complex(0.0);
    case Tag::identity:
      return Complex(1.0);
    case Tag::affine:
      return n.c1;
    case Tag::power:
      if (n.p == 0.0) return Complex(0.0);
      if (n.p == 1.0) return Complex(1.0);
      return std::nullopt;
    case Tag::exponential:
    case Tag::log_guarded:
      return std::nullopt;
    case Tag::scaled: {
      auto k = FunctionDescriptor(n.a).constant_derivative();
      if (!k) return std::nullopt;
      return n.c1 * *k;
    }
    case Tag::sum: {
      auto ka = FunctionDescriptor(n.a).constant_derivative();
      auto kb = FunctionDescriptor(n.b).constant_derivative();
      if (!ka || !kb) return std::nullopt;
      return *ka + *kb;
    }
    case Tag::composed_with_affine: {
      auto k = FunctionDescriptor(n.a).constant_derivative();
      if (!k) return std::nullopt;
      return n.c1.real() * *k;
    }
  }
  return std::nullopt;
}

bool FunctionDescriptor::is_constant() const {
  auto k = constant_derivative();
  return k && *k == Complex(0.0);
}

bool FunctionDescriptor::has_inverse() const {
  const Node& n = *node_;
  switch (n.tag) {
    case Tag::identity:
    case Tag::exponential:
    case Tag::log_guarded:
      return true;
    case Tag::affine:
      return real_scalar(n.c1) && real_scalar(n.c2) && n.c1 != 0.0;
    case Tag::power:
      return n.p != 0.0;
    case Tag::scaled:
      return real_scalar(n.c1) && n.c1 != 0.0 && FunctionDescriptor(n.a).has_inverse();
    case Tag::composed_with_affine:
      return n.c1.real() != 0.0 && FunctionDescriptor(n.a).has_inverse();
    default:
      return false;
  }
}

double FunctionDescriptor::inverse(double y) const {
  if (!has_inverse()) throw RangeError(render() + " has no inverse");
  const Node& n = *node_;
  switch (n.tag) {
    case Tag::identity:
      return y;
    case Tag::exponential:
      if (!(y > 0.0)) throw RangeError("exp inverse needs y > 0");
      return std::log(y);
    case Tag::log_guarded:
      return std::exp(y);
    case Tag::affine:
      return (y - n.c2.real()) / n.c1.real();
    case Tag::power: {
      const bool odd = is_integer(n.p) && static_cast<long long>(n.p) % 2 != 0;
      if (!odd && !(y > 0.0)) throw RangeError("power inverse needs y > 0 on its branch");
      return signed_root(y, n.p, odd);
    }
    case Tag::scaled:
      return FunctionDescriptor(n.a).inverse(y / n.c1.real());
    case Tag::composed_with_affine:
      return (FunctionDescriptor(n.a).inverse(y) - n.c2.real()) / n.c1.real();
    default:
      break;
  }
  throw RangeError(render() + " has no inverse");
}

bool FunctionDescriptor::has_derivative_inverse() const {
  const Node& n = *node_;
  switch (n.tag) {
    case Tag::exponential:
    case Tag::log_guarded:
      return true;
    case Tag::power:
      return n.p != 0.0 && n.p != 1.0;
    case Tag::scaled:
      return real_scalar(n.c1) && n.c1 != 0.0 && FunctionDescriptor(n.a).has_derivative_inverse();
    case Tag::composed_with_affine:
      return n.c1.real() != 0.0 && FunctionDescriptor(n.a).has_derivative_inverse();
    case Tag::sum: {
      const FunctionDescriptor a(n.a), b(n.b);
      auto ka = a.constant_derivative(), kb = b.constant_derivative();
      if (kb && real_scalar(*kb)) return a.has_derivative_inverse();
      if (ka && real_scalar(*ka)) return b.has_derivative_inverse();
      return false;
    }
    default:
      return false;
  }
}

double FunctionDescriptor::derivative_inverse(double y) const {
  if (!has_derivative_inverse()) throw RangeError(render() + " has a non-invertible derivative");
  const Node& n = *node_;
  switch (n.tag) {
    case Tag::exponential:
      if (!(y > 0.0)) throw RangeError("exp' = exp takes only positive values, got " + format_real(y));
      return std::log(y);
    case Tag::log_guarded:
      if (!(y > 0.0)) throw RangeError("log' = 1/z takes only positive values, got " + format_real(y));
      return 1.0 / y;
    case Tag::power: {
      // f'(z) = p z^(p-1); for even integer p the branch is the whole line.
      const double k = n.p - 1.0;
      const bool odd_root = is_integer(n.p) && static_cast<long long>(n.p) % 2 == 0;
      const double r = y / n.p;
      if (!odd_root && !(r > 0.0))
        throw RangeError("pow:" + format_real(n.p) + " derivative takes only values with the sign of p, got " +
                         format_real(y));
      return signed_root(r, k, odd_root);
    }
    case Tag::scaled:
      return FunctionDescriptor(n.a).derivative_inverse(y / n.c1.real());
    case Tag::composed_with_affine: {
      const double a = n.c1.real();
      return (FunctionDescriptor(n.a).derivative_inverse(y / a) - n.c2.real()) / a;
    }
    case Tag::sum: {
      const FunctionDescriptor a(n.a), b(n.b);
      auto kb = b.constant_derivative();
      if (kb && real_scalar(*kb) && a.has_derivative_inverse()) return a.derivative_inverse(y - kb->real());
      auto ka = a.constant_derivative();
      return b.derivative_inverse(y - ka->real());
    }
    default:
      break;
  }
  throw RangeError(render() + " has a non-invertible derivative");
}

bool FunctionDescriptor::operator==(const FunctionDescriptor& o) const {
  const Node& x = *node_;
  const Node& y = *o.node_;
  if (x.tag != y.tag || x.c1 != y.c1 || x.c2 != y.c2 || x.p != y.p) return false;
  if ((x.a == nullptr) != (y.a == nullptr) || (x.b == nullptr) != (y.b == nullptr)) return false;
  if (x.a && !(FunctionDescriptor(x.a) == FunctionDescriptor(y.a))) return false;
  if (x.b && !(FunctionDescriptor(x.b) == FunctionDescriptor(y.b))) return false;
  return true;
}

}  // namespace kahler
