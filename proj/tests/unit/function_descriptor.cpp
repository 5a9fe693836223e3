#include "support.hpp"

#include "kahler/errors.hpp"
#include "kahler/function_descriptor.hpp"

using namespace kahler;

namespace {

const std::vector<std::string>& catalog() {
  static const std::vector<std::string> c{
      "const:2.5", "const:1-0.5i", "id", "affine:2:-1", "affine:1i:3", "pow:2", "pow:3", "pow:-1", "pow:0.5",
      "pow:2.5",   "exp",          "log", "scaled:0.5:pow:2", "scaled:2i:exp", "sum:exp:pow:2", "sum:id:log",
      "comp:2:1:exp", "comp:-1:3:log", "comp:0.5:0:sum:exp:scaled:3:id"};
  return c;
}

// Points inside the declared domain of every catalog entry.
double sample_point(const FunctionDescriptor& f, SplitMix64& rng) {
  for (;;) {
    const double z = 4.0 * rng.symmetric();
    if (f.in_domain(z) && f.in_domain(z + 1e-3) && f.in_domain(z - 1e-3) && std::abs(z) > 0.05) return z;
  }
}

}  // namespace

TEST_SUITE("descriptor") {
  TEST_CASE("parse and render round trip") {
    for (const auto& text : catalog()) {
      const auto f = FunctionDescriptor::parse(text);
      CHECK(FunctionDescriptor::parse(f.render()) == f);
      CHECK(FunctionDescriptor::parse(f.render()).render() == f.render());
    }
    CHECK(FunctionDescriptor::parse("identity") == FunctionDescriptor::identity());
    CHECK(FunctionDescriptor::parse("exponential").render() == "exp");
    CHECK(FunctionDescriptor::parse("power:2").render() == "pow:2");
    CHECK(FunctionDescriptor::parse("constant:+3").render() == "const:3");
    CHECK(FunctionDescriptor::parse("scaled:3:exp").tag() == FunctionDescriptor::Tag::scaled);
    CHECK(FunctionDescriptor::parse("affine:1:2").render() == "affine:1:2");
    CHECK(FunctionDescriptor::parse("const:1-0.5i").value(0.0) == Complex(1.0, -0.5));
    CHECK(FunctionDescriptor::parse("const:-i").value(0.0) == Complex(0.0, -1.0));
    CHECK(FunctionDescriptor::parse("const:2e-3i").value(0.0) == Complex(0.0, 2e-3));
  }

  TEST_CASE("malformed expressions are parse errors") {
    for (const char* bad : {"", "expo", "pow", "pow:x", "pow:inf", "affine:1", "const:", "exp:1", "scaled:2",
                            "sum:exp", "comp:1:2", "comp:1i:0:exp", "id:", ":id", "const:1ii", "log:2"}) {
      INFO(bad);
      CHECK_THROWS_AS(FunctionDescriptor::parse(bad), ParseError);
    }
  }

  TEST_CASE("values of the catalog") {
    CHECK(FunctionDescriptor::parse("exp").value(2.0) == Complex(std::exp(2.0)));
    CHECK(FunctionDescriptor::parse("log").value(std::exp(1.5)).real() == doctest::Approx(1.5));
    CHECK(FunctionDescriptor::parse("pow:3").value(-2.0) == Complex(-8.0));
    CHECK(FunctionDescriptor::parse("affine:2:-1").value(3.0) == Complex(5.0));
    CHECK(FunctionDescriptor::parse("scaled:0.5:pow:2").value(4.0) == Complex(8.0));
    CHECK(FunctionDescriptor::parse("sum:id:const:1").value(4.0) == Complex(5.0));
    CHECK(FunctionDescriptor::parse("comp:2:1:pow:2").value(1.0) == Complex(9.0));
    CHECK(FunctionDescriptor::parse("comp:2:1:pow:2").derivative(1.0) == Complex(12.0));
  }

  TEST_CASE("declared domains") {
    const auto log = FunctionDescriptor::parse("log");
    CHECK(log.in_domain(1e-300));
    CHECK_FALSE(log.in_domain(0.0));
    CHECK_FALSE(log.in_domain(-1.0));
    CHECK_FALSE(FunctionDescriptor::parse("pow:0.5").in_domain(-1.0));
    CHECK_FALSE(FunctionDescriptor::parse("pow:-1").in_domain(0.0));
    CHECK(FunctionDescriptor::parse("pow:-1").in_domain(-2.0));
    CHECK(FunctionDescriptor::parse("pow:3").in_domain(-2.0));
    CHECK_FALSE(FunctionDescriptor::parse("exp").in_domain(NAN));
    CHECK_FALSE(FunctionDescriptor::parse("comp:1:-2:log").in_domain(1.0));
    CHECK(FunctionDescriptor::parse("comp:1:-2:log").in_domain(3.0));
  }

  TEST_CASE("derivatives agree with centered differences") {
    SplitMix64 rng(2024);
    for (const auto& text : catalog()) {
      const auto f = FunctionDescriptor::parse(text);
      for (int k = 0; k < 25; ++k) {
        const double z = sample_point(f, rng);
        const double h = 1e-5 * std::max(1.0, std::abs(z));
        const Complex fd1 = (f.value(z + h) - f.value(z - h)) / (2 * h);
        const Complex fd2 = (f.derivative(z + h) - f.derivative(z - h)) / (2 * h);
        INFO(text << " at " << z);
        CHECK(std::abs(fd1 - f.derivative(z)) <= 1e-6 * std::max(1.0, std::abs(f.derivative(z))));
        CHECK(std::abs(fd2 - f.second_derivative(z)) <= 1e-6 * std::max(1.0, std::abs(f.second_derivative(z))));
      }
    }
  }

  TEST_CASE("structural queries") {
    CHECK(FunctionDescriptor::parse("const:3").is_constant());
    CHECK(FunctionDescriptor::parse("pow:0").is_constant());
    CHECK(*FunctionDescriptor::parse("id").constant_derivative() == Complex(1.0));
    CHECK(*FunctionDescriptor::parse("affine:2i:1").constant_derivative() == Complex(0.0, 2.0));
    CHECK(*FunctionDescriptor::parse("sum:id:scaled:3:id").constant_derivative() == Complex(4.0));
    CHECK(*FunctionDescriptor::parse("comp:2:5:id").constant_derivative() == Complex(2.0));
    CHECK_FALSE(FunctionDescriptor::parse("pow:2").constant_derivative());
    CHECK_FALSE(FunctionDescriptor::parse("sum:id:exp").constant_derivative());
    CHECK(FunctionDescriptor::parse("scaled:2:exp").is_real());
    CHECK_FALSE(FunctionDescriptor::parse("scaled:2i:exp").is_real());
    CHECK_FALSE(FunctionDescriptor::parse("sum:id:const:1i").is_real());
  }

  TEST_CASE("monotone inverses") {
    SplitMix64 rng(9);
    for (const char* text : {"id", "affine:2:-1", "pow:3", "pow:2", "pow:0.5", "pow:-1", "exp", "log",
                             "scaled:-2:exp", "comp:3:1:exp"}) {
      const auto f = FunctionDescriptor::parse(text);
      REQUIRE(f.has_inverse());
      for (int k = 0; k < 20; ++k) {
        const double z = 0.1 + 2.0 * rng.uniform();
        const double y = f.value(z).real();
        INFO(text << " y = " << y);
        CHECK(f.value(f.inverse(y)).real() == doctest::Approx(y).epsilon(1e-12));
      }
    }
    CHECK_FALSE(FunctionDescriptor::parse("const:1").has_inverse());
    CHECK_FALSE(FunctionDescriptor::parse("pow:0").has_inverse());
    CHECK_FALSE(FunctionDescriptor::parse("affine:0:1").has_inverse());
    CHECK_FALSE(FunctionDescriptor::parse("affine:1i:0").has_inverse());
    CHECK_THROWS_AS(FunctionDescriptor::parse("exp").inverse(-1.0), RangeError);
    CHECK_THROWS_AS(FunctionDescriptor::parse("pow:2").inverse(-1.0), RangeError);
    CHECK(FunctionDescriptor::parse("pow:3").inverse(-8.0) == doctest::Approx(-2.0));
    CHECK_THROWS_AS(FunctionDescriptor::parse("sum:id:exp").inverse(1.0), RangeError);
  }

  TEST_CASE("inverse of the derivative satisfies f'(f'^-1(y)) = y") {
    SplitMix64 rng(77);
    for (const char* text : {"exp", "log", "pow:2", "pow:3", "pow:4", "pow:-1", "pow:2.5", "scaled:0.5:pow:2",
                             "scaled:-1:exp", "comp:2:1:exp", "sum:exp:id", "sum:scaled:2:id:pow:2"}) {
      const auto f = FunctionDescriptor::parse(text);
      REQUIRE(f.has_derivative_inverse());
      for (int k = 0; k < 20; ++k) {
        const double z = 0.2 + 2.0 * rng.uniform();
        const double y = f.derivative(z).real();
        const double back = f.derivative_inverse(y);
        INFO(text << " y = " << y);
        CHECK(f.derivative(back).real() == doctest::Approx(y).epsilon(1e-10));
      }
    }
    // pow:2 has f' = 2z on the whole line.
    CHECK(FunctionDescriptor::parse("pow:2").derivative_inverse(-6.0) == doctest::Approx(-3.0));
    CHECK(FunctionDescriptor::parse("scaled:0.5:pow:2").derivative_inverse(2.0) == doctest::Approx(2.0));
    CHECK_THROWS_AS(FunctionDescriptor::parse("exp").derivative_inverse(0.0), RangeError);
    CHECK_THROWS_AS(FunctionDescriptor::parse("pow:3").derivative_inverse(-1.0), RangeError);
    CHECK_THROWS_AS(FunctionDescriptor::parse("log").derivative_inverse(-1.0), RangeError);
    for (const char* text : {"id", "const:1", "affine:2:1", "pow:1", "sum:exp:log"}) {
      CHECK_FALSE(FunctionDescriptor::parse(text).has_derivative_inverse());
      CHECK_THROWS_AS(FunctionDescriptor::parse(text).derivative_inverse(1.0), RangeError);
    }
  }

  TEST_CASE("number formatting") {
    CHECK(format_real(0.1) == "0.10000000000000001");
    CHECK(parse_real(format_real(0.1)) == 0.1);
    CHECK(format_complex(Complex(1.0, -0.5)) == "1-0.5i");
    CHECK(parse_complex("1-0.5i") == Complex(1.0, -0.5));
    CHECK(parse_complex("-2.5e-3+1e2i") == Complex(-2.5e-3, 100.0));
    CHECK_THROWS_AS(parse_real("1.0x"), ParseError);
    CHECK_THROWS_AS(parse_real(""), ParseError);
    CHECK_THROWS_AS(parse_complex(""), ParseError);
  }
}
