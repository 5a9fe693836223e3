#include "support.hpp"

#include "kahler/errors.hpp"
#include "kahler/potentials.hpp"

#include <Eigen/SVD>

using namespace kahler;

namespace {

FunctionDescriptor fd(const char* t) { return FunctionDescriptor::parse(t); }

}  // namespace

TEST_SUITE("potentials") {
  TEST_CASE("normalization of the holomorphy potential") {
    const auto g = kt::cp1();
    const auto phi = normalize_potential(*g);
    CHECK(phi.scale == 1.0);
    CHECK(std::abs(phi.shift) < 1e-15);
    CHECK(std::abs(default_normalization_target(*g)) < 1e-14);
    const auto phi2 = normalize_potential(*g, 8 * kt::pi);
    CHECK(phi2.shift == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(phi2.target == 8 * kt::pi);
    CHECK(volume_integral(*g, phi2.sampled(g->grid)) == doctest::Approx(8 * kt::pi).epsilon(1e-10));

    const auto g2 = make_cpm_geometry(2);
    const auto p2 = normalize_potential(*g2);
    CHECK(std::abs(p2.shift) < 1e-15);
    CHECK(p2.target == doctest::Approx(default_normalization_target(*g2)));
    // C int(x * x dx) on [0, 1] with C = 2 pi.
    CHECK(default_normalization_target(*g2) == doctest::Approx(2 * kt::pi / 3).epsilon(1e-14));

    for (double t : {-3.0, 0.5, 40.0}) {
      const auto p = normalize_potential(*g2, t, 2.5);
      CHECK(p.scale == 2.5);
      CHECK(std::abs(volume_integral(*g2, p.sampled(g2->grid)) - t) < 1e-10);
    }
  }

  TEST_CASE("S examples") {
    const auto g = kt::cp1();
    const auto phi = normalize_potential(*g);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto p = random_admissible_profile(g, seed, 0.3);
      CHECK(eval_S(p, fd("id"), fd("const:1"), phi).real() == doctest::Approx(8 * kt::pi).epsilon(1e-10));
      CHECK(eval_S(p, fd("const:3"), fd("const:1"), phi).real() == doctest::Approx(12 * kt::pi).epsilon(1e-12));
    }
    const auto r = round_profile(g);
    CHECK(eval_S(r, fd("exp"), fd("const:1"), phi).real() == doctest::Approx(4 * kt::pi * std::exp(2.0)).epsilon(1e-9));
    const auto z = eval_S(r, fd("id"), fd("const:2i"), phi);
    CHECK(std::abs(z.real()) < 1e-12);
    CHECK(z.imag() == doctest::Approx(16 * kt::pi).epsilon(1e-10));
  }

  TEST_CASE("domain violations name the node") {
    const auto g = kt::cp1();
    const auto r = round_profile(g);
    try {
      eval_S(r, fd("id"), fd("log"), normalize_potential(*g));
      FAIL("expected DomainError");
    } catch (const DomainError& e) {
      CHECK(e.node() == 0);
      CHECK(e.value() == -1.0);
    }
    // s = 2 lies outside the domain of comp:-1:1:log, i.e. log(1 - s).
    CHECK_THROWS_AS(eval_S(r, fd("comp:-1:1:log"), fd("const:1"), normalize_potential(*g)), DomainError);
    CHECK_THROWS_AS(el_potential(r, fd("comp:-1:1:log"), fd("const:1"), normalize_potential(*g)), DomainError);
    CHECK_THROWS_AS(equivariant_integral(r, fd("pow:0.5"), normalize_potential(*g)), DomainError);
  }

  TEST_CASE("f must be real valued") {
    const auto g = kt::cp1();
    CHECK_THROWS_AS(eval_S(round_profile(g), fd("scaled:1i:id"), fd("const:1"), normalize_potential(*g)), Error);
  }

  TEST_CASE("EL potential examples") {
    const auto g = kt::cp1();
    const auto phi = normalize_potential(*g);
    const auto p = random_admissible_profile(g, 4, 0.3);
    const auto one = el_potential(p, fd("id"), fd("const:1"), phi);
    CHECK(kt::max_abs_diff(one.re, [](double) { return 1.0; }) == 0.0);
    CHECK(one.is_real());
    const auto r = round_profile(g);
    CHECK(kt::max_abs_diff(el_potential(r, fd("scaled:0.5:pow:2"), fd("const:1"), phi).re,
                           [](double) { return 2.0; }) < 1e-9);
    const double e2 = std::exp(2.0);
    CHECK(kt::max_abs_diff(el_potential(r, fd("exp"), fd("id"), phi).re, [e2](double x) { return e2 * x; }) < 1e-8);
    const auto c = el_potential(r, fd("id"), fd("affine:1i:0"), phi);
    CHECK(kt::max_abs_diff(c.im, [](double x) { return x; }) < 1e-15);
    CHECK(c.re.max_abs() == 0.0);
  }

  TEST_CASE("Lichnerowicz operator examples") {
    const auto g = kt::cp1();
    const auto r = round_profile(g);
    const auto affine = SampledFunction::from(g->grid, [](double x) { return 4 * x - 1; });
    // L is fourth order: each D2 multiplies roundoff by about N^4, so the floor at
    // N = 129 is near 1e-7 of the operator's natural scale.
    CHECK(lichnerowicz(r, affine).max_abs() < 1e-6 * (1 + affine.max_abs()));
    CHECK(lichnerowicz(random_admissible_profile(g, 3, 0.3), affine).max_abs() < 1e-6 * (1 + affine.max_abs()));
    const auto sq = SampledFunction::from(g->grid, [](double x) { return x * x; });
    CHECK(kt::max_abs_diff(lichnerowicz(r, sq), [](double x) { return 2 * (12 * x * x - 4); }) < 1e-7 * 17);
    // ((1 - x^2)^2 6x)'' = -72x + 120x^3.
    const auto cube = SampledFunction::from(g->grid, [](double x) { return x * x * x; });
    const auto l3 = lichnerowicz(r, cube);
    CHECK(kt::max_abs_diff(l3, [](double x) { return -72 * x + 120 * x * x * x; }) < 1e-7 * 49);
    CHECK(std::abs(l3.at(0.0)) < 1e-10);
    const MetricProfile bad{g, SampledFunction::from(g->grid, [](double x) { return 1 - x * x - 0.01; })};
    CHECK_THROWS_AS(lichnerowicz(bad, sq), AdmissibilityError);
  }

  TEST_CASE("holomorphy defect examples") {
    const auto g = kt::cp1();
    const auto r = round_profile(g);
    const auto lin = holomorphy_defect(r, SampledFunction::from(g->grid, [](double x) { return 5 * x - 7; }));
    CHECK(lin.defect_affine < 1e-12);
    CHECK(lin.defect_operator < 1e-10);
    CHECK(lin.is_critical);
    CHECK(lin.alpha.real() == doctest::Approx(5.0));
    CHECK(lin.beta.real() == doctest::Approx(-7.0));

    const auto sq = holomorphy_defect(r, SampledFunction::from(g->grid, [](double x) { return x * x; }));
    CHECK(sq.defect_affine == doctest::Approx(std::sqrt(2 * kt::pi * 8.0 / 45.0)).epsilon(1e-12));
    // C int (1 - x^2)^2 (2)^2 dx = 2 pi * 4 * 16/15.
    CHECK(sq.defect_operator == doctest::Approx(std::sqrt(2 * kt::pi * 64.0 / 15.0)).epsilon(1e-10));
    CHECK_FALSE(sq.is_critical);

    SplitMix64 rng(5);
    std::vector<double> v(g->nodes());
    for (int i = 0; i < g->nodes(); ++i) v[i] = 2 * g->grid->node(i) + 1 + 1e-12 * rng.symmetric();
    const auto noisy = holomorphy_defect(r, SampledFunction(g->grid, v));
    CHECK(noisy.is_critical);
    CHECK(noisy.tolerance == doctest::Approx(1e-8 * 4.0).epsilon(1e-6));

    const auto strict = holomorphy_defect(r, SampledFunction(g->grid, v), DefectOptions{1e-20});
    CHECK_FALSE(strict.is_critical);
  }

  TEST_CASE("complex EL potential is critical only if both parts are affine") {
    const auto g = kt::cp1();
    const auto r = round_profile(g);
    const auto x = SampledFunction::from(g->grid, [](double t) { return t; });
    const auto x2 = x * x;
    const auto both = holomorphy_defect(r, ComplexSampled{x, 3.0 * x});
    CHECK(both.is_critical);
    CHECK(both.alpha.real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(both.alpha.imag() == doctest::Approx(3.0).epsilon(1e-12));
    const auto half = holomorphy_defect(r, ComplexSampled{x, x2});
    CHECK_FALSE(half.is_critical);
    CHECK(half.defect_affine == doctest::Approx(std::sqrt(2 * kt::pi * 8.0 / 45.0)).epsilon(1e-12));
  }

  TEST_CASE("Futaki invariant vanishes on CP1 and ignores the normalization shift") {
    const auto g = kt::cp1();
    const auto phi = normalize_potential(*g);
    const auto shifted = normalize_potential(*g, 3.7);
    CHECK(std::abs(futaki(round_profile(g), phi)) < 1e-12);
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      const auto p = random_admissible_profile(g, seed, 0.4);
      const double f0 = futaki(p, phi);
      CHECK(std::abs(f0) < 1e-8);
      CHECK(std::abs(futaki(p, shifted) - f0) < 1e-10);
    }
  }

  TEST_CASE("Futaki on CP2 is class data") {
    const auto g = make_cpm_geometry(2);
    const auto phi = normalize_potential(*g);
    const double ref = futaki(round_profile(g), phi);
    CHECK(std::abs(ref) < 1e-9);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      CHECK(std::abs(futaki(random_admissible_profile(g, seed, 0.5), phi) - ref) < 1e-8);
    }
  }

  TEST_CASE("equivariant integral examples") {
    const auto g = kt::cp1();
    const auto r = round_profile(g);
    const auto phi = normalize_potential(*g);
    CHECK(equivariant_integral(r, fd("const:1"), phi).real() == doctest::Approx(4 * kt::pi).epsilon(1e-14));
    CHECK(std::abs(equivariant_integral(r, fd("id"), phi)) < 1e-14);
    CHECK(equivariant_integral(r, fd("pow:2"), phi).real() == doctest::Approx(4 * kt::pi / 3).epsilon(1e-13));
    CHECK(equivariant_integral(r, fd("exp"), phi).real() ==
          doctest::Approx(2 * kt::pi * (std::exp(1.0) - std::exp(-1.0))).epsilon(1e-13));
  }

  TEST_CASE("S with f constant or f = h = id is independent of the metric") {
    const auto g = kt::cp1();
    const auto phi = normalize_potential(*g, 1.5);
    const auto r = round_profile(g);
    const Complex c_ref = eval_S(r, fd("const:2"), fd("exp"), phi);
    const Complex id_ref = eval_S(r, fd("id"), fd("id"), phi);
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
      const auto p = random_admissible_profile(g, seed, 0.4);
      CHECK(std::abs(eval_S(p, fd("const:2"), fd("exp"), phi) - c_ref) < 1e-10 * std::abs(c_ref));
      CHECK(std::abs(eval_S(p, fd("id"), fd("id"), phi) - id_ref) < 1e-9);
    }
  }

  TEST_CASE("quadratic form identity for random profiles and potentials") {
    const auto g = kt::cp1();
    for (int k = 0; k < 20; ++k) {
      const auto p = random_admissible_profile(g, 100 + k, 0.3);
      const auto c = random_chebyshev_coefficients(200 + k, 8, 1.0);
      const ChebSeries series(-1.0, 1.0, c);
      const auto psi = SampledFunction::from(g->grid, [&](double x) { return series(x); });
      const double lhs = g->vol_const * (psi * lichnerowicz(p, psi) * g->weight).integral();
      const double rhs = lichnerowicz_form(p, psi);
      const double scale = 1.0 + std::abs(rhs);
      INFO("case " << k << ": " << lhs << " vs " << rhs);
      CHECK(std::abs(lhs - rhs) < 1e-8 * scale);
      CHECK(rhs >= 0.0);
    }
  }

  TEST_CASE("discrete quadratic form has exactly the affine functions as kernel") {
    for (const auto& g : {kt::cp1(), make_cpm_geometry(2)}) {
      const auto p = random_admissible_profile(g, 8, 0.3);
      const int n = g->nodes();
      const auto& d2 = g->grid->d2();
      const auto qw = g->grid->quadrature_weights();
      Eigen::VectorXd diag(n);
      for (int i = 0; i < n; ++i) diag[i] = g->vol_const * qw[i] * g->weight[i] * p.theta[i] * p.theta[i];
      const Eigen::MatrixXd form = d2.transpose() * diag.asDiagonal() * d2;
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(form, Eigen::ComputeFullV);
      const auto& sv = svd.singularValues();
      int kernel_dim = 0;
      for (int i = 0; i < n; ++i) kernel_dim += sv[i] < 1e-8 * sv[0];
      CHECK(kernel_dim == 2);
      const Eigen::MatrixXd basis = svd.matrixV().rightCols(2);
      for (auto fn : {+[](double) { return 1.0; }, +[](double x) { return x; }}) {
        Eigen::VectorXd v(n);
        for (int i = 0; i < n; ++i) v[i] = fn(g->grid->node(i));
        v.normalize();
        const Eigen::VectorXd residual = v - basis * (basis.transpose() * v);
        CHECK(residual.norm() < 1e-6);
      }
    }
  }
}
