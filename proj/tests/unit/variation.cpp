#include "support.hpp"

#include "kahler/errors.hpp"
#include "kahler/variation.hpp"

#include <limits>

using namespace kahler;

namespace {

FunctionDescriptor fd(const char* t) { return FunctionDescriptor::parse(t); }

DeformationPath path_of(const GeometryPtr& g, double (*u)(double)) { return {SampledFunction::from(g->grid, u)}; }

double sq(double x) { return x * x; }
double cubic(double x) { return x * x * x - 0.5 * x; }
double quartic(double x) { return x * x * x * x + x; }

}  // namespace

TEST_SUITE("variation") {
  TEST_CASE("conventions are pinned by the oracles") {
    const auto report = pin_conventions();
    REQUIRE(report.ok);
    CHECK(report.conventions.kappa_theta == 1.0);
    CHECK(report.conventions.kappa_phi == 1.0);
    REQUIRE(report.kappa_theta_candidates.size() == 4);
    REQUIRE(report.kappa_phi_candidates.size() == 4);
    int theta_pass = 0, phi_pass = 0;
    for (const auto& c : report.kappa_theta_candidates) theta_pass += c.passed;
    for (const auto& c : report.kappa_phi_candidates) phi_pass += c.passed;
    CHECK(theta_pass == 1);
    CHECK(phi_pass == 1);
    CHECK(pinned_conventions().kappa_theta == report.conventions.kappa_theta);
    CHECK(pinned_conventions().kappa_phi == report.conventions.kappa_phi);
  }

  TEST_CASE("first-order dictionary examples") {
    const auto g = kt::cp1();
    const auto r = round_profile(g);
    const auto& conv = pinned_conventions();
    const auto zero = first_order(r, {SampledFunction::constant(g->grid, 3.0)});
    CHECK(zero.d_theta.max_abs() < 1e-9);
    CHECK(zero.d_phi.max_abs() < 1e-9);
    CHECK(zero.volume_density.max_abs() < 1e-9);

    const auto lin = first_order(r, path_of(g, [](double x) { return 2.5 * x - 1; }));
    CHECK(lin.d_theta.max_abs() < 1e-9);
    CHECK(kt::max_abs_diff(lin.d_phi, [&](double x) { return conv.kappa_phi * 2.5 * (1 - x * x); }) < 1e-10);

    const auto quad = first_order(r, path_of(g, sq));
    CHECK(kt::max_abs_diff(quad.d_theta, [&](double x) { return 2 * conv.kappa_theta * sq(1 - x * x); }) < 1e-9);
    CHECK(std::abs(quad.d_theta.front()) < 1e-12);
    CHECK(std::abs(quad.d_theta.back()) < 1e-12);
    CHECK(std::abs(quad.d_theta.derivative(1).front()) < 1e-8);
  }

  TEST_CASE("first-order dictionary needs an admissible profile") {
    const auto g = kt::cp1();
    const MetricProfile bad{g, SampledFunction::from(g->grid, [](double x) { return 2 * (1 - x * x); })};
    CHECK_THROWS_AS(first_order(bad, path_of(g, sq)), AdmissibilityError);
  }

  TEST_CASE("scalar curvature variation examples") {
    const auto g = kt::cp1();
    const auto r = round_profile(g);
    const auto k = pinned_conventions().kappa_theta;
    const auto c = delta_s(r, {SampledFunction::constant(g->grid, 1.0)});
    CHECK(c.fixed_x.max_abs() < 1e-8);
    CHECK(c.fixed_point.max_abs() < 1e-8);
    const auto q = delta_s(r, path_of(g, sq));
    // Fourth order in u: the roundoff floor scales like that of the Lichnerowicz operator.
    CHECK(kt::max_abs_diff(q.fixed_x, [k](double x) { return -2 * k * (12 * x * x - 4); }) < 1e-7 * 33);
    const auto cu = delta_s(r, path_of(g, cubic));
    CHECK((cu.fixed_point - cu.fixed_x).max_abs() < 1e-8);
  }

  TEST_CASE("fixed-x scalar variation is the derivative of s along transport") {
    const auto g = kt::cp1();
    const auto p = random_admissible_profile(g, 21, 0.2);
    const auto path = path_of(g, cubic);
    const double t = 1e-4;
    const auto sp = scalar_curvature(transport(p, {}, path, t).profile);
    const auto sm = scalar_curvature(transport(p, {}, path, -t).profile);
    const auto fd_ds = (sp - sm) * (0.5 / t);
    const auto ds = delta_s(p, path).fixed_x;
    CHECK((fd_ds - ds).max_abs() < 1e-5 * (1 + ds.max_abs()));
  }

  TEST_CASE("analytic variation of S examples") {
    const auto g = kt::cp1();
    const auto r = round_profile(g);
    const auto phi = normalize_potential(*g);
    const auto p = random_admissible_profile(g, 2, 0.3);
    for (auto u : {sq, cubic, quartic}) {
      const auto path = path_of(g, u);
      CHECK(std::abs(delta_S_analytic(r, fd("exp"), fd("id"), phi, path)) < 1e-8);
      CHECK(std::abs(delta_S_analytic(p, fd("const:4"), fd("exp"), phi, path)) == 0.0);
      CHECK(std::abs(delta_S_analytic(p, fd("id"), fd("const:1"), phi, path)) < 1e-9);
    }
    CHECK(std::abs(delta_S_analytic(p, fd("exp"), fd("id"), phi, path_of(g, sq))) > 1e-2);
  }

  TEST_CASE("analytic variation vanishes for every u only when psi is affine") {
    const auto g = kt::cp1();
    const auto phi = normalize_potential(*g);
    const auto p = random_admissible_profile(g, 9, 0.3);
    // pow:3 on a non-round profile: psi = 3 s^2 is not affine.
    double worst = 0.0;
    for (auto u : {sq, cubic, quartic}) {
      worst = std::max(worst, std::abs(delta_S_analytic(p, fd("pow:3"), fd("const:1"), phi, path_of(g, u))));
    }
    CHECK(worst > 1e-3);
  }

  TEST_CASE("transport examples") {
    const auto g = kt::cp1();
    const auto r = round_profile(g);
    const auto phi = normalize_potential(*g, 1.0);
    const auto path = path_of(g, sq);
    const auto same = transport(r, phi, path, 0.0);
    CHECK(same.profile.theta.values() == r.theta.values());
    CHECK(same.phi.shift == phi.shift);

    // G_0'' = 1/(1 - x^2) and G_t = G_0 - t x^2 give Theta_t = 1 / (1/(1 - x^2) - 2t).
    for (double t : {0.05, -0.3, 0.45}) {
      const auto moved = transport(r, phi, path, t);
      // Exact up to the roundoff in the collocated u'' = 2.
      CHECK(kt::max_abs_diff(moved.profile.theta, [t](double x) { return 1.0 / (1.0 / (1 - x * x) - 2 * t); }) < 1e-10);
      CHECK(validate(moved.profile).empty());
      CHECK(moved.phi.shift == phi.shift);
    }
    CHECK_THROWS_AS(transport(r, phi, path, 0.6), PathExitsClass);
    try {
      transport(r, phi, {SampledFunction::from(g->grid, [](double x) { return 1e4 * x * x; })}, 1.0);
      FAIL("expected PathExitsClass");
    } catch (const PathExitsClass& e) {
      CHECK(e.t() == 1.0);
    }
  }

  TEST_CASE("transport agrees with the first-order dictionary to second order") {
    const auto g = kt::cp1();
    const auto p = random_admissible_profile(g, 6, 0.3);
    const auto path = path_of(g, sq);
    const auto d = first_order(p, path).d_theta;
    // Theta / (1 - t Theta u'') = Theta + t Theta^2 u'' + t^2 Theta^3 u''^2 + O(t^3).
    const auto second = p.theta * p.theta * p.theta * 4.0;
    double prev = std::numeric_limits<double>::infinity();
    for (double t : {1e-2, 5e-3, 2.5e-3, 1.25e-3}) {
      const auto moved = transport(p, {}, path, t).profile.theta;
      const auto rem = (moved - p.theta - t * d) * (1.0 / (t * t));
      const double err = (rem - second).max_abs();
      CHECK(err < 0.6 * prev);
      prev = err;
    }
    CHECK(prev < 1e-1);
  }

  TEST_CASE("numeric variation examples") {
    const auto g = kt::cp1();
    const auto phi = normalize_potential(*g);
    const auto p = random_admissible_profile(g, 14, 0.3);
    const auto path = path_of(g, quartic);
    CHECK(std::abs(delta_S_numeric(p, fd("const:2"), fd("exp"), phi, path, 1e-3)) < 1e-9);
    const auto r = round_profile(g);
    CHECK(std::abs(delta_S_numeric(r, fd("exp"), fd("id"), phi, path, 1e-3)) < 1e-6);
    const Complex analytic = delta_S_analytic(p, fd("exp"), fd("exp"), phi, path);
    const Complex plain = delta_S_numeric(p, fd("exp"), fd("exp"), phi, path, 1e-2);
    const Complex rich = delta_S_numeric(p, fd("exp"), fd("exp"), phi, path, 1e-2, true);
    CHECK(std::abs(rich - analytic) < std::abs(plain - analytic));
  }

  TEST_CASE("numeric variation converges at second order") {
    const auto g = kt::cp1();
    const auto phi = normalize_potential(*g);
    const auto p = random_admissible_profile(g, 7, 0.1);
    for (const char* f : {"exp", "pow:3"}) {
      for (const char* h : {"const:1", "exp"}) {
        for (auto u : {sq, quartic}) {
          const auto study = convergence_study(p, fd(f), fd(h), phi, path_of(g, u));
          INFO(f << " " << h << " orders " << study.orders[0] << " " << study.orders[1]);
          CHECK(study.steps == std::vector<double>{1e-2, 1e-3, 1e-4});
          CHECK(study.min_order >= 1.9);
        }
      }
    }
  }

  TEST_CASE("complex h varies both parts") {
    const auto g = kt::cp1();
    const auto phi = normalize_potential(*g);
    const auto p = random_admissible_profile(g, 15, 0.2);
    const auto path = path_of(g, sq);
    const Complex a = delta_S_analytic(p, fd("exp"), fd("affine:1:1i"), phi, path);
    const Complex n = delta_S_numeric(p, fd("exp"), fd("affine:1:1i"), phi, path, 1e-4);
    CHECK(std::abs(a.imag()) > 1e-3);
    CHECK(std::abs(a.real() - n.real()) < 1e-4 * std::abs(a.real()));
    CHECK(std::abs(a.imag() - n.imag()) < 1e-4 * std::abs(a.imag()));
    const Complex a_re = delta_S_analytic(p, fd("exp"), fd("id"), phi, path);
    const Complex a_im = delta_S_analytic(p, fd("exp"), fd("const:1i"), phi, path);
    CHECK(std::abs(a - (a_re + a_im)) < 1e-12 * std::abs(a));
  }

  TEST_CASE("class invariants are constant along transport paths") {
    const auto g = kt::cp1();
    const auto phi = normalize_potential(*g, 0.7);
    const auto start = random_admissible_profile(g, 3, 0.3);
    for (auto u : {sq, cubic, quartic}) {
      const auto path = path_of(g, u);
      const double t_max = 0.5 / (start.theta * path.u.derivative(2)).max_abs();
      for (const char* h : {"const:1", "id", "pow:2", "exp"}) {
        const Complex ref = equivariant_integral(start, fd(h), phi);
        for (int k = 1; k <= 10; ++k) {
          const auto moved = transport(start, phi, path, t_max * k / 10.0);
          CHECK(std::abs(equivariant_integral(moved.profile, fd(h), moved.phi) - ref) < 1e-8);
        }
      }
      const Complex s_phi = eval_S(start, fd("id"), fd("id"), phi);
      const double f0 = futaki(start, phi);
      for (int k = 1; k <= 10; ++k) {
        const auto moved = transport(start, phi, path, -t_max * k / 10.0);
        CHECK(std::abs(eval_S(moved.profile, fd("id"), fd("id"), moved.phi) - s_phi) < 1e-8);
        CHECK(std::abs(futaki(moved.profile, moved.phi) - f0) < 1e-8);
        CHECK(std::abs(volume_integral(*g, moved.phi.sampled(g->grid)) - 0.7) < 1e-8);
      }
    }
  }

  TEST_CASE("equivariant first variation vanishes for the pinned conventions only") {
    const auto g = kt::cp1();
    const auto p = random_admissible_profile(g, 17, 0.3);
    const auto path = path_of(g, cubic);
    const auto phi = normalize_potential(*g, 0.4);
    const auto& conv = pinned_conventions();
    for (const char* h : {"const:1", "id", "pow:2", "exp", "affine:2:1i"}) {
      CHECK(std::abs(equivariant_first_variation(p, fd(h), phi, path, conv)) < 1e-8);
    }
    const Conventions wrong{conv.kappa_theta, -conv.kappa_phi};
    CHECK(std::abs(equivariant_first_variation(p, fd("pow:2"), phi, path, wrong)) > 1e-3);
    CHECK_THROWS_AS(equivariant_first_variation(p, fd("log"), normalize_potential(*g), path, conv), DomainError);
  }
}
