#include "support.hpp"

#include "kahler/errors.hpp"
#include "kahler/io.hpp"
#include "kahler/potentials.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <limits>
#include <random>

using namespace kahler;

namespace {

std::filesystem::path scratch_dir(const char* name) {
  const auto dir = std::filesystem::temp_directory_path() / (std::string("kahlerlab_io_") + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("17-digit rendering round-trips every double") {
    std::mt19937_64 gen(42);
    for (int k = 0; k < 20000; ++k) {
      const double v = std::bit_cast<double>(gen());
      if (!std::isfinite(v)) continue;
      const double back = io::parse_double(io::format_double(v));
      CHECK(std::bit_cast<std::uint64_t>(back) == std::bit_cast<std::uint64_t>(v));
    }
    for (double v : {0.0, -0.0, 1.0, 0.1, 1.0 / 3.0, std::numeric_limits<double>::denorm_min(),
                     std::numeric_limits<double>::max(), -std::numeric_limits<double>::min()}) {
      CHECK(std::bit_cast<std::uint64_t>(io::parse_double(io::format_double(v))) == std::bit_cast<std::uint64_t>(v));
    }
    CHECK(io::format_double(0.1) == "0.10000000000000001");
    CHECK_THROWS_AS(io::parse_double("abc"), ParseError);
    CHECK_THROWS_AS(io::parse_double("1.0x"), ParseError);
  }

  TEST_CASE("non-finite numbers become strings in documents") {
    CHECK(io::number(1.5) == 1.5);
    CHECK(io::number(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(io::number(-std::numeric_limits<double>::infinity()) == "-inf");
    CHECK(io::number(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(io::complex_number({1.0, -2.0}) == io::json{{"re", 1.0}, {"im", -2.0}});
  }

  TEST_CASE("profile CSV is ascending in x and round-trips bit-exactly") {
    for (const auto& g : {kt::cp1(), make_cpm_geometry(3, 65)}) {
      const auto p = random_admissible_profile(g, 17, 0.2);
      const auto text = io::profile_csv(p);
      CHECK(text.rfind("x,theta\n", 0) == 0);
      double prev = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < g->nodes(); ++i) {
        CHECK(g->grid->node(i) > prev);
        prev = g->grid->node(i);
      }
      const auto back = io::parse_profile_csv(g, text);
      CHECK(same_bits(back.theta.values(), p.theta.values()));
      CHECK(io::profile_csv(back) == text);
    }
  }

  TEST_CASE("profile CSV errors") {
    const auto g = kt::cp1();
    const auto good = io::profile_csv(round_profile(g));
    CHECK_THROWS_AS(io::parse_profile_csv(g, "x,th\n0,1\n"), ParseError);
    CHECK_THROWS_AS(io::parse_profile_csv(g, ""), ParseError);
    CHECK_THROWS_AS(io::parse_profile_csv(g, "x,theta\n-1,0,3\n"), ParseError);
    CHECK_THROWS_AS(io::parse_profile_csv(g, "x,theta\n-1,zero\n"), ParseError);
    // Too few rows, and rows that are not the Chebyshev nodes.
    CHECK_THROWS_AS(io::parse_profile_csv(g, "x,theta\n-1,0\n1,0\n"), ParseError);
    const auto other = io::profile_csv(round_profile(make_cp1_geometry(65)));
    CHECK_THROWS_AS(io::parse_profile_csv(g, other), ParseError);
    auto shifted = good;
    shifted.replace(shifted.find("\n-1,") + 1, 2, "-0.5");
    CHECK_THROWS_AS(io::parse_profile_csv(g, shifted), ParseError);
    auto infinite = good;
    infinite.replace(infinite.find(",0\n") + 1, 1, "inf");
    CHECK_THROWS_AS(io::parse_profile_csv(g, infinite), ParseError);
    // Windows line endings and trailing blank lines are accepted.
    std::string crlf;
    for (char c : good) {
      if (c == '\n') crlf += '\r';
      crlf += c;
    }
    CHECK(io::parse_profile_csv(g, crlf + "\n\n").theta.values() == round_profile(g).theta.values());
  }

  TEST_CASE("profile documents round-trip bit-exactly") {
    const auto p = random_admissible_profile(make_cpm_geometry(2, 33), 5, 0.1);
    const auto doc = io::profile_json(p);
    CHECK(doc.at("geometry") == "cpm:2");
    CHECK(doc.at("nodes") == 33);
    CHECK(doc.at("theta_values").size() == 33);
    const auto back = io::parse_profile_json(io::json::parse(io::dump(doc)));
    CHECK(back.geometry->name() == "cpm:2");
    CHECK(same_bits(back.theta.values(), p.theta.values()));
  }

  TEST_CASE("custom geometries round-trip through documents") {
    const auto grid = SpectralGrid::make(33, 0.0, 2.0);
    const auto g = make_custom_geometry(grid, SampledFunction::from(grid, [](double x) { return 1 + 0.25 * x; }),
                                        SampledFunction::constant(grid, 0.0), 1.0, -1.0, 1, 2 * kt::pi);
    const auto theta = SampledFunction::from(grid, [](double x) { return x * (2 - x) / 2; });
    const MetricProfile p{g, theta};
    const auto doc = io::json::parse(io::dump(io::profile_json(p)));
    CHECK(doc.at("geometry").at("kind") == "custom");
    const auto back = io::parse_profile_json(doc);
    CHECK(back.geometry->kind == GeometryKind::custom);
    CHECK(back.geometry->x_lo() == 0.0);
    CHECK(back.geometry->x_hi() == 2.0);
    CHECK(same_bits(back.geometry->weight.values(), g->weight.values()));
    CHECK(same_bits(back.theta.values(), theta.values()));
    CHECK(back.geometry->slope_lo == 1.0);
  }

  TEST_CASE("geometry documents accept descriptors and reject bad input") {
    const io::json doc{{"x_lo", -1.0}, {"x_hi", 1.0}, {"weight", "const:1"}, {"base_term", "const:0"},
                       {"slope_lo", 2.0}, {"slope_hi", -2.0}};
    const auto g = io::parse_geometry_json(doc, 17);
    CHECK(g->nodes() == 17);
    CHECK(g->vol_const == doctest::Approx(2 * kt::pi));
    auto bad = doc;
    bad["colour"] = "red";
    CHECK_THROWS_AS(io::parse_geometry_json(bad, 17), ParseError);
    bad = doc;
    bad["x_hi"] = -2.0;
    CHECK_THROWS_AS(io::parse_geometry_json(bad, 17), ParseError);
    bad = doc;
    bad.erase("slope_hi");
    CHECK_THROWS_AS(io::parse_geometry_json(bad, 17), ParseError);
    bad = doc;
    bad["weight"] = "log";
    CHECK_THROWS_AS(io::parse_geometry_json(bad, 17), ParseError);
    bad = doc;
    bad["weight"] = io::json::array({1.0, 1.0});
    bad["base_term"] = io::json::array({0.0, 0.0, 0.0});
    CHECK_THROWS_AS(io::parse_geometry_json(bad, 17), ParseError);
    bad = doc;
    bad["kind"] = "cp1";
    CHECK_THROWS_AS(io::parse_geometry_json(bad, 17), ParseError);
    CHECK_THROWS_AS(io::parse_geometry_json(io::json(3), 17), ParseError);
    CHECK_THROWS_AS(io::parse_geometry_json(io::json("torus"), 17), ParseError);
  }

  TEST_CASE("profile document errors") {
    const auto doc = io::profile_json(round_profile(make_cp1_geometry(17)));
    for (const char* key : {"geometry", "nodes", "theta_values"}) {
      auto bad = doc;
      bad.erase(key);
      CHECK_THROWS_AS(io::parse_profile_json(bad), ParseError);
    }
    auto bad = doc;
    bad["theta_values"].erase(0);
    CHECK_THROWS_AS(io::parse_profile_json(bad), ParseError);
    bad = doc;
    bad["theta_values"][3] = "three";
    CHECK_THROWS_AS(io::parse_profile_json(bad), ParseError);
    bad = doc;
    bad["nodes"] = "many";
    CHECK_THROWS_AS(io::parse_profile_json(bad), ParseError);
    bad = doc;
    bad["theta_values"][3] = "inf";
    CHECK_THROWS_AS(io::parse_profile_json(bad), ParseError);
  }

  TEST_CASE("profiles load from files by extension") {
    const auto dir = scratch_dir("load");
    const auto g = make_cp1_geometry(33);
    const auto p = random_admissible_profile(g, 3, 0.2);
    io::write_file(dir / "p.csv", io::profile_csv(p));
    io::write_file(dir / "p.json", io::dump(io::profile_json(p)));
    io::write_file(dir / "p.txt", io::profile_csv(p));
    io::write_file(dir / "broken.json", "{");
    CHECK(same_bits(io::load_profile(g, dir / "p.csv").theta.values(), p.theta.values()));
    CHECK(same_bits(io::load_profile(g, dir / "p.json").theta.values(), p.theta.values()));
    CHECK_THROWS_AS(io::load_profile(g, dir / "p.txt"), ParseError);
    CHECK_THROWS_AS(io::load_profile(g, dir / "broken.json"), ParseError);
    CHECK_THROWS_AS(io::load_profile(g, dir / "missing.csv"), ParseError);
    CHECK_THROWS_AS(io::load_profile(make_cp1_geometry(17), dir / "p.json"), ParseError);
    CHECK_THROWS_AS(io::load_profile(make_cpm_geometry(2, 33), dir / "p.json"), ParseError);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("write_file creates parent directories") {
    const auto dir = scratch_dir("write");
    io::write_file(dir / "a" / "b" / "c.txt", "hello\n");
    CHECK(io::read_file(dir / "a" / "b" / "c.txt") == "hello\n");
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("EL report document and psi export") {
    const auto g = make_cp1_geometry(17);
    const auto report = holomorphy_defect(round_profile(g), SampledFunction::from(g->grid, [](double x) { return 3 * x + 1; }));
    const auto doc = io::to_json(report);
    for (const char* key : {"alpha", "beta", "defect_affine", "defect_operator", "is_critical"}) CHECK(doc.contains(key));
    CHECK(doc.at("alpha").get<double>() == doctest::Approx(3.0));
    CHECK(doc.at("beta").get<double>() == doctest::Approx(1.0));
    CHECK(doc.at("is_critical") == true);
    const auto csv = io::psi_csv(report);
    CHECK(csv.rfind("x,psi_re,psi_im\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 18);
    CHECK(io::sampled_csv(g->weight, "w").rfind("x,w\n-1,1\n", 0) == 0);
  }

  TEST_CASE("class constants and potentials serialize every field") {
    const auto g = kt::cp1();
    const auto c = io::to_json(class_constants(*g));
    CHECK(c.at("total_volume").get<double>() == doctest::Approx(4 * kt::pi));
    CHECK(c.at("total_scalar").get<double>() == doctest::Approx(8 * kt::pi));
    CHECK(c.at("s0").get<double>() == doctest::Approx(2.0));
    const auto phi = io::to_json(normalize_potential(*g, 1.0));
    for (const char* key : {"scale", "shift", "target"}) CHECK(phi.contains(key));
    CHECK(phi.at("target") == 1.0);
  }
}
