#include "kahler/io.hpp"

#include "kahler/errors.hpp"

#include <cmath>
#include <algorithm>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace kahler::io {

std::string format_double(double v) { return format_real(v); }

double parse_double(std::string_view text) { return parse_real(text); }

json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

json complex_number(Complex z) { return json{{"re", number(z.real())}, {"im", number(z.imag())}}; }

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  size_t start = 0;
  for (;;) {
    const size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

void check_nodes(const SpectralGrid& grid, const std::vector<double>& xs, const std::string& source) {
  if (static_cast<int>(xs.size()) != grid.size()) {
    throw ParseError(source + ": " + std::to_string(xs.size()) + " rows but the grid has " +
                     std::to_string(grid.size()) + " nodes");
  }
  for (int i = 0; i < grid.size(); ++i) {
    if (std::abs(xs[i] - grid.node(i)) > 1e-13 * (1.0 + grid.length())) {
      throw ParseError(source + ": x in row " + std::to_string(i + 1) + " is " + format_double(xs[i]) +
                       ", expected Chebyshev node " + format_double(grid.node(i)));
    }
  }
}

double as_double(const json& v, const std::string& what) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw ParseError(what + " must be a number");
}

std::vector<double> as_doubles(const json& v, const std::string& what) {
  if (!v.is_array()) throw ParseError(what + " must be an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& e : v) out.push_back(as_double(e, what));
  return out;
}

const json& field(const json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key)) throw ParseError(std::string("missing field '") + key + "'");
  return doc.at(key);
}

json values(const SampledFunction& f) {
  json a = json::array();
  for (double v : f.values()) a.push_back(number(v));
  return a;
}

}  // namespace

std::string profile_csv(const MetricProfile& profile) {
  const auto& grid = profile.grid();
  std::string out = "x,theta\n";
  for (int i = 0; i < grid.size(); ++i) {
    out += format_double(grid.node(i)) + "," + format_double(profile.theta[i]) + "\n";
  }
  return out;
}

MetricProfile parse_profile_csv(const GeometryPtr& geom, std::string_view text) {
  auto lines = split(text, '\n');
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty() || trim(lines.front()) != "x,theta") throw ParseError("profile CSV must start with 'x,theta'");
  std::vector<double> xs, th;
  for (size_t k = 1; k < lines.size(); ++k) {
    const auto cells = split(trim(lines[k]), ',');
    if (cells.size() != 2) throw ParseError("profile CSV row " + std::to_string(k) + " must have 2 columns");
    xs.push_back(parse_double(trim(cells[0])));
    th.push_back(parse_double(trim(cells[1])));
  }
  check_nodes(*geom->grid, xs, "profile CSV");
  try {
    return {geom, SampledFunction(geom->grid, std::move(th))};
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("profile CSV: ") + e.what());
  }
}

json geometry_json(const ProfileGeometry& geom) {
  if (geom.kind != GeometryKind::custom) return geom.name();
  return json{{"kind", "custom"},
              {"x_lo", number(geom.x_lo())},
              {"x_hi", number(geom.x_hi())},
              {"slope_lo", number(geom.slope_lo)},
              {"slope_hi", number(geom.slope_hi)},
              {"dim", geom.dim},
              {"vol_const", number(geom.vol_const)},
              {"weight", values(geom.weight)},
              {"base_term", values(geom.base_term)}};
}

GeometryPtr parse_geometry_json(const json& doc, int nodes) {
  if (doc.is_string()) {
    try {
      return make_named_geometry(doc.get<std::string>(), nodes);
    } catch (const UnsupportedGeometry& e) {
      throw ParseError(e.what());
    }
  }
  if (!doc.is_object()) throw ParseError("geometry must be a name or an object");
  for (const auto& [key, _] : doc.items()) {
    static const std::vector<std::string> known{"kind", "x_lo", "x_hi", "weight", "base_term",
                                                "slope_lo", "slope_hi", "dim", "vol_const"};
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ParseError("unknown geometry field '" + key + "'");
    }
  }
  if (doc.contains("kind") && doc.at("kind") != "custom") throw ParseError("geometry kind must be 'custom'");
  const double lo = as_double(field(doc, "x_lo"), "x_lo");
  const double hi = as_double(field(doc, "x_hi"), "x_hi");
  if (!(lo < hi)) throw ParseError("geometry needs x_lo < x_hi");
  for (const char* key : {"weight", "base_term"}) {
    if (field(doc, key).is_array()) nodes = static_cast<int>(field(doc, key).size());
  }
  std::shared_ptr<const SpectralGrid> grid;
  try {
    grid = SpectralGrid::make(nodes, lo, hi);
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("geometry grid: ") + e.what());
  }
  auto sampled = [&](const char* key) {
    const auto& v = field(doc, key);
    if (v.is_string()) {
      const auto fn = FunctionDescriptor::parse(v.get<std::string>());
      if (!fn.is_real()) throw ParseError(std::string(key) + " must be real valued");
      std::vector<double> out(grid->size());
      for (int i = 0; i < grid->size(); ++i) {
        const double x = grid->node(i);
        if (!fn.in_domain(x)) throw ParseError(std::string(key) + " is undefined at x = " + format_double(x));
        out[i] = fn.value(x).real();
      }
      return SampledFunction(grid, std::move(out));
    }
    auto vals = as_doubles(v, key);
    if (static_cast<int>(vals.size()) != grid->size()) {
      throw ParseError(std::string(key) + " has " + std::to_string(vals.size()) + " values, expected " +
                       std::to_string(grid->size()));
    }
    return SampledFunction(grid, std::move(vals));
  };
  const int dim = doc.contains("dim") ? doc.at("dim").get<int>() : 1;
  const double vol = doc.contains("vol_const") ? as_double(doc.at("vol_const"), "vol_const") : 2.0 * std::numbers::pi;
  try {
    return make_custom_geometry(grid, sampled("weight"), sampled("base_term"),
                                as_double(field(doc, "slope_lo"), "slope_lo"),
                                as_double(field(doc, "slope_hi"), "slope_hi"), dim, vol);
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }
}

json profile_json(const MetricProfile& profile) {
  return json{{"geometry", geometry_json(*profile.geometry)},
              {"nodes", profile.geometry->nodes()},
              {"theta_values", values(profile.theta)}};
}

MetricProfile parse_profile_json(const json& doc) {
  try {
    const int nodes = field(doc, "nodes").get<int>();
    const auto geom = parse_geometry_json(field(doc, "geometry"), nodes);
    if (geom->nodes() != nodes) throw ParseError("nodes does not match the geometry data");
    auto theta = as_doubles(field(doc, "theta_values"), "theta_values");
    if (static_cast<int>(theta.size()) != nodes) {
      throw ParseError("theta_values has " + std::to_string(theta.size()) + " entries, expected " +
                       std::to_string(nodes));
    }
    return {geom, SampledFunction(geom->grid, std::move(theta))};
  } catch (const json::exception& e) {
    throw ParseError(std::string("profile document: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("profile document: ") + e.what());
  }
}

MetricProfile load_profile(const GeometryPtr& geom, const std::filesystem::path& path) {
  const auto text = read_file(path);
  if (path.extension() == ".csv") return parse_profile_csv(geom, text);
  if (path.extension() != ".json") throw ParseError("profile file must end in .csv or .json: " + path.string());
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  auto profile = parse_profile_json(doc);
  if (profile.geometry->name() != geom->name() || profile.geometry->nodes() != geom->nodes()) {
    throw ParseError(path.string() + " holds a profile on " + profile.geometry->name() + " with " +
                     std::to_string(profile.geometry->nodes()) + " nodes, expected " + geom->name() + " with " +
                     std::to_string(geom->nodes()));
  }
  if (geom->kind != GeometryKind::custom) return {geom, SampledFunction(geom->grid, profile.theta.values())};
  return profile;
}

json to_json(const ClassConstants& c) {
  return json{{"total_volume", number(c.total_volume)}, {"total_scalar", number(c.total_scalar)}, {"s0", number(c.s0)}};
}

json to_json(const HolomorphyPotential& phi) {
  return json{{"scale", number(phi.scale)}, {"shift", number(phi.shift)}, {"target", number(phi.target)}};
}

json to_json(const ELReport& r) {
  return json{{"alpha", number(r.alpha.real())},
              {"alpha_im", number(r.alpha.imag())},
              {"beta", number(r.beta.real())},
              {"beta_im", number(r.beta.imag())},
              {"defect_affine", number(r.defect_affine)},
              {"defect_operator", number(r.defect_operator)},
              {"tolerance", number(r.tolerance)},
              {"is_critical", r.is_critical}};
}

json to_json(const CriticalSolveResult& r) {
  json trace = json::array();
  for (double v : r.residual_trace) trace.push_back(number(v));
  return json{{"outcome", to_string(r.outcome)},
              {"converged", r.converged},
              {"iterations", r.iterations},
              {"alpha", complex_number(r.alpha)},
              {"beta", complex_number(r.beta)},
              {"el_report", to_json(r.report)},
              {"residual_trace", trace},
              {"profile", profile_json(r.profile)}};
}

json to_json(const IterationTrace& t) {
  json steps = json::array();
  for (const auto& s : t.steps) {
    json step{{"index", s.index},
              {"phi", to_json(s.phi)},
              {"status", to_string(s.status)}};
    if (s.status != IterationStatus::failed) {
      step["alpha"] = number(s.alpha);
      step["beta"] = number(s.beta);
      step["defect_affine"] = number(s.defect_affine);
      step["theta_max"] = number(s.theta_max);
      step["newton_iterations"] = s.newton_iterations;
      step["outcome"] = to_string(s.outcome);
    } else {
      step["message"] = s.message;
    }
    steps.push_back(std::move(step));
  }
  return json{{"steps", steps}, {"fields_collinear", t.fields_collinear}};
}

json to_json(const ConvergenceStudy& s) {
  json steps = json::array(), errors = json::array(), orders = json::array();
  for (double v : s.steps) steps.push_back(number(v));
  for (double v : s.errors) errors.push_back(number(v));
  for (double v : s.orders) orders.push_back(number(v));
  return json{{"analytic", complex_number(s.analytic)},
              {"steps", steps},
              {"errors", errors},
              {"orders", orders},
              {"min_order", number(s.min_order)}};
}

json to_json(const PinningReport& p) {
  auto candidates = [](const std::vector<CandidateCheck>& cs) {
    json a = json::array();
    for (const auto& c : cs) a.push_back({{"value", number(c.value)}, {"max_error", number(c.max_error)}, {"passed", c.passed}});
    return a;
  };
  return json{{"ok", p.ok},
              {"kappa_theta", number(p.conventions.kappa_theta)},
              {"kappa_phi", number(p.conventions.kappa_phi)},
              {"kappa_theta_candidates", candidates(p.kappa_theta_candidates)},
              {"kappa_phi_candidates", candidates(p.kappa_phi_candidates)}};
}

json to_json(const FubiniStudyPin& p) {
  return json{{"m", p.m},
              {"base_coefficient", number(cpm_base_coefficient(p.m))},
              {"fitted_coefficient", number(p.coefficient)},
              {"fit_residual", number(p.fit_residual)},
              {"scalar_curvature", number(p.s_mean)},
              {"scalar_curvature_std", number(p.s_std)},
              {"ok", p.ok}};
}

std::string psi_csv(const ELReport& r) {
  const auto& grid = *r.psi.re.grid();
  std::string out = "x,psi_re,psi_im\n";
  for (int i = 0; i < grid.size(); ++i) {
    out += format_double(grid.node(i)) + "," + format_double(r.psi.re[i]) + "," + format_double(r.psi.im[i]) + "\n";
  }
  return out;
}

std::string sampled_csv(const SampledFunction& f, const std::string& name) {
  const auto& grid = *f.grid();
  std::string out = "x," + name + "\n";
  for (int i = 0; i < grid.size(); ++i) out += format_double(grid.node(i)) + "," + format_double(f[i]) + "\n";
  return out;
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace kahler::io
