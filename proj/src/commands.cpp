#include "kahler/commands.hpp"

#include "kahler/errors.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <thread>

namespace kahler::cli {

using io::json;
using io::number;

namespace {

json config_json(const RunConfig& cfg) {
  json out = json::object();
  for (const auto& key : RunConfig::keys()) {
    if (key == "out") continue;
    if (auto v = cfg.get(key)) out[key] = *v;
  }
  return out;
}

DefectOptions defect_options(const RunConfig& cfg) { return {cfg.tol_affine}; }

SolverOptions solver_options(const RunConfig& cfg) {
  SolverOptions o;
  o.max_iter = cfg.solver_max_iter;
  o.defect = defect_options(cfg);
  return o;
}

std::optional<AffineGuess> initial_guess(const RunConfig& cfg) {
  if (cfg.solver_alpha0.has_value() != cfg.solver_beta0.has_value()) {
    throw ParseError("solver.alpha0 and solver.beta0 must be given together");
  }
  if (!cfg.solver_alpha0) return std::nullopt;
  return AffineGuess{*cfg.solver_alpha0, *cfg.solver_beta0};
}

std::vector<FunctionDescriptor> descriptor_list(const std::string& text) {
  std::vector<FunctionDescriptor> out;
  size_t start = 0;
  for (;;) {
    const size_t pos = text.find(';', start);
    out.push_back(FunctionDescriptor::parse(text.substr(start, pos == std::string::npos ? pos : pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

SampledFunction direction_from_coefficients(const ProfileGeometry& g, const std::vector<double>& c) {
  const ChebSeries series(g.x_lo(), g.x_hi(), c);
  return SampledFunction::from(g.grid, [&](double x) { return series(x); });
}

// Largest t with 1 - t Theta u'' >= 1/2 on the grid.
double safe_horizon(const MetricProfile& p, const SampledFunction& u) {
  const auto ddu = u.derivative(2);
  double m = 0.0;
  for (int i = 1; i + 1 < ddu.size(); ++i) m = std::max(m, std::abs(p.theta[i] * ddu[i]));
  return m > 0.0 ? 0.5 / m : 1.0;
}

struct Stats {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  double max_abs = 0.0;
  int count = 0;

  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    max_abs = std::max(max_abs, std::abs(v));
    ++count;
  }
  double spread() const { return count ? hi - lo : 0.0; }
  json to_json() const {
    if (!count) return json::object();
    return json{{"min", number(lo)}, {"max", number(hi)}, {"spread", number(spread())}, {"max_abs", number(max_abs)}};
  }
};

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

}  // namespace

std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const AdmissibilityError*>(&e)) return "AdmissibilityError";
  if (dynamic_cast<const DegenerateWeight*>(&e)) return "DegenerateWeight";
  if (dynamic_cast<const UnsupportedGeometry*>(&e)) return "UnsupportedGeometry";
  if (dynamic_cast<const DomainError*>(&e)) return "DomainError";
  if (dynamic_cast<const PathExitsClass*>(&e)) return "PathExitsClass";
  if (dynamic_cast<const SingularPotential*>(&e)) return "SingularPotential";
  if (dynamic_cast<const RangeError*>(&e)) return "RangeError";
  if (dynamic_cast<const ConvergenceError*>(&e)) return "ConvergenceError";
  if (dynamic_cast<const NoCriticalMetric*>(&e)) return "NoCriticalMetric";
  if (dynamic_cast<const ParseError*>(&e)) return "ParseError";
  if (dynamic_cast<const Error*>(&e)) return "Error";
  return "InternalError";
}

GeometryPtr load_geometry(const RunConfig& cfg) {
  if (cfg.geometry.starts_with("custom:")) {
    const std::filesystem::path path = cfg.geometry.substr(7);
    json doc;
    try {
      doc = json::parse(io::read_file(path));
    } catch (const json::exception& e) {
      throw ParseError(path.string() + ": " + e.what());
    }
    return io::parse_geometry_json(doc, cfg.nodes);
  }
  try {
    return make_named_geometry(cfg.geometry, cfg.nodes);
  } catch (const UnsupportedGeometry& e) {
    throw ParseError(e.what());
  }
}

MetricProfile load_profile_source(const GeometryPtr& geom, const std::string& source) {
  if (source == "round") return round_profile(geom);
  if (source.starts_with("file:")) return io::load_profile(geom, source.substr(5));
  if (source.starts_with("random:")) {
    const auto rest = source.substr(7);
    const auto colon = rest.find(':');
    if (colon == std::string::npos) throw ParseError("profile random:<seed>:<amplitude> is incomplete");
    std::uint64_t seed = 0;
    const auto digits = std::string_view(rest).substr(0, colon);
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), seed);
    if (ec != std::errc() || ptr != digits.data() + digits.size()) throw ParseError("invalid profile seed");
    return random_admissible_profile(geom, seed, parse_real(rest.substr(colon + 1)));
  }
  throw ParseError("unknown profile source '" + source + "'");
}

HolomorphyPotential load_potential(const RunConfig& cfg, const ProfileGeometry& geom) {
  return normalize_potential(geom, cfg.phi_target, cfg.phi_scale);
}

const std::vector<NamedDirection>& variation_directions() {
  static const std::vector<NamedDirection> d{
      {"x^2", [](double x) { return x * x; }},
      {"x^3-x/2", [](double x) { return x * x * x - 0.5 * x; }},
      {"x^4+x", [](double x) { return x * x * x * x + x; }},
  };
  return d;
}

const std::vector<std::string>& variation_f_matrix() {
  static const std::vector<std::string> f{"exp", "scaled:0.5:pow:2", "pow:3"};
  return f;
}

const std::vector<std::string>& variation_h_matrix() {
  static const std::vector<std::string> h{"const:1", "id", "exp"};
  return h;
}

CommandResult cmd_evaluate(const RunConfig& cfg) {
  const auto geom = load_geometry(cfg);
  const auto profile = load_profile_source(geom, cfg.profile);
  const auto f = FunctionDescriptor::parse(cfg.f);
  const auto h = FunctionDescriptor::parse(cfg.h);
  const auto phi = load_potential(cfg, *geom);

  CommandResult res;
  res.report_name = "evaluate.json";
  json& r = res.report;
  r["command"] = "evaluate";
  r["config"] = config_json(cfg);
  r["geometry"] = geom->name();
  r["nodes"] = geom->nodes();
  r["phi"] = io::to_json(phi);
  r["class_constants"] = io::to_json(class_constants(*geom));
  json violations = json::array();
  for (const auto& v : validate(profile, {cfg.tol_boundary})) {
    violations.push_back({{"invariant", v.invariant}, {"location", number(v.location)}, {"magnitude", number(v.magnitude)}});
  }
  r["violations"] = violations;
  if (!violations.empty()) {
    res.exit_code = kNumericalFailure;
    res.stdout_text = io::dump(r);
    return res;
  }
  const auto s = scalar_curvature(profile);
  const auto report = holomorphy_defect(profile, el_potential(profile, f, h, phi), defect_options(cfg));
  r["S"] = io::complex_number(eval_S(profile, f, h, phi));
  r["el_report"] = io::to_json(report);
  r["futaki"] = number(futaki(profile, phi));
  r["equivariant_integral"] = io::complex_number(equivariant_integral(profile, h, phi));
  res.files = {{"psi.csv", io::psi_csv(report)}, {"s.csv", io::sampled_csv(s, "s")}};
  res.stdout_text = io::dump(r);
  return res;
}

CommandResult cmd_invariance(const RunConfig& cfg) {
  const auto geom = load_geometry(cfg);
  const auto h = FunctionDescriptor::parse(cfg.h);
  const auto phi = load_potential(cfg, *geom);
  const auto id = FunctionDescriptor::identity();

  CommandResult res;
  res.report_name = "invariance.json";
  json& r = res.report;
  r["command"] = "invariance";
  r["config"] = config_json(cfg);
  r["samples"] = cfg.invariance_samples;

  struct Quantities {
    Stats equivariant, s_phi, futaki;
    void add(const MetricProfile& p, const FunctionDescriptor& h, const FunctionDescriptor& id,
             const HolomorphyPotential& phi) {
      const auto e = equivariant_integral(p, h, phi);
      equivariant.add(e.real());
      s_phi.add(eval_S(p, id, id, phi).real());
      futaki.add(kahler::futaki(p, phi));
    }
    json to_json() const {
      return json{{"equivariant_integral", equivariant.to_json()},
                  {"s_phi_integral", s_phi.to_json()},
                  {"futaki", futaki.to_json()}};
    }
    double worst_relative_spread() const {
      double w = 0.0;
      for (const Stats* s : {&equivariant, &s_phi, &futaki}) w = std::max(w, s->spread() / (1.0 + s->max_abs));
      return w;
    }
  };

  SplitMix64 rng(cfg.seed);
  Quantities across;
  json failures = json::array();
  json paths = json::array();
  double worst = 0.0;
  for (int k = 0; k < cfg.invariance_samples; ++k) {
    const std::uint64_t sample_seed = rng.next();
    try {
      const auto p = random_admissible_profile(geom, sample_seed, cfg.invariance_amplitude);
      across.add(p, h, id, phi);
      if (k < cfg.invariance_paths) {
        const auto u = direction_from_coefficients(*geom, random_chebyshev_coefficients(sample_seed ^ 0x5bd1e995u, 6, 1.0));
        const double t_max = safe_horizon(p, u);
        Quantities along;
        for (int j = 0; j < cfg.invariance_steps; ++j) {
          const double t = t_max * j / (cfg.invariance_steps - 1);
          along.add(transport(p, phi, {u}, t).profile, h, id, phi);
        }
        worst = std::max(worst, along.worst_relative_spread());
        auto pj = along.to_json();
        pj["sample"] = k;
        pj["t_max"] = number(t_max);
        paths.push_back(std::move(pj));
      }
    } catch (const Error& e) {
      failures.push_back({{"sample", k}, {"error", error_kind(e)}, {"message", e.what()}});
    }
  }
  worst = std::max(worst, across.worst_relative_spread());
  r["across_profiles"] = across.to_json();
  r["paths"] = paths;
  r["failures"] = failures;
  r["max_relative_spread"] = number(worst);
  r["passed"] = failures.empty() && worst < 1e-8;
  if (!r["passed"].get<bool>()) res.exit_code = kNumericalFailure;
  res.stdout_text = io::dump(r);
  return res;
}

CommandResult cmd_solve(const RunConfig& cfg) {
  const auto geom = load_geometry(cfg);
  const auto f = FunctionDescriptor::parse(cfg.f);
  const auto h = FunctionDescriptor::parse(cfg.h);
  const auto phi = load_potential(cfg, *geom);

  CriticalSolveResult sol;
  if (cfg.solver_method == "minimize") {
    MinimizeOptions o;
    o.degree = cfg.minimize_degree;
    o.defect = defect_options(cfg);
    sol = residual_minimize(geom, f, h, phi, load_profile_source(geom, cfg.profile), o);
  } else {
    sol = solve_critical(geom, f, h, phi, initial_guess(cfg), solver_options(cfg));
  }

  CommandResult res;
  res.report_name = "solve.json";
  auto& r = res.report;
  r = io::to_json(sol);
  r["command"] = "solve";
  r["config"] = config_json(cfg);
  r["method"] = cfg.solver_method;
  r["phi"] = io::to_json(phi);
  if (!sol.report.is_critical) res.exit_code = kNumericalFailure;
  res.files = {{"profile.csv", io::profile_csv(sol.profile)},
               {"profile.json", io::dump(io::profile_json(sol.profile))},
               {"psi.csv", io::psi_csv(sol.report)}};
  res.stdout_text = io::dump(r);
  return res;
}

CommandResult cmd_iterate(const RunConfig& cfg) {
  const auto geom = load_geometry(cfg);
  const auto f = FunctionDescriptor::parse(cfg.f);
  const auto h = FunctionDescriptor::parse(cfg.h);
  IterationOptions o;
  o.max_steps = cfg.iterate_max_steps;
  o.solver = solver_options(cfg);
  const auto trace = iterate(geom, f, h, load_potential(cfg, *geom), o);

  CommandResult res;
  res.report_name = "iterate.json";
  res.report = io::to_json(trace);
  res.report["command"] = "iterate";
  res.report["config"] = config_json(cfg);
  if (!trace.steps.empty() && trace.steps.back().status == IterationStatus::failed) res.exit_code = kNumericalFailure;
  res.stdout_text = io::dump(res.report);
  return res;
}

CommandResult cmd_variation_check(const RunConfig& cfg) {
  const auto geom = load_geometry(cfg);
  const auto profile = load_profile_source(geom, cfg.variation_profile);
  const auto phi = load_potential(cfg, *geom);
  const auto pinning = pin_conventions();

  CommandResult res;
  res.report_name = "variation-report.json";
  auto& r = res.report;
  r["command"] = "variation-check";
  r["config"] = config_json(cfg);
  r["pinning"] = io::to_json(pinning);
  r["kappa_theta"] = number(pinning.conventions.kappa_theta);
  r["kappa_phi"] = number(pinning.conventions.kappa_phi);
  if (!pinning.ok) {
    res.exit_code = kNumericalFailure;
    res.stdout_text = io::dump(r);
    return res;
  }

  std::vector<DeformationPath> paths;
  for (const auto& d : variation_directions()) paths.push_back({SampledFunction::from(geom->grid, d.u)});

  json cases = json::array();
  json orders = json::array();
  double min_order = std::numeric_limits<double>::infinity();
  for (const auto& fs : variation_f_matrix()) {
    const auto f = FunctionDescriptor::parse(fs);
    for (const auto& hs : variation_h_matrix()) {
      const auto h = FunctionDescriptor::parse(hs);
      for (size_t k = 0; k < paths.size(); ++k) {
        std::vector<double> steps{1e-2, 1e-3, 1e-4};
        const auto study = convergence_study(profile, f, h, phi, paths[k], steps);
        auto c = io::to_json(study);
        c["f"] = fs;
        c["h"] = hs;
        c["u"] = variation_directions()[k].label;
        if (cfg.variation_richardson) {
          // Extrapolated differences reach the discretization floor quickly, so they are
          // reported next to the plain central-difference orders rather than replacing them.
          json rich = json::array();
          for (double st : steps) {
            rich.push_back(number(std::abs(delta_S_numeric(profile, f, h, phi, paths[k], st, true) - study.analytic)));
          }
          c["richardson_errors"] = rich;
        }
        cases.push_back(c);
        orders.push_back(c["orders"]);
        min_order = std::min(min_order, study.min_order);
      }
    }
  }

  // First-order and finite-t drift of the class invariants.
  double drift = 0.0;
  for (const auto& hs : {"const:1", "id", "pow:2", "exp"}) {
    const auto h = FunctionDescriptor::parse(hs);
    for (const auto& path : paths) {
      drift = std::max(drift, std::abs(equivariant_first_variation(profile, h, phi, path, pinning.conventions)));
      const double t_max = safe_horizon(profile, path.u);
      const auto base = equivariant_integral(profile, h, phi);
      for (int j = 1; j <= 10; ++j) {
        const auto moved = transport(profile, phi, path, t_max * j / 10.0);
        drift = std::max(drift, std::abs(equivariant_integral(moved.profile, h, moved.phi) - base));
      }
    }
  }
  r["cases"] = cases;
  r["convergence_orders"] = orders;
  r["min_order"] = number(min_order);
  r["max_invariance_drift"] = number(drift);
  r["passed"] = min_order >= 1.9 && drift < 1e-8;
  if (!r["passed"].get<bool>()) res.exit_code = kNumericalFailure;
  res.stdout_text = io::dump(r);
  return res;
}

CommandResult cmd_sweep(const RunConfig& cfg) {
  const auto geom = load_geometry(cfg);
  const auto phi = load_potential(cfg, *geom);
  const auto fs = descriptor_list(cfg.sweep_f);
  const auto hs = descriptor_list(cfg.sweep_h);

  struct Point {
    size_t fi, hi;
  };
  std::vector<Point> grid;
  for (size_t i = 0; i < fs.size(); ++i)
    for (size_t j = 0; j < hs.size(); ++j) grid.push_back({i, j});

  std::vector<std::string> rows(grid.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t k = next++; k < grid.size(); k = next++) {
      const auto& f = fs[grid[k].fi];
      const auto& h = hs[grid[k].hi];
      std::string row = std::to_string(k) + "," + csv_quote(f.render()) + "," + csv_quote(h.render()) + ",";
      try {
        const auto sol = solve_critical(geom, f, h, phi, std::nullopt, solver_options(cfg));
        const bool flagged = std::abs(sol.alpha.real()) > cfg.sweep_threshold && !h.is_constant();
        row += to_string(sol.outcome) + "," + io::format_double(sol.alpha.real()) + "," +
               io::format_double(sol.beta.real()) + "," + io::format_double(sol.report.defect_affine) + "," +
               io::format_double(sol.report.defect_operator) + "," + std::to_string(sol.iterations) + "," +
               (flagged ? "true" : "false") + ",";
      } catch (const std::exception& e) {
        row += error_kind(e) + ",,,,,,false," + csv_quote(e.what());
      }
      rows[k] = row + "\n";
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const size_t n_threads = std::min<size_t>(grid.size(), cfg.sweep_threads > 0 ? cfg.sweep_threads : hw);
  std::vector<std::thread> pool;
  for (size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  CommandResult res;
  res.report_name = "sweep.csv";
  std::string csv = "index,f,h,status,alpha,beta,defect_affine,defect_operator,iterations,flagged,message\n";
  for (const auto& row : rows) csv += row;
  res.stdout_text = csv;
  return res;
}

CommandResult cmd_conventions(const RunConfig& cfg) {
  CommandResult res;
  res.report_name = "conventions.json";
  const auto pinning = pin_conventions();
  json cpm = json::array();
  bool ok = pinning.ok;
  for (int m : {2, 3}) {
    const auto pin = pin_fubini_study(m, cfg.nodes);
    ok = ok && pin.ok;
    cpm.push_back(io::to_json(pin));
  }
  res.report = json{{"kappa_theta", number(pinning.conventions.kappa_theta)},
                    {"kappa_phi", number(pinning.conventions.kappa_phi)},
                    {"pinning", io::to_json(pinning)},
                    {"cpm", cpm},
                    {"vol_const", number(make_cp1_geometry(cfg.nodes)->vol_const)},
                    {"ok", ok}};
  if (!ok) res.exit_code = kNumericalFailure;
  res.stdout_text = io::dump(res.report);
  return res;
}

void emit(const RunConfig& cfg, const CommandResult& result, std::ostream& out) {
  if (cfg.out.empty()) {
    out << result.stdout_text;
    return;
  }
  const std::filesystem::path dir = cfg.out;
  io::write_file(dir / result.report_name, result.report.is_null() ? result.stdout_text : io::dump(result.report));
  for (const auto& [name, content] : result.files) io::write_file(dir / name, content);
}

namespace {

constexpr const char* kFooter = R"(Outputs (written to --out DIR, or the main report printed to stdout):
  evaluate         evaluate.json, psi.csv (x,psi_re,psi_im), s.csv (x,s)
  invariance       invariance.json
  solve            solve.json, profile.csv (x,theta), profile.json, psi.csv (x,psi_re,psi_im)
  iterate          iterate.json
  variation-check  variation-report.json
  sweep            sweep.csv (index,f,h,status,alpha,beta,defect_affine,defect_operator,iterations,flagged,message)
  conventions      conventions.json
CSV numbers use 17 significant digits. Exit codes: 0 success, 1 numerical failure, 2 usage or parse error.
Descriptors: const:c | id | affine:a:b | pow:p | exp | log | scaled:c:F | sum:F:G | comp:a:b:F)";

struct Flags {
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> overrides;
};

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical lab for generalized Calabi functionals on circle-symmetric Kahler geometries", "kahlerlab"};
  app.require_subcommand(1);
  app.footer(kFooter);

  struct Sub {
    const char* name;
    const char* help;
    CommandResult (*fn)(const RunConfig&);
  };
  const std::vector<Sub> subs{
      {"evaluate", "S, EL report, Futaki invariant and class constants for one profile", cmd_evaluate},
      {"invariance", "class invariants over random profiles and transport paths", cmd_invariance},
      {"solve", "critical metric by shooting (or residual minimization)", cmd_solve},
      {"iterate", "sequence of critical metrics and fields", cmd_iterate},
      {"variation-check", "first-variation formulas against finite differences", cmd_variation_check},
      {"sweep", "solve over a grid of (f, h) descriptors", cmd_sweep},
      {"conventions", "pinned convention constants and CP^m oracle", cmd_conventions},
  };

  Flags flags;
  std::vector<std::string> sets;
  std::map<std::string, std::string> opt_values;
  const std::vector<std::pair<std::string, std::string>> common{
      {"--geometry", "geometry"}, {"--profile", "profile"}, {"--f", "f"},          {"--h", "h"},
      {"--nodes", "grid.nodes"},  {"--seed", "seed"},       {"--tol", "tol.affine"}, {"--out", "out"},
      {"--target", "phi.target"}, {"--samples", "invariance.samples"}, {"--max-steps", "iterate.max_steps"},
      {"--method", "solver.method"}};
  std::vector<CLI::App*> apps;
  for (const auto& s : subs) {
    auto* sub = app.add_subcommand(s.name, s.help);
    // --h names the h descriptor, so help is --help only.
    sub->set_help_flag("--help", "Print this help message and exit");
    sub->add_option("--config", flags.config_path, "key = value config file; flags override it");
    for (const auto& [flag, key] : common) {
      sub->add_option(flag, opt_values[key], "sets " + key);
    }
    sub->add_option("--set", sets, "override any config key: key=value")->take_all();
    apps.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsageError;
  }

  RunConfig cfg;
  try {
    if (!flags.config_path.empty()) cfg = RunConfig::parse(io::read_file(flags.config_path));
    for (const auto& [flag, key] : common) {
      bool given = false;
      for (auto* sub : apps) given = given || (sub->parsed() && sub->count(flag) > 0);
      if (given) cfg.set(key, opt_values[key]);
    }
    for (const auto& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ParseError("--set expects key=value, got '" + kv + "'");
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }

  for (size_t i = 0; i < subs.size(); ++i) {
    if (!apps[i]->parsed()) continue;
    try {
      const auto result = subs[i].fn(cfg);
      emit(cfg, result, out);
      return result.exit_code;
    } catch (const ParseError& e) {
      err << "error: ParseError: " << e.what() << "\n";
      return kUsageError;
    } catch (const std::exception& e) {
      err << "error: " << error_kind(e) << ": " << e.what() << "\n";
      return kNumericalFailure;
    }
  }
  return kUsageError;
}

}  // namespace kahler::cli
