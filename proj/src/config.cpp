#include "kahler/config.hpp"

#include "kahler/errors.hpp"
#include "kahler/function_descriptor.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <map>

namespace kahler {

namespace {

template <typename Int>
Int parse_int(std::string_view key, std::string_view v) {
  Int out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    throw ParseError("config key '" + std::string(key) + "': invalid integer '" + std::string(v) + "'");
  }
  return out;
}

double parse_number(std::string_view key, std::string_view v) {
  try {
    return parse_real(v);
  } catch (const ParseError&) {
    throw ParseError("config key '" + std::string(key) + "': invalid number '" + std::string(v) + "'");
  }
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ParseError("config key '" + std::string(key) + "': expected true or false, got '" + std::string(v) + "'");
}

std::string canonical_descriptor(std::string_view key, std::string_view v) {
  try {
    return FunctionDescriptor::parse(v).render();
  } catch (const ParseError& e) {
    throw ParseError("config key '" + std::string(key) + "': " + e.what());
  }
}

std::string canonical_list(std::string_view key, std::string_view v) {
  std::string out;
  size_t start = 0;
  for (;;) {
    const size_t pos = v.find(';', start);
    const auto item = v.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
    if (!out.empty()) out += ';';
    out += canonical_descriptor(key, item);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string check_geometry(std::string_view v) {
  if (v == "cp1") return std::string(v);
  if (v.starts_with("cpm:")) {
    if (parse_int<int>("geometry", v.substr(4)) < 2) throw ParseError("geometry cpm:<m> needs m >= 2");
    return std::string(v);
  }
  if (v.starts_with("custom:") && v.size() > 7) return std::string(v);
  throw ParseError("geometry must be cp1, cpm:<m> or custom:<path>, got '" + std::string(v) + "'");
}

std::string check_profile(std::string_view v) {
  if (v == "round") return std::string(v);
  if (v.starts_with("file:") && v.size() > 5) return std::string(v);
  if (v.starts_with("random:")) {
    const auto rest = v.substr(7);
    const auto colon = rest.find(':');
    if (colon != std::string_view::npos) {
      parse_int<std::uint64_t>("profile", rest.substr(0, colon));
      if (!(parse_number("profile", rest.substr(colon + 1)) >= 0.0)) {
        throw ParseError("profile random amplitude must be >= 0");
      }
      return std::string(v);
    }
  }
  throw ParseError("profile must be round, random:<seed>:<amplitude> or file:<path>, got '" + std::string(v) + "'");
}

// Shortest text that parses back to the same double.
std::string format_shortest(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string render_opt(const std::optional<double>& v) { return v ? format_shortest(*v) : std::string(); }

struct Field {
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, std::string_view key, std::string_view value)> set;
  bool optional = false;
};

template <typename T>
Field int_field(T RunConfig::*member, T min) {
  return {[member](const RunConfig& c) { return std::to_string(c.*member); },
          [member, min](RunConfig& c, std::string_view k, std::string_view v) {
            const T x = parse_int<T>(k, v);
            if (x < min) throw ParseError("config key '" + std::string(k) + "' must be >= " + std::to_string(min));
            c.*member = x;
          }};
}

Field real_field(double RunConfig::*member, bool positive) {
  return {[member](const RunConfig& c) { return format_shortest(c.*member); },
          [member, positive](RunConfig& c, std::string_view k, std::string_view v) {
            const double x = parse_number(k, v);
            if (positive && !(x > 0.0)) throw ParseError("config key '" + std::string(k) + "' must be > 0");
            c.*member = x;
          }};
}

Field opt_field(std::optional<double> RunConfig::*member) {
  return {[member](const RunConfig& c) { return render_opt(c.*member); },
          [member](RunConfig& c, std::string_view k, std::string_view v) { c.*member = parse_number(k, v); }, true};
}

Field string_field(std::string RunConfig::*member, std::string (*check)(std::string_view)) {
  return {[member](const RunConfig& c) { return c.*member; },
          [member, check](RunConfig& c, std::string_view, std::string_view v) { c.*member = check(v); }};
}

Field descriptor_field(std::string RunConfig::*member, bool list) {
  return {[member](const RunConfig& c) { return c.*member; },
          [member, list](RunConfig& c, std::string_view k, std::string_view v) {
            c.*member = list ? canonical_list(k, v) : canonical_descriptor(k, v);
          }};
}

const std::map<std::string, Field, std::less<>>& schema() {
  static const std::map<std::string, Field, std::less<>> table = [] {
    std::map<std::string, Field, std::less<>> t;
    t["f"] = descriptor_field(&RunConfig::f, false);
    t["geometry"] = string_field(&RunConfig::geometry, check_geometry);
    t["grid.nodes"] = int_field(&RunConfig::nodes, 8);
    t["h"] = descriptor_field(&RunConfig::h, false);
    t["invariance.amplitude"] = real_field(&RunConfig::invariance_amplitude, true);
    t["invariance.paths"] = int_field(&RunConfig::invariance_paths, 0);
    t["invariance.samples"] = int_field(&RunConfig::invariance_samples, 0);
    t["invariance.steps"] = int_field(&RunConfig::invariance_steps, 2);
    t["iterate.max_steps"] = int_field(&RunConfig::iterate_max_steps, 1);
    t["minimize.degree"] = int_field(&RunConfig::minimize_degree, 0);
    t["out"] = {[](const RunConfig& c) { return c.out; },
                [](RunConfig& c, std::string_view, std::string_view v) { c.out = std::string(v); }, true};
    t["phi.scale"] = real_field(&RunConfig::phi_scale, false);
    t["phi.target"] = opt_field(&RunConfig::phi_target);
    t["profile"] = string_field(&RunConfig::profile, check_profile);
    t["seed"] = int_field<std::uint64_t>(&RunConfig::seed, 0);
    t["solver.alpha0"] = opt_field(&RunConfig::solver_alpha0);
    t["solver.beta0"] = opt_field(&RunConfig::solver_beta0);
    t["solver.max_iter"] = int_field(&RunConfig::solver_max_iter, 1);
    t["solver.method"] = string_field(&RunConfig::solver_method, [](std::string_view v) {
      if (v != "shooting" && v != "minimize") {
        throw ParseError("solver.method must be shooting or minimize, got '" + std::string(v) + "'");
      }
      return std::string(v);
    });
    t["sweep.f"] = descriptor_field(&RunConfig::sweep_f, true);
    t["sweep.h"] = descriptor_field(&RunConfig::sweep_h, true);
    t["sweep.threads"] = int_field(&RunConfig::sweep_threads, 0);
    t["sweep.threshold"] = real_field(&RunConfig::sweep_threshold, false);
    t["tol.affine"] = real_field(&RunConfig::tol_affine, true);
    t["tol.boundary"] = real_field(&RunConfig::tol_boundary, true);
    t["variation.profile"] = string_field(&RunConfig::variation_profile, check_profile);
    t["variation.richardson"] = {
        [](const RunConfig& c) { return std::string(c.variation_richardson ? "true" : "false"); },
        [](RunConfig& c, std::string_view k, std::string_view v) { c.variation_richardson = parse_bool(k, v); }};
    return t;
  }();
  return table;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

}  // namespace

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> k = [] {
    std::vector<std::string> out;
    for (const auto& [key, _] : schema()) out.push_back(key);
    return out;
  }();
  return k;
}

void RunConfig::set(std::string_view key, std::string_view value) {
  const auto it = schema().find(key);
  if (it == schema().end()) throw ParseError("unknown config key '" + std::string(key) + "'");
  it->second.set(*this, key, trim(value));
}

std::optional<std::string> RunConfig::get(std::string_view key) const {
  const auto it = schema().find(key);
  if (it == schema().end()) throw ParseError("unknown config key '" + std::string(key) + "'");
  auto v = it->second.get(*this);
  if (it->second.optional && v.empty()) return std::nullopt;
  return v;
}

RunConfig RunConfig::parse(std::string_view text) {
  RunConfig cfg;
  std::vector<std::string> seen;
  int line_no = 0;
  size_t start = 0;
  while (start <= text.size()) {
    const size_t end = std::min(text.find('\n', start), text.size());
    ++line_no;
    auto line = text.substr(start, end - start);
    start = end + 1;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const auto key = std::string(trim(line.substr(0, eq)));
    if (std::find(seen.begin(), seen.end(), key) != seen.end()) {
      throw ParseError("config line " + std::to_string(line_no) + ": repeated key '" + key + "'");
    }
    seen.push_back(key);
    try {
      cfg.set(key, line.substr(eq + 1));
    } catch (const ParseError& e) {
      throw ParseError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

std::string RunConfig::render() const {
  std::string out;
  for (const auto& [key, field] : schema()) {
    const auto v = field.get(*this);
    if (field.optional && v.empty()) continue;
    out += key + " = " + v + "\n";
  }
  return out;
}

}  // namespace kahler
