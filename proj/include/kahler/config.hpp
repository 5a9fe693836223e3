#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kahler {

/// Run settings shared by every command. The text form is one `key = value` per line
/// with dotted keys; `#` starts a comment. Unknown or repeated keys are rejected.
/// render() writes every key in sorted order (unset optional keys are omitted), so
/// parse(render(c)) == c and render(parse(t)) == t for rendered text t.
struct RunConfig {
  std::string geometry = "cp1";   // cp1 | cpm:<m> | custom:<path.json>
  std::string profile = "round";  // round | random:<seed>:<amplitude> | file:<path>
  std::string f = "id";
  std::string h = "const:1";
  double phi_scale = 1.0;
  std::optional<double> phi_target;
  int nodes = 129;
  std::uint64_t seed = 0;
  double tol_affine = 1e-8;
  double tol_boundary = 1e-8;
  std::string solver_method = "shooting";  // shooting | minimize
  int solver_max_iter = 50;
  std::optional<double> solver_alpha0;
  std::optional<double> solver_beta0;
  int minimize_degree = 24;
  int iterate_max_steps = 5;
  int invariance_samples = 50;
  double invariance_amplitude = 0.3;
  int invariance_paths = 5;
  int invariance_steps = 11;
  /// Profile for variation-check; round profiles make delta S vanish identically for constant h.
  std::string variation_profile = "random:7:0.1";
  bool variation_richardson = false;
  std::string sweep_f = "id;exp;scaled:0.5:pow:2";
  std::string sweep_h = "const:1;exp;affine:1:3";
  double sweep_threshold = 1e-8;
  int sweep_threads = 0;
  std::string out;

  static RunConfig parse(std::string_view text);
  std::string render() const;
  /// Validates and assigns one key; descriptors are stored in canonical form.
  void set(std::string_view key, std::string_view value);
  std::optional<std::string> get(std::string_view key) const;
  static const std::vector<std::string>& keys();

  bool operator==(const RunConfig&) const = default;
};

}  // namespace kahler
