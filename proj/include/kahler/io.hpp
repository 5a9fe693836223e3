#pragma once

#include "kahler/solver.hpp"
#include "kahler/variation.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <string_view>

namespace kahler::io {

using nlohmann::json;

/// %.17g: enough digits for a bit-exact round trip of any double.
std::string format_double(double v);
/// Strict decimal parse of the whole string; ParseError otherwise.
double parse_double(std::string_view text);

/// Finite doubles as numbers, non-finite ones as the strings "inf", "-inf", "nan".
json number(double v);
json complex_number(Complex z);

/// Columns x,theta in ascending node order.
std::string profile_csv(const MetricProfile& profile);
/// The x column must reproduce the geometry's nodes.
MetricProfile parse_profile_csv(const GeometryPtr& geom, std::string_view text);

/// {"geometry": ..., "nodes": N, "theta_values": [...]}. Named geometries are stored by
/// name, custom ones as an object with their sampled class data.
json profile_json(const MetricProfile& profile);
MetricProfile parse_profile_json(const json& doc);

json geometry_json(const ProfileGeometry& geom);
/// Accepts a geometry name or an object. Objects give x_lo, x_hi, weight, base_term
/// (descriptor strings in x, or value arrays on the Chebyshev nodes), slope_lo, slope_hi,
/// and optionally dim (1) and vol_const (2 pi). Arrays fix the node count.
GeometryPtr parse_geometry_json(const json& doc, int nodes);

/// Loads a profile from .csv or .json by extension.
MetricProfile load_profile(const GeometryPtr& geom, const std::filesystem::path& path);

json to_json(const ClassConstants& c);
json to_json(const HolomorphyPotential& phi);
/// alpha, beta, defect_affine, defect_operator, is_critical (+ imaginary parts, tolerance).
json to_json(const ELReport& r);
json to_json(const CriticalSolveResult& r);
json to_json(const IterationTrace& t);
json to_json(const ConvergenceStudy& s);
json to_json(const PinningReport& p);
json to_json(const FubiniStudyPin& p);

/// Columns x,psi_re,psi_im.
std::string psi_csv(const ELReport& r);
/// Columns x,<name>.
std::string sampled_csv(const SampledFunction& f, const std::string& name);

std::string dump(const json& doc);
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace kahler::io
