#include "kahler/commands.hpp"
#include "kahler/discretization.hpp"
#include "kahler/errors.hpp"
#include "kahler/function_descriptor.hpp"
#include "kahler/geometry.hpp"
#include "kahler/io.hpp"
#include "kahler/potentials.hpp"
#include "kahler/solver.hpp"
#include "kahler/variation.hpp"

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <sstream>

namespace py = pybind11;
using namespace kahler;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) {
  py::array_t<double> a(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), a.mutable_data());
  return a;
}

FunctionDescriptor descriptor(const std::string& text) { return FunctionDescriptor::parse(text); }

HolomorphyPotential potential(const ProfileGeometry& g, std::optional<double> target, double scale) {
  return normalize_potential(g, target, scale);
}

// pybind11 holders cannot point to const objects, so geometries travel in a handle.
struct GeometryHandle {
  GeometryPtr ptr;
  const ProfileGeometry& operator*() const { return *ptr; }
};

// Documents cross the boundary as JSON text; the Python package decodes them.
std::string dumped(const io::json& doc) { return doc.dump(); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Generalized Calabi functionals on circle-symmetric Kahler geometries";

  static py::exception<Error> base(m, "KahlerError", PyExc_RuntimeError);
  static py::exception<ParseError> parse_error(m, "ParseError", base.ptr());
  static py::exception<DomainError> domain_error(m, "DomainError", base.ptr());
  static py::exception<AdmissibilityError> admissibility_error(m, "AdmissibilityError", base.ptr());
  static py::exception<NoCriticalMetric> no_critical(m, "NoCriticalMetric", base.ptr());
  static py::exception<SingularPotential> singular(m, "SingularPotential", base.ptr());
  static py::exception<ConvergenceError> convergence(m, "ConvergenceError", base.ptr());
  static py::exception<RangeError> range_error(m, "RangeError", base.ptr());
  static py::exception<PathExitsClass> path_exits(m, "PathExitsClass", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ParseError& e) {
      py::set_error(parse_error, e.what());
    } catch (const DomainError& e) {
      py::set_error(domain_error, e.what());
    } catch (const AdmissibilityError& e) {
      py::set_error(admissibility_error, e.what());
    } catch (const NoCriticalMetric& e) {
      py::set_error(no_critical, e.what());
    } catch (const SingularPotential& e) {
      py::set_error(singular, e.what());
    } catch (const ConvergenceError& e) {
      py::set_error(convergence, e.what());
    } catch (const RangeError& e) {
      py::set_error(range_error, e.what());
    } catch (const PathExitsClass& e) {
      py::set_error(path_exits, e.what());
    } catch (const Error& e) {
      py::set_error(base, e.what());
    }
  });

  py::class_<GeometryHandle>(m, "Geometry")
      .def_static("cp1", [](int n) { return GeometryHandle{make_cp1_geometry(n)}; },
                  py::arg("nodes") = SpectralGrid::kDefaultNodes)
      .def_static("cpm", [](int mm, int n) { return GeometryHandle{make_cpm_geometry(mm, n)}; }, py::arg("m"),
                  py::arg("nodes") = SpectralGrid::kDefaultNodes)
      .def_static("named", [](const std::string& name, int n) { return GeometryHandle{make_named_geometry(name, n)}; },
                  py::arg("name"), py::arg("nodes") = SpectralGrid::kDefaultNodes)
      .def_property_readonly("name", [](const GeometryHandle& g) { return g.ptr->name(); })
      .def_property_readonly("nodes", [](const GeometryHandle& g) { return g.ptr->nodes(); })
      .def_property_readonly("dim", [](const GeometryHandle& g) { return g.ptr->dim; })
      .def_property_readonly("vol_const", [](const GeometryHandle& g) { return g.ptr->vol_const; })
      .def_property_readonly("x", [](const GeometryHandle& g) {
        std::vector<double> x(g.ptr->nodes());
        for (int i = 0; i < g.ptr->nodes(); ++i) x[i] = g.ptr->grid->node(i);
        return to_array(x);
      })
      .def_property_readonly("weight", [](const GeometryHandle& g) { return to_array(g.ptr->weight.values()); })
      .def("class_constants", [](const GeometryHandle& g) { return dumped(io::to_json(class_constants(*g))); })
      .def("__repr__", [](const GeometryHandle& g) {
        return "<Geometry " + g.ptr->name() + " nodes=" + std::to_string(g.ptr->nodes()) + ">";
      });

  py::class_<MetricProfile>(m, "Profile")
      .def_static("round", [](const GeometryHandle& g) { return round_profile(g.ptr); }, py::arg("geometry"))
      .def_static("random", [](const GeometryHandle& g, std::uint64_t seed,
                               double amplitude) { return random_admissible_profile(g.ptr, seed, amplitude); },
                  py::arg("geometry"), py::arg("seed"), py::arg("amplitude"))
      .def_static("from_theta", [](const GeometryHandle& g, std::vector<double> theta) {
        return MetricProfile{g.ptr, SampledFunction(g.ptr->grid, std::move(theta))};
      }, py::arg("geometry"), py::arg("theta"))
      .def_static("from_csv", [](const GeometryHandle& g, const std::string& text) {
        return io::parse_profile_csv(g.ptr, text);
      }, py::arg("geometry"), py::arg("text"))
      .def_static("from_json", [](const std::string& text) {
        try {
          return io::parse_profile_json(io::json::parse(text));
        } catch (const io::json::exception& e) {
          throw ParseError(e.what());
        }
      }, py::arg("text"))
      .def_property_readonly("geometry", [](const MetricProfile& p) { return GeometryHandle{p.geometry}; })
      .def_property_readonly("theta", [](const MetricProfile& p) { return to_array(p.theta.values()); })
      .def("scalar_curvature", [](const MetricProfile& p) { return to_array(scalar_curvature(p).values()); })
      .def("violations", [](const MetricProfile& p, double tol) {
        std::vector<std::string> out;
        for (const auto& v : validate(p, {tol})) out.push_back(v.invariant);
        return out;
      }, py::arg("tol") = 1e-8)
      .def("to_csv", &io::profile_csv)
      .def("to_json", [](const MetricProfile& p) { return dumped(io::profile_json(p)); });

  m.def("render_descriptor", [](const std::string& text) { return descriptor(text).render(); }, py::arg("text"),
        "Canonical form of an f or h descriptor such as 'scaled:3:exp'.");
  m.def("descriptor_value", [](const std::string& text, double z) { return descriptor(text).value(z); },
        py::arg("text"), py::arg("z"));

  m.def("eval_S", [](const MetricProfile& p, const std::string& f, const std::string& h, std::optional<double> target,
                     double scale) {
    return eval_S(p, descriptor(f), descriptor(h), potential(*p.geometry, target, scale));
  }, py::arg("profile"), py::arg("f"), py::arg("h"), py::arg("phi_target") = py::none(), py::arg("phi_scale") = 1.0);

  m.def("el_report", [](const MetricProfile& p, const std::string& f, const std::string& h,
                        std::optional<double> target, double scale, double tol) {
    const auto phi = potential(*p.geometry, target, scale);
    return dumped(io::to_json(holomorphy_defect(p, el_potential(p, descriptor(f), descriptor(h), phi), {tol})));
  }, py::arg("profile"), py::arg("f"), py::arg("h"), py::arg("phi_target") = py::none(), py::arg("phi_scale") = 1.0,
        py::arg("tol_affine") = 1e-8);

  m.def("futaki", [](const MetricProfile& p, std::optional<double> target, double scale) {
    return futaki(p, potential(*p.geometry, target, scale));
  }, py::arg("profile"), py::arg("phi_target") = py::none(), py::arg("phi_scale") = 1.0);

  m.def("equivariant_integral", [](const MetricProfile& p, const std::string& h, std::optional<double> target,
                                   double scale) {
    return equivariant_integral(p, descriptor(h), potential(*p.geometry, target, scale));
  }, py::arg("profile"), py::arg("h"), py::arg("phi_target") = py::none(), py::arg("phi_scale") = 1.0);

  m.def("delta_S", [](const MetricProfile& p, const std::string& f, const std::string& h, std::vector<double> u,
                      std::optional<double> target, double step) {
    const auto phi = potential(*p.geometry, target, 1.0);
    const DeformationPath path{SampledFunction(p.geometry->grid, std::move(u))};
    const auto fd = descriptor(f);
    const auto hd = descriptor(h);
    return std::pair{delta_S_analytic(p, fd, hd, phi, path), delta_S_numeric(p, fd, hd, phi, path, step, false)};
  }, py::arg("profile"), py::arg("f"), py::arg("h"), py::arg("u"), py::arg("phi_target") = py::none(),
        py::arg("step") = 1e-4, "Analytic and central-difference first variation of S along u.");

  m.def("solve_critical", [](const GeometryHandle& g, const std::string& f, const std::string& h,
                             std::optional<double> target, double scale) {
    const auto res = solve_critical(g.ptr, descriptor(f), descriptor(h), potential(*g, target, scale));
    return std::pair{dumped(io::to_json(res)), res.profile};
  }, py::arg("geometry"), py::arg("f"), py::arg("h"), py::arg("phi_target") = py::none(), py::arg("phi_scale") = 1.0);

  m.def("iterate", [](const GeometryHandle& g, const std::string& f, const std::string& h, std::optional<double> target,
                      int max_steps) {
    IterationOptions o;
    o.max_steps = max_steps;
    return dumped(io::to_json(iterate(g.ptr, descriptor(f), descriptor(h), potential(*g, target, 1.0), o)));
  }, py::arg("geometry"), py::arg("f"), py::arg("h"), py::arg("phi_target") = py::none(), py::arg("max_steps") = 5);

  m.def("pin_fubini_study", [](int mm, int nodes) { return dumped(io::to_json(pin_fubini_study(mm, nodes))); },
        py::arg("m"), py::arg("nodes") = SpectralGrid::kDefaultNodes);

  m.def("run_cli", [](std::vector<std::string> args) {
    args.insert(args.begin(), "kahlerlab");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    int code;
    {
      py::gil_scoped_release release;
      code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
  }, py::arg("args"), "Runs the command-line front end in-process; returns (exit_code, stdout, stderr).");
}
