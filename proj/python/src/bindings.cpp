#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <memory>
#include <string>
#include <vector>

#include "hartree/dynamics.hpp"
#include "hartree/ensemble.hpp"
#include "hartree/error.hpp"
#include "hartree/functionals.hpp"
#include "hartree/inequality_lab.hpp"
#include "hartree/randomization.hpp"
#include "hartree/rng.hpp"
#include "hartree/snapshot_io.hpp"
#include "hartree/spectral.hpp"

namespace py = pybind11;
using namespace hartree;

namespace {

using CArray = py::array_t<Complex, py::array::c_style | py::array::forcecast>;

// Physical samples of shape (n,)*d on the box of side L.
Field to_field(const CArray& a, double L) {
  const int d = static_cast<int>(a.ndim());
  if (d < 1) throw ParameterError("field array must have at least one axis");
  const auto n = a.shape(0);
  for (int k = 1; k < d; ++k) {
    if (a.shape(k) != n) throw ParameterError("field array must have equal axis lengths");
  }
  const Grid g = make_grid(d, static_cast<int>(n), L);
  return Field(g, Rep::physical, std::vector<Complex>(a.data(), a.data() + a.size()));
}

CArray to_array(const Field& f) {
  const Field p = f.to_physical();
  std::vector<py::ssize_t> shape(p.grid().dim(), p.grid().points_per_axis());
  CArray out(shape);
  std::copy(p.data().begin(), p.data().end(), out.mutable_data());
  return out;
}

py::object to_python(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

nlohmann::json from_python(const py::object& o) {
  return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

std::shared_ptr<HartreeKernel> kernel_for(const Field& f, double gamma, const std::string& mode) {
  const KernelMode km = mode == "continuum" ? KernelMode::continuum : KernelMode::sampled;
  if (mode != "sampled" && mode != "continuum") throw ParameterError("kernel_mode must be 'sampled' or 'continuum'");
  return std::make_shared<HartreeKernel>(make_hartree_kernel(f.grid(), gamma, km));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Spectral solver and experiment driver for the energy-critical Hartree equation";

  py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_IOError);
  py::register_exception<BlowUpError>(m, "BlowUpError", PyExc_FloatingPointError);

  m.def("positions", [](int d, int n, double L) {
    const Grid g = make_grid(d, n, L);
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = g.position(i);
    return x;
  }, py::arg("d"), py::arg("n"), py::arg("L"), "Sample positions along one axis.");

  m.def("norm", [](const CArray& u, double L, const std::string& kind, double s) {
    const Field f = to_field(u, L);
    if (kind == "L") return norm(f, Lp{s});
    if (kind == "H") return norm(f, Hs{s});
    if (kind == "Hdot") return norm(f, HsDot{s});
    throw ParameterError("norm kind must be 'L', 'H' or 'Hdot'");
  }, py::arg("u"), py::arg("L"), py::arg("kind"), py::arg("s"),
        "L^p (kind='L'), H^s (kind='H') or homogeneous H^s (kind='Hdot') norm.");

  m.def("mass", [](const CArray& u, double L) { return mass(to_field(u, L)); }, py::arg("u"), py::arg("L"));

  m.def("energy", [](const CArray& u, double L, double gamma, const std::string& kernel_mode) {
    const Field f = to_field(u, L);
    const EnergyParts e = energy(f, *kernel_for(f, gamma, kernel_mode));
    py::dict out;
    out["kinetic"] = e.kinetic;
    out["potential"] = e.potential;
    out["total"] = e.total;
    return out;
  }, py::arg("u"), py::arg("L"), py::arg("gamma") = 4.0, py::arg("kernel_mode") = "sampled");

  m.def("free_propagate", [](const CArray& u, double L, double t) {
    return to_array(free_propagate(to_field(u, L), t));
  }, py::arg("u"), py::arg("L"), py::arg("t"), "e^{itΔ}u.");

  m.def("lp_project", [](const CArray& u, double L, double N, const std::string& band) {
    Band b;
    if (band == "at_most") b = Band::at_most;
    else if (band == "above") b = Band::above;
    else if (band == "exactly") b = Band::exactly;
    else throw ParameterError("band must be 'at_most', 'above' or 'exactly'");
    return to_array(lp_project(to_field(u, L), b, N));
  }, py::arg("u"), py::arg("L"), py::arg("N"), py::arg("band") = "at_most");

  m.def("evolve", [](const CArray& u, double L, double gamma, double dt, double T, std::size_t record_every,
                     const std::string& kernel_mode) {
    const Field f = to_field(u, L);
    SolverConfig c;
    c.dt = dt;
    c.T = T;
    c.record_every = record_every;
    c.kernel = kernel_for(f, gamma, kernel_mode);
    Trajectory tr;
    {
      py::gil_scoped_release release;
      tr = evolve(f, c);
    }
    py::list snaps;
    for (const Field& s : tr.snapshots) snaps.append(to_array(s));
    return py::make_tuple(tr.times, snaps);
  }, py::arg("u"), py::arg("L"), py::arg("gamma") = 4.0, py::arg("dt") = 1e-3, py::arg("T") = 0.1,
        py::arg("record_every") = 10, py::arg("kernel_mode") = "sampled",
        "Strang-split Hartree flow; returns (times, snapshots).");

  m.def("scattering_increments", [](const std::vector<double>& times, const std::vector<CArray>& snaps, double L) {
    Trajectory tr;
    tr.times = times;
    for (const auto& a : snaps) tr.snapshots.push_back(to_field(a, L));
    return scattering_diagnostic(tr);
  }, py::arg("times"), py::arg("snapshots"), py::arg("L"));

  m.def("derive_seed", &derive_seed, py::arg("master"), py::arg("index"));
  m.def("coefficient", &coefficient, py::arg("seed"), py::arg("j"));
  m.def("minimal_a", &RandomizationParams::minimal_a, py::arg("s"));
  m.def("randomize", [](const CArray& u, double L, double s, int a, std::uint64_t seed) {
    const Field f = to_field(u, L);
    const CubeSystem cs = build_cube_system(f.grid(), RandomizationParams::make(s, a));
    return to_array(randomize(f, cs, sample_coefficients(seed, cs.cube_count())));
  }, py::arg("u"), py::arg("L"), py::arg("s"), py::arg("a"), py::arg("seed"),
        "Narrowed Wiener randomization with coefficients from the stream `seed`.");

  m.def("store_field", [](const std::filesystem::path& p, const CArray& u, double L, double t) {
    store_field(p, to_field(u, L), t);
  }, py::arg("path"), py::arg("u"), py::arg("L"), py::arg("t") = 0.0);
  m.def("load_field", [](const std::filesystem::path& p) {
    const Snapshot s = load_field(p);
    return py::make_tuple(to_array(s.field), s.field.grid().length(), s.t);
  }, py::arg("path"), "Returns (array, L, t).");

  m.def("tail_statistics", [](const std::vector<double>& samples, const std::vector<double>& grid) {
    return to_python(tail_statistics(samples, grid).to_json());
  }, py::arg("samples"), py::arg("lambda_grid") = std::vector<double>{});
  m.def("rayleigh_samples", &rayleigh_samples, py::arg("seed"), py::arg("count"));

  m.def("run_check", [](const std::string& name, int d, int n, double L, std::size_t count,
                        const std::string& field_class, std::uint64_t seed) {
    EnsembleSpec s;
    s.d = d;
    s.n = n;
    s.L = L;
    s.count = count;
    s.field_class = parse_field_class(field_class);
    s.seed = seed;
    nlohmann::json j;
    {
      py::gil_scoped_release release;
      j = run_check(name, s).to_json();
    }
    return to_python(j);
  }, py::arg("name"), py::arg("d"), py::arg("n"), py::arg("L") = 2.0 * M_PI, py::arg("count") = 100,
        py::arg("field_class") = "band_limited", py::arg("seed") = 0);
  m.def("check_names", &check_names);

  m.def("run_experiment", [](const py::object& config, const std::filesystem::path& out_dir) {
    const ExperimentConfig c = ExperimentConfig::from_json(from_python(config));
    nlohmann::json summary;
    {
      py::gil_scoped_release release;
      summary = run_experiment(c, out_dir).summary;
    }
    return to_python(summary);
  }, py::arg("config"), py::arg("out_dir"), "Runs an experiment config (dict) and returns summary.json as a dict.");

  m.def("build_report", [](const std::filesystem::path& run_dir) { return to_python(build_report(run_dir)); },
        py::arg("run_dir"));
}
