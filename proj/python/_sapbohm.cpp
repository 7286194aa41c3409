#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "sapbohm/analysis.hpp"
#include "sapbohm/bohm.hpp"
#include "sapbohm/config.hpp"
#include "sapbohm/errors.hpp"
#include "sapbohm/output.hpp"
#include "sapbohm/pipeline.hpp"
#include "sapbohm/potential.hpp"
#include "sapbohm/stationary.hpp"
#include "sapbohm/units.hpp"

namespace py = pybind11;
using namespace sapbohm;

namespace {

template <class T>
py::array_t<T> to_array(const std::vector<T>& v) {
  py::array_t<T> a(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), a.mutable_data());
  return a;
}

Well parse_well(const std::string& s) {
  if (s == "left") return Well::left;
  if (s == "middle") return Well::middle;
  if (s == "right") return Well::right;
  throw ConfigError("well must be left, middle or right");
}

Wavefunction wavefunction(GridPtr grid, py::array_t<cplx, py::array::c_style | py::array::forcecast> values) {
  if (static_cast<std::size_t>(values.size()) != grid->size()) {
    throw ConfigError("wavefunction length does not match the grid");
  }
  Wavefunction psi(grid);
  std::copy_n(values.data(), grid->size(), psi.values.begin());
  return psi;
}

RunConfig config_from(const std::string& json_text, const std::vector<std::string>& overrides) {
  RunConfig cfg = json_text.empty() ? RunConfig{} : RunConfig::from_json(nlohmann::json::parse(json_text));
  for (const auto& o : overrides) cfg.apply_override(o);
  cfg.validate();
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_sapbohm, m) {
  m.doc() = "Triple-well adiabatic transport: GPE propagation and Bohmian trajectories";
  m.attr("units") = units::kDescription;

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<PreparationError>(m, "PreparationError", base.ptr());
  py::register_exception<PropagationError>(m, "PropagationError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
  py::register_exception<TrajectoryError>(m, "TrajectoryError", base.ptr());
  py::register_exception<AnalysisError>(m, "AnalysisError", base.ptr());

  py::class_<Grid, std::shared_ptr<Grid>>(m, "Grid")
      .def_property_readonly("x_min", &Grid::x_min)
      .def_property_readonly("x_max", &Grid::x_max)
      .def_property_readonly("size", &Grid::size)
      .def_property_readonly("dx", &Grid::dx)
      .def_property_readonly("x", [](const Grid& g) { return to_array(g.points()); })
      .def_property_readonly("k", [](const Grid& g) { return to_array(g.wavenumbers()); });
  m.def("make_grid", [](double a, double b, std::size_t n) {
    return std::const_pointer_cast<Grid>(make_grid(a, b, n));
  }, py::arg("x_min") = -12.0, py::arg("x_max") = 12.0, py::arg("n_points") = 2048);

  py::class_<PotentialParams>(m, "PotentialParams")
      .def(py::init<>())
      .def_static("with_pulse", &PotentialParams::with_pulse, py::arg("t_p"),
                  py::arg("t_d_fraction") = 0.15)
      .def_static("bare_trap", &PotentialParams::bare_trap)
      .def_readwrite("v_min", &PotentialParams::v_min)
      .def_readwrite("v_max", &PotentialParams::v_max)
      .def_readwrite("sigma", &PotentialParams::sigma)
      .def_readwrite("x0", &PotentialParams::x0)
      .def_readwrite("t_p", &PotentialParams::t_p)
      .def_readwrite("t_d", &PotentialParams::t_d)
      .def_readwrite("barriers", &PotentialParams::barriers)
      .def("total_time", &PotentialParams::total_time)
      .def("validate", &PotentialParams::validate);

  m.def("barrier_height", &barrier_height, py::arg("t"), py::arg("t_offset"), py::arg("params"));
  m.def("potential", &potential, py::arg("x"), py::arg("t"), py::arg("params"));
  m.def("schedule_snapshot", [](double t, const PotentialParams& p, std::shared_ptr<Grid> g) {
    return to_array(schedule_snapshot(t, p, *g));
  }, py::arg("t"), py::arg("params"), py::arg("grid"));

  m.def("ground_state", [](const PotentialParams& p, std::shared_ptr<Grid> g, const std::string& well,
                           double gnl) {
    const GroundState gs = ground_state(p, g, parse_well(well), gnl);
    py::dict d;
    d["psi"] = to_array(gs.psi.values);
    d["energy"] = gs.energy;
    d["chemical_potential"] = gs.chemical_potential;
    d["steps"] = gs.steps;
    return d;
  }, py::arg("params"), py::arg("grid"), py::arg("well") = "left", py::arg("g") = 0.0);

  m.def("populations", [](std::shared_ptr<Grid> g, py::array_t<cplx> psi, double x0) {
    const auto pops = populations(wavefunction(g, psi), x0);
    return py::make_tuple(pops.left, pops.middle, pops.right);
  }, py::arg("grid"), py::arg("psi"), py::arg("x0"));
  m.def("mean_position", [](std::shared_ptr<Grid> g, py::array_t<cplx> psi) {
    return mean_position(wavefunction(g, psi));
  });
  m.def("current", [](std::shared_ptr<Grid> g, py::array_t<cplx> psi) {
    return to_array(current(wavefunction(g, psi)));
  });

  m.def("eigenstates", [](const PotentialParams& p, double t, std::shared_ptr<Grid> g, std::size_t n) {
    const EigenSolution sol = eigenstates(p, t, g, n);
    py::array_t<double> states({static_cast<py::ssize_t>(n), static_cast<py::ssize_t>(g->size())});
    auto w = states.mutable_unchecked<2>();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < g->size(); ++j) w(i, j) = sol.states[i][j];
    }
    return py::make_tuple(to_array(sol.energies), states);
  }, py::arg("params"), py::arg("t"), py::arg("grid"), py::arg("n") = 4);

  m.def("three_mode", [](const PotentialParams& p, double t, std::shared_ptr<Grid> g) {
    const ThreeModeModel mm = three_mode_extract(eigenstates(p, t, g, 4), p.x0);
    py::dict d;
    d["omega1"] = mm.omega1;
    d["omega2"] = mm.omega2;
    d["theta"] = mm.theta;
    d["dark_state"] = to_array(mm.dark_state());
    return d;
  }, py::arg("params"), py::arg("t"), py::arg("grid"));

  m.def("sample_initial", [](std::shared_ptr<Grid> g, py::array_t<cplx> psi, std::size_t n) {
    return to_array(sample_initial(wavefunction(g, psi), n));
  }, py::arg("grid"), py::arg("psi"), py::arg("n"));

  m.def("fit_powerlaw", [](const std::vector<double>& x, const std::vector<double>& y) {
    const PowerLawFit f = fit_powerlaw(x, y);
    py::dict d;
    d["exponent"] = f.exponent;
    d["amplitude"] = f.amplitude;
    d["r_squared"] = f.r_squared;
    d["residuals"] = f.residuals;
    return d;
  }, py::arg("x"), py::arg("y"));

  m.def("resolve_config", [](const std::string& text, const std::vector<std::string>& overrides) {
    return config_from(text, overrides).to_json().dump();
  }, py::arg("config_json") = "", py::arg("overrides") = std::vector<std::string>{});

  // Returns (summary JSON text, dict of arrays).
  m.def("run_transport", [](const std::string& text, const std::vector<std::string>& overrides) {
    const RunConfig cfg = config_from(text, overrides);
    RunResult r;
    {
      py::gil_scoped_release release;
      r = run_transport(cfg);
    }
    py::dict series;
    std::vector<double> pl, pm, pr;
    for (const auto& p : r.record.populations) {
      pl.push_back(p.left);
      pm.push_back(p.middle);
      pr.push_back(p.right);
    }
    series["t"] = to_array(r.record.times);
    series["P_L"] = to_array(pl);
    series["P_M"] = to_array(pm);
    series["P_R"] = to_array(pr);
    series["mean_position"] = to_array(r.record.mean_positions);
    series["node_t"] = to_array(r.node_track.times);
    series["node_x"] = to_array(r.node_track.positions);
    std::vector<double> ct, cv;
    for (const auto& c : r.first_crossings) {
      ct.push_back(c.time);
      cv.push_back(c.velocity);
    }
    series["crossing_t"] = to_array(ct);
    series["crossing_v"] = to_array(cv);
    return py::make_tuple(output::run_summary(r).dump(), series);
  }, py::arg("config_json") = "", py::arg("overrides") = std::vector<std::string>{});
}
