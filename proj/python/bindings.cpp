#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <memory>
#include <optional>
#include <string>

#include "hybridflow/errors.hpp"
#include "hybridflow/fundamental_diagram.hpp"
#include "hybridflow/occupancy.hpp"
#include "hybridflow/results.hpp"
#include "hybridflow/scenario.hpp"

namespace py = pybind11;
using namespace hybridflow;

namespace {

ConfigOverrides overridesFrom(std::optional<std::int64_t> steps, std::optional<double> dt,
                              std::optional<double> alpha, std::optional<std::string> distributor,
                              std::optional<std::uint64_t> seed,
                              std::optional<std::int64_t> recordEvery,
                              std::optional<double> auditTolerance,
                              std::optional<std::string> nodes) {
  ConfigOverrides o;
  o.steps = steps;
  o.dt = dt;
  o.alpha = alpha;
  o.seed = seed;
  o.recordEvery = recordEvery;
  o.auditTolerance = auditTolerance;
  if (distributor) {
    if (*distributor != "fixed" && *distributor != "dijkstra") {
      throw py::value_error("distributor must be 'fixed' or 'dijkstra'");
    }
    o.distributor = *distributor == "fixed" ? DistributorKind::Fixed : DistributorKind::Dijkstra;
  }
  if (nodes) {
    if (*nodes != "finite" && *nodes != "infinite") {
      throw py::value_error("nodes must be 'finite' or 'infinite'");
    }
    o.finiteNodes = *nodes == "finite";
  }
  return o;
}

py::dict totals(const ResultArchive& a) {
  py::dict d;
  d["initial"] = a.initialPersons;
  d["injected"] = a.injectedPersons;
  d["exited"] = a.exitedPersons;
  d["remaining"] = a.remainingPersons;
  return d;
}

std::vector<double> edgeProfile(const Simulation& sim, const std::string& id) {
  const auto e = sim.network().edgeIndex(id);
  if (!e) throw py::key_error("unknown edge id '" + id + "'");
  const auto& s = sim.state().edges[*e];
  std::vector<double> out;
  for (std::size_t i = s.grid.start; i <= s.grid.end; ++i) out.push_back(s.total(i));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Hybrid pedestrian and car network flow on finite-volume edges.";

  auto base = py::register_exception<SimulationError>(m, "SimulationError", PyExc_RuntimeError);
  py::register_exception<StabilityError>(m, "StabilityError", base.ptr());
  py::register_exception<ScenarioError>(m, "ScenarioError", PyExc_ValueError);
  py::register_exception<ResultsError>(m, "ResultsError", PyExc_OSError);

  m.def(
      "pedestrian_velocity",
      [](double rho, double vff, double gamma, double rhoMax) {
        return pedestrianVelocity(vff, rho, PedestrianParams{vff, 0.26, gamma, rhoMax});
      },
      py::arg("rho"), py::arg("vff") = 1.34, py::arg("gamma") = 1.913, py::arg("rho_max") = 5.4);
  m.def(
      "car_velocity",
      [](double rho, double vff, double k, double n, double rhoMax) {
        return carVelocity(vff, rho, CarParams{vff, 0.0, k, n, rhoMax});
      },
      py::arg("rho"), py::arg("vff") = 15.0, py::arg("k") = 6.83, py::arg("n") = 1.81,
      py::arg("rho_max") = 0.12);
  m.def(
      "partition_classes",
      [](double rho0, double mean, double stddev, std::size_t classes, double truncation) {
        return partitionClasses(
            rho0, VelocityClassPartition::symmetric({mean, stddev}, classes, truncation));
      },
      py::arg("rho0"), py::arg("mean") = 1.34, py::arg("stddev") = 0.26,
      py::arg("classes") = 16, py::arg("truncation") = 3.0,
      "Per-class densities for a total density over equal-width speed classes.");
  m.def(
      "sample_occupancy",
      [](std::size_t count, std::uint64_t seed) {
        const auto dist = OccupancyDistribution::survey();
        Rng rng(seed);
        std::vector<int> out(count);
        for (auto& v : out) v = sampleOccupancy(rng, dist);
        return out;
      },
      py::arg("count"), py::arg("seed") = 0);
  m.def("occupancy_mean", [] { return OccupancyDistribution::survey().mean(); });

  py::class_<ResultArchive>(m, "Result")
      .def_property_readonly("termination",
                             [](const ResultArchive& a) { return std::string(toString(a.termination)); })
      .def_readonly("message", &ResultArchive::message)
      .def_readonly("steps", &ResultArchive::stepsRun)
      .def_property_readonly("totals", &totals)
      .def_property_readonly("max_drift",
                             [](const ResultArchive& a) {
                               double worst = 0.0;
                               for (const auto& r : a.audits) worst = std::max(worst, r.drift);
                               return worst;
                             })
      .def_property_readonly("mean_travel_time",
                             [](const ResultArchive& a) { return meanTravelTime(a); })
      .def("summary_json", &summaryJson)
      .def("audit_csv", &auditCsv)
      .def("densities_csv", &densitiesCsv)
      .def("write", &writeResults, py::arg("out_dir"));

  py::class_<Simulation>(m, "Simulation")
      .def("step", &Simulation::step)
      .def("run", &Simulation::run)
      .def("finished", &Simulation::finished)
      .def_property_readonly("step_count", [](const Simulation& s) { return s.state().step; })
      .def_property_readonly("total_persons",
                             [](const Simulation& s) { return s.audit().totalPersons; })
      .def("edge_density", &edgeProfile, py::arg("edge_id"),
           "Total density in each interior cell of an edge.");

  m.def(
      "load_scenario",
      [](const std::filesystem::path& path, std::optional<std::int64_t> steps,
         std::optional<double> dt, std::optional<double> alpha,
         std::optional<std::string> distributor, std::optional<std::uint64_t> seed,
         std::optional<std::int64_t> recordEvery, std::optional<double> auditTolerance,
         std::optional<std::string> nodes) {
        const auto o = overridesFrom(steps, dt, alpha, distributor, seed, recordEvery,
                                     auditTolerance, nodes);
        return std::make_unique<Simulation>(loadScenario(path, o).makeSimulation());
      },
      py::arg("path"), py::kw_only(), py::arg("steps") = py::none(), py::arg("dt") = py::none(),
      py::arg("alpha") = py::none(), py::arg("distributor") = py::none(),
      py::arg("seed") = py::none(), py::arg("record_every") = py::none(),
      py::arg("audit_tolerance") = py::none(), py::arg("nodes") = py::none(),
      "Validated simulation for a scenario file; keyword values override the file.");
}
