#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mvu/analysis.hpp"
#include "mvu/config.hpp"
#include "mvu/energy.hpp"
#include "mvu/errors.hpp"
#include "mvu/experiments.hpp"
#include "mvu/graph.hpp"
#include "mvu/manifolds.hpp"
#include "mvu/solver.hpp"

namespace py = pybind11;
using namespace mvu;

namespace {

// numpy arrays arrive column-major or strided; copy into the row-major layout
Points to_points(const Eigen::MatrixXd& m) { return Points(m); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Maximum variance unfolding core";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<NumericalFailure>(m, "NumericalFailure", PyExc_ArithmeticError);

  py::class_<ManifoldModel>(m, "Model")
      .def_property_readonly("name", &ManifoldModel::name)
      .def_property_readonly("id", &ManifoldModel::id)
      .def_property_readonly("intrinsic_dim", &ManifoldModel::intrinsic_dim)
      .def_property_readonly("ambient_dim", &ManifoldModel::ambient_dim)
      .def_property_readonly("reach", &ManifoldModel::reach)
      .def_property_readonly("diameter", &ManifoldModel::diameter)
      .def_property_readonly("volume", &ManifoldModel::volume)
      .def_property_readonly("has_isometry", &ManifoldModel::has_isometry)
      .def("contains", [](const ManifoldModel& self, const Eigen::RowVectorXd& x) { return self.contains(x); })
      .def("intrinsic_distance", [](const ManifoldModel& self, const Eigen::RowVectorXd& x,
                                    const Eigen::RowVectorXd& y) { return self.intrinsic_distance(x, y); })
      .def("pairwise_intrinsic",
           [](const ManifoldModel& self, const Eigen::MatrixXd& pts) { return self.pairwise_intrinsic(to_points(pts)); })
      .def("isometry", [](const ManifoldModel& self, const Eigen::MatrixXd& pts) {
        return Eigen::MatrixXd(self.isometry(to_points(pts)));
      })
      .def("__repr__", [](const ManifoldModel& self) { return "<Model " + self.id() + ">"; });

  m.def("make_model", &make_model, py::arg("name"), py::arg("params") = ModelParams{});
  m.def("sample", [](const ManifoldModel& model, std::size_t n, std::uint64_t seed) {
    return Eigen::MatrixXd(sample(model, n, seed).points);
  }, py::arg("model"), py::arg("n"), py::arg("seed"));

  py::class_<Edge>(m, "Edge")
      .def_readonly("i", &Edge::i)
      .def_readonly("j", &Edge::j)
      .def_readonly("length", &Edge::length);
  py::class_<NeighborGraph>(m, "NeighborGraph")
      .def_readonly("n", &NeighborGraph::n)
      .def_readonly("r", &NeighborGraph::r)
      .def_readonly("edges", &NeighborGraph::edges)
      .def_readonly("connected", &NeighborGraph::connected)
      .def_readonly("components", &NeighborGraph::components);
  m.def("build_graph", [](const Eigen::MatrixXd& x, double r) { return build_graph(to_points(x), r); });
  m.def("radius_schedule", &radius_schedule, py::arg("n"), py::arg("d"), py::arg("C"));
  m.def("critical_radius", &critical_radius, py::arg("n"), py::arg("d"), py::arg("alpha") = 1.0);
  m.def("covering_radius", [](const Eigen::MatrixXd& data, const Eigen::MatrixXd& probe) {
    return covering_radius(to_points(data), to_points(probe));
  });

  m.def("energy", [](const Eigen::MatrixXd& y) { return energy(to_points(y)); });

  py::class_<Solution>(m, "Solution")
      .def_property_readonly("y", [](const Solution& s) { return Eigen::MatrixXd(s.embedding.y); })
      .def_property_readonly("energy", [](const Solution& s) { return s.embedding.energy; })
      .def_property_readonly("max_violation", [](const Solution& s) { return s.embedding.max_violation; })
      .def_property_readonly("converged", [](const Solution& s) { return s.embedding.converged; })
      .def_property_readonly("start_energies", [](const Solution& s) { return s.trace.start_energies; })
      .def_property_readonly("trace_csv", [](const Solution& s) { return s.trace.csv(); });
  m.def("solve", [](const Eigen::MatrixXd& x, double r, const std::string& backend, int restarts, int rank,
                    std::uint64_t seed) {
    const Points pts = to_points(x);
    SolverConfig cfg;
    cfg.backend = parse_backend(backend);
    cfg.restarts = restarts;
    cfg.rank_cap = rank;
    cfg.seed = seed;
    py::gil_scoped_release release;
    return solve(pts, build_graph(pts, r), cfg);
  }, py::arg("x"), py::arg("r"), py::arg("backend") = "coordinate", py::arg("restarts") = 3, py::arg("rank") = 0,
     py::arg("seed") = 0);

  m.def("procrustes_residual", [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return procrustes_align(to_points(a), to_points(b)).max_residual;
  });
  m.def("ellipse_F", &ellipse_F, py::arg("a"), py::arg("tol") = 1e-12);
  m.def("solve_b", &solve_b);
  m.def("a_star", []() { return find_a_star().a_star; });

  m.def("run_experiment", [](const std::string& config_text, const std::string& out_dir) {
    const ExperimentConfig cfg = parse_config(config_text);
    ExperimentReport rep;
    {
      py::gil_scoped_release release;
      rep = run_experiment(cfg);
    }
    if (!out_dir.empty()) write_report(rep, out_dir);
    return summary_json(rep);
  }, py::arg("config_text"), py::arg("out_dir") = "");
}
