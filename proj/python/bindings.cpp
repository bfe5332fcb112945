#include "hpfcfv/cases.hpp"
#include "hpfcfv/navier_stokes.hpp"
#include "hpfcfv/newton.hpp"
#include "hpfcfv/postprocess.hpp"
#include "hpfcfv/stokes.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace hpfcfv;

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <int N, class V>
RowMatrix rows_of(const std::vector<V>& v) {
  RowMatrix m(v.size(), N);
  for (std::size_t i = 0; i < v.size(); ++i) m.row(i) = v[i].transpose();
  return m;
}

template <int N, class V>
std::vector<V> vectors_of(const RowMatrix& m) {
  if (m.cols() != N) throw py::value_error("expected " + std::to_string(N) + " columns");
  std::vector<V> v(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) v[i] = m.row(i).transpose();
  return v;
}

py::dict report_dict(const NewtonReport& r) {
  py::dict d;
  d["iterations"] = r.iterations;
  d["residuals"] = r.residuals;
  d["steps"] = r.steps;
  d["converged"] = r.converged;
  d["failure"] = r.failure;
  d["seconds"] = r.wall_seconds;
  return d;
}

py::dict level_dict(const LevelResult& l) {
  py::dict d;
  d["level"] = l.level;
  d["h"] = l.h;
  d["cells"] = l.cells;
  d["unknowns"] = l.unknowns;
  d["err_u"] = l.err_u;
  d["err_uhat"] = l.err_uhat;
  d["err_p"] = l.err_p;
  d["err_phat"] = l.err_phat;
  d["err_L"] = l.err_L;
  d["newton_iterations"] = l.newton_iterations;
  d["converged"] = l.converged;
  d["newton_residuals"] = l.newton_residuals;
  d["max_je"] = l.max_je;
  d["sum_je"] = l.sum_je;
  return d;
}

py::tuple triplets(const SparseMatrix& a) {
  std::vector<int> rows, cols;
  std::vector<double> vals;
  rows.reserve(a.nonZeros());
  cols.reserve(a.nonZeros());
  vals.reserve(a.nonZeros());
  for (int k = 0; k < a.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) {
      rows.push_back(it.row());
      cols.push_back(it.col());
      vals.push_back(it.value());
    }
  return py::make_tuple(py::array(py::cast(vals)), py::array(py::cast(rows)), py::array(py::cast(cols)),
                        py::make_tuple(a.rows(), a.cols()));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Hybrid-pressure face-centred finite volumes for 2D Stokes and Navier-Stokes";

  py::register_exception<MeshError>(m, "MeshError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);
  py::register_exception<LinearSolveError>(m, "LinearSolveError", PyExc_RuntimeError);

  py::enum_<CellType>(m, "CellType").value("Quad", CellType::Quad).value("Tri", CellType::Tri);
  py::enum_<Riemann>(m, "Riemann").value("LF", Riemann::LF).value("HLL", Riemann::HLL);
  py::enum_<PressureConstraint>(m, "PressureConstraint")
      .value("None_", PressureConstraint::None)
      .value("ZeroMean", PressureConstraint::ZeroMean);
  py::enum_<Linearization>(m, "Linearization")
      .value("Lagged", Linearization::Lagged)
      .value("Exact", Linearization::Exact);
  py::enum_<Centreline>(m, "Centreline")
      .value("Vertical", Centreline::Vertical)
      .value("Horizontal", Centreline::Horizontal);

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_readwrite("nu", &SolverConfig::nu)
      .def_readwrite("beta", &SolverConfig::beta)
      .def_readwrite("xi", &SolverConfig::xi)
      .def_readwrite("tau_p", &SolverConfig::tau_p)
      .def_readwrite("riemann", &SolverConfig::riemann)
      .def_readwrite("newton_tol", &SolverConfig::newton_tol)
      .def_readwrite("newton_max_iter", &SolverConfig::newton_max_iter)
      .def_readwrite("pressure_constraint", &SolverConfig::pressure_constraint)
      .def_readwrite("linearization", &SolverConfig::linearization)
      .def_readwrite("line_search", &SolverConfig::line_search)
      .def("validate", &SolverConfig::validate);

  m.def("tau_convective", &tau_convective, py::arg("config"), py::arg("w"), py::arg("n"));

  py::class_<Mesh>(m, "Mesh")
      .def_property_readonly("cell_type", &Mesh::cell_type)
      .def_property_readonly("n_nodes", &Mesh::n_nodes)
      .def_property_readonly("n_cells", &Mesh::n_cells)
      .def_property_readonly("n_faces", &Mesh::n_faces)
      .def_property_readonly("n_boundary_faces", &Mesh::n_boundary_faces)
      .def_property_readonly("nodes", [](const Mesh& mesh) { return rows_of<2>(mesh.nodes()); })
      .def_property_readonly("cells",
                             [](const Mesh& mesh) {
                               const auto& t = mesh.cell_node_table();
                               py::array_t<int> a({mesh.n_cells(), mesh.nodes_per_cell()});
                               std::copy(t.begin(), t.end(), a.mutable_data());
                               return a;
                             })
      .def_property_readonly("areas",
                             [](const Mesh& mesh) {
                               Eigen::VectorXd a(mesh.n_cells());
                               for (int c = 0; c < mesh.n_cells(); ++c) a[c] = mesh.cell_area(c);
                               return a;
                             })
      .def_property_readonly("centroids",
                             [](const Mesh& mesh) {
                               RowMatrix x(mesh.n_cells(), 2);
                               for (int c = 0; c < mesh.n_cells(); ++c) x.row(c) = mesh.cell_centroid(c).transpose();
                               return x;
                             })
      .def("characteristic_size", &Mesh::characteristic_size);

  m.def("structured_quads", [](int nx, int ny) { return generate_structured_quads(nx, ny); }, py::arg("nx"),
        py::arg("ny"));
  m.def("structured_tris", [](int nx, int ny) { return generate_structured_tris(nx, ny); }, py::arg("nx"),
        py::arg("ny"));
  m.def("annulus", &generate_annulus, py::arg("n_theta"), py::arg("n_r"), py::arg("inner_radius"),
        py::arg("outer_radius"), py::arg("cell_type"));
  m.def("distort", &distort, py::arg("mesh"), py::arg("factor"), py::arg("seed"));
  m.def("family_mesh", &family_mesh, py::arg("case_name"), py::arg("level"), py::arg("cell_type"));
  m.def("graded_cavity_mesh", &graded_cavity_mesh, py::arg("level"));

  py::class_<CaseDefinition>(m, "Case")
      .def_readonly("name", &CaseDefinition::name)
      .def_readonly("nu", &CaseDefinition::nu)
      .def_readonly("convection", &CaseDefinition::convection)
      .def_property_readonly("has_exact", &CaseDefinition::has_exact)
      .def("exact_velocity", [](const CaseDefinition& c, const Vec2& x) { return Vec2(c.exact_velocity(x)); })
      .def("exact_pressure", [](const CaseDefinition& c, const Vec2& x) { return c.exact_pressure(x); });
  m.def("synthetic_stokes", &synthetic_stokes);
  m.def("couette", &couette, py::arg("inner_radius") = 1.0, py::arg("outer_radius") = 2.0,
        py::arg("omega_inner") = 0.0, py::arg("omega_outer") = 0.5);
  m.def("cavity", &cavity, py::arg("reynolds"));
  m.def("case_by_name", &case_by_name, py::arg("name"), py::arg("reynolds") = 1000.0);

  py::class_<SolutionState>(m, "SolutionState")
      .def_static("zeros", &SolutionState::zeros)
      .def_property(
          "u", [](const SolutionState& s) { return rows_of<2>(s.u); },
          [](SolutionState& s, const RowMatrix& v) { s.u = vectors_of<2, Vec2>(v); })
      .def_property(
          "L", [](const SolutionState& s) { return rows_of<3>(s.L); },
          [](SolutionState& s, const RowMatrix& v) { s.L = vectors_of<3, Voigt>(v); })
      .def_property(
          "uhat", [](const SolutionState& s) { return rows_of<2>(s.uhat); },
          [](SolutionState& s, const RowMatrix& v) { s.uhat = vectors_of<2, Vec2>(v); })
      .def_readwrite("p", &SolutionState::p)
      .def_readwrite("phat", &SolutionState::phat)
      .def_readwrite("lagrange", &SolutionState::lambda);

  py::class_<Discretization>(m, "Discretization")
      .def(py::init([](const CaseDefinition& kase, const Mesh& mesh, const SolverConfig& cfg,
                       std::optional<bool> convection) {
             return Discretization(kase.tag(mesh), cfg, kase, convection.value_or(kase.convection));
           }),
           py::arg("case"), py::arg("mesh"), py::arg("config") = SolverConfig{}, py::arg("convection") = py::none())
      .def_property_readonly("mesh", &Discretization::mesh)
      .def_property_readonly("config", &Discretization::config)
      .def_property_readonly("n_unknowns", [](const Discretization& d) { return d.dofs().size(); })
      .def("residual",
           [](const Discretization& d, const SolutionState& s) { return residual_vector(d, s, d.stabilization(s)); });

  m.def(
      "solve",
      [](const Discretization& d) {
        const NewtonResult r = solve_case(d);
        return py::make_tuple(r.state, report_dict(r.report));
      },
      py::arg("discretization"), "Solves the case: Stokes directly, Navier-Stokes by Newton.");
  m.def(
      "stokes_matrix", [](const Discretization& d) { return triplets(assemble_stokes(d).matrix); },
      py::arg("discretization"), "Condensed Stokes matrix as (values, rows, cols, shape).");
  m.def(
      "spectrum",
      [](const Discretization& d) {
        const SpectrumSummary s = spectrum(assemble_stokes(d).matrix);
        return py::array(py::cast(s.eigenvalues));
      },
      py::arg("discretization"));
  m.def(
      "mass_flux", [](const Discretization& d, const SolutionState& s) { return cell_mass_flux(d, s).per_cell; },
      py::arg("discretization"), py::arg("state"));

  m.def(
      "convergence_study",
      [](const std::string& case_name, CellType type, int first, int last, const SolverConfig& cfg,
         double distortion, std::uint64_t seed) {
        const CaseDefinition kase = case_by_name(case_name);
        const ConvergenceReport r =
            convergence_study(kase, standard_family(case_name, type, distortion, seed), first, last, cfg);
        py::list rows;
        for (const LevelResult& l : r.levels) rows.append(level_dict(l));
        return rows;
      },
      py::arg("case_name"), py::arg("cell_type") = CellType::Quad, py::arg("first") = 1, py::arg("last") = 3,
      py::arg("config") = SolverConfig{}, py::arg("distortion") = 0.0, py::arg("seed") = 0);

  m.def(
      "tau_p_sweep",
      [](const std::string& case_name, CellType type, int level, const std::vector<double>& taus,
         const SolverConfig& cfg) {
        const CaseDefinition kase = case_by_name(case_name);
        py::list rows;
        for (const TauPSweepRow& r : tau_p_sweep(kase, standard_family(case_name, type), level, taus, cfg)) {
          py::dict d = level_dict(r.result);
          d["tau_p"] = r.tau_p;
          rows.append(d);
        }
        return rows;
      },
      py::arg("case_name"), py::arg("cell_type"), py::arg("level"), py::arg("tau_p_values"),
      py::arg("config") = SolverConfig{});

  m.def(
      "centreline",
      [](const Mesh& mesh, const SolutionState& s, Centreline line) {
        const auto samples = centreline_profiles(mesh, s, line);
        RowMatrix out(samples.size(), 4);
        for (std::size_t i = 0; i < samples.size(); ++i)
          out.row(i) << samples[i].coord, samples[i].u.x(), samples[i].u.y(), samples[i].p;
        return out;
      },
      py::arg("mesh"), py::arg("state"), py::arg("line"), "Rows of (coordinate, u1, u2, p).");
}
