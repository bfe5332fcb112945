#include "hpfcfv/postprocess.hpp"

#include "hpfcfv/stokes.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>

namespace hpfcfv {

namespace {

double sq(double v) { return v * v; }
double sq(const Vec2& v) { return v.squaredNorm(); }
double sq(const Voigt& v) { return v[0] * v[0] + v[1] * v[1] + 2.0 * v[2] * v[2]; }

L2Error finish_error(double err2, double ref2) {
  if (ref2 > 0.0) return {std::sqrt(err2 / ref2), true};
  return {std::sqrt(err2), false};
}

template <class T, class F>
L2Error cell_error(const Mesh& mesh, const std::vector<T>& v, const F& exact, const std::vector<Box>& excluded) {
  if (static_cast<int>(v.size()) != mesh.n_cells()) throw ConfigError("cell field has the wrong size");
  double err2 = 0.0, ref2 = 0.0;
  int used = 0;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const Vec2& x = mesh.cell_centroid(c);
    if (std::any_of(excluded.begin(), excluded.end(), [&](const Box& b) { return b.contains(x); })) continue;
    const T e = exact(x);
    const T diff = v[c] - e;
    err2 += mesh.cell_area(c) * sq(diff);
    ref2 += mesh.cell_area(c) * sq(e);
    ++used;
  }
  if (used == 0) throw ConfigError("no cells left after masking");
  return finish_error(err2, ref2);
}

template <class T, class F>
L2Error face_error(const Mesh& mesh, const std::vector<T>& v, const F& exact) {
  if (static_cast<int>(v.size()) != mesh.n_faces()) throw ConfigError("face field has the wrong size");
  double err2 = 0.0, ref2 = 0.0;
  for (int f = 0; f < mesh.n_faces(); ++f) {
    const Face& face = mesh.face(f);
    const T e = exact(face.barycentre);
    const T diff = v[f] - e;
    err2 += face.measure * sq(diff);
    ref2 += face.measure * sq(e);
  }
  return finish_error(err2, ref2);
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

}  // namespace

L2Error l2_error_cells(const Mesh& mesh, const std::vector<double>& v, const ScalarField& exact) {
  return cell_error(mesh, v, exact, {});
}
L2Error l2_error_cells(const Mesh& mesh, const std::vector<Vec2>& v, const VectorField& exact) {
  return cell_error(mesh, v, exact, {});
}
L2Error l2_error_cells(const Mesh& mesh, const std::vector<Voigt>& v, const TensorField& exact) {
  return cell_error(mesh, v, exact, {});
}
L2Error l2_error_faces(const Mesh& mesh, const std::vector<double>& v, const ScalarField& exact) {
  return face_error(mesh, v, exact);
}
L2Error l2_error_faces(const Mesh& mesh, const std::vector<Vec2>& v, const VectorField& exact) {
  return face_error(mesh, v, exact);
}

std::vector<Box> cavity_corner_boxes() { return {{0.0, 0.05, 0.95, 1.0}, {0.95, 1.0, 0.95, 1.0}}; }

L2Error masked_l2_error(const Mesh& mesh, const std::vector<Vec2>& v, const VectorField& reference,
                        const std::vector<Box>& excluded) {
  return cell_error(mesh, v, reference, excluded);
}

double pressure_shift(const Mesh& mesh, const std::vector<double>& p, const ScalarField& exact) {
  double num = 0.0, area = 0.0;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    num += mesh.cell_area(c) * (exact(mesh.cell_centroid(c)) - p[c]);
    area += mesh.cell_area(c);
  }
  return num / area;
}

MassFlux cell_mass_flux(const Discretization& d, const SolutionState& s) {
  const Mesh& mesh = d.mesh();
  MassFlux m;
  m.per_cell.assign(mesh.n_cells(), 0.0);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const auto faces = mesh.cell_faces(c);
    double j = 0.0;
    for (int k = 0; k < static_cast<int>(faces.size()); ++k)
      j += mesh.face(faces[k]).measure * d.face_velocity(faces[k], s).dot(mesh.outward_normal(c, k));
    m.per_cell[c] = j;
    m.max_abs = std::max(m.max_abs, std::abs(j));
    m.sum += j;
  }
  return m;
}

CellLocator::CellLocator(const Mesh& mesh) : mesh_(&mesh) {
  lo_ = hi_ = mesh.node(0);
  for (const Vec2& p : mesh.nodes()) {
    lo_ = lo_.cwiseMin(p);
    hi_ = hi_.cwiseMax(p);
  }
  const int side = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(mesh.n_cells()))));
  nx_ = ny_ = side;
  buckets_.assign(static_cast<std::size_t>(nx_) * ny_, {});
  const Vec2 span = (hi_ - lo_).cwiseMax(Vec2::Constant(1e-300));
  auto index = [&](double v, double lo, double w, int n) {
    return std::clamp(static_cast<int>((v - lo) / w * n), 0, n - 1);
  };
  for (int c = 0; c < mesh.n_cells(); ++c) {
    Vec2 a = mesh.node(mesh.cell_nodes(c)[0]), b = a;
    for (int v : mesh.cell_nodes(c)) {
      a = a.cwiseMin(mesh.node(v));
      b = b.cwiseMax(mesh.node(v));
    }
    const int i0 = index(a.x(), lo_.x(), span.x(), nx_), i1 = index(b.x(), lo_.x(), span.x(), nx_);
    const int j0 = index(a.y(), lo_.y(), span.y(), ny_), j1 = index(b.y(), lo_.y(), span.y(), ny_);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) buckets_[j * nx_ + i].push_back(c);
  }
}

int CellLocator::find(const Vec2& x) const {
  constexpr double tol = 1e-12;
  if (x.x() < lo_.x() - tol || x.y() < lo_.y() - tol || x.x() > hi_.x() + tol || x.y() > hi_.y() + tol) return -1;
  const Vec2 span = (hi_ - lo_).cwiseMax(Vec2::Constant(1e-300));
  const int i = std::clamp(static_cast<int>((x.x() - lo_.x()) / span.x() * nx_), 0, nx_ - 1);
  const int j = std::clamp(static_cast<int>((x.y() - lo_.y()) / span.y() * ny_), 0, ny_ - 1);
  for (int c : buckets_[j * nx_ + i]) {
    const auto nodes = mesh_->cell_nodes(c);
    const int k = static_cast<int>(nodes.size());
    bool inside = true;
    for (int a = 0; a < k && inside; ++a) {
      const Vec2& p = mesh_->node(nodes[a]);
      const Vec2& q = mesh_->node(nodes[(a + 1) % k]);
      const Vec2 e = q - p, r = x - p;
      inside = e.x() * r.y() - e.y() * r.x() >= -tol * e.norm();
    }
    if (inside) return c;
  }
  return -1;
}

VectorField piecewise_velocity(const Mesh& mesh, const SolutionState& s) {
  auto locator = std::make_shared<CellLocator>(mesh);
  auto u = std::make_shared<std::vector<Vec2>>(s.u);
  return [locator, u](const Vec2& x) {
    const int c = locator->find(x);
    if (c < 0) return Vec2(Vec2::Constant(std::numeric_limits<double>::quiet_NaN()));
    return (*u)[c];
  };
}

std::optional<double> ConvergenceReport::rate(double e0, double e1, double h0, double h1) {
  if (!(e0 > 0.0) || !(e1 > 0.0) || !(h0 > 0.0) || !(h1 > 0.0) || h0 == h1) return std::nullopt;
  return std::log(e0 / e1) / std::log(h0 / h1);
}

NewtonResult solve_case(const Discretization& d, const SolveOptions& options) {
  if (!d.convection()) {
    NewtonResult r;
    const auto start = std::chrono::steady_clock::now();
    try {
      r.state = solve_stokes(d);
      r.report.converged = true;
      r.report.iterations = 1;
    } catch (const LinearSolveError& e) {
      r.state = SolutionState::zeros(d.mesh());
      r.report.failure = std::string("linear solve failed: ") + e.what();
    }
    r.report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
  }
  if (options.start) return newton_solve(d, *options.start);
  const InitialGuess strategy = options.initial.value_or(default_initial_guess(d.config()));
  return newton_solve(d, initial_guess(d, strategy));
}

SolutionState transfer_state(const Mesh& from, const SolutionState& s, const Mesh& to) {
  if (!s.matches(from)) throw ConfigError("transfer_state: state does not match the source mesh");
  const CellLocator locator(from);
  SolutionState out = SolutionState::zeros(to);
  for (int c = 0; c < to.n_cells(); ++c) {
    const Vec2& x = to.cell_centroid(c);
    int k = locator.find(x);
    if (k < 0) {
      double best = std::numeric_limits<double>::infinity();
      for (int e = 0; e < from.n_cells(); ++e) {
        const double dist = (from.cell_centroid(e) - x).squaredNorm();
        if (dist < best) best = dist, k = e;
      }
    }
    out.L[c] = s.L[k];
    out.u[c] = s.u[k];
    out.p[c] = s.p[k];
  }
  for (int f = 0; f < to.n_faces(); ++f) {
    const Face& face = to.face(f);
    out.uhat[f] = out.u[face.owner];
    out.phat[f] = out.p[face.owner];
    if (face.neighbour >= 0) {
      out.uhat[f] = 0.5 * (out.uhat[f] + out.u[face.neighbour]);
      out.phat[f] = 0.5 * (out.phat[f] + out.p[face.neighbour]);
    }
  }
  return out;
}

LevelSolve solve_sequenced(const CaseDefinition& kase, const MeshFamily& family, int level, const SolverConfig& cfg) {
  if (level < 1) throw ConfigError("sequenced solve needs level >= 1");
  std::vector<NewtonReport> coarse;
  std::optional<Discretization> prev;
  NewtonResult res;
  for (int l = 1; l <= level; ++l) {
    Discretization d(kase.tag(family(l)), cfg, kase, kase.convection);
    SolveOptions options;
    if (prev) options.start = transfer_state(prev->mesh(), res.state, d.mesh());
    res = solve_case(d, options);
    if (!res.report.converged) throw SolverError("level " + std::to_string(l) + ": " + res.report.failure);
    if (l < level) coarse.push_back(res.report);
    prev.emplace(std::move(d));
  }
  return {std::move(*prev), std::move(res), std::move(coarse)};
}

LevelResult evaluate_level(const Discretization& d, const CaseDefinition& kase, const NewtonResult& result,
                           int level) {
  const Mesh& mesh = d.mesh();
  const SolutionState& s = result.state;
  LevelResult r;
  r.level = level;
  r.h = mesh.characteristic_size();
  r.cells = mesh.n_cells();
  r.unknowns = d.dofs().size();
  r.newton_iterations = result.report.iterations;
  r.newton_residuals = result.report.residuals;
  r.converged = result.report.converged;
  r.seconds = result.report.wall_seconds;
  const MassFlux flux = cell_mass_flux(d, s);
  r.max_je = flux.max_abs;
  r.sum_je = flux.sum;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  r.err_u = r.err_uhat = r.err_p = r.err_phat = r.err_L = nan;
  if (!kase.has_exact()) return r;
  r.err_u = l2_error_cells(mesh, s.u, kase.exact_velocity).value;
  r.err_uhat = l2_error_faces(mesh, s.uhat, kase.exact_velocity).value;
  r.err_L = l2_error_cells(mesh, s.L, kase.exact_L).value;
  std::vector<double> p = s.p, phat = s.phat;
  if (mesh.pure_dirichlet()) {
    const double shift = pressure_shift(mesh, p, kase.exact_pressure);
    for (double& v : p) v += shift;
    for (double& v : phat) v += shift;
  }
  r.err_p = l2_error_cells(mesh, p, kase.exact_pressure).value;
  r.err_phat = l2_error_faces(mesh, phat, kase.exact_pressure).value;
  return r;
}

MeshFamily standard_family(const std::string& case_name, CellType type, double distortion, std::uint64_t seed) {
  return [=](int level) {
    Mesh m = family_mesh(case_name, level, type);
    return distortion > 0.0 ? distort(m, distortion, seed) : m;
  };
}

ConvergenceReport convergence_study(const CaseDefinition& kase, const MeshFamily& family, int first, int last,
                                    const SolverConfig& cfg, const SolveOptions& options) {
  if (last < first) throw ConfigError("convergence study needs first <= last");
  ConvergenceReport report;
  report.case_name = kase.name;
  std::optional<Discretization> prev;
  NewtonResult res;
  for (int level = first; level <= last; ++level) {
    Discretization d(kase.tag(family(level)), cfg, kase, kase.convection);
    SolveOptions opts = options;
    if (options.sequenced && prev) opts.start = transfer_state(prev->mesh(), res.state, d.mesh());
    res = solve_case(d, opts);
    if (!res.report.converged) {
      throw SolverError("level " + std::to_string(level) + ": " + res.report.failure);
    }
    report.levels.push_back(evaluate_level(d, kase, res, level));
    prev.emplace(std::move(d));
  }
  return report;
}

std::vector<TauPSweepRow> tau_p_sweep(const CaseDefinition& kase, const MeshFamily& family, int level,
                                      const std::vector<double>& tau_p_values, const SolverConfig& cfg) {
  const Mesh mesh = kase.tag(family(level));
  std::vector<TauPSweepRow> rows;
  for (double tp : tau_p_values) {
    SolverConfig c = cfg;
    c.tau_p = tp;
    const Discretization d(mesh, c, kase, kase.convection);
    const NewtonResult res = solve_case(d);
    if (!res.report.converged) throw SolverError("tau_p = " + fmt(tp) + ": " + res.report.failure);
    rows.push_back({tp, evaluate_level(d, kase, res, level)});
  }
  return rows;
}

std::vector<ProfileSample> centreline_profiles(const Mesh& mesh, const SolutionState& s, Centreline line) {
  const int axis = line == Centreline::Vertical ? 0 : 1;
  double best = std::numeric_limits<double>::infinity();
  for (int c = 0; c < mesh.n_cells(); ++c) best = std::min(best, std::abs(mesh.cell_centroid(c)[axis] - 0.5));
  const double cutoff = best * (1.0 + 1e-6) + 1e-12;
  std::vector<ProfileSample> out;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const Vec2& x = mesh.cell_centroid(c);
    if (std::abs(x[axis] - 0.5) > cutoff) continue;
    out.push_back({x[1 - axis], x, s.u[c], s.p[c]});
  }
  std::sort(out.begin(), out.end(), [](const ProfileSample& a, const ProfileSample& b) {
    return a.coord != b.coord ? a.coord < b.coord : a.point[0] + a.point[1] < b.point[0] + b.point[1];
  });
  return out;
}

double interpolate(const std::vector<std::pair<double, double>>& table, double x) {
  if (table.empty()) throw ConfigError("interpolation in an empty table");
  if (x <= table.front().first) return table.front().second;
  if (x >= table.back().first) return table.back().second;
  const auto it = std::lower_bound(table.begin(), table.end(), x,
                                   [](const std::pair<double, double>& e, double v) { return e.first < v; });
  const auto& [x1, y1] = *it;
  const auto& [x0, y0] = *(it - 1);
  if (x1 == x0) return y1;
  return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
}

double profile_rms(const std::vector<ProfileSample>& samples, int comp,
                   const std::vector<std::pair<double, double>>& reference, double reference_speed,
                   const std::vector<Box>& excluded) {
  double sum = 0.0;
  int n = 0;
  for (const auto& smp : samples) {
    if (std::any_of(excluded.begin(), excluded.end(), [&](const Box& b) { return b.contains(smp.point); })) continue;
    sum += sq(smp.u[comp] - interpolate(reference, smp.coord));
    ++n;
  }
  if (n == 0) throw ConfigError("no profile samples left after masking");
  return std::sqrt(sum / n) / reference_speed;
}

std::vector<std::pair<double, double>> profile_table(const std::vector<ProfileSample>& samples, int comp) {
  std::vector<std::pair<double, double>> t;
  t.reserve(samples.size());
  for (const auto& s : samples) t.emplace_back(s.coord, s.u[comp]);
  return t;
}

void write_vtk(std::ostream& out, const Mesh& mesh, const SolutionState& s) {
  std::ostringstream o;
  o.precision(17);
  o << "# vtk DataFile Version 3.0\nhpfcfv solution\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  o << "POINTS " << mesh.n_nodes() << " double\n";
  for (const Vec2& p : mesh.nodes()) o << p.x() << ' ' << p.y() << " 0\n";
  const int k = mesh.nodes_per_cell();
  o << "CELLS " << mesh.n_cells() << ' ' << mesh.n_cells() * (k + 1) << '\n';
  for (int c = 0; c < mesh.n_cells(); ++c) {
    o << k;
    for (int v : mesh.cell_nodes(c)) o << ' ' << v;
    o << '\n';
  }
  o << "CELL_TYPES " << mesh.n_cells() << '\n';
  for (int c = 0; c < mesh.n_cells(); ++c) o << (k == 4 ? 9 : 5) << '\n';
  o << "CELL_DATA " << mesh.n_cells() << '\n';
  o << "VECTORS u double\n";
  for (const Vec2& u : s.u) o << u.x() << ' ' << u.y() << " 0\n";
  o << "SCALARS p double 1\nLOOKUP_TABLE default\n";
  for (double p : s.p) o << p << '\n';
  o << "SCALARS L_V double 3\nLOOKUP_TABLE default\n";
  for (const Voigt& L : s.L) o << L[0] << ' ' << L[1] << ' ' << L[2] << '\n';
  out << o.str();
}

void write_convergence_csv(std::ostream& out, const ConvergenceReport& report) {
  std::ostringstream o;
  o.precision(17);
  o << "level,h,err_u,err_uhat,err_p,err_phat,err_L,rate_u,rate_p,rate_L,maxJe,sumJe\n";
  const auto& lv = report.levels;
  for (std::size_t i = 0; i < lv.size(); ++i) {
    const LevelResult& r = lv[i];
    auto rate = [&](double LevelResult::*e) -> std::string {
      if (i == 0) return "";
      const auto v = ConvergenceReport::rate(lv[i - 1].*e, r.*e, lv[i - 1].h, r.h);
      return v ? fmt(*v) : "";
    };
    o << r.level << ',' << r.h << ',' << r.err_u << ',' << r.err_uhat << ',' << r.err_p << ',' << r.err_phat << ','
      << r.err_L << ',' << rate(&LevelResult::err_u) << ',' << rate(&LevelResult::err_p) << ','
      << rate(&LevelResult::err_L) << ',' << r.max_je << ',' << r.sum_je << '\n';
  }
  out << o.str();
}

void write_sweep_csv(std::ostream& out, const std::vector<TauPSweepRow>& rows) {
  std::ostringstream o;
  o.precision(17);
  o << "tau_p,h,err_u,err_uhat,err_p,err_phat,err_L,maxJe,sumJe\n";
  for (const auto& row : rows) {
    const LevelResult& r = row.result;
    o << row.tau_p << ',' << r.h << ',' << r.err_u << ',' << r.err_uhat << ',' << r.err_p << ',' << r.err_phat << ','
      << r.err_L << ',' << r.max_je << ',' << r.sum_je << '\n';
  }
  out << o.str();
}

void write_profile_csv(std::ostream& out, const std::vector<ProfileSample>& samples) {
  std::ostringstream o;
  o.precision(17);
  o << "coord,u1,u2,p\n";
  for (const auto& s : samples) o << s.coord << ',' << s.u.x() << ',' << s.u.y() << ',' << s.p << '\n';
  out << o.str();
}

void write_file(const std::string& path, const std::function<void(std::ostream&)>& writer) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  writer(out);
  out.flush();
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace hpfcfv
