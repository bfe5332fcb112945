// Acceptance run: one PASS/FAIL verdict line per criterion.
//
//   hpfcfv_acceptance [--cache DIR] [--only 1,4,8]
//
// Informational lines are indented and never contain the verdict keywords.

#include "hpfcfv/navier_stokes.hpp"
#include "hpfcfv/postprocess.hpp"
#include "hpfcfv/stokes.hpp"

#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

using namespace hpfcfv;
using namespace hpfcfv::test;

namespace {

constexpr std::uint64_t kDistortionSeed = 2024;
constexpr double kDistortion = 0.3;

void note(const char* fmt, auto... args) {
  std::printf("    ");
  std::printf(fmt, args...);
  std::printf("\n");
  std::fflush(stdout);
}

bool check(bool ok, const std::string& what) {
  note("%-62s %s", what.c_str(), ok ? "ok" : "NOT MET");
  return ok;
}

double rate(const LevelResult& a, const LevelResult& b, double LevelResult::*e) {
  return ConvergenceReport::rate(a.*e, b.*e, a.h, b.h).value_or(std::nan(""));
}

struct Field {
  const char* name;
  double LevelResult::*err;
};

const Field kFields[] = {{"u", &LevelResult::err_u},
                         {"uhat", &LevelResult::err_uhat},
                         {"p", &LevelResult::err_p},
                         {"phat", &LevelResult::err_phat},
                         {"L", &LevelResult::err_L}};

void print_levels(const ConvergenceReport& r) {
  note("%5s %9s %10s %10s %10s %10s %10s %10s %10s %4s", "level", "h", "err_u", "err_uhat", "err_p", "err_phat",
       "err_L", "max|Je|", "|sum Je|", "its");
  for (const LevelResult& l : r.levels) {
    note("%5d %9.3e %10.3e %10.3e %10.3e %10.3e %10.3e %10.3e %10.3e %4d", l.level, l.h, l.err_u, l.err_uhat,
         l.err_p, l.err_phat, l.err_L, l.max_je, std::abs(l.sum_je), l.newton_iterations);
  }
}

bool final_rates(const ConvergenceReport& r, double min_rate, const std::string& label) {
  const auto& lv = r.levels;
  const LevelResult& a = lv[lv.size() - 2];
  const LevelResult& b = lv.back();
  bool ok = true;
  for (const Field& f : kFields) {
    const double q = rate(a, b, f.err);
    std::ostringstream s;
    s.precision(3);
    s << label << " rate " << f.name << " levels " << a.level << "->" << b.level << " = " << q << " >= " << min_rate;
    ok &= check(q >= min_rate, s.str());
  }
  return ok;
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// Criteria 1 and 2 share the synthetic Stokes studies.
struct SyntheticStudies {
  ConvergenceReport regular;
  ConvergenceReport distorted;
};

const SyntheticStudies& synthetic_studies() {
  static const SyntheticStudies s = [] {
    const CaseDefinition c = synthetic_stokes();
    SyntheticStudies out;
    out.regular = convergence_study(c, standard_family(c.name, CellType::Quad), 1, 5, {});
    out.distorted =
        convergence_study(c, standard_family(c.name, CellType::Quad, kDistortion, kDistortionSeed), 1, 5, {});
    return out;
  }();
  return s;
}

bool criterion1() {
  const SyntheticStudies& s = synthetic_studies();
  note("regular quads");
  print_levels(s.regular);
  note("quads with %.0f%% distortion, seed %llu", 100 * kDistortion, static_cast<unsigned long long>(kDistortionSeed));
  print_levels(s.distorted);
  bool ok = final_rates(s.regular, 0.9, "regular");
  ok &= final_rates(s.distorted, 0.9, "distorted");
  double worst = 0.0;
  for (std::size_t i = 0; i < s.regular.levels.size(); ++i)
    for (const Field& f : kFields) worst = std::max(worst, s.distorted.levels[i].*f.err / s.regular.levels[i].*f.err);
  ok &= check(worst <= 2.0, "distorted/regular error ratio " + sci(worst) + " <= 2");
  return ok;
}

bool criterion2() {
  const SyntheticStudies& s = synthetic_studies();
  const double table[] = {0.80e-3, 0.12e-3, 0.14e-4, 0.16e-5, 0.21e-6};
  bool ok = true;
  for (std::size_t i = 0; i < 5; ++i) {
    const double je = s.regular.levels[i].max_je;
    const double factor = std::max(je / table[i], table[i] / je);
    ok &= check(factor <= 3.0, "level " + std::to_string(i + 1) + " max|Je| " + sci(je) + " vs " + sci(table[i]) +
                                   " (factor " + sci(factor) + ") within 3x");
  }
  double worst_sum = 0.0;
  for (const ConvergenceReport* r : {&s.regular, &s.distorted})
    for (const LevelResult& l : r->levels) worst_sum = std::max(worst_sum, std::abs(l.sum_je));
  ok &= check(worst_sum <= 1e-10, "max |sum Je| over all runs " + sci(worst_sum) + " <= 1e-10");
  return ok;
}

bool criterion3() {
  const CaseDefinition c = synthetic_stokes();
  const std::vector<double> taus{1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0};
  const auto rows = tau_p_sweep(c, standard_family(c.name, CellType::Quad), 2, taus, {});
  note("%8s %10s %10s %10s %10s %10s %10s", "tau_p", "err_u", "err_uhat", "err_p", "err_phat", "err_L", "max|Je|");
  for (const auto& r : rows) {
    const LevelResult& l = r.result;
    note("%8.0e %10.4e %10.4e %10.4e %10.4e %10.4e %10.3e", r.tau_p, l.err_u, l.err_uhat, l.err_p, l.err_phat,
         l.err_L, l.max_je);
  }
  bool ok = true;
  for (const Field& f : {kFields[0], kFields[1], kFields[4]}) {
    double lo = 1e300, hi = 0.0;
    for (const auto& r : rows) {
      lo = std::min(lo, r.result.*f.err);
      hi = std::max(hi, r.result.*f.err);
    }
    ok &= check(hi / lo - 1.0 <= 0.10, std::string("variation of err_") + f.name + " " + sci(hi / lo - 1.0) + " <= 0.10");
  }
  bool monotone = true;
  for (std::size_t i = 1; i < rows.size(); ++i) monotone &= rows[i].result.max_je >= rows[i - 1].result.max_je;
  ok &= check(monotone, "max|Je| non-decreasing in tau_p");
  double worst_sum = 0.0;
  for (const auto& r : rows) worst_sum = std::max(worst_sum, std::abs(r.result.sum_je));
  ok &= check(worst_sum <= 1e-10, "max |sum Je| " + sci(worst_sum) + " <= 1e-10");
  return ok;
}

bool criterion4() {
  const CaseDefinition c = synthetic_stokes();
  auto summary = [&](const Mesh& mesh, const std::string& label) {
    const Discretization d(c.tag(mesh), {}, c, false);
    const SparseSystem sys = assemble_stokes(d);
    Stopwatch t;
    const SpectrumSummary s = spectrum(sys.matrix);
    note("%-20s dim %5d nnz %6lld  Re in [%.4e, %.4e]  max|Im| %.3e  complex %.2f%%  (%.1f s)", label.c_str(),
         sys.dimension(), sys.nonzeros(), s.min_real, s.max_real, s.max_abs_imag, 100 * s.complex_fraction,
         t.seconds());
    return std::make_pair(sys, s);
  };
  bool ok = true;
  const auto [sys, s] = summary(generate_structured_quads(16, 16), "quads 16x16");
  ok &= check(sys.dimension() == 1536, "dimension " + std::to_string(sys.dimension()) + " == 1536");
  ok &= check(sys.nonzeros() == 30448, "nonzeros " + std::to_string(sys.nonzeros()) + " == 30448");
  ok &= check(s.max_real < 0.0, "all real parts negative");
  ok &= check(s.max_real >= -3.2e-4 && s.max_real <= -0.8e-4, "max Re " + sci(s.max_real) + " in [-3.2e-4, -0.8e-4]");
  ok &= check(s.complex_fraction < 0.07, "complex share " + sci(s.complex_fraction) + " < 0.07");
  ok &= check(s.max_abs_imag <= 1e-4, "max |Im| " + sci(s.max_abs_imag) + " <= 1e-4");

  const Mesh quads = generate_structured_quads(16, 16);
  const Mesh tris = generate_structured_tris(16, 16);
  const std::pair<Mesh, std::string> others[] = {
      {distort(quads, kDistortion, kDistortionSeed), "distorted quads"},
      {tris, "tris 16x16"},
      {distort(tris, kDistortion, kDistortionSeed), "distorted tris"},
  };
  for (const auto& [mesh, label] : others) {
    const double max_re = summary(mesh, label).second.max_real;
    ok &= check(max_re < 0.0, label + ": all real parts negative");
  }
  return ok;
}

bool criterion5() {
  const CaseDefinition c = couette();
  SolverConfig cfg;
  cfg.riemann = Riemann::HLL;
  cfg.newton_tol = 1e-10;
  cfg.pressure_constraint = PressureConstraint::ZeroMean;
  const ConvergenceReport r = convergence_study(c, standard_family(c.name, CellType::Quad), 1, 4, cfg);
  print_levels(r);
  bool ok = final_rates(r, 0.9, "couette");
  for (const LevelResult& l : r.levels) {
    const auto& res = l.newton_residuals;
    std::ostringstream hist;
    hist.precision(2);
    for (double v : res) hist << ' ' << v;
    note("level %d residuals:%s", l.level, hist.str().c_str());
    const std::size_t n = res.size();
    const double q = n >= 3 ? std::log(res[n - 1] / res[n - 2]) / std::log(res[n - 2] / res[n - 3]) : std::nan("");
    ok &= check(l.converged && q >= 1.7, "level " + std::to_string(l.level) + " final residual-ratio exponent " +
                                             sci(q) + " >= 1.7");
  }
  auto order = [](double v) { return std::log10(v); };
  const double first = r.levels.front().max_je, last = r.levels.back().max_je;
  ok &= check(std::abs(order(first) + 3) < 1.0, "level 1 max|Je| " + sci(first) + " of order 1e-3");
  ok &= check(std::abs(order(last) + 6) < 1.0, "level 4 max|Je| " + sci(last) + " of order 1e-6");
  bool decreasing = true;
  for (std::size_t i = 1; i < r.levels.size(); ++i) decreasing &= r.levels[i].max_je < r.levels[i - 1].max_je;
  ok &= check(decreasing, "max|Je| decreases with refinement");
  return ok;
}

// Cavity helpers.

SolverConfig cavity_config(Riemann rs) {
  SolverConfig cfg;
  cfg.riemann = rs;
  cfg.newton_tol = 1e-10;
  cfg.pressure_constraint = PressureConstraint::ZeroMean;
  return cfg;
}

struct CavityProfiles {
  std::vector<std::pair<double, double>> u1_vertical;
  std::vector<std::pair<double, double>> u2_horizontal;
};

CavityProfiles profiles_of(const LevelSolve& s) {
  CavityProfiles p;
  p.u1_vertical = profile_table(centreline_profiles(s.d.mesh(), s.result.state, Centreline::Vertical), 0);
  p.u2_horizontal = profile_table(centreline_profiles(s.d.mesh(), s.result.state, Centreline::Horizontal), 1);
  return p;
}

LevelSolve cavity_solve(double re, int level, Riemann rs) {
  Stopwatch t;
  LevelSolve s = solve_sequenced(cavity(re), standard_family("cavity", CellType::Tri), level, cavity_config(rs));
  std::string coarse;
  for (const NewtonReport& r : s.coarse) coarse += std::to_string(r.iterations) + "+";
  note("Re %.0f level %d %s: %d unknowns, Newton iterations %s%d, final residual %.2e, %.1f s", re, level,
       std::string(to_string(rs)).c_str(), s.d.dofs().size(), coarse.c_str(), s.result.report.iterations,
       s.result.report.residuals.back(), t.seconds());
  return s;
}

const char* kReferenceHeader = "# cavity Re 1000 graded level 4 hll beta 10 xi 0.05 tau_p 0.1 sequenced";

bool read_reference(const std::filesystem::path& path, CavityProfiles& p) {
  std::ifstream in(path);
  std::string line;
  if (!in || !std::getline(in, line) || line != kReferenceHeader) return false;
  std::getline(in, line);  // column names
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string which;
    double coord = 0.0, value = 0.0;
    if (!(row >> which >> coord >> value)) return false;
    (which == "vertical" ? p.u1_vertical : p.u2_horizontal).emplace_back(coord, value);
  }
  return !p.u1_vertical.empty() && !p.u2_horizontal.empty();
}

void write_reference(const std::filesystem::path& path, const CavityProfiles& p) {
  std::ofstream out(path);
  out.precision(17);
  out << kReferenceHeader << "\nline coord value\n";
  for (const auto& [x, v] : p.u1_vertical) out << "vertical " << x << ' ' << v << '\n';
  for (const auto& [x, v] : p.u2_horizontal) out << "horizontal " << x << ' ' << v << '\n';
}

std::filesystem::path g_cache = "acceptance_cache";

CavityProfiles reference_profiles() {
  std::filesystem::create_directories(g_cache);
  const auto path = g_cache / "cavity_re1000_level4_hll.txt";
  CavityProfiles p;
  if (read_reference(path, p)) {
    note("level-4 reference read from %s", path.string().c_str());
    return p;
  }
  note("computing the level-4 reference (about 10 minutes, cached in %s)", path.string().c_str());
  const LevelSolve s = cavity_solve(1000, 4, Riemann::HLL);
  if (!s.result.report.converged) throw SolverError("level-4 reference did not converge");
  p = profiles_of(s);
  write_reference(path, p);
  return p;
}

std::vector<ProfileSample> samples_of(const LevelSolve& s, Centreline line) {
  return centreline_profiles(s.d.mesh(), s.result.state, line);
}

bool criterion6() {
  const CavityProfiles ref = reference_profiles();
  const auto boxes = cavity_corner_boxes();
  bool ok = true;
  double combined[2] = {0.0, 0.0};
  for (Riemann rs : {Riemann::HLL, Riemann::LF}) {
    const LevelSolve s = cavity_solve(1000, 2, rs);
    const bool converged = s.result.report.converged && s.result.report.residuals.back() <= 1e-10;
    const double e1 = profile_rms(samples_of(s, Centreline::Vertical), 0, ref.u1_vertical, 1.0, boxes);
    const double e2 = profile_rms(samples_of(s, Centreline::Horizontal), 1, ref.u2_horizontal, 1.0, boxes);
    const std::string name(to_string(rs));
    combined[rs == Riemann::HLL ? 0 : 1] = std::sqrt(0.5 * (e1 * e1 + e2 * e2));
    if (rs == Riemann::HLL) {
      ok &= check(converged, "HLL level 2 Newton converged to 1e-10");
      ok &= check(e1 <= 0.05, "HLL u1 on x1 = 0.5: RMS " + sci(e1) + " <= 0.05");
      ok &= check(e2 <= 0.05, "HLL u2 on x2 = 0.5: RMS " + sci(e2) + " <= 0.05");
    } else {
      note("LF level 2: converged %s, RMS u1 %.3e, RMS u2 %.3e", converged ? "yes" : "no", e1, e2);
      ok &= check(converged, "LF level 2 Newton converged to 1e-10");
    }
  }
  ok &= check(combined[0] < combined[1],
              "HLL closer to the reference than LF: " + sci(combined[0]) + " < " + sci(combined[1]));
  return ok;
}

bool criterion7() {
  const LevelSolve s = cavity_solve(3200, 2, Riemann::HLL);
  std::ostringstream hist;
  hist.precision(2);
  for (double v : s.result.report.residuals) hist << ' ' << v;
  note("level 2 residuals:%s", hist.str().c_str());
  note("initial state: level-1 solution transferred to level 2 (mesh sequencing, no pseudo-time terms)");
  return check(s.result.report.converged && s.result.report.residuals.back() <= 1e-10,
               "Re 3200 level 2 HLL Newton converged to 1e-10");
}

bool criterion8() {
  bool ok = true;
  std::mt19937_64 rng(8);

  // (a) condensed against monolithic Newton steps.
  double worst_a = 0.0;
  for (int trial = 0; trial < 8; ++trial) {
    CaseDefinition c = trial % 2 ? dirichlet_case(0.05) : mixed_case(0.05);
    SolverConfig cfg;
    if (trial % 2) cfg.pressure_constraint = PressureConstraint::ZeroMean;
    cfg.riemann = trial % 4 < 2 ? Riemann::HLL : Riemann::LF;
    const Mesh mesh = trial < 4 ? distort(generate_structured_tris(3, 3), 0.3, trial)
                                : distort(generate_structured_quads(3, 3), 0.3, trial);
    const Discretization d(c.tag(mesh), cfg, c, true);
    const SolutionState s = random_state(d, rng);
    const std::vector<double> tau = d.stabilization(s);
    const Eigen::VectorXd mono =
        analytic_jacobian(d, s, tau).partialPivLu().solve(-residual_vector(d, s, tau));
    const Eigen::VectorXd dx = solve_linear(newton_system(d, s, tau));
    const Eigen::VectorXd cond = pack_state(d, apply_increment(d, s, tau, dx)) - pack_state(d, s);
    worst_a = std::max(worst_a, (cond - mono).cwiseAbs().maxCoeff() / std::max(1.0, mono.cwiseAbs().maxCoeff()));
  }
  ok &= check(worst_a <= 1e-10, "(a) condensed vs monolithic step, max rel. diff " + sci(worst_a) + " <= 1e-10");

  // (b) analytic Jacobian against central differences.
  double worst_b = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    CaseDefinition c = trial % 2 ? dirichlet_case(0.1) : mixed_case(0.1);
    SolverConfig cfg;
    if (trial % 2) cfg.pressure_constraint = PressureConstraint::ZeroMean;
    cfg.riemann = trial % 3 ? Riemann::HLL : Riemann::LF;
    const Discretization d(c.tag(distort(generate_structured_tris(3, 3), 0.3, 50 + trial)), cfg, c, true);
    const SolutionState s = random_state(d, rng);
    const Eigen::MatrixXd J = analytic_jacobian(d, s, d.stabilization(s));
    const Eigen::MatrixXd fd = fd_jacobian(d, s, false);
    worst_b = std::max(worst_b, (J - fd).cwiseAbs().maxCoeff() / J.cwiseAbs().maxCoeff());
  }
  ok &= check(worst_b <= 1e-6, "(b) Jacobian vs central differences, 20 states, " + sci(worst_b) + " <= 1e-6");

  // (c) interior flux terms cancel in the assembly.
  {
    const CaseDefinition c = mixed_case(0.1);
    Discretization d(c.tag(distort(generate_structured_quads(3, 3), 0.3, 3)), {}, c, true);
    const SolutionState s = random_state(d, rng, 3.0);
    const std::vector<double> tau = d.stabilization(s);
    const Eigen::VectorXd r0 = residual_vector(d, s, tau);
    const Eigen::MatrixXd k0(newton_system(d, s, tau).matrix);
    d.set_full_interior_flux(true);
    const Eigen::VectorXd r1 = residual_vector(d, s, tau);
    const Eigen::MatrixXd k1(newton_system(d, s, tau).matrix);
    const double diff = std::max((r1 - r0).cwiseAbs().maxCoeff() / r0.cwiseAbs().maxCoeff(),
                                 (k1 - k0).cwiseAbs().maxCoeff() / k0.cwiseAbs().maxCoeff());
    ok &= check(diff <= 1e-12, "(c) flux-cancellation invariance " + sci(diff) + " <= 1e-12");
  }

  // (d) constant states are discrete solutions.
  {
    const Vec2 U(0.0, 0.7);
    const double p0 = 1.3;
    CaseDefinition c = mixed_case(0.05);
    c.source = [](const Vec2&) { return Vec2(Vec2::Zero()); };
    c.dirichlet = [U](const Vec2&) { return U; };
    c.traction = [p0](const Vec2&, const Vec2& n) { return Vec2(-p0 * n); };
    double worst = 0.0;
    for (Riemann rs : {Riemann::HLL, Riemann::LF}) {
      SolverConfig cfg;
      cfg.riemann = rs;
      const Discretization d(c.tag(distort(generate_structured_tris(4, 4), 0.3, 3)), cfg, c, true);
      SolutionState s = SolutionState::zeros(d.mesh());
      std::fill(s.u.begin(), s.u.end(), U);
      std::fill(s.p.begin(), s.p.end(), p0);
      std::fill(s.uhat.begin(), s.uhat.end(), U);
      std::fill(s.phat.begin(), s.phat.end(), p0);
      worst = std::max(worst, residual_vector(d, s, d.stabilization(s)).cwiseAbs().maxCoeff());
    }
    ok &= check(worst <= 1e-12, "(d) constant-state residual " + sci(worst) + " <= 1e-12");
  }

  // (e) closed-form fields satisfy the equations.
  {
    std::mt19937_64 pts(5);
    std::uniform_real_distribution<double> unit(0.01, 0.99), radius(1.01, 1.99), angle(0.0, 6.283185307179586);
    double worst = 0.0;
    const CaseDefinition stokes = synthetic_stokes(), ring = couette();
    for (int i = 0; i < 200; ++i) {
      const PdeResidual a = audit(stokes, Vec2(unit(pts), unit(pts)));
      const double r = radius(pts), t = angle(pts);
      const PdeResidual b = audit(ring, Vec2(r * std::cos(t), r * std::sin(t)));
      worst = std::max({worst, a.mass, a.momentum, a.mixed, b.mass, b.momentum, b.mixed});
    }
    ok &= check(worst <= 1e-6, "(e) exact-solution PDE residual, 200 points per case, " + sci(worst) + " <= 1e-6");
  }
  return ok;
}

struct Criterion {
  int id;
  const char* title;
  bool (*run)();
};

const Criterion kCriteria[] = {
    {1, "synthetic Stokes convergence", criterion1},
    {2, "mass conservation", criterion2},
    {3, "tau_p sensitivity", criterion3},
    {4, "spectrum", criterion4},
    {5, "Couette convergence", criterion5},
    {6, "cavity Re 1000", criterion6},
    {7, "cavity Re 3200", criterion7},
    {8, "oracle equivalences", criterion8},
};

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--cache" && i + 1 < argc) {
      g_cache = argv[++i];
    } else if (arg == "--only" && i + 1 < argc) {
      std::stringstream list(argv[++i]);
      std::string item;
      while (std::getline(list, item, ',')) only.insert(std::stoi(item));
    } else {
      std::cerr << "usage: hpfcfv_acceptance [--cache DIR] [--only 1,2,...]\n";
      return 2;
    }
  }

  int passed = 0, run = 0;
  for (const Criterion& c : kCriteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    ++run;
    std::printf("criterion %d (%s)\n", c.id, c.title);
    std::fflush(stdout);
    Stopwatch t;
    bool ok = false;
    try {
      ok = c.run();
    } catch (const std::exception& e) {
      note("error: %s", e.what());
    }
    note("%.1f s", t.seconds());
    std::printf("criterion %d %s: %s\n", c.id, c.title, ok ? "PASS" : "FAIL");
    std::fflush(stdout);
    passed += ok;
  }
  std::printf("%d of %d criteria met\n", passed, run);
  return passed == run ? 0 : 1;
}
