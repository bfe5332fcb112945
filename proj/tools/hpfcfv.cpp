#include "hpfcfv/cases.hpp"
#include "hpfcfv/newton.hpp"
#include "hpfcfv/postprocess.hpp"
#include "hpfcfv/stokes.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace hpfcfv;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSolver = 1;
constexpr int kExitUsage = 2;

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

std::string joined_argv(int argc, char** argv) {
  std::string out;
  for (int i = 0; i < argc; ++i) {
    if (i) out += ' ';
    out += argv[i];
  }
  return out;
}

json config_json(const SolverConfig& cfg) {
  return {{"nu", cfg.nu},
          {"beta", cfg.beta},
          {"xi", cfg.xi},
          {"tau_p", cfg.tau_p},
          {"riemann", std::string(to_string(cfg.riemann))},
          {"newton_tol", cfg.newton_tol},
          {"newton_max_iter", cfg.newton_max_iter},
          {"pressure_constraint", std::string(to_string(cfg.pressure_constraint))},
          {"linearization", std::string(to_string(cfg.linearization))},
          {"line_search", cfg.line_search}};
}

struct MeshOptions {
  std::string spec;
  int level = 0;
  std::string cells = "quad";
  double distortion = 0.0;
  std::uint64_t seed = 7;
};

std::pair<int, int> parse_counts(const std::string& text) {
  const auto x = text.find('x');
  if (x == std::string::npos) throw ConfigError("expected <n1>x<n2>, got '" + text + "'");
  try {
    return {std::stoi(text.substr(0, x)), std::stoi(text.substr(x + 1))};
  } catch (const std::exception&) {
    throw ConfigError("expected <n1>x<n2>, got '" + text + "'");
  }
}

// Mesh specs: quad:NxM, tri:NxM, annulus:NTxNR, graded:L, or a mesh file path.
Mesh mesh_from_spec(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon != std::string::npos) {
    const std::string kind = spec.substr(0, colon);
    const std::string rest = spec.substr(colon + 1);
    if (kind == "quad" || kind == "tri") {
      const auto [nx, ny] = parse_counts(rest);
      return kind == "quad" ? generate_structured_quads(nx, ny) : generate_structured_tris(nx, ny);
    }
    if (kind == "annulus") {
      const auto [nt, nr] = parse_counts(rest);
      return generate_annulus(nt, nr, 1.0, 2.0, CellType::Quad);
    }
    if (kind == "annulus-tri") {
      const auto [nt, nr] = parse_counts(rest);
      return generate_annulus(nt, nr, 1.0, 2.0, CellType::Tri);
    }
    if (kind == "graded") return graded_cavity_mesh(std::stoi(rest));
  }
  if (!fs::exists(spec)) throw ConfigError("mesh '" + spec + "' is neither a mesh spec nor an existing file");
  return read_mesh(spec);
}

std::pair<Mesh, std::string> build_mesh(const MeshOptions& o, const std::string& case_name) {
  Mesh m;
  std::string descriptor;
  if (!o.spec.empty()) {
    m = mesh_from_spec(o.spec);
    descriptor = o.spec;
  } else {
    m = family_mesh(case_name, o.level, parse_cell_type(o.cells));
    descriptor = case_name + " level " + std::to_string(o.level) + " " + o.cells;
  }
  if (o.distortion > 0.0) {
    m = distort(m, o.distortion, o.seed);
    std::ostringstream s;
    s << descriptor << " distort " << o.distortion << " seed " << o.seed;
    descriptor = s.str();
  }
  return {std::move(m), descriptor};
}

void add_mesh_flags(CLI::App* cmd, MeshOptions& o) {
  cmd->add_option("--mesh", o.spec, "Mesh file or spec (quad:NxM, tri:NxM, annulus:NTxNR, graded:L)");
  cmd->add_option("--level", o.level, "Refinement level of the case's mesh family")->check(CLI::Range(1, 10));
  cmd->add_option("--cells", o.cells, "Cell type of the mesh family")->check(CLI::IsMember({"quad", "tri"}));
  cmd->add_option("--distort", o.distortion, "Random node displacement factor")->check(CLI::Range(0.0, 0.49));
  cmd->add_option("--seed", o.seed, "Distortion seed");
}

struct SolverFlags {
  std::string riemann;
  std::string linearization;
  std::string line_search;
  double tau_p = -1.0;
  double reynolds = 1000.0;
  std::string config_path;
};

void add_solver_flags(CLI::App* cmd, SolverFlags& f) {
  cmd->add_option("--riemann", f.riemann, "Convective stabilization")->check(CLI::IsMember({"lf", "hll"}));
  cmd->add_option("--linearization", f.linearization, "Newton linearization of tau^a")
      ->check(CLI::IsMember({"exact", "lagged"}));
  cmd->add_option("--line-search", f.line_search, "Backtracking line search")->check(CLI::IsMember({"on", "off"}));
  cmd->add_option("--tau-p", f.tau_p, "Pressure stabilization")->check(CLI::PositiveNumber);
  cmd->add_option("--re", f.reynolds, "Reynolds number (cavity)")->check(CLI::PositiveNumber);
  cmd->add_option("--config", f.config_path, "Solver config file, applied after the flags")
      ->check(CLI::ExistingFile);
}

SolverConfig solver_config(const SolverFlags& f) {
  SolverConfig cfg;
  if (!f.riemann.empty()) cfg.riemann = parse_riemann(f.riemann);
  if (f.tau_p > 0.0) cfg.tau_p = f.tau_p;
  if (!f.linearization.empty()) cfg.linearization = parse_linearization(f.linearization);
  if (!f.line_search.empty()) cfg.line_search = f.line_search == "on";
  if (!f.config_path.empty()) apply_config_file(f.config_path, cfg);
  return cfg;
}

void require_pressure_constraint(const Mesh& tagged, SolverConfig& cfg) {
  if (tagged.pure_dirichlet() && cfg.pressure_constraint == PressureConstraint::None)
    cfg.pressure_constraint = PressureConstraint::ZeroMean;
}

void write_json(const fs::path& path, const json& j) {
  write_file(path.string(), [&](std::ostream& out) { out << j.dump(2) << '\n'; });
}

// ---------------------------------------------------------------------------

struct MeshCommand {
  std::vector<int> quad, tri, annulus;
  std::string domain = "unit";
  std::string case_name;
  double distortion = 0.0;
  std::uint64_t seed = 7;
  std::string out;

  int run() const {
    const int picked = !quad.empty() + !tri.empty() + !annulus.empty();
    if (picked != 1) throw ConfigError("choose exactly one of --quad, --tri, --annulus");
    Rectangle box = Rectangle::unit();
    if (domain != "unit") {
      std::istringstream s(domain);
      char c1 = 0, c2 = 0, c3 = 0;
      if (!(s >> box.x0 >> c1 >> box.y0 >> c2 >> box.x1 >> c3 >> box.y1) || c1 != ',' || c2 != ',' || c3 != ',')
        throw ConfigError("--domain expects 'unit' or x0,y0,x1,y1");
    }
    Mesh m;
    if (!quad.empty()) m = generate_structured_quads(quad[0], quad[1], box);
    if (!tri.empty()) m = generate_structured_tris(tri[0], tri[1], box);
    if (!annulus.empty()) m = generate_annulus(annulus[0], annulus[1], 1.0, 2.0, CellType::Quad);
    if (distortion > 0.0) m = distort(m, distortion, seed);
    if (!case_name.empty()) m = case_by_name(case_name).tag(m);
    if (out.empty() || out == "-") {
      write_mesh(std::cout, m);
    } else {
      write_mesh(out, m);
      std::cout << "wrote " << out << " (" << m.n_cells() << " cells, " << m.n_faces() << " faces)\n";
    }
    return kExitOk;
  }
};

struct SolveCommand {
  std::string case_name;
  MeshOptions mesh;
  SolverFlags flags;
  std::string initial;
  std::string out = "run";

  int run(const std::string& argv_line) const {
    const std::string started = utc_now();
    const CaseDefinition kase = case_by_name(case_name, flags.reynolds);
    MeshOptions mo = mesh;
    if (mo.spec.empty() && mo.level == 0) mo.level = 1;
    if (mo.spec.empty() && case_name == "cavity") mo.cells = "tri";
    SolverConfig cfg = solver_config(flags);

    std::optional<Discretization> disc;
    NewtonResult res;
    std::string descriptor;
    if (initial == "sequenced") {
      if (!mo.spec.empty()) throw ConfigError("--initial sequenced needs a mesh family (--level), not --mesh");
      const MeshFamily family = standard_family(case_name, parse_cell_type(mo.cells), mo.distortion, mo.seed);
      require_pressure_constraint(kase.tag(family(1)), cfg);
      try {
        LevelSolve seq = solve_sequenced(kase, family, mo.level, cfg);
        disc.emplace(std::move(seq.d));
        res = std::move(seq.result);
      } catch (const SolverError& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return kExitSolver;
      }
      descriptor = build_mesh(mo, case_name).second + " sequenced";
    } else {
      auto [raw, desc] = build_mesh(mo, case_name);
      descriptor = desc;
      const Mesh tagged = kase.tag(raw);
      require_pressure_constraint(tagged, cfg);
      disc.emplace(tagged, cfg, kase, kase.convection);
      SolveOptions options;
      if (initial == "zero") options.initial = InitialGuess::Zero;
      if (initial == "stokes") options.initial = InitialGuess::StokesSolve;
      res = solve_case(*disc, options);
    }
    const Discretization& d = *disc;

    const fs::path dir(out);
    fs::create_directories(dir);
    json outputs = json::array();
    const auto emit = [&](const std::string& name, const std::function<void(std::ostream&)>& writer) {
      write_file((dir / name).string(), writer);
      outputs.push_back((dir / name).string());
    };
    emit("newton.csv", [&](std::ostream& o) { write_newton_history(o, res.report); });
    emit("config.txt", [&](std::ostream& o) { write_config(o, d.config()); });
    emit("solution.vtk", [&](std::ostream& o) { write_vtk(o, d.mesh(), res.state); });

    json summary = {{"converged", res.report.converged},
                    {"iterations", res.report.iterations},
                    {"final_residual", res.report.residuals.empty() ? 0.0 : res.report.residuals.back()},
                    {"seconds", res.report.wall_seconds},
                    {"cells", d.mesh().n_cells()},
                    {"unknowns", d.dofs().size()}};
    if (!res.report.failure.empty()) summary["failure"] = res.report.failure;

    if (res.report.converged) {
      const MassFlux flux = cell_mass_flux(d, res.state);
      summary["max_abs_je"] = flux.max_abs;
      summary["sum_je"] = flux.sum;
      if (kase.has_exact()) {
        const LevelResult lr = evaluate_level(d, kase, res, mo.level);
        summary["err_u"] = lr.err_u;
        summary["err_uhat"] = lr.err_uhat;
        summary["err_p"] = lr.err_p;
        summary["err_phat"] = lr.err_phat;
        summary["err_L"] = lr.err_L;
      }
      if (case_name == "cavity") {
        emit("centreline_vertical.csv", [&](std::ostream& o) {
          write_profile_csv(o, centreline_profiles(d.mesh(), res.state, Centreline::Vertical));
        });
        emit("centreline_horizontal.csv", [&](std::ostream& o) {
          write_profile_csv(o, centreline_profiles(d.mesh(), res.state, Centreline::Horizontal));
        });
      }
    }

    const json manifest = {{"command", "solve"},
                           {"argv", argv_line},
                           {"version", HPFCFV_VERSION},
                           {"case", case_name},
                           {"reynolds", flags.reynolds},
                           {"mesh", descriptor},
                           {"seed", mesh.seed},
                           {"config", config_json(d.config())},
                           {"outputs", outputs},
                           {"result", summary},
                           {"started", started},
                           {"finished", utc_now()}};
    write_json(dir / "manifest.json", manifest);

    std::cout << case_name << ": " << (res.report.converged ? "converged" : "NOT converged") << " in "
              << res.report.iterations << " iterations, residual "
              << (res.report.residuals.empty() ? 0.0 : res.report.residuals.back()) << ", output in " << out
              << '\n';
    if (!res.report.converged) {
      std::cerr << "solver failure: " << res.report.failure << '\n';
      return kExitSolver;
    }
    return kExitOk;
  }
};

struct ConvergeCommand {
  std::string case_name;
  std::string cells = "quad";
  int levels = 4;
  int first = 1;
  int sweep_level = 2;
  double distortion = 0.0;
  std::uint64_t seed = 7;
  bool sweep = false;
  bool sequenced = false;
  SolverFlags flags;
  std::string out = "converge";

  int run(const std::string& argv_line) const {
    const std::string started = utc_now();
    const CaseDefinition kase = case_by_name(case_name, flags.reynolds);
    if (!kase.has_exact()) throw ConfigError("case '" + case_name + "' has no closed-form solution");
    const CellType type = parse_cell_type(cells);
    SolverConfig cfg = solver_config(flags);
    require_pressure_constraint(kase.tag(family_mesh(case_name, 1, type)), cfg);
    const MeshFamily family = standard_family(case_name, type, distortion, seed);

    const fs::path dir(out);
    fs::create_directories(dir);
    json outputs = json::array();
    if (sweep) {
      const std::vector<double> values{1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0};
      const auto rows = tau_p_sweep(kase, family, sweep_level, values, cfg);
      write_file((dir / "tau_p_sweep.csv").string(), [&](std::ostream& o) { write_sweep_csv(o, rows); });
      write_sweep_csv(std::cout, rows);
      outputs.push_back((dir / "tau_p_sweep.csv").string());
    } else {
      SolveOptions options;
      options.sequenced = sequenced;
      const ConvergenceReport report = convergence_study(kase, family, first, levels, cfg, options);
      write_file((dir / "convergence.csv").string(), [&](std::ostream& o) { write_convergence_csv(o, report); });
      write_convergence_csv(std::cout, report);
      outputs.push_back((dir / "convergence.csv").string());
    }

    std::ostringstream descriptor;
    descriptor << case_name << " family " << cells;
    if (distortion > 0.0) descriptor << " distort " << distortion << " seed " << seed;
    const json manifest = {{"command", sweep ? "converge --sweep-tau-p" : "converge"},
                           {"argv", argv_line},
                           {"version", HPFCFV_VERSION},
                           {"case", case_name},
                           {"mesh", descriptor.str()},
                           {"levels", sweep ? json::array({sweep_level}) : json::array({first, levels})},
                           {"seed", seed},
                           {"config", config_json(cfg)},
                           {"outputs", outputs},
                           {"started", started},
                           {"finished", utc_now()}};
    write_json(dir / "manifest.json", manifest);
    return kExitOk;
  }
};

struct SpectrumCommand {
  std::string case_name = "stokes-synthetic";
  std::string cells = "quad";
  int n = 16;
  double distortion = 0.0;
  std::uint64_t seed = 7;
  int cap = 4096;
  SolverFlags flags;
  std::string out;

  int run(const std::string& argv_line) const {
    const std::string started = utc_now();
    const CaseDefinition kase = case_by_name(case_name, flags.reynolds);
    Mesh m = parse_cell_type(cells) == CellType::Quad ? generate_structured_quads(n, n)
                                                       : generate_structured_tris(n, n);
    if (distortion > 0.0) m = distort(m, distortion, seed);
    const SolverConfig cfg = solver_config(flags);
    const Discretization d = Discretization::unconstrained(kase.tag(m), cfg, kase, false);
    const SparseSystem sys = assemble_stokes(d);
    if (sys.dimension() > cap) {
      throw ConfigError("dimension " + std::to_string(sys.dimension()) + " exceeds the dense cap " +
                        std::to_string(cap) + "; use a smaller --n or raise --cap");
    }
    const SpectrumSummary s = spectrum(sys.matrix, cap);

    std::cout << "dimension " << sys.dimension() << " nnz " << sys.nonzeros() << '\n'
              << std::scientific << std::setprecision(4) << "min Re " << s.min_real << " max Re " << s.max_real
              << " max |Im| " << s.max_abs_imag << " complex fraction " << std::defaultfloat
              << s.complex_fraction << '\n';

    if (!out.empty()) {
      const fs::path dir(out);
      fs::create_directories(dir);
      write_file((dir / "eigenvalues.csv").string(), [&](std::ostream& o) {
        o << "real,imag\n" << std::setprecision(17);
        for (const auto& ev : s.eigenvalues) o << ev.real() << ',' << ev.imag() << '\n';
      });
      const json manifest = {{"command", "spectrum"},
                             {"argv", argv_line},
                             {"version", HPFCFV_VERSION},
                             {"case", case_name},
                             {"mesh", cells + " " + std::to_string(n) + "x" + std::to_string(n)},
                             {"distort", distortion},
                             {"seed", seed},
                             {"config", config_json(d.config())},
                             {"dimension", sys.dimension()},
                             {"nnz", sys.nonzeros()},
                             {"min_real", s.min_real},
                             {"max_real", s.max_real},
                             {"max_abs_imag", s.max_abs_imag},
                             {"complex_fraction", s.complex_fraction},
                             {"outputs", json::array({(dir / "eigenvalues.csv").string()})},
                             {"started", started},
                             {"finished", utc_now()}};
      write_json(dir / "manifest.json", manifest);
    }
    return kExitOk;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid-pressure face-centred finite volume solver for 2D steady Stokes and Navier-Stokes flows"};
  app.set_version_flag("--version", HPFCFV_VERSION);
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker threads (0: all cores)");

  const std::vector<std::string> case_names{"stokes-synthetic", "couette", "cavity"};

  MeshCommand mesh_cmd;
  auto* mesh = app.add_subcommand("mesh", "Generate a mesh file");
  mesh->add_option("--quad", mesh_cmd.quad, "Structured quads nx ny")->expected(2);
  mesh->add_option("--tri", mesh_cmd.tri, "Structured triangles nx ny")->expected(2);
  mesh->add_option("--annulus", mesh_cmd.annulus, "Annulus n_theta n_r on 1 <= r <= 2")->expected(2);
  mesh->add_option("--domain", mesh_cmd.domain, "'unit' or x0,y0,x1,y1");
  mesh->add_option("--distort", mesh_cmd.distortion, "Random node displacement factor")
      ->check(CLI::Range(0.0, 0.49));
  mesh->add_option("--seed", mesh_cmd.seed, "Distortion seed");
  mesh->add_option("--case", mesh_cmd.case_name, "Tag boundaries with the rules of a case")
      ->check(CLI::IsMember(case_names));
  mesh->add_option("--out", mesh_cmd.out, "Output file (default stdout)");

  SolveCommand solve_cmd;
  auto* solve = app.add_subcommand("solve", "Solve one case on one mesh");
  solve->add_option("--case", solve_cmd.case_name, "Case name")->required()->check(CLI::IsMember(case_names));
  add_mesh_flags(solve, solve_cmd.mesh);
  add_solver_flags(solve, solve_cmd.flags);
  solve->add_option("--initial", solve_cmd.initial,
                    "Initial guess: zero, stokes, or sequenced (solve levels 1..level in turn); "
                    "default stokes for Re >= 100, zero otherwise")
      ->check(CLI::IsMember({"zero", "stokes", "sequenced"}));
  solve->add_option("--out", solve_cmd.out, "Output directory");

  ConvergeCommand conv_cmd;
  auto* conv = app.add_subcommand("converge", "Mesh convergence study or tau_p sweep");
  conv->add_option("--case", conv_cmd.case_name, "Case name")->required()->check(CLI::IsMember(case_names));
  conv->add_option("--cells", conv_cmd.cells, "Cell type")->check(CLI::IsMember({"quad", "tri"}));
  conv->add_option("--levels", conv_cmd.levels, "Last level")->check(CLI::Range(1, 10));
  conv->add_option("--first", conv_cmd.first, "First level")->check(CLI::Range(1, 10));
  conv->add_option("--distort", conv_cmd.distortion, "Random node displacement factor")
      ->check(CLI::Range(0.0, 0.49));
  conv->add_option("--seed", conv_cmd.seed, "Distortion seed");
  conv->add_flag("--sweep-tau-p", conv_cmd.sweep, "tau_p sensitivity sweep on one level");
  conv->add_flag("--sequenced", conv_cmd.sequenced, "Start each level from the previous level's solution");
  conv->add_option("--level", conv_cmd.sweep_level, "Level of the sweep")->check(CLI::Range(1, 10));
  add_solver_flags(conv, conv_cmd.flags);
  conv->add_option("--out", conv_cmd.out, "Output directory");

  SpectrumCommand spec_cmd;
  auto* spec = app.add_subcommand("spectrum", "Eigenvalues of the Stokes global matrix");
  spec->add_option("--case", spec_cmd.case_name, "Case name")->check(CLI::IsMember(case_names));
  spec->add_option("--cells", spec_cmd.cells, "Cell type")->check(CLI::IsMember({"quad", "tri"}));
  spec->add_option("--n", spec_cmd.n, "Cells per side")->check(CLI::PositiveNumber);
  spec->add_option("--distort", spec_cmd.distortion, "Random node displacement factor")
      ->check(CLI::Range(0.0, 0.49));
  spec->add_option("--seed", spec_cmd.seed, "Distortion seed");
  spec->add_option("--cap", spec_cmd.cap, "Largest dimension for the dense eigensolver")
      ->check(CLI::PositiveNumber);
  add_solver_flags(spec, spec_cmd.flags);
  spec->add_option("--out", spec_cmd.out, "Output directory for eigenvalues and manifest");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  set_thread_count(threads);
  const std::string argv_line = joined_argv(argc, argv);
  try {
    if (mesh->parsed()) return mesh_cmd.run();
    if (solve->parsed()) return solve_cmd.run(argv_line);
    if (conv->parsed()) return conv_cmd.run(argv_line);
    if (spec->parsed()) return spec_cmd.run(argv_line);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const MeshError& e) {
    std::cerr << "mesh error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  }
  return kExitUsage;
}
