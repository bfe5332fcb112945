#pragma once

#include "hpfcfv/cases.hpp"
#include "hpfcfv/discretization.hpp"
#include "hpfcfv/newton.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace hpfcfv {

/// Relative L2 error, or the absolute error when the exact field vanishes.
struct L2Error {
  double value = 0.0;
  bool relative = true;
};

// Cell errors weight by |cell| at centroids, face errors by |face| at barycentres.
// Voigt tensors use the Frobenius weights [1, 1, 2].
L2Error l2_error_cells(const Mesh& mesh, const std::vector<double>& v, const ScalarField& exact);
L2Error l2_error_cells(const Mesh& mesh, const std::vector<Vec2>& v, const VectorField& exact);
L2Error l2_error_cells(const Mesh& mesh, const std::vector<Voigt>& v, const TensorField& exact);
L2Error l2_error_faces(const Mesh& mesh, const std::vector<double>& v, const ScalarField& exact);
L2Error l2_error_faces(const Mesh& mesh, const std::vector<Vec2>& v, const VectorField& exact);

struct Box {
  double x0, x1, y0, y1;
  bool contains(const Vec2& p) const { return p.x() >= x0 && p.x() <= x1 && p.y() >= y0 && p.y() <= y1; }
};

/// The two upper cavity corners [0,0.05]x[0.95,1] and [0.95,1]x[0.95,1].
std::vector<Box> cavity_corner_boxes();

/// l2_error_cells over the cells whose centroid lies outside every box.
/// Throws ConfigError if no cell remains.
L2Error masked_l2_error(const Mesh& mesh, const std::vector<Vec2>& v, const VectorField& reference,
                        const std::vector<Box>& excluded);

/// Area-weighted mean of p_exact - p, the constant aligning a pressure known up to a constant.
double pressure_shift(const Mesh& mesh, const std::vector<double>& p, const ScalarField& exact);

struct MassFlux {
  std::vector<double> per_cell;
  double max_abs = 0.0;
  double sum = 0.0;
};

/// J_e = sum over faces of |face| w . n with w = u-hat, or u_D on Dirichlet faces.
MassFlux cell_mass_flux(const Discretization& d, const SolutionState& s);

/// Locates the cell containing a point (uniform bucket grid over cell bounding boxes).
class CellLocator {
 public:
  explicit CellLocator(const Mesh& mesh);
  /// Cell index, or -1 when the point is outside the mesh.
  int find(const Vec2& x) const;

 private:
  const Mesh* mesh_;
  Vec2 lo_, hi_;
  int nx_ = 1, ny_ = 1;
  std::vector<std::vector<int>> buckets_;
};

/// Piecewise-constant velocity of a solution, usable as a reference field.
VectorField piecewise_velocity(const Mesh& mesh, const SolutionState& s);

// Convergence studies.

using MeshFamily = std::function<Mesh(int level)>;

/// family_mesh of the case, optionally distorted with a fixed seed.
MeshFamily standard_family(const std::string& case_name, CellType type, double distortion = 0.0,
                           std::uint64_t seed = 0);

struct LevelResult {
  int level = 0;
  double h = 0.0;
  int cells = 0;
  int unknowns = 0;
  double err_u = 0.0, err_uhat = 0.0, err_p = 0.0, err_phat = 0.0, err_L = 0.0;
  int newton_iterations = 0;
  bool converged = false;
  std::vector<double> newton_residuals;
  double max_je = 0.0;
  double sum_je = 0.0;
  double seconds = 0.0;
};

struct ConvergenceReport {
  std::string case_name;
  std::vector<LevelResult> levels;
  /// log(e_i / e_{i+1}) / log(h_i / h_{i+1}); empty optional for the first level.
  static std::optional<double> rate(double e0, double e1, double h0, double h1);
};

struct SolveOptions {
  std::optional<InitialGuess> initial;  // default_initial_guess when empty
  std::optional<SolutionState> start;   // explicit initial state, overrides `initial`
  bool sequenced = false;               // studies: start each level from the previous one
};

/// Cell fields of `to` sampled from the cell of `from` containing each
/// centroid (nearest centroid outside), face fields averaged from the
/// adjacent cells, multiplier zero.
SolutionState transfer_state(const Mesh& from, const SolutionState& s, const Mesh& to);

/// Solves the case on one mesh: direct Stokes solve without convection, Newton otherwise.
NewtonResult solve_case(const Discretization& d, const SolveOptions& options = {});

/// Errors, mass flux and Newton data for a solved level. Pressures of pure
/// Dirichlet problems are compared after the pressure_shift.
LevelResult evaluate_level(const Discretization& d, const CaseDefinition& kase, const NewtonResult& result,
                           int level);

struct LevelSolve {
  Discretization d;
  NewtonResult result;
  std::vector<NewtonReport> coarse;  // levels 1 .. level-1
};

/// Solves levels 1..level of the family in turn, each started from the
/// transferred solution of the previous level. Throws SolverError naming the
/// first level that fails.
LevelSolve solve_sequenced(const CaseDefinition& kase, const MeshFamily& family, int level, const SolverConfig& cfg);

/// Levels [first, last] of the family. Throws SolverError naming the level on failure.
ConvergenceReport convergence_study(const CaseDefinition& kase, const MeshFamily& family, int first, int last,
                                    const SolverConfig& cfg, const SolveOptions& options = {});

struct TauPSweepRow {
  double tau_p = 0.0;
  LevelResult result;
};

std::vector<TauPSweepRow> tau_p_sweep(const CaseDefinition& kase, const MeshFamily& family, int level,
                                      const std::vector<double>& tau_p_values, const SolverConfig& cfg);

// Centreline sampling on the unit square.

enum class Centreline { Vertical, Horizontal };  // x1 = 0.5 and x2 = 0.5

struct ProfileSample {
  double coord = 0.0;  // x2 for the vertical line, x1 for the horizontal one
  Vec2 point = Vec2::Zero();
  Vec2 u = Vec2::Zero();
  double p = 0.0;
};

/// Cells whose centroid is nearest the line (ties kept), ordered by coordinate.
std::vector<ProfileSample> centreline_profiles(const Mesh& mesh, const SolutionState& s, Centreline line);

/// Linear interpolation in a table sorted by coordinate, clamped at the ends.
double interpolate(const std::vector<std::pair<double, double>>& table, double x);

/// RMS over samples (outside the boxes) of component `comp` against the
/// reference table, divided by the reference speed.
double profile_rms(const std::vector<ProfileSample>& samples, int comp,
                   const std::vector<std::pair<double, double>>& reference, double reference_speed,
                   const std::vector<Box>& excluded = {});

std::vector<std::pair<double, double>> profile_table(const std::vector<ProfileSample>& samples, int comp);

// Output.

void write_vtk(std::ostream& out, const Mesh& mesh, const SolutionState& s);
void write_convergence_csv(std::ostream& out, const ConvergenceReport& report);
void write_sweep_csv(std::ostream& out, const std::vector<TauPSweepRow>& rows);
void write_profile_csv(std::ostream& out, const std::vector<ProfileSample>& samples);

/// Opens a file for writing, throwing std::runtime_error with the path on failure,
/// and writes it through the callback.
void write_file(const std::string& path, const std::function<void(std::ostream&)>& writer);

}  // namespace hpfcfv
