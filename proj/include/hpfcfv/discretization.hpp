#pragma once

#include "hpfcfv/cases.hpp"
#include "hpfcfv/config.hpp"
#include "hpfcfv/mesh.hpp"
#include "hpfcfv/system.hpp"
#include "hpfcfv/voigt.hpp"

#include <vector>

namespace hpfcfv {

enum class FaceRole { Interior, Dirichlet, Neumann, Symmetry };

/// Cell fields (L, u, p), face fields (u-hat, p-hat) and the Lagrange multiplier.
/// On Dirichlet faces uhat mirrors the boundary datum and is never an unknown.
struct SolutionState {
  std::vector<Voigt> L;
  std::vector<Vec2> u;
  std::vector<double> p;
  std::vector<Vec2> uhat;
  std::vector<double> phat;
  double lambda = 0.0;

  static SolutionState zeros(const Mesh& mesh);
  bool matches(const Mesh& mesh) const;
};

/// Mesh, configuration and case data frozen at the quadrature points.
class Discretization {
 public:
  /// Throws ConfigError for untagged boundary faces, invalid parameters, or a
  /// pure-Dirichlet problem without the zero-mean pressure constraint.
  /// The viscosity is taken from the case and overrides cfg.nu.
  Discretization(Mesh mesh, SolverConfig cfg, const CaseDefinition& kase, bool convection);

  /// Same data but never adds the Lagrange multiplier, even for pure Dirichlet problems.
  static Discretization unconstrained(Mesh mesh, SolverConfig cfg, const CaseDefinition& kase, bool convection);

  const Mesh& mesh() const { return mesh_; }
  const SolverConfig& config() const { return cfg_; }
  const DofMap& dofs() const { return dofs_; }
  bool convection() const { return convection_; }
  bool lagrange() const { return dofs_.has_lagrange(); }
  int slots_per_cell() const { return mesh_.nodes_per_cell(); }

  FaceRole role(int f) const { return roles_[f]; }
  const Vec2& dirichlet(int f) const { return face_data_[f]; }
  const Vec2& traction(int f) const { return face_data_[f]; }
  const Vec2& source(int c) const { return sources_[c]; }
  double tau_d() const { return tau_diffusive(cfg_); }
  double tau_p(int f) const { return cfg_.tau_p_at(f); }

  /// Adds the physical flux p-hat n + (n . u-hat) u-hat to interior momentum rows
  /// from both sides. Mathematically a no-op; used to check the cancellation.
  void set_full_interior_flux(bool on) { full_interior_flux_ = on; }
  bool full_interior_flux() const { return full_interior_flux_; }

  /// Velocity trace of face f in the state: the datum on Dirichlet faces.
  Vec2 face_velocity(int f, const SolutionState& s) const;

  /// Stabilization tau_d (+ tau_a with convection) per (cell, local face) slot,
  /// evaluated from the velocity traces of `lagged`.
  std::vector<double> stabilization(const SolutionState& lagged) const;

  /// Face unknowns of the state as a global vector (lambda included).
  Eigen::VectorXd pack_faces(const SolutionState& s) const;
  /// Writes a global face vector into the state, refreshing Dirichlet traces.
  void unpack_faces(const Eigen::VectorXd& x, SolutionState& s) const;

  /// Structural pattern of the global condensed matrix (cached).
  const SparseMatrix& pattern() const { return pattern_; }

 private:
  Discretization(Mesh mesh, SolverConfig cfg, const CaseDefinition& kase, bool convection, bool allow_lagrange);

  Mesh mesh_;
  SolverConfig cfg_;
  bool convection_ = false;
  bool full_interior_flux_ = false;
  DofMap dofs_;
  std::vector<FaceRole> roles_;
  std::vector<Vec2> face_data_;
  std::vector<Vec2> sources_;
  SparseMatrix pattern_;
};

}  // namespace hpfcfv
