#pragma once

#include "hpfcfv/common.hpp"
#include "hpfcfv/mesh.hpp"
#include "hpfcfv/voigt.hpp"

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace hpfcfv {

using VectorField = std::function<Vec2(const Vec2&)>;
using ScalarField = std::function<double(const Vec2&)>;
using TensorField = std::function<Voigt(const Vec2&)>;
/// Neumann datum g evaluated at a point with the outward unit normal there.
using TractionField = std::function<Vec2(const Vec2& x, const Vec2& n)>;

struct CaseDefinition {
  std::string name;
  double nu = 1.0;
  bool convection = false;
  std::vector<BoundaryRule> boundary;
  VectorField dirichlet;
  TractionField traction;
  VectorField source;

  // Closed-form solution, empty when unknown. exact_L is the mixed variable -eps^d.
  VectorField exact_velocity;
  ScalarField exact_pressure;
  TensorField exact_L;

  bool has_exact() const { return static_cast<bool>(exact_velocity); }
  Mesh tag(const Mesh& mesh) const { return tag_boundaries(mesh, boundary); }
};

/// Trigonometric manufactured Stokes flow on the unit square, Neumann on x2 = 0.
CaseDefinition synthetic_stokes();

/// Flow between rotating cylinders, Dirichlet on both circles, p(R_o) = 1.
CaseDefinition couette(double inner_radius = 1.0, double outer_radius = 2.0, double omega_inner = 0.0,
                       double omega_outer = 0.5);

/// Lid-driven cavity on the unit square with lid velocity (1, 0).
CaseDefinition cavity(double reynolds);

/// Looks up "stokes-synthetic", "couette" or "cavity" (the latter uses reynolds).
CaseDefinition case_by_name(const std::string& name, double reynolds = 1000.0);

/// Growth ratio r of a symmetric geometric spacing with n_half cells of first
/// size h0 filling half_length, i.e. h0 (r^n_half - 1)/(r - 1) = half_length.
double geometric_ratio(int n_half, double h0, double half_length);

/// Unit-square triangle mesh with (24 2^level)^2 x 2 cells graded toward all
/// walls, first layer 1e-2 / level. Throws ConfigError if the ratio leaves (1, 1.5).
Mesh graded_cavity_mesh(int level);

/// Untagged level-l mesh of the refinement family of a case: (8 2^l)^2 cells on
/// the unit square, (16 2^l) x (4 2^l) on the Couette annulus, graded_cavity_mesh
/// for the cavity, which only exists with triangles.
Mesh family_mesh(const std::string& case_name, int level, CellType type);

/// Reads a `coordinate,value` CSV (optional header line).
std::vector<std::pair<double, double>> read_reference_profile(const std::string& path);

}  // namespace hpfcfv
