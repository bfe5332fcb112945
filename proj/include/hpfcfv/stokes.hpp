#pragma once

#include "hpfcfv/discretization.hpp"

namespace hpfcfv {

/// Cell quantities that depend only on geometry and data.
struct CellCondensationData {
  double a_u = 0.0;  // sum |face| tau_d (velocity block is a_u I)
  double a_p = 0.0;  // sum |face| tau_p
  Voigt f_L = Voigt::Zero();
  Vec2 f_u = Vec2::Zero();
  double f_p = 0.0;
};

CellCondensationData stokes_cell_data(const Discretization& d, int c);

/// Linear Stokes system in the face unknowns, assembled from the closed-form
/// cell blocks. Bordered by the zero-mean row when d has a Lagrange multiplier.
SparseSystem assemble_stokes(const Discretization& d);

/// Adds the zero-mean border to a system assembled without it. `d` must be
/// the discretization the system came from.
SparseSystem append_zero_mean_constraint(const SparseSystem& system, const Discretization& d);

/// Cell fields from the face solution, cell by cell; face fields are copied in.
SolutionState recover_stokes_cells(const Discretization& d, const Eigen::VectorXd& face_solution);

/// Assemble, solve and recover.
SolutionState solve_stokes(const Discretization& d);

}  // namespace hpfcfv
