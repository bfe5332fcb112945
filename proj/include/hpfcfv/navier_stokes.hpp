#pragma once

#include "hpfcfv/discretization.hpp"

#include <Eigen/Dense>

#include <vector>

namespace hpfcfv {

using LocalVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, CellDofs::kMax, 1>;
using LocalMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, CellDofs::kMax, CellDofs::kMax>;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

/// Residuals and Jacobian blocks of one cell. U = (L, u, p) has 6 entries; the
/// local face unknowns follow the CellDofs layout.
struct CellBlocks {
  CellDofs dofs;
  double area = 0.0;
  double a_u = 0.0;  // sum |face| tau, the isotropic velocity diagonal
  double a_p = 0.0;  // sum |face| tau_p
  Vec6 r_cell = Vec6::Zero();
  LocalVector r_face;
  Eigen::Matrix<double, 6, Eigen::Dynamic, 0, 6, CellDofs::kMax> t_cell_face;
  Eigen::Matrix<double, Eigen::Dynamic, 6, 0, CellDofs::kMax, 6> t_face_cell;
  LocalMatrix t_face_face;

  Mat6 t_cell_cell() const;
  /// Closed-form inverse of the block-diagonal T_UU.
  Vec6 solve_cell(const Vec6& rhs) const;
};

struct LocalResiduals {
  Voigt r_L = Voigt::Zero();
  Vec2 r_u = Vec2::Zero();
  double r_p = 0.0;
};

/// Residuals and analytic Jacobian of cell c with frozen slot stabilization tau.
CellBlocks cell_jacobian(const Discretization& d, int c, const SolutionState& s, const std::vector<double>& tau);

LocalResiduals local_residuals(const Discretization& d, int c, const SolutionState& s, const std::vector<double>& tau);

struct FaceResiduals {
  Vec2 r_uhat = Vec2::Zero();  // zero for Dirichlet faces
  double r_phat = 0.0;
};

/// Global residual rows of face f, summed over its adjacent cells.
FaceResiduals global_residuals(const Discretization& d, int f, const SolutionState& s,
                               const std::vector<double>& tau);

struct CondensedCell {
  LocalMatrix K;
  LocalVector F;
};

/// K = T_LL - T_LU T_UU^-1 T_UL and F = -R_face + T_LU T_UU^-1 R_cell.
CondensedCell condense(const CellBlocks& b);

/// dU = T_UU^-1 (-R_cell - T_UL dLambda).
Vec6 recover_cell_increments(const CellBlocks& b, const LocalVector& delta_faces);

/// Zero-mean row of the Lagrange border restricted to the cell: -|cell|/a_p dR_p/dLambda.
LocalVector lagrange_row(const CellBlocks& b);

/// Concatenated residual: 6 per cell (L, u, p), then the face rows in DofMap
/// order with the multiplier term, then the constraint row when present.
Eigen::VectorXd residual_vector(const Discretization& d, const SolutionState& s, const std::vector<double>& tau);

/// Condensed Newton system K dLambda = F at the state.
SparseSystem newton_system(const Discretization& d, const SolutionState& s, const std::vector<double>& tau);

/// State after applying the face increment and the recovered cell increments.
SolutionState apply_increment(const Discretization& d, const SolutionState& s, const std::vector<double>& tau,
                              const Eigen::VectorXd& delta_faces, double step = 1.0);

}  // namespace hpfcfv
