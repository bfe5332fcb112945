#pragma once

#include "hpfcfv/common.hpp"
#include "hpfcfv/mesh.hpp"

#include <Eigen/Sparse>

#include <array>
#include <complex>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace hpfcfv {

/// Global numbering of the face unknowns: every u-hat (x then y per
/// non-Dirichlet face, faces in index order), then p-hat on all faces, then
/// the optional Lagrange multiplier.
class DofMap {
 public:
  DofMap() = default;
  DofMap(const Mesh& mesh, bool lagrange);

  int n_faces() const { return static_cast<int>(uhat_.size()); }
  int n_uhat() const { return n_uhat_; }
  bool has_lagrange() const { return lagrange_; }
  int size() const { return n_uhat_ + n_faces() + (lagrange_ ? 1 : 0); }

  /// First of the two velocity dofs of face f, or -1 for a Dirichlet face.
  int uhat(int f) const { return uhat_[f]; }
  int phat(int f) const { return n_uhat_ + f; }
  int lambda() const { return lagrange_ ? n_uhat_ + n_faces() : -1; }

 private:
  std::vector<int> uhat_;
  int n_uhat_ = 0;
  bool lagrange_ = false;
};

/// Face unknowns seen from one cell: velocity dofs of its non-Dirichlet faces
/// (two per face, local face order) followed by p-hat of each local face.
struct CellDofs {
  static constexpr int kMax = 12;
  int n_faces = 0;
  int size = 0;
  std::array<int, 4> uhat_local{-1, -1, -1, -1};  // local row of u-hat_x, -1 for Dirichlet
  std::array<int, 4> phat_local{-1, -1, -1, -1};
  std::array<int, kMax> global{};
};

CellDofs cell_dofs(const Mesh& mesh, const DofMap& dofs, int c);

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

/// Compressed matrix holding every entry coupled through a cell (explicit zeros
/// kept), plus the dense Lagrange border when present. Values start at zero.
SparseMatrix structural_matrix(const Mesh& mesh, const DofMap& dofs);

/// Adds v to an entry that must exist in the pattern.
void add_entry(SparseMatrix& m, int row, int col, double v);

struct SparseSystem {
  DofMap dofs;
  SparseMatrix matrix;
  Eigen::VectorXd rhs;

  int dimension() const { return static_cast<int>(matrix.rows()); }
  long long nonzeros() const { return matrix.nonZeros(); }
};

/// Sparse LU (UMFPACK) that keeps its symbolic analysis while the pattern is unchanged.
class LinearSolver {
 public:
  LinearSolver();
  ~LinearSolver();
  LinearSolver(const LinearSolver&) = delete;
  LinearSolver& operator=(const LinearSolver&) = delete;

  /// Throws LinearSolveError naming the column of the smallest pivot when singular.
  void factorize(const SparseMatrix& a);
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  double rcond() const { return rcond_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  double rcond_ = 0.0;
};

/// Direct solve with a residual check ||A x - b|| <= 1e-10 (1 + ||b||).
Eigen::VectorXd solve_linear(const SparseSystem& system);
Eigen::VectorXd solve_linear(const SparseMatrix& a, const Eigen::VectorXd& b);

struct SpectrumSummary {
  std::vector<std::complex<double>> eigenvalues;
  double min_real = 0.0;
  double max_real = 0.0;
  double max_abs_imag = 0.0;
  double complex_fraction = 0.0;  // share of eigenvalues with |Im| > imag_tol
};

/// Dense eigen-decomposition of the raw matrix; refuses above `cap` rows.
SpectrumSummary spectrum(const SparseMatrix& a, int cap = 4096, double imag_tol = 1e-12);

/// `row col value` triplets, 0-based, one per line.
void write_matrix(std::ostream& out, const SparseMatrix& a);

}  // namespace hpfcfv
