#include "hpfcfv/stokes.hpp"

namespace hpfcfv {

namespace {

const Mat3& dev() {
  static const Mat3 D = deviatoric_operator(2);
  return D;
}

// Dense contribution of one cell in the CellDofs layout.
void stokes_cell_matrix(const Discretization& d, int c, const CellCondensationData& cd, const CellDofs& dofs,
                        Eigen::MatrixXd& K, Eigen::VectorXd& F) {
  const Mesh& mesh = d.mesh();
  const double nu = d.config().nu;
  const double tau = d.tau_d();
  const double area = mesh.cell_area(c);
  const auto faces = mesh.cell_faces(c);
  const int k = dofs.n_faces;
  K.setZero(dofs.size, dofs.size);
  F.setZero(dofs.size);

  for (int i = 0; i < k; ++i) {
    const int fi = faces[i];
    const double gi = mesh.face(fi).measure;
    const Vec2 ni = mesh.outward_normal(c, i);
    const double tpi = d.tau_p(fi);
    const int pi = dofs.phat_local[i];
    const int ui = dofs.uhat_local[i];
    const FaceRole role = d.role(fi);

    // Momentum rows, projected onto (t, n) on symmetry faces.
    if (ui >= 0) {
      const NormalMatrix Ni = normal_matrix(ni);
      Eigen::Matrix<double, 2, Eigen::Dynamic> rows = Eigen::MatrixXd::Zero(2, dofs.size);
      Vec2 rhs = gi * (nu / area * (Ni.transpose() * cd.f_L) - tau / cd.a_u * cd.f_u);
      for (int j = 0; j < k; ++j) {
        const int fj = faces[j];
        const double gj = mesh.face(fj).measure;
        const Vec2 nj = mesh.outward_normal(c, j);
        if (const int uj = dofs.uhat_local[j]; uj >= 0) {
          Mat2 block = gi * gj * (-nu / area * Ni.transpose() * dev() * normal_matrix(nj) +
                                  tau * tau / cd.a_u * Mat2::Identity());
          if (i == j) block -= gi * tau * Mat2::Identity();
          rows.block<2, 2>(0, uj) = block;
        }
        rows.col(dofs.phat_local[j]) = -gi * gj * tau / cd.a_u * nj;
      }
      if (role == FaceRole::Neumann) {
        rows.col(pi) += gi * ni;
        rhs -= gi * d.traction(fi);
      }
      if (role == FaceRole::Symmetry) {
        const Vec2& t = mesh.face(fi).tangent;
        K.row(ui) = t.transpose() * rows;
        F[ui] = t.dot(rhs);
        K.block<1, 2>(ui + 1, ui) = gi * ni.transpose();
      } else {
        K.middleRows(ui, 2) = rows;
        F.segment<2>(ui) = rhs;
      }
    }

    // Mass rows.
    for (int j = 0; j < k; ++j) {
      const int fj = faces[j];
      const double gj = mesh.face(fj).measure;
      const Vec2 nj = mesh.outward_normal(c, j);
      if (const int uj = dofs.uhat_local[j]; uj >= 0) K.block<1, 2>(pi, uj) = -gi * gj * tpi / cd.a_p * nj.transpose();
      K(pi, dofs.phat_local[j]) = gi * gj * tpi * d.tau_p(fj) / cd.a_p - (i == j ? gi * tpi : 0.0);
    }
    F[pi] = gi * tpi / cd.a_p * cd.f_p;
  }
}

// Zero-mean row restricted to the cell, and its right-hand side.
void lagrange_cell_row(const Discretization& d, int c, const CellCondensationData& cd, const CellDofs& dofs,
                       Eigen::VectorXd& row, double& rhs) {
  const Mesh& mesh = d.mesh();
  const double scale = mesh.cell_area(c) / cd.a_p;
  const auto faces = mesh.cell_faces(c);
  row.setZero(dofs.size);
  for (int j = 0; j < dofs.n_faces; ++j) {
    const double gj = mesh.face(faces[j]).measure;
    if (const int uj = dofs.uhat_local[j]; uj >= 0)
      row.segment<2>(uj) = -gj * scale * mesh.outward_normal(c, j);
    row[dofs.phat_local[j]] = gj * scale * d.tau_p(faces[j]);
  }
  rhs = scale * cd.f_p;
}

}  // namespace

CellCondensationData stokes_cell_data(const Discretization& d, int c) {
  const Mesh& mesh = d.mesh();
  const double tau = d.tau_d();
  const auto faces = mesh.cell_faces(c);
  CellCondensationData cd;
  cd.f_u = mesh.cell_area(c) * d.source(c);
  for (int j = 0; j < static_cast<int>(faces.size()); ++j) {
    const int f = faces[j];
    const double g = mesh.face(f).measure;
    cd.a_u += g * tau;
    cd.a_p += g * d.tau_p(f);
    if (d.role(f) != FaceRole::Dirichlet) continue;
    const Vec2 n = mesh.outward_normal(c, j);
    const Vec2& ud = d.dirichlet(f);
    cd.f_L += g * dev() * normal_matrix(n) * ud;
    cd.f_u += g * tau * ud;
    cd.f_p += g * n.dot(ud);
  }
  return cd;
}

SparseSystem assemble_stokes(const Discretization& d) {
  const Mesh& mesh = d.mesh();
  SparseSystem sys;
  sys.dofs = d.dofs();
  sys.matrix = d.pattern();
  sys.rhs = Eigen::VectorXd::Zero(sys.dofs.size());
  const int lam = sys.dofs.lambda();
  Eigen::MatrixXd K;
  Eigen::VectorXd F, row;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const CellCondensationData cd = stokes_cell_data(d, c);
    const CellDofs dofs = cell_dofs(mesh, sys.dofs, c);
    stokes_cell_matrix(d, c, cd, dofs, K, F);
    for (int b = 0; b < dofs.size; ++b)
      for (int a = 0; a < dofs.size; ++a) add_entry(sys.matrix, dofs.global[a], dofs.global[b], K(a, b));
    for (int a = 0; a < dofs.size; ++a) sys.rhs[dofs.global[a]] += F[a];
    if (lam >= 0) {
      double rhs = 0.0;
      lagrange_cell_row(d, c, cd, dofs, row, rhs);
      for (int a = 0; a < dofs.size; ++a) {
        add_entry(sys.matrix, lam, dofs.global[a], row[a]);
        add_entry(sys.matrix, dofs.global[a], lam, row[a]);
      }
      sys.rhs[lam] += rhs;
    }
  }
  return sys;
}

SparseSystem append_zero_mean_constraint(const SparseSystem& system, const Discretization& d) {
  if (system.dofs.has_lagrange()) throw ConfigError("zero-mean constraint already applied");
  const Mesh& mesh = d.mesh();
  SparseSystem out;
  out.dofs = DofMap(mesh, true);
  if (out.dofs.size() != system.dimension() + 1) throw ConfigError("system does not belong to this discretization");
  out.matrix = structural_matrix(mesh, out.dofs);
  for (int col = 0; col < system.matrix.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(system.matrix, col); it; ++it)
      add_entry(out.matrix, static_cast<int>(it.row()), col, it.value());
  out.rhs = Eigen::VectorXd::Zero(out.dofs.size());
  out.rhs.head(system.dimension()) = system.rhs;
  const int lam = out.dofs.lambda();
  Eigen::VectorXd row;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const CellCondensationData cd = stokes_cell_data(d, c);
    const CellDofs dofs = cell_dofs(mesh, out.dofs, c);
    double rhs = 0.0;
    lagrange_cell_row(d, c, cd, dofs, row, rhs);
    for (int a = 0; a < dofs.size; ++a) {
      add_entry(out.matrix, lam, dofs.global[a], row[a]);
      add_entry(out.matrix, dofs.global[a], lam, row[a]);
    }
    out.rhs[lam] += rhs;
  }
  return out;
}

SolutionState recover_stokes_cells(const Discretization& d, const Eigen::VectorXd& face_solution) {
  const Mesh& mesh = d.mesh();
  const double tau = d.tau_d();
  SolutionState s = SolutionState::zeros(mesh);
  Eigen::VectorXd x = face_solution;
  if (x.size() == d.dofs().size() - 1 && d.lagrange()) x.conservativeResize(d.dofs().size()), x[x.size() - 1] = 0.0;
  if (x.size() != d.dofs().size()) throw ConfigError("face solution has the wrong size");
  d.unpack_faces(x, s);
  parallel_for(mesh.n_cells(), [&](std::size_t i) {
    const int c = static_cast<int>(i);
    const CellCondensationData cd = stokes_cell_data(d, c);
    const auto faces = mesh.cell_faces(c);
    Voigt rl = cd.f_L;
    Vec2 ru = cd.f_u;
    double rp = -cd.f_p;
    for (int j = 0; j < static_cast<int>(faces.size()); ++j) {
      const int f = faces[j];
      const double g = mesh.face(f).measure;
      const Vec2 n = mesh.outward_normal(c, j);
      if (d.role(f) != FaceRole::Dirichlet) {
        rl += g * dev() * normal_matrix(n) * s.uhat[f];
        ru += g * tau * s.uhat[f];
        rp -= g * n.dot(s.uhat[f]);
      }
      ru -= g * s.phat[f] * n;
      rp += g * d.tau_p(f) * s.phat[f];
    }
    s.L[c] = -rl / mesh.cell_area(c);
    s.u[c] = ru / cd.a_u;
    s.p[c] = rp / cd.a_p;
  });
  return s;
}

SolutionState solve_stokes(const Discretization& d) {
  const SparseSystem sys = assemble_stokes(d);
  return recover_stokes_cells(d, solve_linear(sys));
}

}  // namespace hpfcfv
