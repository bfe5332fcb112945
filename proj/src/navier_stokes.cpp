#include "hpfcfv/navier_stokes.hpp"

#include <algorithm>

namespace hpfcfv {

namespace {

const Mat3& dev() {
  static const Mat3 D = deviatoric_operator(2);
  return D;
}

constexpr int kChunk = 2048;

}  // namespace

Mat6 CellBlocks::t_cell_cell() const {
  Vec6 diag;
  diag << area, area, area, a_u, a_u, a_p;
  return diag.asDiagonal();
}

Vec6 CellBlocks::solve_cell(const Vec6& rhs) const {
  Vec6 x;
  x.head<3>() = rhs.head<3>() / area;
  x.segment<2>(3) = rhs.segment<2>(3) / a_u;
  x[5] = rhs[5] / a_p;
  return x;
}

CellBlocks cell_jacobian(const Discretization& d, int c, const SolutionState& s, const std::vector<double>& tau) {
  const Mesh& mesh = d.mesh();
  const double nu = d.config().nu;
  const double tau_d = d.tau_d();
  const bool conv = d.convection();
  const bool exact = conv && d.config().linearization == Linearization::Exact;
  const int k = d.slots_per_cell();
  const auto faces = mesh.cell_faces(c);

  CellBlocks b;
  b.dofs = cell_dofs(mesh, d.dofs(), c);
  const int m = b.dofs.size;
  b.area = mesh.cell_area(c);
  b.r_face.setZero(m);
  b.t_cell_face.setZero(6, m);
  b.t_face_cell.setZero(m, 6);
  b.t_face_face.setZero(m, m);

  const Voigt& L = s.L[c];
  const Vec2& u = s.u[c];
  const double p = s.p[c];

  for (int j = 0; j < k; ++j) {
    const int f = faces[j];
    b.a_u += mesh.face(f).measure * tau[c * k + j];
    b.a_p += mesh.face(f).measure * d.tau_p(f);
  }

  Voigt r_L = b.area * L;
  Vec2 r_u = b.a_u * u - b.area * d.source(c);
  double r_p = b.a_p * p;

  for (int j = 0; j < k; ++j) {
    const int f = faces[j];
    const Face& face = mesh.face(f);
    const double g = face.measure;
    const Vec2 n = mesh.outward_normal(c, j);
    const NormalMatrix N = normal_matrix(n);
    const double t = tau[c * k + j];
    const double tp = d.tau_p(f);
    const double ph = s.phat[f];
    const int pj = b.dofs.phat_local[j];
    const int uj = b.dofs.uhat_local[j];
    const FaceRole role = d.role(f);

    // Local problem.
    const Vec2 w = d.face_velocity(f, s);
    const double wn = n.dot(w);
    r_L += g * dev() * N * w;
    r_u -= g * (t - (conv ? wn : 0.0)) * w;
    r_u += g * ph * n;
    r_p += g * wn - g * tp * ph;

    b.t_cell_face.block<2, 1>(3, pj) = g * n;
    b.t_cell_face(5, pj) = -g * tp;
    if (uj >= 0) {
      b.t_cell_face.block<3, 2>(0, uj) = g * dev() * N;
      Mat2 dconv = t * Mat2::Identity();
      if (conv) dconv -= wn * Mat2::Identity() + w * n.transpose();
      b.t_cell_face.block<2, 2>(3, uj) = -g * dconv;
      b.t_cell_face.block<1, 2>(5, uj) = g * n.transpose();
      if (exact) b.t_cell_face.block<2, 2>(3, uj) += g * (u - w) * tau_convective_gradient(d.config(), w, n).transpose();
    }

    // Global problem: mass row on every face.
    b.r_face[pj] = g * tp * (p - ph);
    b.t_face_cell(pj, 5) = g * tp;
    b.t_face_face(pj, pj) = -g * tp;

    if (uj < 0) continue;
    const Vec2 traction_part = nu * (N.transpose() * L);
    switch (role) {
      case FaceRole::Interior: {
        b.r_face.segment<2>(uj) = g * (traction_part + t * (u - w));
        b.t_face_cell.block<2, 3>(uj, 0) = g * nu * N.transpose();
        b.t_face_cell.block<2, 2>(uj, 3) = g * t * Mat2::Identity();
        b.t_face_face.block<2, 2>(uj, uj) = -g * t * Mat2::Identity();
        if (exact) b.t_face_face.block<2, 2>(uj, uj) += g * (u - w) * tau_convective_gradient(d.config(), w, n).transpose();
        if (d.full_interior_flux()) {
          b.r_face.segment<2>(uj) += g * (ph * n + wn * w);
          b.t_face_face.block<2, 1>(uj, pj) += g * n;
          b.t_face_face.block<2, 2>(uj, uj) += g * (wn * Mat2::Identity() + w * n.transpose());
        }
        break;
      }
      case FaceRole::Neumann: {
        b.r_face.segment<2>(uj) = g * (ph * n + traction_part + tau_d * (u - w) + d.traction(f));
        b.t_face_cell.block<2, 3>(uj, 0) = g * nu * N.transpose();
        b.t_face_cell.block<2, 2>(uj, 3) = g * tau_d * Mat2::Identity();
        b.t_face_face.block<2, 2>(uj, uj) = -g * tau_d * Mat2::Identity();
        b.t_face_face.block<2, 1>(uj, pj) = g * n;
        break;
      }
      case FaceRole::Symmetry: {
        const Vec2& tg = face.tangent;
        b.r_face[uj] = g * tg.dot(traction_part + tau_d * (u - w));
        b.r_face[uj + 1] = g * n.dot(w);
        b.t_face_cell.block<1, 3>(uj, 0) = g * nu * (N * tg).transpose();
        b.t_face_cell.block<1, 2>(uj, 3) = g * tau_d * tg.transpose();
        b.t_face_face.block<1, 2>(uj, uj) = -g * tau_d * tg.transpose();
        b.t_face_face.block<1, 2>(uj + 1, uj) = g * n.transpose();
        break;
      }
      case FaceRole::Dirichlet:
        break;
    }
  }
  b.r_cell << r_L, r_u, r_p;
  return b;
}

LocalResiduals local_residuals(const Discretization& d, int c, const SolutionState& s,
                               const std::vector<double>& tau) {
  const CellBlocks b = cell_jacobian(d, c, s, tau);
  LocalResiduals r;
  r.r_L = b.r_cell.head<3>();
  r.r_u = b.r_cell.segment<2>(3);
  r.r_p = b.r_cell[5];
  return r;
}

FaceResiduals global_residuals(const Discretization& d, int f, const SolutionState& s,
                               const std::vector<double>& tau) {
  const Face& face = d.mesh().face(f);
  FaceResiduals r;
  for (int c : {face.owner, face.neighbour}) {
    if (c < 0) continue;
    const int j = c == face.owner ? face.owner_local : face.neighbour_local;
    const CellBlocks b = cell_jacobian(d, c, s, tau);
    if (const int uj = b.dofs.uhat_local[j]; uj >= 0) r.r_uhat += b.r_face.segment<2>(uj);
    r.r_phat += b.r_face[b.dofs.phat_local[j]];
  }
  return r;
}

CondensedCell condense(const CellBlocks& b) {
  const int m = b.dofs.size;
  // T_UU^-1 applied column-wise to T_UL.
  Eigen::Matrix<double, 6, Eigen::Dynamic, 0, 6, CellDofs::kMax> inv_t(6, m);
  for (int col = 0; col < m; ++col) inv_t.col(col) = b.solve_cell(b.t_cell_face.col(col));
  CondensedCell out;
  out.K = b.t_face_face - b.t_face_cell * inv_t;
  out.F = -b.r_face + b.t_face_cell * b.solve_cell(b.r_cell);
  return out;
}

Vec6 recover_cell_increments(const CellBlocks& b, const LocalVector& delta_faces) {
  return b.solve_cell(-b.r_cell - b.t_cell_face * delta_faces);
}

LocalVector lagrange_row(const CellBlocks& b) { return -(b.area / b.a_p) * b.t_cell_face.row(5).transpose(); }

Eigen::VectorXd residual_vector(const Discretization& d, const SolutionState& s, const std::vector<double>& tau) {
  const Mesh& mesh = d.mesh();
  const DofMap& dofs = d.dofs();
  const int nc = mesh.n_cells();
  const int offset = 6 * nc;
  Eigen::VectorXd r = Eigen::VectorXd::Zero(offset + dofs.size());
  std::vector<CellBlocks> blocks(kChunk);
  double mean_pressure = 0.0;
  for (int begin = 0; begin < nc; begin += kChunk) {
    const int count = std::min(kChunk, nc - begin);
    parallel_for(count, [&](std::size_t i) { blocks[i] = cell_jacobian(d, begin + static_cast<int>(i), s, tau); });
    for (int i = 0; i < count; ++i) {
      const CellBlocks& b = blocks[i];
      const int c = begin + i;
      r.segment<6>(6 * c) = b.r_cell;
      for (int a = 0; a < b.dofs.size; ++a) r[offset + b.dofs.global[a]] += b.r_face[a];
      if (d.lagrange()) {
        const LocalVector row = lagrange_row(b);
        for (int a = 0; a < b.dofs.size; ++a) r[offset + b.dofs.global[a]] += row[a] * s.lambda;
        mean_pressure += b.area * s.p[c];
      }
    }
  }
  if (d.lagrange()) r[offset + dofs.lambda()] = mean_pressure;
  return r;
}

SparseSystem newton_system(const Discretization& d, const SolutionState& s, const std::vector<double>& tau) {
  const Mesh& mesh = d.mesh();
  const int nc = mesh.n_cells();
  SparseSystem sys;
  sys.dofs = d.dofs();
  sys.matrix = d.pattern();
  sys.rhs = Eigen::VectorXd::Zero(sys.dofs.size());
  const int lam = sys.dofs.lambda();
  double lambda_rhs = 0.0;

  std::vector<CellBlocks> blocks(kChunk);
  std::vector<CondensedCell> condensed(kChunk);
  for (int begin = 0; begin < nc; begin += kChunk) {
    const int count = std::min(kChunk, nc - begin);
    parallel_for(count, [&](std::size_t i) {
      blocks[i] = cell_jacobian(d, begin + static_cast<int>(i), s, tau);
      condensed[i] = condense(blocks[i]);
    });
    for (int i = 0; i < count; ++i) {
      const CellBlocks& b = blocks[i];
      const CondensedCell& ke = condensed[i];
      const auto& gl = b.dofs.global;
      for (int col = 0; col < b.dofs.size; ++col)
        for (int row = 0; row < b.dofs.size; ++row) add_entry(sys.matrix, gl[row], gl[col], ke.K(row, col));
      for (int row = 0; row < b.dofs.size; ++row) sys.rhs[gl[row]] += ke.F[row];
      if (lam >= 0) {
        const int c = begin + i;
        const LocalVector r = lagrange_row(b);
        for (int a = 0; a < b.dofs.size; ++a) {
          add_entry(sys.matrix, gl[a], lam, r[a]);
          add_entry(sys.matrix, lam, gl[a], r[a]);
          sys.rhs[gl[a]] -= r[a] * s.lambda;
        }
        lambda_rhs += -b.area * s.p[c] + (b.area / b.a_p) * b.r_cell[5];
      }
    }
  }
  if (lam >= 0) sys.rhs[lam] = lambda_rhs;
  return sys;
}

SolutionState apply_increment(const Discretization& d, const SolutionState& s, const std::vector<double>& tau,
                              const Eigen::VectorXd& delta_faces, double step) {
  const Mesh& mesh = d.mesh();
  SolutionState next = s;
  d.unpack_faces(d.pack_faces(s) + step * delta_faces, next);
  parallel_for(mesh.n_cells(), [&](std::size_t i) {
    const int c = static_cast<int>(i);
    const CellBlocks b = cell_jacobian(d, c, s, tau);
    LocalVector local(b.dofs.size);
    for (int a = 0; a < b.dofs.size; ++a) local[a] = delta_faces[b.dofs.global[a]];
    const Vec6 du = step * recover_cell_increments(b, local);
    next.L[c] += du.head<3>();
    next.u[c] += du.segment<2>(3);
    next.p[c] += du[5];
  });
  return next;
}

}  // namespace hpfcfv
