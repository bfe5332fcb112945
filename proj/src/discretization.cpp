#include "hpfcfv/discretization.hpp"

namespace hpfcfv {

SolutionState SolutionState::zeros(const Mesh& mesh) {
  SolutionState s;
  s.L.assign(mesh.n_cells(), Voigt::Zero());
  s.u.assign(mesh.n_cells(), Vec2::Zero());
  s.p.assign(mesh.n_cells(), 0.0);
  s.uhat.assign(mesh.n_faces(), Vec2::Zero());
  s.phat.assign(mesh.n_faces(), 0.0);
  return s;
}

bool SolutionState::matches(const Mesh& mesh) const {
  const auto nc = static_cast<std::size_t>(mesh.n_cells());
  const auto nf = static_cast<std::size_t>(mesh.n_faces());
  return L.size() == nc && u.size() == nc && p.size() == nc && uhat.size() == nf && phat.size() == nf;
}

Discretization::Discretization(Mesh mesh, SolverConfig cfg, const CaseDefinition& kase, bool convection)
    : Discretization(std::move(mesh), std::move(cfg), kase, convection, true) {}

Discretization Discretization::unconstrained(Mesh mesh, SolverConfig cfg, const CaseDefinition& kase,
                                             bool convection) {
  return Discretization(std::move(mesh), std::move(cfg), kase, convection, false);
}

Discretization::Discretization(Mesh mesh, SolverConfig cfg, const CaseDefinition& kase, bool convection,
                               bool allow_lagrange)
    : mesh_(std::move(mesh)), cfg_(std::move(cfg)), convection_(convection) {
  cfg_.nu = kase.nu;
  cfg_.validate();
  if (!cfg_.tau_p_faces.empty() && static_cast<int>(cfg_.tau_p_faces.size()) != mesh_.n_faces())
    throw ConfigError("per-face tau_p has " + std::to_string(cfg_.tau_p_faces.size()) + " entries for " +
                      std::to_string(mesh_.n_faces()) + " faces");
  const int nf = mesh_.n_faces();
  roles_.assign(nf, FaceRole::Interior);
  face_data_.assign(nf, Vec2::Zero());
  for (int f = 0; f < nf; ++f) {
    const Face& face = mesh_.face(f);
    if (!face.is_boundary()) continue;
    const auto kind = mesh_.boundary_kind(f);
    if (!kind) throw ConfigError("boundary face " + std::to_string(f) + " has no boundary tag");
    switch (*kind) {
      case BoundaryKind::Dirichlet:
        roles_[f] = FaceRole::Dirichlet;
        if (!kase.dirichlet) throw ConfigError("case '" + kase.name + "' has no Dirichlet datum");
        face_data_[f] = kase.dirichlet(face.barycentre);
        break;
      case BoundaryKind::Neumann:
        roles_[f] = FaceRole::Neumann;
        if (!kase.traction) throw ConfigError("case '" + kase.name + "' has no Neumann datum");
        face_data_[f] = kase.traction(face.barycentre, face.normal);
        break;
      case BoundaryKind::Symmetry:
        roles_[f] = FaceRole::Symmetry;
        break;
    }
  }
  sources_.assign(mesh_.n_cells(), Vec2::Zero());
  if (kase.source)
    for (int c = 0; c < mesh_.n_cells(); ++c) sources_[c] = kase.source(mesh_.cell_centroid(c));

  const bool lagrange = allow_lagrange && cfg_.pressure_constraint == PressureConstraint::ZeroMean;
  if (allow_lagrange && mesh_.pure_dirichlet() && !lagrange)
    throw ConfigError("pure Dirichlet problem: the pressure is only defined up to a constant, "
                      "set pressure_constraint = zero_mean");
  dofs_ = DofMap(mesh_, lagrange);
  pattern_ = structural_matrix(mesh_, dofs_);
}

Vec2 Discretization::face_velocity(int f, const SolutionState& s) const {
  return roles_[f] == FaceRole::Dirichlet ? face_data_[f] : s.uhat[f];
}

std::vector<double> Discretization::stabilization(const SolutionState& lagged) const {
  const int k = slots_per_cell();
  std::vector<double> tau(static_cast<std::size_t>(mesh_.n_cells()) * k);
  for (int c = 0; c < mesh_.n_cells(); ++c) {
    const auto faces = mesh_.cell_faces(c);
    for (int j = 0; j < k; ++j) {
      tau[c * k + j] = tau_total(cfg_, face_velocity(faces[j], lagged), mesh_.outward_normal(c, j), convection_);
    }
  }
  return tau;
}

Eigen::VectorXd Discretization::pack_faces(const SolutionState& s) const {
  Eigen::VectorXd x(dofs_.size());
  for (int f = 0; f < mesh_.n_faces(); ++f) {
    if (const int g = dofs_.uhat(f); g >= 0) x.segment<2>(g) = s.uhat[f];
    x[dofs_.phat(f)] = s.phat[f];
  }
  if (lagrange()) x[dofs_.lambda()] = s.lambda;
  return x;
}

void Discretization::unpack_faces(const Eigen::VectorXd& x, SolutionState& s) const {
  for (int f = 0; f < mesh_.n_faces(); ++f) {
    const int g = dofs_.uhat(f);
    s.uhat[f] = g >= 0 ? Vec2(x.segment<2>(g)) : face_data_[f];
    s.phat[f] = x[dofs_.phat(f)];
  }
  s.lambda = lagrange() ? x[dofs_.lambda()] : 0.0;
}

}  // namespace hpfcfv
