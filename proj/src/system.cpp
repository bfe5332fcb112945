#include "hpfcfv/system.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

extern "C" {
#include <umfpack.h>
}

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace hpfcfv {

DofMap::DofMap(const Mesh& mesh, bool lagrange) : uhat_(mesh.n_faces(), -1), lagrange_(lagrange) {
  for (int f = 0; f < mesh.n_faces(); ++f) {
    if (!mesh.is_dirichlet(f)) {
      uhat_[f] = n_uhat_;
      n_uhat_ += 2;
    }
  }
}

CellDofs cell_dofs(const Mesh& mesh, const DofMap& dofs, int c) {
  CellDofs d;
  const auto faces = mesh.cell_faces(c);
  d.n_faces = static_cast<int>(faces.size());
  for (int j = 0; j < d.n_faces; ++j) {
    const int g = dofs.uhat(faces[j]);
    if (g < 0) continue;
    d.uhat_local[j] = d.size;
    d.global[d.size++] = g;
    d.global[d.size++] = g + 1;
  }
  for (int j = 0; j < d.n_faces; ++j) {
    d.phat_local[j] = d.size;
    d.global[d.size++] = dofs.phat(faces[j]);
  }
  return d;
}

SparseMatrix structural_matrix(const Mesh& mesh, const DofMap& dofs) {
  const int n = dofs.size();
  const int n_lambda_free = dofs.has_lagrange() ? n - 1 : n;
  std::vector<int> col_face(n, -1);
  for (int f = 0; f < mesh.n_faces(); ++f) {
    if (dofs.uhat(f) >= 0) col_face[dofs.uhat(f)] = col_face[dofs.uhat(f) + 1] = f;
    col_face[dofs.phat(f)] = f;
  }

  auto coupled_faces = [&](int f, std::vector<int>& out) {
    out.clear();
    const Face& face = mesh.face(f);
    for (int c : {face.owner, face.neighbour}) {
      if (c < 0) continue;
      for (int g : mesh.cell_faces(c)) out.push_back(g);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  };

  std::vector<int> outer(n + 1, 0);
  std::vector<int> inner;
  inner.reserve(static_cast<std::size_t>(n) * 12);
  std::vector<int> near;
  for (int col = 0; col < n_lambda_free; ++col) {
    coupled_faces(col_face[col], near);
    for (int g : near)
      if (dofs.uhat(g) >= 0) inner.insert(inner.end(), {dofs.uhat(g), dofs.uhat(g) + 1});
    for (int g : near) inner.push_back(dofs.phat(g));
    if (dofs.has_lagrange()) inner.push_back(dofs.lambda());
    outer[col + 1] = static_cast<int>(inner.size());
  }
  if (dofs.has_lagrange()) {
    for (int row = 0; row < n_lambda_free; ++row) inner.push_back(row);
    outer[n] = static_cast<int>(inner.size());
  }

  SparseMatrix m(n, n);
  m.resizeNonZeros(static_cast<Eigen::Index>(inner.size()));
  std::copy(outer.begin(), outer.end(), m.outerIndexPtr());
  std::copy(inner.begin(), inner.end(), m.innerIndexPtr());
  std::fill(m.valuePtr(), m.valuePtr() + inner.size(), 0.0);
  return m;
}

void add_entry(SparseMatrix& m, int row, int col, double v) {
  const int* begin = m.innerIndexPtr() + m.outerIndexPtr()[col];
  const int* end = m.innerIndexPtr() + m.outerIndexPtr()[col + 1];
  const int* it = std::lower_bound(begin, end, row);
  if (it == end || *it != row)
    throw std::logic_error("add_entry: (" + std::to_string(row) + ", " + std::to_string(col) + ") not in pattern");
  m.valuePtr()[it - m.innerIndexPtr()] += v;
}

struct LinearSolver::Impl {
  void* symbolic = nullptr;
  void* numeric = nullptr;
  std::vector<int> outer, inner;  // pattern the symbolic analysis belongs to
  const SparseMatrix* matrix = nullptr;
  int n = 0;

  ~Impl() { release(); }
  void release() {
    if (numeric) umfpack_di_free_numeric(&numeric);
    if (symbolic) umfpack_di_free_symbolic(&symbolic);
    numeric = symbolic = nullptr;
  }
};

LinearSolver::LinearSolver() : impl_(std::make_unique<Impl>()) {}
LinearSolver::~LinearSolver() = default;

void LinearSolver::factorize(const SparseMatrix& a) {
  if (a.rows() != a.cols()) throw LinearSolveError("matrix is not square");
  if (!a.isCompressed()) throw LinearSolveError("matrix must be compressed");
  Impl& s = *impl_;
  const int n = static_cast<int>(a.rows());
  const int nnz = static_cast<int>(a.nonZeros());
  const int* ap = a.outerIndexPtr();
  const int* ai = a.innerIndexPtr();
  const bool same_pattern = s.symbolic && s.n == n && static_cast<int>(s.inner.size()) == nnz &&
                            std::equal(ap, ap + n + 1, s.outer.begin()) && std::equal(ai, ai + nnz, s.inner.begin());
  double control[UMFPACK_CONTROL];
  double info[UMFPACK_INFO];
  umfpack_di_defaults(control);
  if (!same_pattern) {
    s.release();
    s.n = n;
    s.outer.assign(ap, ap + n + 1);
    s.inner.assign(ai, ai + nnz);
    const int status = umfpack_di_symbolic(n, n, ap, ai, a.valuePtr(), &s.symbolic, control, info);
    if (status != UMFPACK_OK) {
      s.release();
      throw LinearSolveError("UMFPACK symbolic analysis failed with status " + std::to_string(status));
    }
  } else if (s.numeric) {
    umfpack_di_free_numeric(&s.numeric);
  }
  const int status = umfpack_di_numeric(ap, ai, a.valuePtr(), s.symbolic, &s.numeric, control, info);
  rcond_ = info[UMFPACK_RCOND];
  if (status == UMFPACK_WARNING_singular_matrix || (status == UMFPACK_OK && !(rcond_ > 1e-15))) {
    // Report the original column of the smallest pivot.
    std::vector<int> q(n);
    std::vector<double> diag(n);
    int do_recip = 0;
    umfpack_di_get_numeric(nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, q.data(), diag.data(),
                           &do_recip, nullptr, s.numeric);
    int k = 0;
    for (int i = 1; i < n; ++i)
      if (std::abs(diag[i]) < std::abs(diag[k])) k = i;
    std::ostringstream msg;
    msg << "singular matrix: zero pivot at column " << q[k] << " (pivot " << diag[k] << ", rcond " << rcond_ << ")";
    umfpack_di_free_numeric(&s.numeric);
    throw LinearSolveError(msg.str());
  }
  if (status != UMFPACK_OK) {
    umfpack_di_free_numeric(&s.numeric);
    throw LinearSolveError("UMFPACK numeric factorization failed with status " + std::to_string(status) +
                           (status == UMFPACK_ERROR_out_of_memory ? " (out of memory)" : ""));
  }
  s.matrix = &a;
}

Eigen::VectorXd LinearSolver::solve(const Eigen::VectorXd& b) const {
  const Impl& s = *impl_;
  if (!s.numeric) throw LinearSolveError("solve called before a successful factorization");
  if (b.size() != s.n) throw LinearSolveError("right-hand side has wrong size");
  Eigen::VectorXd x(s.n);
  double control[UMFPACK_CONTROL];
  double info[UMFPACK_INFO];
  umfpack_di_defaults(control);
  const SparseMatrix& a = *s.matrix;
  const int status = umfpack_di_solve(UMFPACK_A, a.outerIndexPtr(), a.innerIndexPtr(), a.valuePtr(), x.data(),
                                      b.data(), s.numeric, control, info);
  if (status != UMFPACK_OK) throw LinearSolveError("UMFPACK solve failed with status " + std::to_string(status));
  return x;
}

Eigen::VectorXd solve_linear(const SparseMatrix& a, const Eigen::VectorXd& b) {
  LinearSolver solver;
  solver.factorize(a);
  Eigen::VectorXd x = solver.solve(b);
  const double residual = (a * x - b).norm();
  if (!(residual <= 1e-10 * (1.0 + b.norm()))) {
    std::ostringstream msg;
    msg << "linear solve residual " << residual << " exceeds tolerance (rcond " << solver.rcond() << ")";
    throw LinearSolveError(msg.str());
  }
  return x;
}

Eigen::VectorXd solve_linear(const SparseSystem& system) { return solve_linear(system.matrix, system.rhs); }

SpectrumSummary spectrum(const SparseMatrix& a, int cap, double imag_tol) {
  if (a.rows() > cap) {
    throw ConfigError("spectrum: dimension " + std::to_string(a.rows()) + " exceeds the dense cap " +
                      std::to_string(cap) + "; use a coarser mesh");
  }
  const Eigen::MatrixXd dense(a);
  Eigen::EigenSolver<Eigen::MatrixXd> solver(dense, false);
  if (solver.info() != Eigen::Success) throw LinearSolveError("dense eigensolver did not converge");
  SpectrumSummary s;
  const auto& ev = solver.eigenvalues();
  s.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  std::sort(s.eigenvalues.begin(), s.eigenvalues.end(), [](auto x, auto y) {
    return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
  });
  if (s.eigenvalues.empty()) return s;
  s.min_real = s.eigenvalues.front().real();
  s.max_real = s.eigenvalues.back().real();
  int n_complex = 0;
  for (const auto& z : s.eigenvalues) {
    s.max_abs_imag = std::max(s.max_abs_imag, std::abs(z.imag()));
    if (std::abs(z.imag()) > imag_tol) ++n_complex;
  }
  s.complex_fraction = static_cast<double>(n_complex) / static_cast<double>(s.eigenvalues.size());
  return s;
}

void write_matrix(std::ostream& out, const SparseMatrix& a) {
  std::ostringstream s;
  s.precision(17);
  for (int col = 0; col < a.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(a, col); it; ++it) s << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
  out << s.str();
}

}  // namespace hpfcfv
