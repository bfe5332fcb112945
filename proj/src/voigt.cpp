#include "hpfcfv/voigt.hpp"

#include <cmath>
#include <string>

namespace hpfcfv {

NormalMatrix normal_matrix(const Vec2& n) {
  if (std::abs(n.norm() - 1.0) > 1e-10) throw std::invalid_argument("normal_matrix: normal is not unit length");
  NormalMatrix N;
  N << n.x(), 0.0,
       0.0, n.y(),
       n.y(), n.x();
  return N;
}

Mat3 deviatoric_operator(int n_sd) {
  if (n_sd != 2) throw std::invalid_argument("deviatoric_operator: dimension " + std::to_string(n_sd) + " not supported");
  Mat3 D;
  D << 4.0 / 3.0, -2.0 / 3.0, 0.0,
       -2.0 / 3.0, 4.0 / 3.0, 0.0,
       0.0, 0.0, 1.0;
  return D;
}

Voigt strain_rate_contribution(const Vec2& n, const Vec2& v) {
  static const Mat3 D = deviatoric_operator(2);
  return D * normal_matrix(n) * v;
}

Vec2 traction(const Voigt& L, const Vec2& n, double nu) { return nu * (normal_matrix(n).transpose() * L); }

Mat2 to_dense(const Voigt& v) {
  Mat2 t;
  t << v[0], v[2], v[2], v[1];
  return t;
}

Voigt to_voigt(const Mat2& t) { return {t(0, 0), t(1, 1), 0.5 * (t(0, 1) + t(1, 0))}; }

}  // namespace hpfcfv
