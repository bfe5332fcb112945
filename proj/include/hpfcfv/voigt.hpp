#pragma once

#include "hpfcfv/common.hpp"

#include <Eigen/Core>

namespace hpfcfv {

/// Symmetric 2x2 tensor stored as [T11, T22, T12].
using Voigt = Eigen::Vector3d;
using NormalMatrix = Eigen::Matrix<double, 3, 2>;

/// Rows [n1, 0], [0, n2], [n2, n1]. Throws std::invalid_argument for a non-unit n.
NormalMatrix normal_matrix(const Vec2& n);

/// Deviatoric operator for the given spatial dimension; only 2 is supported.
Mat3 deviatoric_operator(int n_sd = 2);

/// D_V N_V(n) v, the Voigt image of v n^T + n v^T - (2/3)(n . v) I.
Voigt strain_rate_contribution(const Vec2& n, const Vec2& v);

/// nu N_V(n)^T L, i.e. nu L n for the dense symmetric L.
Vec2 traction(const Voigt& L, const Vec2& n, double nu);

Mat2 to_dense(const Voigt& v);
Voigt to_voigt(const Mat2& t);

}  // namespace hpfcfv
