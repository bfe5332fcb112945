#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>

namespace hpfcfv {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

/// Invalid user input: bad mesh parameters, inconsistent tags, malformed files.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Geometric failure such as an inverted cell after distortion.
class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Factorization or solve failure of a global linear system.
class LinearSolveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Nonlinear iteration failure (non-finite residual, linear failure mid-run).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Number of worker threads used by per-cell loops. 0 selects hardware concurrency.
void set_thread_count(unsigned n);
unsigned thread_count();

/// Runs fn(i) for i in [0, n). Calls for distinct i must not write shared state.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace hpfcfv
