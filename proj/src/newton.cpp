#include "hpfcfv/newton.hpp"

#include "hpfcfv/navier_stokes.hpp"
#include "hpfcfv/stokes.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace hpfcfv {

namespace {
constexpr int kMaxHalvings = 10;
}

InitialGuess default_initial_guess(const SolverConfig& cfg) {
  return 1.0 / cfg.nu >= 100.0 ? InitialGuess::StokesSolve : InitialGuess::Zero;
}

SolutionState initial_guess(const Discretization& d, InitialGuess strategy) {
  if (strategy == InitialGuess::StokesSolve) return solve_stokes(d);
  SolutionState s = SolutionState::zeros(d.mesh());
  return s;
}

NewtonResult newton_solve(const Discretization& d, const SolutionState& initial) {
  if (!initial.matches(d.mesh())) throw ConfigError("initial state does not match the mesh");
  const auto start = std::chrono::steady_clock::now();
  const SolverConfig& cfg = d.config();
  NewtonResult out;
  NewtonReport& rep = out.report;

  SolutionState state = initial;
  d.unpack_faces(d.pack_faces(state), state);
  std::vector<double> tau = d.stabilization(state);
  double norm = residual_vector(d, state, tau).norm();
  rep.residuals.push_back(norm);
  LinearSolver solver;

  auto finish = [&] {
    out.state = std::move(state);
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return std::move(out);
  };

  if (!std::isfinite(norm)) {
    rep.failure = "initial residual is not finite";
    return finish();
  }
  while (norm > cfg.newton_tol) {
    if (rep.iterations >= cfg.newton_max_iter) {
      rep.failure = "no convergence after " + std::to_string(rep.iterations) + " iterations";
      return finish();
    }
    Eigen::VectorXd dx;
    try {
      const SparseSystem sys = newton_system(d, state, tau);
      solver.factorize(sys.matrix);
      dx = solver.solve(sys.rhs);
      rep.linear_residuals.push_back((sys.matrix * dx - sys.rhs).norm());
    } catch (const LinearSolveError& e) {
      rep.failure = std::string("linear solve failed: ") + e.what();
      return finish();
    }

    // Step halving: always on a non-finite residual, and on insufficient
    // decrease when the line search is enabled. Without sufficient decrease
    // the trial with the smallest residual is taken.
    double step = 1.0;
    double best_step = 0.0;
    double best_norm = std::numeric_limits<double>::infinity();
    SolutionState best;
    std::vector<double> best_tau;
    for (int halving = 0; halving <= kMaxHalvings; ++halving, step *= 0.5) {
      SolutionState next = apply_increment(d, state, tau, dx, step);
      std::vector<double> next_tau = d.stabilization(next);
      const double next_norm = residual_vector(d, next, next_tau).norm();
      if (!std::isfinite(next_norm)) continue;
      const bool decrease = next_norm <= (1.0 - 1e-4 * step) * norm;
      if (next_norm < best_norm) {
        best_norm = next_norm;
        best_step = step;
        best = std::move(next);
        best_tau = std::move(next_tau);
      }
      if (!cfg.line_search || decrease) break;
    }
    if (!std::isfinite(best_norm)) {
      rep.failure = "non-finite residual after " + std::to_string(kMaxHalvings) + " step halvings";
      return finish();
    }
    step = best_step;
    state = std::move(best);
    tau = std::move(best_tau);
    norm = best_norm;
    rep.steps.push_back(step);
    ++rep.iterations;
    rep.residuals.push_back(norm);
  }
  rep.converged = true;
  return finish();
}

void write_newton_history(std::ostream& out, const NewtonReport& report) {
  std::ostringstream s;
  s.precision(17);
  s << "iter,residual_norm\n";
  for (std::size_t i = 0; i < report.residuals.size(); ++i) s << i << ',' << report.residuals[i] << '\n';
  out << s.str();
}

}  // namespace hpfcfv
