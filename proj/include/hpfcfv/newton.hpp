#pragma once

#include "hpfcfv/discretization.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace hpfcfv {

struct NewtonReport {
  int iterations = 0;                     // Newton updates performed
  std::vector<double> residuals;          // full residual norm, initial state first
  std::vector<double> linear_residuals;   // ||K dx - F|| per update
  std::vector<double> steps;              // step length per update
  bool converged = false;
  double wall_seconds = 0.0;
  std::string failure;                    // empty unless the iteration broke down
};

struct NewtonResult {
  SolutionState state;  // last good state
  NewtonReport report;
};

enum class InitialGuess { Zero, StokesSolve };

/// StokesSolve for Re = 1/nu >= 100, Zero otherwise.
InitialGuess default_initial_guess(const SolverConfig& cfg);

SolutionState initial_guess(const Discretization& d, InitialGuess strategy);

/// Newton on the condensed system. A step is halved while it produces a
/// non-finite residual and, with cfg.line_search, until the residual norm
/// decreases; if no halving decreases it, the trial with the smallest residual is taken.
NewtonResult newton_solve(const Discretization& d, const SolutionState& initial);

/// `iter,residual_norm` CSV.
void write_newton_history(std::ostream& out, const NewtonReport& report);

}  // namespace hpfcfv
