#pragma once

#include "hpfcfv/common.hpp"

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace hpfcfv {

enum class Riemann { LF, HLL };
enum class PressureConstraint { None, ZeroMean };
/// Newton linearization of tau^a: frozen at the previous iterate, or differentiated.
enum class Linearization { Lagged, Exact };

std::string_view to_string(Riemann r);
std::string_view to_string(PressureConstraint c);
std::string_view to_string(Linearization l);
Riemann parse_riemann(std::string_view text);
PressureConstraint parse_pressure_constraint(std::string_view text);
Linearization parse_linearization(std::string_view text);

struct SolverConfig {
  double nu = 1.0;
  double beta = 10.0;
  double xi = 5e-2;
  double tau_p = 1e-1;
  Riemann riemann = Riemann::HLL;
  double newton_tol = 1e-10;
  int newton_max_iter = 30;
  PressureConstraint pressure_constraint = PressureConstraint::None;
  Linearization linearization = Linearization::Exact;
  bool line_search = true;
  /// Optional per-face override of tau_p (empty: use tau_p everywhere).
  std::vector<double> tau_p_faces;

  /// Throws ConfigError when a parameter is out of range.
  void validate() const;
  double tau_p_at(int face) const { return tau_p_faces.empty() ? tau_p : tau_p_faces[face]; }
};

/// Applies `key = value` lines onto cfg. Blank lines and '#' comments are ignored.
void apply_config(std::istream& in, SolverConfig& cfg);
void apply_config_file(const std::string& path, SolverConfig& cfg);
void write_config(std::ostream& out, const SolverConfig& cfg);

// Face stabilization coefficients, all isotropic (scalar times identity).
double tau_diffusive(const SolverConfig& cfg);
double tau_convective(const SolverConfig& cfg, const Vec2& u_hat, const Vec2& n);
/// Gradient of tau_convective with respect to u_hat (zero on the cut-off branch).
Vec2 tau_convective_gradient(const SolverConfig& cfg, const Vec2& u_hat, const Vec2& n);
/// tau_d + tau_a, or tau_d alone when convection is off.
double tau_total(const SolverConfig& cfg, const Vec2& u_hat, const Vec2& n, bool convection = true);

}  // namespace hpfcfv
