#include "hpfcfv/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace hpfcfv {

std::string_view to_string(Riemann r) { return r == Riemann::LF ? "lf" : "hll"; }

std::string_view to_string(PressureConstraint c) { return c == PressureConstraint::None ? "none" : "zero_mean"; }

std::string_view to_string(Linearization l) { return l == Linearization::Lagged ? "lagged" : "exact"; }

Riemann parse_riemann(std::string_view text) {
  if (text == "lf" || text == "LF") return Riemann::LF;
  if (text == "hll" || text == "HLL") return Riemann::HLL;
  throw ConfigError("riemann must be lf or hll, got '" + std::string(text) + "'");
}

PressureConstraint parse_pressure_constraint(std::string_view text) {
  if (text == "none") return PressureConstraint::None;
  if (text == "zero_mean") return PressureConstraint::ZeroMean;
  throw ConfigError("pressure_constraint must be none or zero_mean, got '" + std::string(text) + "'");
}

Linearization parse_linearization(std::string_view text) {
  if (text == "lagged") return Linearization::Lagged;
  if (text == "exact") return Linearization::Exact;
  throw ConfigError("linearization must be lagged or exact, got '" + std::string(text) + "'");
}

void SolverConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " must be positive and finite");
  };
  positive(nu, "nu");
  positive(beta, "beta");
  positive(xi, "xi");
  positive(tau_p, "tau_p");
  positive(newton_tol, "newton_tol");
  if (newton_max_iter < 1) throw ConfigError("newton_max_iter must be at least 1");
  for (double t : tau_p_faces) positive(t, "per-face tau_p");
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size()) throw ConfigError("config key '" + key + "': '" + value + "' is not a number");
  return v;
}

int to_int(const std::string& key, const std::string& value) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw ConfigError("config key '" + key + "': '" + value + "' is not an integer");
  return v;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "on") return true;
  if (value == "false" || value == "0" || value == "off") return false;
  throw ConfigError("config key '" + key + "': '" + value + "' is not a boolean");
}

}  // namespace

void apply_config(std::istream& in, SolverConfig& cfg) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(std::string_view(stripped).substr(0, eq));
    const std::string value = trim(std::string_view(stripped).substr(eq + 1));
    if (key == "nu") cfg.nu = to_double(key, value);
    else if (key == "beta") cfg.beta = to_double(key, value);
    else if (key == "xi") cfg.xi = to_double(key, value);
    else if (key == "tau_p") cfg.tau_p = to_double(key, value);
    else if (key == "riemann") cfg.riemann = parse_riemann(value);
    else if (key == "newton_tol") cfg.newton_tol = to_double(key, value);
    else if (key == "newton_max_iter") cfg.newton_max_iter = to_int(key, value);
    else if (key == "pressure_constraint") cfg.pressure_constraint = parse_pressure_constraint(value);
    else if (key == "line_search") cfg.line_search = to_bool(key, value);
    else if (key == "linearization") cfg.linearization = parse_linearization(value);
    else throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
  }
  cfg.validate();
}

void apply_config_file(const std::string& path, SolverConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  apply_config(in, cfg);
}

void write_config(std::ostream& out, const SolverConfig& cfg) {
  std::ostringstream s;
  s.precision(17);
  s << "nu = " << cfg.nu << '\n'
    << "beta = " << cfg.beta << '\n'
    << "xi = " << cfg.xi << '\n'
    << "tau_p = " << cfg.tau_p << '\n'
    << "riemann = " << to_string(cfg.riemann) << '\n'
    << "newton_tol = " << cfg.newton_tol << '\n'
    << "newton_max_iter = " << cfg.newton_max_iter << '\n'
    << "pressure_constraint = " << to_string(cfg.pressure_constraint) << '\n'
    << "linearization = " << to_string(cfg.linearization) << '\n'
    << "line_search = " << (cfg.line_search ? "true" : "false") << '\n';
  out << s.str();
}

double tau_diffusive(const SolverConfig& cfg) { return cfg.beta * cfg.nu; }

double tau_convective(const SolverConfig& cfg, const Vec2& u_hat, const Vec2& n) {
  const double un = u_hat.dot(n);
  return cfg.riemann == Riemann::LF ? std::max(2.0 * std::abs(un), cfg.xi) : std::max(2.0 * un, cfg.xi);
}

Vec2 tau_convective_gradient(const SolverConfig& cfg, const Vec2& u_hat, const Vec2& n) {
  const double un = u_hat.dot(n);
  const double flux = cfg.riemann == Riemann::LF ? 2.0 * std::abs(un) : 2.0 * un;
  if (flux <= cfg.xi) return Vec2::Zero();
  return cfg.riemann == Riemann::LF ? Vec2(2.0 * (un < 0.0 ? -1.0 : 1.0) * n) : Vec2(2.0 * n);
}

double tau_total(const SolverConfig& cfg, const Vec2& u_hat, const Vec2& n, bool convection) {
  return convection ? tau_diffusive(cfg) + tau_convective(cfg, u_hat, n) : tau_diffusive(cfg);
}

}  // namespace hpfcfv
