#include "hpfcfv/cases.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace hpfcfv {

namespace {

constexpr double kPi = std::numbers::pi;

bool near(double a, double b) { return std::abs(a - b) < 1e-10; }

}  // namespace

CaseDefinition synthetic_stokes() {
  static constexpr double a = 2.0 * kPi;
  static constexpr double nu = 1.0;
  CaseDefinition c;
  c.name = "stokes-synthetic";
  c.nu = nu;
  c.convection = false;
  c.exact_velocity = [](const Vec2& x) {
    return Vec2((1.0 - std::cos(a * x.x())) * std::sin(a * x.y()), -std::sin(a * x.x()) * (1.0 - std::cos(a * x.y())));
  };
  c.exact_pressure = [](const Vec2& x) { return std::cos(kPi * x.x()) + std::cos(kPi * x.y()); };
  c.exact_L = [](const Vec2& x) {
    const double e11 = 2.0 * a * std::sin(a * x.x()) * std::sin(a * x.y());
    const double e12 = a * (std::cos(a * x.y()) - std::cos(a * x.x()));
    return Voigt(-e11, e11, -e12);
  };
  c.source = [](const Vec2& x) {
    const double sx = std::sin(a * x.x()), cx = std::cos(a * x.x());
    const double sy = std::sin(a * x.y()), cy = std::cos(a * x.y());
    return Vec2(-kPi * std::sin(kPi * x.x()) - nu * a * a * sy * (2.0 * cx - 1.0),
                -kPi * std::sin(kPi * x.y()) - nu * a * a * sx * (1.0 - 2.0 * cy));
  };
  c.dirichlet = c.exact_velocity;
  // g = sigma n with sigma = -p I + nu eps^d = -p I - nu L.
  c.traction = [p = c.exact_pressure, L = c.exact_L](const Vec2& x, const Vec2& n) {
    return Vec2(-p(x) * n - nu * (to_dense(L(x)) * n));
  };
  c.boundary = {
      {"bottom", [](const Vec2& b, const Vec2&) { return near(b.y(), 0.0); }, BoundaryKind::Neumann},
      {"walls", [](const Vec2& b, const Vec2&) { return !near(b.y(), 0.0); }, BoundaryKind::Dirichlet},
  };
  return c;
}

CaseDefinition couette(double inner_radius, double outer_radius, double omega_inner, double omega_outer) {
  if (!(inner_radius > 0.0) || !(inner_radius < outer_radius)) throw ConfigError("couette needs 0 < R_i < R_o");
  const double ri2 = inner_radius * inner_radius, ro2 = outer_radius * outer_radius;
  const double c1 = (omega_outer * ro2 - omega_inner * ri2) / (ro2 - ri2);
  const double c2 = (omega_inner - omega_outer) * ri2 * ro2 / (ro2 - ri2);
  auto p_radial = [c1, c2](double r) {
    return 0.5 * c1 * c1 * r * r + 2.0 * c1 * c2 * std::log(r) - 0.5 * c2 * c2 / (r * r);
  };
  const double shift = 1.0 - p_radial(outer_radius);

  CaseDefinition c;
  c.name = "couette";
  c.nu = 1.0;
  c.convection = true;
  c.exact_velocity = [c1, c2](const Vec2& x) {
    const double g = c1 + c2 / x.squaredNorm();
    return Vec2(-g * x.y(), g * x.x());
  };
  c.exact_pressure = [p_radial, shift](const Vec2& x) { return p_radial(x.norm()) + shift; };
  c.exact_L = [c2](const Vec2& x) {
    const double r = x.norm();
    const double dg_over_r = -2.0 * c2 / (r * r * r * r);
    const double xy = x.x() * x.y();
    // eps11 = -2xy g'/r, eps22 = 2xy g'/r, eps12 = (x^2 - y^2) g'/r.
    return Voigt(2.0 * xy * dg_over_r, -2.0 * xy * dg_over_r, -(x.x() * x.x() - x.y() * x.y()) * dg_over_r);
  };
  c.source = [](const Vec2&) { return Vec2(Vec2::Zero()); };
  c.dirichlet = c.exact_velocity;
  c.traction = [](const Vec2&, const Vec2&) { return Vec2(Vec2::Zero()); };
  const double mid = 0.5 * (inner_radius + outer_radius);
  c.boundary = {
      {"inner", [mid](const Vec2& b, const Vec2&) { return b.norm() < mid; }, BoundaryKind::Dirichlet},
      {"outer", [mid](const Vec2& b, const Vec2&) { return b.norm() >= mid; }, BoundaryKind::Dirichlet},
  };
  return c;
}

CaseDefinition cavity(double reynolds) {
  if (!(reynolds > 0.0)) throw ConfigError("cavity needs Re > 0");
  CaseDefinition c;
  c.name = "cavity";
  c.nu = 1.0 / reynolds;
  c.convection = true;
  c.dirichlet = [](const Vec2& x) { return x.y() > 1.0 - 1e-10 ? Vec2(1.0, 0.0) : Vec2(0.0, 0.0); };
  c.traction = [](const Vec2&, const Vec2&) { return Vec2(Vec2::Zero()); };
  c.source = [](const Vec2&) { return Vec2(Vec2::Zero()); };
  c.boundary = {{"walls", [](const Vec2&, const Vec2&) { return true; }, BoundaryKind::Dirichlet}};
  return c;
}

CaseDefinition case_by_name(const std::string& name, double reynolds) {
  if (name == "stokes-synthetic") return synthetic_stokes();
  if (name == "couette") return couette();
  if (name == "cavity") return cavity(reynolds);
  throw ConfigError("unknown case '" + name + "' (expected stokes-synthetic, couette or cavity)");
}

double geometric_ratio(int n_half, double h0, double half_length) {
  if (n_half < 1 || !(h0 > 0.0)) throw ConfigError("geometric grading needs n >= 1 and h0 > 0");
  auto filled = [&](double r) { return h0 * (std::pow(r, n_half) - 1.0) / (r - 1.0); };
  if (h0 * n_half >= half_length) throw ConfigError("first layer too thick: grading would need ratio <= 1");
  double lo = 1.0 + 1e-14, hi = 2.0;
  while (filled(hi) < half_length) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (filled(mid) < half_length ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Mesh graded_cavity_mesh(int level) {
  if (level < 1) throw ConfigError("graded cavity level must be >= 1");
  const int n = 24 << level;
  const int half = n / 2;
  const double h0 = 1e-2 / level;
  const double ratio = geometric_ratio(half, h0, 0.5);
  if (!(ratio > 1.0 && ratio < 1.5)) throw ConfigError("graded cavity: growth ratio out of (1, 1.5)");

  std::vector<double> coord(n + 1);
  coord[0] = 0.0;
  double h = h0;
  for (int i = 1; i <= half; ++i, h *= ratio) coord[i] = coord[i - 1] + h;
  coord[half] = 0.5;
  for (int i = 0; i < half; ++i) coord[n - i] = 1.0 - coord[i];

  Mesh base = generate_structured_tris(n, n);
  std::vector<Vec2> nodes(base.nodes().size());
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) nodes[j * (n + 1) + i] = Vec2(coord[i], coord[j]);
  return base.with_nodes(std::move(nodes));
}

Mesh family_mesh(const std::string& case_name, int level, CellType type) {
  if (level < 1 || level > 10) throw ConfigError("mesh level must be in [1, 10]");
  if (case_name == "stokes-synthetic") {
    const int n = 8 << level;
    return type == CellType::Quad ? generate_structured_quads(n, n) : generate_structured_tris(n, n);
  }
  if (case_name == "couette") return generate_annulus(16 << level, 4 << level, 1.0, 2.0, type);
  if (case_name == "cavity") {
    if (type != CellType::Tri) throw ConfigError("the cavity family uses triangles only");
    return graded_cavity_mesh(level);
  }
  throw ConfigError("unknown case '" + case_name + "'");
}

std::vector<std::pair<double, double>> read_reference_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open reference profile '" + path + "'");
  std::vector<std::pair<double, double>> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream s(line);
    double a = 0.0, b = 0.0;
    if (!(s >> a >> b)) {
      if (line_no == 1 && out.empty()) continue;  // header
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected 'coordinate,value'");
    }
    out.emplace_back(a, b);
  }
  return out;
}

}  // namespace hpfcfv
