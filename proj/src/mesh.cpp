#include "hpfcfv/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <unordered_map>

namespace hpfcfv {

std::string_view to_string(CellType type) { return type == CellType::Quad ? "quad" : "tri"; }

std::string_view to_string(BoundaryKind kind) {
  switch (kind) {
    case BoundaryKind::Dirichlet: return "dirichlet";
    case BoundaryKind::Neumann: return "neumann";
    case BoundaryKind::Symmetry: return "symmetry";
  }
  return "dirichlet";
}

CellType parse_cell_type(std::string_view text) {
  if (text == "quad" || text == "quads") return CellType::Quad;
  if (text == "tri" || text == "tris") return CellType::Tri;
  throw ConfigError("unknown cell type '" + std::string(text) + "'");
}

BoundaryKind parse_boundary_kind(std::string_view text) {
  if (text == "dirichlet") return BoundaryKind::Dirichlet;
  if (text == "neumann") return BoundaryKind::Neumann;
  if (text == "symmetry") return BoundaryKind::Symmetry;
  throw ConfigError("unknown boundary kind '" + std::string(text) + "'");
}

Mesh::Mesh(std::vector<Vec2> nodes, std::vector<int> cell_nodes, CellType type)
    : type_(type), nodes_(std::move(nodes)), cell_nodes_(std::move(cell_nodes)) {
  const int k = nodes_per_cell();
  if (cell_nodes_.empty() || cell_nodes_.size() % k != 0)
    throw ConfigError("cell connectivity size is not a multiple of " + std::to_string(k));
  n_cells_ = static_cast<int>(cell_nodes_.size()) / k;
  for (int idx : cell_nodes_) {
    if (idx < 0 || idx >= n_nodes()) throw ConfigError("cell references node " + std::to_string(idx) + " out of range");
  }
  build_topology();
  build_geometry();
  dirichlet_.assign(faces_.size(), 0);
}

std::span<const int> Mesh::cell_nodes(int c) const {
  const int k = nodes_per_cell();
  return {cell_nodes_.data() + static_cast<std::size_t>(c) * k, static_cast<std::size_t>(k)};
}

std::span<const int> Mesh::cell_faces(int c) const {
  const int k = nodes_per_cell();
  return {cell_faces_.data() + static_cast<std::size_t>(c) * k, static_cast<std::size_t>(k)};
}

void Mesh::build_topology() {
  const int k = nodes_per_cell();
  cell_faces_.assign(cell_nodes_.size(), -1);
  faces_.clear();
  faces_.reserve(cell_nodes_.size() / 2 + nodes_.size());
  std::unordered_map<std::uint64_t, int> lookup;
  lookup.reserve(cell_nodes_.size());
  for (int c = 0; c < n_cells_; ++c) {
    for (int j = 0; j < k; ++j) {
      const int a = cell_nodes_[c * k + j];
      const int b = cell_nodes_[c * k + (j + 1) % k];
      if (a == b) throw ConfigError("degenerate edge in cell " + std::to_string(c));
      const auto key = (static_cast<std::uint64_t>(std::min(a, b)) << 32) | static_cast<std::uint32_t>(std::max(a, b));
      auto [it, inserted] = lookup.try_emplace(key, static_cast<int>(faces_.size()));
      if (inserted) {
        Face f;
        f.nodes = {a, b};
        f.owner = c;
        f.owner_local = j;
        faces_.push_back(f);
      } else {
        Face& f = faces_[it->second];
        if (f.neighbour >= 0) throw ConfigError("edge shared by more than two cells");
        if (f.owner == c) throw ConfigError("cell " + std::to_string(c) + " repeats an edge");
        f.neighbour = c;
        f.neighbour_local = j;
      }
      cell_faces_[c * k + j] = it->second;
    }
  }
}

void Mesh::build_geometry() {
  const int k = nodes_per_cell();
  areas_.assign(n_cells_, 0.0);
  centroids_.assign(n_cells_, Vec2::Zero());
  for (int c = 0; c < n_cells_; ++c) {
    double twice_area = 0.0;
    Vec2 moment = Vec2::Zero();
    for (int j = 0; j < k; ++j) {
      const Vec2& p = nodes_[cell_nodes_[c * k + j]];
      const Vec2& q = nodes_[cell_nodes_[c * k + (j + 1) % k]];
      const double cross = p.x() * q.y() - q.x() * p.y();
      twice_area += cross;
      moment += cross * (p + q);
    }
    if (!(twice_area > 0.0))
      throw MeshError("cell " + std::to_string(c) + " has non-positive area (orientation or inversion)");
    areas_[c] = 0.5 * twice_area;
    centroids_[c] = moment / (3.0 * twice_area);
  }
  for (Face& f : faces_) {
    // Local face j of the owner runs from local node j to j+1 counter-clockwise.
    const Vec2& a = nodes_[cell_nodes_[f.owner * k + f.owner_local]];
    const Vec2& b = nodes_[cell_nodes_[f.owner * k + (f.owner_local + 1) % k]];
    const Vec2 d = b - a;
    f.measure = d.norm();
    f.barycentre = 0.5 * (a + b);
    f.normal = Vec2(d.y(), -d.x()) / f.measure;
    f.tangent = Vec2(-f.normal.y(), f.normal.x());
  }
}

Vec2 Mesh::outward_normal(int c, int j) const {
  const Face& f = faces_[cell_faces(c)[j]];
  return f.owner == c ? f.normal : Vec2(-f.normal);
}

int Mesh::n_boundary_faces() const {
  return static_cast<int>(std::count_if(faces_.begin(), faces_.end(), [](const Face& f) { return f.is_boundary(); }));
}

std::vector<bool> Mesh::boundary_node_mask() const {
  std::vector<bool> mask(nodes_.size(), false);
  for (const Face& f : faces_) {
    if (f.is_boundary()) {
      mask[f.nodes[0]] = true;
      mask[f.nodes[1]] = true;
    }
  }
  return mask;
}

std::optional<BoundaryKind> Mesh::boundary_kind(int f) const {
  auto it = tags_.find(f);
  if (it == tags_.end()) return std::nullopt;
  return it->second;
}

bool Mesh::pure_dirichlet() const {
  for (int f = 0; f < n_faces(); ++f) {
    if (faces_[f].is_boundary() && !dirichlet_[f]) return false;
  }
  return true;
}

Mesh Mesh::with_tags(std::map<int, BoundaryKind> tags) const {
  Mesh out = *this;
  for (const auto& [f, kind] : tags) {
    if (f < 0 || f >= n_faces() || !faces_[f].is_boundary())
      throw ConfigError("tag on face " + std::to_string(f) + " which is not a boundary face");
  }
  out.tags_ = std::move(tags);
  out.dirichlet_.assign(faces_.size(), 0);
  for (const auto& [f, kind] : out.tags_) out.dirichlet_[f] = kind == BoundaryKind::Dirichlet;
  return out;
}

Mesh Mesh::with_nodes(std::vector<Vec2> nodes) const {
  if (nodes.size() != nodes_.size()) throw ConfigError("node count mismatch when moving nodes");
  Mesh out = *this;
  out.nodes_ = std::move(nodes);
  out.build_geometry();
  return out;
}

double Mesh::characteristic_size() const {
  double h = 0.0;
  for (const Face& f : faces_) h = std::max(h, f.measure);
  return h;
}

Vec2 Mesh::closure_defect(int c) const {
  Vec2 sum = Vec2::Zero();
  const auto fs = cell_faces(c);
  for (int j = 0; j < static_cast<int>(fs.size()); ++j) sum += faces_[fs[j]].measure * outward_normal(c, j);
  return sum;
}

namespace {

void check_rectangle(int nx, int ny, const Rectangle& domain) {
  if (nx < 1 || ny < 1) throw ConfigError("structured mesh needs nx, ny >= 1");
  if (!(domain.x1 > domain.x0) || !(domain.y1 > domain.y0)) throw ConfigError("degenerate rectangle");
}

std::vector<Vec2> grid_nodes(int nx, int ny, const Rectangle& d) {
  std::vector<Vec2> nodes;
  nodes.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      nodes.emplace_back(d.x0 + (d.x1 - d.x0) * i / nx, d.y0 + (d.y1 - d.y0) * j / ny);
    }
  }
  return nodes;
}

// Connectivity of an nx x ny logical grid whose node (i, j) sits at j*(nx+1)+i,
// optionally wrapping in j (periodic direction with ny distinct node rows).
std::vector<int> grid_cells(int nx, int ny, CellType type, bool periodic_j) {
  const int rows = periodic_j ? ny : ny + 1;
  auto id = [&](int i, int j) { return (j % rows) * (nx + 1) + i; };
  std::vector<int> cells;
  cells.reserve(static_cast<std::size_t>(nx) * ny * (type == CellType::Quad ? 4 : 6));
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      if (type == CellType::Quad) {
        cells.insert(cells.end(), {a, b, c, d});
      } else {
        // Split along the (i,j)-(i+1,j+1) diagonal.
        cells.insert(cells.end(), {a, b, c});
        cells.insert(cells.end(), {a, c, d});
      }
    }
  }
  return cells;
}

}  // namespace

Mesh generate_structured_quads(int nx, int ny, const Rectangle& domain) {
  check_rectangle(nx, ny, domain);
  return Mesh(grid_nodes(nx, ny, domain), grid_cells(nx, ny, CellType::Quad, false), CellType::Quad);
}

Mesh generate_structured_tris(int nx, int ny, const Rectangle& domain) {
  check_rectangle(nx, ny, domain);
  return Mesh(grid_nodes(nx, ny, domain), grid_cells(nx, ny, CellType::Tri, false), CellType::Tri);
}

Mesh generate_annulus(int n_theta, int n_r, double inner_radius, double outer_radius, CellType type) {
  if (n_theta < 3 || n_r < 1) throw ConfigError("annulus needs n_theta >= 3 and n_r >= 1");
  if (!(inner_radius > 0.0) || !(inner_radius < outer_radius)) throw ConfigError("annulus needs 0 < R_i < R_o");
  // Logical x runs radially and y angularly, so the polar map keeps cells counter-clockwise.
  std::vector<Vec2> nodes;
  nodes.reserve(static_cast<std::size_t>(n_r + 1) * n_theta);
  for (int j = 0; j < n_theta; ++j) {
    const double theta = 2.0 * std::numbers::pi * j / n_theta;
    for (int i = 0; i <= n_r; ++i) {
      const double r = inner_radius + (outer_radius - inner_radius) * i / n_r;
      nodes.emplace_back(r * std::cos(theta), r * std::sin(theta));
    }
  }
  return Mesh(std::move(nodes), grid_cells(n_r, n_theta, type, true), type);
}

Mesh distort(const Mesh& mesh, double factor, std::uint64_t seed) {
  if (!(factor >= 0.0 && factor < 0.5)) throw ConfigError("distortion factor must lie in [0, 0.5)");
  if (factor == 0.0) return mesh;
  std::vector<double> shortest(mesh.n_nodes(), std::numeric_limits<double>::infinity());
  for (const Face& f : mesh.faces()) {
    shortest[f.nodes[0]] = std::min(shortest[f.nodes[0]], f.measure);
    shortest[f.nodes[1]] = std::min(shortest[f.nodes[1]], f.measure);
  }
  const auto on_boundary = mesh.boundary_node_mask();
  std::vector<Vec2> nodes = mesh.nodes();
  constexpr double two_pow_minus_53 = 1.0 / 9007199254740992.0;
  for (int k = 0; k < mesh.n_nodes(); ++k) {
    if (on_boundary[k]) continue;
    std::seed_seq sequence{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                           static_cast<std::uint32_t>(k)};
    std::mt19937_64 engine(sequence);
    const double u1 = static_cast<double>(engine() >> 11) * two_pow_minus_53;
    const double u2 = static_cast<double>(engine() >> 11) * two_pow_minus_53;
    const double radius = factor * shortest[k] * std::sqrt(u1);
    const double angle = 2.0 * std::numbers::pi * u2;
    nodes[k] += radius * Vec2(std::cos(angle), std::sin(angle));
  }
  try {
    return mesh.with_nodes(std::move(nodes));
  } catch (const MeshError& e) {
    throw MeshError(std::string("distortion inverted a cell, lower the factor: ") + e.what());
  }
}

Mesh tag_boundaries(const Mesh& mesh, const std::vector<BoundaryRule>& rules) {
  std::map<int, BoundaryKind> tags;
  for (int f = 0; f < mesh.n_faces(); ++f) {
    const Face& face = mesh.face(f);
    if (!face.is_boundary()) continue;
    const BoundaryRule* match = nullptr;
    for (const auto& rule : rules) {
      if (!rule.matches(face.barycentre, face.normal)) continue;
      if (match) {
        throw ConfigError("boundary face " + std::to_string(f) + " matched by both '" + match->name + "' and '" +
                          rule.name + "'");
      }
      match = &rule;
    }
    if (!match) {
      std::ostringstream msg;
      msg << "boundary face " << f << " at (" << face.barycentre.x() << ", " << face.barycentre.y()
          << ") matched by no boundary rule";
      throw ConfigError(msg.str());
    }
    tags.emplace(f, match->kind);
  }
  return mesh.with_tags(std::move(tags));
}

double validate_compatibility(const Mesh& mesh, const std::function<Vec2(const Vec2&)>& dirichlet) {
  double flux = 0.0;
  for (int f = 0; f < mesh.n_faces(); ++f) {
    if (!mesh.is_dirichlet(f)) continue;
    const Face& face = mesh.face(f);
    flux += face.measure * dirichlet(face.barycentre).dot(face.normal);
  }
  return flux;
}

void write_mesh(std::ostream& out, const Mesh& mesh) {
  out.precision(17);
  out << "hpfcfv-mesh v1 2 " << to_string(mesh.cell_type()) << '\n';
  out << "nodes " << mesh.n_nodes() << '\n';
  for (const Vec2& p : mesh.nodes()) out << p.x() << ' ' << p.y() << '\n';
  out << "cells " << mesh.n_cells() << '\n';
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const auto cn = mesh.cell_nodes(c);
    for (std::size_t j = 0; j < cn.size(); ++j) out << (j ? " " : "") << cn[j];
    out << '\n';
  }
  out << "tags " << mesh.boundary_tags().size() << '\n';
  for (const auto& [f, kind] : mesh.boundary_tags()) out << f << ' ' << to_string(kind) << '\n';
}

void write_mesh(const std::string& path, const Mesh& mesh) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_mesh(out, mesh);
  if (!out) throw std::runtime_error("failed writing mesh to '" + path + "'");
}

namespace {

void expect_keyword(std::istream& in, const char* keyword) {
  std::string word;
  if (!(in >> word) || word != keyword) throw ConfigError(std::string("mesh file: expected '") + keyword + "'");
}

}  // namespace

Mesh read_mesh(std::istream& in) {
  std::string magic, version, type_text;
  int dim = 0;
  if (!(in >> magic >> version >> dim >> type_text) || magic != "hpfcfv-mesh" || version != "v1")
    throw ConfigError("mesh file: bad header, expected 'hpfcfv-mesh v1 <dim> <cell_type>'");
  if (dim != 2) throw ConfigError("mesh file: only dimension 2 is supported");
  const CellType type = parse_cell_type(type_text);

  int n_nodes = 0;
  expect_keyword(in, "nodes");
  if (!(in >> n_nodes) || n_nodes <= 0) throw ConfigError("mesh file: bad node count");
  std::vector<Vec2> nodes(n_nodes);
  for (auto& p : nodes) {
    if (!(in >> p.x() >> p.y())) throw ConfigError("mesh file: truncated node list");
  }
  int n_cells = 0;
  expect_keyword(in, "cells");
  if (!(in >> n_cells) || n_cells <= 0) throw ConfigError("mesh file: bad cell count");
  const int k = type == CellType::Quad ? 4 : 3;
  std::vector<int> cells(static_cast<std::size_t>(n_cells) * k);
  for (int& idx : cells) {
    if (!(in >> idx)) throw ConfigError("mesh file: truncated cell list");
  }
  Mesh mesh(std::move(nodes), std::move(cells), type);

  int n_tags = 0;
  expect_keyword(in, "tags");
  if (!(in >> n_tags) || n_tags < 0) throw ConfigError("mesh file: bad tag count");
  std::map<int, BoundaryKind> tags;
  for (int t = 0; t < n_tags; ++t) {
    int f = -1;
    std::string kind;
    if (!(in >> f >> kind)) throw ConfigError("mesh file: truncated tag list");
    tags[f] = parse_boundary_kind(kind);
  }
  return mesh.with_tags(std::move(tags));
}

Mesh read_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mesh file '" + path + "'");
  return read_mesh(in);
}

}  // namespace hpfcfv
