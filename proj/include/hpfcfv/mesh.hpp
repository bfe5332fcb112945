#pragma once

#include "hpfcfv/common.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hpfcfv {

enum class CellType { Quad, Tri };

enum class BoundaryKind { Dirichlet, Neumann, Symmetry };

std::string_view to_string(CellType type);
std::string_view to_string(BoundaryKind kind);
CellType parse_cell_type(std::string_view text);
BoundaryKind parse_boundary_kind(std::string_view text);

/// Axis-aligned rectangle [x0, x1] x [y0, y1].
struct Rectangle {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 1.0;
  double y1 = 1.0;

  static Rectangle unit() { return {}; }
};

/// One edge of the mesh. The normal points out of the owner cell, which is
/// always the adjacent cell with the smaller index; the neighbour sees -normal.
struct Face {
  std::array<int, 2> nodes{};
  Vec2 barycentre = Vec2::Zero();
  Vec2 normal = Vec2::Zero();
  Vec2 tangent = Vec2::Zero();  // normal rotated 90 degrees counter-clockwise
  double measure = 0.0;
  int owner = -1;
  int neighbour = -1;
  int owner_local = -1;
  int neighbour_local = -1;

  bool is_boundary() const { return neighbour < 0; }
};

/// Unstructured 2D mesh of a single cell type with counter-clockwise cells.
///
/// Faces are numbered in order of first appearance while sweeping cells in
/// index order, local face j of a cell joins its local nodes j and j+1. The
/// face table is therefore a pure function of the cell connectivity, which is
/// what makes the ASCII format lossless and distortion topology-preserving.
class Mesh {
 public:
  Mesh() = default;
  Mesh(std::vector<Vec2> nodes, std::vector<int> cell_nodes, CellType type);

  CellType cell_type() const { return type_; }
  int nodes_per_cell() const { return type_ == CellType::Quad ? 4 : 3; }

  int n_nodes() const { return static_cast<int>(nodes_.size()); }
  int n_cells() const { return n_cells_; }
  int n_faces() const { return static_cast<int>(faces_.size()); }

  const std::vector<Vec2>& nodes() const { return nodes_; }
  const Vec2& node(int i) const { return nodes_[i]; }
  std::span<const int> cell_nodes(int c) const;
  std::span<const int> cell_faces(int c) const;
  const std::vector<int>& cell_node_table() const { return cell_nodes_; }

  const std::vector<Face>& faces() const { return faces_; }
  const Face& face(int f) const { return faces_[f]; }

  double cell_area(int c) const { return areas_[c]; }
  const Vec2& cell_centroid(int c) const { return centroids_[c]; }

  /// Outward unit normal of local face j as seen from cell c.
  Vec2 outward_normal(int c, int j) const;

  int n_boundary_faces() const;
  int n_internal_faces() const { return n_faces() - n_boundary_faces(); }
  std::vector<bool> boundary_node_mask() const;

  const std::map<int, BoundaryKind>& boundary_tags() const { return tags_; }
  std::optional<BoundaryKind> boundary_kind(int f) const;
  bool is_dirichlet(int f) const { return dirichlet_[f] != 0; }
  /// True when every boundary face is tagged Dirichlet.
  bool pure_dirichlet() const;

  /// Copy with replaced boundary tags; every key must be a boundary face.
  Mesh with_tags(std::map<int, BoundaryKind> tags) const;
  /// Copy with moved nodes and identical connectivity; throws MeshError if a cell inverts.
  Mesh with_nodes(std::vector<Vec2> nodes) const;

  /// Longest face of the mesh.
  double characteristic_size() const;

  /// Sum over the cell faces of |face| * outward normal; zero for a closed polygon.
  Vec2 closure_defect(int c) const;

 private:
  void build_topology();
  void build_geometry();

  CellType type_ = CellType::Quad;
  int n_cells_ = 0;
  std::vector<Vec2> nodes_;
  std::vector<int> cell_nodes_;
  std::vector<int> cell_faces_;
  std::vector<Face> faces_;
  std::vector<double> areas_;
  std::vector<Vec2> centroids_;
  std::map<int, BoundaryKind> tags_;
  std::vector<char> dirichlet_;
};

Mesh generate_structured_quads(int nx, int ny, const Rectangle& domain = Rectangle::unit());
Mesh generate_structured_tris(int nx, int ny, const Rectangle& domain = Rectangle::unit());

/// Polar grid on R_i <= r <= R_o, periodic in the angle. Boundary faces are left untagged.
Mesh generate_annulus(int n_theta, int n_r, double inner_radius, double outer_radius, CellType type);

/// Moves every internal node by a uniform random vector in a disc of radius
/// factor * (shortest incident edge). Node k draws from mt19937_64 seeded with
/// seed_seq{seed, k}, so the result only depends on (mesh, factor, seed).
Mesh distort(const Mesh& mesh, double factor, std::uint64_t seed);

/// Geometric rule used to classify boundary faces.
struct BoundaryRule {
  std::string name;
  std::function<bool(const Vec2& barycentre, const Vec2& normal)> matches;
  BoundaryKind kind = BoundaryKind::Dirichlet;
};

/// Tags every boundary face by the unique rule matching it; ConfigError otherwise.
Mesh tag_boundaries(const Mesh& mesh, const std::vector<BoundaryRule>& rules);

/// Sum over Dirichlet faces of |face| * u_D(barycentre) . n.
double validate_compatibility(const Mesh& mesh, const std::function<Vec2(const Vec2&)>& dirichlet);

// ASCII mesh format "hpfcfv-mesh v1".
void write_mesh(std::ostream& out, const Mesh& mesh);
void write_mesh(const std::string& path, const Mesh& mesh);
Mesh read_mesh(std::istream& in);
Mesh read_mesh(const std::string& path);

}  // namespace hpfcfv
