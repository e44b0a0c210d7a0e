#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>

namespace cauchy {

using Point = Eigen::Vector2d;

struct BoundingBox {
  Point lo = Point::Zero();
  Point hi = Point::Zero();

  double width() const { return hi.x() - lo.x(); }
  double height() const { return hi.y() - lo.y(); }
  double diameter() const { return (hi - lo).norm(); }
};

/// Conforming 2D triangulation. Triangles are stored counter-clockwise.
struct Mesh {
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> triangles;
  BoundingBox bbox;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }

  double signed_area(int t) const;
  /// Longest edge of triangle t.
  double diameter(int t) const;
  /// Global mesh parameter h: the largest element diameter.
  double max_diameter() const;
  double min_diameter() const;
  /// max/min element diameter.
  double quasi_uniformity() const { return max_diameter() / min_diameter(); }
};

/// Builds a mesh from raw arrays, reorienting clockwise triangles and
/// rejecting degenerate ones or out-of-range vertex indices.
Mesh make_mesh(std::vector<Point> vertices, std::vector<std::array<int, 3>> triangles);

/// Structured criss-cross ("Union-Jack") mesh of a rectangle: each of the
/// nx*ny grid cells is split into four triangles about its centre.
Mesh generate_union_jack(int nx, int ny, const BoundingBox& bbox);

struct Face {
  std::array<int, 2> vertices;  ///< vertices[0] < vertices[1]; the face is parametrized from 0 to 1.
  int left = -1;                ///< lower element index
  int right = -1;               ///< -1 for boundary faces
  Point normal;                 ///< unit normal from left to right (outward on the boundary)
  double length = 0.0;
  Point midpoint;

  bool is_boundary() const { return right < 0; }
  /// Point at parameter s in [0, 1] along the face.
  Point at(const Mesh& mesh, double s) const {
    return mesh.vertices[vertices[0]] + s * (mesh.vertices[vertices[1]] - mesh.vertices[vertices[0]]);
  }
};

struct FaceTable {
  std::vector<Face> faces;
  /// element_faces[t][i] is the face opposite local vertex i of triangle t.
  std::vector<std::array<int, 3>> element_faces;

  int num_faces() const { return static_cast<int>(faces.size()); }
  int num_boundary() const;
  int num_interior() const { return num_faces() - num_boundary(); }
  /// Element on the other side of face f as seen from element t, or -1.
  int neighbor(int f, int t) const {
    const Face& face = faces[f];
    return face.left == t ? face.right : face.left;
  }
};

/// Deduplicated face list with fixed normals. Throws MeshError for a
/// nonconforming mesh: an edge shared by more than two triangles, a face
/// count that fails 2 F = 3 T + F_boundary, or a hanging vertex on the boundary.
FaceTable build_face_table(const Mesh& mesh);

enum class BoundaryTag : std::uint8_t {
  None,           ///< Sigma': no data
  Sigma,          ///< both Dirichlet and Neumann data known
  DirichletOnly,  ///< Dirichlet datum imposed, no flux datum
};

struct BoundaryTags {
  std::vector<BoundaryTag> tag;  ///< one entry per face; interior faces are None

  bool sigma(int f) const { return tag[f] == BoundaryTag::Sigma; }
  bool dirichlet(int f) const { return tag[f] == BoundaryTag::Sigma || tag[f] == BoundaryTag::DirichletOnly; }
  int count(BoundaryTag t) const;
};

using PointPredicate = std::function<bool(const Point&)>;

/// Classifies boundary faces by evaluating the rules at face midpoints, and
/// rejects a face where either rule disagrees at s = 1/4 or 3/4 (Sigma's edge
/// cutting the face). A face matching sigma_rule must also match dirichlet_rule.
BoundaryTags tag_boundary(const Mesh& mesh, const FaceTable& faces, const PointPredicate& sigma_rule,
                          const PointPredicate& dirichlet_rule);

/// Predicate matching points with |coord - value| below 1e-12 * bbox diameter.
PointPredicate on_line_x(const BoundingBox& bbox, double x);
PointPredicate on_line_y(const BoundingBox& bbox, double y);

/// Everything a discretization needs about the geometry, shared immutably.
struct Domain {
  Mesh mesh;
  FaceTable faces;
  BoundaryTags tags;
  double h = 0.0;  ///< max element diameter
};

Domain make_domain(Mesh mesh, const PointPredicate& sigma_rule, const PointPredicate& dirichlet_rule);

struct TaggedEdge {
  int v0, v1;
  BoundaryTag tag;
};

struct MeshFile {
  Mesh mesh;
  std::vector<TaggedEdge> boundary;
};

/// ASCII mesh format:
///   mfem-mesh 1
///   nv nt nbf
///   nv lines "x y", nt lines "v0 v1 v2", nbf lines "v0 v1 tag" with tag in {S, D, N}.
MeshFile read_mesh_ascii(std::istream& in);
void write_mesh_ascii(std::ostream& out, const Mesh& mesh, const FaceTable& faces, const BoundaryTags& tags);

/// Tags from an explicit boundary edge list. Every boundary face must be listed exactly once.
BoundaryTags tags_from_edges(const FaceTable& faces, const std::vector<TaggedEdge>& edges);

}  // namespace cauchy
