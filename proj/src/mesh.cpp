#include "cauchy/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>

#include "cauchy/error.hpp"

namespace cauchy {

namespace {

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

BoundingBox bounding_box(const std::vector<Point>& vertices) {
  BoundingBox box;
  if (vertices.empty()) return box;
  box.lo = box.hi = vertices.front();
  for (const Point& p : vertices) {
    box.lo = box.lo.cwiseMin(p);
    box.hi = box.hi.cwiseMax(p);
  }
  return box;
}

// True when p lies strictly inside segment [a, b].
bool strictly_inside_segment(const Point& p, const Point& a, const Point& b, double tol) {
  const Point ab = b - a;
  const double len2 = ab.squaredNorm();
  const double s = (p - a).dot(ab) / len2;
  if (s <= tol || s >= 1.0 - tol) return false;
  return std::abs(cross(ab, p - a)) <= tol * len2;
}

}  // namespace

double Mesh::signed_area(int t) const {
  const auto& tri = triangles[t];
  return 0.5 * cross(vertices[tri[1]] - vertices[tri[0]], vertices[tri[2]] - vertices[tri[0]]);
}

double Mesh::diameter(int t) const {
  const auto& tri = triangles[t];
  double d = 0.0;
  for (int i = 0; i < 3; ++i) d = std::max(d, (vertices[tri[(i + 1) % 3]] - vertices[tri[i]]).norm());
  return d;
}

double Mesh::max_diameter() const {
  double h = 0.0;
  for (int t = 0; t < num_triangles(); ++t) h = std::max(h, diameter(t));
  return h;
}

double Mesh::min_diameter() const {
  double h = std::numeric_limits<double>::infinity();
  for (int t = 0; t < num_triangles(); ++t) h = std::min(h, diameter(t));
  return h;
}

Mesh make_mesh(std::vector<Point> vertices, std::vector<std::array<int, 3>> triangles) {
  Mesh mesh;
  mesh.vertices = std::move(vertices);
  mesh.triangles = std::move(triangles);
  mesh.bbox = bounding_box(mesh.vertices);
  const int nv = mesh.num_vertices();
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    auto& tri = mesh.triangles[t];
    for (int v : tri) {
      if (v < 0 || v >= nv) throw MeshError("triangle " + std::to_string(t) + " references missing vertex");
    }
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) {
      throw MeshError("triangle " + std::to_string(t) + " repeats a vertex");
    }
    const double area = mesh.signed_area(t);
    const double scale = mesh.diameter(t);
    if (std::abs(area) <= 1e-14 * scale * scale) {
      throw MeshError("triangle " + std::to_string(t) + " is degenerate");
    }
    if (area < 0) std::swap(tri[1], tri[2]);
  }
  return mesh;
}

Mesh generate_union_jack(int nx, int ny, const BoundingBox& bbox) {
  if (nx < 1 || ny < 1) throw MeshError("union-jack mesh needs nx, ny >= 1");
  if (!(bbox.width() > 0) || !(bbox.height() > 0)) throw MeshError("union-jack mesh needs a bounding box with positive extent");

  const double dx = bbox.width() / nx;
  const double dy = bbox.height() / ny;
  std::vector<Point> vertices;
  vertices.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1) + nx * ny));
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      // Snap the last row/column onto the box so boundary predicates are exact.
      const double x = i == nx ? bbox.hi.x() : bbox.lo.x() + i * dx;
      const double y = j == ny ? bbox.hi.y() : bbox.lo.y() + j * dy;
      vertices.emplace_back(x, y);
    }
  }
  const int center_base = static_cast<int>(vertices.size());
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) vertices.emplace_back(bbox.lo.x() + (i + 0.5) * dx, bbox.lo.y() + (j + 0.5) * dy);
  }

  auto grid = [nx](int i, int j) { return j * (nx + 1) + i; };
  std::vector<std::array<int, 3>> triangles;
  triangles.reserve(static_cast<std::size_t>(4 * nx * ny));
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int a = grid(i, j), b = grid(i + 1, j), c = grid(i + 1, j + 1), d = grid(i, j + 1);
      const int e = center_base + j * nx + i;
      triangles.push_back({a, b, e});
      triangles.push_back({b, c, e});
      triangles.push_back({c, d, e});
      triangles.push_back({d, a, e});
    }
  }
  Mesh mesh = make_mesh(std::move(vertices), std::move(triangles));
  mesh.bbox = bbox;
  return mesh;
}

int FaceTable::num_boundary() const {
  return static_cast<int>(std::count_if(faces.begin(), faces.end(), [](const Face& f) { return f.is_boundary(); }));
}

FaceTable build_face_table(const Mesh& mesh) {
  FaceTable table;
  const int nt = mesh.num_triangles();
  table.element_faces.resize(static_cast<std::size_t>(nt));
  std::unordered_map<std::uint64_t, int> lookup;
  lookup.reserve(static_cast<std::size_t>(3 * nt));

  for (int t = 0; t < nt; ++t) {
    const auto& tri = mesh.triangles[t];
    for (int i = 0; i < 3; ++i) {
      const int a = tri[(i + 1) % 3];
      const int b = tri[(i + 2) % 3];
      const auto [it, inserted] = lookup.try_emplace(edge_key(a, b), table.num_faces());
      if (inserted) {
        Face face;
        face.vertices = {std::min(a, b), std::max(a, b)};
        face.left = t;
        const Point edge = mesh.vertices[b] - mesh.vertices[a];
        face.length = edge.norm();
        face.normal = Point(edge.y(), -edge.x()) / face.length;  // outward for a CCW triangle
        face.midpoint = 0.5 * (mesh.vertices[a] + mesh.vertices[b]);
        table.faces.push_back(face);
      } else {
        Face& face = table.faces[it->second];
        if (face.right >= 0) {
          throw MeshError("nonconforming mesh: edge (" + std::to_string(a) + ", " + std::to_string(b) +
                          ") shared by more than two triangles");
        }
        face.right = t;
      }
      table.element_faces[t][i] = it->second;
    }
  }

  const int nb = table.num_boundary();
  if (2 * table.num_faces() != 3 * nt + nb) throw MeshError("face count fails the Euler check");

  // Hanging vertices show up as a boundary-edge endpoint strictly inside another boundary edge.
  std::vector<int> boundary_faces;
  for (int f = 0; f < table.num_faces(); ++f) {
    if (table.faces[f].is_boundary()) boundary_faces.push_back(f);
  }
  for (int f : boundary_faces) {
    const Face& face = table.faces[f];
    const Point& a = mesh.vertices[face.vertices[0]];
    const Point& b = mesh.vertices[face.vertices[1]];
    for (int g : boundary_faces) {
      if (g == f) continue;
      for (int v : table.faces[g].vertices) {
        if (strictly_inside_segment(mesh.vertices[v], a, b, 1e-10)) {
          throw MeshError("nonconforming mesh: hanging vertex " + std::to_string(v));
        }
      }
    }
  }
  return table;
}

int BoundaryTags::count(BoundaryTag t) const {
  return static_cast<int>(std::count(tag.begin(), tag.end(), t));
}

BoundaryTags tag_boundary(const Mesh& mesh, const FaceTable& faces, const PointPredicate& sigma_rule,
                          const PointPredicate& dirichlet_rule) {
  BoundaryTags tags;
  tags.tag.assign(faces.faces.size(), BoundaryTag::None);
  for (int f = 0; f < faces.num_faces(); ++f) {
    const Face& face = faces.faces[f];
    if (!face.is_boundary()) continue;
    const bool sigma = sigma_rule(face.midpoint);
    const bool dirichlet = dirichlet_rule(face.midpoint);
    for (double s : {0.25, 0.75}) {
      const Point p = face.at(mesh, s);
      if (sigma_rule(p) != sigma || dirichlet_rule(p) != dirichlet) {
        throw ConfigError("boundary rule changes value along face " + std::to_string(f) +
                          "; Sigma must be a union of whole boundary faces");
      }
    }
    if (sigma && !dirichlet) {
      throw ConfigError("face " + std::to_string(f) + " is on Sigma but not Dirichlet-tagged");
    }
    if (sigma) {
      tags.tag[f] = BoundaryTag::Sigma;
    } else if (dirichlet) {
      tags.tag[f] = BoundaryTag::DirichletOnly;
    }
  }
  return tags;
}

PointPredicate on_line_x(const BoundingBox& bbox, double x) {
  const double tol = 1e-12 * bbox.diameter();
  return [x, tol](const Point& p) { return std::abs(p.x() - x) <= tol; };
}

PointPredicate on_line_y(const BoundingBox& bbox, double y) {
  const double tol = 1e-12 * bbox.diameter();
  return [y, tol](const Point& p) { return std::abs(p.y() - y) <= tol; };
}

Domain make_domain(Mesh mesh, const PointPredicate& sigma_rule, const PointPredicate& dirichlet_rule) {
  Domain domain;
  domain.faces = build_face_table(mesh);
  domain.tags = tag_boundary(mesh, domain.faces, sigma_rule, dirichlet_rule);
  domain.h = mesh.max_diameter();
  domain.mesh = std::move(mesh);
  return domain;
}

BoundaryTags tags_from_edges(const FaceTable& faces, const std::vector<TaggedEdge>& edges) {
  std::unordered_map<std::uint64_t, int> lookup;
  for (int f = 0; f < faces.num_faces(); ++f) {
    const Face& face = faces.faces[f];
    lookup.emplace(edge_key(face.vertices[0], face.vertices[1]), f);
  }
  BoundaryTags tags;
  tags.tag.assign(faces.faces.size(), BoundaryTag::None);
  std::vector<bool> seen(faces.faces.size(), false);
  for (const TaggedEdge& e : edges) {
    const auto it = lookup.find(edge_key(e.v0, e.v1));
    if (it == lookup.end() || !faces.faces[it->second].is_boundary()) {
      throw MeshError("tagged edge (" + std::to_string(e.v0) + ", " + std::to_string(e.v1) + ") is not a boundary face");
    }
    if (seen[it->second]) throw MeshError("boundary face tagged twice");
    seen[it->second] = true;
    tags.tag[it->second] = e.tag;
  }
  for (int f = 0; f < faces.num_faces(); ++f) {
    if (faces.faces[f].is_boundary() && !seen[f]) throw MeshError("boundary face " + std::to_string(f) + " has no tag");
  }
  return tags;
}

MeshFile read_mesh_ascii(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "mfem-mesh" || version != 1) throw MeshError("expected header 'mfem-mesh 1'");
  int nv = 0, nt = 0, nbf = 0;
  if (!(in >> nv >> nt >> nbf) || nv < 3 || nt < 1 || nbf < 0) throw MeshError("bad size line");

  std::vector<Point> vertices(static_cast<std::size_t>(nv));
  for (auto& p : vertices) {
    if (!(in >> p.x() >> p.y())) throw MeshError("truncated vertex block");
  }
  std::vector<std::array<int, 3>> triangles(static_cast<std::size_t>(nt));
  for (auto& tri : triangles) {
    if (!(in >> tri[0] >> tri[1] >> tri[2])) throw MeshError("truncated triangle block");
  }
  MeshFile file;
  file.boundary.reserve(static_cast<std::size_t>(nbf));
  for (int i = 0; i < nbf; ++i) {
    TaggedEdge e{};
    std::string tag;
    if (!(in >> e.v0 >> e.v1 >> tag)) throw MeshError("truncated boundary block");
    if (tag == "S") {
      e.tag = BoundaryTag::Sigma;
    } else if (tag == "D") {
      e.tag = BoundaryTag::DirichletOnly;
    } else if (tag == "N") {
      e.tag = BoundaryTag::None;
    } else {
      throw MeshError("unknown boundary tag '" + tag + "'");
    }
    file.boundary.push_back(e);
  }
  file.mesh = make_mesh(std::move(vertices), std::move(triangles));
  return file;
}

void write_mesh_ascii(std::ostream& out, const Mesh& mesh, const FaceTable& faces, const BoundaryTags& tags) {
  const auto old_precision = out.precision(17);
  out << "mfem-mesh 1\n" << mesh.num_vertices() << ' ' << mesh.num_triangles() << ' ' << faces.num_boundary() << '\n';
  for (const Point& p : mesh.vertices) out << p.x() << ' ' << p.y() << '\n';
  for (const auto& tri : mesh.triangles) out << tri[0] << ' ' << tri[1] << ' ' << tri[2] << '\n';
  for (int f = 0; f < faces.num_faces(); ++f) {
    const Face& face = faces.faces[f];
    if (!face.is_boundary()) continue;
    const char tag = tags.tag[f] == BoundaryTag::Sigma ? 'S' : tags.tag[f] == BoundaryTag::DirichletOnly ? 'D' : 'N';
    out << face.vertices[0] << ' ' << face.vertices[1] << ' ' << tag << '\n';
  }
  out.precision(old_precision);
}

}  // namespace cauchy
