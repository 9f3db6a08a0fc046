#pragma once

#include "fracperim/intervals.hpp"
#include "fracperim/linalg.hpp"

#include <optional>
#include <vector>

namespace fracperim {

/// Closed halfspace {x : normal . x <= offset}. Polytope constructors normalize
/// the normal to unit length.
struct Halfspace {
  Vec normal;
  double offset = 0.0;
};

/// One face of the reduced boundary of a polytope: outward unit normal,
/// (n-1)-measure and the vertices of the face (ordered around the face in 3-D).
struct Facet {
  Vec normal;
  double measure = 0.0;
  std::vector<Vec> vertices;
};

/// Bounded convex polytope in H-representation, dimensions 1 to 3, with its
/// facet list derived at construction.
class Polytope {
 public:
  /// Throws std::invalid_argument for unbounded input, empty interior, zero
  /// normals or unsupported dimension.
  static Polytope from_halfspaces(int dim, std::vector<Halfspace> halfspaces);
  /// Same as from_halfspaces but returns nullopt for an empty or flat result.
  static std::optional<Polytope> try_from_halfspaces(int dim, std::vector<Halfspace> halfspaces);
  static Polytope box(const Vec& lo, const Vec& hi);
  /// Convex hull of a planar point set (dim 1 or 2).
  static Polytope from_vertices(int dim, const std::vector<Vec>& points);

  int dim() const { return dim_; }
  const std::vector<Halfspace>& halfspaces() const { return halfspaces_; }
  const std::vector<Facet>& facets() const { return facets_; }
  /// Vertices; counter-clockwise in 2-D.
  const std::vector<Vec>& vertices() const { return vertices_; }
  double volume() const { return volume_; }
  double surface_area() const;
  Vec centroid() const;
  const Vec& box_lo() const { return lo_; }
  const Vec& box_hi() const { return hi_; }

  bool contains(const Vec& x) const;
  /// Parameter interval {t : x + t u inside}, empty when the line misses.
  Interval trace(const Vec& x, const Vec& u) const;
  /// || sum over facets of measure * normal ||, zero for a closed surface.
  double closure_residual() const;

  std::optional<Polytope> intersect(const Polytope& other) const;
  std::optional<Polytope> intersect(const Halfspace& h) const;

 private:
  Polytope() = default;
  static std::optional<Polytope> build(int dim, std::vector<Halfspace> halfspaces, bool throw_on_empty);

  int dim_ = 0;
  std::vector<Halfspace> halfspaces_;
  std::vector<Facet> facets_;
  std::vector<Vec> vertices_;
  double volume_ = 0.0;
  Vec lo_, hi_;
};

/// Area and centroid of a simple polygon given counter-clockwise.
struct PolygonMoments {
  double area = 0.0;
  Vec centroid;
};
PolygonMoments polygon_moments(const std::vector<Vec>& ccw_vertices);

/// Sutherland-Hodgman clip of a planar polygon (2-D coordinates) against
/// {x : normal . x <= offset}.
std::vector<Vec> clip_polygon(const std::vector<Vec>& polygon, const Vec& normal, double offset);

/// Clip a convex facet polygon lying in R^3 against a halfspace of R^3.
std::vector<Vec> clip_polygon_3d(const std::vector<Vec>& polygon, const Halfspace& h);

/// Area of a planar polygon embedded in R^3 (vertices in order).
double polygon_area_3d(const std::vector<Vec>& polygon);

}  // namespace fracperim
