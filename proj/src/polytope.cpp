#include "fracperim/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fracperim {

namespace {

constexpr double kFeasTol = 1e-12;

Vec perp2(const Vec& a) { return make_vec({-a[1], a[0]}); }

Vec cross3(const Vec& a, const Vec& b) {
  return make_vec({a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]});
}

bool is_recession_direction(const std::vector<Halfspace>& hs, const Vec& u) {
  for (const auto& h : hs)
    if (h.normal.dot(u) > kFeasTol) return false;
  return true;
}

bool unbounded(int dim, const std::vector<Halfspace>& hs) {
  if (static_cast<int>(hs.size()) < dim + 1) return true;
  if (dim == 1) {
    bool pos = false, neg = false;
    for (const auto& h : hs) {
      if (h.normal[0] > 0) pos = true;
      if (h.normal[0] < 0) neg = true;
    }
    return !(pos && neg);
  }
  // a nonzero recession cone has an extreme ray on the intersection of n-1
  // constraint boundaries
  if (dim == 2) {
    for (const auto& h : hs) {
      const Vec u = perp2(h.normal);
      if (is_recession_direction(hs, u) || is_recession_direction(hs, -u)) return true;
    }
    return false;
  }
  for (std::size_t i = 0; i < hs.size(); ++i) {
    for (std::size_t j = i + 1; j < hs.size(); ++j) {
      Vec u = cross3(hs[i].normal, hs[j].normal);
      const double len = u.norm();
      if (len < 1e-12) continue;
      u /= len;
      if (is_recession_direction(hs, u) || is_recession_direction(hs, -u)) return true;
    }
  }
  return false;
}

std::vector<Vec> dedupe_points(const std::vector<Vec>& pts, double tol) {
  std::vector<Vec> out;
  for (const auto& p : pts) {
    bool seen = false;
    for (const auto& q : out)
      if ((p - q).norm() <= tol) {
        seen = true;
        break;
      }
    if (!seen) out.push_back(p);
  }
  return out;
}

std::vector<Vec> sort_ccw(std::vector<Vec> pts) {
  if (pts.empty()) return pts;
  Vec c = Vec::Zero(2);
  for (const auto& p : pts) c += p;
  c /= static_cast<double>(pts.size());
  std::sort(pts.begin(), pts.end(), [&](const Vec& a, const Vec& b) {
    return std::atan2(a[1] - c[1], a[0] - c[0]) < std::atan2(b[1] - c[1], b[0] - c[0]);
  });
  return pts;
}

/// Largest vertex norm over all feasible triple intersections (3-D).
double vertex_radius_3d(const std::vector<Halfspace>& hs) {
  double r = 0.0;
  for (std::size_t i = 0; i < hs.size(); ++i)
    for (std::size_t j = i + 1; j < hs.size(); ++j)
      for (std::size_t k = j + 1; k < hs.size(); ++k) {
        Eigen::Matrix3d a;
        a.row(0) = hs[i].normal.transpose();
        a.row(1) = hs[j].normal.transpose();
        a.row(2) = hs[k].normal.transpose();
        if (std::abs(a.determinant()) < 1e-12) continue;
        const Eigen::Vector3d x = a.partialPivLu().solve(Eigen::Vector3d(hs[i].offset, hs[j].offset, hs[k].offset));
        bool feasible = true;
        for (const auto& h : hs)
          if (h.normal.dot(Vec(x)) > h.offset + 1e-9 * (1.0 + std::abs(h.offset))) {
            feasible = false;
            break;
          }
        if (feasible) r = std::max(r, x.norm());
      }
  return r;
}

}  // namespace

PolygonMoments polygon_moments(const std::vector<Vec>& v) {
  PolygonMoments m;
  m.centroid = Vec::Zero(2);
  const std::size_t n = v.size();
  if (n < 3) return m;
  // shift to the first vertex for accuracy
  const Vec o = v[0];
  double a2 = 0.0, cx = 0.0, cy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec p = v[i] - o;
    const Vec q = v[(i + 1) % n] - o;
    const double cr = p[0] * q[1] - q[0] * p[1];
    a2 += cr;
    cx += (p[0] + q[0]) * cr;
    cy += (p[1] + q[1]) * cr;
  }
  m.area = 0.5 * a2;
  if (std::abs(a2) > 0) m.centroid = o + make_vec({cx / (3.0 * a2), cy / (3.0 * a2)});
  return m;
}

std::vector<Vec> clip_polygon(const std::vector<Vec>& polygon, const Vec& normal, double offset) {
  std::vector<Vec> out;
  const std::size_t n = polygon.size();
  if (n == 0) return out;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec& p = polygon[i];
    const Vec& q = polygon[(i + 1) % n];
    const double dp = normal.dot(p) - offset;
    const double dq = normal.dot(q) - offset;
    if (dp <= 0) out.push_back(p);
    if ((dp < 0 && dq > 0) || (dp > 0 && dq < 0)) {
      const double t = dp / (dp - dq);
      out.push_back(p + t * (q - p));
    }
  }
  return out;
}

std::vector<Vec> clip_polygon_3d(const std::vector<Vec>& polygon, const Halfspace& h) {
  return clip_polygon(polygon, h.normal, h.offset);
}

double polygon_area_3d(const std::vector<Vec>& poly) {
  if (poly.size() < 3) return 0.0;
  Eigen::Vector3d acc = Eigen::Vector3d::Zero();
  const Eigen::Vector3d o = poly[0];
  for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
    const Eigen::Vector3d a = Eigen::Vector3d(poly[i]) - o;
    const Eigen::Vector3d b = Eigen::Vector3d(poly[i + 1]) - o;
    acc += a.cross(b);
  }
  return 0.5 * acc.norm();
}

std::optional<Polytope> Polytope::build(int dim, std::vector<Halfspace> input, bool throw_on_empty) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("polytope: only dimensions 1 to 3 are supported");
  std::vector<Halfspace> hs;
  for (auto h : input) {
    if (h.normal.size() != dim) throw std::invalid_argument("polytope: halfspace normal has wrong dimension");
    const double len = h.normal.norm();
    if (!(len > 0) || !std::isfinite(len) || !std::isfinite(h.offset))
      throw std::invalid_argument("polytope: halfspace normal must be finite and nonzero");
    h.normal /= len;
    h.offset /= len;
    bool merged = false;
    for (auto& k : hs) {
      if ((k.normal - h.normal).norm() < 1e-12) {
        k.offset = std::min(k.offset, h.offset);
        merged = true;
        break;
      }
    }
    if (!merged) hs.push_back(h);
  }
  if (unbounded(dim, hs)) throw std::invalid_argument("polytope: halfspaces do not bound a region");

  Polytope p;
  p.dim_ = dim;

  if (dim == 1) {
    double lo = -kInf, hi = kInf;
    for (const auto& h : hs) {
      if (h.normal[0] > 0) hi = std::min(hi, h.offset);
      else lo = std::max(lo, -h.offset);
    }
    if (!(lo < hi)) {
      if (throw_on_empty) throw std::invalid_argument("polytope: empty interior");
      return std::nullopt;
    }
    p.halfspaces_ = {Halfspace{make_vec({1.0}), hi}, Halfspace{make_vec({-1.0}), -lo}};
    p.facets_ = {Facet{make_vec({1.0}), 1.0, {make_vec({hi})}}, Facet{make_vec({-1.0}), 1.0, {make_vec({lo})}}};
    p.vertices_ = {make_vec({lo}), make_vec({hi})};
    p.volume_ = hi - lo;
    p.lo_ = make_vec({lo});
    p.hi_ = make_vec({hi});
    return p;
  }

  std::vector<Facet> facets;
  std::vector<Vec> verts;
  if (dim == 2) {
    for (std::size_t i = 0; i < hs.size(); ++i) {
      const Vec p0 = hs[i].normal * hs[i].offset;
      const Vec d = perp2(hs[i].normal);
      double t0 = -kInf, t1 = kInf;
      bool empty = false;
      for (std::size_t j = 0; j < hs.size() && !empty; ++j) {
        if (j == i) continue;
        const double ad = hs[j].normal.dot(d);
        const double rhs = hs[j].offset - hs[j].normal.dot(p0);
        if (std::abs(ad) < 1e-14) {
          if (rhs < -kFeasTol) empty = true;
        } else if (ad > 0) {
          t1 = std::min(t1, rhs / ad);
        } else {
          t0 = std::max(t0, rhs / ad);
        }
      }
      if (empty || !(t0 < t1)) continue;
      Facet f{hs[i].normal, t1 - t0, {p0 + t0 * d, p0 + t1 * d}};
      verts.push_back(f.vertices[0]);
      verts.push_back(f.vertices[1]);
      facets.push_back(std::move(f));
    }
  } else {
    const double radius = 2.0 * vertex_radius_3d(hs) + 1.0;
    for (std::size_t i = 0; i < hs.size(); ++i) {
      const Eigen::Vector3d a = hs[i].normal;
      const Eigen::Vector3d helper =
          std::abs(a[0]) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
      const Eigen::Vector3d e1 = a.cross(helper).normalized();
      const Eigen::Vector3d e2 = a.cross(e1);
      const Eigen::Vector3d p0 = a * hs[i].offset;
      std::vector<Vec> poly = {Vec(p0 + radius * (e1 + e2)), Vec(p0 + radius * (-e1 + e2)),
                               Vec(p0 + radius * (-e1 - e2)), Vec(p0 + radius * (e1 - e2))};
      for (std::size_t j = 0; j < hs.size() && !poly.empty(); ++j) {
        if (j == i) continue;
        poly = clip_polygon_3d(poly, hs[j]);
      }
      poly = dedupe_points(poly, 1e-12 * radius);
      const double area = polygon_area_3d(poly);
      if (area <= 0) continue;
      for (const auto& v : poly) verts.push_back(v);
      facets.push_back(Facet{hs[i].normal, area, std::move(poly)});
    }
  }

  // facets carry the same normal object as their halfspace, so offsets match by
  // exact comparison
  double volume = 0.0;
  double scale = 0.0;
  std::vector<Halfspace> active;
  for (const auto& f : facets) {
    scale = std::max(scale, f.measure);
    for (const auto& h : hs)
      if (h.normal == f.normal) {
        volume += f.measure * h.offset;
        active.push_back(h);
        break;
      }
  }
  volume /= dim;
  const double vol_floor = 1e-13 * std::pow(std::max(scale, 1e-300), static_cast<double>(dim) / (dim - 1));
  if (facets.empty() || !(volume > vol_floor)) {
    if (throw_on_empty) throw std::invalid_argument("polytope: empty interior");
    return std::nullopt;
  }

  p.halfspaces_ = std::move(active);
  p.facets_ = std::move(facets);
  p.volume_ = volume;
  double extent = 0.0;
  for (const auto& v : verts) extent = std::max(extent, v.cwiseAbs().maxCoeff());
  verts = dedupe_points(verts, 1e-11 * (1.0 + extent));
  if (dim == 2) verts = sort_ccw(std::move(verts));
  p.vertices_ = std::move(verts);
  p.lo_ = p.vertices_.front();
  p.hi_ = p.vertices_.front();
  for (const auto& v : p.vertices_) {
    p.lo_ = p.lo_.cwiseMin(v);
    p.hi_ = p.hi_.cwiseMax(v);
  }
  return p;
}

Polytope Polytope::from_halfspaces(int dim, std::vector<Halfspace> halfspaces) {
  return *build(dim, std::move(halfspaces), true);
}

std::optional<Polytope> Polytope::try_from_halfspaces(int dim, std::vector<Halfspace> halfspaces) {
  return build(dim, std::move(halfspaces), false);
}

Polytope Polytope::box(const Vec& lo, const Vec& hi) {
  const int dim = static_cast<int>(lo.size());
  if (hi.size() != dim) throw std::invalid_argument("polytope: box corners differ in dimension");
  std::vector<Halfspace> hs;
  for (int i = 0; i < dim; ++i) {
    if (!(lo[i] < hi[i])) throw std::invalid_argument("polytope: box has empty interior");
    hs.push_back({unit_vec(dim, i), hi[i]});
    hs.push_back({-unit_vec(dim, i), -lo[i]});
  }
  return from_halfspaces(dim, std::move(hs));
}

Polytope Polytope::from_vertices(int dim, const std::vector<Vec>& points) {
  if (dim == 1) {
    double lo = kInf, hi = -kInf;
    for (const auto& p : points) {
      lo = std::min(lo, p[0]);
      hi = std::max(hi, p[0]);
    }
    return box(make_vec({lo}), make_vec({hi}));
  }
  if (dim != 2) throw std::invalid_argument("polytope: vertex input supported in dimensions 1 and 2 only");
  if (points.size() < 3) throw std::invalid_argument("polytope: need at least three vertices");
  // monotone chain hull
  std::vector<Vec> pts = points;
  std::sort(pts.begin(), pts.end(),
            [](const Vec& a, const Vec& b) { return a[0] < b[0] || (a[0] == b[0] && a[1] < b[1]); });
  auto cross = [](const Vec& o, const Vec& a, const Vec& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
  };
  std::vector<Vec> hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  if (hull.size() < 3) throw std::invalid_argument("polytope: vertices are collinear");
  std::vector<Halfspace> hs;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Vec e = hull[(i + 1) % hull.size()] - hull[i];
    const Vec n = make_vec({e[1], -e[0]});
    hs.push_back({n, n.dot(hull[i])});
  }
  return from_halfspaces(2, std::move(hs));
}

double Polytope::surface_area() const {
  double total = 0.0;
  for (const auto& f : facets_) total += f.measure;
  return total;
}

Vec Polytope::centroid() const {
  if (dim_ == 1) return 0.5 * (lo_ + hi_);
  if (dim_ == 2) return polygon_moments(vertices_).centroid;
  // cone decomposition from an interior point
  Vec o = Vec::Zero(3);
  for (const auto& v : vertices_) o += v;
  o /= static_cast<double>(vertices_.size());
  Vec acc = Vec::Zero(3);
  double vol = 0.0;
  for (const auto& f : facets_) {
    const auto& poly = f.vertices;
    for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
      const Eigen::Vector3d a = Eigen::Vector3d(poly[0]) - Eigen::Vector3d(o);
      const Eigen::Vector3d b = Eigen::Vector3d(poly[i]) - Eigen::Vector3d(o);
      const Eigen::Vector3d c = Eigen::Vector3d(poly[i + 1]) - Eigen::Vector3d(o);
      const double v = std::abs(a.dot(b.cross(c))) / 6.0;
      vol += v;
      acc += v * (o + (poly[0] + poly[i] + poly[i + 1] - 3.0 * o) / 4.0);
    }
  }
  return acc / vol;
}

bool Polytope::contains(const Vec& x) const {
  for (const auto& h : halfspaces_)
    if (h.normal.dot(x) > h.offset) return false;
  return true;
}

Interval Polytope::trace(const Vec& x, const Vec& u) const {
  double lo = -kInf, hi = kInf;
  for (const auto& h : halfspaces_) {
    const double au = h.normal.dot(u);
    const double rhs = h.offset - h.normal.dot(x);
    if (au > 0) {
      hi = std::min(hi, rhs / au);
    } else if (au < 0) {
      lo = std::max(lo, rhs / au);
    } else if (rhs < 0) {
      return Interval{0.0, 0.0};
    }
  }
  if (!(lo < hi)) return Interval{0.0, 0.0};
  return Interval{lo, hi};
}

double Polytope::closure_residual() const {
  Vec acc = Vec::Zero(dim_);
  for (const auto& f : facets_) acc += f.measure * f.normal;
  return acc.norm();
}

std::optional<Polytope> Polytope::intersect(const Polytope& other) const {
  auto hs = halfspaces_;
  hs.insert(hs.end(), other.halfspaces_.begin(), other.halfspaces_.end());
  return try_from_halfspaces(dim_, std::move(hs));
}

std::optional<Polytope> Polytope::intersect(const Halfspace& h) const {
  auto hs = halfspaces_;
  hs.push_back(h);
  return try_from_halfspaces(dim_, std::move(hs));
}

}  // namespace fracperim
