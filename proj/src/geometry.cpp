#include "fracperim/geometry.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace fracperim {

// ---------------------------------------------------------------------------
// Box

bool Box::bounded() const { return lo.allFinite() && hi.allFinite(); }

bool Box::empty() const {
  for (Eigen::Index i = 0; i < lo.size(); ++i)
    if (!(lo[i] < hi[i])) return true;
  return false;
}

Box Box::intersect(const Box& other) const { return {lo.cwiseMax(other.lo), hi.cwiseMin(other.hi)}; }

Box Box::hull(const Box& other) const {
  if (empty()) return other;
  if (other.empty()) return *this;
  return {lo.cwiseMin(other.lo), hi.cwiseMax(other.hi)};
}

double Box::volume() const {
  if (empty()) return 0.0;
  return (hi - lo).prod();
}

double Box::surface_area() const {
  if (empty()) return 0.0;
  const Vec e = hi - lo;
  const int n = static_cast<int>(e.size());
  if (n == 1) return 2.0;
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += 2.0 * e.prod() / e[i];
  return total;
}

double Box::gap(const Box& other) const {
  double sq = 0.0;
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    const double g = std::max({0.0, other.lo[i] - hi[i], lo[i] - other.hi[i]});
    sq += g * g;
  }
  return std::sqrt(sq);
}

namespace {

Box full_box(int dim) { return {Vec::Constant(dim, -kInf), Vec::Constant(dim, kInf)}; }
Box empty_box(int dim) { return {Vec::Constant(dim, kInf), Vec::Constant(dim, -kInf)}; }

}  // namespace

// ---------------------------------------------------------------------------
// VoxelGrid

std::size_t VoxelGrid::size() const {
  std::size_t total = 1;
  for (int r : resolution) total *= static_cast<std::size_t>(r);
  return total;
}

Vec VoxelGrid::cell_size() const {
  Vec h(dim());
  for (int i = 0; i < dim(); ++i) h[i] = (hi[i] - lo[i]) / resolution[static_cast<std::size_t>(i)];
  return h;
}

std::vector<int> VoxelGrid::coords(std::size_t index) const {
  std::vector<int> c(resolution.size());
  for (int i = dim() - 1; i >= 0; --i) {
    const auto r = static_cast<std::size_t>(resolution[static_cast<std::size_t>(i)]);
    c[static_cast<std::size_t>(i)] = static_cast<int>(index % r);
    index /= r;
  }
  return c;
}

std::size_t VoxelGrid::index(const std::vector<int>& c) const {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < resolution.size(); ++i)
    idx = idx * static_cast<std::size_t>(resolution[i]) + static_cast<std::size_t>(c[i]);
  return idx;
}

Vec VoxelGrid::center(std::size_t index) const {
  const auto c = coords(index);
  const Vec h = cell_size();
  Vec x(dim());
  for (int i = 0; i < dim(); ++i) x[i] = lo[i] + (c[static_cast<std::size_t>(i)] + 0.5) * h[i];
  return x;
}

std::optional<std::size_t> VoxelGrid::locate(const Vec& x) const {
  std::vector<int> c(resolution.size());
  for (int i = 0; i < dim(); ++i) {
    if (!(x[i] >= lo[i] && x[i] < hi[i])) return std::nullopt;
    const auto r = resolution[static_cast<std::size_t>(i)];
    const int k = static_cast<int>(std::floor((x[i] - lo[i]) / (hi[i] - lo[i]) * r));
    c[static_cast<std::size_t>(i)] = std::clamp(k, 0, r - 1);
  }
  return index(c);
}

void VoxelGrid::validate() const {
  if (resolution.empty() || static_cast<int>(resolution.size()) > kMaxDim)
    throw std::invalid_argument("voxel grid: bad dimension");
  if (lo.size() != dim() || hi.size() != dim()) throw std::invalid_argument("voxel grid: box has wrong dimension");
  for (int i = 0; i < dim(); ++i) {
    if (resolution[static_cast<std::size_t>(i)] < 1) throw std::invalid_argument("voxel grid: resolution must be positive");
    if (!(lo[i] < hi[i])) throw std::invalid_argument("voxel grid: empty box");
  }
  if (occupancy.size() != size()) throw std::invalid_argument("voxel grid: occupancy length differs from cell count");
}

// ---------------------------------------------------------------------------
// SetRegion

struct SetRegion::Node {
  Kind kind = Kind::Empty;
  int dim = 0;
  Intervals1D intervals;
  Halfspace halfspace;
  BallData ball;
  std::optional<Polytope> polytope;
  VoxelGrid grid;
  std::vector<SetRegion> children;
  Box box;
};

namespace {

void check_region_dim(int dim) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("set: unsupported dimension");
}

Intervals1D voxel_trace(const VoxelGrid& g, const Vec& x, const Vec& u) {
  double t0 = -kInf, t1 = kInf;
  for (int i = 0; i < g.dim(); ++i) {
    if (u[i] == 0.0) {
      if (!(x[i] >= g.lo[i] && x[i] < g.hi[i])) return {};
      continue;
    }
    double a = (g.lo[i] - x[i]) / u[i], b = (g.hi[i] - x[i]) / u[i];
    if (a > b) std::swap(a, b);
    t0 = std::max(t0, a);
    t1 = std::min(t1, b);
  }
  if (!(t0 < t1)) return {};
  std::vector<double> cuts = {t0, t1};
  const Vec h = g.cell_size();
  for (int i = 0; i < g.dim(); ++i) {
    if (u[i] == 0.0) continue;
    for (int k = 1; k < g.resolution[static_cast<std::size_t>(i)]; ++k) {
      const double t = (g.lo[i] + k * h[i] - x[i]) / u[i];
      if (t > t0 && t < t1) cuts.push_back(t);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  std::vector<Interval> parts;
  for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
    if (!(cuts[j] < cuts[j + 1])) continue;
    const auto cell = g.locate(x + 0.5 * (cuts[j] + cuts[j + 1]) * u);
    if (cell && g.occupancy[*cell]) parts.push_back({cuts[j], cuts[j + 1]});
  }
  return Intervals1D::normalized(std::move(parts));
}

}  // namespace

SetRegion SetRegion::empty(int dim) {
  check_region_dim(dim);
  auto n = std::make_shared<Node>();
  n->kind = Kind::Empty;
  n->dim = dim;
  n->box = empty_box(dim);
  return SetRegion(n);
}

SetRegion SetRegion::intervals(Intervals1D parts) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Intervals;
  n->dim = 1;
  n->box = parts.empty() ? empty_box(1)
                         : Box{make_vec({parts.parts().front().lo}), make_vec({parts.parts().back().hi})};
  n->intervals = std::move(parts);
  return SetRegion(n);
}

SetRegion SetRegion::halfspace(const Vec& normal, double offset) {
  const int dim = static_cast<int>(normal.size());
  check_region_dim(dim);
  const double len = normal.norm();
  if (!(len > 0.0) || !std::isfinite(len) || !std::isfinite(offset))
    throw std::invalid_argument("halfspace: normal must be finite and nonzero");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Halfspace;
  n->dim = dim;
  n->halfspace = Halfspace{normal / len, offset / len};
  n->box = full_box(dim);
  for (int i = 0; i < dim; ++i) {
    if (n->halfspace.normal == unit_vec(dim, i)) n->box.hi[i] = n->halfspace.offset;
    if (n->halfspace.normal == -unit_vec(dim, i)) n->box.lo[i] = -n->halfspace.offset;
  }
  return SetRegion(n);
}

SetRegion SetRegion::ball(const Vec& center, double radius) {
  const int dim = static_cast<int>(center.size());
  check_region_dim(dim);
  if (!(radius > 0.0) || !std::isfinite(radius) || !center.allFinite())
    throw std::invalid_argument("ball: radius must be positive and finite");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Ball;
  n->dim = dim;
  n->ball = BallData{center, radius};
  n->box = Box{center.array() - radius, center.array() + radius};
  return SetRegion(n);
}

SetRegion SetRegion::polytope(Polytope p) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Polytope;
  n->dim = p.dim();
  n->box = Box{p.box_lo(), p.box_hi()};
  n->polytope = std::move(p);
  return SetRegion(n);
}

SetRegion SetRegion::box(const Vec& lo, const Vec& hi) { return polytope(Polytope::box(lo, hi)); }

SetRegion SetRegion::voxels(VoxelGrid grid) {
  grid.validate();
  auto n = std::make_shared<Node>();
  n->kind = Kind::Voxels;
  n->dim = grid.dim();
  Box b = empty_box(grid.dim());
  const Vec h = grid.cell_size();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!grid.occupancy[i]) continue;
    const Vec c = grid.center(i);
    b = b.hull(Box{c - 0.5 * h, c + 0.5 * h});
  }
  n->box = b;
  n->grid = std::move(grid);
  return SetRegion(n);
}

SetRegion SetRegion::complement(const SetRegion& a) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Complement;
  n->dim = a.dim();
  n->children = {a};
  if (a.kind() == Kind::Halfspace) {
    const Halfspace& h = a.halfspace_data();
    n->box = SetRegion::halfspace(-h.normal, -h.offset).bounding_box();
  } else if (a.kind() == Kind::Intersection && a.child(0).kind() == Kind::Complement &&
             a.child(1).kind() == Kind::Complement) {
    // a union written by De Morgan
    n->box = a.child(0).child(0).bounding_box().hull(a.child(1).child(0).bounding_box());
  } else {
    n->box = full_box(a.dim());
  }
  return SetRegion(n);
}

SetRegion SetRegion::intersection(const SetRegion& a, const SetRegion& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("intersection: operands differ in dimension");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Intersection;
  n->dim = a.dim();
  n->children = {a, b};
  n->box = a.bounding_box().intersect(b.bounding_box());
  SetRegion r(n);
  if (auto hs = halfspace_form(r)) {
    try {
      auto p = Polytope::try_from_halfspaces(n->dim, *hs);
      n->box = p ? Box{p->box_lo(), p->box_hi()} : empty_box(n->dim);
    } catch (const std::invalid_argument&) {
      // unbounded polyhedron; keep the box of the operands
    }
  }
  return r;
}

int SetRegion::dim() const { return node_->dim; }
SetRegion::Kind SetRegion::kind() const { return node_->kind; }
Box SetRegion::bounding_box() const { return node_->box; }

bool SetRegion::contains(const Vec& x) const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::Empty: return false;
    case Kind::Intervals: return n.intervals.contains(x[0]);
    case Kind::Halfspace: return n.halfspace.normal.dot(x) <= n.halfspace.offset;
    case Kind::Ball: return (x - n.ball.center).squaredNorm() < n.ball.radius * n.ball.radius;
    case Kind::Polytope: return n.polytope->contains(x);
    case Kind::Voxels: {
      const auto cell = n.grid.locate(x);
      return cell && n.grid.occupancy[*cell];
    }
    case Kind::Complement: return !n.children[0].contains(x);
    case Kind::Intersection: return n.children[0].contains(x) && n.children[1].contains(x);
  }
  return false;
}

Intervals1D SetRegion::trace(const Vec& x, const Vec& u) const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::Empty: return {};
    case Kind::Intervals: return n.intervals.affine(1.0 / u[0], -x[0] / u[0]);
    case Kind::Halfspace: {
      const double au = n.halfspace.normal.dot(u);
      const double rhs = n.halfspace.offset - n.halfspace.normal.dot(x);
      if (au > 0.0) return Intervals1D::normalized({{-kInf, rhs / au}});
      if (au < 0.0) return Intervals1D::normalized({{rhs / au, kInf}});
      return rhs >= 0.0 ? Intervals1D::whole_line() : Intervals1D{};
    }
    case Kind::Ball: {
      const Vec d = x - n.ball.center;
      const double b = u.dot(d);
      const double c = d.squaredNorm() - n.ball.radius * n.ball.radius;
      const double disc = b * b - c;
      if (!(disc > 0.0)) return {};
      const double root = std::sqrt(disc);
      // stable pair of roots of t^2 + 2 b t + c
      const double q = b >= 0.0 ? -b - root : -b + root;
      double t0 = q, t1 = q != 0.0 ? c / q : root;
      if (t0 > t1) std::swap(t0, t1);
      return Intervals1D::normalized({{t0, t1}});
    }
    case Kind::Polytope: {
      const Interval iv = n.polytope->trace(x, u);
      return Intervals1D::normalized({iv});
    }
    case Kind::Voxels: return voxel_trace(n.grid, x, u);
    case Kind::Complement: return n.children[0].trace(x, u).complement();
    case Kind::Intersection: return n.children[0].trace(x, u).intersect(n.children[1].trace(x, u));
  }
  return {};
}

const Intervals1D& SetRegion::intervals_data() const {
  if (kind() != Kind::Intervals) throw std::logic_error("set is not an interval union");
  return node_->intervals;
}
const Halfspace& SetRegion::halfspace_data() const {
  if (kind() != Kind::Halfspace) throw std::logic_error("set is not a halfspace");
  return node_->halfspace;
}
const BallData& SetRegion::ball_data() const {
  if (kind() != Kind::Ball) throw std::logic_error("set is not a ball");
  return node_->ball;
}
const Polytope& SetRegion::polytope_data() const {
  if (kind() != Kind::Polytope) throw std::logic_error("set is not a polytope");
  return *node_->polytope;
}
const VoxelGrid& SetRegion::voxel_data() const {
  if (kind() != Kind::Voxels) throw std::logic_error("set is not a voxel grid");
  return node_->grid;
}
const SetRegion& SetRegion::child(int i) const {
  if (i < 0 || static_cast<std::size_t>(i) >= node_->children.size()) throw std::logic_error("set has no such child");
  return node_->children[static_cast<std::size_t>(i)];
}

std::string SetRegion::describe() const {
  const Node& n = *node_;
  std::ostringstream os;
  switch (n.kind) {
    case Kind::Empty: os << "empty"; break;
    case Kind::Intervals: os << "intervals[" << n.intervals.size() << "]"; break;
    case Kind::Halfspace: os << "halfspace"; break;
    case Kind::Ball: os << "ball(r=" << n.ball.radius << ")"; break;
    case Kind::Polytope: os << "polytope[" << n.polytope->facets().size() << " facets]"; break;
    case Kind::Voxels: os << "voxels"; break;
    case Kind::Complement: os << "complement(" << n.children[0].describe() << ")"; break;
    case Kind::Intersection:
      os << "intersect(" << n.children[0].describe() << ", " << n.children[1].describe() << ")";
      break;
  }
  return os.str();
}

SetRegion set_union(const SetRegion& a, const SetRegion& b) {
  return SetRegion::complement(SetRegion::intersection(SetRegion::complement(a), SetRegion::complement(b)));
}

SetRegion set_difference(const SetRegion& a, const SetRegion& b) {
  return SetRegion::intersection(a, SetRegion::complement(b));
}

std::optional<std::vector<Halfspace>> halfspace_form(const SetRegion& r) {
  using Kind = SetRegion::Kind;
  switch (r.kind()) {
    case Kind::Halfspace: return std::vector<Halfspace>{r.halfspace_data()};
    case Kind::Polytope: return r.polytope_data().halfspaces();
    case Kind::Complement:
      if (r.child(0).kind() == Kind::Halfspace) {
        const Halfspace& h = r.child(0).halfspace_data();
        return std::vector<Halfspace>{{-h.normal, -h.offset}};
      }
      return std::nullopt;
    case Kind::Intersection: {
      auto a = halfspace_form(r.child(0));
      if (!a) return std::nullopt;
      auto b = halfspace_form(r.child(1));
      if (!b) return std::nullopt;
      a->insert(a->end(), b->begin(), b->end());
      return a;
    }
    default: return std::nullopt;
  }
}

// ---------------------------------------------------------------------------
// Domain

Domain Domain::whole(int dim) {
  check_region_dim(dim);
  Domain d;
  d.dim_ = dim;
  return d;
}

Domain Domain::bounded(SetRegion region) {
  if (!region.bounding_box().bounded()) throw std::invalid_argument("domain: region is unbounded");
  if (!(region_volume(region, Domain::whole(region.dim())) > 0.0))
    throw std::invalid_argument("domain: region has zero volume");
  Domain d;
  d.dim_ = region.dim();
  d.region_ = std::move(region);
  return d;
}

const SetRegion& Domain::region() const {
  if (!region_) throw std::logic_error("domain: whole space has no region");
  return *region_;
}

std::string Domain::describe() const { return region_ ? region_->describe() : "whole"; }

SetRegion restrict_to(const SetRegion& e, const Domain& d) {
  if (e.dim() != d.dim()) throw std::invalid_argument("set and domain differ in dimension");
  return d.is_whole() ? e : SetRegion::intersection(e, d.region());
}

LineSegmentTrace trace_line(const SetRegion& e, const Domain& d, const Vec& u, const Vec& x) {
  const double len = u.norm();
  if (!(len > 0.0)) throw std::invalid_argument("trace_line: degenerate direction");
  if (std::abs(len - 1.0) > 1e-12) throw std::invalid_argument("trace_line: direction must be a unit vector");
  LineSegmentTrace t;
  t.direction = u;
  t.base = x;
  t.inside_e = e.trace(x, u);
  t.inside_domain = d.is_whole() ? Intervals1D::whole_line() : d.region().trace(x, u);
  return t;
}

// ---------------------------------------------------------------------------
// Volumes and sampling

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 31>;

void collect_breaks(const SetRegion& r, int axis, std::vector<double>& out) {
  using Kind = SetRegion::Kind;
  switch (r.kind()) {
    case Kind::Ball: {
      const auto& b = r.ball_data();
      out.push_back(b.center[axis] - b.radius);
      out.push_back(b.center[axis]);
      out.push_back(b.center[axis] + b.radius);
      break;
    }
    case Kind::Polytope:
      for (const auto& v : r.polytope_data().vertices()) out.push_back(v[axis]);
      break;
    case Kind::Complement:
    case Kind::Intersection:
      for (int i = 0; i < (r.kind() == Kind::Complement ? 1 : 2); ++i) collect_breaks(r.child(i), axis, out);
      break;
    default: break;
  }
}

double integrate_with_breaks(const std::function<double(double)>& f, double lo, double hi, std::vector<double> breaks,
                             double tol) {
  breaks.push_back(lo);
  breaks.push_back(hi);
  std::sort(breaks.begin(), breaks.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double a = std::max(lo, breaks[i]), b = std::min(hi, breaks[i + 1]);
    if (!(b > a)) continue;
    total += GK::integrate(f, a, b, 20, tol);
  }
  return total;
}

/// Volume of a bounded region by nested integration of chord lengths.
double traced_volume(const SetRegion& a, const Box& box) {
  const int n = a.dim();
  const double tol = 1e-12;
  if (n == 2) {
    std::vector<double> breaks;
    collect_breaks(a, 0, breaks);
    auto f = [&](double x1) { return a.trace(make_vec({x1, 0.0}), unit_vec(2, 1)).measure(); };
    return integrate_with_breaks(f, box.lo[0], box.hi[0], breaks, tol);
  }
  if (n == 3) {
    std::vector<double> b0, b1;
    collect_breaks(a, 0, b0);
    collect_breaks(a, 1, b1);
    auto outer = [&](double x1) {
      auto inner = [&](double x2) { return a.trace(make_vec({x1, x2, 0.0}), unit_vec(3, 2)).measure(); };
      return integrate_with_breaks(inner, box.lo[1], box.hi[1], b1, tol);
    };
    return integrate_with_breaks(outer, box.lo[0], box.hi[0], b0, tol);
  }
  throw std::invalid_argument("region_volume: no exact rule for this region in dimension " + std::to_string(n));
}

bool polytope_contains_ball(const std::vector<Halfspace>& hs, const BallData& b) {
  for (const auto& h : hs)
    if (h.normal.dot(b.center) + b.radius > h.offset) return false;
  return true;
}

}  // namespace

double region_volume(const SetRegion& e, const Domain& d) {
  using Kind = SetRegion::Kind;
  const SetRegion a = restrict_to(e, d);
  const int n = a.dim();
  if (n == 1) {
    const double m = a.trace(make_vec({0.0}), make_vec({1.0})).measure();
    if (!std::isfinite(m)) throw std::invalid_argument("region_volume: unbounded region");
    return m;
  }
  if (a.kind() == Kind::Empty) return 0.0;
  if (a.kind() == Kind::Ball) return unit_ball_volume(n) * std::pow(a.ball_data().radius, n);
  if (a.kind() == Kind::Voxels) {
    const auto& g = a.voxel_data();
    const double cell = g.cell_size().prod();
    return cell * static_cast<double>(std::count(g.occupancy.begin(), g.occupancy.end(), 1));
  }
  if (auto hs = halfspace_form(a)) {
    try {
      auto p = Polytope::try_from_halfspaces(n, *hs);
      return p ? p->volume() : 0.0;
    } catch (const std::invalid_argument&) {
      throw std::invalid_argument("region_volume: unbounded region");
    }
  }
  if (a.kind() == Kind::Intersection) {
    for (int i = 0; i < 2; ++i) {
      const SetRegion& b = a.child(i);
      const SetRegion& other = a.child(1 - i);
      if (b.kind() != Kind::Ball) continue;
      auto hs = halfspace_form(other);
      if (hs && polytope_contains_ball(*hs, b.ball_data()))
        return unit_ball_volume(n) * std::pow(b.ball_data().radius, n);
    }
  }
  const Box box = a.bounding_box();
  if (box.empty()) return 0.0;
  if (!box.bounded()) throw std::invalid_argument("region_volume: unbounded region");
  return traced_volume(a, box);
}

std::vector<Vec> sample_uniform(const SetRegion& e, const Domain& d, Rng& rng, std::size_t count) {
  const SetRegion a = restrict_to(e, d);
  const Box box = a.bounding_box();
  if (box.empty()) throw std::runtime_error("sample_uniform: region is empty");
  if (!box.bounded()) throw std::invalid_argument("sample_uniform: region is unbounded");
  const int n = a.dim();
  std::vector<Vec> out;
  out.reserve(count);
  std::size_t attempts = 0;
  while (out.size() < count) {
    Vec x(n);
    for (int i = 0; i < n; ++i) x[i] = rng.uniform(box.lo[i], box.hi[i]);
    ++attempts;
    if (a.contains(x)) out.push_back(x);
    if (attempts >= 10000 && static_cast<double>(out.size()) < 1e-3 * static_cast<double>(attempts))
      throw std::runtime_error("sample_uniform: acceptance rate below 1e-3, region is degenerate");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Perimeters

namespace {

double voxel_boundary_measure(const VoxelGrid& g) {
  const Vec h = g.cell_size();
  const double cell = h.prod();
  double total = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.occupancy[i]) continue;
    auto c = g.coords(i);
    for (int axis = 0; axis < g.dim(); ++axis) {
      for (int step : {-1, 1}) {
        auto nb = c;
        nb[static_cast<std::size_t>(axis)] += step;
        const int k = nb[static_cast<std::size_t>(axis)];
        const bool outside = k < 0 || k >= g.resolution[static_cast<std::size_t>(axis)];
        if (outside || !g.occupancy[g.index(nb)]) total += cell / h[axis];
      }
    }
  }
  return total;
}

double perimeter_bound_within(const SetRegion& r, const Box& window) {
  using Kind = SetRegion::Kind;
  switch (r.kind()) {
    case Kind::Empty: return 0.0;
    case Kind::Intervals: return static_cast<double>(r.intervals_data().boundary_count());
    case Kind::Halfspace:
      // a hyperplane section of a convex body has at most half its surface area
      return window.bounded() ? 0.5 * window.surface_area() : kInf;
    case Kind::Ball: return unit_sphere_area(r.dim()) * std::pow(r.ball_data().radius, r.dim() - 1);
    case Kind::Polytope: return r.polytope_data().surface_area();
    case Kind::Voxels: return voxel_boundary_measure(r.voxel_data());
    case Kind::Complement: return perimeter_bound_within(r.child(0), window);
    case Kind::Intersection: {
      if (auto hs = halfspace_form(r)) {
        try {
          auto p = Polytope::try_from_halfspaces(r.dim(), *hs);
          return p ? p->surface_area() : 0.0;
        } catch (const std::invalid_argument&) {
        }
      }
      const Box w = window.intersect(r.bounding_box());
      return perimeter_bound_within(r.child(0), w) + perimeter_bound_within(r.child(1), w);
    }
  }
  return kInf;
}

double perimeter_1d(const SetRegion& e, const Domain& d, const NormalWeight& weight) {
  const Vec origin = make_vec({0.0}), right = make_vec({1.0});
  const Intervals1D te = e.trace(origin, right);
  const Intervals1D td = d.is_whole() ? Intervals1D::whole_line() : d.region().trace(origin, right);
  double total = 0.0;
  const double w_right = weight(right), w_left = weight(-right);
  for (const auto& p : te.parts()) {
    if (std::isfinite(p.lo) && td.contains(p.lo)) total += w_left;
    if (std::isfinite(p.hi) && td.contains(p.hi)) total += w_right;
  }
  return total;
}

Vec perp2(const Vec& a) { return make_vec({-a[1], a[0]}); }

bool same_plane(const Halfspace& a, const Halfspace& b) {
  return (a.normal - b.normal).norm() < 1e-10 && std::abs(a.offset - b.offset) < 1e-10 * (1.0 + std::abs(a.offset));
}

bool opposite_plane(const Halfspace& a, const Halfspace& b) {
  return (a.normal + b.normal).norm() < 1e-10 && std::abs(a.offset + b.offset) < 1e-10 * (1.0 + std::abs(a.offset));
}

/// Facets of the polyhedral set E (halfspaces he) inside the polyhedral domain hd.
double polyhedral_perimeter(int dim, const std::vector<Halfspace>& he, const std::vector<Halfspace>& hd,
                            const NormalWeight& weight) {
  std::vector<Halfspace> all = he;
  all.insert(all.end(), hd.begin(), hd.end());
  std::optional<Polytope> p;
  try {
    p = Polytope::try_from_halfspaces(dim, all);
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument("perimeter: polyhedral set is unbounded inside the domain");
  }
  if (!p) return 0.0;
  double total = 0.0;
  for (const auto& f : p->facets()) {
    Halfspace plane{f.normal, 0.0};
    for (const auto& h : p->halfspaces())
      if (h.normal == f.normal) plane.offset = h.offset;
    bool from_e = false, on_domain_boundary = false;
    for (const auto& h : he) {
      Halfspace hn{h.normal / h.normal.norm(), h.offset / h.normal.norm()};
      if (same_plane(hn, plane)) from_e = true;
    }
    for (const auto& h : hd) {
      Halfspace hn{h.normal / h.normal.norm(), h.offset / h.normal.norm()};
      if (same_plane(hn, plane) || opposite_plane(hn, plane)) on_domain_boundary = true;
    }
    if (from_e && !on_domain_boundary) total += f.measure * weight(f.normal);
  }
  return total;
}

/// Circle of E = ball in 2-D: integral of weight over the arcs inside D.
double circle_perimeter(const BallData& b, const Domain& d, const NormalWeight& weight) {
  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<double> breaks = {0.0, two_pi};
  auto add_angle = [&](double a) {
    a = std::fmod(a, two_pi);
    if (a < 0) a += two_pi;
    breaks.push_back(a);
  };
  for (int k = 0; k < 8; ++k) breaks.push_back(two_pi * k / 8.0);
  if (!d.is_whole()) {
    const SetRegion& r = d.region();
    auto hs = halfspace_form(r);
    if (hs) {
      for (const auto& h : *hs) {
        // normal . (c + R (cos a, sin a)) = offset
        const double len = h.normal.norm();
        const double rhs = (h.offset - h.normal.dot(b.center)) / (b.radius * len);
        if (std::abs(rhs) >= 1.0) continue;
        const double phi = std::atan2(h.normal[1], h.normal[0]);
        const double delta = std::acos(rhs);
        add_angle(phi + delta);
        add_angle(phi - delta);
      }
    } else if (r.kind() == SetRegion::Kind::Ball) {
      const auto& o = r.ball_data();
      const Vec diff = o.center - b.center;
      const double dist = diff.norm();
      if (dist > 0.0) {
        const double cosd = (b.radius * b.radius + dist * dist - o.radius * o.radius) / (2.0 * b.radius * dist);
        if (std::abs(cosd) < 1.0) {
          const double phi = std::atan2(diff[1], diff[0]);
          add_angle(phi + std::acos(cosd));
          add_angle(phi - std::acos(cosd));
        }
      }
    } else {
      throw std::invalid_argument("perimeter: ball boundary can only be clipped to polytope or ball domains");
    }
  }
  std::sort(breaks.begin(), breaks.end());
  auto f = [&](double a) { return weight(make_vec({std::cos(a), std::sin(a)})); };
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double lo = breaks[i], hi = breaks[i + 1];
    if (!(hi > lo)) continue;
    const double mid = 0.5 * (lo + hi);
    if (!d.contains(b.center + b.radius * make_vec({std::cos(mid), std::sin(mid)}))) continue;
    total += GK::integrate(f, lo, hi, 20, 1e-13);
  }
  return b.radius * total;
}

double sphere_perimeter(const BallData& b, const NormalWeight& weight) {
  auto outer = [&](double alpha) {
    const double ca = std::cos(alpha), sa = std::sin(alpha);
    auto inner = [&](double beta) { return weight(make_vec({sa * std::cos(beta), sa * std::sin(beta), ca})); };
    return sa * GK::integrate(inner, 0.0, 2.0 * std::numbers::pi, 15, 1e-12);
  };
  const double v = GK::integrate(outer, 0.0, std::numbers::pi, 15, 1e-12);
  return b.radius * b.radius * v;
}

double weighted_perimeter_impl(const SetRegion& e, const Domain& d, const NormalWeight& weight) {
  using Kind = SetRegion::Kind;
  const int n = e.dim();
  switch (e.kind()) {
    case Kind::Empty: return 0.0;
    case Kind::Voxels:
      throw std::invalid_argument("perimeter: voxel grids use voxel_perimeter_estimate");
    case Kind::Complement:
      if (e.child(0).kind() != Kind::Halfspace)
        return weighted_perimeter_impl(e.child(0), d, [&](const Vec& v) { return weight(-v); });
      break;
    default: break;
  }
  if (e.kind() == Kind::Ball) {
    const auto& b = e.ball_data();
    if (n == 2) return circle_perimeter(b, d, weight);
    bool inside = d.is_whole();
    if (!inside) {
      auto hd = halfspace_form(d.region());
      inside = hd && polytope_contains_ball(*hd, b);
    }
    if (n == 3 && inside) return sphere_perimeter(b, weight);
    throw std::invalid_argument("perimeter: unsupported ball configuration");
  }
  auto he = halfspace_form(e);
  if (!he) throw std::invalid_argument("perimeter: unsupported set " + e.describe());
  // a single hyperplane in 2-D crosses any traceable domain along a line
  if (he->size() == 1 && n == 2) {
    if (d.is_whole()) throw std::invalid_argument("perimeter: halfspace boundary is infinite in the whole space");
    const Halfspace& h = he->front();
    const Vec nu = h.normal / h.normal.norm();
    const Vec p0 = nu * (h.offset / h.normal.norm());
    return d.region().trace(p0, perp2(nu)).measure() * weight(nu);
  }
  if (he->size() == 1 && !d.is_whole() && d.region().kind() == Kind::Ball) {
    const Halfspace& h = he->front();
    const auto& b = d.region().ball_data();
    const double dist = std::abs(h.normal.dot(b.center) - h.offset) / h.normal.norm();
    if (dist >= b.radius) return 0.0;
    const double rho = std::sqrt(b.radius * b.radius - dist * dist);
    return unit_ball_volume(n - 1) * std::pow(rho, n - 1) * weight(h.normal / h.normal.norm());
  }
  std::vector<Halfspace> hd;
  if (!d.is_whole()) {
    auto f = halfspace_form(d.region());
    if (!f) throw std::invalid_argument("perimeter: polyhedral sets can only be clipped to polyhedral domains");
    hd = *f;
  }
  return polyhedral_perimeter(n, *he, hd, weight);
}

}  // namespace

double perimeter_upper_bound(const SetRegion& r) {
  if (r.dim() == 1) {
    const auto t = r.trace(make_vec({0.0}), make_vec({1.0}));
    return static_cast<double>(t.boundary_count());
  }
  return perimeter_bound_within(r, r.bounding_box());
}

double weighted_perimeter(const SetRegion& e, const Domain& d, const NormalWeight& weight) {
  if (e.dim() != d.dim()) throw std::invalid_argument("perimeter: set and domain differ in dimension");
  if (e.dim() == 1) return perimeter_1d(e, d, weight);
  return weighted_perimeter_impl(e, d, weight);
}

double classical_perimeter(const SetRegion& e, const Domain& d) {
  return weighted_perimeter(e, d, [](const Vec&) { return 1.0; });
}

// ---------------------------------------------------------------------------
// Standard sets

SetRegion unit_cube(int dim) { return SetRegion::box(Vec::Constant(dim, -0.5), Vec::Constant(dim, 0.5)); }

SetRegion lower_halfspace(int dim) { return SetRegion::halfspace(unit_vec(dim, dim - 1), 0.0); }

SetRegion cube_strip(int dim, double d1, double d2) {
  if (!(d1 >= 0.0 && d1 < 0.5 && d2 >= 0.0 && d2 < 0.5))
    throw std::invalid_argument("strip: widths must lie in [0, 1/2)");
  if (d1 == 0.0 && d2 == 0.0) return SetRegion::empty(dim);
  if (dim == 1) {
    std::vector<Interval> parts = {{-0.5 - d2, -0.5 + d1}, {0.5 - d1, 0.5 + d2}};
    return SetRegion::intervals(Intervals1D::from_list(parts));
  }
  if (dim != 2) throw std::invalid_argument("strip: supported in dimensions 1 and 2");
  SetRegion outer = unit_cube(2);
  if (d2 > 0.0) {
    const double a = 0.5, b = 0.5 + d2;
    outer = set_union(SetRegion::box(make_vec({-b, -a}), make_vec({b, a})),
                      SetRegion::box(make_vec({-a, -b}), make_vec({a, b})));
    for (double sx : {-0.5, 0.5})
      for (double sy : {-0.5, 0.5}) outer = set_union(outer, SetRegion::ball(make_vec({sx, sy}), d2));
  }
  const SetRegion inner = SetRegion::box(Vec::Constant(2, -0.5 + d1), Vec::Constant(2, 0.5 - d1));
  return set_difference(outer, inner);
}

}  // namespace fracperim
