#include "doctest.h"

#include "fracperim/geometry.hpp"

#include <cmath>
#include <numbers>

using namespace fracperim;

namespace {

SetRegion iv(std::vector<Interval> parts) { return SetRegion::intervals(Intervals1D::from_list(std::move(parts))); }
SetRegion disk() { return SetRegion::ball(make_vec({0.0, 0.0}), 1.0); }
SetRegion unit_square() { return SetRegion::box(make_vec({0.0, 0.0}), make_vec({1.0, 1.0})); }

}  // namespace

TEST_CASE("intervals validate and normalize") {
  CHECK_THROWS_AS(Intervals1D::from_list({{0.0, 1.0}, {1.0, 2.0}}), std::invalid_argument);
  CHECK_THROWS_AS(Intervals1D::from_list({{1.0, 0.0}}), std::invalid_argument);
  const Intervals1D n = Intervals1D::normalized({{1.0, 2.0}, {0.0, 1.0}, {3.0, 3.0}});
  REQUIRE(n.size() == 1);
  CHECK(n.parts()[0] == Interval{0.0, 2.0});
  const Intervals1D a = Intervals1D::from_list({{0.0, 1.0}, {2.0, 3.0}});
  CHECK(a.complement().complement() == a);
  CHECK(a.boundary_count() == 4);
  CHECK(a.measure() == 2.0);
  CHECK(a.affine(2.0, 1.0) == Intervals1D::from_list({{1.0, 3.0}, {5.0, 7.0}}));
}

TEST_CASE("classical perimeter") {
  CHECK(classical_perimeter(iv({{0.0, 1.0}, {2.0, 3.0}}), Domain::whole(1)) == 4.0);
  CHECK(classical_perimeter(disk(), Domain::whole(2)) == doctest::Approx(2.0 * std::numbers::pi).epsilon(1e-12));
  CHECK(classical_perimeter(unit_square(), Domain::whole(2)) == doctest::Approx(4.0).epsilon(1e-14));
  // halfspace inside the cube: one flat face of measure 1
  CHECK(classical_perimeter(lower_halfspace(2), Domain::bounded(unit_cube(2))) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(classical_perimeter(lower_halfspace(3), Domain::bounded(unit_cube(3))) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("trace_line examples") {
  const Intervals1D d = disk().trace(make_vec({0.0, 0.0}), make_vec({1.0, 0.0}));
  REQUIRE(d.size() == 1);
  CHECK(d.parts()[0].lo == doctest::Approx(-1.0));
  CHECK(d.parts()[0].hi == doctest::Approx(1.0));
  const LineSegmentTrace t = trace_line(unit_square(), Domain::whole(2), make_vec({0.0, 1.0}), make_vec({0.5, 0.0}));
  REQUIRE(t.inside_e.size() == 1);
  CHECK(t.inside_e.measure() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(disk().trace(make_vec({0.0, 2.0}), make_vec({1.0, 0.0})).empty());
}

TEST_CASE("trace_line agrees with membership") {
  Rng rng(77);
  const std::vector<SetRegion> regions = {
      disk(), unit_square(),
      set_difference(SetRegion::box(make_vec({-1.0, -1.0}), make_vec({1.0, 1.0})),
                     SetRegion::ball(make_vec({0.2, 0.1}), 0.5)),
      SetRegion::polytope(Polytope::from_vertices(
          2, {make_vec({0.0, 0.0}), make_vec({1.0, 0.2}), make_vec({0.4, 1.1}), make_vec({-0.3, 0.6})}))};
  for (const auto& r : regions) {
    for (int i = 0; i < 2500; ++i) {
      const Vec u = rng.direction(2);
      const Vec x = make_vec({rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)});
      const Intervals1D tr = r.trace(x, u);
      for (const Interval& p : tr.parts()) {
        CHECK(r.contains(x + 0.5 * (p.lo + p.hi) * u));
        CHECK_FALSE(r.contains(x + (p.lo - 1e-6) * u));
        CHECK_FALSE(r.contains(x + (p.hi + 1e-6) * u));
      }
    }
  }
}

TEST_CASE("region volume") {
  CHECK(region_volume(unit_square(), Domain::whole(2)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(region_volume(disk(), Domain::whole(2)) == doctest::Approx(std::numbers::pi).epsilon(1e-9));
  CHECK(region_volume(iv({{0.0, 1.0}, {2.0, 3.0}}), Domain::whole(1)) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(region_volume(lower_halfspace(2), Domain::bounded(unit_cube(2))) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("sample_uniform") {
  SUBCASE("unit square mean") {
    Rng rng(3);
    const auto pts = sample_uniform(unit_square(), Domain::whole(2), rng, 20000);
    Vec mean = Vec::Zero(2);
    for (const auto& p : pts) {
      CHECK(p.minCoeff() >= 0.0);
      CHECK(p.maxCoeff() <= 1.0);
      mean += p;
    }
    mean /= static_cast<double>(pts.size());
    const double sigma = std::sqrt(1.0 / 12.0 / pts.size());
    CHECK(std::abs(mean[0] - 0.5) <= 3 * sigma);
    CHECK(std::abs(mean[1] - 0.5) <= 3 * sigma);
  }
  SUBCASE("complement of the disk inside its square") {
    Rng rng(4);
    const auto pts = sample_uniform(SetRegion::complement(disk()),
                                    Domain::bounded(SetRegion::box(make_vec({-1.0, -1.0}), make_vec({1.0, 1.0}))), rng,
                                    2000);
    for (const auto& p : pts) CHECK(p.norm() >= 1.0);
  }
  SUBCASE("seeded reference list") {
    Rng rng(42);
    const auto pts = sample_uniform(iv({{0.0, 1.0}}), Domain::whole(1), rng, 10);
    const double expected[] = {0x1.1e0c5b02ab5dp-3,  0x1.f04ac971d9e1ep-1, 0x1.f0bd856c1255cp-1, 0x1.fd4e08fee901p-3,
                               0x1.65026487c08e3p-1, 0x1.3fdeed0f6b3e1p-1, 0x1.92e6b92e6cd8p-2,  0x1.e69d96bcb13aep-2,
                               0x1.d597e837538fp-4,  0x1.0d4c309b4a99cp-3};
    REQUIRE(pts.size() == 10);
    for (int i = 0; i < 10; ++i) CHECK(pts[i][0] == expected[i]);
  }
  SUBCASE("acceptance floor") {
    Rng rng(1);
    // thin annulus: area 6.3e-4 inside a bounding box of area 4
    const SetRegion annulus = set_difference(disk(), SetRegion::ball(make_vec({0.0, 0.0}), 0.9999));
    CHECK_THROWS_AS(sample_uniform(annulus, Domain::whole(2), rng, 10), std::runtime_error);
  }
}

TEST_CASE("polytope facet closure") {
  const Polytope p = Polytope::from_halfspaces(3, {{make_vec({-1.0, 0.0, 0.0}), 0.0},
                                                  {make_vec({0.0, -1.0, 0.0}), 0.0},
                                                  {make_vec({0.0, 0.0, -1.0}), 0.0},
                                                  {make_vec({1.0, 1.0, 1.0}), 1.0},
                                                  {make_vec({1.0, -2.0, 0.5}), 0.4}});
  CHECK(p.closure_residual() <= 1e-9 * p.surface_area());
  const Polytope q = Polytope::box(make_vec({0.0, 0.0}), make_vec({2.0, 1.0}));
  CHECK(q.volume() == doctest::Approx(2.0));
  CHECK(q.surface_area() == doctest::Approx(6.0));
}

TEST_CASE("complement involution and set algebra") {
  Rng rng(8);
  const SetRegion a = SetRegion::ball(make_vec({0.2, 0.0}), 0.7);
  const SetRegion b = unit_square();
  const SetRegion cc = SetRegion::complement(SetRegion::complement(a));
  const SetRegion u = set_union(a, b), d = set_difference(a, b);
  for (int i = 0; i < 2000; ++i) {
    const Vec x = make_vec({rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)});
    CHECK(cc.contains(x) == a.contains(x));
    CHECK(u.contains(x) == (a.contains(x) || b.contains(x)));
    CHECK(d.contains(x) == (a.contains(x) && !b.contains(x)));
  }
  // a De Morgan union of bounded sets is bounded
  CHECK(u.bounding_box().bounded());
}

TEST_CASE("domains") {
  CHECK_THROWS_AS(Domain::bounded(lower_halfspace(2)), std::invalid_argument);
  CHECK(Domain::whole(2).is_whole());
  CHECK(Domain::bounded(cube_strip(2, 0.1, 0.1)).dim() == 2);
  // the empty strip is not a domain
  CHECK(cube_strip(2, 0.0, 0.0).bounding_box().empty());
}

TEST_CASE("voxel grid indexing") {
  VoxelGrid g;
  g.lo = make_vec({0.0, 0.0});
  g.hi = make_vec({1.0, 2.0});
  g.resolution = {4, 8};
  g.occupancy.assign(g.size(), 0);
  g.validate();
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(g.index(g.coords(i)) == i);
    CHECK(g.locate(g.center(i)) == i);
  }
  CHECK_FALSE(g.locate(make_vec({1.5, 0.5})).has_value());
  g.occupancy.pop_back();
  CHECK_THROWS(g.validate());
}
