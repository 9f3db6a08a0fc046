#include "doctest.h"

#include "fracperim/integration.hpp"
#include "fracperim/minimize.hpp"
#include "fracperim/rng.hpp"

#include <cmath>
#include <limits>

using namespace fracperim;

namespace {

KernelFamily euclid(int n) { return KernelFamily::from_gauge(euclidean_norm(n)); }

// 6x6 grid with the inner 4x4 block free and random exterior data.
VoxelProblem small_planar(double s, std::uint64_t seed, const KernelFamily& fam) {
  Rng rng(seed);
  VoxelGrid g;
  g.lo = make_vec({0.0, 0.0});
  g.hi = make_vec({1.0, 1.0});
  g.resolution = {6, 6};
  g.occupancy.assign(g.size(), 0);
  std::vector<std::uint8_t> mask(g.size(), 0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto c = g.coords(i);
    mask[i] = c[0] >= 1 && c[0] <= 4 && c[1] >= 1 && c[1] <= 4;
    if (!mask[i]) g.occupancy[i] = rng.uniform() < 0.5;
  }
  return make_voxel_problem(g, mask, fam, s);
}

// Omega = (-1/2, 1/2) inside the grid (-1, 1), exterior data {x <= 0}.
VoxelProblem halfline(int cells_per_unit, double s, WeightScheme scheme) {
  return voxel_problem_from_regions(Box{make_vec({-1.0}), make_vec({1.0})}, {2 * cells_per_unit},
                                    SetRegion::box(make_vec({-0.5}), make_vec({0.5})), lower_halfspace(1), euclid(1),
                                    s, scheme);
}

std::vector<std::uint8_t> halfline_fill(const VoxelProblem& p) {
  std::vector<std::uint8_t> occ(p.size(), 0);
  for (std::size_t i = 0; i < occ.size(); ++i) occ[i] = p.grid.center(i)[0] < 0.0;
  return occ;
}

// Pairs of the truncated configuration that touch Omega, from the exact pair formula.
double halfline_reference(double s) {
  const auto inter = [s](Interval a, Interval b) {
    return interaction_1d(Intervals1D::from_list({a}), Intervals1D::from_list({b}), s);
  };
  return inter({-0.5, 0.0}, {0.0, 1.0}) + inter({-1.0, -0.5}, {0.0, 0.5});
}

}  // namespace

TEST_CASE("energy basics") {
  const VoxelProblem p = small_planar(0.5, 1, euclid(2));
  VoxelProblem blank = p;
  blank.grid.occupancy.assign(p.size(), 0);
  CHECK(discrete_energy(blank, std::vector<std::uint8_t>(p.size(), 0)) == 0.0);
  // swapping E and E^c everywhere leaves the energy unchanged
  VoxelProblem flipped = p;
  for (auto& v : flipped.grid.occupancy) v = !v;
  Rng rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<std::uint8_t> occ = p.fill(false);
    for (std::size_t i = 0; i < occ.size(); ++i)
      if (p.omega_mask[i]) occ[i] = rng.uniform() < 0.5;
    std::vector<std::uint8_t> inv(occ.size());
    for (std::size_t i = 0; i < occ.size(); ++i) inv[i] = !occ[i];
    CHECK(discrete_energy(flipped, inv) == doctest::Approx(discrete_energy(p, occ)).epsilon(1e-13));
  }
  for (std::size_t i = 0; i < p.size(); i += 5)
    for (std::size_t j = 0; j < p.size(); j += 7) CHECK(p.weight(i, j) == p.weight(j, i));
}

TEST_CASE("one-dimensional discrete energy against the pair formula") {
  const double ref = halfline_reference(0.5);
  CHECK(ref == doctest::Approx(2.20204102887).epsilon(1e-10));
  for (int m : {16, 32, 64}) {
    const VoxelProblem p = halfline(m, 0.5, WeightScheme::Exact);
    CHECK(discrete_energy(p, halfline_fill(p)) == doctest::Approx(ref).epsilon(1e-13));
  }
  const VoxelProblem fine = halfline(64, 0.5, WeightScheme::Collocation);
  CHECK(std::abs(discrete_energy(fine, halfline_fill(fine)) - ref) <= 0.05 * ref);
  // collocation error shrinks at least linearly in h
  std::vector<double> err;
  for (int m : {16, 32, 64}) {
    const VoxelProblem p = halfline(m, 0.5, WeightScheme::Collocation);
    err.push_back(std::abs(discrete_energy(p, halfline_fill(p)) - ref));
  }
  for (std::size_t i = 1; i < err.size(); ++i) CHECK(std::log2(err[i - 1] / err[i]) >= 1.0);
}

TEST_CASE("local minimization") {
  const VoxelProblem p = small_planar(0.6, 3, euclid(2));
  std::vector<std::uint8_t> bad = p.fill(true);
  for (std::size_t i = 0; i < bad.size(); ++i)
    if (!p.omega_mask[i]) {
      bad[i] = !bad[i];
      break;
    }
  CHECK_THROWS_AS(check_exterior(p, bad), std::invalid_argument);

  const MinimizeTrace t = local_minimize(p, p.fill(false), Schedule{}, 5);
  CHECK(t.converged);
  CHECK_NOTHROW(check_exterior(p, t.occupancy));
  for (std::size_t i = 1; i < t.energies.size(); ++i) CHECK(t.energies[i] <= t.energies[i - 1] + 1e-12);
  CHECK(t.energy == doctest::Approx(discrete_energy(p, t.occupancy)).epsilon(1e-12));
  CHECK(best_single_flip(p, t.occupancy) >= -1e-12);
  const MinimizeTrace again = local_minimize(p, t.occupancy, Schedule{}, 6);
  CHECK(again.flips == 0);
  CHECK(again.occupancy == t.occupancy);
}

TEST_CASE("multi-start attains the exhaustive minimum") {
  const KernelFamily linf = KernelFamily::from_gauge(lp_norm(2, std::numeric_limits<double>::infinity()));
  for (std::uint64_t k = 0; k < 4; ++k) {
    const VoxelProblem p = small_planar(0.35 + 0.15 * static_cast<double>(k), 100 + k, k % 2 ? linf : euclid(2));
    const BruteForceResult best = brute_force_minimum(p);
    const MinimizeTrace t = multi_start_minimize(p, Schedule{}, 200 + k);
    CHECK(t.energy <= best.energy + 1e-10 * std::max(1.0, best.energy));
    CHECK(best.energy == doctest::Approx(discrete_energy(p, best.occupancy)).epsilon(1e-12));
  }
  // a single free cell
  VoxelGrid g;
  g.lo = make_vec({0.0});
  g.hi = make_vec({1.0});
  g.resolution = {5};
  g.occupancy = {1, 1, 0, 0, 0};
  const VoxelProblem one = make_voxel_problem(g, {0, 0, 1, 0, 0}, euclid(1), 0.5);
  CHECK(one.free_count() == 1);
  const BruteForceResult b = brute_force_minimum(one);
  const MinimizeTrace t = multi_start_minimize(one, Schedule{}, 1);
  CHECK(t.energy == doctest::Approx(b.energy).epsilon(1e-14));
}

TEST_CASE("one-dimensional minimizer is a single jump") {
  // On the truncated window the jump drifts to the edge of Omega, where the
  // interaction of (-1, t) with (t, 1) is smallest; on the whole line all
  // jump positions tie.
  const VoxelProblem p = halfline(16, 0.5, WeightScheme::Exact);
  const MinimizeTrace t = multi_start_minimize(p, Schedule{}, 9);
  int jumps = 0;
  for (std::size_t i = 1; i < t.occupancy.size(); ++i) {
    CHECK(t.occupancy[i] <= t.occupancy[i - 1]);
    jumps += t.occupancy[i] != t.occupancy[i - 1];
  }
  CHECK(jumps == 1);
  CHECK(t.energy <= discrete_energy(p, halfline_fill(p)));
}

TEST_CASE("occupancy text") {
  VoxelGrid g;
  g.lo = make_vec({0.0, 0.0});
  g.hi = make_vec({1.0, 1.0});
  g.resolution = {3, 2};
  std::vector<std::uint8_t> occ(g.size(), 0);
  occ[g.index({0, 1})] = 1;
  occ[g.index({2, 0})] = 1;
  CHECK(occupancy_to_text(g, occ) == "100\n001\n");
  CHECK_THROWS(occupancy_to_text(g, {1, 0}));
}

TEST_CASE("planar study with annealing finds the flat interface") {
  const StudyTemplate t = halfplane_study_template(euclid(2), 32);
  Schedule schedule;
  schedule.anneal = true;
  const StudyReport r = minimizer_convergence_study(t, {0.8}, schedule, 7);
  REQUIRE(r.entries.size() == 1);
  CHECK(r.entries[0].flat_columns >= 0.95);
  CHECK(r.bounded);
}
