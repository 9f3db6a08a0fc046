#include "fracperim/minimize.hpp"

#include "fracperim/integration.hpp"
#include "fracperim/momentbody.hpp"
#include "fracperim/rng.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>

namespace fracperim {

namespace {

/// Integral over r > 0 of r^{-1-s} times the overlap area of cell_0 and
/// cell_offset shifted by r theta. The overlap is a product of tent functions.
double radial_integral(const Vec& theta, double s, const Vec& h, const std::vector<int>& offset) {
  const int n = static_cast<int>(offset.size());
  std::vector<double> breaks = {0.0};
  for (int k = 0; k < n; ++k) {
    if (theta[k] == 0.0) continue;
    for (int m = -1; m <= 1; ++m) {
      const double r = (offset[k] + m) * h[k] / theta[k];
      if (r > 0.0) breaks.push_back(r);
    }
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  double total = 0.0;
  for (std::size_t b = 0; b + 1 < breaks.size(); ++b) {
    const double r0 = breaks[b], r1 = breaks[b + 1];
    const double mid = 0.5 * (r0 + r1);
    double poly[4] = {1.0, 0.0, 0.0, 0.0};
    int deg = 0;
    bool zero = false;
    for (int k = 0; k < n && !zero; ++k) {
      const double centre = offset[k] * h[k];
      if (theta[k] == 0.0) {
        const double f = std::max(0.0, h[k] - std::abs(centre));
        if (f == 0.0) zero = true;
        for (int j = 0; j <= deg; ++j) poly[j] *= f;
        continue;
      }
      const double t = mid * theta[k];
      if (std::abs(t - centre) >= h[k]) {
        zero = true;
        break;
      }
      const double sg = t > centre ? 1.0 : -1.0;
      const double a = h[k] + sg * centre, bb = -sg * theta[k];
      for (int j = deg + 1; j >= 1; --j) poly[j] = poly[j] * a + poly[j - 1] * bb;
      poly[0] *= a;
      ++deg;
    }
    if (zero) continue;
    for (int j = 0; j <= deg; ++j) {
      if (poly[j] == 0.0) continue;
      // the overlap vanishes at r = 0, so the divergent constant term is absent there
      if (j == 0 && r0 == 0.0) continue;
      const double e = j - s;
      total += poly[j] * (std::pow(r1, e) - std::pow(r0, e)) / e;
    }
  }
  return total;
}

/// Gauss-Legendre nodes and weights on [0, 1].
template <unsigned N>
std::vector<std::pair<double, double>> unit_rule() {
  using G = boost::math::quadrature::gauss<double, N>;
  std::vector<std::pair<double, double>> rule;
  const auto& x = G::abscissa();
  const auto& w = G::weights();
  for (std::size_t i = 0; i < x.size(); ++i) {
    rule.push_back({0.5 + 0.5 * x[i], 0.5 * w[i]});
    if (x[i] != 0.0) rule.push_back({0.5 - 0.5 * x[i], 0.5 * w[i]});
  }
  return rule;
}

/// Tensor Gauss-Legendre over both cells of a 2-D pair that do not touch.
double separated_pair_weight(const KernelFamily& fam, double s, const Vec& h, const std::vector<int>& offset) {
  static const auto fine = unit_rule<6>();
  static const auto coarse = unit_rule<3>();
  const int reach = std::max(std::abs(offset[0]), std::abs(offset[1]));
  const auto& rule = reach < 8 ? fine : coarse;
  double total = 0.0;
  for (const auto& [x0, w0] : rule)
    for (const auto& [x1, w1] : rule)
      for (const auto& [y0, v0] : rule)
        for (const auto& [y1, v1] : rule) {
          const Vec z = make_vec({(offset[0] + y0 - x0) * h[0], (offset[1] + y1 - x1) * h[1]});
          total += w0 * w1 * v0 * v1 * fam.kernel(s, z);
        }
  return total * h[0] * h[0] * h[1] * h[1];
}

std::size_t table_size(const std::vector<int>& res) {
  std::size_t n = 1;
  for (int r : res) n *= static_cast<std::size_t>(2 * r - 1);
  return n;
}

std::size_t offset_index(const std::vector<int>& res, const std::vector<int>& offset) {
  std::size_t idx = 0;
  for (std::size_t k = 0; k < res.size(); ++k) idx = idx * (2 * res[k] - 1) + (offset[k] + res[k] - 1);
  return idx;
}

std::vector<int> offset_from_index(const std::vector<int>& res, std::size_t idx) {
  std::vector<int> off(res.size());
  for (std::size_t k = res.size(); k-- > 0;) {
    const std::size_t w = 2 * res[k] - 1;
    off[k] = static_cast<int>(idx % w) - (res[k] - 1);
    idx /= w;
  }
  return off;
}

/// Per-cell sums F_i = sum_j w_ij occ_j and W_i = sum_j w_ij.
struct Fields {
  std::vector<double> filled, total;
};

Fields make_fields(const VoxelProblem& p, const std::vector<std::uint8_t>& occ) {
  const std::size_t n = p.size();
  Fields f{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double w = p.weight(i, j);
      f.total[i] += w;
      if (occ[j]) f.filled[i] += w;
    }
  return f;
}

double flip_delta(const Fields& f, const std::vector<std::uint8_t>& occ, std::size_t i) {
  return occ[i] ? 2.0 * f.filled[i] - f.total[i] : f.total[i] - 2.0 * f.filled[i];
}

void apply_flip(const VoxelProblem& p, Fields& f, std::vector<std::uint8_t>& occ, std::size_t i) {
  occ[i] = !occ[i];
  const double sign = occ[i] ? 1.0 : -1.0;
  for (std::size_t j = 0; j < p.size(); ++j)
    if (j != i) f.filled[j] += sign * p.weight(i, j);
}

std::vector<std::size_t> free_cells(const VoxelProblem& p) {
  std::vector<std::size_t> cells;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p.omega_mask[i]) cells.push_back(i);
  return cells;
}

}  // namespace

double cell_pair_weight(const KernelFamily& fam, double s, const Vec& cell, const std::vector<int>& offset) {
  const int n = static_cast<int>(offset.size());
  if (n != fam.dim()) throw std::invalid_argument("cell weight: offset dimension differs from kernel");
  if (std::all_of(offset.begin(), offset.end(), [](int o) { return o == 0; }))
    throw std::invalid_argument("cell weight: a cell does not interact with itself");
  if (n == 1) {
    const double h = cell[0];
    const Intervals1D a = Intervals1D::from_list({{0.0, h}});
    const Intervals1D b = Intervals1D::from_list({{offset[0] * h, (offset[0] + 1) * h}});
    return interaction_1d(a, b, s, fam.direction_weight(s, make_vec({-1.0})),
                          fam.direction_weight(s, make_vec({1.0})));
  }
  if (n != 2) throw std::invalid_argument("cell weight: dimensions 1 and 2 only");
  // the radial closed form cancels badly for distant cells, whose integrand is smooth anyway
  if (std::max(std::abs(offset[0]), std::abs(offset[1])) >= 3) return separated_pair_weight(fam, s, cell, offset);
  // angles where the piecewise structure of the radial integrand changes
  std::vector<double> cuts = {0.0, 0.5 * std::numbers::pi, std::numbers::pi, 1.5 * std::numbers::pi,
                              2.0 * std::numbers::pi};
  for (int m0 = -1; m0 <= 1; ++m0)
    for (int m1 = -1; m1 <= 1; ++m1) {
      const double x = (offset[0] + m0) * cell[0], y = (offset[1] + m1) * cell[1];
      if (x == 0.0 && y == 0.0) continue;
      double a = std::atan2(y, x);
      if (a < 0.0) a += 2.0 * std::numbers::pi;
      cuts.push_back(a);
    }
  std::sort(cuts.begin(), cuts.end());
  auto integrand = [&](double phi) {
    const Vec u = make_vec({std::cos(phi), std::sin(phi)});
    const double j = radial_integral(u, s, cell, offset);
    return j == 0.0 ? 0.0 : fam.direction_weight(s, u) * j;
  };
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] - cuts[i] < 1e-14) continue;
    total += GK::integrate(integrand, cuts[i], cuts[i + 1], 10, 1e-10);
  }
  return total;
}

std::size_t VoxelProblem::free_count() const {
  return static_cast<std::size_t>(std::count(omega_mask.begin(), omega_mask.end(), std::uint8_t{1}));
}

std::vector<std::uint8_t> VoxelProblem::fill(bool inside) const {
  std::vector<std::uint8_t> occ = grid.occupancy;
  for (std::size_t i = 0; i < occ.size(); ++i)
    if (omega_mask[i]) occ[i] = inside ? 1 : 0;
  return occ;
}

VoxelProblem make_voxel_problem(VoxelGrid exterior_data, std::vector<std::uint8_t> omega_mask,
                                const KernelFamily& fam, double s, WeightScheme scheme) {
  exterior_data.validate();
  const int n = exterior_data.dim();
  if (n != fam.dim()) throw std::invalid_argument("voxel problem: grid dimension differs from kernel");
  if (n != 1 && n != 2) throw std::invalid_argument("voxel problem: dimensions 1 and 2 only");
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("voxel problem: s must lie in (0, 1)");
  if (omega_mask.size() != exterior_data.size()) throw std::invalid_argument("voxel problem: mask size mismatch");
  VoxelProblem p;
  p.grid = std::move(exterior_data);
  p.omega_mask = std::move(omega_mask);
  p.s = s;
  p.fam = fam;
  p.scheme = scheme;
  const Vec h = p.grid.cell_size();
  const auto& res = p.grid.resolution;
  const std::size_t count = table_size(res);
  p.offset_weights.assign(count, 0.0);
  p.table_center = static_cast<std::ptrdiff_t>(offset_index(res, std::vector<int>(n, 0)));
  p.table_pos.resize(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto c = p.grid.coords(i);
    std::ptrdiff_t pos = 0;
    for (int k = 0; k < n; ++k) pos = pos * (2 * res[k] - 1) + c[k];
    p.table_pos[i] = pos;
  }
  double cell_volume = 1.0;
  for (int k = 0; k < n; ++k) cell_volume *= h[k];
  // offsets come in +- pairs; the table is filled symmetrically from one of each
  for (std::size_t idx = 0; idx < count; ++idx) {
    const auto off = offset_from_index(res, idx);
    std::vector<int> neg(off.size());
    for (std::size_t k = 0; k < off.size(); ++k) neg[k] = -off[k];
    const std::size_t mirror = offset_index(res, neg);
    if (mirror < idx) continue;
    if (std::all_of(off.begin(), off.end(), [](int o) { return o == 0; })) continue;
    bool near = true;
    for (int k = 0; k < n; ++k) near = near && std::abs(off[k]) <= std::max(1, res[k] / 8);
    double w;
    if (scheme == WeightScheme::Exact || near) {
      w = 0.5 * (cell_pair_weight(fam, s, h, off) + cell_pair_weight(fam, s, h, neg));
    } else {
      Vec z(n);
      for (int k = 0; k < n; ++k) z[k] = off[k] * h[k];
      w = 0.5 * (fam.kernel(s, z) + fam.kernel(s, -z)) * cell_volume * cell_volume;
    }
    p.offset_weights[idx] = w;
    p.offset_weights[mirror] = w;
  }
  // interaction of Omega cells with everything beyond the grid
  const double per_cell = cell_volume * fam.c() * unit_sphere_area(n) / s;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!p.omega_mask[i]) continue;
    const auto c = p.grid.coords(i);
    double d = std::numeric_limits<double>::infinity();
    for (int k = 0; k < n; ++k) d = std::min({d, c[k] * h[k], (res[k] - 1 - c[k]) * h[k]});
    p.tail_bound += d > 0.0 ? per_cell * std::pow(d, -s) : std::numeric_limits<double>::infinity();
  }
  return p;
}

VoxelProblem voxel_problem_from_regions(const Box& box, const std::vector<int>& resolution, const SetRegion& omega,
                                        const SetRegion& exterior, const KernelFamily& fam, double s,
                                        WeightScheme scheme) {
  VoxelGrid g;
  g.lo = box.lo;
  g.hi = box.hi;
  g.resolution = resolution;
  g.occupancy.assign(g.size(), 0);
  g.validate();
  std::vector<std::uint8_t> mask(g.size(), 0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec c = g.center(i);
    mask[i] = omega.contains(c) ? 1 : 0;
    g.occupancy[i] = !mask[i] && exterior.contains(c) ? 1 : 0;
  }
  return make_voxel_problem(std::move(g), std::move(mask), fam, s, scheme);
}

void check_exterior(const VoxelProblem& p, const std::vector<std::uint8_t>& occupancy) {
  if (occupancy.size() != p.size()) throw std::invalid_argument("occupancy size differs from the grid");
  for (std::size_t i = 0; i < p.size(); ++i)
    if (!p.omega_mask[i] && (occupancy[i] != 0) != (p.grid.occupancy[i] != 0))
      throw std::invalid_argument("occupancy changes the exterior data outside Omega");
}

double discrete_energy_within(const VoxelProblem& p, const std::vector<std::uint8_t>& occupancy,
                              const std::vector<std::uint8_t>& mask) {
  if (occupancy.size() != p.size() || mask.size() != p.size())
    throw std::invalid_argument("occupancy size differs from the grid");
  double e = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = i + 1; j < p.size(); ++j)
      if ((mask[i] || mask[j]) && (occupancy[i] != 0) != (occupancy[j] != 0)) e += p.weight(i, j);
  return e;
}

double discrete_energy(const VoxelProblem& p, const std::vector<std::uint8_t>& occupancy) {
  check_exterior(p, occupancy);
  return discrete_energy_within(p, occupancy, p.omega_mask);
}

double best_single_flip(const VoxelProblem& p, const std::vector<std::uint8_t>& occupancy) {
  check_exterior(p, occupancy);
  const Fields f = make_fields(p, occupancy);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i : free_cells(p)) best = std::min(best, flip_delta(f, occupancy, i));
  return best;
}

MinimizeTrace local_minimize(const VoxelProblem& p, std::vector<std::uint8_t> occ, const Schedule& schedule,
                             std::uint64_t seed) {
  check_exterior(p, occ);
  if (schedule.max_sweeps < 1) throw std::invalid_argument("minimize: max_sweeps must be positive");
  MinimizeTrace t;
  t.seed = seed;
  const auto cells = free_cells(p);
  Fields f = make_fields(p, occ);
  const double w_max = f.total.empty() ? 0.0 : *std::max_element(f.total.begin(), f.total.end());
  const double threshold = 1e-12 * std::max(w_max, 1e-300);
  double energy = discrete_energy(p, occ);
  t.energies.push_back(energy);

  if (schedule.anneal && !cells.empty()) {
    Rng rng(seed);
    double temp = schedule.t0 * w_max;
    for (int level = 0; level < schedule.levels; ++level, temp *= schedule.cooling) {
      for (int sweep = 0; sweep < schedule.sweeps_per_level; ++sweep) {
        for (std::size_t i : cells) {
          const double d = flip_delta(f, occ, i);
          if (d < 0.0 || (temp > 0.0 && rng.uniform() < std::exp(-d / temp))) {
            apply_flip(p, f, occ, i);
            energy += d;
            ++t.flips;
          }
        }
        t.energies.push_back(energy);
      }
    }
  }

  for (int sweep = 0; sweep < schedule.max_sweeps; ++sweep) {
    bool improved = false;
    for (std::size_t i : cells) {
      const double d = flip_delta(f, occ, i);
      if (d < -threshold) {
        apply_flip(p, f, occ, i);
        energy += d;
        ++t.flips;
        improved = true;
      }
    }
    t.energies.push_back(energy);
    if (!improved) {
      t.converged = true;
      break;
    }
  }
  t.energy = discrete_energy(p, occ);
  t.occupancy = std::move(occ);
  return t;
}

MinimizeTrace multi_start_minimize(const VoxelProblem& p, const Schedule& schedule, std::uint64_t seed, int starts) {
  if (starts < 1) throw std::invalid_argument("minimize: at least one start is required");
  std::optional<MinimizeTrace> best;
  for (int k = 0; k < starts; ++k) {
    std::vector<std::uint8_t> init;
    if (k == 0) {
      init = p.fill(false);
    } else if (k == 1) {
      init = p.fill(true);
    } else {
      init = p.fill(false);
      Rng rng(derive_seed(seed, 1000 + k));
      for (std::size_t i = 0; i < init.size(); ++i)
        if (p.omega_mask[i]) init[i] = rng.uniform() < 0.5 ? 1 : 0;
    }
    MinimizeTrace t = local_minimize(p, std::move(init), schedule, derive_seed(seed, k));
    if (!best || t.energy < best->energy) best = std::move(t);
  }
  best->seed = seed;
  return *best;
}

BruteForceResult brute_force_minimum(const VoxelProblem& p) {
  const auto cells = free_cells(p);
  if (cells.size() > 24) throw std::invalid_argument("brute force: more than 24 free cells");
  std::vector<std::uint8_t> occ = p.fill(false);
  Fields f = make_fields(p, occ);
  double energy = discrete_energy(p, occ);
  double best = energy;
  std::uint64_t best_code = 0, code = 0;
  const std::uint64_t total = std::uint64_t{1} << cells.size();
  for (std::uint64_t g = 1; g < total; ++g) {
    // Gray code: flip the lowest set bit of g
    const int bit = std::countr_zero(g);
    const std::size_t i = cells[bit];
    energy += flip_delta(f, occ, i);
    apply_flip(p, f, occ, i);
    code ^= std::uint64_t{1} << bit;
    if (energy < best) {
      best = energy;
      best_code = code;
    }
  }
  BruteForceResult r;
  r.occupancy = p.fill(false);
  for (std::size_t b = 0; b < cells.size(); ++b)
    if (best_code >> b & 1U) r.occupancy[cells[b]] = 1;
  r.energy = discrete_energy(p, r.occupancy);
  return r;
}

namespace {

VoxelProblem study_problem(const StudyTemplate& t, double s) {
  if (t.exterior_cells.empty())
    return voxel_problem_from_regions(t.box, t.resolution, t.omega, t.exterior, t.fam, s, t.scheme);
  VoxelGrid g;
  g.lo = t.box.lo;
  g.hi = t.box.hi;
  g.resolution = t.resolution;
  if (t.exterior_cells.size() != g.size()) throw std::invalid_argument("study: exterior cell data differs from the grid");
  g.occupancy = t.exterior_cells;
  g.validate();
  std::vector<std::uint8_t> mask(g.size(), 0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    mask[i] = t.omega.contains(g.center(i)) ? 1 : 0;
    if (mask[i]) g.occupancy[i] = 0;
  }
  return make_voxel_problem(std::move(g), std::move(mask), t.fam, s, t.scheme);
}

}  // namespace

StudyReport minimizer_convergence_study(const StudyTemplate& t, const std::vector<double>& s_list,
                                        const Schedule& schedule, std::uint64_t seed) {
  StudyReport rep;
  rep.flat_target = t.flat_target;
  rep.bounded = true;
  rep.stable = true;
  const std::vector<std::uint8_t>* previous = nullptr;
  for (std::size_t k = 0; k < s_list.size(); ++k) {
    const double s = s_list[k];
    const VoxelProblem p = study_problem(t, s);
    std::vector<std::uint8_t> inner(p.size(), 0), flat(p.size(), 0);
    // column key: all coordinates but the last
    std::map<std::vector<int>, std::size_t> columns;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const Vec c = p.grid.center(i);
      inner[i] = t.inner.contains(c) ? 1 : 0;
      flat[i] = t.exterior_cells.empty() ? (t.exterior.contains(c) ? 1 : 0) : t.exterior_cells[i];
      if (p.omega_mask[i]) {
        auto key = p.grid.coords(i);
        key.pop_back();
        columns.emplace(key, 0);
      }
    }
    StudyEntry e;
    e.s = s;
    if (p.free_count() > 0) {
      e.trace = multi_start_minimize(p, schedule, derive_seed(seed, k));
    } else {
      e.trace.occupancy = p.fill(false);
      e.trace.converged = true;
      e.trace.energy = discrete_energy(p, e.trace.occupancy);
    }
    const auto& occ = e.trace.occupancy;
    e.rescaled_inner = (1.0 - s) * discrete_energy_within(p, occ, inner);
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (!p.omega_mask[i] || occ[i] == flat[i]) continue;
      auto key = p.grid.coords(i);
      key.pop_back();
      ++columns[key];
    }
    std::size_t good = 0;
    for (const auto& [key, miss] : columns)
      if (miss <= 1) ++good;
    e.flat_columns = columns.empty() ? 1.0 : static_cast<double>(good) / columns.size();
    if (previous) {
      for (std::size_t i = 0; i < occ.size(); ++i)
        if (occ[i] != (*previous)[i]) ++e.symdiff;
      e.layers = columns.empty() ? 0.0 : static_cast<double>(e.symdiff) / columns.size();
      if (e.layers > 2.0) rep.stable = false;
    }
    if (e.rescaled_inner > 2.0 * t.flat_target) rep.bounded = false;
    rep.entries.push_back(std::move(e));
    previous = &rep.entries.back().trace.occupancy;
  }
  rep.passed = rep.bounded && rep.stable;
  return rep;
}

StudyTemplate halfplane_study_template(const KernelFamily& fam, int cells) {
  const int n = fam.dim();
  if (n != 1 && n != 2) throw std::invalid_argument("study: dimensions 1 and 2 only");
  if (cells < 2 || cells % 2 != 0) throw std::invalid_argument("study: cells must be a positive even number");
  const double h = 1.0 / cells;
  const double half = 0.5 + 4.0 * h;
  const SetRegion inner = SetRegion::box(Vec::Constant(n, -0.375), Vec::Constant(n, 0.375));
  const SetRegion exterior = lower_halfspace(n);
  const MomentNorm m = moment_norm_from_gauge(fam.limit_gauge());
  StudyTemplate t{Box{Vec::Constant(n, -half), Vec::Constant(n, half)},
                  std::vector<int>(n, cells + 8),
                  unit_cube(n),
                  exterior,
                  {},
                  inner,
                  fam,
                  anisotropic_perimeter(exterior, Domain::bounded(inner), m),
                  WeightScheme::Exact};
  return t;
}

std::string occupancy_to_text(const VoxelGrid& grid, const std::vector<std::uint8_t>& occupancy) {
  if (occupancy.size() != grid.size()) throw std::invalid_argument("occupancy size differs from the grid");
  std::string out;
  if (grid.dim() == 1) {
    for (auto v : occupancy) out += v ? '1' : '0';
    return out + '\n';
  }
  if (grid.dim() != 2) throw std::invalid_argument("occupancy text: dimensions 1 and 2 only");
  const int nx = grid.resolution[0], ny = grid.resolution[1];
  for (int y = ny - 1; y >= 0; --y) {
    for (int x = 0; x < nx; ++x) out += occupancy[grid.index({x, y})] ? '1' : '0';
    out += '\n';
  }
  return out;
}

}  // namespace fracperim
