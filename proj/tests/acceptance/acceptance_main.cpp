// Acceptance suite: one PASS/FAIL line per criterion, details indented below it.

#include "fracperim/cli.hpp"
#include "fracperim/config.hpp"
#include "fracperim/integration.hpp"
#include "fracperim/kernels.hpp"
#include "fracperim/limits.hpp"
#include "fracperim/minimize.hpp"
#include "fracperim/momentbody.hpp"
#include "fracperim/rng.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace fracperim;

namespace {

const std::vector<double> kGrid = {0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99};

int hardware_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// Collects the detail lines of one criterion.
struct Criterion {
  int id;
  std::string title;
  bool ok = true;
  std::vector<std::string> lines;

  void check(bool cond, const std::string& what) {
    ok = ok && cond;
    lines.push_back(std::string(cond ? "ok      " : "FAILED  ") + what);
  }
  void note(const std::string& what) { lines.push_back("        " + what); }
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

EngineSpec slicing(std::size_t lines, std::uint64_t seed) {
  EngineSpec e;
  e.engine = Engine::Slicing;
  e.n_lines = lines;
  e.seed = seed;
  e.threads = hardware_threads();
  return e;
}

EngineSpec exact() {
  EngineSpec e;
  e.engine = Engine::Exact1D;
  return e;
}

EngineSpec montecarlo(std::size_t pairs, std::uint64_t seed) {
  EngineSpec e;
  e.engine = Engine::MonteCarlo;
  e.n_pairs = pairs;
  e.seed = seed;
  e.threads = hardware_threads();
  return e;
}

void report_sweep(Criterion& c, const SweepResult& r) {
  for (std::size_t i = 0; i < r.s_grid.size(); ++i)
    c.note(fmt("s=%.2f  (1-s)P=%.6f +- %.2e", r.s_grid[i], r.rescaled[i], r.rescaled_error[i]));
  c.note(fmt("extrapolated %.6f +- %.2e (refit on two points %.6f)", r.extrapolated_limit, r.extrapolation_error,
             r.refit_limit));
}

// ---------------------------------------------------------------------------

Criterion criterion1() {
  Criterion c{1, "1-D exact limit: (1-s)P_s((0,1)) = 2/s, extrapolated limit 2"};
  const auto t0 = std::chrono::steady_clock::now();
  const SetRegion e = SetRegion::intervals(Intervals1D::from_list({{0.0, 1.0}}));
  const KernelFamily fam = KernelFamily::from_gauge(euclidean_norm(1));
  const SweepResult r = sweep(e, Domain::whole(1), fam, kGrid, exact());
  double worst = 0.0;
  for (std::size_t i = 0; i < kGrid.size(); ++i) worst = std::max(worst, std::abs(r.rescaled[i] - 2.0 / kGrid[i]));
  const double t = seconds_since(t0);
  c.check(worst <= 1e-12, fmt("max |(1-s)P_s - 2/s| = %.3e <= 1e-12", worst));
  c.check(std::abs(r.extrapolated_limit - 2.0) <= 1e-6,
          fmt("|limit - 2| = %.3e <= 1e-6", std::abs(r.extrapolated_limit - 2.0)));
  c.check(t < 1.0, fmt("runtime %.3f s < 1 s", t));
  return c;
}

Criterion criterion2() {
  Criterion c{2, "1-D bound: (1-s)P_s((0,1) u (2,3)) <= 96 for s in [0.5, 0.99]"};
  const auto t0 = std::chrono::steady_clock::now();
  const SetRegion e = SetRegion::intervals(Intervals1D::from_list({{0.0, 1.0}, {2.0, 3.0}}));
  const KernelFamily fam = KernelFamily::from_gauge(euclidean_norm(1));
  std::vector<double> grid;
  for (int i = 0; i <= 490; ++i) grid.push_back(0.5 + 0.001 * i);
  const auto es = perimeter_full_multi(e, Domain::whole(1), fam, grid, exact());
  double worst = 0.0, at = 0.0;
  for (const auto& r : es) {
    const double v = (1.0 - r.s) * r.value;
    if (v > worst) {
      worst = v;
      at = r.s;
    }
  }
  const double t = seconds_since(t0);
  c.check(worst <= 96.0, fmt("max over %zu grid points %.6f (at s=%.3f) <= 96", grid.size(), worst, at));
  c.check(t < 1.0, fmt("runtime %.3f s < 1 s", t));
  return c;
}

Criterion criterion3() {
  Criterion c{3, "isotropic 2-D limit: unit disk extrapolates to 4 pi within 2%"};
  const auto t0 = std::chrono::steady_clock::now();
  const KernelFamily fam = KernelFamily::from_gauge(euclidean_norm(2));
  const SetRegion disk = SetRegion::ball(make_vec({0.0, 0.0}), 1.0);
  const SweepResult r = sweep(disk, Domain::whole(2), fam, kGrid, slicing(1000000, 31));
  report_sweep(c, r);
  const double target = 4.0 * std::numbers::pi;
  const double rel = std::abs(r.extrapolated_limit - target) / target;
  c.check(rel <= 0.02, fmt("|limit - 4 pi| / 4 pi = %.4f <= 0.02", rel));
  c.note(fmt("runtime %.1f s", seconds_since(t0)));
  return c;
}

/// (3/2) * integral over [-1, 1]^2 of |x . v|, tensor Gauss-Legendre with the
/// inner interval split where x . v changes sign.
double linf_moment_tensor(const Vec& v) {
  using GL = boost::math::quadrature::gauss<double, 30>;
  auto inner = [&](double x) {
    auto f = [&](double y) { return std::abs(v[0] * x + v[1] * y); };
    if (v[1] == 0.0) return GL::integrate(f, -1.0, 1.0);
    const double y0 = std::clamp(-v[0] * x / v[1], -1.0, 1.0);
    double sum = 0.0;
    if (y0 > -1.0) sum += GL::integrate(f, -1.0, y0);
    if (y0 < 1.0) sum += GL::integrate(f, y0, 1.0);
    return sum;
  };
  return 1.5 * GL::integrate(inner, -1.0, 1.0);
}

Criterion criterion4() {
  Criterion c{4, "anisotropic 2-D limit: l-inf kernel, moment norm 3 and 2 sqrt 2, square sweep to 12"};
  const auto t0 = std::chrono::steady_clock::now();
  const QuasiNorm linf = lp_norm(2, std::numeric_limits<double>::infinity());
  const MomentNorm m = moment_norm_quadrature(linf, 1e-12);
  const double axis = m(make_vec({1.0, 0.0}));
  c.check(std::abs(axis - 3.0) <= 1e-8, fmt("quadrature m(e1) = %.12f, |m - 3| <= 1e-8", axis));
  const Vec diag = make_vec({1.0, 1.0}) / std::sqrt(2.0);
  const double md = m(diag), oracle = linf_moment_tensor(diag);
  c.check(std::abs(md - oracle) <= 1e-6,
          fmt("m(diagonal) = %.12f, tensor oracle %.12f (2 sqrt 2 = %.12f)", md, oracle, 2.0 * std::sqrt(2.0)));
  c.check(std::abs(oracle - 2.0 * std::sqrt(2.0)) <= 1e-6, "tensor oracle agrees with 2 sqrt 2 within 1e-6");

  const KernelFamily fam = KernelFamily::from_gauge(linf);
  const SetRegion square = SetRegion::box(make_vec({-0.5, -0.5}), make_vec({0.5, 0.5}));
  const SweepResult r = sweep(square, Domain::whole(2), fam, kGrid, slicing(1000000, 41));
  report_sweep(c, r);
  c.check(std::abs(r.target - 12.0) <= 1e-6, fmt("anisotropic perimeter target %.9f = 12", r.target));
  const double rel = std::abs(r.extrapolated_limit - 12.0) / 12.0;
  c.check(rel <= 0.02, fmt("|limit - 12| / 12 = %.4f <= 0.02", rel));
  c.note(fmt("runtime %.1f s", seconds_since(t0)));
  return c;
}

Criterion criterion5() {
  Criterion c{5, "halfspace in cube: (1-s)P1(H, Q) extrapolates to 2 within 3%"};
  const auto t0 = std::chrono::steady_clock::now();
  const KernelFamily fam = KernelFamily::from_gauge(euclidean_norm(2));
  const SweepResult r = halfspace_cube_limit(fam, kGrid, slicing(1000000, 51));
  report_sweep(c, r);
  c.check(std::abs(r.target - 2.0) <= 1e-9, fmt("target m(e2) = %.12f", r.target));
  const double rel = std::abs(r.extrapolated_limit - 2.0) / 2.0;
  c.check(rel <= 0.03, fmt("|limit - 2| / 2 = %.4f <= 0.03", rel));
  c.note(fmt("runtime %.1f s", seconds_since(t0)));
  return c;
}

Criterion criterion6() {
  Criterion c{6, "boundary term (1-s)I(H n Q, H^c n Q^c) decreases to <= 10% of its first value"};
  const std::vector<double> grid = {0.5, 0.7, 0.9, 0.99};
  auto run = [&](const char* name, const KernelFamily& fam, const EngineSpec& spec) {
    const BoundaryTermReport r = boundary_term_vanishing(fam, grid, spec);
    std::string vals;
    for (std::size_t i = 0; i < grid.size(); ++i) vals += fmt(" %.5g(%.1e)", r.values[i], r.errors[i]);
    c.note(std::string(name) + ":" + vals);
    c.check(r.decreasing, std::string(name) + ": decreasing within 3 sigma per step");
    c.check(r.final_ratio <= 0.1, fmt("%s: final / first = %.4f <= 0.1", name, r.final_ratio));
  };
  run("n=1 exact", KernelFamily::from_gauge(euclidean_norm(1)), exact());
  run("n=2 slicing", KernelFamily::from_gauge(euclidean_norm(2)), slicing(1000000, 61));
  return c;
}

bool within_sigma(double a, double sa, double b, double sb, double k = 3.0) {
  return std::abs(a - b) <= k * std::hypot(sa, sb) + 1e-12 * std::max(std::abs(a), std::abs(b));
}

std::string run_cli_capture(const std::vector<std::string>& args, int& code) {
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return out.str();
}

Criterion criterion7() {
  Criterion c{7, "property suite"};
  const KernelFamily e1 = KernelFamily::from_gauge(euclidean_norm(1));
  const KernelFamily e2 = KernelFamily::from_gauge(euclidean_norm(2));
  const KernelFamily linf = KernelFamily::from_gauge(lp_norm(2, std::numeric_limits<double>::infinity()));
  const KernelFamily l1 = KernelFamily::from_gauge(lp_norm(2, 1.0));
  const Domain whole2 = Domain::whole(2);
  const Domain cube2 = Domain::bounded(unit_cube(2));

  // homogeneity: P(lambda E) = lambda^{n - s} P(E)
  {
    const double s = 0.4, lambda = 2.5;
    const auto a = perimeter_full(SetRegion::intervals(Intervals1D::from_list({{0.0, 1.0}, {1.5, 2.25}})),
                                  Domain::whole(1), e1, s, exact());
    const auto b = perimeter_full(
        SetRegion::intervals(Intervals1D::from_list({{0.0, lambda}, {1.5 * lambda, 2.25 * lambda}})),
        Domain::whole(1), e1, s, exact());
    const double rel = std::abs(b.value - std::pow(lambda, 1.0 - s) * a.value) / b.value;
    c.check(rel <= 1e-12, fmt("homogeneity 1-D exact: relative gap %.2e", rel));
    const SetRegion sq = SetRegion::box(make_vec({0.0, 0.0}), make_vec({1.0, 0.6}));
    const SetRegion big = SetRegion::box(make_vec({0.0, 0.0}), make_vec({lambda, 0.6 * lambda}));
    const auto p = perimeter_full(sq, whole2, linf, s, slicing(400000, 701));
    const auto q = perimeter_full(big, whole2, linf, s, slicing(400000, 702));
    const double f = std::pow(lambda, 2.0 - s);
    c.check(within_sigma(q.value, q.std_error, f * p.value, f * p.std_error),
            fmt("homogeneity 2-D l-inf: P(2.5E) = %.4f +- %.3f vs 2.5^{1.6} P(E) = %.4f +- %.3f", q.value,
                q.std_error, f * p.value, f * p.std_error));
  }
  // complement symmetry: P(E, Omega) = P(E^c, Omega)
  {
    const SetRegion e = SetRegion::ball(make_vec({0.1, -0.1}), 0.3);
    const auto a = perimeter_full(e, cube2, l1, 0.5, slicing(400000, 711));
    const auto b = perimeter_full(SetRegion::complement(e), cube2, l1, 0.5, slicing(400000, 712));
    c.check(within_sigma(a.value, a.std_error, b.value, b.std_error),
            fmt("complement symmetry in Q: %.4f +- %.3f vs %.4f +- %.3f", a.value, a.std_error, b.value, b.std_error));
    const auto x = perimeter_full(SetRegion::intervals(Intervals1D::from_list({{-0.2, 0.3}})),
                                  Domain::bounded(unit_cube(1)), e1, 0.6, exact());
    const auto y = perimeter_full(SetRegion::complement(SetRegion::intervals(Intervals1D::from_list({{-0.2, 0.3}}))),
                                  Domain::bounded(unit_cube(1)), e1, 0.6, exact());
    c.check(std::abs(x.value - y.value) <= 1e-12 * x.value, fmt("complement symmetry 1-D exact: %.15g vs %.15g", x.value, y.value));
  }
  // P2(., R^n) = 0
  {
    const auto r = perimeter_full(SetRegion::ball(make_vec({0.0, 0.0}), 1.0), whole2, e2, 0.5, slicing(100000, 721));
    c.check(r.decomposition && r.decomposition->p2 == 0.0 && r.decomposition->p2_error == 0.0,
            "P2 of the disk in the whole plane is exactly 0");
    const auto m = perimeter_full(SetRegion::ball(make_vec({0.0, 0.0}), 1.0), whole2, e2, 0.5, montecarlo(100000, 722));
    c.check(m.decomposition && m.decomposition->p2 == 0.0, "P2 is 0 with the Monte Carlo engine too");
  }
  // kernel comparability: P_s / c <= P_{k_s} <= c P_s
  {
    const SetRegion disk = SetRegion::ball(make_vec({0.0, 0.0}), 1.0);
    for (const double s : {0.3, 0.7}) {
      const auto iso = perimeter_full(disk, whole2, e2, s, slicing(200000, 731));
      const auto an = perimeter_full(disk, whole2, linf, s, slicing(200000, 732));
      const double cc = linf.c();
      const double slack = 3.0 * std::hypot(an.std_error, cc * iso.std_error);
      c.check(an.value >= iso.value / cc - slack && an.value <= cc * iso.value + slack,
              fmt("comparability s=%.1f: P_iso = %.3f, P_linf = %.3f, c = %.4f", s, iso.value, an.value, cc));
    }
  }
  // coarea identity, exact 1-D
  {
    PiecewiseConstant u;
    u.pieces = {{{-1.0, 0.0}, 1.0}, {{0.0, 0.5}, 3.0}, {{0.5, 2.0}, -0.5}, {{3.0, 3.5}, 2.0}};
    double worst = 0.0;
    for (const double s : {0.2, 0.5, 0.8, 0.95}) worst = std::max(worst, coarea_check_1d(u, s).relative_discrepancy);
    c.check(worst <= 1e-9, fmt("coarea identity: max relative discrepancy %.2e <= 1e-9", worst));
  }
  // additivity-defect identity
  {
    const SetRegion e1d = SetRegion::intervals(Intervals1D::from_list({{-0.3, 0.4}, {0.9, 1.6}}));
    const auto r1 = additivity_defect_check(e1d, SetRegion::intervals(Intervals1D::from_list({{-1.0, 0.5}})),
                                            SetRegion::intervals(Intervals1D::from_list({{0.5, 2.0}})), e1, 0.5,
                                            exact());
    c.check(r1.passed, fmt("additivity 1-D exact: discrepancy %.2e (tolerance %.2e)", r1.discrepancy, r1.tolerance));
    const SetRegion e2d = SetRegion::ball(make_vec({0.0, 0.0}), 0.6);
    const SetRegion o1 = SetRegion::box(make_vec({-1.0, -1.0}), make_vec({0.0, 1.0}));
    const SetRegion o2 = SetRegion::box(make_vec({0.0, -1.0}), make_vec({1.0, 1.0}));
    const auto r2 = additivity_defect_check(e2d, o1, o2, linf, 0.5, slicing(400000, 741));
    c.check(r2.passed, fmt("additivity 2-D slicing: lhs %.4f rhs %.4f discrepancy %.2e (tolerance %.2e)", r2.lhs,
                           r2.rhs, r2.discrepancy, r2.tolerance));
  }
  // engine cross-agreement on five fixed 2-D instances
  {
    struct Instance {
      const char* name;
      SetRegion e;
      Domain d;
      KernelFamily fam;
      double s;
    };
    const std::vector<Instance> instances = {
        {"disk, Euclidean, s=0.3", SetRegion::ball(make_vec({0.0, 0.0}), 1.0), whole2, e2, 0.3},
        {"square, l-inf, s=0.3", SetRegion::box(make_vec({0.0, 0.0}), make_vec({1.0, 1.0})), whole2, linf, 0.3},
        {"box in Q, l1, s=0.4", SetRegion::box(make_vec({-0.3, -0.2}), make_vec({0.2, 0.7})), cube2, l1, 0.4},
        {"H in Q, Euclidean, s=0.5", lower_halfspace(2), cube2, e2, 0.5},
        {"two squares, l-inf, s=0.6",
         set_union(SetRegion::box(make_vec({0.0, 0.0}), make_vec({1.0, 1.0})),
                   SetRegion::box(make_vec({1.5, 0.0}), make_vec({2.5, 1.0}))),
         whole2, linf, 0.6},
    };
    std::uint64_t seed = 750;
    for (const auto& in : instances) {
      const auto a = perimeter_full(in.e, in.d, in.fam, in.s, slicing(400000, ++seed));
      const auto b = perimeter_full(in.e, in.d, in.fam, in.s, montecarlo(1000000, ++seed));
      c.check(within_sigma(a.value, a.std_error, b.value, b.std_error),
              fmt("engines agree, %s: slicing %.4f +- %.3f, montecarlo %.4f +- %.3f", in.name, a.value, a.std_error,
                  b.value, b.std_error));
    }
  }
  // determinism under --threads
  {
    const std::string dir = std::string(FRACPERIM_SOURCE_DIR) + "/configs/";
    for (const char* cfg : {"disk_perimeter.json", "mc_square_perimeter.json"}) {
      std::string first;
      bool same = true;
      for (const char* threads : {"1", "2", "5"}) {
        int code = 0;
        std::string text = run_cli_capture({"fracperim", "perimeter", "--config", dir + cfg, "--threads", threads}, code);
        auto j = nlohmann::json::parse(text);
        j.erase("wall_clock_seconds");
        text = j.dump();
        if (first.empty()) first = text;
        same = same && code == 0 && text == first;
      }
      c.check(same, std::string("identical results for --threads 1, 2, 5 (") + cfg + ")");
    }
  }
  return c;
}

Criterion criterion8() {
  Criterion c{8, "minimizers: multi-start matches brute force; 32x32 halfplane study stable and bounded"};
  int matched = 0;
  const int cases = 20;
  for (int k = 0; k < cases; ++k) {
    Rng rng(derive_seed(8008, static_cast<std::uint64_t>(k)));
    const bool two_d = k % 2 == 0;
    const double s = 0.3 + 0.65 * rng.uniform();
    VoxelGrid g;
    std::vector<std::uint8_t> mask;
    if (two_d) {
      g.lo = make_vec({0.0, 0.0});
      g.hi = make_vec({1.0, 1.0});
      g.resolution = {6, 6};
    } else {
      g.lo = make_vec({0.0});
      g.hi = make_vec({1.0});
      g.resolution = {24};
    }
    g.occupancy.assign(g.size(), 0);
    mask.assign(g.size(), 0);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto xy = g.coords(i);
      const bool inside = two_d ? (xy[0] >= 1 && xy[0] <= 4 && xy[1] >= 1 && xy[1] <= 4) : (xy[0] >= 4 && xy[0] < 20);
      mask[i] = inside ? 1 : 0;
      if (!inside) g.occupancy[i] = rng.uniform() < 0.5 ? 1 : 0;
    }
    const KernelFamily fam = k % 4 < 2 ? KernelFamily::from_gauge(euclidean_norm(g.dim()))
                                       : KernelFamily::from_gauge(lp_norm(g.dim(), std::numeric_limits<double>::infinity()));
    const VoxelProblem p = make_voxel_problem(g, mask, fam, s);
    const BruteForceResult best = brute_force_minimum(p);
    const MinimizeTrace t = multi_start_minimize(p, Schedule{}, derive_seed(8009, static_cast<std::uint64_t>(k)), 8);
    if (t.energy <= best.energy + 1e-10 * std::max(1.0, std::abs(best.energy))) ++matched;
  }
  c.check(matched == cases, fmt("multi-start attains the exhaustive minimum in %d of %d cases (<= 16 free cells)",
                                matched, cases));

  const auto t0 = std::chrono::steady_clock::now();
  const StudyTemplate t = halfplane_study_template(KernelFamily::from_gauge(euclidean_norm(2)), 32);
  Schedule schedule;
  schedule.anneal = true;
  const StudyReport r = minimizer_convergence_study(t, {0.6, 0.8, 0.95}, schedule, 7);
  for (const auto& e : r.entries)
    c.note(fmt("s=%.2f  (1-s)E(Omega')=%.4f  layers from previous %.3f  flat columns %.0f%%", e.s, e.rescaled_inner,
               e.layers, 100.0 * e.flat_columns));
  c.check(r.stable, "successive minimizers differ by at most 2 voxel layers");
  c.check(r.bounded, fmt("rescaled energies <= 2 x flat target %.4f", r.flat_target));
  c.note(fmt("runtime %.1f s", seconds_since(t0)));
  return c;
}

}  // namespace

int main() {
  std::setvbuf(stdout, nullptr, _IONBF, 0);
  const std::vector<std::function<Criterion()>> all = {criterion1, criterion2, criterion3, criterion4,
                                                      criterion5, criterion6, criterion7, criterion8};
  int failed = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    Criterion c = [&] {
      try {
        return all[i]();
      } catch (const std::exception& e) {
        Criterion bad{static_cast<int>(i) + 1, "aborted by an exception"};
        bad.check(false, e.what());
        return bad;
      }
    }();
    std::printf("%s  criterion %d: %s\n", c.ok ? "PASS" : "FAIL", c.id, c.title.c_str());
    for (const auto& line : c.lines) std::printf("    %s\n", line.c_str());
    if (!c.ok) ++failed;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
  return failed == 0 ? 0 : 1;
}
