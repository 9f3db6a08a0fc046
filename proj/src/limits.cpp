#include "fracperim/limits.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fracperim {

Extrapolation extrapolate_limit(const std::vector<double>& s, const std::vector<double>& y,
                                const std::vector<double>& sigma) {
  if (s.size() != y.size() || s.size() != sigma.size()) throw std::invalid_argument("extrapolation: length mismatch");
  if (s.size() < 3) throw std::invalid_argument("extrapolation: at least 3 grid points are required");
  std::vector<std::size_t> order(s.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });

  // intercept of z = a + b t with t = 1 - s, z = s y, as a linear combination of the z_i
  auto fit = [&](std::size_t m, std::vector<double>& coef, double& slope) {
    double tbar = 0.0, zbar = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      tbar += 1.0 - s[order[k]];
      zbar += s[order[k]] * y[order[k]];
    }
    tbar /= m;
    zbar /= m;
    double stt = 0.0, stz = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const double dt = 1.0 - s[order[k]] - tbar;
      stt += dt * dt;
      stz += dt * (s[order[k]] * y[order[k]] - zbar);
    }
    if (!(stt > 0.0)) throw std::invalid_argument("extrapolation: grid points must be distinct");
    slope = stz / stt;
    coef.assign(m, 0.0);
    double a = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const double dt = 1.0 - s[order[k]] - tbar;
      coef[k] = 1.0 / m - tbar * dt / stt;
      a += coef[k] * s[order[k]] * y[order[k]];
    }
    return a;
  };

  Extrapolation ex;
  std::vector<double> coef;
  double slope = 0.0;
  ex.limit = fit(3, coef, slope);
  for (std::size_t k = 0; k < 3; ++k) {
    const std::size_t i = order[k];
    ex.error += std::abs(coef[k]) * s[i] * sigma[i];
    ex.max_residual = std::max(ex.max_residual, std::abs(s[i] * y[i] - ex.limit - slope * (1.0 - s[i])));
  }
  ex.error += ex.max_residual;
  std::vector<double> coef2;
  double slope2 = 0.0;
  ex.refit_limit = fit(2, coef2, slope2);
  return ex;
}

namespace {

void check_grid(const std::vector<double>& s_grid) {
  for (std::size_t i = 0; i < s_grid.size(); ++i) {
    if (!(s_grid[i] > 0.0 && s_grid[i] < 1.0)) throw std::invalid_argument("s grid must lie in (0, 1)");
    if (i > 0 && !(s_grid[i] > s_grid[i - 1])) throw std::invalid_argument("s grid must be strictly increasing");
  }
}

}  // namespace

SweepResult sweep(const SetRegion& e, const Domain& d, const KernelFamily& fam, const std::vector<double>& s_grid,
                  const EngineSpec& spec, const SweepOptions& options) {
  check_grid(s_grid);
  if (s_grid.size() < 3) throw std::invalid_argument("sweep: at least 3 grid points are required");
  SweepResult r;
  r.s_grid = s_grid;
  r.estimates = options.p1_only ? perimeter_p1_multi(e, d, fam, s_grid, spec)
                                : perimeter_full_multi(e, d, fam, s_grid, spec);
  for (const auto& est : r.estimates) {
    r.rescaled.push_back((1.0 - est.s) * est.value);
    r.rescaled_error.push_back((1.0 - est.s) * est.std_error);
  }
  const Extrapolation ex = extrapolate_limit(s_grid, r.rescaled, r.rescaled_error);
  r.extrapolated_limit = ex.limit;
  r.extrapolation_error = ex.error;
  r.refit_limit = ex.refit_limit;
  if (options.target) {
    r.target = *options.target;
  } else {
    const MomentNorm m = moment_norm_from_gauge(fam.limit_gauge(), options.moment);
    r.target = anisotropic_perimeter(e, d, m);
  }
  r.tolerance = options.tolerance.value_or(spec.engine == Engine::Exact1D ? 1e-6 : 0.02);
  const double allowed = std::max(r.tolerance * std::abs(r.target), 3.0 * r.extrapolation_error);
  r.passed = std::abs(r.extrapolated_limit - r.target) <= allowed;
  return r;
}

SweepResult halfspace_cube_limit(const KernelFamily& fam, const std::vector<double>& s_grid, const EngineSpec& spec,
                                 const SweepOptions& options) {
  const int n = fam.dim();
  if (n < 1 || n > 3) throw std::invalid_argument("halfspace-cube limit: dimension must be 1, 2 or 3");
  SweepOptions opt = options;
  opt.p1_only = true;
  if (!opt.target) {
    const MomentNorm m = moment_norm_from_gauge(fam.limit_gauge(), opt.moment);
    opt.target = m(unit_vec(n, n - 1));
  }
  if (!opt.tolerance) opt.tolerance = spec.engine == Engine::Exact1D ? 1e-6 : 0.03;
  return sweep(lower_halfspace(n), Domain::bounded(unit_cube(n)), fam, s_grid, spec, opt);
}

BoundaryTermReport boundary_term_vanishing(const KernelFamily& fam, const std::vector<double>& s_grid,
                                           const EngineSpec& spec) {
  const int n = fam.dim();
  if (n != 1 && n != 2) throw std::invalid_argument("boundary term: dimension must be 1 or 2");
  check_grid(s_grid);
  if (s_grid.size() < 2) throw std::invalid_argument("boundary term: at least 2 grid points are required");
  const SetRegion h = lower_halfspace(n);
  const SetRegion q = unit_cube(n);
  const SetRegion a = SetRegion::intersection(h, q);
  const SetRegion b = SetRegion::intersection(SetRegion::complement(h), SetRegion::complement(q));
  const auto est = locality_defect_multi(a, b, fam, s_grid, spec);
  BoundaryTermReport r;
  r.s_grid = s_grid;
  for (const auto& e : est) {
    r.values.push_back((1.0 - e.s) * e.value);
    r.errors.push_back((1.0 - e.s) * e.std_error);
  }
  r.decreasing = true;
  for (std::size_t i = 0; i + 1 < r.values.size(); ++i) {
    const double slack = 3.0 * std::hypot(r.errors[i], r.errors[i + 1]);
    if (!(r.values[i + 1] < r.values[i] + slack)) r.decreasing = false;
  }
  r.final_ratio = r.values.front() > 0.0 ? r.values.back() / r.values.front() : 0.0;
  r.passed = r.decreasing && r.values.back() <= 0.1 * r.values.front();
  return r;
}

StripReport strip_energy_bound(const KernelFamily& fam, double s, double d1, double d2, const EngineSpec& spec,
                               std::optional<double> calibrated_constant) {
  const int n = fam.dim();
  StripReport r;
  r.s = s;
  r.d1 = d1;
  r.d2 = d2;
  r.constant = calibrated_constant;
  if (calibrated_constant) r.bound = 1.5 * *calibrated_constant;
  const SetRegion strip = cube_strip(n, d1, d2);
  if (strip.kind() == SetRegion::Kind::Empty) {
    r.passed = true;
    return r;
  }
  const Domain dom = Domain::bounded(strip);
  const SetRegion h = lower_halfspace(n);
  const EstimateResult est = perimeter_p1_multi(h, dom, fam, {s}, spec).front();
  r.rescaled_p1 = (1.0 - s) * est.value;
  r.rescaled_error = (1.0 - s) * est.std_error;
  r.classical = classical_perimeter(h, dom);
  if (r.classical > 0.0) {
    r.ratio = r.rescaled_p1 / r.classical;
    r.ratio_error = r.rescaled_error / r.classical;
  }
  r.passed = std::isfinite(r.ratio) && (!r.bound || r.ratio <= *r.bound);
  return r;
}

double calibrate_strip_constant(const SweepResult& halfspace_cube) {
  double c = halfspace_cube.extrapolated_limit;
  for (double v : halfspace_cube.rescaled) c = std::max(c, v);
  return c;
}

}  // namespace fracperim
