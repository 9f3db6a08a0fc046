#include "fracperim/momentbody.hpp"

#include "fracperim/rng.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace fracperim {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
constexpr unsigned kMaxDepth = 18;

struct Integral {
  double value = 0.0;
  double error = 0.0;
};

template <typename F>
Integral integrate_pieces(const F& f, std::vector<double> breaks, double tol) {
  std::sort(breaks.begin(), breaks.end());
  Integral total;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (!(breaks[i + 1] > breaks[i])) continue;
    double err = 0.0;
    total.value += GK::integrate(f, breaks[i], breaks[i + 1], kMaxDepth, tol, &err);
    total.error += err;
  }
  return total;
}

/// Angles in [lo, lo + 2 pi) where the integrand may have a kink.
std::vector<double> angular_breaks(double lo, const std::vector<double>& kinks) {
  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<double> out = {lo, lo + two_pi};
  for (double k : kinks) {
    double a = std::fmod(k - lo, two_pi);
    if (a < 0) a += two_pi;
    if (a > 1e-14 && a < two_pi - 1e-14) out.push_back(lo + a);
  }
  return out;
}

double polytope_moment(const Polytope& body, const Vec& v) {
  const int n = body.dim();
  double total = 0.0;
  for (double sign : {1.0, -1.0}) {
    auto half = body.intersect(Halfspace{-sign * v, 0.0});
    if (!half) continue;
    total += half->volume() * std::abs(half->centroid().dot(v));
  }
  return 0.5 * (n + 1) * total;
}

}  // namespace

const char* to_string(MomentMethod m) {
  switch (m) {
    case MomentMethod::Exact: return "exact";
    case MomentMethod::Quadrature: return "quadrature";
    case MomentMethod::MonteCarlo: return "monte-carlo";
  }
  return "unknown";
}

MomentNorm::MomentNorm(int dim, UnitEval unit_eval, MomentMethod method, double accuracy)
    : dim_(dim), unit_eval_(std::move(unit_eval)), method_(method), accuracy_(accuracy) {}

MomentValue MomentNorm::evaluate(const Vec& v) const {
  if (v.size() != dim_) throw std::invalid_argument("moment norm: vector has wrong dimension");
  const double r = v.norm();
  if (r == 0.0) return {};
  const MomentValue unit = unit_eval_(v / r);
  return {r * unit.value, r * unit.error};
}

double MomentNorm::operator()(const Vec& v) const { return evaluate(v).value; }

double anisotropic_perimeter(const SetRegion& e, const Domain& d, const MomentNorm& m) {
  if (e.dim() != m.dim()) throw std::invalid_argument("anisotropic perimeter: norm has wrong dimension");
  return weighted_perimeter(e, d, [&m](const Vec& nu) { return m(nu); });
}

double isotropic_constant(int n) {
  if (n < 1) throw std::invalid_argument("isotropic_constant: n must be positive");
  return unit_ball_volume(n - 1);
}

bool has_exact_moment_norm(const QuasiNorm& g) {
  return g.is_euclidean() || g.dim == 1 || (g.body && (g.dim == 2 || g.dim == 3));
}

MomentNorm moment_norm_exact(const QuasiNorm& g) {
  const int n = g.dim;
  if (g.is_euclidean()) {
    const double w = isotropic_constant(n);
    return MomentNorm(n, [w](const Vec&) { return MomentValue{w, 0.0}; }, MomentMethod::Exact, 1e-15 * w);
  }
  if (n == 1) {
    const double plus = g(make_vec({1.0})), minus = g(make_vec({-1.0}));
    const double w = 0.5 * (1.0 / (plus * plus) + 1.0 / (minus * minus));
    return MomentNorm(1, [w](const Vec&) { return MomentValue{w, 0.0}; }, MomentMethod::Exact, 1e-15 * w);
  }
  if (!g.body || n > 3) throw std::invalid_argument("moment norm: no closed form for gauge '" + g.label + "'");
  const Polytope body = *g.body;
  const double scale = polytope_moment(body, unit_vec(n, 0));
  const double acc = 1e-12 * scale;
  return MomentNorm(
      n, [body, acc](const Vec& u) { return MomentValue{polytope_moment(body, u), acc}; }, MomentMethod::Exact, acc);
}

MomentNorm moment_norm_quadrature(const QuasiNorm& g, double tolerance) {
  const int n = g.dim;
  if (n == 1) {
    MomentNorm exact = moment_norm_exact(g);
    return MomentNorm(1, [exact](const Vec& u) { return exact.evaluate(u); }, MomentMethod::Quadrature,
                      exact.accuracy());
  }
  if (n > 3) throw std::invalid_argument("moment norm: quadrature supports dimensions up to 3");
  auto gauge = g.gauge;
  MomentNorm::UnitEval eval;
  if (n == 2) {
    std::vector<double> vertex_angles;
    if (g.body)
      for (const auto& p : g.body->vertices()) vertex_angles.push_back(std::atan2(p[1], p[0]));
    eval = [gauge, vertex_angles, tolerance](const Vec& v) {
      const double phi_v = std::atan2(v[1], v[0]);
      auto f = [&](double phi) {
        const Vec t = make_vec({std::cos(phi), std::sin(phi)});
        const double gv = gauge(t);
        return std::abs(t.dot(v)) / (gv * gv * gv);
      };
      std::vector<double> kinks = vertex_angles;
      kinks.push_back(phi_v + 0.5 * std::numbers::pi);
      kinks.push_back(phi_v - 0.5 * std::numbers::pi);
      const Integral r = integrate_pieces(f, angular_breaks(phi_v - 0.5 * std::numbers::pi, kinks), tolerance);
      return MomentValue{0.5 * r.value, 0.5 * r.error};
    };
  } else {
    eval = [gauge, tolerance](const Vec& v) {
      const Eigen::Vector3d w = v;
      const Eigen::Vector3d helper = std::abs(w[0]) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
      const Eigen::Vector3d e1 = w.cross(helper).normalized();
      const Eigen::Vector3d e2 = w.cross(e1);
      double inner_error = 0.0;
      auto ring = [&](double alpha) {
        const double ca = std::cos(alpha), sa = std::sin(alpha);
        auto f = [&](double beta) {
          const Eigen::Vector3d t = ca * w + sa * (std::cos(beta) * e1 + std::sin(beta) * e2);
          const double gv = gauge(Vec(t));
          const double g2 = gv * gv;
          return 1.0 / (g2 * g2);
        };
        double err = 0.0;
        const double val = GK::integrate(f, 0.0, 2.0 * std::numbers::pi, kMaxDepth, tolerance, &err);
        inner_error = std::max(inner_error, err);
        return std::abs(ca) * sa * val;
      };
      const Integral r = integrate_pieces(ring, {0.0, 0.5 * std::numbers::pi, std::numbers::pi}, tolerance);
      // the outer weight |cos a| sin a integrates to 1 over [0, pi]
      return MomentValue{0.5 * r.value, 0.5 * (r.error + inner_error)};
    };
  }
  double acc = 0.0;
  for (const auto& u : fibonacci_directions(n, n == 2 ? 16 : 8)) acc = std::max(acc, eval(u).error);
  acc = std::max(acc, 1e-15);
  return MomentNorm(n, std::move(eval), MomentMethod::Quadrature, acc);
}

MomentNorm moment_norm_montecarlo(const QuasiNorm& g, std::size_t points, std::uint64_t seed) {
  const int n = g.dim;
  if (points < 2) throw std::invalid_argument("moment norm: Monte Carlo needs at least two points");
  // B_k lies inside the Euclidean ball of radius tau
  const double half = g.tau * (1.0 + 1e-12);
  const double box_volume = std::pow(2.0 * half, n);
  Rng rng(seed);
  std::vector<Vec> inside;
  for (std::size_t i = 0; i < points; ++i) {
    Vec x(n);
    for (int d = 0; d < n; ++d) x[d] = rng.uniform(-half, half);
    if (g(x) < 1.0) inside.push_back(x);
  }
  const double factor = 0.5 * (n + 1) * box_volume;
  const double total = static_cast<double>(points);
  auto eval = [inside = std::move(inside), factor, total](const Vec& u) {
    double sum = 0.0, sum_sq = 0.0;
    for (const auto& x : inside) {
      const double a = std::abs(x.dot(u));
      sum += a;
      sum_sq += a * a;
    }
    const double mean = sum / total;
    const double var = std::max(0.0, sum_sq / total - mean * mean) * total / (total - 1.0);
    return MomentValue{factor * mean, factor * std::sqrt(var / total)};
  };
  double acc = 0.0;
  for (const auto& u : fibonacci_directions(n, 2 * n + 2)) acc = std::max(acc, eval(u).error);
  return MomentNorm(n, std::move(eval), MomentMethod::MonteCarlo, acc);
}

MomentNorm moment_norm_from_gauge(const QuasiNorm& g, const MomentEngineSpec& spec) {
  MomentMethod method;
  if (spec.method) {
    method = *spec.method;
  } else if (has_exact_moment_norm(g)) {
    method = MomentMethod::Exact;
  } else if (g.dim <= 3) {
    method = MomentMethod::Quadrature;
  } else {
    method = MomentMethod::MonteCarlo;
  }
  switch (method) {
    case MomentMethod::Exact: return moment_norm_exact(g);
    case MomentMethod::Quadrature: return moment_norm_quadrature(g, spec.tolerance);
    case MomentMethod::MonteCarlo: return moment_norm_montecarlo(g, spec.mc_points, spec.seed);
  }
  throw std::invalid_argument("moment norm: unknown method");
}

PolarSupportReport polar_support_check(const MomentNorm& m, const std::vector<Vec>& directions) {
  PolarSupportReport rep;
  std::vector<Vec> level;
  for (const auto& d : directions) {
    const double v = m(d);
    if (!(v > 0.0)) {
      rep.max_violation = std::numeric_limits<double>::infinity();
      continue;
    }
    level.push_back(d / v);
  }
  for (std::size_t i = 0; i < level.size(); ++i) {
    for (std::size_t j = i + 1; j < level.size(); ++j) {
      for (double t : {0.25, 0.5, 0.75}) {
        const Vec mid = t * level[i] + (1.0 - t) * level[j];
        if (mid.squaredNorm() < 1e-24) continue;
        rep.max_violation = std::max(rep.max_violation, m(mid) - 1.0);
        ++rep.checks;
      }
    }
  }
  rep.passed = rep.max_violation <= 2.0 * m.accuracy() + 1e-12;
  return rep;
}

}  // namespace fracperim
