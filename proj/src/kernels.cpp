#include "fracperim/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fracperim {

namespace {

void check_s(double s) {
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("kernel: s must lie in (0, 1)");
}

void check_dim(int dim) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("kernel: unsupported dimension");
}

/// Comparability constant of a gauge measured on a sphere sample.
double sampled_tau(int dim, const std::function<double(const Vec&)>& g, int count) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& u : fibonacci_directions(dim, count)) {
    const double v = g(u);
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("gauge must be positive and finite on the unit sphere");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return std::max(hi, 1.0 / lo);
}

std::vector<Halfspace> cross_polytope(int dim) {
  std::vector<Halfspace> hs;
  for (int mask = 0; mask < (1 << dim); ++mask) {
    Vec a(dim);
    for (int i = 0; i < dim; ++i) a[i] = (mask >> i) & 1 ? -1.0 : 1.0;
    hs.push_back({a, 1.0});
  }
  return hs;
}

}  // namespace

QuasiNorm euclidean_norm(int dim) {
  check_dim(dim);
  return QuasiNorm{dim, [](const Vec& v) { return v.norm(); }, 1.0, "euclidean", std::nullopt};
}

QuasiNorm lp_norm(int dim, double p) {
  check_dim(dim);
  if (!(p >= 1.0)) throw std::invalid_argument("lp norm requires p >= 1");
  if (p == 2.0) return euclidean_norm(dim);
  const double tau = std::pow(static_cast<double>(dim), std::abs(0.5 - 1.0 / p));
  QuasiNorm q;
  q.dim = dim;
  q.tau = tau;
  if (std::isinf(p)) {
    q.gauge = [](const Vec& v) { return v.cwiseAbs().maxCoeff(); };
    q.label = "linf";
    if (dim <= 3) q.body = Polytope::box(Vec::Constant(dim, -1.0), Vec::Constant(dim, 1.0));
  } else if (p == 1.0) {
    q.gauge = [](const Vec& v) { return v.cwiseAbs().sum(); };
    q.label = "l1";
    if (dim <= 3) q.body = Polytope::from_halfspaces(dim, cross_polytope(dim));
  } else {
    q.gauge = [p](const Vec& v) {
      const double m = v.cwiseAbs().maxCoeff();
      if (m == 0.0) return 0.0;
      double acc = 0.0;
      for (Eigen::Index i = 0; i < v.size(); ++i) acc += std::pow(std::abs(v[i]) / m, p);
      return m * std::pow(acc, 1.0 / p);
    };
    q.label = "lp";
  }
  return q;
}

QuasiNorm quasi_norm_from_convex_body(int dim, const std::vector<Halfspace>& halfspaces) {
  check_dim(dim);
  for (const auto& h : halfspaces)
    if (!(h.offset > 0.0)) throw std::invalid_argument("convex body: origin is not an interior point");
  const Polytope body = Polytope::from_halfspaces(dim, halfspaces);
  const auto& hs = body.halfspaces();
  for (const auto& h : hs) {
    if (!(h.offset > 1e-12)) throw std::invalid_argument("convex body: origin is not an interior point");
    bool mirrored = false;
    for (const auto& k : hs)
      if ((k.normal + h.normal).norm() < 1e-9 && std::abs(k.offset - h.offset) <= 1e-9 * (1.0 + h.offset)) {
        mirrored = true;
        break;
      }
    if (!mirrored) throw std::invalid_argument("convex body: not symmetric under x -> -x");
  }
  std::vector<Vec> normals;
  std::vector<double> inv_offsets;
  double r_in = std::numeric_limits<double>::infinity();
  for (const auto& h : hs) {
    normals.push_back(h.normal);
    inv_offsets.push_back(1.0 / h.offset);
    r_in = std::min(r_in, h.offset);
  }
  double r_out = 0.0;
  for (const auto& v : body.vertices()) r_out = std::max(r_out, v.norm());
  QuasiNorm q;
  q.dim = dim;
  q.gauge = [normals, inv_offsets](const Vec& x) {
    double best = 0.0;
    for (std::size_t i = 0; i < normals.size(); ++i) best = std::max(best, normals[i].dot(x) * inv_offsets[i]);
    return best;
  };
  q.tau = std::max(r_out, 1.0 / r_in);
  q.label = "polytope";
  q.body = body;
  return q;
}

QuasiNorm quasi_norm_from_vertices(int dim, const std::vector<Vec>& vertices) {
  const Polytope body = Polytope::from_vertices(dim, vertices);
  return quasi_norm_from_convex_body(dim, body.halfspaces());
}

QuasiNorm quasi_norm_from_expression(const Expression& profile, std::optional<double> tau) {
  const int dim = profile.dim();
  QuasiNorm q;
  q.dim = dim;
  q.gauge = [profile](const Vec& v) {
    const double r = v.norm();
    if (r == 0.0) return 0.0;
    return r * profile(v / r);
  };
  q.label = "expression";
  const double measured = sampled_tau(dim, q.gauge, 4096);
  if (tau) {
    if (*tau < measured * (1.0 - 1e-12))
      throw std::invalid_argument("expression gauge: declared tau is smaller than the sampled comparability constant");
    q.tau = *tau;
  } else {
    q.tau = measured;
  }
  return q;
}

std::function<double(const Vec&)> kernel_from_gauge(const QuasiNorm& g, double s) {
  check_s(s);
  const double exponent = -(g.dim + s);
  return [gauge = g.gauge, exponent](const Vec& z) {
    const double r = gauge(z);
    if (r == 0.0) throw std::domain_error("kernel evaluated at z = 0");
    return std::pow(r, exponent);
  };
}

QuasiNorm gauge_from_kernel(std::function<double(const Vec&)> k, int dim, double s) {
  check_dim(dim);
  check_s(s);
  for (const auto& z : default_check_points(dim)) {
    const double v = k(z);
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("kernel is not positive and finite on the check sample");
  }
  QuasiNorm q;
  q.dim = dim;
  const double exponent = -1.0 / (dim + s);
  q.gauge = [k = std::move(k), exponent](const Vec& z) {
    if (z.squaredNorm() == 0.0) return 0.0;
    return std::pow(k(z), exponent);
  };
  q.tau = sampled_tau(dim, q.gauge, 256);
  q.label = "from-kernel";
  return q;
}

KernelFamily KernelFamily::from_gauge(QuasiNorm limit, std::optional<double> c) {
  KernelFamily f;
  f.dim_ = limit.dim;
  f.c_ = c.value_or(std::pow(limit.tau, limit.dim + 1));
  if (!(f.c_ >= 1.0)) throw std::invalid_argument("kernel: comparability constant c must be >= 1");
  f.gauge_at_ = [g = limit.gauge](double, const Vec& z) { return g(z); };
  f.label_ = limit.label;
  f.limit_ = std::move(limit);
  f.s_independent_ = true;
  return f;
}

KernelFamily KernelFamily::drifting(QuasiNorm limit, double drift, std::optional<double> c) {
  if (!(drift >= 0.0 && drift <= 1.0)) throw std::invalid_argument("kernel: drift must lie in [0, 1]");
  if (drift == 0.0) return from_gauge(std::move(limit), c);
  KernelFamily f;
  f.dim_ = limit.dim;
  f.c_ = c.value_or(std::pow(limit.tau, limit.dim + 1));
  if (!(f.c_ >= 1.0)) throw std::invalid_argument("kernel: comparability constant c must be >= 1");
  f.gauge_at_ = [g = limit.gauge, drift](double s, const Vec& z) {
    const double w = drift * (1.0 - s);
    return (1.0 - w) * g(z) + w * z.norm();
  };
  f.label_ = limit.label + "+drift";
  f.limit_ = std::move(limit);
  return f;
}

KernelFamily KernelFamily::custom(int dim, GaugeFn gauge_at, QuasiNorm limit, double c, std::string label) {
  KernelFamily f;
  f.dim_ = dim;
  f.gauge_at_ = std::move(gauge_at);
  f.limit_ = std::move(limit);
  f.c_ = c;
  f.label_ = std::move(label);
  return f;
}

QuasiNorm KernelFamily::gauge_at(double s) const {
  QuasiNorm q = limit_;
  q.gauge = [fn = gauge_at_, s](const Vec& z) { return fn(s, z); };
  if (!s_independent_) {
    q.body.reset();
    q.label = label_;
  }
  return q;
}

double KernelFamily::kernel(double s, const Vec& z) const {
  const double r = gauge_at_(s, z);
  if (r == 0.0) throw std::domain_error("kernel evaluated at z = 0");
  return std::pow(r, -(dim_ + s));
}

std::vector<Vec> default_check_points(int dim, int directions) {
  std::vector<Vec> out;
  for (const auto& u : fibonacci_directions(dim, directions))
    for (double r : {0.5, 1.0, 3.0}) out.push_back(r * u);
  return out;
}

ValidationReport validate_hypotheses(const KernelFamily& fam, const std::vector<double>& s_samples,
                                     const std::vector<Vec>& z_samples, double tol) {
  ValidationReport rep;
  rep.declared_c = fam.c();
  const int n = fam.dim();
  for (double s : s_samples) {
    check_s(s);
    for (const auto& z : z_samples) {
      if (z.size() != n) throw std::invalid_argument("validation: sample point has wrong dimension");
      const double k = fam.kernel(s, z);
      rep.symmetry_violation = std::max(rep.symmetry_violation, std::abs(fam.kernel(s, -z) - k) / k);
      for (double lambda : {0.5, 2.0, 10.0}) {
        const double scaled = fam.kernel(s, lambda * z) * std::pow(lambda, n + s);
        rep.homogeneity_violation = std::max(rep.homogeneity_violation, std::abs(scaled - k) / k);
      }
      const double ratio = k * std::pow(z.norm(), n + s);
      rep.empirical_c = std::max({rep.empirical_c, ratio, 1.0 / ratio});
    }
  }
  const double s_top = 1.0 - 1e-6;
  for (const auto& z : z_samples) {
    const double lim = fam.limit_gauge()(z);
    rep.limit_gap = std::max(rep.limit_gap, std::abs(fam.gauge(s_top, z) - lim) / lim);
  }
  if (rep.symmetry_violation > tol) rep.failures.push_back("h.0");
  if (rep.homogeneity_violation > tol) rep.failures.push_back("h.1");
  if (rep.empirical_c > rep.declared_c * (1.0 + tol)) rep.failures.push_back("h.2");
  if (rep.limit_gap > std::max(tol, 1e-4)) rep.failures.push_back("limit");
  rep.passed = rep.failures.empty();
  return rep;
}

}  // namespace fracperim
