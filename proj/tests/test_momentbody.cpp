#include "doctest.h"

#include "fracperim/momentbody.hpp"
#include "fracperim/rng.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>

#include <cmath>
#include <limits>
#include <numbers>

using namespace fracperim;

namespace {

const double kInfinity = std::numeric_limits<double>::infinity();

// (n+1)/2 * integral over [-1,1]^2 of |x . v|. The inner integrand is piecewise
// linear and the outer one piecewise quadratic, so Gauss-Legendre on each piece is exact.
double square_moment_oracle(const Vec& v) {
  using GL = boost::math::quadrature::gauss<double, 4>;
  const auto pieces = [](double lo, double hi, std::vector<double> cuts, const auto& f) {
    cuts.push_back(lo);
    cuts.push_back(hi);
    std::sort(cuts.begin(), cuts.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const double a = std::clamp(cuts[i], lo, hi), b = std::clamp(cuts[i + 1], lo, hi);
      if (b > a) total += GL::integrate(f, a, b);
    }
    return total;
  };
  const auto inner = [&](double y) {
    const auto f = [&](double x) { return std::abs(v[0] * x + v[1] * y); };
    if (std::abs(v[0]) < 1e-15) return 2.0 * std::abs(v[1] * y);
    return pieces(-1.0, 1.0, {-v[1] * y / v[0]}, f);
  };
  std::vector<double> ycuts = {0.0};
  if (std::abs(v[1]) > 1e-15) ycuts = {0.0, v[0] / v[1], -v[0] / v[1]};
  return 1.5 * pieces(-1.0, 1.0, ycuts, inner);
}

}  // namespace

TEST_CASE("Euclidean moment norm in dimensions 1 to 3") {
  const double expected[] = {1.0, 2.0, std::numbers::pi};
  for (int n = 1; n <= 3; ++n) {
    const MomentNorm m = moment_norm_exact(euclidean_norm(n));
    Vec e = Vec::Zero(n);
    e[0] = 1.0;
    CHECK(m(e) == doctest::Approx(expected[n - 1]).epsilon(1e-13));
    CHECK(m(2.5 * e) == doctest::Approx(2.5 * expected[n - 1]).epsilon(1e-13));
    const MomentNorm q = moment_norm_quadrature(euclidean_norm(n));
    CHECK(q(e) == doctest::Approx(expected[n - 1]).epsilon(1e-9));
  }
  CHECK(isotropic_constant(1) == 1.0);
  CHECK(isotropic_constant(2) == doctest::Approx(2.0));
  CHECK(isotropic_constant(3) == doctest::Approx(std::numbers::pi));
}

TEST_CASE("l-inf moment norm against a tensor-quadrature oracle") {
  const QuasiNorm g = lp_norm(2, kInfinity);
  REQUIRE(has_exact_moment_norm(g));
  const MomentNorm m = moment_norm_exact(g);
  CHECK(m(make_vec({1.0, 0.0})) == doctest::Approx(3.0).epsilon(1e-13));
  const Vec diag = make_vec({1.0, 1.0}) / std::sqrt(2.0);
  CHECK(m(diag) == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-13));
  for (const Vec& u : fibonacci_directions(2, 9)) CHECK(m(u) == doctest::Approx(square_moment_oracle(u)).epsilon(1e-10));
}

TEST_CASE("exact, quadrature and Monte Carlo moment norms agree") {
  const QuasiNorm g = lp_norm(2, kInfinity);
  const MomentNorm ex = moment_norm_exact(g);
  const MomentNorm qu = moment_norm_quadrature(g, 1e-11);
  const MomentNorm mc = moment_norm_montecarlo(g, 400000, 17);
  for (const Vec& u : fibonacci_directions(2, 20)) {
    CHECK(std::abs(qu(u) - ex(u)) <= 1e-8);
    const MomentValue v = mc.evaluate(u);
    CHECK(std::abs(v.value - ex(u)) <= 4.0 * v.error);
  }
  // l^3 in 3-D has no closed form; quadrature and Monte Carlo must still agree
  const QuasiNorm g3 = lp_norm(3, 3.0);
  CHECK_FALSE(has_exact_moment_norm(g3));
  const MomentNorm q3 = moment_norm_quadrature(g3, 1e-9);
  const MomentNorm m3 = moment_norm_montecarlo(g3, 200000, 3);
  for (const Vec& u : fibonacci_directions(3, 6)) {
    const MomentValue v = m3.evaluate(u);
    CHECK(std::abs(v.value - q3(u)) <= 4.0 * v.error);
  }
}

TEST_CASE("moment norm is a norm") {
  Rng rng(12);
  for (const QuasiNorm& g : {lp_norm(2, 1.0), lp_norm(2, 4.0), lp_norm(3, kInfinity)}) {
    const MomentNorm m = moment_norm_from_gauge(g);
    for (int i = 0; i < 40; ++i) {
      const Vec a = rng.direction(g.dim) * rng.uniform(0.1, 3.0);
      const Vec b = rng.direction(g.dim) * rng.uniform(0.1, 3.0);
      CHECK(m(a + b) <= m(a) + m(b) + 4.0 * m.accuracy());
      CHECK(m(-a) == doctest::Approx(m(a)).epsilon(1e-9));
    }
  }
}

TEST_CASE("anisotropic perimeter") {
  const MomentNorm e2 = moment_norm_exact(euclidean_norm(2));
  const SetRegion square = SetRegion::box(make_vec({0.0, 0.0}), make_vec({1.0, 1.0}));
  CHECK(anisotropic_perimeter(square, Domain::whole(2), e2) == doctest::Approx(8.0).epsilon(1e-12));
  CHECK(anisotropic_perimeter(SetRegion::ball(make_vec({0.0, 0.0}), 1.0), Domain::whole(2), e2) ==
        doctest::Approx(4.0 * std::numbers::pi).epsilon(1e-9));
  CHECK(anisotropic_perimeter(square, Domain::whole(2), moment_norm_exact(lp_norm(2, kInfinity))) ==
        doctest::Approx(12.0).epsilon(1e-12));
  const SetRegion unit_iv = SetRegion::intervals(Intervals1D::from_list({{0.0, 1.0}}));
  CHECK(anisotropic_perimeter(unit_iv, Domain::whole(1), moment_norm_exact(euclidean_norm(1))) ==
        doctest::Approx(2.0));
  // the constant-one evaluator reproduces the classical perimeter
  const MomentNorm one(2, [](const Vec&) { return MomentValue{1.0, 0.0}; }, MomentMethod::Exact, 0.0);
  const SetRegion quad = SetRegion::polytope(Polytope::from_vertices(
      2, {make_vec({0.0, 0.0}), make_vec({1.0, 0.2}), make_vec({0.4, 1.1}), make_vec({-0.3, 0.6})}));
  CHECK(anisotropic_perimeter(quad, Domain::whole(2), one) ==
        doctest::Approx(classical_perimeter(quad, Domain::whole(2))).epsilon(1e-12));
  const Domain clip = Domain::bounded(SetRegion::box(make_vec({0.0, -2.0}), make_vec({2.0, 2.0})));
  const SetRegion disk = SetRegion::ball(make_vec({0.0, 0.0}), 1.0);
  CHECK(anisotropic_perimeter(disk, clip, one) == doctest::Approx(std::numbers::pi).epsilon(1e-9));
  CHECK(classical_perimeter(disk, clip) == doctest::Approx(std::numbers::pi).epsilon(1e-9));
}

TEST_CASE("polar support check") {
  const auto dirs = fibonacci_directions(2, 12);
  CHECK(polar_support_check(moment_norm_exact(euclidean_norm(2)), dirs).passed);
  CHECK(polar_support_check(moment_norm_exact(lp_norm(2, kInfinity)), dirs).passed);
  // large on the diagonals: the unit level set is a non-convex star
  const MomentNorm bad(
      2,
      [](const Vec& u) {
        const double phi = std::atan2(u[1], u[0]);
        return MomentValue{1.0 + 3.0 * std::pow(std::sin(2.0 * phi), 2), 0.0};
      },
      MomentMethod::Exact, 0.0);
  const std::vector<Vec> axes_and_diag = {make_vec({1.0, 0.0}), make_vec({0.0, 1.0}),
                                          make_vec({1.0, 1.0}) / std::sqrt(2.0)};
  const PolarSupportReport r = polar_support_check(bad, axes_and_diag);
  CHECK_FALSE(r.passed);
  CHECK(r.max_violation > 1.0);
}
