#include "fracperim/integration.hpp"

#include "fracperim/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fracperim {

const char* to_string(Engine e) {
  switch (e) {
    case Engine::Exact1D: return "exact1d";
    case Engine::Slicing: return "slicing";
    case Engine::MonteCarlo: return "montecarlo";
  }
  return "unknown";
}

std::optional<Engine> engine_from_string(const std::string& name) {
  if (name == "exact1d") return Engine::Exact1D;
  if (name == "slicing") return Engine::Slicing;
  if (name == "montecarlo") return Engine::MonteCarlo;
  return std::nullopt;
}

namespace {

void check_s(double s) {
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("s must lie in (0, 1)");
}

/// x^{1-s} - y^{1-s} without cancellation when x and y are close.
double gdiff(double x, double y, double e) {
  if (y == 0.0) return std::pow(x, e);
  if (x == 0.0) return -std::pow(y, e);
  return std::pow(y, e) * std::expm1(e * std::log(x / y));
}

}  // namespace

double pair_interaction(const Interval& left, const Interval& right, double s) {
  check_s(s);
  const double a = left.lo, b = left.hi, c = right.lo, d = right.hi;
  if (left.empty() || right.empty()) return 0.0;
  if (b > c) throw std::invalid_argument("pair_interaction: intervals overlap");
  const double e = 1.0 - s;
  const bool a_inf = std::isinf(a), d_inf = std::isinf(d);
  if (a_inf && d_inf) return kInf;
  double num;
  if (d_inf) {
    num = gdiff(c - a, c - b, e);
  } else if (a_inf) {
    num = -gdiff(c - b, d - b, e);
  } else {
    num = gdiff(c - a, d - a, e) - gdiff(c - b, d - b, e);
  }
  return num / (s * e);
}

double interaction_1d(const Intervals1D& a, const Intervals1D& b, double s, double w_left, double w_right) {
  double total = 0.0;
  for (const auto& i : a.parts()) {
    for (const auto& j : b.parts()) {
      if (i.hi <= j.lo) {
        total += w_left * pair_interaction(i, j, s);
      } else if (j.hi <= i.lo) {
        total += w_right * pair_interaction(j, i, s);
      } else {
        throw std::invalid_argument("interaction_1d: sets overlap");
      }
    }
  }
  return total;
}

namespace {

struct Weights1D {
  double left = 1.0, right = 1.0;
};

Weights1D weights_1d(const KernelFamily* fam, double s) {
  if (!fam) return {};
  return {fam->direction_weight(s, make_vec({-1.0})), fam->direction_weight(s, make_vec({1.0}))};
}

Intervals1D trace_1d(const SetRegion& r) { return r.trace(make_vec({0.0}), make_vec({1.0})); }

}  // namespace

EstimateResult perimeter_1d_exact(const Intervals1D& e, double s, const Domain& d, const KernelFamily* fam) {
  check_s(s);
  if (d.dim() != 1) throw std::invalid_argument("exact1d engine requires dimension 1");
  const Weights1D w = weights_1d(fam, s);
  const Intervals1D ec = e.complement();
  EstimateResult r;
  r.engine = Engine::Exact1D;
  r.s = s;
  Decomposition dec;
  if (d.is_whole()) {
    dec.p1 = interaction_1d(e, ec, s, w.left, w.right);
  } else {
    const Intervals1D om = trace_1d(d.region());
    const Intervals1D omc = om.complement();
    const Intervals1D e_in = e.intersect(om), ec_in = ec.intersect(om);
    dec.p1 = interaction_1d(e_in, ec_in, s, w.left, w.right);
    dec.p2 = interaction_1d(e_in, ec.intersect(omc), s, w.left, w.right) +
             interaction_1d(ec_in, e.intersect(omc), s, w.left, w.right);
  }
  r.value = dec.p1 + dec.p2;
  r.decomposition = dec;
  return r;
}

// ---------------------------------------------------------------------------
// Slicing

LineMeasureSampler::LineMeasureSampler(int dim, Vec center, double radius)
    : dim_(dim), center_(std::move(center)), radius_(radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw std::invalid_argument("line sampler: bad radius");
}

double LineMeasureSampler::measure() const {
  return 0.5 * unit_sphere_area(dim_) * unit_ball_volume(dim_ - 1) * std::pow(radius_, dim_ - 1);
}

std::pair<Vec, Vec> LineMeasureSampler::sample(Rng& rng) const {
  const Vec u = rng.direction(dim_);
  if (dim_ == 1) return {u, center_};
  if (dim_ == 2) {
    const double v = rng.uniform(-1.0, 1.0) * radius_;
    return {u, center_ + v * make_vec({-u[1], u[0]})};
  }
  // orthonormal basis of u-perp from the Householder map sending e_n to u
  const Vec disk = rng.in_unit_ball(dim_ - 1) * radius_;
  Vec w = u;
  w[dim_ - 1] -= 1.0;
  const double ww = w.squaredNorm();
  Vec x = center_;
  for (int i = 0; i < dim_ - 1; ++i) {
    Vec e = unit_vec(dim_, i);
    if (ww > 1e-30) e -= (2.0 * w[i] / ww) * w;
    x += disk[i] * e;
  }
  return {u, x};
}

std::vector<std::vector<EstimateResult>> slicing_pairs(const std::vector<std::pair<SetRegion, SetRegion>>& pairs,
                                                       const KernelFamily& fam, const std::vector<double>& s_list,
                                                       const EngineSpec& spec,
                                                       const std::vector<std::vector<double>>& combos) {
  const int n = fam.dim();
  for (double s : s_list) check_s(s);
  for (const auto& [a, b] : pairs)
    if (a.dim() != n || b.dim() != n) throw std::invalid_argument("slicing: set dimension differs from kernel");
  for (const auto& c : combos)
    if (c.size() != pairs.size()) throw std::invalid_argument("slicing: combination has wrong length");
  const std::size_t n_out = pairs.size() + combos.size();
  const std::size_t n_s = s_list.size();

  auto line_values = [&](const Vec& u, const Vec& x, std::vector<double>& out) {
    std::vector<Intervals1D> ta(pairs.size()), tb(pairs.size());
    for (std::size_t j = 0; j < pairs.size(); ++j) {
      ta[j] = pairs[j].first.trace(x, u);
      if (!ta[j].empty()) tb[j] = pairs[j].second.trace(x, u);
    }
    for (std::size_t si = 0; si < n_s; ++si) {
      const double s = s_list[si];
      const double w = fam.direction_weight(s, u);
      double* row = out.data() + si * n_out;
      for (std::size_t j = 0; j < pairs.size(); ++j)
        row[j] = ta[j].empty() || tb[j].empty() ? 0.0 : w * interaction_1d(ta[j], tb[j], s);
      for (std::size_t c = 0; c < combos.size(); ++c) {
        double v = 0.0;
        for (std::size_t j = 0; j < pairs.size(); ++j) v += combos[c][j] * row[j];
        row[pairs.size() + c] = v;
      }
    }
  };

  std::vector<std::vector<EstimateResult>> results(n_s, std::vector<EstimateResult>(n_out));
  for (std::size_t si = 0; si < n_s; ++si)
    for (auto& r : results[si]) {
      r.engine = Engine::Slicing;
      r.s = s_list[si];
      r.seed = spec.seed;
    }

  if (n == 1) {
    // the two directions are the whole line space: the formula is exact
    std::vector<double> acc(n_s * n_out, 0.0), tmp(n_s * n_out);
    for (double sign : {1.0, -1.0}) {
      line_values(make_vec({sign}), make_vec({0.0}), tmp);
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += 0.5 * tmp[i];
    }
    for (std::size_t si = 0; si < n_s; ++si)
      for (std::size_t k = 0; k < n_out; ++k) {
        results[si][k].value = acc[si * n_out + k];
        results[si][k].samples = 2;
      }
    return results;
  }

  Box hull{Vec::Constant(n, kInf), Vec::Constant(n, -kInf)};
  for (const auto& p : pairs) hull = hull.hull(p.first.bounding_box());
  if (hull.empty()) return results;
  if (!hull.bounded()) throw std::invalid_argument("slicing: the first set of every pair must be bounded");
  const double radius = hull.circumradius() * (1.0 + 1e-9) + 1e-12;
  const LineMeasureSampler sampler(n, hull.center(), radius);
  const double measure = sampler.measure();

  if (spec.n_lines == 0) throw std::invalid_argument("slicing: n_lines must be positive");
  const std::size_t chunk = std::max<std::size_t>(1, spec.chunk_size);
  const std::size_t n_chunks = (spec.n_lines + chunk - 1) / chunk;
  auto work = [&](std::size_t c) {
    std::vector<MomentAccumulator> acc(n_s * n_out);
    std::vector<double> vals(n_s * n_out);
    Rng rng(derive_seed(spec.seed, c));
    const std::size_t begin = c * chunk, end = std::min(spec.n_lines, begin + chunk);
    for (std::size_t i = begin; i < end; ++i) {
      const auto [u, x] = sampler.sample(rng);
      line_values(u, x, vals);
      for (std::size_t k = 0; k < vals.size(); ++k) acc[k].add(vals[k]);
    }
    return acc;
  };
  const auto parts = run_chunks<std::vector<MomentAccumulator>>(n_chunks, spec.threads, work);
  std::vector<MomentAccumulator> total(n_s * n_out);
  for (const auto& p : parts)
    for (std::size_t k = 0; k < total.size(); ++k) total[k].merge(p[k]);
  for (std::size_t si = 0; si < n_s; ++si)
    for (std::size_t k = 0; k < n_out; ++k) {
      const auto& a = total[si * n_out + k];
      auto& r = results[si][k];
      r.value = measure * a.mean();
      r.std_error = measure * a.std_error();
      r.samples = spec.n_lines;
    }
  return results;
}

EstimateResult locality_defect_slicing(const SetRegion& a, const SetRegion& b, const KernelFamily& fam, double s,
                                       const EngineSpec& spec) {
  if (!a.bounding_box().bounded() && b.bounding_box().bounded())
    return slicing_pairs({{b, a}}, fam, {s}, spec)[0][0];
  return slicing_pairs({{a, b}}, fam, {s}, spec)[0][0];
}

// ---------------------------------------------------------------------------
// Direct Monte Carlo

namespace {

/// Plain estimator of the mass of I(A, B) with |x - y| >= r_min.
MomentAccumulator mc_sum(const SetRegion& a, const SetRegion& b, const KernelFamily& fam, double s, double r_min,
                         std::size_t count, std::uint64_t seed, const EngineSpec& spec) {
  const int n = fam.dim();
  const Box box = a.bounding_box();
  const double weight = box.volume() * unit_sphere_area(n) * std::pow(r_min, -s) / s;
  const std::size_t chunk = std::max<std::size_t>(1, spec.chunk_size);
  const std::size_t n_chunks = (count + chunk - 1) / chunk;
  auto work = [&](std::size_t c) {
    MomentAccumulator acc;
    Rng rng(derive_seed(seed, c));
    const std::size_t begin = c * chunk, end = std::min(count, begin + chunk);
    Vec x(n);
    for (std::size_t i = begin; i < end; ++i) {
      for (int k = 0; k < n; ++k) x[k] = rng.uniform(box.lo[k], box.hi[k]);
      const Vec theta = rng.direction(n);
      const double r = r_min * std::pow(rng.uniform_open_low(), -1.0 / s);
      double v = 0.0;
      if (a.contains(x) && b.contains(x + r * theta)) v = weight * fam.direction_weight(s, theta);
      acc.add(v);
    }
    return acc;
  };
  const auto parts = run_chunks<MomentAccumulator>(n_chunks, spec.threads, work);
  MomentAccumulator total;
  for (const auto& p : parts) total.merge(p);
  return total;
}

}  // namespace

EstimateResult locality_defect_mc(const SetRegion& a_in, const SetRegion& b_in, const KernelFamily& fam, double s,
                                  const EngineSpec& spec) {
  check_s(s);
  const int n = fam.dim();
  if (a_in.dim() != n || b_in.dim() != n) throw std::invalid_argument("montecarlo: set dimension differs from kernel");
  const bool swap = !a_in.bounding_box().bounded() && b_in.bounding_box().bounded();
  const SetRegion& a = swap ? b_in : a_in;
  const SetRegion& b = swap ? a_in : b_in;
  EstimateResult r;
  r.engine = Engine::MonteCarlo;
  r.s = s;
  r.seed = spec.seed;
  r.samples = spec.n_pairs;
  const Box box_a = a.bounding_box();
  if (box_a.empty() || b.bounding_box().empty()) return r;
  if (!box_a.bounded()) throw std::invalid_argument("montecarlo: one of the two sets must be bounded");
  if (spec.n_pairs < 2) throw std::invalid_argument("montecarlo: n_pairs must be at least 2");

  // near-diagonal mass below r is at most c |S| P(A) r^{1-s} / (2 (1 - s))
  const double c_bound = fam.c() * 0.5 * perimeter_upper_bound(a) * unit_sphere_area(n);
  auto truncation = [&](double rm) { return c_bound * std::pow(rm, 1.0 - s) / (1.0 - s); };

  const double gap = box_a.gap(b.bounding_box());
  double r_min = spec.r_min;
  double bound = 0.0;
  if (r_min <= 0.0) {
    if (gap > 0.0) {
      r_min = gap;
    } else {
      const double radius = std::max(box_a.circumradius(), 1e-12);
      const double r0 = 1e-3 * radius;
      const std::size_t pilot_n = std::max<std::size_t>(2000, spec.n_pairs / 20);
      const MomentAccumulator pilot = mc_sum(a, b, fam, s, r0, pilot_n, derive_seed(spec.seed, 0x9170ULL), spec);
      const double target = spec.r_min_target * pilot.mean();
      if (target > 0.0 && std::isfinite(c_bound) && c_bound > 0.0) {
        r_min = std::pow(target * (1.0 - s) / c_bound, 1.0 / (1.0 - s));
      } else {
        r_min = r0;
      }
      // below this radius too few samples reach across the set for the sample
      // variance to mean anything; the truncation bound then carries the error
      const double resolvable = radius * std::pow(std::min(1.0, 1000.0 / static_cast<double>(spec.n_pairs)), 1.0 / s);
      r_min = std::max(r_min, resolvable);
    }
  }
  if (r_min > gap) bound = truncation(r_min);
  if (!std::isfinite(bound)) throw std::invalid_argument("montecarlo: cannot bound the near-diagonal mass of this set");
  const MomentAccumulator acc = mc_sum(a, b, fam, s, r_min, spec.n_pairs, spec.seed, spec);
  r.value = acc.mean();
  r.truncation_bound = bound;
  r.std_error = acc.std_error() + bound;
  r.r_min = r_min;
  if (!std::isfinite(r.value) || !std::isfinite(r.std_error))
    throw std::runtime_error("montecarlo: variance estimate is not finite");
  return r;
}

// ---------------------------------------------------------------------------
// Perimeter assembly

namespace {

struct PairPlan {
  std::vector<std::pair<SetRegion, SetRegion>> pairs;
  std::vector<std::vector<double>> combos;
};

PairPlan perimeter_plan(const SetRegion& e, const Domain& d, bool p1_only) {
  PairPlan plan;
  const SetRegion ec = SetRegion::complement(e);
  if (d.is_whole()) {
    const Box eb = e.bounding_box();
    if (eb.empty() || eb.bounded()) {
      plan.pairs = {{e, ec}};
    } else if (ec.bounding_box().bounded() || e.kind() == SetRegion::Kind::Complement) {
      // P(E) = P(E^c) by kernel symmetry
      plan.pairs = {{ec, e}};
    } else {
      throw std::invalid_argument("perimeter: neither the set nor its complement is bounded");
    }
    return plan;
  }
  const SetRegion& om = d.region();
  const SetRegion omc = SetRegion::complement(om);
  const SetRegion e_in = SetRegion::intersection(e, om);
  const SetRegion ec_in = SetRegion::intersection(ec, om);
  plan.pairs = {{e_in, ec_in}};
  if (!p1_only) {
    plan.pairs.push_back({e_in, SetRegion::intersection(ec, omc)});
    plan.pairs.push_back({ec_in, SetRegion::intersection(e, omc)});
    plan.combos = {{0.0, 1.0, 1.0}, {1.0, 1.0, 1.0}};
  }
  return plan;
}

std::vector<EstimateResult> mc_pairs(const PairPlan& plan, const KernelFamily& fam, double s, const EngineSpec& spec,
                                     std::vector<EstimateResult>& terms) {
  terms.clear();
  for (std::size_t j = 0; j < plan.pairs.size(); ++j) {
    EngineSpec sub = spec;
    sub.seed = derive_seed(spec.seed, 0x7e50ULL + j);
    terms.push_back(locality_defect_mc(plan.pairs[j].first, plan.pairs[j].second, fam, s, sub));
  }
  std::vector<EstimateResult> combos;
  for (const auto& c : plan.combos) {
    EstimateResult r = terms.front();
    r.value = 0.0;
    double var = 0.0, bound = 0.0;
    for (std::size_t j = 0; j < terms.size(); ++j) {
      if (c[j] == 0.0) continue;
      r.value += c[j] * terms[j].value;
      const double sigma = terms[j].std_error - terms[j].truncation_bound;
      var += c[j] * c[j] * sigma * sigma;
      bound += std::abs(c[j]) * terms[j].truncation_bound;
    }
    r.truncation_bound = bound;
    r.std_error = std::sqrt(var) + bound;
    r.seed = spec.seed;
    combos.push_back(r);
  }
  return combos;
}

EstimateResult assemble(const std::vector<EstimateResult>& row, bool whole, Engine engine, const EngineSpec& spec) {
  EstimateResult r = row.back();
  Decomposition dec;
  if (whole) {
    r = row[0];
    dec.p1 = r.value;
    dec.p1_error = r.std_error;
  } else {
    dec.p1 = row[0].value;
    dec.p1_error = row[0].std_error;
    dec.p2 = row[3].value;
    dec.p2_error = row[3].std_error;
    r = row[4];
  }
  r.engine = engine;
  r.seed = spec.seed;
  r.decomposition = dec;
  return r;
}

}  // namespace

std::vector<EstimateResult> perimeter_full_multi(const SetRegion& e, const Domain& d, const KernelFamily& fam,
                                                 const std::vector<double>& s_list, const EngineSpec& spec) {
  if (e.dim() != fam.dim() || d.dim() != fam.dim())
    throw std::invalid_argument("perimeter: set, domain and kernel differ in dimension");
  for (double s : s_list) check_s(s);
  std::vector<EstimateResult> out;
  if (spec.engine == Engine::Exact1D) {
    if (fam.dim() != 1) throw std::invalid_argument("exact1d engine requires dimension 1");
    const Intervals1D te = trace_1d(e);
    for (double s : s_list) {
      EstimateResult r = perimeter_1d_exact(te, s, d, &fam);
      r.seed = spec.seed;
      out.push_back(r);
    }
    return out;
  }
  const PairPlan plan = perimeter_plan(e, d, false);
  if (spec.engine == Engine::Slicing) {
    const auto rows = slicing_pairs(plan.pairs, fam, s_list, spec, plan.combos);
    for (const auto& row : rows) out.push_back(assemble(row, d.is_whole(), Engine::Slicing, spec));
    return out;
  }
  for (double s : s_list) {
    std::vector<EstimateResult> terms;
    auto combos = mc_pairs(plan, fam, s, spec, terms);
    std::vector<EstimateResult> row = terms;
    row.insert(row.end(), combos.begin(), combos.end());
    EstimateResult r = assemble(row, d.is_whole(), Engine::MonteCarlo, spec);
    r.samples = spec.n_pairs * terms.size();
    out.push_back(r);
  }
  return out;
}

EstimateResult perimeter_full(const SetRegion& e, const Domain& d, const KernelFamily& fam, double s,
                              const EngineSpec& spec) {
  return perimeter_full_multi(e, d, fam, {s}, spec).front();
}

std::vector<EstimateResult> perimeter_p1_multi(const SetRegion& e, const Domain& d, const KernelFamily& fam,
                                               const std::vector<double>& s_list, const EngineSpec& spec) {
  if (d.is_whole()) return perimeter_full_multi(e, d, fam, s_list, spec);
  std::vector<EstimateResult> out;
  if (spec.engine == Engine::Exact1D) {
    for (auto r : perimeter_full_multi(e, d, fam, s_list, spec)) {
      r.value = r.decomposition->p1;
      out.push_back(r);
    }
    return out;
  }
  const PairPlan plan = perimeter_plan(e, d, true);
  return locality_defect_multi(plan.pairs[0].first, plan.pairs[0].second, fam, s_list, spec);
}

std::vector<EstimateResult> locality_defect_multi(const SetRegion& a, const SetRegion& b, const KernelFamily& fam,
                                                  const std::vector<double>& s_list, const EngineSpec& spec) {
  std::vector<EstimateResult> out;
  switch (spec.engine) {
    case Engine::Exact1D: {
      if (fam.dim() != 1) throw std::invalid_argument("exact1d engine requires dimension 1");
      const Intervals1D ta = trace_1d(a), tb = trace_1d(b);
      for (double s : s_list) {
        check_s(s);
        const Weights1D w = weights_1d(&fam, s);
        EstimateResult r;
        r.engine = Engine::Exact1D;
        r.s = s;
        r.seed = spec.seed;
        r.value = interaction_1d(ta, tb, s, w.left, w.right);
        out.push_back(r);
      }
      return out;
    }
    case Engine::Slicing: {
      const bool swap = !a.bounding_box().bounded() && b.bounding_box().bounded();
      const auto rows = slicing_pairs({swap ? std::pair{b, a} : std::pair{a, b}}, fam, s_list, spec);
      for (const auto& row : rows) out.push_back(row[0]);
      return out;
    }
    case Engine::MonteCarlo:
      for (double s : s_list) out.push_back(locality_defect_mc(a, b, fam, s, spec));
      return out;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Identity checks

AdditivityReport additivity_defect_check(const SetRegion& e, const SetRegion& o1, const SetRegion& o2,
                                         const KernelFamily& fam, double s, const EngineSpec& spec) {
  check_s(s);
  const int n = fam.dim();
  if (e.dim() != n || o1.dim() != n || o2.dim() != n)
    throw std::invalid_argument("additivity: set, domains and kernel differ in dimension");
  {
    // disjointness probe
    Rng rng(derive_seed(spec.seed, 0xd15cULL));
    const Box box = o1.bounding_box().intersect(o2.bounding_box());
    if (n == 1) {
      if (trace_1d(o1).intersect(trace_1d(o2)).measure() > 0.0)
        throw std::invalid_argument("additivity: domains overlap");
    } else if (!box.empty() && box.bounded()) {
      for (int i = 0; i < 20000; ++i) {
        Vec x(n);
        for (int k = 0; k < n; ++k) x[k] = rng.uniform(box.lo[k], box.hi[k]);
        if (o1.contains(x) && o2.contains(x)) throw std::invalid_argument("additivity: domains overlap");
      }
    }
  }
  const SetRegion ec = SetRegion::complement(e);
  const SetRegion om = set_union(o1, o2);
  auto in = [](const SetRegion& x, const SetRegion& y) { return SetRegion::intersection(x, y); };
  const std::vector<std::pair<SetRegion, SetRegion>> pairs = {
      {in(e, om), in(ec, om)}, {in(e, o1), in(ec, o1)}, {in(e, o2), in(ec, o2)},
      {in(e, o1), in(ec, o2)}, {in(e, o2), in(ec, o1)}};
  AdditivityReport rep;
  std::vector<double> vals(pairs.size()), errs(pairs.size(), 0.0);
  double diff_error = 0.0;
  if (spec.engine == Engine::Exact1D) {
    if (n != 1) throw std::invalid_argument("exact1d engine requires dimension 1");
    const Weights1D w = weights_1d(&fam, s);
    for (std::size_t j = 0; j < pairs.size(); ++j)
      vals[j] = interaction_1d(trace_1d(pairs[j].first), trace_1d(pairs[j].second), s, w.left, w.right);
  } else if (spec.engine == Engine::Slicing) {
    const auto rows = slicing_pairs(pairs, fam, {s}, spec, {{1.0, -1.0, -1.0, -1.0, -1.0}});
    for (std::size_t j = 0; j < pairs.size(); ++j) vals[j] = rows[0][j].value;
    diff_error = rows[0].back().std_error;
  } else {
    double var = 0.0, bound = 0.0;
    for (std::size_t j = 0; j < pairs.size(); ++j) {
      EngineSpec sub = spec;
      sub.seed = derive_seed(spec.seed, 0xadd0ULL + j);
      const EstimateResult r = locality_defect_mc(pairs[j].first, pairs[j].second, fam, s, sub);
      vals[j] = r.value;
      const double sigma = r.std_error - r.truncation_bound;
      var += sigma * sigma;
      bound += r.truncation_bound;
    }
    diff_error = std::sqrt(var) + bound;
  }
  rep.lhs = vals[0];
  rep.rhs = vals[1] + vals[2] + vals[3] + vals[4];
  rep.discrepancy = std::abs(rep.lhs - rep.rhs);
  rep.tolerance = 3.0 * diff_error + 1e-10 * std::max(1.0, std::abs(rep.lhs));
  rep.passed = rep.discrepancy <= rep.tolerance;
  return rep;
}

CoareaReport coarea_check_1d(const PiecewiseConstant& u, double s) {
  check_s(s);
  std::vector<Interval> supports;
  for (const auto& [iv, v] : u.pieces) {
    if (!(iv.lo < iv.hi) || !std::isfinite(iv.lo) || !std::isfinite(iv.hi) || !std::isfinite(v))
      throw std::invalid_argument("coarea: pieces must be finite intervals with finite values");
    supports.push_back(iv);
  }
  // pieces may touch but not overlap
  std::sort(supports.begin(), supports.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  for (std::size_t i = 1; i < supports.size(); ++i)
    if (supports[i].lo < supports[i - 1].hi) throw std::invalid_argument("coarea: pieces overlap");

  // level regions: each piece, plus the zero region outside all pieces
  std::vector<std::pair<Intervals1D, double>> regions;
  std::vector<Interval> zero_parts;
  for (const auto& [iv, v] : u.pieces) {
    if (v == 0.0) {
      zero_parts.push_back(iv);
    } else {
      regions.push_back({Intervals1D::from_list({iv}), v});
    }
  }
  const Intervals1D support = Intervals1D::normalized(supports);
  regions.push_back({support.complement().unite(Intervals1D::normalized(zero_parts)), 0.0});

  CoareaReport rep;
  for (std::size_t i = 0; i < regions.size(); ++i)
    for (std::size_t j = i + 1; j < regions.size(); ++j) {
      const double jump = std::abs(regions[i].second - regions[j].second);
      if (jump > 0.0) rep.lhs += jump * interaction_1d(regions[i].first, regions[j].first, s);
    }

  std::vector<double> levels = {0.0};
  for (const auto& [iv, v] : u.pieces) levels.push_back(v);
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  for (std::size_t k = 0; k + 1 < levels.size(); ++k) {
    std::vector<Interval> above;
    for (const auto& [iv, v] : u.pieces)
      if (v >= levels[k + 1]) above.push_back(iv);
    Intervals1D superlevel = Intervals1D::normalized(above);
    if (levels[k] < 0.0) superlevel = superlevel.unite(support.complement());
    for (const auto& [iv, v] : u.pieces)
      if (v == 0.0 && levels[k] < 0.0) superlevel = superlevel.unite(Intervals1D::from_list({iv}));
    rep.rhs += (levels[k + 1] - levels[k]) * interaction_1d(superlevel, superlevel.complement(), s);
  }
  const double scale = std::max(std::abs(rep.lhs), std::abs(rep.rhs));
  rep.relative_discrepancy = scale > 0.0 ? std::abs(rep.lhs - rep.rhs) / scale : 0.0;
  rep.passed = rep.relative_discrepancy <= 1e-9;
  return rep;
}

}  // namespace fracperim
