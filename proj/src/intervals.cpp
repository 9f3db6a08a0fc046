#include "fracperim/intervals.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fracperim {

Intervals1D Intervals1D::from_list(std::vector<Interval> parts) {
  for (const auto& p : parts) {
    if (std::isnan(p.lo) || std::isnan(p.hi) || !(p.lo < p.hi))
      throw std::invalid_argument("intervals: empty or malformed interval (" + std::to_string(p.lo) +
                                  ", " + std::to_string(p.hi) + ")");
  }
  std::sort(parts.begin(), parts.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  for (std::size_t i = 1; i < parts.size(); ++i) {
    if (parts[i].lo <= parts[i - 1].hi)
      throw std::invalid_argument("intervals: overlapping or touching intervals near " +
                                  std::to_string(parts[i].lo));
  }
  return Intervals1D(std::move(parts));
}

Intervals1D Intervals1D::normalized(std::vector<Interval> parts) {
  std::erase_if(parts, [](const Interval& p) { return !(p.lo < p.hi); });
  std::sort(parts.begin(), parts.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  std::vector<Interval> merged;
  merged.reserve(parts.size());
  for (const auto& p : parts) {
    if (!merged.empty() && p.lo <= merged.back().hi) {
      merged.back().hi = std::max(merged.back().hi, p.hi);
    } else {
      merged.push_back(p);
    }
  }
  return Intervals1D(std::move(merged));
}

bool Intervals1D::bounded() const {
  return parts_.empty() || (std::isfinite(parts_.front().lo) && std::isfinite(parts_.back().hi));
}

bool Intervals1D::contains(double t) const {
  auto it = std::upper_bound(parts_.begin(), parts_.end(), t,
                             [](double v, const Interval& p) { return v < p.lo; });
  if (it == parts_.begin()) return false;
  return std::prev(it)->contains(t);
}

double Intervals1D::measure() const {
  double total = 0.0;
  for (const auto& p : parts_) total += p.length();
  return total;
}

std::size_t Intervals1D::boundary_count() const {
  std::size_t count = 0;
  for (const auto& p : parts_) {
    if (std::isfinite(p.lo)) ++count;
    if (std::isfinite(p.hi)) ++count;
  }
  return count;
}

Intervals1D Intervals1D::complement() const {
  std::vector<Interval> out;
  out.reserve(parts_.size() + 1);
  double cursor = -kInf;
  for (const auto& p : parts_) {
    if (cursor < p.lo) out.push_back({cursor, p.lo});
    cursor = p.hi;
  }
  if (cursor < kInf) out.push_back({cursor, kInf});
  return Intervals1D(std::move(out));
}

Intervals1D Intervals1D::intersect(const Intervals1D& other) const {
  std::vector<Interval> out;
  std::size_t i = 0, j = 0;
  while (i < parts_.size() && j < other.parts_.size()) {
    const double lo = std::max(parts_[i].lo, other.parts_[j].lo);
    const double hi = std::min(parts_[i].hi, other.parts_[j].hi);
    if (lo < hi) out.push_back({lo, hi});
    if (parts_[i].hi < other.parts_[j].hi) {
      ++i;
    } else {
      ++j;
    }
  }
  return Intervals1D(std::move(out));
}

Intervals1D Intervals1D::unite(const Intervals1D& other) const {
  std::vector<Interval> all(parts_.begin(), parts_.end());
  all.insert(all.end(), other.parts_.begin(), other.parts_.end());
  return normalized(std::move(all));
}

Intervals1D Intervals1D::affine(double factor, double shift) const {
  if (factor == 0.0) throw std::invalid_argument("intervals: affine factor must be nonzero");
  std::vector<Interval> out;
  out.reserve(parts_.size());
  for (const auto& p : parts_) {
    double a = factor * p.lo + shift;
    double b = factor * p.hi + shift;
    if (factor < 0) std::swap(a, b);
    out.push_back({a, b});
  }
  return normalized(std::move(out));
}

}  // namespace fracperim
