#pragma once

#include <limits>
#include <span>
#include <vector>

namespace fracperim {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Open interval (lo, hi); either end may be infinite.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
  bool empty() const { return !(lo < hi); }
  bool contains(double t) const { return lo < t && t < hi; }
  bool operator==(const Interval&) const = default;
};

/// Finite union of open intervals, sorted, pairwise at positive distance.
///
/// Set algebra works up to null sets: touching pieces are merged and isolated
/// points are dropped, which changes neither the fractional perimeter nor the
/// reduced boundary.
class Intervals1D {
 public:
  Intervals1D() = default;

  /// Validating constructor for user input. Throws std::invalid_argument when an
  /// interval is empty or when two intervals overlap or touch.
  static Intervals1D from_list(std::vector<Interval> parts);

  /// Normalizing constructor: sorts, merges overlapping or touching pieces and
  /// drops empty ones.
  static Intervals1D normalized(std::vector<Interval> parts);

  static Intervals1D whole_line() { return Intervals1D({Interval{-kInf, kInf}}); }

  std::span<const Interval> parts() const { return parts_; }
  std::size_t size() const { return parts_.size(); }
  bool empty() const { return parts_.empty(); }
  bool bounded() const;

  bool contains(double t) const;
  /// Lebesgue measure (may be infinite).
  double measure() const;
  /// Number of finite endpoints, i.e. H^0 of the reduced boundary.
  std::size_t boundary_count() const;

  Intervals1D complement() const;
  Intervals1D intersect(const Intervals1D& other) const;
  Intervals1D unite(const Intervals1D& other) const;
  Intervals1D minus(const Intervals1D& other) const { return intersect(other.complement()); }
  Intervals1D clip(double lo, double hi) const { return intersect(Intervals1D({Interval{lo, hi}})); }
  /// Image under t -> factor * t + shift (factor != 0).
  Intervals1D affine(double factor, double shift) const;

  bool operator==(const Intervals1D&) const = default;

 private:
  explicit Intervals1D(std::vector<Interval> parts) : parts_(std::move(parts)) {}
  std::vector<Interval> parts_;
};

}  // namespace fracperim
