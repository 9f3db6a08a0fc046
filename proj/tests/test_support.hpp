#pragma once

#include "fracperim/integration.hpp"
#include "fracperim/linalg.hpp"

#include <cmath>
#include <limits>

namespace fracperim::test {

inline EngineSpec exact_engine() {
  EngineSpec e;
  e.engine = Engine::Exact1D;
  return e;
}

inline EngineSpec slicing_engine(std::size_t lines, std::uint64_t seed, int threads = 1) {
  EngineSpec e;
  e.engine = Engine::Slicing;
  e.n_lines = lines;
  e.seed = seed;
  e.threads = threads;
  return e;
}

inline EngineSpec mc_engine(std::size_t pairs, std::uint64_t seed, int threads = 1) {
  EngineSpec e;
  e.engine = Engine::MonteCarlo;
  e.n_pairs = pairs;
  e.seed = seed;
  e.threads = threads;
  return e;
}

/// |a - b| within k combined standard errors.
inline bool agree(const EstimateResult& a, const EstimateResult& b, double k = 3.0) {
  return std::abs(a.value - b.value) <= k * std::hypot(a.std_error, b.std_error) + 1e-12 * std::abs(a.value);
}

inline double inf() { return std::numeric_limits<double>::infinity(); }

}  // namespace fracperim::test
