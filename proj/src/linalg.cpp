#include "fracperim/linalg.hpp"
#include "fracperim/rng.hpp"

#include <stdexcept>

namespace fracperim {

std::vector<Vec> fibonacci_directions(int dim, int count) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("fibonacci_directions: bad dimension");
  if (count < 1) throw std::invalid_argument("fibonacci_directions: count must be positive");
  std::vector<Vec> out;
  out.reserve(static_cast<std::size_t>(count));
  if (dim == 1) {
    for (int i = 0; i < count; ++i) out.push_back(make_vec({i % 2 == 0 ? 1.0 : -1.0}));
    return out;
  }
  if (dim == 2) {
    // offset by half a step so no direction sits exactly on an axis or diagonal
    for (int i = 0; i < count; ++i) {
      const double phi = 2.0 * std::numbers::pi * (i + 0.5) / count;
      out.push_back(make_vec({std::cos(phi), std::sin(phi)}));
    }
    return out;
  }
  if (dim == 3) {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < count; ++i) {
      const double z = 1.0 - (2.0 * i + 1.0) / count;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double phi = golden * i;
      out.push_back(make_vec({r * std::cos(phi), r * std::sin(phi), z}));
    }
    return out;
  }
  // higher dimensions: a fixed pseudo-random stream is deterministic enough
  Rng rng(0x5eedf1b0ULL + static_cast<std::uint64_t>(dim));
  for (int i = 0; i < count; ++i) out.push_back(rng.direction(dim));
  return out;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  const double u1 = uniform_open_low();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  spare_normal_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

Vec Rng::direction(int dim) {
  switch (dim) {
    case 1:
      return make_vec({(next_u64() >> 63) ? 1.0 : -1.0});
    case 2: {
      const double a = 2.0 * std::numbers::pi * uniform();
      return make_vec({std::cos(a), std::sin(a)});
    }
    case 3: {
      const double z = uniform(-1.0, 1.0);
      const double a = 2.0 * std::numbers::pi * uniform();
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      return make_vec({r * std::cos(a), r * std::sin(a), z});
    }
    default: {
      Vec v(dim);
      double norm = 0.0;
      do {
        for (int i = 0; i < dim; ++i) v[i] = normal();
        norm = v.norm();
      } while (norm < 1e-300);
      return v / norm;
    }
  }
}

Vec Rng::in_unit_ball(int dim) {
  const Vec u = direction(dim);
  const double r = std::pow(uniform_open_low(), 1.0 / dim);
  return r * u;
}

}  // namespace fracperim
