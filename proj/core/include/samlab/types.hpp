#pragma once

#include <Eigen/Core>
#include <stdexcept>

#include "samlab/rng.hpp"

namespace samlab {

/// Weight-space vectors (w, v, iterates, basis directions). Dense doubles;
/// experiment configs keep the dimension small enough for dense storage.
using DenseVector = Eigen::VectorXd;

inline void require_finite(const DenseVector& w, const char* where) {
  if (!w.allFinite()) {
    throw std::runtime_error(std::string("non-finite coordinates in ") + where);
  }
}

/// Exact coordinate-wise equality (replayability checks).
inline bool bitwise_equal(const DenseVector& a, const DenseVector& b) {
  if (a.size() != b.size()) return false;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return false;
  }
  return true;
}

/// Euclidean projection onto the radius-R ball. Idempotent; never increases
/// the norm.
inline DenseVector project_ball(const DenseVector& w, double radius) {
  if (radius < 0.0) throw std::invalid_argument("project_ball: negative radius");
  const double norm = w.norm();
  if (norm <= radius) return w;
  DenseVector out = w * (radius / norm);
  // Guarantee the result lands inside the ball so re-projection is a bitwise
  // no-op even when the scaled norm rounds a hair above the radius.
  for (;;) {
    const double n2 = out.norm();
    if (n2 <= radius) break;
    double scale = radius / n2;
    if (!(scale < 1.0)) scale = std::nextafter(1.0, 0.0);
    out *= scale;
  }
  return out;
}

/// Uniform direction on the unit sphere in dimension dim.
inline DenseVector random_unit_vector(int dim, RngStream& rng) {
  DenseVector u(dim);
  double norm_sq = 0.0;
  do {
    for (int i = 0; i < dim; ++i) u[i] = rng.next_gaussian();
    norm_sq = u.squaredNorm();
  } while (norm_sq == 0.0);
  return u / std::sqrt(norm_sq);
}

/// Uniform point in the radius-R ball.
inline DenseVector random_in_ball(int dim, double radius, RngStream& rng) {
  const DenseVector dir = random_unit_vector(dim, rng);
  const double scale = std::pow(rng.next_double(), 1.0 / static_cast<double>(dim));
  return dir * (radius * scale);
}

}  // namespace samlab
