#include "samlab/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace samlab {

namespace {

/// Certificate for kind A at w: every column that is active in some sample
/// carries a non-positive weight, and the always-active last coordinate is
/// non-negative. Under these conditions hinge arguments obey
/// g_k(w+v) <= w_d + |v|, so v = r e_d attains the global maximum.
bool cert_flat_sphere(const LossHandle& loss, const Dataset& data, const DenseVector& w) {
  const int d = loss.dim;
  if (w[d - 1] < 0.0) return false;
  std::vector<bool> active(static_cast<std::size_t>(d - 1), false);
  for (const Sample& s : data.samples) {
    if (s.is_null) continue;
    for (int j = 0; j + 1 < d; ++j) {
      if (s.bits[static_cast<std::size_t>(j)] != 0) active[static_cast<std::size_t>(j)] = true;
    }
  }
  for (int j = 0; j + 1 < d; ++j) {
    if (active[static_cast<std::size_t>(j)] && w[j] > 0.0) return false;
  }
  return true;
}

/// Certificate for kind B at w: no sample sees a positive hinge argument,
/// i.e. z_k(i) w(i,b) <= 0 throughout. Then g_k(w+v) <= |w_d| + |v| and the
/// last coordinate (or, when w_d = 0, a fresh good-block coordinate) attains
/// the maximum.
bool cert_block_hinge(const LossHandle& loss, const Dataset& data, const DenseVector& w) {
  const int blocks = loss.num_blocks();
  const int tb = loss.t_blocks;
  std::vector<bool> has_plus(static_cast<std::size_t>(blocks), false);
  std::vector<bool> has_minus(static_cast<std::size_t>(blocks), false);
  for (const Sample& s : data.samples) {
    if (s.is_null) continue;
    for (int i = 0; i < blocks; ++i) {
      if (s.bits[static_cast<std::size_t>(i)] > 0) has_plus[static_cast<std::size_t>(i)] = true;
      else has_minus[static_cast<std::size_t>(i)] = true;
    }
  }
  for (int i = 0; i < blocks; ++i) {
    const int base = loss.block_start(i);
    for (int b = 0; b < tb; ++b) {
      if (has_plus[static_cast<std::size_t>(i)] && w[base + b] > 0.0) return false;
      if (has_minus[static_cast<std::size_t>(i)] && w[base + b] < 0.0) return false;
    }
  }
  return true;
}

InnerMax finish(const LossHandle& loss, const Dataset& data, const DenseVector& w,
                DenseVector v, bool certified) {
  InnerMax out;
  out.value = eval_empirical(loss, w + v, data);
  out.v = std::move(v);
  out.certified = certified;
  return out;
}

}  // namespace

const char* to_string(TieMode mode) {
  switch (mode) {
    case TieMode::AdversarialFreshCoordinate: return "AdversarialFreshCoordinate";
    case TieMode::LastCoordinate: return "LastCoordinate";
    case TieMode::AscentFromRandom: return "AscentFromRandom";
  }
  return "?";
}

InnerMax exact_argmax(const LossHandle& loss, const Dataset& data, const DenseVector& w,
                      double r, TiePolicy& policy) {
  if (r < 0.0) throw std::invalid_argument("exact_argmax: negative radius");
  if (w.size() != loss.dim) throw std::invalid_argument("exact_argmax: dimension mismatch");
  if (policy.mode == TieMode::AscentFromRandom) {
    throw NoClosedFormError("exact_argmax: AscentFromRandom policy defers to the ascent oracle");
  }
  const int d = loss.dim;

  switch (loss.kind) {
    case LossKind::ScalarHingeD: {
      // f is nondecreasing, so the right endpoint of [w-r, w+r] is always the max.
      DenseVector v = DenseVector::Zero(1);
      v[0] = r;
      return finish(loss, data, w, std::move(v), true);
    }
    case LossKind::FlatSphereA: {
      if (policy.mode != TieMode::LastCoordinate) {
        throw std::invalid_argument("exact_argmax: adversarial policy applies to kind B only");
      }
      if (!cert_flat_sphere(loss, data, w)) {
        throw NoClosedFormError("exact_argmax: point outside the certified region for kind A");
      }
      DenseVector v = DenseVector::Zero(d);
      v[d - 1] = r;
      return finish(loss, data, w, std::move(v), true);
    }
    case LossKind::BlockHingeB: {
      if (!cert_block_hinge(loss, data, w)) {
        throw NoClosedFormError("exact_argmax: point outside the certified region for kind B");
      }
      if (policy.mode == TieMode::LastCoordinate) {
        DenseVector v = DenseVector::Zero(d);
        v[d - 1] = (w[d - 1] >= 0.0) ? r : -r;
        return finish(loss, data, w, std::move(v), true);
      }
      // Adversarial fresh coordinate of the good block.
      if (w[d - 1] != 0.0) {
        throw NoClosedFormError(
            "exact_argmax: adversarial maximizer requires a zero last coordinate");
      }
      const auto good = find_good_column(data, +1);
      if (!good) throw NoGoodColumnError("exact_argmax: no all-plus column in the sample");
      const int base = loss.block_start(*good);
      int coord = -1;
      for (int b = 0; b < loss.t_blocks; ++b) {
        const int c = base + b;
        if (std::find(policy.visited.begin(), policy.visited.end(), c) == policy.visited.end()) {
          coord = c;
          break;
        }
      }
      if (coord < 0) {
        throw std::runtime_error("exact_argmax: good block exhausted (more steps than T)");
      }
      if (w[coord] != 0.0) {
        throw std::runtime_error("exact_argmax: fresh coordinate already perturbed");
      }
      policy.visited.push_back(coord);
      DenseVector v = DenseVector::Zero(d);
      v[coord] = r;
      return finish(loss, data, w, std::move(v), true);
    }
    default:
      throw NoClosedFormError("exact_argmax: kind has no closed-form maximizer family");
  }
}

InnerMax ascent_argmax(const LossHandle& loss, const Dataset& data, const DenseVector& w,
                       double r, int iters, double step, int restarts, RngStream rng) {
  if (iters < 1 || restarts < 1) throw std::invalid_argument("ascent_argmax: bad budget");
  if (r < 0.0) throw std::invalid_argument("ascent_argmax: negative radius");
  const int d = loss.dim;

  InnerMax best;
  best.v = DenseVector::Zero(d);
  best.value = eval_empirical(loss, w, data);
  best.certified = (r == 0.0);
  if (r == 0.0) return best;

  const double step0 =
      step > 0.0 ? step : r / (10.0 * loss.beta * std::max(1.0, static_cast<double>(data.n)));

  std::vector<DenseVector> starts;
  starts.push_back(DenseVector::Zero(d));
  {
    const DenseVector g = grad_empirical(loss, w, data);
    if (g.norm() > 0.0) starts.push_back(r * g.normalized());
    // Strongest coordinate directions of the gradient.
    std::vector<int> idx(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) idx[static_cast<std::size_t>(j)] = j;
    std::partial_sort(idx.begin(), idx.begin() + std::min(d, 6), idx.end(),
                      [&](int a, int b) { return std::abs(g[a]) > std::abs(g[b]); });
    for (int t = 0; t < std::min(d, 6); ++t) {
      DenseVector e = DenseVector::Zero(d);
      e[idx[static_cast<std::size_t>(t)]] = r;
      starts.push_back(e);
      starts.push_back(-e);
    }
  }
  {
    DenseVector e = DenseVector::Zero(d);
    e[d - 1] = r;
    starts.push_back(e);
    starts.push_back(-e);
  }
  if (loss.kind == LossKind::FlatSphereA || loss.kind == LossKind::BlockHingeB) {
    // Exact single-coordinate scores: the hinge constructions attain their
    // maxima on coordinate moves, and the score of every v = s r e_j is
    // computable in O(n) from per-sample hinge mass.
    const bool is_a = loss.kind == LossKind::FlatSphereA;
    const int nn = data.n;
    std::vector<double> mass(static_cast<std::size_t>(nn), 0.0);
    for (int k = 0; k < nn; ++k) {
      const Sample& z = data.samples[static_cast<std::size_t>(k)];
      if (z.is_null) continue;
      double s = 0.0;
      if (is_a) {
        for (int j = 0; j + 1 < d; ++j) {
          if (z.bits[static_cast<std::size_t>(j)] != 0 && w[j] > 0.0) s += w[j] * w[j];
        }
        if (w[d - 1] > 0.0) s += w[d - 1] * w[d - 1];
      } else {
        for (int i = 0; i < loss.num_blocks(); ++i) {
          const double zi = static_cast<double>(z.bits[static_cast<std::size_t>(i)]);
          const int base = loss.block_start(i);
          for (int b = 0; b < loss.t_blocks; ++b) {
            const double x = zi * w[base + b];
            if (x > 0.0) s += x * x;
          }
        }
        s += w[d - 1] * w[d - 1];
      }
      mass[static_cast<std::size_t>(k)] = s;
    }
    auto relu = [](double x) { return x > 0.0 ? x : 0.0; };
    auto coordinate_score = [&](int j, double move) {
      double total = 0.0;
      for (int k = 0; k < nn; ++k) {
        const Sample& z = data.samples[static_cast<std::size_t>(k)];
        if (z.is_null) continue;
        double s = mass[static_cast<std::size_t>(k)];
        if (j == d - 1 && !is_a) {
          s += (w[j] + move) * (w[j] + move) - w[j] * w[j];  // unhinged last coordinate
        } else {
          double sign = 1.0;  // sign seen by sample k on coordinate j (0 = inactive)
          if (j + 1 < d) {
            sign = is_a ? (z.bits[static_cast<std::size_t>(j)] != 0 ? 1.0 : 0.0)
                        : static_cast<double>(z.bits[static_cast<std::size_t>(j / loss.t_blocks)]);
          }
          if (sign != 0.0) {
            const double old_arg = relu(sign * w[j]);
            const double new_arg = relu(sign * (w[j] + move));
            s += new_arg * new_arg - old_arg * old_arg;
          }
        }
        const double t = std::sqrt(std::max(0.0, s)) - loss.rho;
        if (t > 0.0) total += 0.5 * t * t;
      }
      return total / static_cast<double>(nn);
    };
    std::vector<std::pair<double, std::pair<int, double>>> scored;
    scored.reserve(static_cast<std::size_t>(2 * d));
    for (int j = 0; j < d; ++j) {
      scored.emplace_back(coordinate_score(j, r), std::make_pair(j, r));
      if (!is_a) scored.emplace_back(coordinate_score(j, -r), std::make_pair(j, -r));
    }
    std::partial_sort(scored.begin(), scored.begin() + std::min<std::size_t>(3, scored.size()),
                      scored.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t t = 0; t < std::min<std::size_t>(3, scored.size()); ++t) {
      DenseVector e = DenseVector::Zero(d);
      e[scored[t].second.first] = scored[t].second.second;
      starts.push_back(std::move(e));
    }
  }
  for (int s = 0; s < restarts; ++s) starts.push_back(r * random_unit_vector(d, rng));

  for (const DenseVector& start : starts) {
    DenseVector v = start;
    double value = eval_empirical(loss, w + v, data);
    for (int it = 0; it < iters; ++it) {
      const DenseVector g = grad_empirical(loss, w + v, data);
      if (g.norm() == 0.0) break;
      const double tol = 1e-17 * std::max(1.0, std::abs(value));

      // Boundary move: linearization is maximized at r g/|g|, and convexity
      // makes the move non-decreasing in F_S.
      DenseVector cand = r * g.normalized();
      double cand_value = eval_empirical(loss, w + cand, data);

      if (cand_value <= value + tol) {
        // Boundary move stalled; fall back to backtracked projected-gradient
        // steps before giving up on this start.
        bool improved = false;
        double a = step0;
        for (int bt = 0; bt < 10 && !improved; ++bt, a *= 0.5) {
          DenseVector pg = project_ball(v + a * g, r);
          const double pg_value = eval_empirical(loss, w + pg, data);
          if (pg_value > value + tol) {
            cand = std::move(pg);
            cand_value = pg_value;
            improved = true;
          }
        }
        if (!improved) {
          if (cand_value > value) {
            v = std::move(cand);
            value = cand_value;
          }
          break;
        }
      }
      v = std::move(cand);
      value = cand_value;
    }
    if (value > best.value) {
      best.value = value;
      best.v = v;
    }
  }
  best.certified = false;
  return best;
}

InnerMax brute_argmax(const LossHandle& loss, const Dataset& data, const DenseVector& w,
                      double r, int grid) {
  if (loss.dim > 3) throw std::invalid_argument("brute_argmax: dimension too large (dim <= 3)");
  if (grid < 1000) throw std::invalid_argument("brute_argmax: grid must be >= 1000");
  const int d = loss.dim;

  std::vector<DenseVector> dirs;
  if (d == 1) {
    DenseVector e(1);
    e[0] = 1.0;
    dirs.push_back(e);
    dirs.push_back(-e);
  } else if (d == 2) {
    dirs.reserve(static_cast<std::size_t>(grid));
    for (int k = 0; k < grid; ++k) {
      const double ang = 2.0 * M_PI * static_cast<double>(k) / static_cast<double>(grid);
      DenseVector e(2);
      e << std::cos(ang), std::sin(ang);
      dirs.push_back(std::move(e));
    }
  } else {
    // Fibonacci sphere plus the coordinate axes.
    dirs.reserve(static_cast<std::size_t>(grid) + 6);
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < grid; ++k) {
      const double y = 1.0 - 2.0 * (static_cast<double>(k) + 0.5) / static_cast<double>(grid);
      const double rad = std::sqrt(std::max(0.0, 1.0 - y * y));
      const double ang = golden * static_cast<double>(k);
      DenseVector e(3);
      e << std::cos(ang) * rad, y, std::sin(ang) * rad;
      dirs.push_back(std::move(e));
    }
    for (int j = 0; j < 3; ++j) {
      DenseVector e = DenseVector::Zero(3);
      e[j] = 1.0;
      dirs.push_back(e);
      dirs.push_back(-e);
    }
  }

  InnerMax best;
  best.v = DenseVector::Zero(d);
  best.value = eval_empirical(loss, w, data);
  const double radii[4] = {0.25 * r, 0.5 * r, 0.75 * r, r};
  for (const DenseVector& dir : dirs) {
    for (double radius : radii) {
      const DenseVector v = radius * dir;
      const double value = eval_empirical(loss, w + v, data);
      if (value > best.value) {
        best.value = value;
        best.v = v;
      }
    }
  }
  best.certified = false;
  return best;
}

InnerMax inner_max(const LossHandle& loss, const Dataset& data, const DenseVector& w, double r,
                   TiePolicy& policy, const AscentOptions& opts, RngStream rng) {
  if (policy.mode != TieMode::AscentFromRandom) {
    try {
      return exact_argmax(loss, data, w, r, policy);
    } catch (const NoClosedFormError&) {
      if (policy.mode == TieMode::AdversarialFreshCoordinate) throw;
    }
  }
  return ascent_argmax(loss, data, w, r, opts.iters, opts.step, opts.restarts, rng);
}

double saer_value(const LossHandle& loss, const Dataset& data, const DenseVector& w, double r) {
  if (r < 0.0) throw std::invalid_argument("saer_value: negative radius");
  const double base = eval_empirical(loss, w, data);
  if (r == 0.0) return base;
  TiePolicy policy;  // benign tie-breaking
  AscentOptions opts;
  opts.iters = 200;
  opts.restarts = 24;
  // Fixed substream of the dataset seed: the value is a pure function of
  // (loss, data, w, r).
  const InnerMax res =
      inner_max(loss, data, w, r, policy, opts, RngStream(data.seed, 0x5AE2C0DEULL));
  return std::max(res.value, base);
}

}  // namespace samlab
