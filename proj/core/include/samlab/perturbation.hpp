#pragma once

#include <vector>

#include "samlab/dataset.hpp"
#include "samlab/losses.hpp"
#include "samlab/types.hpp"

namespace samlab {

/// Tie-breaking among inner maximizers of the sharpness-aware empirical risk.
/// The argmax over the radius-r ball is generally non-unique; which maximizer
/// an implementation returns decides whether the lower-bound dynamics fire,
/// so selection is an explicit policy rather than an accident.
enum class TieMode {
  AdversarialFreshCoordinate,  // the lower-bound oracle: a fresh coordinate of the good block
  LastCoordinate,              // the benign choice: the always-active last coordinate
  AscentFromRandom,            // whatever maximizer multi-start ascent lands on
};

const char* to_string(TieMode mode);

struct TiePolicy {
  TieMode mode = TieMode::LastCoordinate;
  std::vector<int> visited;  // raw coordinate indices already claimed (adversarial mode)
};

struct InnerMax {
  DenseVector v;
  double value = 0.0;     // F_S(w + v)
  bool certified = false; // provably the global maximum over the ball
};

/// Closed-form inner maximizer for kinds with one (A, B, D), tie broken per
/// policy. The closed forms are certificate-gated: they are returned only at
/// points where the bounding argument proves global optimality, and throw
/// NoClosedFormError otherwise so callers can fall back to ascent_argmax.
/// Adversarial mode requires the good column to exist (NoGoodColumnError).
InnerMax exact_argmax(const LossHandle& loss, const Dataset& data, const DenseVector& w,
                      double r, TiePolicy& policy);

/// Projected gradient ascent with backtracking plus boundary (conditional
/// gradient) moves on v -> F_S(w+v) over the r-ball, from deterministic
/// structural candidates and `restarts` random starts. The returned value is
/// a certified lower bound on the SAER. step <= 0 selects the default
/// r / (10 beta max(1, n)).
InnerMax ascent_argmax(const LossHandle& loss, const Dataset& data, const DenseVector& w,
                       double r, int iters, double step, int restarts, RngStream rng);

/// Exhaustive reference oracle for dim <= 3: quasi-uniform directions times
/// radii {r/4, r/2, 3r/4, r}.
InnerMax brute_argmax(const LossHandle& loss, const Dataset& data, const DenseVector& w,
                      double r, int grid);

struct AscentOptions {
  int iters = 200;
  double step = 0.0;  // <= 0: default schedule
  int restarts = 20;
};

/// Policy-dispatched inner maximization: exact closed form where certified,
/// ascent fallback otherwise. Adversarial mode never degrades silently.
InnerMax inner_max(const LossHandle& loss, const Dataset& data, const DenseVector& w, double r,
                   TiePolicy& policy, const AscentOptions& opts, RngStream rng);

/// F_S^r(w) via the best available oracle. Always >= F_S(w); deterministic in
/// (loss, data, w, r) -- the ascent fallback derives its stream from the
/// dataset seed.
double saer_value(const LossHandle& loss, const Dataset& data, const DenseVector& w, double r);

}  // namespace samlab
