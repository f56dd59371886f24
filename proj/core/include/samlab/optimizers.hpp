#pragma once

#include <utility>
#include <vector>

#include "samlab/dataset.hpp"
#include "samlab/losses.hpp"
#include "samlab/perturbation.hpp"
#include "samlab/types.hpp"

namespace samlab {

enum class Algo { SAGD, SAM, GD, SGD };

const char* to_string(Algo algo);

struct OptimizerConfig {
  Algo algo = Algo::SAGD;
  double eta = 0.25;
  double radius_r = 0.0;
  int steps_T = 1;  // 0 is the degenerate constant run that outputs w1
  DenseVector init;  // empty vector starts at the origin
  double domain_radius = 1.0;
  bool project = true;
  TiePolicy tie_policy;
  double zero_grad_eps = 1e-15;  // SAM stands still below this gradient norm
  RngStream rng{0, 0};           // SGD sampling stream
  std::vector<int> sgd_indices;  // pinned sample sequence (stability runs); empty = draw from rng
  AscentOptions ascent{60, 0.0, 12};  // SA-GD fallback budget per step
};

/// Recorded run: iterates w_1..w_{T+1}, perturbations v_1..v_T, ascent points
/// w_t + v_t, and whether the projection fired at each step.
struct Trajectory {
  std::vector<DenseVector> iterates;
  std::vector<DenseVector> perturbations;
  std::vector<DenseVector> ascent_points;
  std::vector<bool> projected;

  int steps() const { return static_cast<int>(perturbations.size()); }
  bool any_projection() const {
    for (bool f : projected) {
      if (f) return true;
    }
    return false;
  }
};

/// Gradient descent on the SAER: w_{t+1} = Pi(w_t - eta grad F_S(w_t + v_t))
/// with v_t an inner maximizer chosen per the tie policy.
Trajectory run_sa_gd(const LossHandle& loss, const Dataset& data, const OptimizerConfig& cfg);

/// SAM: v_t = r grad F_S(w_t)/|grad F_S(w_t)| (zero when the gradient norm is
/// at most zero_grad_eps), then the same descent step.
Trajectory run_sam(const LossHandle& loss, const Dataset& data, const OptimizerConfig& cfg);

Trajectory run_gd(const LossHandle& loss, const Dataset& data, const OptimizerConfig& cfg);
Trajectory run_sgd(const LossHandle& loss, const Dataset& data, const OptimizerConfig& cfg);

Trajectory run_optimizer(const LossHandle& loss, const Dataset& data, const OptimizerConfig& cfg);

/// The closed-form empirical-minimizer pair of construction A: the flat
/// spurious minimizer e_I on the all-zero column, and the sharp minimizer
/// rho e_d. Requires the good column (target bit 0) to exist.
std::pair<DenseVector, DenseVector> sa_erm_pair(const LossHandle& loss, const Dataset& data);

/// Mean of w_1..w_T.
DenseVector average_iterate(const Trajectory& traj);

/// Mean of w_tau..w_T (tau is 1-based).
DenseVector suffix_average(const Trajectory& traj, int tau);

}  // namespace samlab
