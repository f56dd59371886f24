#include "samlab/optimizers.hpp"

#include <cmath>
#include <stdexcept>

#include "samlab/errors.hpp"

namespace samlab {

namespace {

void check_config(const LossHandle& loss, const Dataset& data, const OptimizerConfig& cfg,
                  Algo expected) {
  if (cfg.algo != expected) throw std::invalid_argument("run: config built for another algorithm");
  if (cfg.eta <= 0.0) throw std::invalid_argument("run: eta must be positive");
  if (cfg.radius_r < 0.0) throw std::invalid_argument("run: radius must be non-negative");
  if (cfg.steps_T < 0) throw std::invalid_argument("run: steps_T must be non-negative");
  if (cfg.zero_grad_eps < 0.0) throw std::invalid_argument("run: zero_grad_eps must be non-negative");
  if (static_cast<int>(data.m) != loss.sample_bits()) {
    throw std::invalid_argument("run: dataset bit length does not match loss");
  }
  if (cfg.init.size() != 0 && cfg.init.size() != loss.dim) {
    throw std::invalid_argument("run: init dimension mismatch");
  }
}

DenseVector initial_point(const LossHandle& loss, const OptimizerConfig& cfg) {
  if (cfg.init.size() == 0) return DenseVector::Zero(loss.dim);
  return cfg.init;
}

/// Shared descent skeleton: the algorithms differ only in how v_t is chosen
/// and which gradient drives the step.
template <typename PerturbFn, typename GradFn>
Trajectory descend(const LossHandle& loss, const OptimizerConfig& cfg, PerturbFn&& perturb,
                   GradFn&& gradient) {
  Trajectory traj;
  DenseVector w = initial_point(loss, cfg);
  require_finite(w, "optimizer init");
  traj.iterates.push_back(w);
  for (int t = 0; t < cfg.steps_T; ++t) {
    DenseVector v = perturb(w, t);
    DenseVector point = w + v;
    DenseVector grad = gradient(point, t);
    DenseVector next = w - cfg.eta * grad;
    bool fired = false;
    if (cfg.project) {
      if (next.norm() > cfg.domain_radius) {
        next = project_ball(next, cfg.domain_radius);
        fired = true;
      }
    }
    require_finite(next, "optimizer step");
    traj.perturbations.push_back(std::move(v));
    traj.ascent_points.push_back(std::move(point));
    traj.projected.push_back(fired);
    traj.iterates.push_back(next);
    w = std::move(next);
  }
  return traj;
}

}  // namespace

const char* to_string(Algo algo) {
  switch (algo) {
    case Algo::SAGD: return "SAGD";
    case Algo::SAM: return "SAM";
    case Algo::GD: return "GD";
    case Algo::SGD: return "SGD";
  }
  return "?";
}

Trajectory run_sa_gd(const LossHandle& loss, const Dataset& data, const OptimizerConfig& cfg) {
  check_config(loss, data, cfg, Algo::SAGD);
  TiePolicy policy = cfg.tie_policy;
  auto perturb = [&](const DenseVector& w, int t) -> DenseVector {
    if (cfg.radius_r == 0.0) return DenseVector::Zero(loss.dim);
    // Per-step substream keeps the fallback deterministic and replayable.
    const InnerMax im = inner_max(loss, data, w, cfg.radius_r, policy, cfg.ascent,
                                  RngStream(data.seed, 0xA5CE27ULL + static_cast<std::uint64_t>(t)));
    return im.v;
  };
  auto gradient = [&](const DenseVector& point, int) { return grad_empirical(loss, point, data); };
  return descend(loss, cfg, perturb, gradient);
}

Trajectory run_sam(const LossHandle& loss, const Dataset& data, const OptimizerConfig& cfg) {
  check_config(loss, data, cfg, Algo::SAM);
  auto perturb = [&](const DenseVector& w, int) -> DenseVector {
    const DenseVector g = grad_empirical(loss, w, data);
    const double norm = g.norm();
    if (cfg.radius_r == 0.0 || norm <= cfg.zero_grad_eps) return DenseVector::Zero(loss.dim);
    return (cfg.radius_r / norm) * g;
  };
  auto gradient = [&](const DenseVector& point, int) { return grad_empirical(loss, point, data); };
  return descend(loss, cfg, perturb, gradient);
}

Trajectory run_gd(const LossHandle& loss, const Dataset& data, const OptimizerConfig& cfg) {
  check_config(loss, data, cfg, Algo::GD);
  auto perturb = [&](const DenseVector&, int) { return DenseVector::Zero(loss.dim); };
  auto gradient = [&](const DenseVector& point, int) { return grad_empirical(loss, point, data); };
  return descend(loss, cfg, perturb, gradient);
}

Trajectory run_sgd(const LossHandle& loss, const Dataset& data, const OptimizerConfig& cfg) {
  check_config(loss, data, cfg, Algo::SGD);
  if (!cfg.sgd_indices.empty() && static_cast<int>(cfg.sgd_indices.size()) < cfg.steps_T) {
    throw std::invalid_argument("run_sgd: pinned index sequence shorter than steps_T");
  }
  RngStream rng = cfg.rng;
  auto perturb = [&](const DenseVector&, int) { return DenseVector::Zero(loss.dim); };
  auto gradient = [&](const DenseVector& point, int t) {
    const int idx = cfg.sgd_indices.empty() ? rng.next_index(data.n)
                                            : cfg.sgd_indices[static_cast<std::size_t>(t)];
    if (idx < 0 || idx >= data.n) throw std::out_of_range("run_sgd: sample index out of range");
    // One-sample estimate keeps the empirical 1/n scaling.
    DenseVector g = grad_loss(loss, point, data.samples[static_cast<std::size_t>(idx)]);
    return g;
  };
  return descend(loss, cfg, perturb, gradient);
}

Trajectory run_optimizer(const LossHandle& loss, const Dataset& data, const OptimizerConfig& cfg) {
  switch (cfg.algo) {
    case Algo::SAGD: return run_sa_gd(loss, data, cfg);
    case Algo::SAM: return run_sam(loss, data, cfg);
    case Algo::GD: return run_gd(loss, data, cfg);
    case Algo::SGD: return run_sgd(loss, data, cfg);
  }
  throw std::invalid_argument("run_optimizer: unknown algorithm");
}

std::pair<DenseVector, DenseVector> sa_erm_pair(const LossHandle& loss, const Dataset& data) {
  if (loss.kind != LossKind::FlatSphereA) {
    throw std::invalid_argument("sa_erm_pair: defined for construction A only");
  }
  const auto good = find_good_column(data, 0);
  if (!good) throw NoGoodColumnError("sa_erm_pair: no all-zero column in the sample");
  DenseVector w_flat = DenseVector::Zero(loss.dim);
  w_flat[*good] = 1.0;
  DenseVector w_sharp = DenseVector::Zero(loss.dim);
  w_sharp[loss.dim - 1] = loss.rho;
  return {std::move(w_flat), std::move(w_sharp)};
}

DenseVector average_iterate(const Trajectory& traj) {
  if (traj.iterates.empty()) throw std::invalid_argument("average_iterate: empty trajectory");
  const int t_steps = traj.steps();
  const int count = std::max(1, t_steps);  // T = 0 degenerates to w1
  DenseVector sum = DenseVector::Zero(traj.iterates.front().size());
  for (int t = 0; t < count; ++t) sum += traj.iterates[static_cast<std::size_t>(t)];
  return sum / static_cast<double>(count);
}

DenseVector suffix_average(const Trajectory& traj, int tau) {
  const int t_steps = std::max(1, traj.steps());
  if (tau < 1 || tau > t_steps) throw std::out_of_range("suffix_average: tau out of range");
  DenseVector sum = DenseVector::Zero(traj.iterates.front().size());
  for (int t = tau - 1; t < t_steps; ++t) sum += traj.iterates[static_cast<std::size_t>(t)];
  return sum / static_cast<double>(t_steps - tau + 1);
}

}  // namespace samlab
