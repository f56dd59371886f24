#include "samlab/stability.hpp"

#include <stdexcept>

namespace samlab {

double stability_generalization_bound(double empirical_risk, double beta, double eps) {
  if (eps < 0.0) throw std::invalid_argument("stability_generalization_bound: eps must be >= 0");
  if (beta <= 0.0) throw std::invalid_argument("stability_generalization_bound: beta must be > 0");
  return 4.0 * empirical_risk + 3.0 * beta * eps;
}

double stability_bound_rhs(double eta, double beta, double r, double rho, int steps_T, int n) {
  const double t = static_cast<double>(steps_T);
  const double nn = static_cast<double>(n) * static_cast<double>(n);
  const double gap = std::max(r - rho, 0.0);
  return 24.0 * eta * beta * r * r * t + 96.0 * beta * eta * t / nn +
         768.0 * beta * beta * eta * eta * t * t * gap * gap / nn;
}

StabilityReport stability_estimate(const LossHandle& loss, const Dataset& data,
                                   const OptimizerConfig& cfg) {
  OptimizerConfig run_cfg = cfg;
  if (cfg.algo == Algo::SGD && run_cfg.sgd_indices.empty()) {
    // Pin one index sequence across S and every S^(i).
    RngStream rng = cfg.rng;
    run_cfg.sgd_indices.reserve(static_cast<std::size_t>(cfg.steps_T));
    for (int t = 0; t < cfg.steps_T; ++t) run_cfg.sgd_indices.push_back(rng.next_index(data.n));
  }

  StabilityReport report;
  const Trajectory base = run_optimizer(loss, data, run_cfg);
  report.output = average_iterate(base);
  report.empirical_risk = eval_empirical(loss, report.output, data);

  const std::vector<Dataset> variants = loo_variants(data);
  report.distances_sq.reserve(variants.size());
  double sum = 0.0;
  for (const Dataset& variant : variants) {
    const Trajectory traj = run_optimizer(loss, variant, run_cfg);
    const double dist_sq = (report.output - average_iterate(traj)).squaredNorm();
    report.distances_sq.push_back(dist_sq);
    sum += dist_sq;
  }
  report.eps_hat = sum / static_cast<double>(variants.size());
  report.gen_bound = stability_generalization_bound(report.empirical_risk, loss.beta, report.eps_hat);
  report.bound_rhs =
      stability_bound_rhs(cfg.eta, loss.beta, cfg.radius_r, loss.rho, cfg.steps_T, data.n);
  return report;
}

}  // namespace samlab
