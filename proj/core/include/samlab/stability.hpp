#pragma once

#include <vector>

#include "samlab/dataset.hpp"
#include "samlab/losses.hpp"
#include "samlab/optimizers.hpp"
#include "samlab/types.hpp"

namespace samlab {

/// Leave-one-out on-average model stability of one algorithm run: squared
/// output distances to the n null-replaced reruns, their mean eps_hat, and
/// the stability-to-generalization bound 4 F_S(w) + 3 beta eps_hat, next to
/// the closed-form rhs the stability lemma certifies.
struct StabilityReport {
  std::vector<double> distances_sq;
  double eps_hat = 0.0;
  double empirical_risk = 0.0;
  double gen_bound = 0.0;
  double bound_rhs = 0.0;
  DenseVector output;  // A(S): the averaged iterate of the base run
};

/// Runs cfg.algo on S and on each leave-one-out variant, comparing averaged
/// iterates. SGD runs pin one index sequence (drawn once from cfg.rng unless
/// cfg.sgd_indices is set) across all n+1 runs so the comparison isolates the
/// data change.
StabilityReport stability_estimate(const LossHandle& loss, const Dataset& data,
                                   const OptimizerConfig& cfg);

/// The stability-to-generalization reporting formula 4 R_emp + 3 beta eps.
double stability_generalization_bound(double empirical_risk, double beta, double eps);

/// Closed-form stability ceiling 24 eta beta r^2 T + 96 beta eta T / n^2
/// + 768 beta^2 eta^2 T^2 max(r - rho, 0)^2 / n^2.
double stability_bound_rhs(double eta, double beta, double r, double rho, int steps_T, int n);

}  // namespace samlab
