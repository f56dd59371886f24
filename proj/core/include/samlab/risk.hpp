#pragma once

#include <utility>
#include <vector>

#include "samlab/dataset.hpp"
#include "samlab/losses.hpp"
#include "samlab/types.hpp"

namespace samlab {

struct RiskEstimate {
  enum class Method { Exact, MonteCarlo };
  double value = 0.0;
  double std_error = 0.0;  // Exact estimates carry 0
  Method method = Method::Exact;
  long samples_used = 0;
};

/// Mean loss over m fresh uniform samples; deterministic in the stream.
/// The reduction uses pairwise summation, so it is order-stable.
RiskEstimate population_risk_mc(const LossHandle& loss, const DenseVector& w, long m,
                                RngStream rng);

/// Exact population risk by enumerating the sample bits coupled to the
/// support of w. Kinds A and B only (the chain construction couples every
/// bit through its selector); at most 20 coupled blocks.
RiskEstimate population_risk_exact(const LossHandle& loss, const DenseVector& w);

/// F(w) - F(flat center) = F(w) by realizability. Exact for kinds A, B, D;
/// Monte Carlo with a fixed internal substream otherwise.
double excess_risk(const LossHandle& loss, const DenseVector& w);

/// Per-delta sharpness gaps F_S^delta(w) - F_S(w).
std::vector<std::pair<double, double>> sharpness_profile(const LossHandle& loss,
                                                         const Dataset& data,
                                                         const DenseVector& w,
                                                         const std::vector<double>& deltas);

/// Certified-from-below estimate of the flatness radius at an empirical
/// minimizer: bisection of "F_S^c(w) stays zero" on c in [0, 1], with
/// `probes` ascent restarts behind each query. Requires F_S(w) <= 1e-12.
double flatness_radius_probe(const LossHandle& loss, const Dataset& data, const DenseVector& w,
                             int probes, RngStream rng);

}  // namespace samlab
