#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "samlab/errors.hpp"
#include "samlab/optimizers.hpp"
#include "samlab/risk.hpp"

using namespace samlab;

TEST_CASE("population_risk_exact closed-form anchors on construction A") {
  const LossHandle a = make_loss(LossKind::FlatSphereA, 4, 1, 0.1);

  // e_I: two equiprobable cases, z(I) in {0, 1}.
  DenseVector w = DenseVector::Zero(a.dim);
  w[3] = 1.0;
  const RiskEstimate est = population_risk_exact(a, w);
  CHECK(est.value == doctest::Approx(0.5 * 0.5 * 0.9 * 0.9).epsilon(1e-15));  // 0.2025
  CHECK(est.std_error == 0.0);
  CHECK(est.method == RiskEstimate::Method::Exact);

  // The sharp minimizer rho e_d generalizes perfectly.
  DenseVector sharp = DenseVector::Zero(a.dim);
  sharp[a.dim - 1] = a.rho;
  CHECK(population_risk_exact(a, sharp).value == 0.0);

  // Too many coupled coordinates refuse to enumerate.
  CHECK_THROWS_AS(population_risk_exact(make_loss(LossKind::FlatSphereA, 5, 1, 0.1),
                                        DenseVector::Constant(33, 0.01)),
                  TooManyActiveBlocksError);

  // The chain construction has no exact evaluator.
  const LossHandle c = make_loss(LossKind::ChainAmplifierC, 2, 4, 0.0, 0.1, 0.5);
  CHECK_THROWS_AS(population_risk_exact(c, DenseVector::Zero(c.dim)), UnsupportedKindError);
}

TEST_CASE("population_risk_exact matches hand enumeration on a B block") {
  const LossHandle b = make_loss(LossKind::BlockHingeB, 2, 4, 0.05, 1.0, 0.3);
  DenseVector w = DenseVector::Zero(b.dim);
  const int base = b.block_start(1);
  w[base + 0] = -0.2;
  w[base + 1] = 0.15;
  w[base + 2] = -0.05;

  // z(1) = +1 activates positives, z(1) = -1 the negatives; both at prob 1/2.
  auto hinge = [&](double g) { return g > b.rho ? 0.5 * (g - b.rho) * (g - b.rho) : 0.0; };
  const double plus = hinge(std::sqrt(0.15 * 0.15));
  const double minus = hinge(std::sqrt(0.2 * 0.2 + 0.05 * 0.05));
  const double expected = 0.5 * (plus + minus);
  CHECK(population_risk_exact(b, w).value == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("population Monte Carlo agrees with the exact evaluator") {
  const LossHandle a = make_loss(LossKind::FlatSphereA, 4, 1, 0.1);

  // Flat center: every term is exactly zero.
  const RiskEstimate at_center = population_risk_mc(a, flat_center(a), 1000, RngStream(1));
  CHECK(at_center.value == 0.0);
  CHECK(at_center.std_error == 0.0);

  // e_I with rho = 0: mean 1/4 (half the samples activate the unit column).
  const LossHandle a0 = make_loss(LossKind::FlatSphereA, 4, 1, 0.0);
  DenseVector e0 = DenseVector::Zero(a0.dim);
  e0[2] = 1.0;
  const RiskEstimate mc = population_risk_mc(a0, e0, 100000, RngStream(2));
  CHECK(std::abs(mc.value - 0.25) <= 3.0 * mc.std_error);

  // Random sparse points: Monte Carlo vs exact within 3 standard errors.
  RngStream rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    DenseVector w = DenseVector::Zero(a.dim);
    for (int k = 0; k < 5; ++k) {
      w[rng.next_index(a.dim)] = rng.next_double() - 0.3;
    }
    const RiskEstimate exact = population_risk_exact(a, w);
    const RiskEstimate sampled = population_risk_mc(a, w, 20000, rng.fork(trial));
    CHECK(std::abs(sampled.value - exact.value) <= 3.0 * sampled.std_error + 1e-12);
  }
}

TEST_CASE("excess risk anchors") {
  const LossHandle a = make_loss(LossKind::FlatSphereA, 4, 1, 0.25);
  CHECK(excess_risk(a, flat_center(a)) == 0.0);

  DenseVector spurious = DenseVector::Zero(a.dim);
  spurious[1] = 1.0;
  CHECK(excess_risk(a, spurious) >= 1.0 / 16.0);  // 1/4 (1 - rho)^2 at rho <= 1/2

  // Adversarial suffix average of a small B run clears eta^2 r^2 T / 32.
  const double eta = 0.25;
  const int t_steps = 4;
  const double r = 1.0 / (eta * std::sqrt(static_cast<double>(t_steps)));
  const LossHandle b = make_loss(LossKind::BlockHingeB, 2, t_steps, 0.0, eta, r);
  Dataset data;
  for (std::uint64_t seed = 500;; ++seed) {
    data = sample_dataset(b.alphabet(), b.sample_bits(), 3, RngStream(seed, 1));
    if (find_good_column(data, +1)) break;
  }
  OptimizerConfig cfg;
  cfg.algo = Algo::SAGD;
  cfg.eta = eta;
  cfg.radius_r = r;
  cfg.steps_T = t_steps;
  cfg.tie_policy.mode = TieMode::AdversarialFreshCoordinate;
  const Trajectory traj = run_sa_gd(b, data, cfg);
  const double bound = eta * eta * r * r * static_cast<double>(t_steps) / 32.0;
  for (int tau : {1, t_steps / 2}) {
    CHECK(excess_risk(b, suffix_average(traj, tau)) >= bound);
  }
}

TEST_CASE("sharpness profile of flat and sharp minimizers") {
  const LossHandle a = make_loss(LossKind::FlatSphereA, 4, 1, 0.25);
  const Dataset data = sample_dataset(a.alphabet(), a.sample_bits(), 8, RngStream(31, 1));

  // Flat center: no gap inside the flatness radius.
  const auto flat_profile =
      sharpness_profile(a, data, flat_center(a), {0.05, 0.1, 0.2, 0.25});
  for (const auto& [delta, gap] : flat_profile) CHECK(gap <= 1e-15);

  // Sharp minimizer: the gap is exactly delta^2/2, nondecreasing in delta.
  DenseVector sharp = DenseVector::Zero(a.dim);
  sharp[a.dim - 1] = a.rho;
  const auto sharp_profile = sharpness_profile(a, data, sharp, {0.05, 0.1, 0.2});
  double prev = -1.0;
  for (const auto& [delta, gap] : sharp_profile) {
    CHECK(std::abs(gap - 0.5 * delta * delta) <= 1e-12);
    CHECK(gap >= prev);
    prev = gap;
  }

  // The smooth upper envelope caps the profile at any zero-loss minimizer.
  for (const auto& [delta, gap] : sharp_profile) {
    CHECK(gap <= 0.5 * a.beta * delta * delta + 1e-9);
  }

  CHECK_THROWS_AS(sharpness_profile(a, data, sharp, {-0.1}), std::invalid_argument);
}

TEST_CASE("flatness radius probe brackets the true radius") {
  const LossHandle a = make_loss(LossKind::FlatSphereA, 3, 1, 0.25);
  const Dataset data = sample_dataset(a.alphabet(), a.sample_bits(), 6, RngStream(41, 1));

  const double rho_hat =
      flatness_radius_probe(a, data, flat_center(a), 20, RngStream(42));
  CHECK(rho_hat >= 0.2375);
  CHECK(rho_hat <= 0.25 + 1e-9);

  DenseVector sharp = DenseVector::Zero(a.dim);
  sharp[a.dim - 1] = a.rho;
  CHECK(flatness_radius_probe(a, data, sharp, 20, RngStream(43)) <= 1e-3);

  const LossHandle d = make_loss(LossKind::ScalarHingeD, 1, 1, 0.25);
  const Dataset data_d = sample_dataset(d.alphabet(), 1, 2, RngStream(44, 1));
  const double d_hat = flatness_radius_probe(d, data_d, flat_center(d), 20, RngStream(45));
  CHECK(d_hat >= 0.475);
  CHECK(d_hat <= 0.5 + 1e-9);

  // Not a minimizer: positive empirical risk rejected.
  DenseVector off = DenseVector::Zero(a.dim);
  off[a.dim - 1] = 0.9;
  CHECK_THROWS_AS(flatness_radius_probe(a, data, off, 20, RngStream(46)), NotAMinimizerError);
}
