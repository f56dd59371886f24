#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "samlab/errors.hpp"
#include "samlab/perturbation.hpp"

using namespace samlab;

namespace {

Sample bits_sample(std::vector<int> values, Alphabet alphabet) {
  Sample z;
  z.alphabet = alphabet;
  for (int v : values) z.bits.push_back(static_cast<std::int8_t>(v));
  return z;
}

Dataset dataset_of(std::vector<Sample> samples, int m, std::uint64_t seed = 5) {
  Dataset data;
  data.samples = std::move(samples);
  data.n = static_cast<int>(data.samples.size());
  data.m = m;
  data.alphabet = data.samples.front().alphabet;
  data.seed = seed;
  return data;
}

}  // namespace

TEST_CASE("exact_argmax on the scalar hinge") {
  const LossHandle d = make_loss(LossKind::ScalarHingeD, 1, 1, 0.25);
  const Dataset data = sample_dataset(d.alphabet(), 1, 3, RngStream(2));
  TiePolicy policy;
  const DenseVector origin = DenseVector::Zero(1);
  const InnerMax res = exact_argmax(d, data, origin, 0.3, policy);
  CHECK(res.v[0] == 0.3);
  CHECK(res.value == doctest::Approx(0.045).epsilon(1e-15));
  CHECK(res.certified);
}

TEST_CASE("exact_argmax on construction A at the spurious flat minimizer") {
  const LossHandle a = make_loss(LossKind::FlatSphereA, 2, 1, 0.25);
  // Column 1 is all-zero; every sample is active elsewhere.
  const Dataset data = dataset_of({bits_sample({1, 0, 1, 0}, Alphabet::ZeroOne),
                                   bits_sample({0, 0, 1, 1}, Alphabet::ZeroOne)},
                                  4);
  DenseVector w_flat = DenseVector::Zero(a.dim);
  w_flat[1] = 1.0;
  for (double r : {0.1, 0.25}) {
    TiePolicy policy;
    const InnerMax res = exact_argmax(a, data, w_flat, r, policy);
    CHECK(res.certified);
    CHECK(res.value <= 0.5 * std::pow(std::max(r - a.rho, 0.0), 2) + 1e-15);
  }
  // Beyond the flatness radius the gain is exactly (r - rho)^2 / 2.
  TiePolicy policy;
  const InnerMax res = exact_argmax(a, data, w_flat, 0.5, policy);
  CHECK(res.value == doctest::Approx(0.5 * 0.25 * 0.25).epsilon(1e-12));
}

TEST_CASE("exact_argmax adversarial mode picks fresh good-block coordinates") {
  const LossHandle b = make_loss(LossKind::BlockHingeB, 2, 4, 0.0, 0.25, 1.0);
  // Column 2 is all-plus.
  const Dataset data = dataset_of({bits_sample({-1, 1, 1, -1}, Alphabet::PlusMinus),
                                   bits_sample({1, -1, 1, -1}, Alphabet::PlusMinus)},
                                  4);
  const DenseVector origin = DenseVector::Zero(b.dim);
  TiePolicy policy;
  policy.mode = TieMode::AdversarialFreshCoordinate;

  const InnerMax first = exact_argmax(b, data, origin, 1.0, policy);
  const int base = b.block_start(2);
  CHECK(first.v[base] == 1.0);
  CHECK(first.v.norm() == 1.0);
  CHECK(first.value == doctest::Approx(0.5).epsilon(1e-15));  // (r - rho)^2 / 2
  REQUIRE(policy.visited.size() == 1);
  CHECK(policy.visited[0] == base);

  // The next call must not reuse the visited coordinate.
  const InnerMax second = exact_argmax(b, data, origin, 1.0, policy);
  CHECK(second.v[base + 1] == 1.0);
  CHECK(policy.visited.size() == 2);

  // No all-plus column: the adversarial oracle reports the missing event.
  const Dataset bad = dataset_of({bits_sample({-1, 1, 1, -1}, Alphabet::PlusMinus),
                                  bits_sample({1, -1, -1, 1}, Alphabet::PlusMinus)},
                                 4);
  TiePolicy policy2;
  policy2.mode = TieMode::AdversarialFreshCoordinate;
  CHECK_THROWS_AS(exact_argmax(b, bad, origin, 1.0, policy2), NoGoodColumnError);

  // Adversarial mode is specific to construction B.
  const LossHandle a = make_loss(LossKind::FlatSphereA, 2, 1, 0.25);
  const Dataset data_a = dataset_of({bits_sample({1, 0, 1, 0}, Alphabet::ZeroOne)}, 4);
  TiePolicy policy3;
  policy3.mode = TieMode::AdversarialFreshCoordinate;
  CHECK_THROWS_AS(exact_argmax(a, data_a, DenseVector::Zero(a.dim), 0.5, policy3),
                  std::invalid_argument);
}

TEST_CASE("exact_argmax defers outside its certified region and for chain losses") {
  const LossHandle a = make_loss(LossKind::FlatSphereA, 2, 1, 0.25);
  const Dataset data = dataset_of({bits_sample({1, 1, 1, 1}, Alphabet::ZeroOne)}, 4);
  DenseVector w = DenseVector::Zero(a.dim);
  w[0] = 0.4;  // positive weight on an active column: certificate fails
  TiePolicy policy;
  CHECK_THROWS_AS(exact_argmax(a, data, w, 0.3, policy), NoClosedFormError);

  const LossHandle c = make_loss(LossKind::ChainAmplifierC, 2, 4, 0.0, 0.1, 0.5);
  const Dataset data_c = sample_dataset(c.alphabet(), c.sample_bits(), 3, RngStream(9));
  TiePolicy policy2;
  CHECK_THROWS_AS(exact_argmax(c, data_c, DenseVector::Zero(c.dim), 0.5, policy2),
                  NoClosedFormError);
}

TEST_CASE("ascent_argmax basics") {
  const LossHandle a = make_loss(LossKind::FlatSphereA, 2, 1, 0.25);
  const Dataset data = sample_dataset(a.alphabet(), a.sample_bits(), 4, RngStream(3));
  const DenseVector origin = DenseVector::Zero(a.dim);

  // Degenerate ball.
  const InnerMax zero = ascent_argmax(a, data, origin, 0.0, 50, 0.0, 5, RngStream(4));
  CHECK(zero.v.norm() == 0.0);

  // Never beats the certified maximum.
  TiePolicy policy;
  const InnerMax exact = exact_argmax(a, data, origin, 0.5, policy);
  const InnerMax ascent = ascent_argmax(a, data, origin, 0.5, 200, 0.0, 20, RngStream(5));
  CHECK(ascent.value <= exact.value + 1e-9);
  CHECK(ascent.v.norm() <= 0.5 + 1e-12);

  CHECK_THROWS_AS(ascent_argmax(a, data, origin, 0.5, 0, 0.0, 5, RngStream(6)),
                  std::invalid_argument);
}

TEST_CASE("brute_argmax reference values") {
  const LossHandle d = make_loss(LossKind::ScalarHingeD, 1, 1, 0.25);
  const Dataset data_d = sample_dataset(d.alphabet(), 1, 2, RngStream(7));
  const InnerMax res = brute_argmax(d, data_d, DenseVector::Zero(1), 0.3, 10000);
  CHECK(std::abs(res.value - 0.045) <= 1e-6);

  const LossHandle a = make_loss(LossKind::FlatSphereA, 1, 1, 0.25);
  const Dataset data_a = sample_dataset(a.alphabet(), a.sample_bits(), 4, RngStream(8));
  const InnerMax flat = brute_argmax(a, data_a, DenseVector::Zero(3), 0.2, 2000);
  CHECK(flat.value == 0.0);  // inside the flat ball

  const LossHandle big = make_loss(LossKind::FlatSphereA, 2, 1, 0.25);
  const Dataset data_big = sample_dataset(big.alphabet(), big.sample_bits(), 4, RngStream(8));
  CHECK_THROWS_AS(brute_argmax(big, data_big, DenseVector::Zero(big.dim), 0.2, 2000),
                  std::invalid_argument);
  CHECK_THROWS_AS(brute_argmax(a, data_a, DenseVector::Zero(3), 0.2, 10),
                  std::invalid_argument);
}

TEST_CASE("ascent reaches the brute-force value on dim 3") {
  const LossHandle a = make_loss(LossKind::FlatSphereA, 1, 1, 0.25);
  const Dataset data = sample_dataset(a.alphabet(), a.sample_bits(), 4, RngStream(13));
  RngStream rng(14);
  for (int trial = 0; trial < 20; ++trial) {
    const DenseVector w = random_in_ball(3, 1.0, rng);
    const double r = 0.1 + 0.4 * rng.next_double();
    const InnerMax brute = brute_argmax(a, data, w, r, 40000);
    const InnerMax ascent = ascent_argmax(a, data, w, r, 200, 0.0, 20, rng.fork(trial));
    CHECK(std::abs(ascent.value - brute.value) <= 1e-3);
  }
}

TEST_CASE("dispatched oracle agrees with brute force on dim <= 3") {
  const LossHandle a = make_loss(LossKind::FlatSphereA, 1, 1, 0.25);
  const Dataset data = sample_dataset(a.alphabet(), a.sample_bits(), 4, RngStream(15));
  RngStream rng(16);
  for (int trial = 0; trial < 50; ++trial) {
    const DenseVector w = random_in_ball(3, 1.0, rng);
    const double r = 0.05 + 0.45 * rng.next_double();
    const double via_saer = saer_value(a, data, w, r);
    const InnerMax brute = brute_argmax(a, data, w, r, 40000);
    CHECK(std::abs(via_saer - brute.value) <= 1e-3);
  }
}

TEST_CASE("saer_value closed-form anchors") {
  const LossHandle a = make_loss(LossKind::FlatSphereA, 4, 1, 0.25);
  const Dataset data = sample_dataset(a.alphabet(), a.sample_bits(), 8, RngStream(17));

  // r = 0 degenerates to the empirical risk.
  RngStream rng(18);
  const DenseVector w = random_in_ball(a.dim, 1.0, rng);
  CHECK(saer_value(a, data, w, 0.0) == eval_empirical(a, w, data));

  // Sharp minimizer: the gap is exactly delta^2/2.
  DenseVector sharp = DenseVector::Zero(a.dim);
  sharp[a.dim - 1] = a.rho;
  for (double delta : {0.05, 0.1, 0.2}) {
    const double gap = saer_value(a, data, sharp, delta) - eval_empirical(a, sharp, data);
    CHECK(std::abs(gap - 0.5 * delta * delta) <= 1e-12);
  }

  // Scalar hinge at the origin: r^2/2.
  const LossHandle d = make_loss(LossKind::ScalarHingeD, 1, 1, 0.25);
  const Dataset data_d = sample_dataset(d.alphabet(), 1, 2, RngStream(19));
  for (double r : {0.1, 0.25, 0.5}) {
    CHECK(std::abs(saer_value(d, data_d, DenseVector::Zero(1), r) - 0.5 * r * r) <= 1e-15);
  }
}

TEST_CASE("saer dominance and monotonicity in r") {
  const LossHandle a = make_loss(LossKind::FlatSphereA, 2, 1, 0.25);
  const Dataset data = sample_dataset(a.alphabet(), a.sample_bits(), 4, RngStream(23));
  RngStream rng(24);
  for (int trial = 0; trial < 10; ++trial) {
    const DenseVector w = random_in_ball(a.dim, 0.8, rng);
    const double base = eval_empirical(a, w, data);
    double prev = base;
    for (double r : {0.05, 0.1, 0.2, 0.3, 0.5}) {
      const double value = saer_value(a, data, w, r);
      CHECK(value >= base);          // the max includes v = 0
      CHECK(value >= prev - 1e-10);  // ball nesting
      prev = value;
    }
  }
}

TEST_CASE("saer smooth upper envelope at zero-loss minimizers") {
  const LossHandle a = make_loss(LossKind::FlatSphereA, 2, 1, 0.25);
  const Dataset data = dataset_of({bits_sample({1, 0, 1, 0}, Alphabet::ZeroOne),
                                   bits_sample({0, 0, 1, 1}, Alphabet::ZeroOne)},
                                  4);
  std::vector<DenseVector> minimizers;
  minimizers.push_back(DenseVector::Zero(a.dim));  // flat center
  DenseVector spurious = DenseVector::Zero(a.dim);
  spurious[1] = 1.0;  // all-zero column
  minimizers.push_back(spurious);
  DenseVector sharp = DenseVector::Zero(a.dim);
  sharp[a.dim - 1] = a.rho;
  minimizers.push_back(sharp);

  for (const DenseVector& w0 : minimizers) {
    REQUIRE(eval_empirical(a, w0, data) == 0.0);
    for (double delta : {0.1, 0.3, 0.6}) {
      CHECK(saer_value(a, data, w0, delta) <= 0.5 * a.beta * delta * delta + 1e-9);
    }
  }
}
