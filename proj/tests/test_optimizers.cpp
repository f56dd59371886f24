#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "samlab/chain_schedule.hpp"
#include "samlab/errors.hpp"
#include "samlab/optimizers.hpp"

using namespace samlab;

namespace {

Dataset dataset_with_good_column(const LossHandle& loss, int n, int target, bool exactly_one,
                                 std::uint64_t start_seed) {
  for (std::uint64_t seed = start_seed; seed < start_seed + 500; ++seed) {
    Dataset data = sample_dataset(loss.alphabet(), loss.sample_bits(), n, RngStream(seed, 1));
    if (find_good_column(data, target, exactly_one)) return data;
  }
  throw std::runtime_error("no seed with the requested column event");
}

double regret_mean(const LossHandle& loss, const Dataset& data, const Trajectory& traj) {
  double sum = 0.0;
  for (const DenseVector& p : traj.ascent_points) sum += eval_empirical(loss, p, data);
  return sum / static_cast<double>(traj.steps());
}

}  // namespace

TEST_CASE("SA-GD on construction B follows the closed-form adversarial trajectory") {
  const double eta = 0.25;
  const int t_steps = 4;
  const double r = 1.0 / (eta * std::sqrt(static_cast<double>(t_steps)));  // 2.0
  const LossHandle b = make_loss(LossKind::BlockHingeB, 2, t_steps, 0.0, eta, r);
  const Dataset data = dataset_with_good_column(b, 3, +1, false, 100);
  const int good = *find_good_column(data, +1);
  const int base = b.block_start(good);

  OptimizerConfig cfg;
  cfg.algo = Algo::SAGD;
  cfg.eta = eta;
  cfg.radius_r = r;
  cfg.steps_T = t_steps;
  cfg.tie_policy.mode = TieMode::AdversarialFreshCoordinate;
  const Trajectory traj = run_sa_gd(b, data, cfg);

  REQUIRE(traj.steps() == t_steps);
  CHECK_FALSE(traj.any_projection());
  for (int it = 0; it <= t_steps; ++it) {
    const DenseVector& w = traj.iterates[it];
    for (int j = 0; j < b.dim; ++j) {
      const int slot = j - base;
      const double expected = (slot >= 0 && slot < it) ? -eta * r : 0.0;
      CHECK(w[j] == expected);
    }
  }
  // Perturbations walk the fresh coordinates in order at full radius.
  for (int t = 0; t < t_steps; ++t) {
    CHECK(traj.perturbations[t][base + t] == r);
    CHECK(traj.perturbations[t].norm() == r);
  }
}

TEST_CASE("SA-GD with r = 0 runs bitwise like GD") {
  const LossHandle a = make_loss(LossKind::FlatSphereA, 3, 1, 0.1);
  const Dataset data = sample_dataset(a.alphabet(), a.sample_bits(), 4, RngStream(7, 1));
  OptimizerConfig cfg;
  cfg.eta = 0.2;
  cfg.radius_r = 0.0;
  cfg.steps_T = 12;
  RngStream rng(8);
  cfg.init = random_in_ball(a.dim, 1.0, rng);

  cfg.algo = Algo::SAGD;
  const Trajectory sagd = run_sa_gd(a, data, cfg);
  cfg.algo = Algo::GD;
  const Trajectory gd = run_gd(a, data, cfg);
  REQUIRE(sagd.iterates.size() == gd.iterates.size());
  for (std::size_t t = 0; t < gd.iterates.size(); ++t) {
    CHECK(bitwise_equal(sagd.iterates[t], gd.iterates[t]));
  }
}

TEST_CASE("SAM stands still at the sharp origin of construction D") {
  const LossHandle d = make_loss(LossKind::ScalarHingeD, 1, 1, 0.25);
  const Dataset data = sample_dataset(d.alphabet(), 1, 3, RngStream(9, 1));
  OptimizerConfig cfg;
  cfg.algo = Algo::SAM;
  cfg.eta = 0.7;
  cfg.radius_r = 0.25;
  cfg.steps_T = 100;
  const Trajectory traj = run_sam(d, data, cfg);
  for (const DenseVector& w : traj.iterates) CHECK(w[0] == 0.0);
  for (const DenseVector& v : traj.perturbations) CHECK(v[0] == 0.0);
}

TEST_CASE("SAM on the chain construction satisfies the per-step lemma conditions") {
  const double eta = 0.1;
  const int t_steps = 6;
  const double r = 1.0 / (2.0 * eta * std::sqrt(static_cast<double>(t_steps)));
  const LossHandle proto = make_loss(LossKind::ChainAmplifierC, 4, t_steps, 0.0, eta, r);
  const Dataset data = dataset_with_good_column(proto, 6, 0, true, 400);

  const ChainSchedule schedule = solve_chain_schedule(proto, data, eta, r, 0.0);
  CHECK(schedule.loss.chain.schedule_solved);
  CHECK(schedule.sigma > 0.0);
  for (double delta : schedule.loss.chain.deltas) {
    CHECK(delta > 0.0);
    CHECK(delta <= 1.0);
  }

  OptimizerConfig cfg;
  cfg.algo = Algo::SAM;
  cfg.eta = eta;
  cfg.radius_r = r;
  cfg.steps_T = t_steps;
  cfg.zero_grad_eps = 0.0;
  const Trajectory traj = run_sam(schedule.loss, data, cfg);
  CHECK_FALSE(traj.any_projection());

  const FirstUpdateCheck first =
      check_first_update(schedule.loss, data, traj.iterates[1], schedule.good_col);
  CHECK(first.selector_dead);
  CHECK(first.offblock_head_range);
  CHECK(first.offblock_tail_zero);
  CHECK(first.good_tail_zero);
  CHECK(first.good_head_range);
  CHECK(first.good_second_negative);

  for (int t = 3; t <= t_steps; ++t) {
    const ChainStepCheck step = check_chain_step(schedule.loss, traj.iterates[t - 1], t,
                                                 schedule.good_col, schedule.sigma, eta, r);
    CHECK(step.second_range);
    CHECK(step.link_signs);
    CHECK(step.newest_range);
    CHECK(step.prev_range);
  }

  // The frozen chain coordinates stay inside the prescribed band.
  const DenseVector& w_final = traj.iterates[t_steps];
  const int base = schedule.loss.block_start(schedule.good_col);
  for (int b = 2; b < t_steps; ++b) {
    CHECK(w_final[base + b] <= -0.5 * eta * r);
    CHECK(w_final[base + b] >= -2.0 * eta * r);
  }
}

TEST_CASE("chain schedule search demands the exactly-one column event") {
  const LossHandle proto = make_loss(LossKind::ChainAmplifierC, 2, 4, 0.0, 0.1, 0.5);
  // All-ones sample: no all-zero column at all.
  Dataset data;
  data.n = 1;
  data.m = proto.sample_bits();
  data.alphabet = Alphabet::ZeroOne;
  data.seed = 1;
  Sample s;
  s.alphabet = Alphabet::ZeroOne;
  s.bits.assign(static_cast<std::size_t>(data.m), 1);
  data.samples.push_back(s);
  CHECK_THROWS_AS(solve_chain_schedule(proto, data, 0.1, 0.5), NoGoodColumnError);
}

TEST_CASE("GD closed-form step on the quadratic baseline") {
  const LossHandle q = make_loss(LossKind::QuadraticBaseline, 2, 1, 0.0);
  const Dataset data = sample_dataset(q.alphabet(), q.sample_bits(), 1, RngStream(11, 1));
  DenseVector z_tilde(q.dim);
  for (int j = 0; j < q.dim; ++j) z_tilde[j] = static_cast<double>(data.samples[0].bits[j]);

  OptimizerConfig cfg;
  cfg.algo = Algo::GD;
  cfg.eta = 0.5;
  cfg.steps_T = 1;
  cfg.project = false;
  RngStream rng(12);
  cfg.init = random_in_ball(q.dim, 1.0, rng);
  const Trajectory traj = run_gd(q, data, cfg);
  const DenseVector expected = cfg.init - 0.5 * (cfg.init - z_tilde);
  CHECK((traj.iterates[1] - expected).norm() <= 1e-15);
}

TEST_CASE("GD stays at the flat center") {
  const LossHandle a = make_loss(LossKind::FlatSphereA, 3, 1, 0.2);
  const Dataset data = sample_dataset(a.alphabet(), a.sample_bits(), 5, RngStream(13, 1));
  OptimizerConfig cfg;
  cfg.algo = Algo::GD;
  cfg.eta = 0.25;
  cfg.steps_T = 8;
  cfg.init = flat_center(a);
  const Trajectory traj = run_gd(a, data, cfg);
  for (const DenseVector& w : traj.iterates) CHECK(w.norm() == 0.0);
}

TEST_CASE("SGD with one sample equals GD bitwise") {
  const LossHandle a = make_loss(LossKind::FlatSphereA, 3, 1, 0.1);
  const Dataset data = sample_dataset(a.alphabet(), a.sample_bits(), 1, RngStream(14, 1));
  OptimizerConfig cfg;
  cfg.eta = 0.3;
  cfg.steps_T = 10;
  RngStream rng(15);
  cfg.init = random_in_ball(a.dim, 1.0, rng);
  cfg.rng = RngStream(16);

  cfg.algo = Algo::SGD;
  const Trajectory sgd = run_sgd(a, data, cfg);
  cfg.algo = Algo::GD;
  const Trajectory gd = run_gd(a, data, cfg);
  for (std::size_t t = 0; t < gd.iterates.size(); ++t) {
    CHECK(bitwise_equal(sgd.iterates[t], gd.iterates[t]));
  }
}

TEST_CASE("sa_erm_pair produces the flat/sharp empirical minimizers") {
  const LossHandle a = make_loss(LossKind::FlatSphereA, 4, 1, 0.25);
  const Dataset data = dataset_with_good_column(a, 4, 0, false, 200);
  const auto [w_flat, w_sharp] = sa_erm_pair(a, data);

  CHECK(eval_empirical(a, w_flat, data) == 0.0);
  CHECK(eval_empirical(a, w_sharp, data) == 0.0);
  CHECK(w_sharp[a.dim - 1] == a.rho);

  for (double r : {a.rho / 2.0, a.rho, 2.0 * a.rho}) {
    const double bound = 0.5 * std::pow(std::max(r - a.rho, 0.0), 2);
    CHECK(saer_value(a, data, w_flat, r) <= bound + 1e-12);
  }
  const double gap = saer_value(a, data, w_sharp, 0.1) - eval_empirical(a, w_sharp, data);
  CHECK(std::abs(gap - 0.005) <= 1e-12);

  // Missing event reported.
  Dataset ones;
  ones.n = 1;
  ones.m = a.sample_bits();
  ones.alphabet = Alphabet::ZeroOne;
  ones.seed = 1;
  Sample s;
  s.alphabet = Alphabet::ZeroOne;
  s.bits.assign(static_cast<std::size_t>(ones.m), 1);
  ones.samples.push_back(s);
  CHECK_THROWS_AS(sa_erm_pair(a, ones), NoGoodColumnError);
}

TEST_CASE("average and suffix averages") {
  Trajectory traj;
  RngStream rng(17);
  const int t_steps = 6;
  for (int t = 0; t <= t_steps; ++t) traj.iterates.push_back(random_in_ball(4, 1.0, rng));
  traj.perturbations.resize(t_steps, DenseVector::Zero(4));
  traj.ascent_points.resize(t_steps, DenseVector::Zero(4));
  traj.projected.resize(t_steps, false);

  // Direct-summation oracle over w_1..w_T.
  DenseVector direct = DenseVector::Zero(4);
  for (int t = 0; t < t_steps; ++t) direct += traj.iterates[t];
  direct /= t_steps;
  CHECK((average_iterate(traj) - direct).norm() <= 1e-12);

  CHECK(bitwise_equal(suffix_average(traj, t_steps), traj.iterates[t_steps - 1]));
  CHECK_THROWS_AS(suffix_average(traj, 0), std::out_of_range);
  CHECK_THROWS_AS(suffix_average(traj, t_steps + 1), std::out_of_range);

  for (int tau = 1; tau <= t_steps; ++tau) {
    DenseVector expect = DenseVector::Zero(4);
    for (int t = tau - 1; t < t_steps; ++t) expect += traj.iterates[t];
    expect /= static_cast<double>(t_steps - tau + 1);
    CHECK((suffix_average(traj, tau) - expect).norm() <= 1e-12);
  }

  // Constant trajectory averages to the constant.
  Trajectory constant;
  DenseVector w0(2);
  w0 << 0.3, -0.4;
  for (int t = 0; t < 4; ++t) constant.iterates.push_back(w0);
  constant.perturbations.resize(3, DenseVector::Zero(2));
  CHECK((average_iterate(constant) - w0).norm() <= 1e-15);
}

TEST_CASE("regret certificate holds on recorded trajectories") {
  const LossHandle a = make_loss(LossKind::FlatSphereA, 4, 1, 0.25);
  const Dataset data = sample_dataset(a.alphabet(), a.sample_bits(), 8, RngStream(21, 1));
  const int t_steps = 64;
  const double r = a.rho + 1.0 / std::sqrt(static_cast<double>(t_steps));

  OptimizerConfig cfg;
  cfg.eta = 0.25;
  cfg.radius_r = r;
  cfg.steps_T = t_steps;
  cfg.init = DenseVector::Zero(a.dim);
  cfg.init[a.dim - 1] = 1.0;  // |w1 - w*| = 1

  const double bound = 1.0 / (cfg.eta * t_steps) +
                       4.0 * a.beta * std::pow(std::max(r - a.rho, 0.0), 2) + 1e-9;

  cfg.algo = Algo::SAGD;
  const Trajectory sagd = run_sa_gd(a, data, cfg);
  CHECK(regret_mean(a, data, sagd) <= bound);

  cfg.algo = Algo::SAM;
  const Trajectory sam = run_sam(a, data, cfg);
  CHECK(regret_mean(a, data, sam) <= bound);
}

TEST_CASE("runs replay bitwise and satisfy the recorded-step identity") {
  const LossHandle a = make_loss(LossKind::FlatSphereA, 3, 1, 0.1);
  const Dataset data = sample_dataset(a.alphabet(), a.sample_bits(), 5, RngStream(23, 1));
  OptimizerConfig cfg;
  cfg.algo = Algo::SAGD;
  cfg.eta = 0.25;
  cfg.radius_r = 0.3;
  cfg.steps_T = 10;
  RngStream rng(24);
  cfg.init = random_in_ball(a.dim, 0.9, rng);

  const Trajectory first = run_sa_gd(a, data, cfg);
  const Trajectory second = run_sa_gd(a, data, cfg);
  REQUIRE(first.iterates.size() == second.iterates.size());
  for (std::size_t t = 0; t < first.iterates.size(); ++t) {
    CHECK(bitwise_equal(first.iterates[t], second.iterates[t]));
  }

  // Replayability: each recorded step reproduces from its pieces.
  for (int t = 0; t < first.steps(); ++t) {
    const DenseVector grad = grad_empirical(a, first.ascent_points[t], data);
    const DenseVector next = project_ball(first.iterates[t] - cfg.eta * grad, cfg.domain_radius);
    CHECK((next - first.iterates[t + 1]).norm() <= 1e-12);
  }

  // SGD with an identical stream replays too.
  cfg.algo = Algo::SGD;
  cfg.rng = RngStream(77);
  const Trajectory s1 = run_sgd(a, data, cfg);
  const Trajectory s2 = run_sgd(a, data, cfg);
  for (std::size_t t = 0; t < s1.iterates.size(); ++t) {
    CHECK(bitwise_equal(s1.iterates[t], s2.iterates[t]));
  }
}

TEST_CASE("projection flags fire only when the step leaves the domain") {
  const LossHandle q = make_loss(LossKind::QuadraticBaseline, 2, 1, 0.0);
  Dataset data;
  data.n = 1;
  data.m = q.dim;
  data.alphabet = Alphabet::ZeroOne;
  data.seed = 1;
  Sample s;
  s.alphabet = Alphabet::ZeroOne;
  s.bits.assign(static_cast<std::size_t>(q.dim), 1);  // target at the all-ones corner, norm 2
  data.samples.push_back(s);

  OptimizerConfig cfg;
  cfg.algo = Algo::GD;
  cfg.eta = 1.0;
  cfg.steps_T = 1;
  const Trajectory traj = run_gd(q, data, cfg);
  CHECK(traj.projected[0]);
  CHECK(traj.iterates[1].norm() <= 1.0 + 1e-12);

  cfg.eta = 0.1;
  const Trajectory small = run_gd(q, data, cfg);
  CHECK_FALSE(small.projected[0]);
}

TEST_CASE("degenerate constant run outputs w1") {
  const LossHandle a = make_loss(LossKind::FlatSphereA, 2, 1, 0.1);
  const Dataset data = sample_dataset(a.alphabet(), a.sample_bits(), 2, RngStream(31, 1));
  OptimizerConfig cfg;
  cfg.algo = Algo::GD;
  cfg.steps_T = 0;
  RngStream rng(32);
  cfg.init = random_in_ball(a.dim, 1.0, rng);
  const Trajectory traj = run_gd(a, data, cfg);
  CHECK(traj.iterates.size() == 1);
  CHECK(bitwise_equal(average_iterate(traj), cfg.init));
}
