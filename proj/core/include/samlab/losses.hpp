#pragma once

#include <vector>

#include "samlab/dataset.hpp"
#include "samlab/errors.hpp"
#include "samlab/types.hpp"

namespace samlab {

/// The loss constructions. A, B, C are the adversarial instances behind the
/// flat-vs-sharp, SA-GD, and SAM lower bounds; D is the scalar hinge on which
/// SAM stalls at a sharp minimum; the quadratic is a strictly convex sanity
/// baseline with no flat set.
enum class LossKind {
  FlatSphereA,
  BlockHingeB,
  ChainAmplifierC,
  ScalarHingeD,
  QuadraticBaseline,
};

const char* to_string(LossKind kind);

/// Parameters of the chain construction (kind C). lambda, gamma, delta1 are
/// solved jointly at construction time; deltas holds the per-link slopes
/// delta_2..delta_T (index j-2), defaulted to 1 until a schedule search pins
/// them against a concrete dataset.
struct ChainParams {
  double delta1 = 0.0;
  double lambda = 0.0;
  double gamma = 0.0;
  std::vector<double> deltas;
  double eta_hint = 0.0;
  double radius_hint = 0.0;
  bool schedule_solved = false;
};

/// A construction identifier with its parameters and certified constants.
struct LossHandle {
  LossKind kind = LossKind::FlatSphereA;
  int n_exp = 1;     // bit-vector length is 2^n_exp
  int t_blocks = 1;  // block length (kinds B and C)
  double rho = 0.0;
  int dim = 0;
  double beta = 1.0;
  double lipschitz = 1.0;
  ChainParams chain;

  Alphabet alphabet() const { return kind == LossKind::BlockHingeB ? Alphabet::PlusMinus : Alphabet::ZeroOne; }
  int sample_bits() const;
  /// Start of block i (kinds B and C lay out 2^n_exp blocks of length t_blocks).
  int block_start(int i) const { return i * t_blocks; }
  int num_blocks() const { return 1 << n_exp; }
};

/// Build a handle with certified constants and solved chain parameters.
/// eta_hint and radius_hint are the (eta, r) the caller intends to run with;
/// kinds B and C validate the theorem-level parameter constraints against
/// them.
LossHandle make_loss(LossKind kind, int n_exp, int t_blocks, double rho,
                     double eta_hint = 0.25, double radius_hint = 1.0);

/// Closed-form loss value; exactly zero on null samples and inside flat
/// regions.
double eval_loss(const LossHandle& loss, const DenseVector& w, const Sample& z);

/// Closed-form gradient; the zero vector on null samples and inside flat
/// regions.
DenseVector grad_loss(const LossHandle& loss, const DenseVector& w, const Sample& z);

/// Mean loss / mean gradient over the dataset (null samples contribute zero).
double eval_empirical(const LossHandle& loss, const DenseVector& w, const Dataset& data);
DenseVector grad_empirical(const LossHandle& loss, const DenseVector& w, const Dataset& data);

/// The known rho-flat center: origin for A/B, -(lambda/2) e_d for C, -1/2 for
/// D, origin for the baseline (which has no flat set).
DenseVector flat_center(const LossHandle& loss);

struct PropertyCheck {
  bool pass = true;
  double worst = 0.0;  // largest observed violation
};

/// Pass/fail record for the certified analytic properties, probed at random
/// points/pairs in the unit ball against the handle's constants.
struct PropertyReport {
  int probes = 0;
  PropertyCheck convexity;      // midpoint convexity, slack 1e-10
  PropertyCheck lipschitz;      // |grad| <= L + 1e-8
  PropertyCheck smoothness;     // |grad(x)-grad(y)| <= beta |x-y| + 1e-8
  PropertyCheck self_bounding;  // |grad|^2 <= 2 beta f + 1e-8
  PropertyCheck flatness;       // f == 0 (<= 1e-15) on the rho-ball at the center

  bool all_pass() const {
    return convexity.pass && lipschitz.pass && smoothness.pass && self_bounding.pass &&
           flatness.pass;
  }
};

PropertyReport verify_loss_properties(const LossHandle& loss, int probes, RngStream rng);

/// Residuals of the chain fixed-point identities (test hook; both should be
/// <= 1e-12 relative after make_loss).
struct ChainResiduals {
  double delta1_residual = 0.0;
  double gamma_residual = 0.0;
};
ChainResiduals chain_residuals(const LossHandle& loss);

/// Draw one non-null sample matching the loss's alphabet and bit length.
Sample random_sample(const LossHandle& loss, RngStream& rng);

/// The chain construction's selector product v_z . w (without the delta_1
/// shift). Kind C only.
double chain_selector_value(const LossHandle& loss, const DenseVector& w, const Sample& z);

/// True when every ReLU/hinge argument of f(., z) at w clears `margin`, so
/// central differences see a smooth piece.
bool kink_free(const LossHandle& loss, const DenseVector& w, const Sample& z,
               double margin = 1e-3);

/// Worst relative error |fd - grad| / (1 + |grad|) of central differences
/// (step 1e-6) against the closed-form gradient over `points` kink-free
/// probes in the unit ball.
double max_fd_gradient_error(const LossHandle& loss, int points, RngStream rng);

}  // namespace samlab
