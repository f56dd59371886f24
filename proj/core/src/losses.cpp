#include "samlab/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace samlab {

namespace {

constexpr int kMaxDim = 2'000'000;  // dense storage stays viable at desk scale

double relu(double x) { return x > 0.0 ? x : 0.0; }

void check_eval_args(const LossHandle& loss, const DenseVector& w, const Sample& z) {
  if (w.size() != loss.dim) {
    throw std::invalid_argument("eval/grad: dimension mismatch between w and loss");
  }
  if (static_cast<int>(z.bits.size()) != loss.sample_bits()) {
    throw std::invalid_argument("eval/grad: sample bit length does not match loss");
  }
  if (!z.is_null && z.alphabet != loss.alphabet()) {
    throw std::invalid_argument("eval/grad: sample alphabet does not match loss");
  }
}

// Coefficient -1/(2(d-1)) of the chain selector on zero bits.
double chain_zero_weight(int dim) { return -1.0 / (2.0 * static_cast<double>(dim - 1)); }

double chain_selector_dot(const LossHandle& loss, const DenseVector& w, const Sample& z) {
  const int blocks = loss.num_blocks();
  const double zero_w = chain_zero_weight(loss.dim);
  double dot = w[loss.dim - 1];  // selector weight 1 on the last coordinate
  for (int i = 0; i < blocks; ++i) {
    const double wi = w[loss.block_start(i)];
    dot += (z.bits[static_cast<std::size_t>(i)] != 0) ? wi : zero_w * wi;
  }
  return dot;
}

double solve_chain_fixed_point(int dim, double eta, double r, ChainParams& chain) {
  const double d = static_cast<double>(dim);
  chain.lambda = r / (4.0 * d * (d - 1.0));
  chain.eta_hint = eta;
  chain.radius_hint = r;
  double delta1 = 0.0;
  double gamma = 0.0;
  for (int iter = 0; iter < 200; ++iter) {
    gamma = chain.lambda / (std::max(1.0, eta) * (r + delta1));
    const double next = eta * gamma * r / (2.0 * std::sqrt(d) - eta * gamma);
    const double change = std::abs(next - delta1);
    delta1 = next;
    if (change <= 1e-15 * std::max(delta1, 1e-300)) break;
  }
  chain.delta1 = delta1;
  chain.gamma = chain.lambda / (std::max(1.0, eta) * (r + delta1));
  return delta1;
}

}  // namespace

const char* to_string(LossKind kind) {
  switch (kind) {
    case LossKind::FlatSphereA: return "FlatSphere_A";
    case LossKind::BlockHingeB: return "BlockHinge_B";
    case LossKind::ChainAmplifierC: return "ChainAmplifier_C";
    case LossKind::ScalarHingeD: return "ScalarHinge_D";
    case LossKind::QuadraticBaseline: return "QuadraticBaseline";
  }
  return "?";
}

int LossHandle::sample_bits() const {
  switch (kind) {
    case LossKind::ScalarHingeD: return 1;
    case LossKind::QuadraticBaseline: return dim;
    default: return 1 << n_exp;
  }
}

LossHandle make_loss(LossKind kind, int n_exp, int t_blocks, double rho, double eta_hint,
                     double radius_hint) {
  LossHandle loss;
  loss.kind = kind;
  loss.n_exp = n_exp;
  loss.t_blocks = t_blocks;
  loss.rho = rho;

  if (rho < 0.0) throw std::invalid_argument("make_loss: rho must be non-negative");

  switch (kind) {
    case LossKind::FlatSphereA: {
      if (n_exp < 1 || n_exp > 20) throw std::invalid_argument("make_loss: n_exp out of range");
      if (rho > 0.5) throw std::invalid_argument("make_loss: construction A needs rho <= 1/2");
      loss.dim = (1 << n_exp) + 1;
      loss.beta = 1.0;
      loss.lipschitz = 1.0;
      break;
    }
    case LossKind::BlockHingeB: {
      if (n_exp < 1 || t_blocks < 1) throw std::invalid_argument("make_loss: bad B shape");
      const double sqrt_t = std::sqrt(static_cast<double>(t_blocks));
      if (eta_hint <= 0.0 || radius_hint <= 0.0) {
        throw std::invalid_argument("make_loss: construction B needs positive eta and r hints");
      }
      if (eta_hint * (radius_hint - rho) > 1.0 / sqrt_t + 1e-12) {
        throw std::invalid_argument("make_loss: construction B needs eta (r - rho) <= 1/sqrt(T)");
      }
      if (rho >= radius_hint * (1.0 - 3.0 / (3.0 + eta_hint * sqrt_t))) {
        throw std::invalid_argument(
            "make_loss: construction B needs rho < r (1 - 3/(3 + eta sqrt(T)))");
      }
      loss.dim = (1 << n_exp) * t_blocks + 1;
      loss.beta = 1.0;
      loss.lipschitz = 1.0;
      break;
    }
    case LossKind::ChainAmplifierC: {
      if (n_exp < 1 || t_blocks < 2) throw std::invalid_argument("make_loss: bad C shape");
      if (rho != 0.0) throw std::invalid_argument("make_loss: construction C requires rho = 0");
      if (eta_hint <= 0.0 || radius_hint <= 0.0) {
        throw std::invalid_argument("make_loss: construction C needs positive eta and r hints");
      }
      const double sqrt_t = std::sqrt(static_cast<double>(t_blocks));
      if (eta_hint * radius_hint > 1.0 / (2.0 * sqrt_t) + 1e-12) {
        throw std::invalid_argument("make_loss: construction C needs eta r <= 1/(2 sqrt(T))");
      }
      loss.dim = (1 << n_exp) * t_blocks + 1;
      loss.beta = 6.0;
      loss.lipschitz = 7.0;
      solve_chain_fixed_point(loss.dim, eta_hint, radius_hint, loss.chain);
      loss.chain.deltas.assign(static_cast<std::size_t>(t_blocks - 1), 1.0);
      break;
    }
    case LossKind::ScalarHingeD: {
      if (rho > 0.5) throw std::invalid_argument("make_loss: construction D needs rho <= 1/2");
      loss.dim = 1;
      loss.beta = 1.0;
      loss.lipschitz = 1.0;
      break;
    }
    case LossKind::QuadraticBaseline: {
      if (n_exp < 1 || n_exp > 20) throw std::invalid_argument("make_loss: n_exp out of range");
      loss.dim = 1 << n_exp;
      loss.beta = 1.0;
      loss.lipschitz = 1.0 + std::sqrt(static_cast<double>(loss.dim));
      break;
    }
  }
  if (loss.dim > kMaxDim) throw std::invalid_argument("make_loss: dimension above dense cap");
  return loss;
}

double eval_loss(const LossHandle& loss, const DenseVector& w, const Sample& z) {
  check_eval_args(loss, w, z);
  if (z.is_null) return 0.0;

  switch (loss.kind) {
    case LossKind::FlatSphereA: {
      const int d = loss.dim;
      double sum = 0.0;
      for (int j = 0; j + 1 < d; ++j) {
        if (z.bits[static_cast<std::size_t>(j)] != 0 && w[j] > 0.0) sum += w[j] * w[j];
      }
      if (w[d - 1] > 0.0) sum += w[d - 1] * w[d - 1];
      const double t = std::sqrt(sum) - loss.rho;
      return t > 0.0 ? 0.5 * t * t : 0.0;
    }
    case LossKind::BlockHingeB: {
      const int blocks = loss.num_blocks();
      const int tb = loss.t_blocks;
      double sum = 0.0;
      for (int i = 0; i < blocks; ++i) {
        const double zi = static_cast<double>(z.bits[static_cast<std::size_t>(i)]);
        const int base = loss.block_start(i);
        for (int b = 0; b < tb; ++b) {
          const double s = zi * w[base + b];
          if (s > 0.0) sum += s * s;
        }
      }
      sum += w[loss.dim - 1] * w[loss.dim - 1];
      const double t = std::sqrt(sum) - loss.rho;
      return t > 0.0 ? 0.5 * t * t : 0.0;
    }
    case LossKind::ChainAmplifierC: {
      const int blocks = loss.num_blocks();
      const int tb = loss.t_blocks;
      const ChainParams& cp = loss.chain;
      double quad = 0.0;   // f1
      double hinge = 0.0;  // f2
      for (int i = 0; i < blocks; ++i) {
        const int base = loss.block_start(i);
        const bool zi = z.bits[static_cast<std::size_t>(i)] != 0;
        for (int b = 1; b < tb; ++b) {
          const double wb = w[base + b];
          if (zi) quad += wb * wb;
          const double shift = (b == 1) ? cp.lambda : 0.0;
          const double arg = wb - cp.deltas[static_cast<std::size_t>(b - 1)] * (w[base + b - 1] + shift);
          if (arg > 0.0) hinge += arg * arg;
        }
      }
      const double sel = relu(chain_selector_dot(loss, w, z) + cp.delta1);
      return 0.5 * quad + 0.5 * hinge + 0.5 * cp.gamma * sel * sel;
    }
    case LossKind::ScalarHingeD: {
      const double s = relu(w[0]);
      return 0.5 * s * s;
    }
    case LossKind::QuadraticBaseline: {
      double sum = 0.0;
      for (int j = 0; j < loss.dim; ++j) {
        const double diff = w[j] - static_cast<double>(z.bits[static_cast<std::size_t>(j)]);
        sum += diff * diff;
      }
      return 0.5 * sum;
    }
  }
  return 0.0;
}

DenseVector grad_loss(const LossHandle& loss, const DenseVector& w, const Sample& z) {
  check_eval_args(loss, w, z);
  DenseVector grad = DenseVector::Zero(loss.dim);
  if (z.is_null) return grad;

  switch (loss.kind) {
    case LossKind::FlatSphereA: {
      const int d = loss.dim;
      double sum = 0.0;
      for (int j = 0; j + 1 < d; ++j) {
        if (z.bits[static_cast<std::size_t>(j)] != 0 && w[j] > 0.0) sum += w[j] * w[j];
      }
      if (w[d - 1] > 0.0) sum += w[d - 1] * w[d - 1];
      const double g = std::sqrt(sum);
      if (g <= loss.rho || g == 0.0) return grad;
      const double scale = (g - loss.rho) / g;
      for (int j = 0; j + 1 < d; ++j) {
        if (z.bits[static_cast<std::size_t>(j)] != 0 && w[j] > 0.0) grad[j] = scale * w[j];
      }
      if (w[d - 1] > 0.0) grad[d - 1] = scale * w[d - 1];
      return grad;
    }
    case LossKind::BlockHingeB: {
      const int blocks = loss.num_blocks();
      const int tb = loss.t_blocks;
      double sum = 0.0;
      for (int i = 0; i < blocks; ++i) {
        const double zi = static_cast<double>(z.bits[static_cast<std::size_t>(i)]);
        const int base = loss.block_start(i);
        for (int b = 0; b < tb; ++b) {
          const double s = zi * w[base + b];
          if (s > 0.0) sum += s * s;
        }
      }
      sum += w[loss.dim - 1] * w[loss.dim - 1];
      const double g = std::sqrt(sum);
      if (g <= loss.rho || g == 0.0) return grad;
      const double scale = (g - loss.rho) / g;
      for (int i = 0; i < blocks; ++i) {
        const double zi = static_cast<double>(z.bits[static_cast<std::size_t>(i)]);
        const int base = loss.block_start(i);
        for (int b = 0; b < tb; ++b) {
          const double s = zi * w[base + b];
          if (s > 0.0) grad[base + b] = scale * s * zi;
        }
      }
      grad[loss.dim - 1] = scale * w[loss.dim - 1];
      return grad;
    }
    case LossKind::ChainAmplifierC: {
      const int blocks = loss.num_blocks();
      const int tb = loss.t_blocks;
      const ChainParams& cp = loss.chain;
      for (int i = 0; i < blocks; ++i) {
        const int base = loss.block_start(i);
        const bool zi = z.bits[static_cast<std::size_t>(i)] != 0;
        for (int b = 1; b < tb; ++b) {
          const double wb = w[base + b];
          if (zi) grad[base + b] += wb;  // f1
          const double delta = cp.deltas[static_cast<std::size_t>(b - 1)];
          const double shift = (b == 1) ? cp.lambda : 0.0;
          const double arg = wb - delta * (w[base + b - 1] + shift);
          if (arg > 0.0) {  // f2 link active
            grad[base + b] += arg;
            grad[base + b - 1] -= delta * arg;
          }
        }
      }
      const double sel = relu(chain_selector_dot(loss, w, z) + cp.delta1);
      if (sel > 0.0) {  // f3
        const double coef = cp.gamma * sel;
        const double zero_w = chain_zero_weight(loss.dim);
        for (int i = 0; i < blocks; ++i) {
          const double vzi = (z.bits[static_cast<std::size_t>(i)] != 0) ? 1.0 : zero_w;
          grad[loss.block_start(i)] += coef * vzi;
        }
        grad[loss.dim - 1] += coef;
      }
      return grad;
    }
    case LossKind::ScalarHingeD: {
      grad[0] = relu(w[0]);
      return grad;
    }
    case LossKind::QuadraticBaseline: {
      for (int j = 0; j < loss.dim; ++j) {
        grad[j] = w[j] - static_cast<double>(z.bits[static_cast<std::size_t>(j)]);
      }
      return grad;
    }
  }
  return grad;
}

double eval_empirical(const LossHandle& loss, const DenseVector& w, const Dataset& data) {
  if (data.n < 1 || data.samples.empty()) throw std::invalid_argument("eval_empirical: empty dataset");
  double sum = 0.0;
  for (const Sample& z : data.samples) sum += eval_loss(loss, w, z);
  return sum / static_cast<double>(data.n);
}

DenseVector grad_empirical(const LossHandle& loss, const DenseVector& w, const Dataset& data) {
  if (data.n < 1 || data.samples.empty()) throw std::invalid_argument("grad_empirical: empty dataset");
  DenseVector grad = DenseVector::Zero(loss.dim);
  for (const Sample& z : data.samples) {
    if (z.is_null) continue;
    grad += grad_loss(loss, w, z);
  }
  grad /= static_cast<double>(data.n);
  return grad;
}

DenseVector flat_center(const LossHandle& loss) {
  DenseVector center = DenseVector::Zero(loss.dim);
  switch (loss.kind) {
    case LossKind::ChainAmplifierC:
      center[loss.dim - 1] = -0.5 * loss.chain.lambda;
      break;
    case LossKind::ScalarHingeD:
      center[0] = -0.5;
      break;
    default:
      break;  // A, B, and the baseline report the origin
  }
  return center;
}

PropertyReport verify_loss_properties(const LossHandle& loss, int probes, RngStream rng) {
  if (probes < 1) throw std::invalid_argument("verify_loss_properties: probes must be >= 1");
  PropertyReport report;
  report.probes = probes;

  auto record = [](PropertyCheck& check, double violation) {
    if (violation > check.worst) check.worst = violation;
    if (violation > 0.0) check.pass = false;
  };

  for (int p = 0; p < probes; ++p) {
    const Sample z = random_sample(loss, rng);
    const DenseVector x = random_in_ball(loss.dim, 1.0, rng);
    const DenseVector y = random_in_ball(loss.dim, 1.0, rng);

    const double fx = eval_loss(loss, x, z);
    const double fy = eval_loss(loss, y, z);
    const DenseVector gx = grad_loss(loss, x, z);
    const DenseVector gy = grad_loss(loss, y, z);

    const double fmid = eval_loss(loss, (x + y) / 2.0, z);
    record(report.convexity, fmid - 0.5 * (fx + fy) - 1e-10);
    record(report.lipschitz, gx.norm() - loss.lipschitz - 1e-8);
    record(report.smoothness, (gx - gy).norm() - loss.beta * (x - y).norm() - 1e-8);
    record(report.self_bounding, gx.squaredNorm() - 2.0 * loss.beta * fx - 1e-8);
  }

  const DenseVector center = flat_center(loss);
  const int flat_probes = std::min(probes, 1000);
  for (int p = 0; p < flat_probes; ++p) {
    const Sample z = random_sample(loss, rng);
    DenseVector v = DenseVector::Zero(loss.dim);
    if (loss.rho > 0.0) v = random_in_ball(loss.dim, loss.rho, rng);
    record(report.flatness, eval_loss(loss, center + v, z) - 1e-15);
  }
  return report;
}

ChainResiduals chain_residuals(const LossHandle& loss) {
  if (loss.kind != LossKind::ChainAmplifierC) {
    throw std::invalid_argument("chain_residuals: not a chain construction");
  }
  const ChainParams& cp = loss.chain;
  const double d = static_cast<double>(loss.dim);
  const double eta = cp.eta_hint;
  const double r = cp.radius_hint;
  ChainResiduals res;
  const double delta1_target = eta * cp.gamma * r / (2.0 * std::sqrt(d) - eta * cp.gamma);
  const double gamma_target = cp.lambda / (std::max(1.0, eta) * (r + cp.delta1));
  res.delta1_residual = std::abs(cp.delta1 - delta1_target) / std::max(cp.delta1, 1e-300);
  res.gamma_residual = std::abs(cp.gamma - gamma_target) / std::max(cp.gamma, 1e-300);
  return res;
}

double chain_selector_value(const LossHandle& loss, const DenseVector& w, const Sample& z) {
  if (loss.kind != LossKind::ChainAmplifierC) {
    throw std::invalid_argument("chain_selector_value: not a chain construction");
  }
  check_eval_args(loss, w, z);
  return chain_selector_dot(loss, w, z);
}

Sample random_sample(const LossHandle& loss, RngStream& rng) {
  Sample z;
  z.alphabet = loss.alphabet();
  const int m = loss.sample_bits();
  z.bits.resize(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) {
    const int bit = rng.next_bit();
    z.bits[static_cast<std::size_t>(j)] =
        static_cast<std::int8_t>(z.alphabet == Alphabet::ZeroOne ? bit : 2 * bit - 1);
  }
  return z;
}

bool kink_free(const LossHandle& loss, const DenseVector& w, const Sample& z, double margin) {
  if (z.is_null) return true;
  switch (loss.kind) {
    case LossKind::FlatSphereA: {
      const int d = loss.dim;
      double sum = 0.0;
      for (int j = 0; j < d; ++j) {
        const bool masked = (j == d - 1) || z.bits[static_cast<std::size_t>(j)] != 0;
        if (!masked) continue;
        if (std::abs(w[j]) < margin) return false;
        if (w[j] > 0.0) sum += w[j] * w[j];
      }
      const double g = std::sqrt(sum);
      return g == 0.0 || std::abs(g - loss.rho) >= margin;
    }
    case LossKind::BlockHingeB: {
      double sum = w[loss.dim - 1] * w[loss.dim - 1];
      for (int i = 0; i < loss.num_blocks(); ++i) {
        const double zi = static_cast<double>(z.bits[static_cast<std::size_t>(i)]);
        const int base = loss.block_start(i);
        for (int b = 0; b < loss.t_blocks; ++b) {
          if (std::abs(w[base + b]) < margin) return false;
          const double s = zi * w[base + b];
          if (s > 0.0) sum += s * s;
        }
      }
      const double g = std::sqrt(sum);
      return g == 0.0 || std::abs(g - loss.rho) >= margin;
    }
    case LossKind::ChainAmplifierC: {
      const ChainParams& cp = loss.chain;
      for (int i = 0; i < loss.num_blocks(); ++i) {
        const int base = loss.block_start(i);
        for (int b = 1; b < loss.t_blocks; ++b) {
          const double shift = (b == 1) ? cp.lambda : 0.0;
          const double arg =
              w[base + b] - cp.deltas[static_cast<std::size_t>(b - 1)] * (w[base + b - 1] + shift);
          if (std::abs(arg) < margin) return false;
        }
      }
      return std::abs(chain_selector_dot(loss, w, z) + cp.delta1) >= margin;
    }
    case LossKind::ScalarHingeD:
      return std::abs(w[0]) >= margin;
    case LossKind::QuadraticBaseline:
      return true;
  }
  return true;
}

double max_fd_gradient_error(const LossHandle& loss, int points, RngStream rng) {
  if (points < 1) throw std::invalid_argument("max_fd_gradient_error: points must be >= 1");
  const double h = 1e-6;
  double worst = 0.0;
  for (int p = 0; p < points; ++p) {
    Sample z = random_sample(loss, rng);
    DenseVector w = random_in_ball(loss.dim, 1.0, rng);
    int attempts = 0;
    while (!kink_free(loss, w, z) && attempts++ < 10000) {
      z = random_sample(loss, rng);
      w = random_in_ball(loss.dim, 1.0, rng);
    }
    const DenseVector grad = grad_loss(loss, w, z);
    DenseVector fd(loss.dim);
    DenseVector wp = w;
    for (int j = 0; j < loss.dim; ++j) {
      const double orig = wp[j];
      wp[j] = orig + h;
      const double fplus = eval_loss(loss, wp, z);
      wp[j] = orig - h;
      const double fminus = eval_loss(loss, wp, z);
      wp[j] = orig;
      fd[j] = (fplus - fminus) / (2.0 * h);
    }
    const double err = (fd - grad).norm() / (1.0 + grad.norm());
    if (err > worst) worst = err;
  }
  return worst;
}

}  // namespace samlab
