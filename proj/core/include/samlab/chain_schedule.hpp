#pragma once

#include <vector>

#include "samlab/dataset.hpp"
#include "samlab/losses.hpp"
#include "samlab/types.hpp"

namespace samlab {

/// Conditions on the first SAM iterate w_2 of the chain construction: the
/// selector hinge is dead on every training sample, off-block heads sit in
/// (-lambda, 0), all untouched coordinates are exactly zero, and the good
/// block's first two coordinates landed in their prescribed ranges.
struct FirstUpdateCheck {
  bool selector_dead = false;
  bool offblock_head_range = false;
  bool offblock_tail_zero = false;
  bool good_tail_zero = false;
  bool good_head_range = false;
  bool good_second_negative = false;

  bool all() const {
    return selector_dead && offblock_head_range && offblock_tail_zero && good_tail_zero &&
           good_head_range && good_second_negative;
  }
};

FirstUpdateCheck check_first_update(const LossHandle& loss, const Dataset& data,
                                    const DenseVector& w2, int good_col);

/// Conditions on iterate w_t (paper step t >= 3) of the chain run: the frozen
/// second coordinate stays in [-sigma, 0], every link but the newly armed one
/// is dead (untouched links exactly zero), and the freshest two coordinates
/// sit in their eta*r bands.
struct ChainStepCheck {
  bool second_range = false;
  bool link_signs = false;
  bool newest_range = false;
  bool prev_range = false;

  bool all() const { return second_range && link_signs && newest_range && prev_range; }
};

/// prev_band_upper is the acceptance ceiling for the rebounded coordinate
/// u_t(t-1) in units of -eta*r: the lemma itself allows -1/2, while the
/// schedule search demands a tighter witness (see solve_chain_schedule).
ChainStepCheck check_chain_step(const LossHandle& loss, const DenseVector& wt, int step_t,
                                int good_col, double sigma, double eta, double r,
                                bool strict_second = false, double prev_band_upper = 0.5);

/// The finalized schedule: the handle with delta_2..delta_T pinned against
/// the dataset, plus the quantities the per-step checks need.
struct ChainSchedule {
  LossHandle loss;
  int good_col = -1;
  double sigma = 0.0;
  std::vector<int> halvings;  // halvings spent per delta index (reporting)
};

/// Per-index halving search for delta_2..delta_T: start each slope at 1,
/// simulate the SAM prefix, and halve until the step conditions above hold;
/// below `floor` the search fails (ScheduleSearchError). Requires the
/// exactly-one all-zero column event (NoGoodColumnError otherwise).
ChainSchedule solve_chain_schedule(const LossHandle& loss, const Dataset& data, double eta,
                                   double r, double zero_grad_eps = 0.0, double floor = 1e-14);

}  // namespace samlab
