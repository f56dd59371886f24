#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "samlab/rng.hpp"

namespace samlab {

enum class Alphabet { ZeroOne, PlusMinus };

/// One instance z: a bit/sign vector of length m plus a null flag. The null
/// sample stands in for the zero-loss instance z0 used by leave-one-out
/// stability: every loss evaluates to exactly zero on it, with zero gradient.
struct Sample {
  std::vector<std::int8_t> bits;
  Alphabet alphabet = Alphabet::ZeroOne;
  bool is_null = false;

  static Sample null_of(int m, Alphabet a) {
    Sample s;
    s.bits.assign(static_cast<std::size_t>(m), 0);
    s.alphabet = a;
    s.is_null = true;
    return s;
  }
};

struct Dataset {
  std::vector<Sample> samples;
  int n = 0;  // number of samples
  int m = 0;  // bits per sample
  Alphabet alphabet = Alphabet::ZeroOne;
  std::uint64_t seed = 0;
};

/// n samples with i.i.d. uniform coordinates over the alphabet. Deterministic
/// in the stream state.
Dataset sample_dataset(Alphabet alphabet, int m, int n, RngStream rng);

/// Smallest column index (0-based) on which every non-null sample equals
/// `target` (0/1 for ZeroOne, -1/+1 for PlusMinus). With exactly_one set, the
/// index is returned only when it is unique.
std::optional<int> find_good_column(const Dataset& data, int target, bool exactly_one = false);

/// Leave-one-out variants S^(1)..S^(n): S^(i) replaces sample i by the null
/// sample; order and sizes preserved.
std::vector<Dataset> loo_variants(const Dataset& data);

}  // namespace samlab
