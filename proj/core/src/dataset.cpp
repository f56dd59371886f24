#include "samlab/dataset.hpp"

#include <stdexcept>

namespace samlab {

Dataset sample_dataset(Alphabet alphabet, int m, int n, RngStream rng) {
  if (m < 1) throw std::invalid_argument("sample_dataset: m must be >= 1");
  if (n < 1) throw std::invalid_argument("sample_dataset: n must be >= 1");

  Dataset data;
  data.n = n;
  data.m = m;
  data.alphabet = alphabet;
  data.seed = rng.seed();
  data.samples.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    Sample s;
    s.alphabet = alphabet;
    s.bits.resize(static_cast<std::size_t>(m));
    // Bits are peeled off one u64 at a time; every coordinate is an
    // independent fair bit of the stream.
    std::uint64_t word = 0;
    int left = 0;
    for (int j = 0; j < m; ++j) {
      if (left == 0) {
        word = rng.next_u64();
        left = 64;
      }
      const int bit = static_cast<int>(word & 1u);
      word >>= 1;
      --left;
      s.bits[static_cast<std::size_t>(j)] =
          static_cast<std::int8_t>(alphabet == Alphabet::ZeroOne ? bit : 2 * bit - 1);
    }
    data.samples.push_back(std::move(s));
  }
  return data;
}

std::optional<int> find_good_column(const Dataset& data, int target, bool exactly_one) {
  std::optional<int> first;
  int hits = 0;
  for (int j = 0; j < data.m; ++j) {
    bool all = true;
    for (const Sample& s : data.samples) {
      if (s.is_null) continue;  // null samples carry no bit information
      if (static_cast<int>(s.bits[static_cast<std::size_t>(j)]) != target) {
        all = false;
        break;
      }
    }
    if (all) {
      ++hits;
      if (!first) first = j;
      if (!exactly_one) return first;
      if (hits > 1) return std::nullopt;
    }
  }
  if (exactly_one && hits != 1) return std::nullopt;
  return first;
}

std::vector<Dataset> loo_variants(const Dataset& data) {
  if (data.n < 1) throw std::invalid_argument("loo_variants: empty dataset");
  std::vector<Dataset> out;
  out.reserve(static_cast<std::size_t>(data.n));
  for (int i = 0; i < data.n; ++i) {
    Dataset variant = data;
    variant.samples[static_cast<std::size_t>(i)] = Sample::null_of(data.m, data.alphabet);
    out.push_back(std::move(variant));
  }
  return out;
}

}  // namespace samlab
