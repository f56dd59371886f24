#pragma once

#include <stdexcept>
#include <string>

namespace samlab {

/// Requested kind/point has no certified closed-form inner maximizer;
/// callers are expected to fall back to the ascent oracle.
struct NoClosedFormError : std::runtime_error {
  explicit NoClosedFormError(const std::string& what) : std::runtime_error(what) {}
};

/// The dataset has no column on which every sample agrees with the target bit.
struct NoGoodColumnError : std::runtime_error {
  explicit NoGoodColumnError(const std::string& what) : std::runtime_error(what) {}
};

/// The chain construction's per-index halving search hit the floor without
/// satisfying the step conditions.
struct ScheduleSearchError : std::runtime_error {
  explicit ScheduleSearchError(const std::string& what) : std::runtime_error(what) {}
};

/// Exact population evaluation would need to enumerate too many coupled blocks.
struct TooManyActiveBlocksError : std::runtime_error {
  explicit TooManyActiveBlocksError(const std::string& what) : std::runtime_error(what) {}
};

/// Exact population evaluation is not defined for this loss kind.
struct UnsupportedKindError : std::runtime_error {
  explicit UnsupportedKindError(const std::string& what) : std::runtime_error(what) {}
};

/// Flatness probing requires a point with (numerically) zero empirical risk.
struct NotAMinimizerError : std::runtime_error {
  explicit NotAMinimizerError(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace samlab
