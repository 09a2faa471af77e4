#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mia/episodes.hpp"

namespace mia {

struct GaussianParams {
  double mean = 0.0;
  double stddev = 1.0;
};

/// Synthetic victim: Gaussian losses per class and standard-normal features,
/// with member features shifted along the first axis.
struct SynthSpec {
  std::size_t n_members = 1000;
  std::size_t n_nonmembers = 1000;
  GaussianParams member_loss{0.5, 0.25};
  GaussianParams nonmember_loss{0.5, 0.25};
  std::size_t feature_dim = 10;
  double feature_shift = 0.0;
  std::uint64_t seed = 0;

  /// Throws ValidationError on zero counts/dimension or negative stddev.
  void validate() const;
};

/// Members first (ids "m-000000", ...), then non-members ("n-000000", ...).
/// Deterministic per seed.
std::vector<ScoreRecord> generate(const SynthSpec& spec);

}  // namespace mia
