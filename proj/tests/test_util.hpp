#pragma once

#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "mia/episodes.hpp"

namespace mia::testing {

inline ScoreRecord record(std::string id, Label label,
                          std::vector<double> features, double loss = 0.0) {
  return {std::move(id), label, std::move(features), loss};
}

// n records per class with random features of dimension `dim`.
inline std::vector<ScoreRecord> random_records(std::size_t n, std::size_t dim,
                                               std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  std::vector<ScoreRecord> out;
  for (Label label : {Label::Member, Label::NonMember}) {
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> f(dim);
      for (double& x : f) x = z(rng);
      out.push_back(record((label == Label::Member ? "m" : "n") +
                               std::to_string(i),
                           label, std::move(f), std::abs(z(rng))));
    }
  }
  return out;
}

}  // namespace mia::testing
