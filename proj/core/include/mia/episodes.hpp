#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mia {

/// Membership class of an example. Members are the positive class.
enum class Label : std::uint8_t { NonMember = 0, Member = 1 };

constexpr std::size_t index(Label label) noexcept {
  return static_cast<std::size_t>(label);
}

std::string_view to_string(Label label) noexcept;
/// "member" / "nonmember"; throws ParseError(UnknownLabel) otherwise.
Label parse_label(std::string_view text);

/// One example as seen through the victim model.
struct ScoreRecord {
  std::string example_id;
  Label label = Label::NonMember;
  std::vector<double> features;
  double loss = 0.0;

  friend bool operator==(const ScoreRecord&, const ScoreRecord&) = default;
};

/// Checks that every record has the same non-zero feature dimension and only
/// finite values. Throws DomainError.
void validate_records(std::span<const ScoreRecord> records);

struct EpisodeSpec {
  static constexpr std::size_t kWays = 2;
  static constexpr std::size_t kDefaultQueryShots = 15;

  std::size_t shots = 5;
  std::size_t query_shots = kDefaultQueryShots;
  std::size_t validation_shots = kDefaultQueryShots;
  /// Lifts the shots in {1, 5, 10} restriction.
  bool allow_any_shots = false;

  std::size_t per_class() const noexcept {
    return shots + query_shots + validation_shots;
  }

  /// Throws ValidationError on shots outside {1,5,10} (unless overridden) or
  /// on zero-sized subsets.
  void validate() const;

  friend bool operator==(const EpisodeSpec&, const EpisodeSpec&) = default;
};

/// Records of one subset, split by class and indexed with index(Label).
using ClassSplit = std::array<std::vector<ScoreRecord>, 2>;

/// Members first, then non-members.
std::vector<ScoreRecord> flatten(const ClassSplit& split);

struct Episode {
  ClassSplit support;
  ClassSplit query;
  ClassSplit validation;
  std::uint64_t seed = 0;
};

/// Samples support, query and validation subsets per class, uniformly without
/// replacement. Deterministic in (records order, spec, seed).
/// Throws CapacityError naming the class that is too small.
Episode sample_episode(std::span<const ScoreRecord> records,
                       const EpisodeSpec& spec, std::uint64_t seed);

/// Seed of trial `trial_index` derived from the master seed: the splitmix64
/// finalizer applied to master + (trial_index + 1) * 0x9E3779B97F4A7C15.
/// Independent of the order in which trials are executed.
std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t trial_index);

}  // namespace mia
