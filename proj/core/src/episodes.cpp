#include "mia/episodes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "mia/errors.hpp"

namespace mia {

std::string_view to_string(Label label) noexcept {
  return label == Label::Member ? "member" : "nonmember";
}

Label parse_label(std::string_view text) {
  if (text == "member") return Label::Member;
  if (text == "nonmember") return Label::NonMember;
  throw ParseError(ParseErrorKind::UnknownLabel,
                   "unknown label '" + std::string(text) + "'");
}

void validate_records(std::span<const ScoreRecord> records) {
  if (records.empty()) return;
  const std::size_t dim = records.front().features.size();
  if (dim == 0) {
    throw DomainError("records must have feature dimension >= 1");
  }
  for (const auto& r : records) {
    if (r.features.size() != dim) {
      throw DomainError("record '" + r.example_id + "' has " +
                        std::to_string(r.features.size()) +
                        " features, expected " + std::to_string(dim));
    }
    if (!std::isfinite(r.loss) ||
        !std::all_of(r.features.begin(), r.features.end(),
                     [](double v) { return std::isfinite(v); })) {
      throw DomainError("record '" + r.example_id + "' has non-finite values");
    }
  }
}

void EpisodeSpec::validate() const {
  if (!allow_any_shots && shots != 1 && shots != 5 && shots != 10) {
    throw ValidationError("shots must be 1, 5 or 10 (got " +
                          std::to_string(shots) +
                          "); pass the override flag for other values");
  }
  if (shots == 0 || query_shots == 0 || validation_shots == 0) {
    throw ValidationError("support, query and validation sizes must be >= 1");
  }
}

std::vector<ScoreRecord> flatten(const ClassSplit& split) {
  std::vector<ScoreRecord> out;
  out.reserve(split[0].size() + split[1].size());
  const auto& members = split[index(Label::Member)];
  const auto& nonmembers = split[index(Label::NonMember)];
  out.insert(out.end(), members.begin(), members.end());
  out.insert(out.end(), nonmembers.begin(), nonmembers.end());
  return out;
}

Episode sample_episode(std::span<const ScoreRecord> records,
                       const EpisodeSpec& spec, std::uint64_t seed) {
  spec.validate();

  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < records.size(); ++i) {
    by_class[index(records[i].label)].push_back(i);
  }

  const std::size_t need = spec.per_class();
  for (Label label : {Label::Member, Label::NonMember}) {
    const auto have = by_class[index(label)].size();
    if (have < need) {
      throw CapacityError("class '" + std::string(to_string(label)) +
                          "' has " + std::to_string(have) +
                          " records, episode needs " + std::to_string(need));
    }
  }

  Episode episode;
  episode.seed = seed;
  std::mt19937_64 rng(seed);

  // Members are drawn before non-members so the stream is fixed per seed.
  for (Label label : {Label::Member, Label::NonMember}) {
    auto& pool = by_class[index(label)];
    // Partial Fisher-Yates: the first `need` slots become the sample.
    for (std::size_t i = 0; i < need; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
      std::swap(pool[i], pool[pick(rng)]);
    }
    auto take = [&](std::size_t from, std::size_t count,
                    std::vector<ScoreRecord>& dest) {
      dest.reserve(count);
      for (std::size_t i = from; i < from + count; ++i) {
        dest.push_back(records[pool[i]]);
      }
    };
    const auto c = index(label);
    take(0, spec.shots, episode.support[c]);
    take(spec.shots, spec.query_shots, episode.query[c]);
    take(spec.shots + spec.query_shots, spec.validation_shots,
         episode.validation[c]);
  }
  return episode;
}

std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t trial_index) {
  std::uint64_t z = master_seed + (trial_index + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace mia
