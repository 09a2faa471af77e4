#pragma once

// Repeated-episode evaluation: sample, attack, calibrate, count, aggregate.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mia/attacks.hpp"
#include "mia/episodes.hpp"
#include "mia/measure.hpp"

namespace mia {

/// Regime A and B values of one episode. Thresholds come from the
/// validation scores; counts and ratios from the query scores.
struct EpisodeMeasurement {
  double threshold_a = 0.0;
  double threshold_b = 0.0;
  ConfusionCounts counts_a;
  ConfusionCounts counts_b;
  double value_a = 0.0;
  double value_b = 0.0;
};

/// Regime A calibrates at zero false positives, Regime B at
/// fp_budget(query size, rounding).
EpisodeMeasurement measure_episode(const MembershipScores& validation,
                                   const MembershipScores& query,
                                   Rounding rounding = Rounding::Floor);

struct TrialResult {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  std::size_t config_index = 0;  // position in the plan grid
  bool converged = true;
  EpisodeMeasurement measurement;
  /// Filled only when TrialOptions::keep_scores is set.
  MembershipScores validation_scores;
  MembershipScores query_scores;
};

struct AggregateReport {
  LeakageReport leakage;  // tp_log_ratio holds the mean
  std::size_t n_trials = 0;
  EpisodeSpec spec;
};

struct TrialsResult {
  std::vector<TrialResult> trials;  // ordered by index
  AggregateReport regime_a;
  AggregateReport regime_b;
};

struct MeanCi {
  double mean = 0.0;
  double ci_halfwidth = 0.0;
};

/// Mean and 1.96 * sample stddev / sqrt(n). The sum runs over the sorted
/// values so the result does not depend on input order. n = 1 gives a zero
/// half-width. Throws DomainError on empty input.
MeanCi mean_ci95(std::span<const double> values);

/// Reduces per-trial measurements into one report per regime, classified on
/// the mean. positive_size is the query member count of the spec.
TrialsResult aggregate(std::vector<TrialResult> trials, const EpisodeSpec& spec,
                       Rounding rounding = Rounding::Floor);

/// One trial end to end: grid search on validation, scoring of validation and
/// query with the chosen configuration, then measure_episode.
TrialResult run_trial(const AttackPlan& plan, const Episode& episode,
                      Rounding rounding = Rounding::Floor,
                      bool keep_scores = false);

struct TrialOptions {
  std::size_t n_trials = 500;
  std::uint64_t master_seed = 0;
  /// 0 picks std::thread::hardware_concurrency().
  std::size_t threads = 0;
  Rounding rounding = Rounding::Floor;
  bool keep_scores = false;
};

/// Trial i uses trial_seed(master_seed, i). Results are identical for any
/// thread count. The first failing trial (lowest index) aborts the run and
/// its exception is rethrown.
TrialsResult run_trials(const AttackPlan& plan,
                        std::span<const ScoreRecord> records,
                        const EpisodeSpec& spec, const TrialOptions& options);

}  // namespace mia
