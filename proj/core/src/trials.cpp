#include "mia/trials.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <optional>
#include <thread>

#include "mia/errors.hpp"

namespace mia {

namespace {

constexpr double kZ95 = 1.96;

Count count_label(const MembershipScores& scores, Label label) {
  return static_cast<Count>(
      std::count_if(scores.begin(), scores.end(),
                    [label](const ScoredExample& s) { return s.label == label; }));
}

AggregateReport reduce(const std::vector<TrialResult>& trials,
                       const EpisodeSpec& spec, Regime regime,
                       Rounding rounding) {
  std::vector<double> values;
  values.reserve(trials.size());
  for (const auto& t : trials) {
    values.push_back(regime == Regime::A ? t.measurement.value_a
                                         : t.measurement.value_b);
  }
  const auto stats = mean_ci95(values);

  AggregateReport report;
  report.n_trials = trials.size();
  report.spec = spec;
  auto& leak = report.leakage;
  leak.regime = regime;
  leak.tp_log_ratio = stats.mean;
  leak.ci_halfwidth = stats.ci_halfwidth;
  leak.positive_size = spec.query_shots;
  leak.test_size = EpisodeSpec::kWays * spec.query_shots;
  leak.alpha = alpha(leak.positive_size);
  if (regime == Regime::B) {
    leak.fp_budget = fp_budget(leak.test_size, rounding);
    leak.beta = beta(leak.fp_budget, leak.positive_size);
  }
  leak.severity = classify(regime, leak.tp_log_ratio, leak.alpha, leak.beta);
  return report;
}

}  // namespace

EpisodeMeasurement measure_episode(const MembershipScores& validation,
                                   const MembershipScores& query,
                                   Rounding rounding) {
  const Count positives = count_label(query, Label::Member);
  const Count budget = fp_budget(static_cast<Count>(query.size()), rounding);

  EpisodeMeasurement m;
  m.threshold_a = calibrate_threshold(validation, 0);
  m.threshold_b = calibrate_threshold(validation, budget);
  m.counts_a = evaluate_episode(query, m.threshold_a);
  m.counts_b = evaluate_episode(query, m.threshold_b);
  m.value_a = tp_log_ratio(m.counts_a.tp, positives);
  m.value_b = tp_log_ratio(m.counts_b.tp, positives);
  return m;
}

MeanCi mean_ci95(std::span<const double> values) {
  if (values.empty()) {
    throw DomainError("cannot aggregate zero trials");
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  const double mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / n;
  if (sorted.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : sorted) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  return {mean, kZ95 * sd / std::sqrt(n)};
}

TrialsResult aggregate(std::vector<TrialResult> trials, const EpisodeSpec& spec,
                       Rounding rounding) {
  TrialsResult result;
  result.regime_a = reduce(trials, spec, Regime::A, rounding);
  result.regime_b = reduce(trials, spec, Regime::B, rounding);
  result.trials = std::move(trials);
  return result;
}

TrialResult run_trial(const AttackPlan& plan, const Episode& episode,
                      Rounding rounding, bool keep_scores) {
  const auto usable = feasible_indices(plan.grid, episode.support);
  if (usable.empty()) {
    throw DomainError("no configuration of the '" +
                      std::string(to_string(plan.kind)) +
                      "' grid fits this episode");
  }
  std::vector<AttackParams> grid;
  grid.reserve(usable.size());
  for (auto i : usable) grid.push_back(plan.grid[i]);

  const std::size_t chosen =
      search_hyperparameters(grid, episode, plan.representation);

  auto scores = score_episode(grid[chosen], episode, plan.representation);

  TrialResult trial;
  trial.seed = episode.seed;
  trial.config_index = usable[chosen];
  trial.converged = scores.converged;
  trial.measurement = measure_episode(scores.validation, scores.query, rounding);
  if (keep_scores) {
    trial.validation_scores = std::move(scores.validation);
    trial.query_scores = std::move(scores.query);
  }
  return trial;
}

TrialsResult run_trials(const AttackPlan& plan,
                        std::span<const ScoreRecord> records,
                        const EpisodeSpec& spec, const TrialOptions& options) {
  spec.validate();
  if (options.n_trials == 0) {
    throw ValidationError("number of trials must be >= 1");
  }
  if (plan.grid.empty()) {
    throw DomainError("attack plan has an empty grid");
  }
  validate_records(records);

  std::vector<std::optional<TrialResult>> slots(options.n_trials);
  std::vector<std::exception_ptr> errors(options.n_trials);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= options.n_trials || failed.load()) return;
      try {
        const auto seed = trial_seed(options.master_seed, i);
        auto trial = run_trial(plan, sample_episode(records, spec, seed),
                               options.rounding, options.keep_scores);
        trial.index = i;
        slots[i] = std::move(trial);
      } catch (...) {
        errors[i] = std::current_exception();
        failed.store(true);
      }
    }
  };

  std::size_t threads = options.threads;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, options.n_trials);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<TrialResult> trials;
  trials.reserve(options.n_trials);
  for (auto& s : slots) trials.push_back(std::move(*s));
  return aggregate(std::move(trials), spec, options.rounding);
}

}  // namespace mia
