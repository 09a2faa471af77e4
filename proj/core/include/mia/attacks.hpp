#pragma once

// Score-producing membership attacks over one episode, plus threshold
// calibration on the validation subset and per-episode grid search.
//
// Every scorer maps a set of target records to one score per record, where a
// higher score means "more likely a member". Scores stay aligned with the
// target order and carry the example id and true label along.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mia/episodes.hpp"
#include "mia/measure.hpp"

namespace mia {

struct ScoredExample {
  std::string example_id;
  Label label = Label::NonMember;
  double score = 0.0;

  friend bool operator==(const ScoredExample&, const ScoredExample&) = default;
};

using MembershipScores = std::vector<ScoredExample>;

enum class Metric { Euclidean, Cosine };
enum class Normalization { None, L2 };
enum class Weighting { InverseDistance, Uniform };

/// How a record is turned into the vector the few-shot attacks operate on.
/// L2 normalization touches only the victim output block; an appended loss
/// keeps its raw scale.
struct Representation {
  /// Concatenates the victim loss after the output features.
  bool append_loss = true;
};

std::vector<double> embed(const ScoreRecord& record,
                          const Representation& representation);

struct ThresholdConfig {};

struct SsConfig {
  /// Neighbours taken from the reference set; nullopt means all of them.
  std::optional<std::size_t> k_neighbors;
  bool include_centroids = true;
  Normalization normalize = Normalization::L2;
  Metric metric = Metric::Euclidean;
  Weighting weighting = Weighting::InverseDistance;
  double epsilon = 1e-12;
};

struct LsConfig {
  SsConfig ss;
  double lambda = 0.5;
  std::size_t affinity_k = 5;
  std::size_t max_iters = 100;
  double tol = 1e-6;
};

using AttackParams = std::variant<ThresholdConfig, SsConfig, LsConfig>;

enum class AttackKind { GlobalThreshold, SimpleShot, LaplacianShot };

std::string_view to_string(AttackKind kind) noexcept;
/// "threshold", "ss", "ls". Throws ValidationError otherwise.
AttackKind parse_attack_kind(std::string_view text);

/// An attack together with the configurations searched in every episode.
struct AttackPlan {
  AttackKind kind = AttackKind::SimpleShot;
  Representation representation;
  std::vector<AttackParams> grid;
};

/// Default grids: k in {1,3,5,all} for SS, lambda in {0.1,0.5,1.0} for LS.
AttackPlan default_plan(AttackKind kind);

/// score = -loss.
MembershipScores score_global_threshold(std::span<const ScoreRecord> targets);
MembershipScores score_global_threshold(const Episode& episode);

/// Number of references the SS reference set holds for this support.
std::size_t reference_set_size(const ClassSplit& support, const SsConfig& cfg);

/// Inverse-distance weighted k-NN over the support points, optionally joined
/// by the two class centroids. The score is the member share of the
/// neighbour weights. Throws DomainError on zero-dimensional features or a
/// k outside [1, reference set size].
MembershipScores score_simpleshot(const ClassSplit& support,
                                  std::span<const ScoreRecord> targets,
                                  const SsConfig& cfg,
                                  const Representation& representation = {});
MembershipScores score_simpleshot(const Episode& episode, const SsConfig& cfg,
                                  const Representation& representation = {});

struct LaplacianResult {
  MembershipScores scores;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Centroid soft assignment refined by a binary k-NN affinity over the
/// targets. Iterates y_i <- softmax(-d_i + lambda * sum_j W_ij y_j) from the
/// centroid softmax until the largest change drops below tol. Hitting
/// max_iters returns the current assignment with converged = false.
LaplacianResult score_laplacianshot(const ClassSplit& support,
                                    std::span<const ScoreRecord> targets,
                                    const LsConfig& cfg,
                                    const Representation& representation = {});
LaplacianResult score_laplacianshot(const Episode& episode,
                                    const LsConfig& cfg,
                                    const Representation& representation = {});

struct ScoringOutcome {
  MembershipScores scores;
  bool converged = true;
};

/// Dispatches on the parameter alternative.
ScoringOutcome score_targets(const AttackParams& params,
                             const ClassSplit& support,
                             std::span<const ScoreRecord> targets,
                             const Representation& representation);

/// Scores of one episode's unlabeled points under one configuration.
struct EpisodeScores {
  MembershipScores validation;
  MembershipScores query;
  bool converged = true;
};

/// Scores validation and query in a single pass over their union, so a
/// transductive attack sees both subsets at once and the threshold calibrated
/// on validation transfers to query. Per-point attacks are unaffected.
EpisodeScores score_episode(const AttackParams& params, const Episode& episode,
                            const Representation& representation);

/// Smallest threshold admitting at most fp_budget non-member scores at or
/// above it, placed halfway between the straddling non-member scores. With no
/// distinct score above the cut it is the next double above the cut.
/// Throws CapacityError when fewer than fp_budget + 1 non-members exist.
double calibrate_threshold(const MembershipScores& validation, Count fp_budget);

/// Predicts member iff score >= threshold.
ConfusionCounts evaluate_episode(const MembershipScores& scores,
                                 double threshold);

/// Regime A value (zero-FP calibration) a configuration reaches on the
/// validation subset.
double validation_leakage(const AttackParams& params, const Episode& episode,
                          const Representation& representation);

/// Index of the configuration with the highest validation Regime A value;
/// ties go to the earliest. Throws DomainError on an empty grid.
std::size_t search_hyperparameters(std::span<const AttackParams> grid,
                                   const Episode& episode,
                                   const Representation& representation);

/// Positions of the grid configurations usable with this support; SS
/// neighbour counts larger than the reference set are skipped.
std::vector<std::size_t> feasible_indices(std::span<const AttackParams> grid,
                                          const ClassSplit& support);

}  // namespace mia
