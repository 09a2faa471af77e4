#include "mia/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mia/errors.hpp"

namespace mia {

namespace {

using Vec = std::vector<double>;

// Normalizes the leading `dims` coordinates (the victim output block); an
// appended loss coordinate keeps its scale.
void l2_normalize(Vec& v, std::size_t dims) {
  double norm = 0.0;
  for (std::size_t i = 0; i < dims; ++i) norm += v[i] * v[i];
  norm = std::sqrt(norm);
  if (norm > 0.0) {
    for (std::size_t i = 0; i < dims; ++i) v[i] /= norm;
  }
}

double distance(const Vec& a, const Vec& b, Metric metric) {
  if (metric == Metric::Euclidean) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double d = a[i] - b[i];
      sum += d * d;
    }
    return std::sqrt(sum);
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 1.0;
  // Clamp so rounding never yields a negative distance.
  return std::max(0.0, 1.0 - dot / std::sqrt(na * nb));
}

Vec prepare(const ScoreRecord& r, const Representation& rep,
            Normalization normalize) {
  if (r.features.empty()) {
    throw DomainError("record '" + r.example_id +
                      "' has zero-dimensional features");
  }
  Vec v = embed(r, rep);
  if (normalize == Normalization::L2) l2_normalize(v, r.features.size());
  return v;
}

// Per-class mean of the (already normalized) support points, re-normalized
// afterwards when L2 is requested.
Vec centroid(const std::vector<Vec>& points, Normalization normalize,
             std::size_t feature_dims) {
  Vec c(points.front().size(), 0.0);
  for (const auto& p : points) {
    for (std::size_t i = 0; i < c.size(); ++i) c[i] += p[i];
  }
  for (double& x : c) x /= static_cast<double>(points.size());
  if (normalize == Normalization::L2) l2_normalize(c, feature_dims);
  return c;
}

struct Reference {
  Vec point;
  Label label;
};

std::vector<Reference> build_references(const ClassSplit& support,
                                         const SsConfig& cfg,
                                         const Representation& rep) {
  std::vector<Reference> refs;
  std::array<std::vector<Vec>, 2> per_class;
  for (Label label : {Label::Member, Label::NonMember}) {
    for (const auto& r : support[index(label)]) {
      per_class[index(label)].push_back(prepare(r, rep, cfg.normalize));
      refs.push_back({per_class[index(label)].back(), label});
    }
  }
  if (cfg.include_centroids) {
    for (Label label : {Label::Member, Label::NonMember}) {
      if (!per_class[index(label)].empty()) {
        const auto dims = support[index(label)].front().features.size();
        refs.push_back(
            {centroid(per_class[index(label)], cfg.normalize, dims), label});
      }
    }
  }
  return refs;
}

void check_support(const ClassSplit& support) {
  if (support[index(Label::Member)].empty() ||
      support[index(Label::NonMember)].empty()) {
    throw DomainError("support must contain both classes");
  }
}

MembershipScores tag(std::span<const ScoreRecord> targets,
                     const std::vector<double>& scores) {
  MembershipScores out;
  out.reserve(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    out.push_back({targets[i].example_id, targets[i].label, scores[i]});
  }
  return out;
}

// Two-class softmax written as a logistic of the logit difference.
double member_probability(double member_logit, double nonmember_logit) {
  return 1.0 / (1.0 + std::exp(nonmember_logit - member_logit));
}

}  // namespace

std::vector<double> embed(const ScoreRecord& record,
                          const Representation& representation) {
  std::vector<double> v = record.features;
  if (representation.append_loss) v.push_back(record.loss);
  return v;
}

std::string_view to_string(AttackKind kind) noexcept {
  switch (kind) {
    case AttackKind::GlobalThreshold:
      return "threshold";
    case AttackKind::SimpleShot:
      return "ss";
    case AttackKind::LaplacianShot:
      return "ls";
  }
  return "ss";
}

AttackKind parse_attack_kind(std::string_view text) {
  if (text == "threshold") return AttackKind::GlobalThreshold;
  if (text == "ss") return AttackKind::SimpleShot;
  if (text == "ls") return AttackKind::LaplacianShot;
  throw ValidationError("unknown attack '" + std::string(text) +
                        "' (expected threshold, ss or ls)");
}

AttackPlan default_plan(AttackKind kind) {
  AttackPlan plan;
  plan.kind = kind;
  switch (kind) {
    case AttackKind::GlobalThreshold:
      plan.grid.emplace_back(ThresholdConfig{});
      break;
    case AttackKind::SimpleShot:
      for (std::optional<std::size_t> k :
           {std::optional<std::size_t>{1}, std::optional<std::size_t>{3},
            std::optional<std::size_t>{5}, std::optional<std::size_t>{}}) {
        SsConfig cfg;
        cfg.k_neighbors = k;
        plan.grid.emplace_back(cfg);
      }
      break;
    case AttackKind::LaplacianShot:
      for (double lambda : {0.1, 0.5, 1.0}) {
        LsConfig cfg;
        cfg.lambda = lambda;
        plan.grid.emplace_back(cfg);
      }
      break;
  }
  return plan;
}

MembershipScores score_global_threshold(std::span<const ScoreRecord> targets) {
  std::vector<double> scores;
  scores.reserve(targets.size());
  for (const auto& r : targets) scores.push_back(-r.loss);
  return tag(targets, scores);
}

MembershipScores score_global_threshold(const Episode& episode) {
  const auto targets = flatten(episode.query);
  return score_global_threshold(targets);
}

std::size_t reference_set_size(const ClassSplit& support, const SsConfig& cfg) {
  std::size_t n = support[0].size() + support[1].size();
  if (cfg.include_centroids) {
    n += static_cast<std::size_t>(!support[0].empty()) +
         static_cast<std::size_t>(!support[1].empty());
  }
  return n;
}

MembershipScores score_simpleshot(const ClassSplit& support,
                                  std::span<const ScoreRecord> targets,
                                  const SsConfig& cfg,
                                  const Representation& representation) {
  check_support(support);
  const auto refs = build_references(support, cfg, representation);
  const std::size_t k = cfg.k_neighbors.value_or(refs.size());
  if (k == 0 || k > refs.size()) {
    throw DomainError("k_neighbors = " + std::to_string(k) +
                      " outside [1, " + std::to_string(refs.size()) + "]");
  }

  std::vector<double> scores;
  scores.reserve(targets.size());
  std::vector<std::pair<double, std::size_t>> dist(refs.size());
  for (const auto& target : targets) {
    const Vec q = prepare(target, representation, cfg.normalize);
    if (q.size() != refs.front().point.size()) {
      throw DomainError("target '" + target.example_id +
                        "' dimension differs from the support");
    }
    for (std::size_t r = 0; r < refs.size(); ++r) {
      dist[r] = {distance(q, refs[r].point, cfg.metric), r};
    }
    // Ties resolve toward the lower reference index.
    std::partial_sort(dist.begin(), dist.begin() + static_cast<long>(k),
                      dist.end());
    double member_weight = 0.0;
    double total_weight = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double w = cfg.weighting == Weighting::InverseDistance
                           ? 1.0 / (dist[j].first + cfg.epsilon)
                           : 1.0;
      total_weight += w;
      if (refs[dist[j].second].label == Label::Member) member_weight += w;
    }
    scores.push_back(member_weight / total_weight);
  }
  return tag(targets, scores);
}

MembershipScores score_simpleshot(const Episode& episode, const SsConfig& cfg,
                                  const Representation& representation) {
  const auto targets = flatten(episode.query);
  return score_simpleshot(episode.support, targets, cfg, representation);
}

LaplacianResult score_laplacianshot(const ClassSplit& support,
                                    std::span<const ScoreRecord> targets,
                                    const LsConfig& cfg,
                                    const Representation& representation) {
  check_support(support);
  if (!(cfg.lambda >= 0.0)) {
    throw DomainError("lambda must be >= 0");
  }
  if (!(cfg.tol > 0.0)) {
    throw DomainError("tol must be > 0");
  }
  const std::size_t n = targets.size();
  if (n == 0) return {};
  if (cfg.affinity_k >= n) {
    throw DomainError("affinity_k = " + std::to_string(cfg.affinity_k) +
                      " must be smaller than the " + std::to_string(n) +
                      " target points");
  }

  const Normalization norm = cfg.ss.normalize;
  std::array<Vec, 2> centroids;
  for (Label label : {Label::Member, Label::NonMember}) {
    std::vector<Vec> pts;
    for (const auto& r : support[index(label)]) {
      pts.push_back(prepare(r, representation, norm));
    }
    centroids[index(label)] =
        centroid(pts, norm, support[index(label)].front().features.size());
  }

  std::vector<Vec> points;
  points.reserve(n);
  for (const auto& t : targets) {
    points.push_back(prepare(t, representation, norm));
    if (points.back().size() != centroids[0].size()) {
      throw DomainError("target '" + t.example_id +
                        "' dimension differs from the support");
    }
  }

  // Unary term: distance of every target to each class centroid.
  std::vector<std::array<double, 2>> unary(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < 2; ++c) {
      unary[i][c] = distance(points[i], centroids[c], cfg.ss.metric);
    }
  }

  // Binary k-NN affinity, symmetrized with max(W, W^T), zero diagonal.
  std::vector<std::vector<std::size_t>> neighbors(n);
  {
    std::vector<std::vector<char>> w(n, std::vector<char>(n, 0));
    std::vector<std::pair<double, std::size_t>> d;
    for (std::size_t i = 0; i < n; ++i) {
      d.clear();
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) d.emplace_back(distance(points[i], points[j], cfg.ss.metric), j);
      }
      std::partial_sort(d.begin(), d.begin() + static_cast<long>(cfg.affinity_k),
                        d.end());
      for (std::size_t m = 0; m < cfg.affinity_k; ++m) {
        w[i][d[m].second] = 1;
        w[d[m].second][i] = 1;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (w[i][j]) neighbors[i].push_back(j);
      }
    }
  }

  const auto member = index(Label::Member);
  const auto nonmember = index(Label::NonMember);
  std::vector<double> y(n);  // member probability; nonmember is 1 - y
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = member_probability(-unary[i][member], -unary[i][nonmember]);
  }

  LaplacianResult result;
  std::vector<double> next(n);
  for (std::size_t it = 0; it < cfg.max_iters; ++it) {
    double max_change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double pull_member = 0.0;
      double pull_nonmember = 0.0;
      for (std::size_t j : neighbors[i]) {
        pull_member += y[j];
        pull_nonmember += 1.0 - y[j];
      }
      next[i] = member_probability(-unary[i][member] + cfg.lambda * pull_member,
                                   -unary[i][nonmember] +
                                       cfg.lambda * pull_nonmember);
      max_change = std::max(max_change, std::abs(next[i] - y[i]));
    }
    y.swap(next);
    result.iterations = it + 1;
    if (max_change < cfg.tol) {
      result.converged = true;
      break;
    }
  }
  if (cfg.max_iters == 0) result.converged = true;

  result.scores = tag(targets, y);
  return result;
}

LaplacianResult score_laplacianshot(const Episode& episode,
                                    const LsConfig& cfg,
                                    const Representation& representation) {
  const auto targets = flatten(episode.query);
  return score_laplacianshot(episode.support, targets, cfg, representation);
}

ScoringOutcome score_targets(const AttackParams& params,
                             const ClassSplit& support,
                             std::span<const ScoreRecord> targets,
                             const Representation& representation) {
  struct Visitor {
    const ClassSplit& support;
    std::span<const ScoreRecord> targets;
    const Representation& rep;

    ScoringOutcome operator()(const ThresholdConfig&) const {
      return {score_global_threshold(targets), true};
    }
    ScoringOutcome operator()(const SsConfig& cfg) const {
      return {score_simpleshot(support, targets, cfg, rep), true};
    }
    ScoringOutcome operator()(const LsConfig& cfg) const {
      auto r = score_laplacianshot(support, targets, cfg, rep);
      return {std::move(r.scores), r.converged};
    }
  };
  return std::visit(Visitor{support, targets, representation}, params);
}

EpisodeScores score_episode(const AttackParams& params, const Episode& episode,
                            const Representation& representation) {
  auto targets = flatten(episode.validation);
  const std::size_t n_validation = targets.size();
  const auto query = flatten(episode.query);
  targets.insert(targets.end(), query.begin(), query.end());

  auto outcome = score_targets(params, episode.support, targets, representation);
  EpisodeScores out;
  out.converged = outcome.converged;
  const auto split = outcome.scores.begin() + static_cast<long>(n_validation);
  out.validation.assign(std::make_move_iterator(outcome.scores.begin()),
                        std::make_move_iterator(split));
  out.query.assign(std::make_move_iterator(split),
                   std::make_move_iterator(outcome.scores.end()));
  return out;
}

double calibrate_threshold(const MembershipScores& validation,
                           Count fp_budget) {
  std::vector<double> negatives;
  for (const auto& s : validation) {
    if (s.label == Label::NonMember) negatives.push_back(s.score);
  }
  if (negatives.size() < fp_budget + 1) {
    throw CapacityError("calibration needs at least " +
                        std::to_string(fp_budget + 1) + " non-members, got " +
                        std::to_string(negatives.size()));
  }
  std::sort(negatives.begin(), negatives.end(), std::greater<>());

  // Every non-member strictly above `cut` sits among the first fp_budget.
  const double cut = negatives[fp_budget];
  std::optional<double> above;
  for (std::size_t j = fp_budget; j-- > 0;) {
    if (negatives[j] > cut) {
      above = negatives[j];
      break;
    }
  }
  if (above) {
    const double mid = cut + (*above - cut) / 2.0;
    return mid > cut ? mid : *above;
  }
  return std::nextafter(cut, std::numeric_limits<double>::infinity());
}

ConfusionCounts evaluate_episode(const MembershipScores& scores,
                                 double threshold) {
  ConfusionCounts counts;
  for (const auto& s : scores) {
    const bool predicted_member = s.score >= threshold;
    if (s.label == Label::Member) {
      ++(predicted_member ? counts.tp : counts.fn);
    } else {
      ++(predicted_member ? counts.fp : counts.tn);
    }
  }
  return counts;
}

double validation_leakage(const AttackParams& params, const Episode& episode,
                          const Representation& representation) {
  const auto scores = score_episode(params, episode, representation);
  const double t = calibrate_threshold(scores.validation, 0);
  const auto counts = evaluate_episode(scores.validation, t);
  return tp_log_ratio(counts.tp, counts.positives());
}

std::size_t search_hyperparameters(std::span<const AttackParams> grid,
                                   const Episode& episode,
                                   const Representation& representation) {
  if (grid.empty()) {
    throw DomainError("hyperparameter grid is empty");
  }
  if (grid.size() == 1) return 0;
  std::size_t best = 0;
  double best_value = -1.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = validation_leakage(grid[i], episode, representation);
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }
  return best;
}

std::vector<std::size_t> feasible_indices(std::span<const AttackParams> grid,
                                          const ClassSplit& support) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (const auto* ss = std::get_if<SsConfig>(&grid[i]);
        ss && ss->k_neighbors &&
        *ss->k_neighbors > reference_set_size(support, *ss)) {
      continue;
    }
    out.push_back(i);
  }
  return out;
}

}  // namespace mia
