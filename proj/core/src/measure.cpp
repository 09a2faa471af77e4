#include "mia/measure.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mia/errors.hpp"

namespace mia {

namespace {

// Shared by tp_log_ratio, alpha and beta so that alpha(P) and
// tp_log_ratio(1, P) compare equal bit for bit.
double log_ratio(Count numerator_plus_one, Count positive_size) {
  return std::log(static_cast<double>(numerator_plus_one)) /
         std::log(static_cast<double>(positive_size) + 1.0);
}

void require_positive_size(Count positive_size, const char* fn) {
  if (positive_size == 0) {
    throw DomainError(std::string(fn) + ": positive class size must be >= 1");
  }
}

}  // namespace

std::string_view to_string(Regime regime) noexcept {
  return regime == Regime::A ? "A" : "B";
}

std::string_view to_string(Severity severity) noexcept {
  switch (severity) {
    case Severity::None:
      return "none";
    case Severity::Moderate:
      return "moderate";
    case Severity::Severe:
      return "severe";
  }
  return "none";
}

std::string_view to_string(Rounding rounding) noexcept {
  switch (rounding) {
    case Rounding::Floor:
      return "floor";
    case Rounding::Ceil:
      return "ceil";
    case Rounding::Nearest:
      return "nearest";
  }
  return "floor";
}

Rounding parse_rounding(std::string_view text) {
  if (text == "floor") return Rounding::Floor;
  if (text == "ceil") return Rounding::Ceil;
  if (text == "nearest") return Rounding::Nearest;
  throw ValidationError("unknown rounding mode '" + std::string(text) +
                        "' (expected floor, ceil or nearest)");
}

RocCurve::RocCurve(std::vector<RocPoint> points, Count positive_size,
                   Count negative_size)
    : points_(std::move(points)),
      positive_size_(positive_size),
      negative_size_(negative_size) {
  if (points_.empty()) {
    throw DomainError("ROC curve needs at least one point");
  }
  if (positive_size_ == 0 || negative_size_ == 0) {
    throw DomainError("ROC curve needs non-empty positive and negative sets");
  }
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const auto& p = points_[i];
    if (!(p.fpr >= 0.0 && p.fpr <= 1.0 && p.tpr >= 0.0 && p.tpr <= 1.0)) {
      throw DomainError("ROC point " + std::to_string(i) +
                        " lies outside [0,1]");
    }
    if (i > 0 && !(p.fpr > points_[i - 1].fpr)) {
      throw DomainError("ROC points must be strictly increasing in fpr");
    }
  }
}

double tp_log_ratio(Count tp, Count positive_size) {
  require_positive_size(positive_size, "tp_log_ratio");
  if (tp > positive_size) {
    throw DomainError("tp_log_ratio: tp (" + std::to_string(tp) +
                      ") exceeds positive class size (" +
                      std::to_string(positive_size) + ")");
  }
  return log_ratio(tp + 1, positive_size);
}

double alpha(Count positive_size) {
  require_positive_size(positive_size, "alpha");
  return log_ratio(2, positive_size);
}

Count fp_budget(Count test_size, Rounding rounding) {
  if (test_size == 0) {
    throw DomainError("fp_budget: test size must be >= 1");
  }
  const double raw = std::log(static_cast<double>(test_size));
  switch (rounding) {
    case Rounding::Floor:
      return static_cast<Count>(std::floor(raw));
    case Rounding::Ceil:
      return static_cast<Count>(std::ceil(raw));
    case Rounding::Nearest:
      return static_cast<Count>(std::llround(raw));
  }
  return static_cast<Count>(std::floor(raw));
}

double beta(Count fp_budget, Count positive_size) {
  require_positive_size(positive_size, "beta");
  return log_ratio(fp_budget + 2, positive_size);
}

Severity classify(Regime regime, double value, double alpha,
                  std::optional<double> beta) {
  if (regime == Regime::A) {
    return value >= alpha ? Severity::Severe : Severity::None;
  }
  if (!beta) {
    throw DomainError("classify: Regime B requires beta");
  }
  if (alpha > *beta) {
    throw DomainError("classify: alpha must not exceed beta");
  }
  if (value >= *beta) return Severity::Severe;
  if (value >= alpha) return Severity::Moderate;
  return Severity::None;
}

double interpolate_tpr(const RocCurve& curve, double target_fpr) {
  const auto& pts = curve.points();
  if (!(target_fpr >= pts.front().fpr && target_fpr <= pts.back().fpr)) {
    throw RangeError("target fpr " + std::to_string(target_fpr) +
                     " outside curve knots [" + std::to_string(pts.front().fpr) +
                     ", " + std::to_string(pts.back().fpr) + "]");
  }
  // First knot with fpr >= target.
  auto hi = std::lower_bound(
      pts.begin(), pts.end(), target_fpr,
      [](const RocPoint& p, double fpr) { return p.fpr < fpr; });
  if (hi->fpr == target_fpr) return hi->tpr;
  auto lo = std::prev(hi);
  const double t = (target_fpr - lo->fpr) / (hi->fpr - lo->fpr);
  return lo->tpr + t * (hi->tpr - lo->tpr);
}

Count tp_from_rate(double tpr, Count positive_size) {
  const auto tp = static_cast<Count>(
      std::llround(tpr * static_cast<double>(positive_size)));
  return std::min(tp, positive_size);
}

std::pair<LeakageReport, LeakageReport> reinterpret(const RocCurve& curve,
                                                    Rounding rounding) {
  const auto& pts = curve.points();
  const Count positives = curve.positive_size();
  const Count negatives = curve.negative_size();
  const Count test_size = positives + negatives;

  if (pts.size() < 2) {
    throw RangeError("reinterpret needs a zero-FP knot and a higher knot");
  }
  if (pts.front().fpr * static_cast<double>(negatives) >= 1.0) {
    throw RangeError("first knot (fpr " + std::to_string(pts.front().fpr) +
                     ") does not correspond to zero false positives");
  }

  const double a = alpha(positives);

  LeakageReport regime_a;
  regime_a.regime = Regime::A;
  regime_a.alpha = a;
  regime_a.positive_size = positives;
  regime_a.test_size = test_size;
  regime_a.true_positives = tp_from_rate(pts.front().tpr, positives);
  regime_a.tp_log_ratio = tp_log_ratio(*regime_a.true_positives, positives);
  regime_a.severity = classify(Regime::A, regime_a.tp_log_ratio, a);

  LeakageReport regime_b;
  regime_b.regime = Regime::B;
  regime_b.alpha = a;
  regime_b.fp_budget = fp_budget(test_size, rounding);
  regime_b.beta = beta(regime_b.fp_budget, positives);
  regime_b.positive_size = positives;
  regime_b.test_size = test_size;
  const double target_fpr = static_cast<double>(regime_b.fp_budget) /
                            static_cast<double>(negatives);
  regime_b.true_positives =
      tp_from_rate(interpolate_tpr(curve, target_fpr), positives);
  regime_b.tp_log_ratio = tp_log_ratio(*regime_b.true_positives, positives);
  regime_b.severity =
      classify(Regime::B, regime_b.tp_log_ratio, a, regime_b.beta);

  return {regime_a, regime_b};
}

}  // namespace mia
