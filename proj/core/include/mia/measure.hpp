#pragma once

// Log-scale leakage measure: TP log-ratio, significance thresholds, the
// false-positive budget, severity classification, and reinterpretation of
// published (FPR, TPR) operating points.

#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

namespace mia {

using Count = std::uint64_t;

struct ConfusionCounts {
  Count tp = 0;
  Count fp = 0;
  Count tn = 0;
  Count fn = 0;

  Count positives() const noexcept { return tp + fn; }
  Count negatives() const noexcept { return fp + tn; }

  friend bool operator==(const ConfusionCounts&,
                         const ConfusionCounts&) = default;
};

enum class Regime { A, B };
enum class Severity { None, Moderate, Severe };
enum class Rounding { Floor, Ceil, Nearest };

std::string_view to_string(Regime regime) noexcept;
std::string_view to_string(Severity severity) noexcept;
std::string_view to_string(Rounding rounding) noexcept;
/// Accepts "floor", "ceil", "nearest". Throws ValidationError otherwise.
Rounding parse_rounding(std::string_view text);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

/// Published ROC operating points of one attack on one dataset.
/// Points are strictly increasing in fpr and lie in [0,1]^2.
class RocCurve {
 public:
  /// Throws DomainError when the invariants do not hold.
  RocCurve(std::vector<RocPoint> points, Count positive_size,
           Count negative_size);

  const std::vector<RocPoint>& points() const noexcept { return points_; }
  Count positive_size() const noexcept { return positive_size_; }
  Count negative_size() const noexcept { return negative_size_; }

 private:
  std::vector<RocPoint> points_;
  Count positive_size_;
  Count negative_size_;
};

struct LeakageReport {
  Regime regime = Regime::A;
  double tp_log_ratio = 0.0;
  double ci_halfwidth = 0.0;
  double alpha = 0.0;
  std::optional<double> beta;  // Regime B only
  Count fp_budget = 0;         // always 0 in Regime A
  Count positive_size = 0;
  Count test_size = 0;
  Severity severity = Severity::None;
  std::optional<Count> true_positives;  // set for point (non-averaged) reports
};

/// ln(tp+1) / ln(positive_size+1). Throws DomainError when positive_size is 0
/// or tp exceeds it.
double tp_log_ratio(Count tp, Count positive_size);

/// Smallest non-zero TP log-ratio: ln 2 / ln(positive_size+1).
double alpha(Count positive_size);

/// Allowed false positives for a membership test set: rounding of
/// ln(test_size). Floor is the default mode.
Count fp_budget(Count test_size, Rounding rounding = Rounding::Floor);

/// Severe-leakage threshold of Regime B: ln(fp_budget+2) / ln(positive_size+1).
double beta(Count fp_budget, Count positive_size);

/// Regime A: Severe iff value >= alpha, else None.
/// Regime B: Severe iff value >= beta, Moderate iff value in [alpha, beta),
/// else None. Throws DomainError when beta is missing in Regime B or
/// alpha > beta.
Severity classify(Regime regime, double value, double alpha,
                  std::optional<double> beta = std::nullopt);

/// Piecewise-linear TPR at target_fpr; exact at knots. Throws RangeError
/// outside [first knot fpr, last knot fpr].
double interpolate_tpr(const RocCurve& curve, double target_fpr);

/// TP count nearest to tpr * positive_size.
Count tp_from_rate(double tpr, Count positive_size);

/// Builds the Regime A and Regime B reports for a published curve. The first
/// knot must sit at zero false positives (fpr * negatives < 1) and a second
/// knot must exist. Regime B interpolates at
/// fpr = fp_budget(P+N) / N.
std::pair<LeakageReport, LeakageReport> reinterpret(
    const RocCurve& curve, Rounding rounding = Rounding::Floor);

}  // namespace mia
