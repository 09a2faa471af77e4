#pragma once

// Subcommands of mia-audit. Each returns the machine-readable audit report
// and writes a human-readable rendering to `out`.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

#include <json.hpp>

#include "mia/attacks.hpp"
#include "mia/episodes.hpp"
#include "mia/measure.hpp"
#include "mia/synth.hpp"

namespace mia::cli {

inline constexpr std::uint64_t kDefaultSeed = 20240601;

/// Attack plan for `kind`, overridden by the optional JSON config file.
/// Throws ValidationError on unknown keys or values.
AttackPlan load_plan(AttackKind kind,
                     const std::optional<std::filesystem::path>& config);
AttackPlan plan_from_json(AttackKind kind, const nlohmann::json& config);
nlohmann::json to_json(const AttackPlan& plan);

/// Removes the fields that legitimately differ between reruns
/// (duration_seconds).
nlohmann::json stable_payload(nlohmann::json report);

struct ReinterpretOptions {
  std::filesystem::path roc;
  Count positives = 25000;
  Count negatives = 25000;
  Rounding rounding = Rounding::Floor;
};

nlohmann::json cmd_reinterpret(const ReinterpretOptions& options,
                               std::ostream& out);

struct EvaluateOptions {
  std::filesystem::path dump;
  AttackKind attack = AttackKind::SimpleShot;
  EpisodeSpec spec;
  std::size_t trials = 500;
  std::uint64_t seed = kDefaultSeed;
  Rounding rounding = Rounding::Floor;
  std::optional<std::filesystem::path> config;
  std::size_t threads = 0;
  /// Also write the per-episode scores in score-stream format.
  std::optional<std::filesystem::path> emit_stream;
};

nlohmann::json cmd_evaluate(const EvaluateOptions& options, std::ostream& out);

struct ScoreStreamOptions {
  std::filesystem::path stream;
  Rounding rounding = Rounding::Floor;
};

nlohmann::json cmd_score_stream(const ScoreStreamOptions& options,
                                std::ostream& out);

struct SimulateOptions {
  SynthSpec spec;
  std::string victim = "synthetic gaussian victim";
  std::filesystem::path out;
};

/// Writes a synthetic dump and returns a short summary report.
nlohmann::json cmd_simulate(const SimulateOptions& options, std::ostream& out);

/// CSV: "kind,label,regime_a,regime_b"; one "trial" row per trial followed
/// by the alpha and beta band rows. Throws ValidationError when the report
/// holds no trials.
void cmd_plotdata(const std::filesystem::path& report, std::ostream& out);
void plotdata_from_json(const nlohmann::json& report, std::ostream& out);

/// Writes the report as indented JSON.
void write_report(const std::filesystem::path& path,
                  const nlohmann::json& report);

}  // namespace mia::cli
