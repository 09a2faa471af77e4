#include "commands.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "mia/errors.hpp"
#include "mia/formats.hpp"
#include "mia/trials.hpp"

namespace mia::cli {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

json base_report(const char* command) {
  return {{"toolkit_version", kToolkitVersion}, {"command", command}};
}

json to_json(const EpisodeSpec& spec) {
  return {{"ways", EpisodeSpec::kWays},
          {"shots", spec.shots},
          {"query_shots", spec.query_shots},
          {"validation_shots", spec.validation_shots}};
}

json to_json(const LeakageReport& r) {
  json j = {{"regime", std::string(to_string(r.regime))},
            {"tp_log_ratio", r.tp_log_ratio},
            {"ci_halfwidth", r.ci_halfwidth},
            {"alpha", r.alpha},
            {"fp_budget", r.fp_budget},
            {"positive_size", r.positive_size},
            {"test_size", r.test_size},
            {"severity", std::string(to_string(r.severity))}};
  j["beta"] = r.beta ? json(*r.beta) : json(nullptr);
  if (r.true_positives) j["true_positives"] = *r.true_positives;
  return j;
}

json to_json(const AggregateReport& r) {
  json j = to_json(r.leakage);
  j["n_trials"] = r.n_trials;
  return j;
}

json trials_json(const TrialsResult& result) {
  json trials = json::array();
  for (const auto& t : result.trials) {
    const auto& m = t.measurement;
    trials.push_back({{"index", t.index},
                      {"seed", t.seed},
                      {"regime_a", m.value_a},
                      {"regime_b", m.value_b},
                      {"tp_a", m.counts_a.tp},
                      {"fp_a", m.counts_a.fp},
                      {"tp_b", m.counts_b.tp},
                      {"fp_b", m.counts_b.fp},
                      {"threshold_a", m.threshold_a},
                      {"threshold_b", m.threshold_b}});
  }
  return trials;
}

const char* marker(Severity s) {
  switch (s) {
    case Severity::Severe:
      return "[severe]";
    case Severity::Moderate:
      return "[moderate]";
    case Severity::None:
      break;
  }
  return "";
}

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

void render_aggregate(std::ostream& out, const TrialsResult& result) {
  for (const auto* r : {&result.regime_a, &result.regime_b}) {
    const auto& l = r->leakage;
    out << "Regime " << to_string(l.regime) << ": " << fixed(l.tp_log_ratio, 3)
        << " +/- " << fixed(l.ci_halfwidth, 3) << "  alpha=" << fixed(l.alpha, 3);
    if (l.beta) {
      out << " beta=" << fixed(*l.beta, 3) << " fp_budget=" << l.fp_budget;
    }
    out << "  severity=" << to_string(l.severity) << '\n';
  }
}

json aggregate_report(const char* command, const TrialsResult& result) {
  json report = base_report(command);
  report["episode_spec"] = to_json(result.regime_a.spec);
  report["n_trials"] = result.trials.size();
  report["regimes"] = json::array(
      {to_json(result.regime_a), to_json(result.regime_b)});
  report["trials"] = trials_json(result);
  return report;
}

// Re-throws a toolkit error with the ROC row id prefixed.
[[noreturn]] void rethrow_with_row(const Error& e, const std::string& id) {
  const std::string msg = "row '" + id + "': " + e.what();
  switch (e.kind()) {
    case ErrorKind::Range:
      throw RangeError(msg);
    case ErrorKind::Domain:
      throw DomainError(msg);
    default:
      throw Error(e.kind(), msg);
  }
}

}  // namespace

json stable_payload(json report) {
  report.erase("duration_seconds");
  return report;
}

void write_report(const std::filesystem::path& path, const json& report) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  out << report.dump(2) << '\n';
}

json cmd_reinterpret(const ReinterpretOptions& options, std::ostream& out) {
  const auto start = Clock::now();
  if (options.positives == 0 || options.negatives == 0) {
    throw ValidationError("--positives and --negatives must be >= 1");
  }
  const auto rows = parse_roc_table(options.roc);

  json report = base_report("reinterpret");
  report["input_digest"] = "sha256:" + sha256_file(options.roc);
  report["positive_size"] = options.positives;
  report["negative_size"] = options.negatives;
  report["rounding"] = std::string(to_string(options.rounding));

  json out_rows = json::array();
  std::ostringstream table;
  table << std::left << std::setw(16) << "attack" << std::setw(10) << "dataset"
        << std::setw(20) << "regime A" << "regime B\n";

  std::optional<LeakageReport> last_b;
  for (const auto& row : rows) {
    std::pair<LeakageReport, LeakageReport> result;
    try {
      const RocCurve curve(row.points, options.positives, options.negatives);
      result = reinterpret(curve, options.rounding);
    } catch (const Error& e) {
      rethrow_with_row(e, row.id());
    }
    const auto& [a, b] = result;
    json curve = json::array();
    for (const auto& p : row.points) curve.push_back({{"fpr", p.fpr}, {"tpr", p.tpr}});
    out_rows.push_back({{"id", row.id()},
                        {"attack", row.attack},
                        {"dataset", row.dataset},
                        {"curve", curve},
                        {"regime_a", to_json(a)},
                        {"regime_b", to_json(b)}});
    table << std::setw(16) << row.attack << std::setw(10) << row.dataset
          << std::setw(20) << (fixed(a.tp_log_ratio, 2) + " " + marker(a.severity))
          << fixed(b.tp_log_ratio, 3) << ' ' << marker(b.severity) << '\n';
    last_b = b;
  }
  report["rows"] = out_rows;

  if (last_b) {
    table << "alpha=" << fixed(last_b->alpha, 3) << "  beta=" << fixed(*last_b->beta, 3)
          << "  fp_budget=" << last_b->fp_budget << " (" << to_string(options.rounding)
          << ")\n";
  }
  out << table.str();
  report["duration_seconds"] = seconds_since(start);
  return report;
}

json cmd_evaluate(const EvaluateOptions& options, std::ostream& out) {
  const auto start = Clock::now();
  options.spec.validate();
  if (options.trials == 0) throw ValidationError("--trials must be >= 1");
  const AttackPlan plan = load_plan(options.attack, options.config);

  const ScoreDump dump = parse_dump(options.dump);

  TrialOptions trial_options;
  trial_options.n_trials = options.trials;
  trial_options.master_seed = options.seed;
  trial_options.threads = options.threads;
  trial_options.rounding = options.rounding;
  trial_options.keep_scores = options.emit_stream.has_value();
  const TrialsResult result =
      run_trials(plan, dump.records, options.spec, trial_options);

  if (options.emit_stream) {
    std::ofstream stream(*options.emit_stream);
    if (!stream) {
      throw ValidationError("cannot write '" + options.emit_stream->string() + "'");
    }
    write_stream_header(stream, options.spec);
    for (const auto& t : result.trials) {
      write_stream_episode(stream, {t.index, t.seed, t.validation_scores,
                                    t.query_scores});
    }
  }

  json report = aggregate_report("evaluate", result);
  report["input_digest"] = "sha256:" + sha256_file(options.dump);
  report["inputs"] = {{"dump", options.dump.string()},
                      {"victim", dump.victim},
                      {"records", dump.records.size()},
                      {"seed", options.seed},
                      {"allow_any_shots", options.spec.allow_any_shots},
                      {"rounding", std::string(to_string(options.rounding))}};
  report["attack"] = to_json(plan);
  json trace = json::array();
  std::size_t unconverged = 0;
  for (const auto& t : result.trials) {
    trace.push_back({{"index", t.index},
                     {"config_index", t.config_index},
                     {"converged", t.converged}});
    unconverged += !t.converged;
  }
  report["attack_trace"] = trace;

  out << "attack=" << to_string(plan.kind) << " shots=" << options.spec.shots
      << " trials=" << options.trials << " seed=" << options.seed << '\n';
  render_aggregate(out, result);
  if (unconverged > 0) {
    out << "warning: " << unconverged
        << " trial(s) hit max_iters before converging\n";
  }
  report["duration_seconds"] = seconds_since(start);
  return report;
}

json cmd_score_stream(const ScoreStreamOptions& options, std::ostream& out) {
  const auto start = Clock::now();
  const ScoreStream stream = parse_stream(options.stream);
  if (stream.episodes.empty()) {
    throw ParseError(ParseErrorKind::Malformed, "score stream holds no episodes");
  }

  std::vector<TrialResult> trials;
  trials.reserve(stream.episodes.size());
  for (const auto& e : stream.episodes) {
    TrialResult t;
    t.index = e.index;
    t.seed = e.seed;
    t.measurement = measure_episode(e.validation, e.query, options.rounding);
    trials.push_back(std::move(t));
  }
  const TrialsResult result =
      aggregate(std::move(trials), stream.spec, options.rounding);

  json report = aggregate_report("score-stream", result);
  report["input_digest"] = "sha256:" + sha256_file(options.stream);
  report["inputs"] = {{"stream", options.stream.string()},
                      {"rounding", std::string(to_string(options.rounding))}};

  out << "episodes=" << result.trials.size() << " shots=" << stream.spec.shots
      << '\n';
  render_aggregate(out, result);
  report["duration_seconds"] = seconds_since(start);
  return report;
}

json cmd_simulate(const SimulateOptions& options, std::ostream& out) {
  const auto records = generate(options.spec);
  ScoreDump dump{options.spec.feature_dim, options.victim, records};
  write_dump(options.out, dump);

  const auto& s = options.spec;
  json report = base_report("simulate");
  report["output"] = options.out.string();
  report["output_digest"] = "sha256:" + sha256_file(options.out);
  report["synth"] = {{"n_members", s.n_members},
                     {"n_nonmembers", s.n_nonmembers},
                     {"member_loss", {{"mean", s.member_loss.mean}, {"stddev", s.member_loss.stddev}}},
                     {"nonmember_loss",
                      {{"mean", s.nonmember_loss.mean}, {"stddev", s.nonmember_loss.stddev}}},
                     {"feature_dim", s.feature_dim},
                     {"feature_shift", s.feature_shift},
                     {"seed", s.seed}};
  out << "wrote " << records.size() << " records to " << options.out.string()
      << " (seed " << s.seed << ")\n";
  return report;
}

void plotdata_from_json(const json& report, std::ostream& out) {
  if (!report.is_object() || !report.contains("trials") ||
      !report.at("trials").is_array() || report.at("trials").empty()) {
    throw ValidationError("report holds no per-trial values to plot");
  }
  const json* regime_b = nullptr;
  if (report.contains("regimes")) {
    for (const auto& r : report.at("regimes")) {
      if (r.value("regime", "") == "B") regime_b = &r;
    }
  }
  if (!regime_b || !regime_b->contains("alpha") || !(*regime_b)["beta"].is_number()) {
    throw ValidationError("report lacks Regime B alpha/beta bands");
  }
  try {
    out << "kind,label,regime_a,regime_b\n";
    for (const auto& t : report.at("trials")) {
      out << "trial," << t.at("index").get<std::size_t>() << ','
          << format_double(t.at("regime_a").get<double>()) << ','
          << format_double(t.at("regime_b").get<double>()) << '\n';
    }
    const double a = regime_b->at("alpha").get<double>();
    const double b = regime_b->at("beta").get<double>();
    out << "band,alpha," << format_double(a) << ',' << format_double(a) << '\n';
    out << "band,beta,," << format_double(b) << '\n';
  } catch (const json::exception& e) {
    throw ParseError(ParseErrorKind::Malformed,
                     std::string("report trial entry: ") + e.what());
  }
}

void cmd_plotdata(const std::filesystem::path& report, std::ostream& out) {
  std::ifstream in(report);
  if (!in) {
    throw ParseError(ParseErrorKind::MissingFile,
                     "cannot open '" + report.string() + "'");
  }
  json parsed;
  try {
    parsed = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(ParseErrorKind::Malformed,
                     "report '" + report.string() + "': " + e.what());
  }
  plotdata_from_json(parsed, out);
}

}  // namespace mia::cli
