// mia-audit: membership-inference leakage measurement from the command line.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "mia/errors.hpp"

namespace {

using namespace mia;
using namespace mia::cli;

void maybe_write(const std::optional<std::string>& out,
                 const nlohmann::json& report) {
  if (out) {
    write_report(*out, report);
    std::cout << "report written to " << *out << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Membership-inference leakage audit toolkit"};
  app.set_version_flag("--version", std::string(kToolkitVersion));
  app.require_subcommand(1);

  std::string rounding = "floor";
  std::optional<std::string> out_path;

  // reinterpret
  ReinterpretOptions reinterpret_opts;
  std::string roc_path;
  auto* reinterpret_cmd = app.add_subcommand(
      "reinterpret", "Log-scale reading of published TPR-at-low-FPR operating points");
  reinterpret_cmd->add_option("--roc", roc_path, "ROC table (attack,dataset,fpr,tpr)")
      ->required();
  reinterpret_cmd->add_option("--positives", reinterpret_opts.positives,
                              "Members in the attacked test set")
      ->capture_default_str();
  reinterpret_cmd->add_option("--negatives", reinterpret_opts.negatives,
                              "Non-members in the attacked test set")
      ->capture_default_str();
  reinterpret_cmd->add_option("--rounding", rounding, "floor|ceil|nearest")
      ->capture_default_str();
  reinterpret_cmd->add_option("--out", out_path, "Write the JSON audit report here");

  // evaluate
  EvaluateOptions eval_opts;
  std::string dump_path, attack = "ss";
  std::optional<std::string> config_path, stream_out;
  auto* evaluate_cmd = app.add_subcommand(
      "evaluate", "Run few-shot membership attacks over sampled episodes");
  evaluate_cmd->add_option("--dump", dump_path, "Score dump")->required();
  evaluate_cmd->add_option("--attack", attack, "threshold|ss|ls")->capture_default_str();
  evaluate_cmd->add_option("--shots", eval_opts.spec.shots, "Support shots per class (1|5|10)")
      ->capture_default_str();
  evaluate_cmd->add_flag("--allow-any-shots", eval_opts.spec.allow_any_shots,
                         "Accept shot counts outside {1,5,10}");
  evaluate_cmd->add_option("--query-shots", eval_opts.spec.query_shots)->capture_default_str();
  evaluate_cmd->add_option("--validation-shots", eval_opts.spec.validation_shots)
      ->capture_default_str();
  evaluate_cmd->add_option("--trials", eval_opts.trials)->capture_default_str();
  evaluate_cmd->add_option("--seed", eval_opts.seed)->capture_default_str();
  evaluate_cmd->add_option("--threads", eval_opts.threads, "0 = all cores")
      ->capture_default_str();
  evaluate_cmd->add_option("--rounding", rounding, "floor|ceil|nearest")
      ->capture_default_str();
  evaluate_cmd->add_option("--config", config_path, "Attack configuration (JSON)");
  evaluate_cmd->add_option("--emit-stream", stream_out,
                           "Also write per-episode scores as a score stream");
  evaluate_cmd->add_option("--out", out_path, "Write the JSON audit report here");

  // score-stream
  ScoreStreamOptions stream_opts;
  std::string stream_path;
  auto* stream_cmd = app.add_subcommand(
      "score-stream", "Measure externally scored episodes");
  stream_cmd->add_option("--stream", stream_path, "Score stream file")->required();
  stream_cmd->add_option("--rounding", rounding, "floor|ceil|nearest")
      ->capture_default_str();
  stream_cmd->add_option("--out", out_path, "Write the JSON audit report here");

  // simulate
  SimulateOptions sim_opts;
  std::string sim_out;
  auto* simulate_cmd = app.add_subcommand("simulate", "Write a synthetic score dump");
  auto& s = sim_opts.spec;
  simulate_cmd->add_option("--out", sim_out, "Dump path")->required();
  simulate_cmd->add_option("--members", s.n_members)->capture_default_str();
  simulate_cmd->add_option("--nonmembers", s.n_nonmembers)->capture_default_str();
  simulate_cmd->add_option("--member-loss-mean", s.member_loss.mean)->capture_default_str();
  simulate_cmd->add_option("--member-loss-std", s.member_loss.stddev)->capture_default_str();
  simulate_cmd->add_option("--nonmember-loss-mean", s.nonmember_loss.mean)
      ->capture_default_str();
  simulate_cmd->add_option("--nonmember-loss-std", s.nonmember_loss.stddev)
      ->capture_default_str();
  simulate_cmd->add_option("--feature-dim", s.feature_dim)->capture_default_str();
  simulate_cmd->add_option("--feature-shift", s.feature_shift)->capture_default_str();
  simulate_cmd->add_option("--seed", s.seed)->capture_default_str();
  simulate_cmd->add_option("--victim", sim_opts.victim)->capture_default_str();

  // plot-data
  std::string report_path;
  auto* plot_cmd = app.add_subcommand(
      "plot-data", "Per-trial ratios and alpha/beta bands as CSV");
  plot_cmd->add_option("--report", report_path, "Audit report from evaluate or score-stream")
      ->required();
  plot_cmd->add_option("--out", out_path, "CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_code(ErrorKind::Validation);
  }

  try {
    const Rounding mode = parse_rounding(rounding);
    if (*reinterpret_cmd) {
      reinterpret_opts.roc = roc_path;
      reinterpret_opts.rounding = mode;
      maybe_write(out_path, cmd_reinterpret(reinterpret_opts, std::cout));
    } else if (*evaluate_cmd) {
      eval_opts.dump = dump_path;
      eval_opts.attack = parse_attack_kind(attack);
      eval_opts.rounding = mode;
      if (config_path) eval_opts.config = *config_path;
      if (stream_out) eval_opts.emit_stream = *stream_out;
      maybe_write(out_path, cmd_evaluate(eval_opts, std::cout));
    } else if (*stream_cmd) {
      stream_opts.stream = stream_path;
      stream_opts.rounding = mode;
      maybe_write(out_path, cmd_score_stream(stream_opts, std::cout));
    } else if (*simulate_cmd) {
      sim_opts.out = sim_out;
      cmd_simulate(sim_opts, std::cout);
    } else if (*plot_cmd) {
      if (out_path) {
        std::ofstream csv(*out_path);
        if (!csv) throw ValidationError("cannot write '" + *out_path + "'");
        cmd_plotdata(report_path, csv);
      } else {
        cmd_plotdata(report_path, std::cout);
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
