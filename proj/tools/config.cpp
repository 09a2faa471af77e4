#include <fstream>
#include <set>
#include <string>

#include "commands.hpp"
#include "mia/errors.hpp"

namespace mia::cli {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
  if (!obj.is_object()) {
    throw ValidationError("config: '" + where + "' must be an object");
  }
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) {
      throw ValidationError("config: unknown key '" + key + "' in '" + where + "'");
    }
  }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(std::string("config: bad value for '") + key + "'");
  }
}

Normalization parse_normalization(const std::string& s) {
  if (s == "l2") return Normalization::L2;
  if (s == "none") return Normalization::None;
  throw ValidationError("config: normalize must be 'l2' or 'none'");
}

Metric parse_metric(const std::string& s) {
  if (s == "euclidean") return Metric::Euclidean;
  if (s == "cosine") return Metric::Cosine;
  throw ValidationError("config: metric must be 'euclidean' or 'cosine'");
}

Weighting parse_weighting(const std::string& s) {
  if (s == "inverse_distance") return Weighting::InverseDistance;
  if (s == "uniform") return Weighting::Uniform;
  throw ValidationError("config: weighting must be 'inverse_distance' or 'uniform'");
}

const char* name(Normalization n) { return n == Normalization::L2 ? "l2" : "none"; }
const char* name(Metric m) { return m == Metric::Euclidean ? "euclidean" : "cosine"; }
const char* name(Weighting w) {
  return w == Weighting::InverseDistance ? "inverse_distance" : "uniform";
}

std::optional<std::size_t> parse_k(const json& value) {
  if (value.is_string() && value.get<std::string>() == "all") return std::nullopt;
  if (value.is_number_unsigned() && value.get<std::size_t>() >= 1) {
    return value.get<std::size_t>();
  }
  throw ValidationError("config: neighbour counts must be integers >= 1 or \"all\"");
}

json k_json(const std::optional<std::size_t>& k) {
  return k ? json(*k) : json("all");
}

SsConfig ss_from(const json& obj, SsConfig base) {
  base.include_centroids = get_or(obj, "include_centroids", base.include_centroids);
  base.normalize = parse_normalization(
      get_or<std::string>(obj, "normalize", name(base.normalize)));
  base.metric = parse_metric(get_or<std::string>(obj, "metric", name(base.metric)));
  base.weighting = parse_weighting(
      get_or<std::string>(obj, "weighting", name(base.weighting)));
  base.epsilon = get_or(obj, "epsilon", base.epsilon);
  if (!(base.epsilon > 0.0)) throw ValidationError("config: epsilon must be > 0");
  return base;
}

json ss_fields(const SsConfig& c) {
  return {{"k_neighbors", k_json(c.k_neighbors)},
          {"include_centroids", c.include_centroids},
          {"normalize", name(c.normalize)},
          {"metric", name(c.metric)},
          {"weighting", name(c.weighting)},
          {"epsilon", c.epsilon}};
}

}  // namespace

AttackPlan plan_from_json(AttackKind kind, const json& config) {
  reject_unknown(config, {"representation", "ss", "ls"}, "<root>");
  AttackPlan plan = default_plan(kind);

  if (config.contains("representation")) {
    const auto& rep = config.at("representation");
    reject_unknown(rep, {"append_loss"}, "representation");
    plan.representation.append_loss =
        get_or(rep, "append_loss", plan.representation.append_loss);
  }

  if (kind == AttackKind::SimpleShot && config.contains("ss")) {
    const auto& obj = config.at("ss");
    reject_unknown(obj,
                   {"k_grid", "include_centroids", "normalize", "metric",
                    "weighting", "epsilon"},
                   "ss");
    const SsConfig base = ss_from(obj, SsConfig{});
    std::vector<std::optional<std::size_t>> ks = {1, 3, 5, std::nullopt};
    if (obj.contains("k_grid")) {
      ks.clear();
      for (const auto& v : obj.at("k_grid")) ks.push_back(parse_k(v));
    }
    plan.grid.clear();
    for (const auto& k : ks) {
      SsConfig c = base;
      c.k_neighbors = k;
      plan.grid.emplace_back(c);
    }
  }

  if (kind == AttackKind::LaplacianShot && config.contains("ls")) {
    const auto& obj = config.at("ls");
    reject_unknown(obj,
                   {"lambda_grid", "affinity_k", "max_iters", "tol", "normalize",
                    "metric"},
                   "ls");
    LsConfig base;
    base.ss = ss_from(obj, SsConfig{});
    base.affinity_k = get_or(obj, "affinity_k", base.affinity_k);
    base.max_iters = get_or(obj, "max_iters", base.max_iters);
    base.tol = get_or(obj, "tol", base.tol);
    if (base.affinity_k == 0) throw ValidationError("config: affinity_k must be >= 1");
    if (!(base.tol > 0.0)) throw ValidationError("config: tol must be > 0");
    std::vector<double> lambdas = {0.1, 0.5, 1.0};
    if (obj.contains("lambda_grid")) {
      lambdas = get_or<std::vector<double>>(obj, "lambda_grid", {});
    }
    plan.grid.clear();
    for (double lambda : lambdas) {
      if (!(lambda >= 0.0)) throw ValidationError("config: lambda must be >= 0");
      LsConfig c = base;
      c.lambda = lambda;
      plan.grid.emplace_back(c);
    }
  }

  if (plan.grid.empty()) {
    throw ValidationError("config: hyperparameter grid is empty");
  }
  return plan;
}

AttackPlan load_plan(AttackKind kind,
                     const std::optional<std::filesystem::path>& config) {
  if (!config) return default_plan(kind);
  std::ifstream in(*config);
  if (!in) {
    throw ParseError(ParseErrorKind::MissingFile,
                     "cannot open config '" + config->string() + "'");
  }
  json parsed;
  try {
    parsed = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(ParseErrorKind::Malformed,
                     "config '" + config->string() + "': " + e.what());
  }
  return plan_from_json(kind, parsed);
}

json to_json(const AttackPlan& plan) {
  json grid = json::array();
  for (const auto& params : plan.grid) {
    if (std::holds_alternative<ThresholdConfig>(params)) {
      grid.push_back({{"score", "negative_loss"}});
    } else if (const auto* ss = std::get_if<SsConfig>(&params)) {
      grid.push_back(ss_fields(*ss));
    } else {
      const auto& ls = std::get<LsConfig>(params);
      grid.push_back({{"lambda", ls.lambda},
                      {"affinity_k", ls.affinity_k},
                      {"max_iters", ls.max_iters},
                      {"tol", ls.tol},
                      {"normalize", name(ls.ss.normalize)},
                      {"metric", name(ls.ss.metric)}});
    }
  }
  return {{"kind", std::string(to_string(plan.kind))},
          {"representation", {{"append_loss", plan.representation.append_loss}}},
          {"grid", grid}};
}

}  // namespace mia::cli
