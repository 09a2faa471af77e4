#include "mia/formats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string_view>
#include <unordered_set>

#include "mia/errors.hpp"

namespace mia {

namespace {

std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

bool blank(std::string_view s) { return trim(s).empty(); }

[[noreturn]] void malformed(const std::string& what, std::size_t line) {
  throw ParseError(ParseErrorKind::Malformed,
                   "line " + std::to_string(line) + ": " + what, line);
}

double parse_finite(std::string_view text, std::size_t line,
                    const char* field) {
  text = trim(text);
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    malformed(std::string("invalid ") + field + " '" + std::string(text) + "'",
              line);
  }
  return value;
}

std::uint64_t parse_count(std::string_view text, std::size_t line,
                          const char* field) {
  text = trim(text);
  std::uint64_t value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    malformed(std::string("invalid ") + field + " '" + std::string(text) + "'",
              line);
  }
  return value;
}

Label parse_label_at(std::string_view text, std::size_t line) {
  try {
    return parse_label(trim(text));
  } catch (const ParseError& e) {
    throw ParseError(ParseErrorKind::UnknownLabel,
                     "line " + std::to_string(line) + ": " + e.what(), line);
  }
}

// Value of a "key=value" header field.
std::string_view keyed(std::string_view field, std::string_view key,
                       std::size_t line) {
  field = trim(field);
  if (field.size() <= key.size() || field.substr(0, key.size()) != key ||
      field[key.size()] != '=') {
    malformed("expected '" + std::string(key) + "=...' in header", line);
  }
  return field.substr(key.size() + 1);
}

void check_magic_and_version(const std::vector<std::string_view>& fields,
                             std::string_view magic, std::size_t line) {
  if (fields.empty() || trim(fields[0]) != magic) {
    malformed("expected '" + std::string(magic) + "' header", line);
  }
  if (fields.size() < 2 || trim(fields[1]) != kFormatVersion) {
    const std::string got =
        fields.size() < 2 ? std::string("<none>") : std::string(trim(fields[1]));
    throw ParseError(ParseErrorKind::VersionMismatch,
                     "line " + std::to_string(line) + ": unsupported " +
                         std::string(magic) + " version '" + got +
                         "' (expected " + kFormatVersion + ")",
                     line);
  }
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError(ParseErrorKind::MissingFile,
                     "cannot open '" + path.string() + "'");
  }
  return in;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

// ---------------------------------------------------------------- dumps

ScoreDump parse_dump(std::istream& in) {
  ScoreDump dump;
  std::string raw;
  std::size_t line = 0;

  if (!std::getline(in, raw)) {
    malformed("missing dump header", 1);
  }
  ++line;
  {
    const auto fields = split(trim(raw), '\t');
    check_magic_and_version(fields, kDumpMagic, line);
    if (fields.size() < 3) malformed("header lacks feature_dim", line);
    dump.feature_dim = parse_count(keyed(fields[2], "feature_dim", line), line,
                                   "feature_dim");
    if (dump.feature_dim == 0) malformed("feature_dim must be >= 1", line);
    if (fields.size() >= 4) {
      // The victim description runs to the end of the line.
      const std::string_view header = trim(raw);
      const auto pos = header.find("victim=");
      if (pos == std::string_view::npos) malformed("expected 'victim=...'", line);
      dump.victim = std::string(header.substr(pos + 7));
    }
  }

  std::unordered_set<std::string> seen;
  while (std::getline(in, raw)) {
    ++line;
    if (blank(raw)) continue;
    const auto fields = split(trim(raw), '\t');
    if (fields.size() < 3) malformed("expected id, label, loss, features", line);

    ScoreRecord r;
    r.example_id = std::string(trim(fields[0]));
    if (r.example_id.empty()) malformed("empty example id", line);
    r.label = parse_label_at(fields[1], line);
    r.loss = parse_finite(fields[2], line, "loss");

    const std::size_t dim = fields.size() - 3;
    if (dim != dump.feature_dim) {
      throw ParseError(ParseErrorKind::DimensionMismatch,
                       "line " + std::to_string(line) + ": " +
                           std::to_string(dim) + " features, header declares " +
                           std::to_string(dump.feature_dim),
                       line);
    }
    r.features.reserve(dim);
    for (std::size_t i = 3; i < fields.size(); ++i) {
      r.features.push_back(parse_finite(fields[i], line, "feature"));
    }
    if (!seen.insert(r.example_id).second) {
      malformed("duplicate example id '" + r.example_id + "'", line);
    }
    dump.records.push_back(std::move(r));
  }
  return dump;
}

ScoreDump parse_dump(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse_dump(in);
}

void write_dump(std::ostream& out, const ScoreDump& dump) {
  out << kDumpMagic << '\t' << kFormatVersion << "\tfeature_dim="
      << dump.feature_dim << "\tvictim=" << dump.victim << '\n';
  for (const auto& r : dump.records) {
    out << r.example_id << '\t' << to_string(r.label) << '\t'
        << format_double(r.loss);
    for (double f : r.features) out << '\t' << format_double(f);
    out << '\n';
  }
}

void write_dump(const std::filesystem::path& path, const ScoreDump& dump) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  write_dump(out, dump);
}

// --------------------------------------------------------------- streams

ScoreStream parse_stream(std::istream& in) {
  ScoreStream stream;
  std::string raw;
  std::size_t line = 0;

  if (!std::getline(in, raw)) malformed("missing stream header", 1);
  ++line;
  {
    const auto fields = split(trim(raw), '\t');
    check_magic_and_version(fields, kStreamMagic, line);
    if (fields.size() != 5) {
      malformed("header needs shots, query and validation", line);
    }
    stream.spec.shots = parse_count(keyed(fields[2], "shots", line), line, "shots");
    stream.spec.query_shots =
        parse_count(keyed(fields[3], "query", line), line, "query");
    stream.spec.validation_shots =
        parse_count(keyed(fields[4], "validation", line), line, "validation");
    const auto k = stream.spec.shots;
    stream.spec.allow_any_shots = k != 1 && k != 5 && k != 10;
    try {
      stream.spec.validate();
    } catch (const ValidationError& e) {
      malformed(e.what(), line);
    }
  }

  auto check_block = [&](const MembershipScores& scores, std::size_t per_class,
                         const char* block, std::size_t at) {
    std::size_t members = 0;
    for (const auto& s : scores) members += s.label == Label::Member;
    if (members != per_class || scores.size() - members != per_class) {
      malformed(std::string(block) + " block must hold " +
                    std::to_string(per_class) + " scores per class",
                at);
    }
  };

  std::optional<StreamEpisode> current;
  while (std::getline(in, raw)) {
    ++line;
    if (blank(raw)) continue;
    const auto fields = split(trim(raw), '\t');
    const auto tag = trim(fields[0]);

    if (tag == "episode") {
      if (current) malformed("episode opened before 'end'", line);
      if (fields.size() != 3) malformed("expected 'episode<TAB>index<TAB>seed'", line);
      current.emplace();
      current->index = parse_count(fields[1], line, "episode index");
      current->seed = parse_count(fields[2], line, "seed");
    } else if (tag == "validation" || tag == "query") {
      if (!current) malformed("score line outside an episode", line);
      if (fields.size() != 4) malformed("expected tag, id, label, score", line);
      if (tag == "validation" && !current->query.empty()) {
        malformed("validation scores must precede query scores", line);
      }
      ScoredExample s{std::string(trim(fields[1])),
                      parse_label_at(fields[2], line),
                      parse_finite(fields[3], line, "score")};
      (tag == "query" ? current->query : current->validation)
          .push_back(std::move(s));
    } else if (tag == "end") {
      if (!current) malformed("'end' without an episode", line);
      if (current->validation.empty()) malformed("episode lacks a validation block", line);
      if (current->query.empty()) malformed("episode lacks a query block", line);
      check_block(current->validation, stream.spec.validation_shots, "validation", line);
      check_block(current->query, stream.spec.query_shots, "query", line);
      stream.episodes.push_back(std::move(*current));
      current.reset();
    } else {
      malformed("unknown record '" + std::string(tag) + "'", line);
    }
  }
  if (current) malformed("stream ends inside an episode", line);
  return stream;
}

ScoreStream parse_stream(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse_stream(in);
}

void write_stream_header(std::ostream& out, const EpisodeSpec& spec) {
  out << kStreamMagic << '\t' << kFormatVersion << "\tshots=" << spec.shots
      << "\tquery=" << spec.query_shots
      << "\tvalidation=" << spec.validation_shots << '\n';
}

void write_stream_episode(std::ostream& out, const StreamEpisode& episode) {
  out << "episode\t" << episode.index << '\t' << episode.seed << '\n';
  for (const auto& s : episode.validation) {
    out << "validation\t" << s.example_id << '\t' << to_string(s.label) << '\t'
        << format_double(s.score) << '\n';
  }
  for (const auto& s : episode.query) {
    out << "query\t" << s.example_id << '\t' << to_string(s.label) << '\t'
        << format_double(s.score) << '\n';
  }
  out << "end\n";
}

void write_stream(std::ostream& out, const ScoreStream& stream) {
  write_stream_header(out, stream.spec);
  for (const auto& e : stream.episodes) write_stream_episode(out, e);
}

// ------------------------------------------------------------ ROC tables

std::vector<RocRow> parse_roc_table(std::istream& in) {
  std::vector<RocRow> rows;
  std::string raw;
  std::size_t line = 0;
  bool header_seen = false;

  while (std::getline(in, raw)) {
    ++line;
    const auto text = trim(raw);
    if (text.empty() || text.front() == '#') continue;
    const auto fields = split(text, ',');
    if (!header_seen) {
      if (fields.size() != 4 || trim(fields[0]) != "attack" ||
          trim(fields[1]) != "dataset" || trim(fields[2]) != "fpr" ||
          trim(fields[3]) != "tpr") {
        malformed("expected header 'attack,dataset,fpr,tpr'", line);
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 4) malformed("expected 4 comma-separated fields", line);
    const std::string attack(trim(fields[0]));
    const std::string dataset(trim(fields[1]));
    if (attack.empty() || dataset.empty()) malformed("empty attack or dataset", line);
    const RocPoint point{parse_finite(fields[2], line, "fpr"),
                         parse_finite(fields[3], line, "tpr")};

    auto it = std::find_if(rows.begin(), rows.end(), [&](const RocRow& r) {
      return r.attack == attack && r.dataset == dataset;
    });
    if (it == rows.end()) {
      rows.push_back({attack, dataset, {}});
      it = std::prev(rows.end());
    }
    it->points.push_back(point);
  }
  if (!header_seen) malformed("empty ROC table", line == 0 ? 1 : line);
  return rows;
}

std::vector<RocRow> parse_roc_table(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse_roc_table(in);
}

}  // namespace mia
