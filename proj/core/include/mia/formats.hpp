#pragma once

// Line-oriented, tab-separated text formats.
//
// Score dump:
//   mia-dump <TAB> v1 <TAB> feature_dim=<D> <TAB> victim=<free text>
//   <example_id> <TAB> member|nonmember <TAB> <loss> <TAB> <f_1> ... <TAB> <f_D>
//
// Score stream (externally scored episodes):
//   mia-stream <TAB> v1 <TAB> shots=<K> <TAB> query=<q> <TAB> validation=<v>
//   episode <TAB> <index> <TAB> <seed>
//   validation <TAB> <example_id> <TAB> <label> <TAB> <score>   (2v lines)
//   query <TAB> <example_id> <TAB> <label> <TAB> <score>        (2q lines)
//   end
//
// ROC table (CSV with header "attack,dataset,fpr,tpr", one knot per row,
// '#' comment lines allowed). Knots of one (attack, dataset) pair may span
// several rows and are grouped in order of first appearance.
//
// Blank lines are ignored everywhere. Numbers are written in shortest
// round-trip form so parse(write(x)) reproduces x exactly.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "mia/attacks.hpp"
#include "mia/episodes.hpp"
#include "mia/measure.hpp"

namespace mia {

inline constexpr const char* kDumpMagic = "mia-dump";
inline constexpr const char* kStreamMagic = "mia-stream";
inline constexpr const char* kFormatVersion = "v1";

struct ScoreDump {
  std::size_t feature_dim = 0;
  std::string victim;
  std::vector<ScoreRecord> records;

  friend bool operator==(const ScoreDump&, const ScoreDump&) = default;
};

/// Strict parse. Throws ParseError carrying the 1-based line of the first bad
/// record and one of MissingFile, VersionMismatch, DimensionMismatch,
/// UnknownLabel or Malformed.
ScoreDump parse_dump(const std::filesystem::path& path);
ScoreDump parse_dump(std::istream& in);

void write_dump(std::ostream& out, const ScoreDump& dump);
void write_dump(const std::filesystem::path& path, const ScoreDump& dump);

struct StreamEpisode {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  MembershipScores validation;
  MembershipScores query;

  friend bool operator==(const StreamEpisode&, const StreamEpisode&) = default;
};

struct ScoreStream {
  EpisodeSpec spec;
  std::vector<StreamEpisode> episodes;
};

ScoreStream parse_stream(const std::filesystem::path& path);
ScoreStream parse_stream(std::istream& in);

void write_stream_header(std::ostream& out, const EpisodeSpec& spec);
void write_stream_episode(std::ostream& out, const StreamEpisode& episode);
void write_stream(std::ostream& out, const ScoreStream& stream);

struct RocRow {
  std::string attack;
  std::string dataset;
  std::vector<RocPoint> points;

  std::string id() const { return attack + "/" + dataset; }
};

std::vector<RocRow> parse_roc_table(const std::filesystem::path& path);
std::vector<RocRow> parse_roc_table(std::istream& in);

/// Shortest round-trip decimal form of a double.
std::string format_double(double value);

/// Hex SHA-256 of a file's bytes. Throws ParseError(MissingFile).
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_hex(const std::string& bytes);

}  // namespace mia
