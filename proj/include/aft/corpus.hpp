#pragma once

// Scored translation corpora: data model, dedup/filtering, the line-delimited
// JSON interchange format and MQM ingestion.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aft/mqm.hpp"

namespace aft::corpus {

struct ScoredTranslation {
  std::string seg_id;
  std::string target;
  std::optional<std::string> system;
  std::optional<double> logp_y_given_x;
  std::optional<double> logp_x_given_y;
  std::optional<double> logp_y;
  std::optional<double> accuracy;
  std::optional<double> fluency;

  friend bool operator==(const ScoredTranslation&, const ScoredTranslation&) = default;
};

struct SegmentGroup {
  std::string seg_id;
  std::string source;
  std::vector<ScoredTranslation> translations;

  friend bool operator==(const SegmentGroup&, const SegmentGroup&) = default;
};

struct Corpus {
  std::string name;
  std::string lang_pair;
  std::vector<SegmentGroup> segments;

  std::size_t translation_count() const;
  friend bool operator==(const Corpus&, const Corpus&) = default;
};

inline constexpr std::size_t kDefaultMinUnique = 4;

struct FilterReport {
  std::size_t segments_in = 0;
  std::size_t segments_kept = 0;
  std::size_t segments_dropped = 0;
  std::size_t duplicates_removed = 0;
  // identical targets whose model log-probs disagreed; first occurrence kept
  std::size_t logprob_conflicts = 0;
};

struct FilterResult {
  Corpus corpus;
  FilterReport report;
};

/// Collapses duplicate targets within each segment and drops segments with
/// fewer than `min_unique` distinct targets.
FilterResult dedup_and_filter(const Corpus& corpus, std::size_t min_unique = kDefaultMinUnique);

/// Canonical number text: up to 9 significant digits, no trailing zeros.
std::string format_number(double value);

void write_interchange(const Corpus& corpus, std::ostream& out);
/// Writes atomically (temp file + rename). `header` lines are emitted as
/// leading '#' comments.
void write_interchange(const Corpus& corpus, const std::filesystem::path& path,
                       const std::vector<std::string>& header = {});

/// Parses the interchange format. Lines starting with '#' and blank lines are
/// skipped. Throws InputFormatError naming the line and field.
Corpus read_interchange(std::istream& in);
Corpus read_interchange(const std::filesystem::path& path);

struct MqmLoadReport {
  std::size_t rows = 0;
  std::size_t targets_scored = 0;
  std::size_t duplicates_merged = 0;
  std::size_t source_conflicts = 0;
  mqm::ScoreDiagnostics scoring;
};

struct MqmLoadResult {
  Corpus corpus;
  MqmLoadReport report;
};

/// Reads a tab-separated MQM annotation file (header row required), scores
/// each (system, seg_id) target and merges identical targets per segment.
MqmLoadResult load_mqm_tsv(std::istream& in, const mqm::ErrorWeightTable& weights = {},
                           std::string name = {}, std::string lang_pair = {});
MqmLoadResult load_mqm_tsv(const std::filesystem::path& path,
                           const mqm::ErrorWeightTable& weights = {}, std::string name = {},
                           std::string lang_pair = {});

}  // namespace aft::corpus
