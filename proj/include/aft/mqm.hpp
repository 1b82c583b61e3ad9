#pragma once

// Accuracy and fluency scores derived from MQM error annotations.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace aft::mqm {

struct MqmRecord {
  std::string system;
  std::string doc;
  std::string seg_id;
  std::string rater;
  std::string source;
  std::string target;
  std::string category;
  std::string severity;
};

struct QualityScore {
  double accuracy = kMaxScore;
  double fluency = kMaxScore;

  static constexpr double kMaxScore = 25.0;
  friend bool operator==(const QualityScore&, const QualityScore&) = default;
};

struct ErrorWeightTable {
  double major_penalty = 5.0;
  double minor_penalty = 1.0;
  double punctuation_penalty = 0.1;

  void validate() const;
};

enum class ErrorClass { Accuracy, Fluency, NonTranslation, Neutral, Unmapped };

enum class Severity { Major, Minor, Neutral };

std::string_view to_string(ErrorClass c);

/// Maps a slash-separated MQM category to the side it penalizes. Matching is
/// case-insensitive on the segment before the first '/'.
ErrorClass classify_category(std::string_view category);

/// Throws InputFormatError on anything other than major, minor, neutral,
/// no-error or an empty string.
Severity parse_severity(std::string_view severity);

double penalty(std::string_view category, std::string_view severity,
               const ErrorWeightTable& weights = {});

struct ScoreDiagnostics {
  std::size_t unmapped_errors = 0;
  std::size_t non_translation_targets = 0;
};

/// Scores one (system, seg_id) target from all raters' records. Penalties are
/// pooled across raters and clamped to [0, 25]; any Non-translation record
/// zeroes both sides. Throws InsufficientData on an empty list.
QualityScore score_target(std::span<const MqmRecord> records, const ErrorWeightTable& weights,
                          ScoreDiagnostics& diagnostics);
QualityScore score_target(std::span<const MqmRecord> records, const ErrorWeightTable& weights = {});

using ScoredTarget = std::pair<std::string, QualityScore>;

/// Merges byte-identical targets by averaging their scores, keeping the order
/// of first occurrence.
std::vector<ScoredTarget> average_duplicates(std::span<const ScoredTarget> scored);

}  // namespace aft::mqm
