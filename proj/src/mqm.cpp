#include "aft/mqm.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_map>

#include "aft/error.hpp"

namespace aft::mqm {
namespace {

std::string lower_trimmed(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  std::string out(s.substr(first, last - first + 1));
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string top_level(std::string_view category) {
  return lower_trimmed(category.substr(0, category.find('/')));
}

bool is_punctuation(std::string_view category) {
  const auto slash = category.find('/');
  if (slash == std::string_view::npos) return false;
  return top_level(category) == "fluency" && lower_trimmed(category.substr(slash + 1)) == "punctuation";
}

}  // namespace

void ErrorWeightTable::validate() const {
  if (!(punctuation_penalty > 0.0 && punctuation_penalty < minor_penalty &&
        minor_penalty < major_penalty)) {
    throw Error("error weights must satisfy 0 < punctuation < minor < major");
  }
}

std::string_view to_string(ErrorClass c) {
  switch (c) {
    case ErrorClass::Accuracy: return "accuracy";
    case ErrorClass::Fluency: return "fluency";
    case ErrorClass::NonTranslation: return "non-translation";
    case ErrorClass::Neutral: return "neutral";
    case ErrorClass::Unmapped: return "unmapped";
  }
  return "unmapped";
}

ErrorClass classify_category(std::string_view category) {
  std::string top = top_level(category);
  // WMT files spell it "Non-translation!"
  if (!top.empty() && top.back() == '!') top.pop_back();

  if (top.empty() || top == "no-error" || top == "no error") return ErrorClass::Neutral;
  if (top == "accuracy") return ErrorClass::Accuracy;
  if (top == "fluency" || top == "terminology" || top == "style" || top == "locale convention") {
    return ErrorClass::Fluency;
  }
  if (top == "non-translation") return ErrorClass::NonTranslation;
  return ErrorClass::Unmapped;
}

Severity parse_severity(std::string_view severity) {
  const std::string s = lower_trimmed(severity);
  if (s == "major") return Severity::Major;
  if (s == "minor") return Severity::Minor;
  if (s.empty() || s == "neutral" || s == "no-error" || s == "no error") return Severity::Neutral;
  throw InputFormatError("unknown MQM severity '" + std::string(severity) + "'");
}

double penalty(std::string_view category, std::string_view severity,
               const ErrorWeightTable& weights) {
  const Severity sev = parse_severity(severity);
  if (classify_category(category) == ErrorClass::Neutral) return 0.0;
  if (is_punctuation(category)) return weights.punctuation_penalty;
  switch (sev) {
    case Severity::Major: return weights.major_penalty;
    case Severity::Minor: return weights.minor_penalty;
    case Severity::Neutral: return 0.0;
  }
  return 0.0;
}

namespace {

// Penalties are tallied as counts so the total does not depend on record order.
struct PenaltyTally {
  std::size_t major = 0;
  std::size_t minor = 0;
  std::size_t punctuation = 0;

  double total(const ErrorWeightTable& w) const {
    return static_cast<double>(major) * w.major_penalty +
           static_cast<double>(minor) * w.minor_penalty +
           static_cast<double>(punctuation) * w.punctuation_penalty;
  }
};

double clamp_score(double total_penalty) {
  return std::clamp(QualityScore::kMaxScore - total_penalty, 0.0, QualityScore::kMaxScore);
}

}  // namespace

QualityScore score_target(std::span<const MqmRecord> records, const ErrorWeightTable& weights,
                          ScoreDiagnostics& diagnostics) {
  if (records.empty()) throw InsufficientData("score_target: no records");

  PenaltyTally accuracy, fluency;
  bool non_translation = false;
  for (const MqmRecord& rec : records) {
    const Severity sev = parse_severity(rec.severity);
    const ErrorClass cls = classify_category(rec.category);
    if (cls == ErrorClass::NonTranslation) {
      non_translation = true;
      continue;
    }
    if (cls == ErrorClass::Unmapped) {
      ++diagnostics.unmapped_errors;
      continue;
    }
    if (cls == ErrorClass::Neutral || sev == Severity::Neutral) continue;

    PenaltyTally& tally = cls == ErrorClass::Accuracy ? accuracy : fluency;
    if (is_punctuation(rec.category)) {
      ++tally.punctuation;
    } else if (sev == Severity::Major) {
      ++tally.major;
    } else {
      ++tally.minor;
    }
  }

  if (non_translation) {
    ++diagnostics.non_translation_targets;
    return {0.0, 0.0};
  }
  return {clamp_score(accuracy.total(weights)), clamp_score(fluency.total(weights))};
}

QualityScore score_target(std::span<const MqmRecord> records, const ErrorWeightTable& weights) {
  ScoreDiagnostics ignored;
  return score_target(records, weights, ignored);
}

std::vector<ScoredTarget> average_duplicates(std::span<const ScoredTarget> scored) {
  struct Accum {
    double accuracy = 0.0;
    double fluency = 0.0;
    std::size_t count = 0;
  };
  std::vector<std::string> order;
  std::unordered_map<std::string, Accum> sums;
  for (const auto& [text, score] : scored) {
    auto [it, inserted] = sums.try_emplace(text);
    if (inserted) order.push_back(text);
    it->second.accuracy += score.accuracy;
    it->second.fluency += score.fluency;
    ++it->second.count;
  }

  std::vector<ScoredTarget> out;
  out.reserve(order.size());
  for (auto& text : order) {
    const Accum& a = sums.at(text);
    const auto n = static_cast<double>(a.count);
    out.emplace_back(std::move(text), QualityScore{a.accuracy / n, a.fluency / n});
  }
  return out;
}

}  // namespace aft::mqm
