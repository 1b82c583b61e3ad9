#pragma once

// Segment- and corpus-level tradeoff analysis over scored corpora.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aft/corpus.hpp"
#include "aft/gaussian.hpp"
#include "aft/stats.hpp"

namespace aft::tradeoff {

enum class Field { LogpYGivenX, LogpXGivenY, LogpY, Accuracy, Fluency };

std::string_view field_name(Field f);
std::optional<double> field_value(const corpus::ScoredTranslation& tr, Field f);

/// Which pair of columns plays the accuracy and fluency role.
struct AxisPair {
  enum class Tag { Model, Human };
  Tag tag;
  Field first_axis;
  Field second_axis;

  static AxisPair model() { return {Tag::Model, Field::LogpXGivenY, Field::LogpY}; }
  static AxisPair human() { return {Tag::Human, Field::Accuracy, Field::Fluency}; }
  std::string_view name() const { return tag == Tag::Model ? "model" : "human"; }
};

struct TradeoffResult {
  std::string seg_id;
  std::optional<double> rho;  // nullopt when an axis is constant
  std::size_t n = 0;
};

/// Pearson correlation between the two axes across the group's translations.
/// Throws MissingField naming the segment and field if any value is absent.
TradeoffResult segment_tradeoff(const corpus::SegmentGroup& group, AxisPair axis);

struct TradeoffDistribution {
  std::vector<TradeoffResult> results;
  double fraction_negative = 0.0;  // over defined rhos
  std::size_t defined = 0;
  std::size_t undefined = 0;
};

TradeoffDistribution tradeoff_distribution(const corpus::Corpus& corpus, AxisPair axis);

/// Per segment, the mean correlation over k random re-pairings of the two
/// axes. Segment i uses the substream derived from (seed, i).
std::vector<std::optional<double>> null_distribution(const corpus::Corpus& corpus, AxisPair axis,
                                                     std::size_t k, std::uint64_t seed);

/// Paired t-test over segments where both values are defined.
/// Throws LengthMismatch or InsufficientData (< 2 defined pairs).
stats::TTestResult test_against_null(const std::vector<std::optional<double>>& actual,
                                     const std::vector<std::optional<double>>& null);

struct Correlation {
  double r = 0.0;
  double p = 1.0;
  std::size_t n = 0;
};

/// Pearson over all translations pooled across segments.
Correlation corpus_pooled_correlation(const corpus::Corpus& corpus, AxisPair axis);

struct CorpusReport {
  AxisPair axis;
  std::vector<TradeoffResult> segment_rhos;
  std::vector<std::optional<double>> null_rhos;
  double fraction_negative = 0.0;
  std::size_t defined = 0;
  std::size_t undefined = 0;
  std::optional<double> median_rho;
  Correlation pooled;
  std::optional<stats::TTestResult> ttest_vs_null;
  std::string ttest_note;  // why the t-test is absent, if it is
  bool simpson = false;
  std::optional<stats::DensityCurve> density;
  std::optional<stats::DensityCurve> null_density;
};

struct VerdictOptions {
  double alpha = 0.05;
  std::size_t permutations = 1;
  std::uint64_t seed = 0;
};

/// Simpson's paradox holds when the pooled correlation is positive and
/// significant at alpha while the median segment correlation is negative.
CorpusReport simpson_verdict(const corpus::Corpus& corpus, AxisPair axis,
                             const VerdictOptions& options = {});

struct CrossMetricCell {
  Field metric;
  Field human;
  Correlation correlation;
};

/// Correlation of each model log-prob with each human score after pooled
/// percentile ranking.
std::vector<CrossMetricCell> cross_metric_correlations(const corpus::Corpus& corpus);

/// Pearson between two per-segment tradeoff measures over pairs defined on
/// both sides.
Correlation correlate_tradeoff_measures(const std::vector<std::optional<double>>& model_rhos,
                                        const std::vector<std::optional<double>>& human_rhos);

struct RerankWeights {
  double w_accuracy = 1.0;
  double w_fluency = 1.0;

  void validate() const;
};

/// Translations in descending order of w_accuracy * logp_x_given_y +
/// w_fluency * logp_y; ties keep their original order.
std::vector<corpus::ScoredTranslation> rerank(const corpus::SegmentGroup& group,
                                              const RerankWeights& weights);

/// Builds a corpus from the simulator: each source becomes one segment whose
/// translations are its top-fraction candidates by log p(y|x). Human score
/// fields are left empty.
corpus::Corpus synthetic_corpus(const gaussian::SimulationConfig& config, std::size_t dim);

}  // namespace aft::tradeoff
