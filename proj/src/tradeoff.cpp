#include "aft/tradeoff.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "aft/error.hpp"
#include "aft/random.hpp"

namespace aft::tradeoff {

using corpus::Corpus;
using corpus::ScoredTranslation;
using corpus::SegmentGroup;

std::string_view field_name(Field f) {
  switch (f) {
    case Field::LogpYGivenX: return "logp_y_given_x";
    case Field::LogpXGivenY: return "logp_x_given_y";
    case Field::LogpY: return "logp_y";
    case Field::Accuracy: return "accuracy";
    case Field::Fluency: return "fluency";
  }
  return "?";
}

std::optional<double> field_value(const ScoredTranslation& tr, Field f) {
  switch (f) {
    case Field::LogpYGivenX: return tr.logp_y_given_x;
    case Field::LogpXGivenY: return tr.logp_x_given_y;
    case Field::LogpY: return tr.logp_y;
    case Field::Accuracy: return tr.accuracy;
    case Field::Fluency: return tr.fluency;
  }
  return std::nullopt;
}

namespace {

std::vector<double> column(const SegmentGroup& group, Field f) {
  std::vector<double> out;
  out.reserve(group.translations.size());
  for (const auto& tr : group.translations) {
    auto v = field_value(tr, f);
    if (!v) {
      throw MissingField("segment '" + group.seg_id + "': translation is missing field '" +
                         std::string(field_name(f)) + "'");
    }
    out.push_back(*v);
  }
  return out;
}

}  // namespace

TradeoffResult segment_tradeoff(const SegmentGroup& group, AxisPair axis) {
  const auto first = column(group, axis.first_axis);
  const auto second = column(group, axis.second_axis);
  if (first.size() < 2) {
    throw InsufficientData("segment '" + group.seg_id + "': needs at least 2 translations");
  }
  return {group.seg_id, stats::try_pearson(first, second), first.size()};
}

TradeoffDistribution tradeoff_distribution(const Corpus& corpus, AxisPair axis) {
  TradeoffDistribution dist;
  std::size_t negative = 0;
  for (const auto& seg : corpus.segments) {
    TradeoffResult r = segment_tradeoff(seg, axis);
    if (r.rho) {
      ++dist.defined;
      if (*r.rho < 0.0) ++negative;
    } else {
      ++dist.undefined;
    }
    dist.results.push_back(std::move(r));
  }
  dist.fraction_negative =
      dist.defined == 0 ? 0.0 : static_cast<double>(negative) / static_cast<double>(dist.defined);
  return dist;
}

std::vector<std::optional<double>> null_distribution(const Corpus& corpus, AxisPair axis,
                                                     std::size_t k, std::uint64_t seed) {
  if (k == 0) throw Error("null_distribution: k must be positive");
  std::vector<std::optional<double>> out;
  out.reserve(corpus.segments.size());
  for (std::size_t s = 0; s < corpus.segments.size(); ++s) {
    const SegmentGroup& seg = corpus.segments[s];
    stats::PairedSample sample{column(seg, axis.first_axis), column(seg, axis.second_axis)};
    if (!stats::try_pearson(sample.first, sample.second)) {
      out.emplace_back();
      continue;
    }
    double sum = 0.0;
    for (std::size_t rep = 0; rep < k; ++rep) {
      const auto shuffled = stats::shuffle_pairing(sample, derive_seed(seed, {s, rep}));
      // a permutation keeps both vectors non-constant
      sum += stats::pearson(shuffled);
    }
    out.emplace_back(sum / static_cast<double>(k));
  }
  return out;
}

stats::TTestResult test_against_null(const std::vector<std::optional<double>>& actual,
                                     const std::vector<std::optional<double>>& null) {
  if (actual.size() != null.size()) {
    throw LengthMismatch("test_against_null: " + std::to_string(actual.size()) + " actual vs " +
                         std::to_string(null.size()) + " null values");
  }
  std::vector<double> a, b;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (actual[i] && null[i]) {
      a.push_back(*actual[i]);
      b.push_back(*null[i]);
    }
  }
  if (a.size() < 2) throw InsufficientData("test_against_null: fewer than 2 defined pairs");
  return stats::paired_t_test(a, b);
}

Correlation corpus_pooled_correlation(const Corpus& corpus, AxisPair axis) {
  std::vector<double> first, second;
  for (const auto& seg : corpus.segments) {
    auto f = column(seg, axis.first_axis);
    auto s = column(seg, axis.second_axis);
    first.insert(first.end(), f.begin(), f.end());
    second.insert(second.end(), s.begin(), s.end());
  }
  Correlation c;
  c.n = first.size();
  c.r = stats::pearson(first, second);
  c.p = c.n >= 3 ? stats::correlation_p_value(c.r, c.n) : 1.0;
  return c;
}

CorpusReport simpson_verdict(const Corpus& corpus, AxisPair axis, const VerdictOptions& options) {
  if (!(options.alpha > 0.0 && options.alpha < 1.0)) throw Error("alpha must be in (0, 1)");

  CorpusReport report{axis, {}, {}, 0.0, 0, 0, std::nullopt, {}, std::nullopt, {}, false,
                      std::nullopt, std::nullopt};
  TradeoffDistribution dist = tradeoff_distribution(corpus, axis);
  report.segment_rhos = std::move(dist.results);
  report.fraction_negative = dist.fraction_negative;
  report.defined = dist.defined;
  report.undefined = dist.undefined;
  report.pooled = corpus_pooled_correlation(corpus, axis);
  report.null_rhos = null_distribution(corpus, axis, options.permutations, options.seed);

  std::vector<std::optional<double>> actual;
  std::vector<double> defined_rhos;
  for (const auto& r : report.segment_rhos) {
    actual.push_back(r.rho);
    if (r.rho) defined_rhos.push_back(*r.rho);
  }
  if (!defined_rhos.empty()) {
    report.median_rho = stats::median(defined_rhos);
    report.density = stats::kde(defined_rhos);
  }
  std::vector<double> null_defined;
  for (const auto& v : report.null_rhos) {
    if (v) null_defined.push_back(*v);
  }
  if (!null_defined.empty()) report.null_density = stats::kde(null_defined);

  try {
    report.ttest_vs_null = test_against_null(actual, report.null_rhos);
  } catch (const Error& e) {
    report.ttest_note = e.what();
  }

  report.simpson = report.pooled.r > 0.0 && report.pooled.p < options.alpha &&
                   report.median_rho.has_value() && *report.median_rho < 0.0;
  return report;
}

std::vector<CrossMetricCell> cross_metric_correlations(const Corpus& corpus) {
  constexpr Field kMetrics[] = {Field::LogpYGivenX, Field::LogpXGivenY, Field::LogpY};
  constexpr Field kHuman[] = {Field::Accuracy, Field::Fluency};

  auto pooled_ranks = [&](Field f) {
    std::vector<double> values;
    for (const auto& seg : corpus.segments) {
      auto c = column(seg, f);
      values.insert(values.end(), c.begin(), c.end());
    }
    return stats::percentile_ranks(values);
  };

  std::vector<CrossMetricCell> cells;
  for (Field m : kMetrics) {
    const auto metric_ranks = pooled_ranks(m);
    for (Field h : kHuman) {
      const auto human_ranks = pooled_ranks(h);
      Correlation c;
      c.n = metric_ranks.size();
      c.r = stats::pearson(metric_ranks, human_ranks);
      c.p = c.n >= 3 ? stats::correlation_p_value(c.r, c.n) : 1.0;
      cells.push_back({m, h, c});
    }
  }
  return cells;
}

Correlation correlate_tradeoff_measures(const std::vector<std::optional<double>>& model_rhos,
                                        const std::vector<std::optional<double>>& human_rhos) {
  if (model_rhos.size() != human_rhos.size()) {
    throw LengthMismatch("correlate_tradeoff_measures: " + std::to_string(model_rhos.size()) +
                         " vs " + std::to_string(human_rhos.size()) + " segments");
  }
  std::vector<double> a, b;
  for (std::size_t i = 0; i < model_rhos.size(); ++i) {
    if (model_rhos[i] && human_rhos[i]) {
      a.push_back(*model_rhos[i]);
      b.push_back(*human_rhos[i]);
    }
  }
  if (a.size() < 2) throw InsufficientData("correlate_tradeoff_measures: fewer than 2 defined pairs");
  Correlation c;
  c.n = a.size();
  c.r = stats::pearson(a, b);
  c.p = c.n >= 3 ? stats::correlation_p_value(c.r, c.n) : 1.0;
  return c;
}

void RerankWeights::validate() const {
  if (!(w_accuracy >= 0.0 && w_fluency >= 0.0)) throw Error("rerank weights must be non-negative");
  if (w_accuracy == 0.0 && w_fluency == 0.0) throw Error("rerank weights must not both be zero");
}

std::vector<ScoredTranslation> rerank(const SegmentGroup& group, const RerankWeights& weights) {
  weights.validate();
  const auto accuracy = column(group, Field::LogpXGivenY);
  const auto fluency = column(group, Field::LogpY);

  std::vector<double> score(accuracy.size());
  for (std::size_t i = 0; i < score.size(); ++i) {
    score[i] = weights.w_accuracy * accuracy[i] + weights.w_fluency * fluency[i];
  }
  std::vector<std::size_t> order(score.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });

  std::vector<ScoredTranslation> out;
  out.reserve(order.size());
  for (std::size_t i : order) out.push_back(group.translations[i]);
  return out;
}

Corpus synthetic_corpus(const gaussian::SimulationConfig& config, std::size_t dim) {
  using namespace gaussian;
  config.validate();
  const JointGaussian joint(dim, dim, build_covariance(2 * dim, config.offdiag));
  const CandidateScorer scorer(joint);

  Corpus out;
  out.name = "gaussian-d" + std::to_string(dim);
  out.lang_pair = "x-y";
  for (std::size_t s = 0; s < config.n_sources; ++s) {
    const auto d = static_cast<std::uint64_t>(dim);
    const Vector x = sample_source(joint, derive_seed(config.seed, {d, s, 0}));
    const Matrix cand =
        sample_candidates(joint, config.n_candidates, derive_seed(config.seed, {d, s, 1}));
    const auto scores = scorer.score(x, cand);

    std::vector<double> translation(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) translation[i] = scores[i].logp_y_given_x;

    SegmentGroup seg;
    seg.seg_id = "src-" + std::to_string(s);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      seg.source += (i == 0 ? "" : " ") + corpus::format_number(x[i]);
    }
    for (std::size_t i : top_indices(translation, config.top_count())) {
      ScoredTranslation tr;
      tr.seg_id = seg.seg_id;
      tr.target = "cand-" + std::to_string(i);
      tr.logp_y_given_x = scores[i].logp_y_given_x;
      tr.logp_x_given_y = scores[i].logp_x_given_y;
      tr.logp_y = scores[i].logp_y;
      seg.translations.push_back(std::move(tr));
    }
    out.segments.push_back(std::move(seg));
  }
  return out;
}

}  // namespace aft::tradeoff
