#include "aft/cli.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "aft/corpus.hpp"
#include "aft/error.hpp"
#include "aft/gaussian.hpp"
#include "aft/io.hpp"
#include "aft/mqm.hpp"
#include "aft/tradeoff.hpp"

namespace aft::cli {
namespace fs = std::filesystem;

namespace {

struct SimulateArgs {
  gaussian::SimulationConfig config;
  std::string out;
};

struct ScoreArgs {
  std::string input;
  std::string out;
  std::string name;
  std::string lang_pair;
  mqm::ErrorWeightTable weights;
};

struct AnalyzeArgs {
  std::string input;
  std::string out;
  std::string axes = "model";
  std::size_t permutations = 1;
  std::uint64_t seed = 0;
  double alpha = 0.05;
  std::size_t min_unique = corpus::kDefaultMinUnique;
};

struct RerankArgs {
  std::string input;
  std::string out;
  tradeoff::RerankWeights weights;
};

std::string fmt(double v) { return corpus::format_number(v); }

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : ""; }

std::string header_line(const std::string& subcommand, const std::string& flags) {
  return std::string("# aft ") + kVersion + " " + subcommand + flags + "\n";
}

fs::path prepare_out(const std::string& out) {
  fs::path dir(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error("cannot create output directory " + out);
  return dir;
}

// Keys are written verbatim as the leading CSV field(s).
std::string density_table(const std::vector<std::pair<std::string, const stats::DensityCurve*>>& series,
                          const std::string& key_name) {
  std::string csv = key_name + ",x,density,bandwidth\n";
  for (const auto& [key, curve] : series) {
    if (curve == nullptr) continue;
    for (std::size_t i = 0; i < curve->grid.size(); ++i) {
      csv += key + "," + fmt(curve->grid[i]) + "," + fmt(curve->density[i]) + "," +
             fmt(curve->bandwidth) + "\n";
    }
  }
  return csv;
}

// --------------------------------------------------------------------------

int do_simulate(const SimulateArgs& a, std::ostream& out) {
  const auto& c = a.config;
  std::ostringstream flags;
  flags << " --dims";
  for (std::size_t d : c.dims) flags << " " << d;
  flags << " --n-sources " << c.n_sources << " --n-candidates " << c.n_candidates
        << " --top-fraction " << fmt(c.top_fraction) << " --offdiag " << fmt(c.offdiag)
        << " --seed " << c.seed << " --out " << a.out;
  const std::string header = header_line("simulate", flags.str());

  const auto results = gaussian::simulate_tradeoffs(c);
  const fs::path dir = prepare_out(a.out);

  std::string sources = header + "dim,source_index,logp_x,rho_top,rho_all\n";
  std::vector<std::string> keys;
  std::vector<std::vector<double>> columns;
  for (const auto& res : results) {
    std::vector<double> top, all;
    for (const auto& s : res.sources) {
      sources += std::to_string(res.dim) + "," + std::to_string(s.source_index) + "," +
                 fmt(s.logp_x) + "," + fmt(s.rho_top) + "," + fmt(s.rho_all) + "\n";
      if (s.rho_top) top.push_back(*s.rho_top);
      if (s.rho_all) all.push_back(*s.rho_all);
    }
    keys.push_back(std::to_string(res.dim) + ",rho_top");
    columns.push_back(std::move(top));
    keys.push_back(std::to_string(res.dim) + ",rho_all");
    columns.push_back(std::move(all));
  }
  io::write_atomic(dir / "sources.csv", sources);

  std::vector<stats::DensityCurve> curves;
  std::vector<std::pair<std::string, const stats::DensityCurve*>> series;
  curves.reserve(columns.size());
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].empty()) continue;
    curves.push_back(stats::kde(columns[i]));
    series.emplace_back(keys[i], &curves.back());
  }
  std::string density = density_table(series, "dim,column");
  io::write_atomic(dir / "density.csv", header + density);

  for (const auto& res : results) {
    if (res.dim != 1) continue;
    const double sigma_x = std::sqrt(gaussian::build_covariance(2, c.offdiag)(0, 0));
    std::string panels = header + "target_sigmas,source_index,x,logp_x,rho_top,rho_all\n";
    for (const auto& p : gaussian::select_panels(res, sigma_x)) {
      panels += fmt(p.target_sigmas) + "," + std::to_string(p.source->source_index) + "," +
                fmt(p.source->x[0]) + "," + fmt(p.source->logp_x) + "," + fmt(p.source->rho_top) +
                "," + fmt(p.source->rho_all) + "\n";
    }
    io::write_atomic(dir / "panels.csv", panels);
  }

  for (const auto& res : results) {
    double top = 0.0, all = 0.0;
    std::size_t nt = 0, na = 0, neg = 0;
    for (const auto& s : res.sources) {
      if (s.rho_top) { top += *s.rho_top; ++nt; neg += *s.rho_top < 0.0; }
      if (s.rho_all) { all += *s.rho_all; ++na; }
    }
    out << "dim " << res.dim << ": mean rho_top " << (nt ? fmt(top / nt) : "undefined")
        << ", mean rho_all " << (na ? fmt(all / na) : "undefined") << ", negative rho_top "
        << neg << "/" << nt << "\n";
  }
  return kOk;
}

int do_score(const ScoreArgs& a, std::ostream& out) {
  std::ostringstream flags;
  flags << " --input " << a.input;
  if (!a.name.empty()) flags << " --name " << a.name;
  if (!a.lang_pair.empty()) flags << " --lang-pair " << a.lang_pair;
  flags << " --major " << fmt(a.weights.major_penalty) << " --minor "
        << fmt(a.weights.minor_penalty) << " --punctuation " << fmt(a.weights.punctuation_penalty)
        << " --out " << a.out;
  const std::string header = header_line("score-mqm", flags.str());

  std::string name = a.name.empty() ? fs::path(a.input).stem().string() : a.name;
  auto loaded = corpus::load_mqm_tsv(fs::path(a.input), a.weights, name, a.lang_pair);
  const fs::path dir = prepare_out(a.out);

  std::ostringstream body;
  body << header;
  corpus::write_interchange(loaded.corpus, body);
  io::write_atomic(dir / "corpus.jsonl", body.str());

  const auto& r = loaded.report;
  std::ostringstream report;
  report << header << "rows: " << r.rows << "\ntargets_scored: " << r.targets_scored
         << "\nduplicates_merged: " << r.duplicates_merged << "\nsegments: "
         << loaded.corpus.segments.size() << "\ntranslations: "
         << loaded.corpus.translation_count() << "\nunmapped_errors: " << r.scoring.unmapped_errors
         << "\nnon_translation_targets: " << r.scoring.non_translation_targets
         << "\nsource_conflicts: " << r.source_conflicts << "\n";
  io::write_atomic(dir / "score_report.txt", report.str());

  out << "scored " << r.targets_scored << " targets into " << loaded.corpus.segments.size()
      << " segments\n";
  if (r.scoring.unmapped_errors > 0) {
    out << "warning: " << r.scoring.unmapped_errors << " errors in unmapped categories ignored\n";
  }
  if (r.source_conflicts > 0) {
    out << "warning: " << r.source_conflicts << " targets with inconsistent source text\n";
  }
  return kOk;
}

bool has_all_fields(const corpus::Corpus& c) {
  for (const auto& seg : c.segments) {
    for (const auto& tr : seg.translations) {
      if (!tr.logp_y_given_x || !tr.logp_x_given_y || !tr.logp_y || !tr.accuracy || !tr.fluency) {
        return false;
      }
    }
  }
  return !c.segments.empty();
}

int do_analyze(const AnalyzeArgs& a, std::ostream& out) {
  std::ostringstream flags;
  flags << " --input " << a.input << " --axes " << a.axes << " --permutations " << a.permutations
        << " --seed " << a.seed << " --alpha " << fmt(a.alpha) << " --min-unique " << a.min_unique
        << " --out " << a.out;
  const std::string header = header_line("analyze", flags.str());

  const auto axis = a.axes == "model" ? tradeoff::AxisPair::model() : tradeoff::AxisPair::human();
  const auto raw = corpus::read_interchange(fs::path(a.input));
  const auto filtered = corpus::dedup_and_filter(raw, a.min_unique);
  const auto& corpus = filtered.corpus;
  if (corpus.segments.empty()) {
    throw InsufficientData("no segments with at least " + std::to_string(a.min_unique) +
                           " unique translations");
  }

  const auto report = tradeoff::simpson_verdict(corpus, axis, {a.alpha, a.permutations, a.seed});
  const fs::path dir = prepare_out(a.out);

  std::string segments = header + "seg_id,n,rho_actual,rho_null\n";
  for (std::size_t i = 0; i < report.segment_rhos.size(); ++i) {
    const auto& r = report.segment_rhos[i];
    segments += io::csv_field(r.seg_id) + "," + std::to_string(r.n) + "," + fmt(r.rho) + "," +
                fmt(report.null_rhos[i]) + "\n";
  }
  io::write_atomic(dir / "segments.csv", segments);

  std::ostringstream summary;
  const auto& fr = filtered.report;
  summary << header << "corpus: " << corpus.name << "\nlang_pair: " << corpus.lang_pair
          << "\naxes: " << axis.name() << "\nfirst_axis: " << tradeoff::field_name(axis.first_axis)
          << "\nsecond_axis: " << tradeoff::field_name(axis.second_axis)
          << "\nsegments_in: " << fr.segments_in << "\nsegments_dropped: " << fr.segments_dropped
          << "\nduplicates_removed: " << fr.duplicates_removed
          << "\nlogprob_conflicts: " << fr.logprob_conflicts << "\nsegments: "
          << report.segment_rhos.size() << "\nsegments_defined: " << report.defined
          << "\nsegments_undefined: " << report.undefined
          << "\nfraction_negative: " << fmt(report.fraction_negative)
          << "\nmedian_rho: " << fmt(report.median_rho) << "\npooled_n: " << report.pooled.n
          << "\npooled_r: " << fmt(report.pooled.r) << "\npooled_p: " << fmt(report.pooled.p);
  if (report.ttest_vs_null) {
    summary << "\nt: " << fmt(report.ttest_vs_null->t) << "\ndf: " << report.ttest_vs_null->df
            << "\np: " << fmt(report.ttest_vs_null->p_two_sided);
  } else {
    summary << "\nt: \ndf: \np: \nttest_note: " << report.ttest_note;
  }
  summary << "\nalpha: " << fmt(a.alpha) << "\nsimpson: " << (report.simpson ? "true" : "false");

  // the tradeoff-vs-tradeoff correlation needs both axis pairs
  if (has_all_fields(corpus)) {
    const auto model = tradeoff::tradeoff_distribution(corpus, tradeoff::AxisPair::model());
    const auto human = tradeoff::tradeoff_distribution(corpus, tradeoff::AxisPair::human());
    std::vector<std::optional<double>> m, h;
    for (const auto& r : model.results) m.push_back(r.rho);
    for (const auto& r : human.results) h.push_back(r.rho);
    try {
      const auto c = tradeoff::correlate_tradeoff_measures(m, h);
      summary << "\ntradeoff_measure_r: " << fmt(c.r) << "\ntradeoff_measure_p: " << fmt(c.p)
              << "\ntradeoff_measure_n: " << c.n;
    } catch (const Error&) {
      summary << "\ntradeoff_measure_r: \ntradeoff_measure_p: \ntradeoff_measure_n: 0";
    }

    std::string cross = header + "metric,human_axis,n,r,p\n";
    for (const auto& cell : tradeoff::cross_metric_correlations(corpus)) {
      cross += std::string(tradeoff::field_name(cell.metric)) + "," +
               std::string(tradeoff::field_name(cell.human)) + "," +
               std::to_string(cell.correlation.n) + "," + fmt(cell.correlation.r) + "," +
               fmt(cell.correlation.p) + "\n";
    }
    io::write_atomic(dir / "cross_metric.csv", cross);
  }
  summary << "\n";
  io::write_atomic(dir / "summary.txt", summary.str());

  std::vector<std::pair<std::string, const stats::DensityCurve*>> series;
  if (report.density) series.emplace_back("actual", &*report.density);
  if (report.null_density) series.emplace_back("null", &*report.null_density);
  io::write_atomic(dir / "density.csv", header + density_table(series, "series"));

  out << report.segment_rhos.size() << " segments, fraction negative "
      << fmt(report.fraction_negative) << ", pooled r " << fmt(report.pooled.r) << " (p "
      << fmt(report.pooled.p) << "), simpson " << (report.simpson ? "true" : "false") << "\n";
  return kOk;
}

int do_rerank(const RerankArgs& a, std::ostream& out) {
  std::ostringstream flags;
  flags << " --input " << a.input << " --w-accuracy " << fmt(a.weights.w_accuracy)
        << " --w-fluency " << fmt(a.weights.w_fluency) << " --out " << a.out;
  const std::string header = header_line("rerank", flags.str());

  a.weights.validate();
  corpus::Corpus corpus = corpus::read_interchange(fs::path(a.input));
  for (auto& seg : corpus.segments) seg.translations = tradeoff::rerank(seg, a.weights);
  const fs::path dir = prepare_out(a.out);

  std::ostringstream body;
  body << header;
  corpus::write_interchange(corpus, body);
  io::write_atomic(dir / "reranked.jsonl", body.str());
  out << "reranked " << corpus.segments.size() << " segments\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Accuracy/fluency tradeoff analysis toolkit", "aft"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run the joint-Gaussian tradeoff simulation");
  simulate->add_option("--dims", sim.config.dims, "Dimensionalities of x and y")->delimiter(',');
  simulate->add_option("--n-sources", sim.config.n_sources, "Sources per dimensionality")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--n-candidates", sim.config.n_candidates, "Candidates per source")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--top-fraction", sim.config.top_fraction,
                       "Fraction of candidates kept by log p(y|x)");
  simulate->add_option("--offdiag", sim.config.offdiag, "Off-diagonal entry of A");
  simulate->add_option("--seed", sim.config.seed, "Random seed");
  simulate->add_option("--out", sim.out, "Output directory")->required();

  ScoreArgs score;
  auto* score_mqm = app.add_subcommand("score-mqm", "Derive accuracy/fluency from MQM annotations");
  score_mqm->add_option("--input", score.input, "MQM TSV file")->required()->check(CLI::ExistingFile);
  score_mqm->add_option("--name", score.name, "Corpus name (default: file stem)");
  score_mqm->add_option("--lang-pair", score.lang_pair, "Language pair, e.g. en-de");
  score_mqm->add_option("--major", score.weights.major_penalty, "Major error penalty");
  score_mqm->add_option("--minor", score.weights.minor_penalty, "Minor error penalty");
  score_mqm->add_option("--punctuation", score.weights.punctuation_penalty,
                        "Fluency/Punctuation penalty");
  score_mqm->add_option("--out", score.out, "Output directory")->required();

  AnalyzeArgs an;
  auto* analyze = app.add_subcommand("analyze", "Segment and corpus tradeoff analysis");
  analyze->add_option("--input", an.input, "Interchange file")->required()->check(CLI::ExistingFile);
  analyze->add_option("--axes", an.axes, "model or human")
      ->check(CLI::IsMember({"model", "human"}));
  analyze->add_option("--permutations", an.permutations, "Shuffles per segment for the null")
      ->check(CLI::PositiveNumber);
  analyze->add_option("--seed", an.seed, "Random seed");
  analyze->add_option("--alpha", an.alpha, "Significance level")->check(CLI::Range(0.0, 1.0));
  analyze->add_option("--min-unique", an.min_unique, "Minimum unique translations per segment")
      ->check(CLI::PositiveNumber);
  analyze->add_option("--out", an.out, "Output directory")->required();

  RerankArgs rr;
  auto* rerank = app.add_subcommand("rerank", "Reorder translations by weighted log-probs");
  rerank->add_option("--input", rr.input, "Interchange file")->required()->check(CLI::ExistingFile);
  rerank->add_option("--w-accuracy", rr.weights.w_accuracy, "Weight on log p(x|y)");
  rerank->add_option("--w-fluency", rr.weights.w_fluency, "Weight on log p(y)");
  rerank->add_option("--out", rr.out, "Output directory")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kUsageError;
  }

  try {
    if (simulate->parsed()) {
      try {
        sim.config.validate();
      } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kUsageError;
      }
      return do_simulate(sim, out);
    }
    if (score_mqm->parsed()) return do_score(score, out);
    if (analyze->parsed()) return do_analyze(an, out);
    if (rerank->parsed()) return do_rerank(rr, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
  err << app.help();
  return kUsageError;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace aft::cli
