#include "aft/corpus.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "aft/error.hpp"
#include "aft/io.hpp"

namespace aft::corpus {

using nlohmann::json;

std::size_t Corpus::translation_count() const {
  std::size_t n = 0;
  for (const auto& seg : segments) n += seg.translations.size();
  return n;
}

// ---------------------------------------------------------------------------
// Dedup and filter

namespace {

struct MergedTranslation {
  ScoredTranslation value;
  double accuracy_sum = 0.0;
  double fluency_sum = 0.0;
  std::size_t accuracy_n = 0;
  std::size_t fluency_n = 0;
  bool mixed_systems = false;
};

// Returns true if both values are present and differ.
bool merge_logprob(std::optional<double>& into, const std::optional<double>& from) {
  if (!from) return false;
  if (!into) {
    into = from;
    return false;
  }
  return *into != *from;
}

}  // namespace

FilterResult dedup_and_filter(const Corpus& corpus, std::size_t min_unique) {
  FilterResult result;
  result.corpus.name = corpus.name;
  result.corpus.lang_pair = corpus.lang_pair;
  result.report.segments_in = corpus.segments.size();

  for (const SegmentGroup& seg : corpus.segments) {
    std::vector<MergedTranslation> merged;
    std::unordered_map<std::string_view, std::size_t> index;
    for (const ScoredTranslation& tr : seg.translations) {
      auto [it, inserted] = index.try_emplace(tr.target, merged.size());
      if (inserted) {
        MergedTranslation m;
        m.value = tr;
        merged.push_back(std::move(m));
      } else {
        ++result.report.duplicates_removed;
        MergedTranslation& m = merged[it->second];
        bool conflict = merge_logprob(m.value.logp_y_given_x, tr.logp_y_given_x);
        conflict |= merge_logprob(m.value.logp_x_given_y, tr.logp_x_given_y);
        conflict |= merge_logprob(m.value.logp_y, tr.logp_y);
        if (conflict) ++result.report.logprob_conflicts;
        if (m.value.system != tr.system) m.mixed_systems = true;
      }
      MergedTranslation& m = merged[index.at(tr.target)];
      if (tr.accuracy) {
        m.accuracy_sum += *tr.accuracy;
        ++m.accuracy_n;
      }
      if (tr.fluency) {
        m.fluency_sum += *tr.fluency;
        ++m.fluency_n;
      }
    }

    if (merged.size() < min_unique) {
      ++result.report.segments_dropped;
      continue;
    }

    SegmentGroup out{seg.seg_id, seg.source, {}};
    out.translations.reserve(merged.size());
    for (MergedTranslation& m : merged) {
      // single entries keep their exact value rather than x/1
      if (m.accuracy_n > 1) m.value.accuracy = m.accuracy_sum / static_cast<double>(m.accuracy_n);
      if (m.fluency_n > 1) m.value.fluency = m.fluency_sum / static_cast<double>(m.fluency_n);
      if (m.mixed_systems) m.value.system.reset();
      out.translations.push_back(std::move(m.value));
    }
    result.corpus.segments.push_back(std::move(out));
  }
  result.report.segments_kept = result.corpus.segments.size();
  return result;
}

// ---------------------------------------------------------------------------
// Interchange format

std::string format_number(double value) {
  if (!std::isfinite(value)) throw Error("cannot serialize non-finite number");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

namespace {

std::string quote(const std::string& s, std::string_view field) {
  try {
    return json(s).dump();
  } catch (const json::exception&) {
    throw InputFormatError("field '" + std::string(field) + "' is not valid UTF-8");
  }
}

std::string number_or_null(const std::optional<double>& v) {
  return v ? format_number(*v) : "null";
}

const char* const kFieldOrder[] = {"corpus", "lang_pair", "seg_id", "source", "target", "system",
                                   "logp_y_given_x", "logp_x_given_y", "logp_y", "accuracy",
                                   "fluency"};

}  // namespace

void write_interchange(const Corpus& corpus, std::ostream& out) {
  const std::string name = quote(corpus.name, "corpus");
  const std::string lang = quote(corpus.lang_pair, "lang_pair");
  for (const SegmentGroup& seg : corpus.segments) {
    const std::string seg_id = quote(seg.seg_id, "seg_id");
    const std::string source = quote(seg.source, "source");
    for (const ScoredTranslation& tr : seg.translations) {
      out << "{\"corpus\":" << name << ",\"lang_pair\":" << lang << ",\"seg_id\":" << seg_id
          << ",\"source\":" << source << ",\"target\":" << quote(tr.target, "target")
          << ",\"system\":" << (tr.system ? quote(*tr.system, "system") : "null")
          << ",\"logp_y_given_x\":" << number_or_null(tr.logp_y_given_x)
          << ",\"logp_x_given_y\":" << number_or_null(tr.logp_x_given_y)
          << ",\"logp_y\":" << number_or_null(tr.logp_y)
          << ",\"accuracy\":" << number_or_null(tr.accuracy)
          << ",\"fluency\":" << number_or_null(tr.fluency) << "}\n";
    }
  }
}

void write_interchange(const Corpus& corpus, const std::filesystem::path& path,
                       const std::vector<std::string>& header) {
  std::ostringstream buf;
  for (const auto& line : header) buf << "# " << line << '\n';
  write_interchange(corpus, buf);

  io::write_atomic(path, buf.str());
}

namespace {

[[noreturn]] void fail(std::size_t line, std::string_view field, std::string_view what) {
  throw InputFormatError("line " + std::to_string(line) + ": field '" + std::string(field) +
                         "': " + std::string(what));
}

std::string required_string(const json& obj, const char* field, std::size_t line) {
  auto it = obj.find(field);
  if (it == obj.end()) fail(line, field, "missing");
  if (!it->is_string()) fail(line, field, "expected string");
  return it->get<std::string>();
}

std::optional<std::string> optional_string(const json& obj, const char* field, std::size_t line) {
  auto it = obj.find(field);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) fail(line, field, "expected string or null");
  return it->get<std::string>();
}

std::optional<double> optional_number(const json& obj, const char* field, std::size_t line) {
  auto it = obj.find(field);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) fail(line, field, "expected number or null");
  return it->get<double>();
}

}  // namespace

Corpus read_interchange(std::istream& in) {
  Corpus corpus;
  std::map<std::string, std::size_t, std::less<>> seg_index;
  bool first_record = true;
  std::string text;
  std::size_t line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos || text.front() == '#') continue;

    json obj;
    try {
      obj = json::parse(text);
    } catch (const json::parse_error& e) {
      throw InputFormatError("line " + std::to_string(line_no) + ": malformed record: " + e.what());
    }
    if (!obj.is_object()) {
      throw InputFormatError("line " + std::to_string(line_no) + ": record is not an object");
    }
    for (const auto& [key, _] : obj.items()) {
      if (std::find(std::begin(kFieldOrder), std::end(kFieldOrder), key) == std::end(kFieldOrder)) {
        fail(line_no, key, "unknown field");
      }
    }

    std::string name = required_string(obj, "corpus", line_no);
    std::string lang = required_string(obj, "lang_pair", line_no);
    if (first_record) {
      corpus.name = std::move(name);
      corpus.lang_pair = std::move(lang);
      first_record = false;
    } else if (name != corpus.name) {
      fail(line_no, "corpus", "differs from earlier records");
    } else if (lang != corpus.lang_pair) {
      fail(line_no, "lang_pair", "differs from earlier records");
    }

    ScoredTranslation tr;
    tr.seg_id = required_string(obj, "seg_id", line_no);
    std::string source = required_string(obj, "source", line_no);
    tr.target = required_string(obj, "target", line_no);
    tr.system = optional_string(obj, "system", line_no);
    tr.logp_y_given_x = optional_number(obj, "logp_y_given_x", line_no);
    tr.logp_x_given_y = optional_number(obj, "logp_x_given_y", line_no);
    tr.logp_y = optional_number(obj, "logp_y", line_no);
    tr.accuracy = optional_number(obj, "accuracy", line_no);
    tr.fluency = optional_number(obj, "fluency", line_no);

    auto [it, inserted] = seg_index.try_emplace(tr.seg_id, corpus.segments.size());
    if (inserted) {
      corpus.segments.push_back(SegmentGroup{tr.seg_id, std::move(source), {}});
    } else if (corpus.segments[it->second].source != source) {
      fail(line_no, "source", "differs from earlier records of seg_id '" + tr.seg_id + "'");
    }
    corpus.segments[it->second].translations.push_back(std::move(tr));
  }
  return corpus;
}

Corpus read_interchange(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputFormatError("cannot open " + path.string());
  return read_interchange(in);
}

// ---------------------------------------------------------------------------
// MQM ingestion

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

const char* const kMqmColumns[] = {"system", "doc", "seg_id", "rater",
                                   "source", "target", "category", "severity"};

}  // namespace

MqmLoadResult load_mqm_tsv(std::istream& in, const mqm::ErrorWeightTable& weights,
                           std::string name, std::string lang_pair) {
  weights.validate();
  std::string line;
  if (!std::getline(in, line)) throw InputFormatError("MQM file is empty (header row required)");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const auto header = split_tabs(line);
  std::size_t col[std::size(kMqmColumns)];
  for (std::size_t c = 0; c < std::size(kMqmColumns); ++c) {
    auto it = std::find(header.begin(), header.end(), kMqmColumns[c]);
    if (it == header.end()) {
      throw InputFormatError("line 1: header is missing column '" + std::string(kMqmColumns[c]) + "'");
    }
    col[c] = static_cast<std::size_t>(it - header.begin());
  }

  MqmLoadResult result;
  result.corpus.name = std::move(name);
  result.corpus.lang_pair = std::move(lang_pair);

  // (system, seg_id) groups in order of first appearance
  std::vector<std::vector<mqm::MqmRecord>> groups;
  std::map<std::pair<std::string, std::string>, std::size_t> group_index;

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != header.size()) {
      throw InputFormatError("line " + std::to_string(line_no) + ": expected " +
                             std::to_string(header.size()) + " columns, found " +
                             std::to_string(fields.size()));
    }
    mqm::MqmRecord rec{fields[col[0]], fields[col[1]], fields[col[2]], fields[col[3]],
                       fields[col[4]], fields[col[5]], fields[col[6]], fields[col[7]]};
    try {
      mqm::parse_severity(rec.severity);
    } catch (const InputFormatError& e) {
      throw InputFormatError("line " + std::to_string(line_no) + ": field 'severity': " + e.what());
    }
    if (rec.seg_id.empty()) {
      throw InputFormatError("line " + std::to_string(line_no) + ": field 'seg_id': empty");
    }
    ++result.report.rows;
    auto [it, inserted] = group_index.try_emplace({rec.system, rec.seg_id}, groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(std::move(rec));
  }

  struct SegmentDraft {
    std::string source;
    std::vector<mqm::ScoredTarget> scored;
    std::vector<std::string> systems;
  };
  std::vector<SegmentDraft> drafts;
  std::vector<std::string> seg_order;
  std::map<std::string, std::size_t, std::less<>> seg_index;

  for (const auto& records : groups) {
    const mqm::MqmRecord& head = records.front();
    const mqm::QualityScore score = mqm::score_target(records, weights, result.report.scoring);
    ++result.report.targets_scored;

    auto [it, inserted] = seg_index.try_emplace(head.seg_id, drafts.size());
    if (inserted) {
      drafts.push_back(SegmentDraft{head.source, {}, {}});
      seg_order.push_back(head.seg_id);
    }
    SegmentDraft& draft = drafts[it->second];
    for (const auto& rec : records) {
      if (rec.source != draft.source) {
        ++result.report.source_conflicts;
        break;
      }
    }
    draft.scored.emplace_back(head.target, score);
    draft.systems.push_back(head.system);
  }

  for (std::size_t s = 0; s < drafts.size(); ++s) {
    const SegmentDraft& draft = drafts[s];
    const auto merged = mqm::average_duplicates(draft.scored);
    result.report.duplicates_merged += draft.scored.size() - merged.size();

    SegmentGroup seg{seg_order[s], draft.source, {}};
    for (const auto& [target, score] : merged) {
      std::optional<std::string> system;
      std::size_t hits = 0;
      for (std::size_t i = 0; i < draft.scored.size(); ++i) {
        if (draft.scored[i].first == target) {
          ++hits;
          system = draft.systems[i];
        }
      }
      if (hits > 1) system.reset();

      ScoredTranslation tr;
      tr.seg_id = seg.seg_id;
      tr.target = target;
      tr.system = std::move(system);
      tr.accuracy = score.accuracy;
      tr.fluency = score.fluency;
      seg.translations.push_back(std::move(tr));
    }
    result.corpus.segments.push_back(std::move(seg));
  }
  return result;
}

MqmLoadResult load_mqm_tsv(const std::filesystem::path& path, const mqm::ErrorWeightTable& weights,
                           std::string name, std::string lang_pair) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputFormatError("cannot open " + path.string());
  return load_mqm_tsv(in, weights, std::move(name), std::move(lang_pair));
}

}  // namespace aft::corpus
