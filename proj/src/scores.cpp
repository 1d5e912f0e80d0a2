#include "scores.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "error.hpp"
#include "util.hpp"

namespace cmest {

bool ScoreSet::labelled() const {
  if (records.empty()) return false;
  for (const auto& r : records)
    if (!r.label) return false;
  return true;
}

bool ScoreSet::any_labelled() const {
  for (const auto& r : records)
    if (r.label) return true;
  return false;
}

void ScoreSet::require_labelled(const std::string& what) const {
  if (records.empty()) fail(ErrorKind::invalid, what + ": empty score set");
  if (!labelled()) {
    fail(ErrorKind::invalid,
         any_labelled() ? what + ": mixed labelled/unlabelled set rejected"
                        : what + ": set has no labels");
  }
}

double ScoreSet::prevalence() const {
  require_labelled("prevalence");
  std::size_t pos = 0;
  for (const auto& r : records) pos += static_cast<std::size_t>(*r.label);
  return static_cast<double>(pos) / static_cast<double>(records.size());
}

double predicted_confidence(double raw_score, double t) {
  return raw_score >= t ? raw_score : 1.0 - raw_score;
}

PredictionSplit split_predictions(const ScoreSet& set) {
  if (set.empty()) fail(ErrorKind::invalid, "split_predictions: empty score set");
  const bool carry_labels = set.labelled();
  PredictionSplit out;
  for (const auto& r : set.records) {
    if (r.raw_score >= set.threshold) {
      out.positives.push_back(r.raw_score);
      if (carry_labels) out.labels_pos.push_back(*r.label);
    } else {
      out.negatives.push_back(1.0 - r.raw_score);
      if (carry_labels) out.labels_neg.push_back(*r.label);
    }
  }
  return out;
}

std::vector<double> predicted_confidences(const ScoreSet& set) {
  std::vector<double> out;
  out.reserve(set.size());
  for (const auto& r : set.records)
    out.push_back(predicted_confidence(r.raw_score, set.threshold));
  return out;
}

namespace {

double parse_score_field(const std::string& field, const std::string& origin,
                         std::size_t line) {
  const std::string s = trim(field);
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    fail(ErrorKind::parse, origin + ":" + std::to_string(line) +
                               ": malformed score '" + field + "'");
  if (!(v >= 0.0 && v <= 1.0))
    fail(ErrorKind::parse, origin + ":" + std::to_string(line) + ": score " +
                               s + " outside [0,1]");
  return v;
}

int parse_label_field(const std::string& field, const std::string& origin,
                      std::size_t line) {
  const std::string s = trim(field);
  if (s == "0") return 0;
  if (s == "1") return 1;
  fail(ErrorKind::parse, origin + ":" + std::to_string(line) +
                             ": label must be 0 or 1, got '" + field + "'");
}

void check_threshold(double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0))
    fail(ErrorKind::invalid, "decision threshold must be in [0,1], got " +
                                 fmt_double(threshold));
}

}  // namespace

ScoreSet parse_scores_csv(const std::string& text, const std::string& origin,
                          double threshold) {
  check_threshold(threshold);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line))
    fail(ErrorKind::parse, origin + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  auto header = split(line, ',');
  int col_id = -1, col_score = -1, col_label = -1, col_group = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string name = trim(header[i]);
    if (name == "id") col_id = static_cast<int>(i);
    else if (name == "score") col_score = static_cast<int>(i);
    else if (name == "label") col_label = static_cast<int>(i);
    else if (name == "group") col_group = static_cast<int>(i);
  }
  if (col_id < 0 || col_score < 0)
    fail(ErrorKind::parse,
         origin + ":1: header must contain 'id' and 'score' columns");

  ScoreSet set;
  set.threshold = threshold;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto fields = split(line, ',');
    if (fields.size() != header.size())
      fail(ErrorKind::parse, origin + ":" + std::to_string(lineno) +
                                 ": expected " + std::to_string(header.size()) +
                                 " fields, got " + std::to_string(fields.size()));
    ScoreRecord rec;
    rec.id = trim(fields[static_cast<std::size_t>(col_id)]);
    rec.raw_score =
        parse_score_field(fields[static_cast<std::size_t>(col_score)], origin, lineno);
    if (col_label >= 0) {
      const std::string lab = trim(fields[static_cast<std::size_t>(col_label)]);
      if (!lab.empty()) rec.label = parse_label_field(lab, origin, lineno);
    }
    if (col_group >= 0) {
      const std::string grp = trim(fields[static_cast<std::size_t>(col_group)]);
      if (!grp.empty()) rec.group = grp;
    }
    set.records.push_back(std::move(rec));
  }
  if (set.records.empty())
    fail(ErrorKind::parse, origin + ": no data rows");
  return set;
}

ScoreSet parse_scores_jsonl(const std::string& text, const std::string& origin,
                            double threshold) {
  check_threshold(threshold);
  std::istringstream in(text);
  std::string line;
  ScoreSet set;
  set.threshold = threshold;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::parse,
           origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (!obj.is_object() || !obj.contains("id") || !obj.contains("score"))
      fail(ErrorKind::parse, origin + ":" + std::to_string(lineno) +
                                 ": object with 'id' and 'score' required");
    ScoreRecord rec;
    rec.id = obj["id"].is_string() ? obj["id"].get<std::string>()
                                   : obj["id"].dump();
    if (!obj["score"].is_number())
      fail(ErrorKind::parse,
           origin + ":" + std::to_string(lineno) + ": 'score' must be a number");
    rec.raw_score = obj["score"].get<double>();
    if (!(rec.raw_score >= 0.0 && rec.raw_score <= 1.0))
      fail(ErrorKind::parse, origin + ":" + std::to_string(lineno) +
                                 ": score outside [0,1]");
    if (obj.contains("label") && !obj["label"].is_null()) {
      if (!obj["label"].is_number_integer())
        fail(ErrorKind::parse,
             origin + ":" + std::to_string(lineno) + ": 'label' must be 0 or 1");
      int lab = obj["label"].get<int>();
      if (lab != 0 && lab != 1)
        fail(ErrorKind::parse,
             origin + ":" + std::to_string(lineno) + ": 'label' must be 0 or 1");
      rec.label = lab;
    }
    if (obj.contains("group") && !obj["group"].is_null())
      rec.group = obj["group"].is_string() ? obj["group"].get<std::string>()
                                           : obj["group"].dump();
    set.records.push_back(std::move(rec));
  }
  if (set.records.empty()) fail(ErrorKind::parse, origin + ": no data rows");
  return set;
}

ScoreSet load_scores(const std::string& path, ScoreFormat format,
                     double threshold) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open score file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return format == ScoreFormat::csv
             ? parse_scores_csv(buf.str(), path, threshold)
             : parse_scores_jsonl(buf.str(), path, threshold);
}

std::string scores_to_csv(const ScoreSet& set) {
  bool with_label = false, with_group = false;
  for (const auto& r : set.records) {
    with_label = with_label || r.label.has_value();
    with_group = with_group || r.group.has_value();
  }
  std::string out = "id,score";
  if (with_label) out += ",label";
  if (with_group) out += ",group";
  out += '\n';
  for (const auto& r : set.records) {
    out += r.id;
    out += ',';
    out += fmt_double(r.raw_score);
    if (with_label) {
      out += ',';
      if (r.label) out += std::to_string(*r.label);
    }
    if (with_group) {
      out += ',';
      if (r.group) out += *r.group;
    }
    out += '\n';
  }
  return out;
}

void save_scores_csv(const ScoreSet& set, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write score file: " + path);
  out << scores_to_csv(set);
  if (!out) fail(ErrorKind::io, "write failed: " + path);
}

}  // namespace cmest
