#pragma once

#include <optional>
#include <string>
#include <vector>

namespace cmest {

// One scored example: the model's positive-class sigmoid output plus an
// optional ground-truth label and an optional group tag.
struct ScoreRecord {
  std::string id;
  double raw_score = 0.0;  // in [0,1]
  std::optional<int> label;  // 0 or 1 when present
  std::optional<std::string> group;
};

// An ordered collection of score records together with the decision
// threshold they are evaluated at. Immutable after construction; all
// operations on it are pure functions.
struct ScoreSet {
  std::vector<ScoreRecord> records;
  double threshold = 0.5;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }

  // True iff every record carries a label.
  bool labelled() const;
  // True iff at least one record carries a label.
  bool any_labelled() const;
  // Throws unless fully labelled (mixed sets are rejected too).
  void require_labelled(const std::string& what) const;

  // Fraction of labels equal to 1. Requires a fully labelled set.
  double prevalence() const;
};

// Partition of a ScoreSet into predicted-positive and predicted-negative
// confidences. positives holds the raw score itself for records with
// raw_score >= t; negatives holds 1 - raw_score for records with
// raw_score < t. Label vectors are aligned with the confidence vectors
// and empty when the source set is unlabelled.
struct PredictionSplit {
  std::vector<double> positives;
  std::vector<double> negatives;
  std::vector<int> labels_pos;
  std::vector<int> labels_neg;

  std::size_t n_pos() const { return positives.size(); }
  std::size_t n_neg() const { return negatives.size(); }
  bool has_labels() const { return labels_pos.size() + labels_neg.size() > 0 ||
                                   (positives.empty() && negatives.empty()); }
};

// Confidence in the predicted class: raw_score when the prediction is
// positive (raw_score >= t, boundary included), 1 - raw_score otherwise.
double predicted_confidence(double raw_score, double t);

// Partitions the set; input order is preserved within each side.
PredictionSplit split_predictions(const ScoreSet& set);

// All predicted-class confidences of the set, in record order.
std::vector<double> predicted_confidences(const ScoreSet& set);

enum class ScoreFormat { csv, jsonl };

// Reads a score file. CSV needs a header with at least `id` and `score`
// columns (`label` and `group` optional, order free, extras ignored);
// JSONL expects one object per line with the same keys. Malformed rows
// raise a parse error naming the line.
ScoreSet load_scores(const std::string& path, ScoreFormat format,
                     double threshold);
ScoreSet parse_scores_csv(const std::string& text, const std::string& origin,
                          double threshold);
ScoreSet parse_scores_jsonl(const std::string& text, const std::string& origin,
                            double threshold);

// Writes `id,score[,label][,group]`; the optional columns appear when any
// record carries the field. Scores are written with full round-trip
// precision.
void save_scores_csv(const ScoreSet& set, const std::string& path);
std::string scores_to_csv(const ScoreSet& set);

}  // namespace cmest
