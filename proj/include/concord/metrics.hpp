// Evaluation metrics over per-query selections.
#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "concord/model.hpp"

namespace concord {

struct GoldRecord {
  std::string query_id;
  std::string group_id;
  std::optional<bool> gold_truth;                      // boolean queries
  std::optional<std::vector<std::string>> gold_answers;  // multiple choice / open answers

  bool operator==(const GoldRecord&) const = default;
};

// Throws Error(Schema) unless exactly one of gold_truth / gold_answers is set.
void validate_gold(const GoldRecord& gold);

using AnswerMatcher = std::function<bool(std::string_view predicted, std::string_view gold)>;

// Case-insensitive equality after trimming surrounding whitespace.
bool exact_answer_match(std::string_view predicted, std::string_view gold);

struct BinaryF1 {
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  bool no_positives = false;  // no gold positives; f1 reported as 0
};

// Positive class: the fact is true. Queries without gold_truth are skipped.
BinaryF1 binary_f1(std::span<const QuerySelection> selections, std::span<const GoldRecord> golds);

struct ConsistencyResult {
  std::size_t relevant = 0;
  std::size_t violated = 0;
  double tau = 0.0;
  double consistency = 1.0;
};

// Conditional constraint violation over boolean selections that carry a
// predicate; the entity is the selection's group id. A constraint P -> Q is
// relevant when P's belief is true and Q was queried for the same entity.
ConsistencyResult consistency_tau(std::span<const QuerySelection> selections,
                                  const ConstraintGraph& graph);

// True/false when the selection can be scored against `gold`.
std::optional<bool> is_correct(const QuerySelection& selection, const GoldRecord& gold,
                               const AnswerMatcher& match = exact_answer_match);

// Fraction of scored queries answered correctly.
double accuracy(std::span<const QuerySelection> selections, std::span<const GoldRecord> golds,
                const AnswerMatcher& match = exact_answer_match);

// Fraction of groups in which every scored query is answered correctly.
double perfect_consistency(std::span<const QuerySelection> selections,
                           std::span<const GoldRecord> golds,
                           const AnswerMatcher& match = exact_answer_match);

// SQuAD answer normalization: lower-case, drop punctuation and the articles
// a/an/the, collapse whitespace.
std::string normalize_answer(std::string_view text);

// Bag-of-tokens F1 against the best-matching gold answer.
double token_f1(std::string_view predicted, std::span<const std::string> golds);

// Mean token F1 over queries that have gold answers.
double mean_token_f1(std::span<const QuerySelection> selections, std::span<const GoldRecord> golds);

enum class FlipScore { correctness, token_f1 };

struct FlipCounts {
  std::size_t good = 0;
  std::size_t bad = 0;

  bool operator==(const FlipCounts&) const = default;
};

// Flips that raise (good) or lower (bad) the per-query score relative to
// `baseline`; flips that leave it unchanged count as neither.
FlipCounts flip_report(std::span<const QuerySelection> selections,
                       std::span<const QuerySelection> baseline,
                       std::span<const GoldRecord> golds, FlipScore score = FlipScore::correctness,
                       const AnswerMatcher& match = exact_answer_match);

// The baseline's choices expressed as selections.
std::vector<QuerySelection> baseline_selections(std::span<const QuerySelection> selections);

}  // namespace concord
