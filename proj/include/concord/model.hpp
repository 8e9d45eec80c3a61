// Domain types shared by every stage of the consistency-correction pipeline,
// plus ingestion-time validation and probability normalization.
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace concord {

enum class ErrorCode {
  DanglingReference,
  ArityViolation,
  BadProbability,
  AllZeroProbabilities,
  DuplicateId,
  EmptyStatement,
  SelfRelation,
  CrossGroupRelation,
  UnknownPredicate,
  InvalidConfig,
  Schema,
  EmptySpace,
  HardUnsat,
  TooLarge,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

enum class QueryKind { multiple_choice, boolean };
enum class Polarity { affirm, negate };
enum class RelationLabel { fwd_entail, contradict, equivalence, none };
enum class RelationMask { all, entail_only, contradict_only };

std::string_view to_string(QueryKind kind);
std::string_view to_string(Polarity polarity);
std::string_view to_string(RelationLabel label);
std::string_view to_string(RelationMask mask);

QueryKind parse_query_kind(std::string_view text);
Polarity parse_polarity(std::string_view text);
RelationLabel parse_relation_label(std::string_view text);
RelationMask parse_relation_mask(std::string_view text);

inline constexpr double kDefaultEpsilon = 1e-6;

struct Candidate {
  std::string answer_text;
  std::string statement;
  double raw_prob = 0.0;
  double norm_prob = 0.0;  // filled by normalize_probs / validate_batch
  Polarity polarity = Polarity::affirm;

  bool operator==(const Candidate&) const = default;
};

struct Query {
  std::string id;
  std::string group_id;
  QueryKind kind = QueryKind::multiple_choice;
  std::string text;
  std::vector<Candidate> candidates;
  // Links a boolean belief to a fact P(entity) of a constraint graph; the
  // entity is the group id.
  std::optional<std::string> predicate;

  bool operator==(const Query&) const = default;
};

struct ContextStatement {
  std::string id;
  std::string query_id;
  std::string text;
  bool fixed_true = true;

  bool operator==(const ContextStatement&) const = default;
};

struct RelationEdge {
  std::string source_id;
  std::string target_id;
  RelationLabel label = RelationLabel::none;
  double prob = 0.0;

  bool operator==(const RelationEdge&) const = default;
};

enum class EdgePolarity { positive, negative };

struct ConstraintEdge {
  std::string source_predicate;
  std::string target_predicate;
  EdgePolarity target_polarity = EdgePolarity::positive;
  double weight = 1.0;

  bool operator==(const ConstraintEdge&) const = default;
};

struct Fact {
  std::string entity;
  std::string predicate;
  bool truth = false;

  bool operator==(const Fact&) const = default;
};

// Gold constraints "forall x: P(x) -> Q(x)" (or "-> not Q(x)").
struct ConstraintGraph {
  std::vector<std::string> predicates;
  std::vector<ConstraintEdge> edges;
  std::vector<Fact> facts;

  bool operator==(const ConstraintGraph&) const = default;
};

struct Config {
  double beta = 1.0;
  double lambda = 0.5;
  bool entailment_correction = false;
  RelationMask relation_mask = RelationMask::all;
  std::int64_t timeout_ms = 0;  // 0 = no limit
  double epsilon = kDefaultEpsilon;

  bool operator==(const Config&) const = default;
};

// Throws Error(InvalidConfig) when beta/lambda are outside [0,1], the timeout
// is negative or epsilon is not in (0, 0.5).
void validate_config(const Config& config);

struct Batch {
  std::vector<Query> queries;
  std::vector<ContextStatement> contexts;
  std::vector<RelationEdge> relations;

  bool operator==(const Batch&) const = default;
};

// A batch whose references, arities and probabilities have been checked and
// whose candidates carry normalized probabilities. Only validate_batch
// constructs one.
class ValidatedBatch {
 public:
  const std::vector<Query>& queries() const { return batch_.queries; }
  const std::vector<ContextStatement>& contexts() const { return batch_.contexts; }
  const std::vector<RelationEdge>& relations() const { return batch_.relations; }
  const Batch& batch() const { return batch_; }

  const Query* find_query(std::string_view id) const;
  // Group id owning a statement reference, or nullptr when unknown.
  const std::string* group_of_statement(std::string_view statement_id) const;

  bool operator==(const ValidatedBatch& other) const { return batch_ == other.batch_; }

 private:
  friend ValidatedBatch validate_batch(Batch batch, double epsilon);
  explicit ValidatedBatch(Batch batch) : batch_(std::move(batch)) {}
  Batch batch_;
};

// Statement reference helpers: "<query_id>#<candidate_index>" and "ctx:<id>".
std::string candidate_statement_id(std::string_view query_id, std::size_t index);
std::string context_statement_id(std::string_view context_id);

// Checks referential integrity, arity and probability ranges, drops
// label=none relations and fills norm_prob. Idempotent.
ValidatedBatch validate_batch(Batch batch, double epsilon = kDefaultEpsilon);
inline ValidatedBatch validate_batch(const ValidatedBatch& batch,
                                     double epsilon = kDefaultEpsilon) {
  return validate_batch(batch.batch(), epsilon);
}

// Divides by the sum over the query's candidates and clamps to
// [epsilon, 1 - epsilon]; clamped values are not re-normalized. A boolean
// query's single candidate already carries the probability of the model's
// yes/no answer, so it is clamped only.
std::vector<Candidate> normalize_probs(std::vector<Candidate> candidates,
                                       double epsilon = kDefaultEpsilon,
                                       QueryKind kind = QueryKind::multiple_choice);

// The answer chosen for one query, alongside what the naive baseline picked.
struct QuerySelection {
  std::string query_id;
  std::string group_id;
  QueryKind kind = QueryKind::multiple_choice;
  std::optional<std::size_t> candidate_index;  // multiple_choice only
  std::string answer;                           // "yes"/"no" for boolean queries
  bool truth = true;                            // boolean queries: assertion variable
  std::optional<std::string> predicate;
  std::string baseline_answer;
  bool baseline_truth = true;
  bool flipped = false;

  bool operator==(const QuerySelection&) const = default;
};

}  // namespace concord
