// Compilation of a validated batch plus relations into a log-domain factor
// graph over statement truth variables.
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "concord/model.hpp"

namespace concord {

enum class VariableSource { candidate, context };

struct VariableNode {
  int var_id = 0;  // dense, starting at 1
  VariableSource source = VariableSource::candidate;
  std::string statement_id;

  bool operator==(const VariableNode&) const = default;
};

struct Literal {
  int var_id = 0;
  bool negated = false;

  bool operator==(const Literal&) const = default;
};

enum class FactorKind { unary, exactly_one, relation, entailment_corrected, context_fix };

std::string_view to_string(FactorKind kind);

// A soft factor contributes `weight` (log domain) when at least one of its
// literals holds; hard factors must hold. exactly_one is the only factor whose
// literal list is not read as a disjunction.
struct Factor {
  FactorKind kind = FactorKind::unary;
  std::vector<Literal> literals;
  double weight = 0.0;
  bool hard = false;
  std::optional<RelationLabel> relation_label;
  std::optional<std::size_t> edge_index;  // into FactorGraph::edges

  bool operator==(const Factor&) const = default;
};

struct QueryBlock {
  std::string query_id;
  QueryKind kind = QueryKind::multiple_choice;
  std::vector<int> var_ids;

  bool operator==(const QueryBlock&) const = default;
};

struct FactorGraph {
  std::vector<VariableNode> variables;
  std::vector<Factor> factors;
  std::vector<QueryBlock> query_index;
  std::vector<RelationEdge> edges;  // the relation edges the factors were built from
  Config config_used;

  const QueryBlock* block_for(std::string_view query_id) const;
  std::optional<int> var_for_statement(std::string_view statement_id) const;

  bool operator==(const FactorGraph&) const = default;
};

// Keeps edges with prob >= lambda whose label the mask allows; equivalence
// counts as entailment. Input order is preserved.
std::vector<RelationEdge> filter_relations(std::span<const RelationEdge> edges, double lambda,
                                           RelationMask mask);

// Collapses duplicate edges to the highest-probability one per key
// (contradict/equivalence keyed on the unordered pair, fwd_entail on the
// ordered pair) and merges entailment in both directions into a single
// equivalence carrying the smaller of the two probabilities. The result is in
// canonical order, so any permutation of the input yields the same output.
std::vector<RelationEdge> dedup_relations(std::span<const RelationEdge> edges);

// Grounds gold constraints on the beliefs of each entity group. Beliefs link
// to facts through Query::predicate; the entity is the query's group id.
std::vector<RelationEdge> ground_constraint_graph(const ConstraintGraph& graph,
                                                  const ValidatedBatch& batch);

// Throws UnknownPredicate / InvalidConfig style errors for malformed graphs.
void validate_constraint_graph(const ConstraintGraph& graph);

// Log of the base-model factor for a candidate: beta * ln(p / (1 - p)).
double unary_log_weight(double prob, double beta);

// Log weight of a relation factor when satisfied relative to violated:
// (1 - beta) * -ln(1 - p), with p clamped to at most 1 - epsilon.
double relation_log_weight(double prob, double beta, double epsilon);

// Edges must already be deduplicated and filtered.
FactorGraph build_factor_graph(const ValidatedBatch& batch, std::span<const RelationEdge> edges,
                               const Config& config);

// True when the assignment satisfies the edge's logical relation; `values` is
// indexed by var_id - 1.
bool relation_holds(const FactorGraph& graph, const RelationEdge& edge,
                    const std::vector<bool>& values);

}  // namespace concord
