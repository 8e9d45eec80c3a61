#include "concord/graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

namespace concord {

std::string_view to_string(FactorKind kind) {
  switch (kind) {
    case FactorKind::unary: return "unary";
    case FactorKind::exactly_one: return "exactly_one";
    case FactorKind::relation: return "relation";
    case FactorKind::entailment_corrected: return "entailment_corrected";
    case FactorKind::context_fix: return "context_fix";
  }
  return "unary";
}

const QueryBlock* FactorGraph::block_for(std::string_view query_id) const {
  for (const auto& block : query_index) {
    if (block.query_id == query_id) return &block;
  }
  return nullptr;
}

std::optional<int> FactorGraph::var_for_statement(std::string_view statement_id) const {
  for (const auto& v : variables) {
    if (v.statement_id == statement_id) return v.var_id;
  }
  return std::nullopt;
}

namespace {

bool is_entailment(RelationLabel label) {
  return label == RelationLabel::fwd_entail || label == RelationLabel::equivalence;
}

bool mask_allows(RelationMask mask, RelationLabel label) {
  switch (mask) {
    case RelationMask::all: return true;
    case RelationMask::entail_only: return is_entailment(label);
    case RelationMask::contradict_only: return label == RelationLabel::contradict;
  }
  return true;
}

bool symmetric(RelationLabel label) {
  return label == RelationLabel::contradict || label == RelationLabel::equivalence;
}

// Orders symmetric edges so that source_id < target_id.
RelationEdge canonical(RelationEdge e) {
  if (symmetric(e.label) && e.target_id < e.source_id) std::swap(e.source_id, e.target_id);
  return e;
}

using EdgeKey = std::tuple<std::string, std::string, RelationLabel>;

EdgeKey key_of(const RelationEdge& e) { return {e.source_id, e.target_id, e.label}; }

void keep_max(std::map<EdgeKey, RelationEdge>& best, RelationEdge e) {
  auto [it, inserted] = best.emplace(key_of(e), e);
  if (!inserted && e.prob > it->second.prob) it->second = std::move(e);
}

}  // namespace

std::vector<RelationEdge> filter_relations(std::span<const RelationEdge> edges, double lambda,
                                           RelationMask mask) {
  std::vector<RelationEdge> kept;
  for (const auto& e : edges) {
    if (e.label == RelationLabel::none) continue;
    if (e.prob >= lambda && mask_allows(mask, e.label)) kept.push_back(e);
  }
  return kept;
}

std::vector<RelationEdge> dedup_relations(std::span<const RelationEdge> edges) {
  std::map<EdgeKey, RelationEdge> best;
  for (const auto& e : edges) {
    if (e.label == RelationLabel::none) continue;
    keep_max(best, canonical(e));
  }

  // Entailment predicted in both directions becomes one equivalence.
  std::vector<RelationEdge> merged;
  for (auto it = best.begin(); it != best.end();) {
    const RelationEdge& e = it->second;
    if (e.label == RelationLabel::fwd_entail && e.source_id < e.target_id) {
      auto reverse = best.find({e.target_id, e.source_id, RelationLabel::fwd_entail});
      if (reverse != best.end()) {
        merged.push_back({e.source_id, e.target_id, RelationLabel::equivalence,
                          std::min(e.prob, reverse->second.prob)});
        best.erase(reverse);
        it = best.erase(it);
        continue;
      }
    }
    ++it;
  }
  for (auto& e : merged) keep_max(best, std::move(e));

  std::vector<RelationEdge> out;
  out.reserve(best.size());
  for (auto& [key, e] : best) out.push_back(std::move(e));
  std::sort(out.begin(), out.end(), [](const RelationEdge& a, const RelationEdge& b) {
    const auto& a_lo = std::min(a.source_id, a.target_id);
    const auto& a_hi = std::max(a.source_id, a.target_id);
    const auto& b_lo = std::min(b.source_id, b.target_id);
    const auto& b_hi = std::max(b.source_id, b.target_id);
    return std::tie(a_lo, a_hi, a.label, a.source_id) < std::tie(b_lo, b_hi, b.label, b.source_id);
  });
  return out;
}

void validate_constraint_graph(const ConstraintGraph& graph) {
  std::unordered_set<std::string> known(graph.predicates.begin(), graph.predicates.end());
  for (const auto& e : graph.edges) {
    if (!known.contains(e.source_predicate)) {
      throw Error(ErrorCode::UnknownPredicate, "edge source '" + e.source_predicate + "'");
    }
    if (!known.contains(e.target_predicate)) {
      throw Error(ErrorCode::UnknownPredicate, "edge target '" + e.target_predicate + "'");
    }
    if (!std::isfinite(e.weight) || e.weight < 0.0 || e.weight > 1.0) {
      throw Error(ErrorCode::BadProbability, "constraint edge " + e.source_predicate + " -> " +
                                                 e.target_predicate + " has weight outside [0,1]");
    }
    if (e.source_predicate == e.target_predicate && e.target_polarity == EdgePolarity::positive) {
      throw Error(ErrorCode::SelfRelation, "constraint edge maps '" + e.source_predicate +
                                               "' to itself");
    }
  }
}

std::vector<RelationEdge> ground_constraint_graph(const ConstraintGraph& graph,
                                                  const ValidatedBatch& batch) {
  validate_constraint_graph(graph);

  // group -> predicate -> boolean queries asserting it, in batch order.
  std::vector<std::string> group_order;
  std::unordered_map<std::string, std::unordered_map<std::string, std::vector<const Query*>>> index;
  for (const auto& q : batch.queries()) {
    if (q.kind != QueryKind::boolean || !q.predicate) continue;
    auto [it, inserted] = index.try_emplace(q.group_id);
    if (inserted) group_order.push_back(q.group_id);
    it->second[*q.predicate].push_back(&q);
  }

  std::vector<RelationEdge> out;
  for (const auto& group : group_order) {
    const auto& by_predicate = index.at(group);
    for (const auto& edge : graph.edges) {
      auto src = by_predicate.find(edge.source_predicate);
      auto dst = by_predicate.find(edge.target_predicate);
      if (src == by_predicate.end() || dst == by_predicate.end()) continue;
      for (const Query* a : src->second) {
        for (const Query* b : dst->second) {
          if (a == b) continue;
          RelationLabel label = edge.target_polarity == EdgePolarity::positive
                                    ? RelationLabel::fwd_entail
                                    : RelationLabel::contradict;
          out.push_back({candidate_statement_id(a->id, 0), candidate_statement_id(b->id, 0), label,
                         edge.weight});
        }
      }
    }
  }
  return out;
}

double unary_log_weight(double prob, double beta) {
  return beta * std::log(prob / (1.0 - prob));
}

double relation_log_weight(double prob, double beta, double epsilon) {
  double p = std::min(prob, 1.0 - epsilon);
  return (1.0 - beta) * -std::log1p(-p);
}

FactorGraph build_factor_graph(const ValidatedBatch& batch, std::span<const RelationEdge> edges,
                               const Config& config) {
  validate_config(config);
  FactorGraph graph;
  graph.config_used = config;
  graph.edges.assign(edges.begin(), edges.end());

  std::unordered_map<std::string, int> var_of;
  auto add_var = [&](VariableSource source, std::string statement_id) {
    int id = static_cast<int>(graph.variables.size()) + 1;
    var_of.emplace(statement_id, id);
    graph.variables.push_back({id, source, std::move(statement_id)});
    return id;
  };

  for (const auto& q : batch.queries()) {
    QueryBlock block{q.id, q.kind, {}};
    for (std::size_t j = 0; j < q.candidates.size(); ++j) {
      const Candidate& c = q.candidates[j];
      int var = add_var(VariableSource::candidate, candidate_statement_id(q.id, j));
      block.var_ids.push_back(var);

      bool negated = q.kind == QueryKind::boolean && c.polarity == Polarity::negate;
      double weight = unary_log_weight(
          std::clamp(c.norm_prob, config.epsilon, 1.0 - config.epsilon), config.beta);
      if (weight < 0.0) {
        negated = !negated;
        weight = -weight;
      }
      graph.factors.push_back({FactorKind::unary, {{var, negated}}, weight, false, std::nullopt,
                               std::nullopt});
    }
    if (q.kind == QueryKind::multiple_choice) {
      Factor one{FactorKind::exactly_one, {}, 0.0, true, std::nullopt, std::nullopt};
      for (int var : block.var_ids) one.literals.push_back({var, false});
      graph.factors.push_back(std::move(one));
    }
    graph.query_index.push_back(std::move(block));
  }

  for (const auto& c : batch.contexts()) {
    int var = add_var(VariableSource::context, context_statement_id(c.id));
    graph.factors.push_back({FactorKind::context_fix, {{var, false}}, 0.0, true, std::nullopt,
                             std::nullopt});
  }

  for (std::size_t i = 0; i < graph.edges.size(); ++i) {
    const RelationEdge& e = graph.edges[i];
    if (e.label == RelationLabel::none) continue;
    auto a_it = var_of.find(e.source_id);
    auto b_it = var_of.find(e.target_id);
    if (a_it == var_of.end() || b_it == var_of.end()) {
      throw Error(ErrorCode::DanglingReference,
                  "relation " + e.source_id + " -> " + e.target_id + " not in batch");
    }
    const int a = a_it->second;
    const int b = b_it->second;
    const double w = relation_log_weight(e.prob, config.beta, config.epsilon);
    auto relation = [&](FactorKind kind, std::vector<Literal> lits, double weight) {
      graph.factors.push_back({kind, std::move(lits), weight, false, e.label, i});
    };
    switch (e.label) {
      case RelationLabel::fwd_entail:
        if (config.entailment_correction) {
          // (1,1) -> 1, mixed -> sqrt(1-p), (0,0) -> 1-p: two half-weight units.
          relation(FactorKind::entailment_corrected, {{a, false}}, w / 2.0);
          relation(FactorKind::entailment_corrected, {{b, false}}, w / 2.0);
        } else {
          relation(FactorKind::relation, {{a, true}, {b, false}}, w);
        }
        break;
      case RelationLabel::contradict:
        relation(FactorKind::relation, {{a, true}, {b, true}}, w);
        break;
      case RelationLabel::equivalence:
        relation(FactorKind::relation, {{a, true}, {b, false}}, w);
        relation(FactorKind::relation, {{b, true}, {a, false}}, w);
        break;
      case RelationLabel::none:
        break;
    }
  }
  return graph;
}

bool relation_holds(const FactorGraph& graph, const RelationEdge& edge,
                    const std::vector<bool>& values) {
  auto a = graph.var_for_statement(edge.source_id);
  auto b = graph.var_for_statement(edge.target_id);
  if (!a || !b) return true;
  const bool za = values.at(*a - 1);
  const bool zb = values.at(*b - 1);
  switch (edge.label) {
    case RelationLabel::fwd_entail: return !za || zb;
    case RelationLabel::contradict: return !(za && zb);
    case RelationLabel::equivalence: return za == zb;
    case RelationLabel::none: return true;
  }
  return true;
}

}  // namespace concord
