#include "concord/model.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

namespace concord {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DanglingReference: return "DanglingReference";
    case ErrorCode::ArityViolation: return "ArityViolation";
    case ErrorCode::BadProbability: return "BadProbability";
    case ErrorCode::AllZeroProbabilities: return "AllZeroProbabilities";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::EmptyStatement: return "EmptyStatement";
    case ErrorCode::SelfRelation: return "SelfRelation";
    case ErrorCode::CrossGroupRelation: return "CrossGroupRelation";
    case ErrorCode::UnknownPredicate: return "UnknownPredicate";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::Schema: return "SchemaViolation";
    case ErrorCode::EmptySpace: return "EmptySpace";
    case ErrorCode::HardUnsat: return "HardUnsat";
    case ErrorCode::TooLarge: return "TooLarge";
  }
  return "Unknown";
}

std::string_view to_string(QueryKind kind) {
  return kind == QueryKind::boolean ? "boolean" : "multiple_choice";
}

std::string_view to_string(Polarity polarity) {
  return polarity == Polarity::negate ? "negate" : "affirm";
}

std::string_view to_string(RelationLabel label) {
  switch (label) {
    case RelationLabel::fwd_entail: return "fwd_entail";
    case RelationLabel::contradict: return "contradict";
    case RelationLabel::equivalence: return "equivalence";
    case RelationLabel::none: return "none";
  }
  return "none";
}

std::string_view to_string(RelationMask mask) {
  switch (mask) {
    case RelationMask::all: return "all";
    case RelationMask::entail_only: return "entail_only";
    case RelationMask::contradict_only: return "contradict_only";
  }
  return "all";
}

QueryKind parse_query_kind(std::string_view text) {
  if (text == "multiple_choice") return QueryKind::multiple_choice;
  if (text == "boolean") return QueryKind::boolean;
  throw Error(ErrorCode::Schema, "unknown query kind '" + std::string(text) + "'");
}

Polarity parse_polarity(std::string_view text) {
  if (text == "affirm") return Polarity::affirm;
  if (text == "negate") return Polarity::negate;
  throw Error(ErrorCode::Schema, "unknown polarity '" + std::string(text) + "'");
}

RelationLabel parse_relation_label(std::string_view text) {
  if (text == "fwd_entail") return RelationLabel::fwd_entail;
  if (text == "contradict") return RelationLabel::contradict;
  if (text == "equivalence") return RelationLabel::equivalence;
  if (text == "none") return RelationLabel::none;
  throw Error(ErrorCode::Schema, "unknown relation label '" + std::string(text) + "'");
}

RelationMask parse_relation_mask(std::string_view text) {
  if (text == "all") return RelationMask::all;
  if (text == "entail_only" || text == "entail-only") return RelationMask::entail_only;
  if (text == "contradict_only" || text == "contradict-only") return RelationMask::contradict_only;
  throw Error(ErrorCode::Schema, "unknown relation mask '" + std::string(text) + "'");
}

void validate_config(const Config& config) {
  auto in_unit = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; };
  if (!in_unit(config.beta)) {
    throw Error(ErrorCode::InvalidConfig, "beta must lie in [0,1]");
  }
  if (!in_unit(config.lambda)) {
    throw Error(ErrorCode::InvalidConfig, "lambda must lie in [0,1]");
  }
  if (config.timeout_ms < 0) {
    throw Error(ErrorCode::InvalidConfig, "timeout_ms must be >= 0");
  }
  if (!(config.epsilon > 0.0 && config.epsilon < 0.5)) {
    throw Error(ErrorCode::InvalidConfig, "epsilon must lie in (0, 0.5)");
  }
}

std::string candidate_statement_id(std::string_view query_id, std::size_t index) {
  std::string id(query_id);
  id += '#';
  id += std::to_string(index);
  return id;
}

std::string context_statement_id(std::string_view context_id) {
  return "ctx:" + std::string(context_id);
}

const Query* ValidatedBatch::find_query(std::string_view id) const {
  for (const auto& q : batch_.queries) {
    if (q.id == id) return &q;
  }
  return nullptr;
}

const std::string* ValidatedBatch::group_of_statement(std::string_view statement_id) const {
  if (statement_id.starts_with("ctx:")) {
    auto ctx_id = statement_id.substr(4);
    for (const auto& c : batch_.contexts) {
      if (c.id == ctx_id) {
        const Query* q = find_query(c.query_id);
        return q ? &q->group_id : nullptr;
      }
    }
    return nullptr;
  }
  auto hash = statement_id.rfind('#');
  if (hash == std::string_view::npos) return nullptr;
  const Query* q = find_query(statement_id.substr(0, hash));
  if (!q) return nullptr;
  auto index_text = statement_id.substr(hash + 1);
  if (index_text.empty() ||
      !std::all_of(index_text.begin(), index_text.end(), [](char ch) { return ch >= '0' && ch <= '9'; })) {
    return nullptr;
  }
  std::size_t index = std::stoul(std::string(index_text));
  return index < q->candidates.size() ? &q->group_id : nullptr;
}

std::vector<Candidate> normalize_probs(std::vector<Candidate> candidates, double epsilon,
                                       QueryKind kind) {
  double total = 0.0;
  for (const auto& c : candidates) total += c.raw_prob;
  if (!(total > 0.0)) {
    throw Error(ErrorCode::AllZeroProbabilities, "every candidate has probability 0");
  }
  const bool divide = kind == QueryKind::multiple_choice;
  for (auto& c : candidates) {
    double p = divide ? c.raw_prob / total : c.raw_prob;
    c.norm_prob = std::clamp(p, epsilon, 1.0 - epsilon);
  }
  return candidates;
}

ValidatedBatch validate_batch(Batch batch, double epsilon) {
  std::unordered_map<std::string, const Query*> queries;
  for (const auto& q : batch.queries) {
    if (q.id.empty()) throw Error(ErrorCode::Schema, "query with empty id");
    if (!queries.emplace(q.id, &q).second) {
      throw Error(ErrorCode::DuplicateId, "query id '" + q.id + "' appears twice");
    }
    if (q.kind == QueryKind::boolean && q.candidates.size() != 1) {
      throw Error(ErrorCode::ArityViolation, "boolean query '" + q.id + "' has " +
                                                 std::to_string(q.candidates.size()) +
                                                 " candidates, expected 1");
    }
    if (q.candidates.empty()) {
      throw Error(ErrorCode::ArityViolation, "query '" + q.id + "' has no candidates");
    }
    for (const auto& c : q.candidates) {
      if (!std::isfinite(c.raw_prob) || c.raw_prob < 0.0 || c.raw_prob > 1.0) {
        throw Error(ErrorCode::BadProbability,
                    "candidate of query '" + q.id + "' has probability outside [0,1]");
      }
      if (c.statement.empty()) {
        throw Error(ErrorCode::EmptyStatement, "candidate of query '" + q.id + "' has no statement");
      }
    }
  }

  std::unordered_map<std::string, std::string> statement_group;
  for (const auto& q : batch.queries) {
    for (std::size_t j = 0; j < q.candidates.size(); ++j) {
      statement_group.emplace(candidate_statement_id(q.id, j), q.group_id);
    }
  }
  std::unordered_set<std::string> context_ids;
  for (auto& c : batch.contexts) {
    if (!context_ids.insert(c.id).second) {
      throw Error(ErrorCode::DuplicateId, "context id '" + c.id + "' appears twice");
    }
    auto it = queries.find(c.query_id);
    if (it == queries.end()) {
      throw Error(ErrorCode::DanglingReference,
                  "context '" + c.id + "' references unknown query '" + c.query_id + "'");
    }
    if (c.text.empty()) {
      throw Error(ErrorCode::EmptyStatement, "context '" + c.id + "' has no text");
    }
    c.fixed_true = true;
    statement_group.emplace(context_statement_id(c.id), it->second->group_id);
  }

  std::vector<RelationEdge> kept;
  kept.reserve(batch.relations.size());
  for (auto& e : batch.relations) {
    auto src = statement_group.find(e.source_id);
    if (src == statement_group.end()) {
      throw Error(ErrorCode::DanglingReference, "relation source '" + e.source_id + "' is unknown");
    }
    auto dst = statement_group.find(e.target_id);
    if (dst == statement_group.end()) {
      throw Error(ErrorCode::DanglingReference, "relation target '" + e.target_id + "' is unknown");
    }
    if (!std::isfinite(e.prob) || e.prob < 0.0 || e.prob > 1.0) {
      throw Error(ErrorCode::BadProbability, "relation " + e.source_id + " -> " + e.target_id +
                                                 " has probability outside [0,1]");
    }
    if (e.source_id == e.target_id) {
      throw Error(ErrorCode::SelfRelation, "relation from '" + e.source_id + "' to itself");
    }
    if (src->second != dst->second) {
      throw Error(ErrorCode::CrossGroupRelation, "relation " + e.source_id + " -> " + e.target_id +
                                                     " spans groups '" + src->second + "' and '" +
                                                     dst->second + "'");
    }
    if (e.label != RelationLabel::none) kept.push_back(std::move(e));
  }
  batch.relations = std::move(kept);

  for (auto& q : batch.queries) {
    q.candidates = normalize_probs(std::move(q.candidates), epsilon, q.kind);
  }
  return ValidatedBatch(std::move(batch));
}

}  // namespace concord
