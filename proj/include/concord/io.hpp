// JSON file schemas (all carry "version": 1). Parse errors raise
// Error(Schema).
//
//   beliefs:          { version, queries: [{id, group_id, kind, text, predicate?,
//                       candidates: [{answer_text, statement, prob, polarity?}]}],
//                       contexts: [{id, query_id, text}] }
//   relations:        { version, edges: [{source, target, label, prob}] }
//   constraint graph: { version, predicates: [...], facts: [{entity, predicate, truth}],
//                       edges: [{source_predicate, target_predicate, polarity, weight}] }
//   golds:            { version, golds: [{query_id, group_id, gold_truth? | gold_answers?}] }
//   run result:       { version, config, selections, groups, metrics?, flips? }
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "concord/inference.hpp"
#include "concord/metrics.hpp"
#include "concord/model.hpp"
#include "concord/tuner.hpp"

namespace concord {

inline constexpr int kSchemaVersion = 1;

std::string read_text_file(const std::filesystem::path& path);
// Writes to a temporary sibling and renames it into place.
void write_text_file(const std::filesystem::path& path, std::string_view text);

Batch parse_beliefs(std::string_view text);
std::string serialize_beliefs(const Batch& batch);

std::vector<RelationEdge> parse_relations(std::string_view text);
std::string serialize_relations(const std::vector<RelationEdge>& edges);

ConstraintGraph parse_constraint_graph(std::string_view text);
std::string serialize_constraint_graph(const ConstraintGraph& graph);

std::vector<GoldRecord> parse_golds(std::string_view text);
std::string serialize_golds(const std::vector<GoldRecord>& golds);

struct RunReport {
  RunResult result;
  std::map<std::string, double> metrics;
  std::optional<FlipCounts> flips;
};

std::string serialize_run_report(const RunReport& report);
RunReport parse_run_report(std::string_view text);

std::string serialize_trial(const TuneResult& result, const SearchSpace& space);

}  // namespace concord
