// Per-group inference: relation preparation, graph compilation, solving and
// read-back of the selected answers.
#pragma once

#include <span>
#include <string>
#include <vector>

#include "concord/graph.hpp"
#include "concord/model.hpp"
#include "concord/solver.hpp"

namespace concord {

struct Assignment {
  std::vector<bool> values;  // indexed by var_id - 1
  double objective = 0.0;
  SolveStatus status = SolveStatus::optimal;
  std::vector<QuerySelection> selections;      // batch order
  std::vector<RelationEdge> violated_relations;
  SolveStats stats;
};

// Per-query probability argmax (lowest index on ties); boolean queries take
// the truth value their unary factor favours; context variables are true.
std::vector<bool> naive_baseline(const FactorGraph& graph, const ValidatedBatch& batch);

Assignment resolve_assignment(const FactorGraph& graph, const ValidatedBatch& batch,
                              const Solution& solution, const std::vector<bool>& baseline);

// Builds, encodes and solves a single group's graph.
Assignment infer_group(const ValidatedBatch& batch, std::span<const RelationEdge> edges,
                       const Config& config);

struct GroupProblem {
  std::string group_id;
  ValidatedBatch batch;
  std::vector<RelationEdge> edges;  // deduplicated, unfiltered
};

// A batch split into independently solvable groups with deduplicated
// relations, ready to be solved under many configurations.
struct Problem {
  std::vector<GroupProblem> groups;

  static Problem prepare(const ValidatedBatch& batch, std::span<const RelationEdge> edges,
                         double epsilon = kDefaultEpsilon);
  std::size_t num_queries() const;
};

struct GroupOutcome {
  std::string group_id;
  SolveStatus status = SolveStatus::optimal;
  double objective = 0.0;
  std::vector<RelationEdge> active_relations;
  std::vector<RelationEdge> violated_relations;
  SolveStats stats;
};

struct RunResult {
  Config config;
  std::vector<QuerySelection> selections;  // sorted by query id
  std::vector<GroupOutcome> groups;        // in group order
};

struct RunOptions {
  unsigned jobs = 1;
};

// Solves every group (concurrently up to `jobs`); output order does not
// depend on scheduling.
RunResult run(const Problem& problem, const Config& config, const RunOptions& options = {});

}  // namespace concord
