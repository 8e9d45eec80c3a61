#include "concord/inference.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

namespace concord {

namespace {

bool boolean_baseline_truth(const Candidate& c) {
  const bool stated = c.polarity == Polarity::affirm;
  return c.norm_prob >= 0.5 ? stated : !stated;
}

std::size_t argmax_candidate(const Query& q) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < q.candidates.size(); ++j) {
    if (q.candidates[j].norm_prob > q.candidates[best].norm_prob) best = j;
  }
  return best;
}

}  // namespace

std::vector<bool> naive_baseline(const FactorGraph& graph, const ValidatedBatch& batch) {
  std::vector<bool> values(graph.variables.size(), false);
  for (const auto& v : graph.variables) {
    if (v.source == VariableSource::context) values[static_cast<std::size_t>(v.var_id - 1)] = true;
  }
  for (const auto& q : batch.queries()) {
    const QueryBlock* block = graph.block_for(q.id);
    if (!block) continue;
    if (q.kind == QueryKind::boolean) {
      values[static_cast<std::size_t>(block->var_ids.front() - 1)] =
          boolean_baseline_truth(q.candidates.front());
    } else {
      values[static_cast<std::size_t>(block->var_ids[argmax_candidate(q)] - 1)] = true;
    }
  }
  return values;
}

Assignment resolve_assignment(const FactorGraph& graph, const ValidatedBatch& batch,
                              const Solution& solution, const std::vector<bool>& baseline) {
  Assignment out;
  out.values = solution.values;
  out.objective = solution.objective;
  out.status = solution.status;
  out.stats = solution.stats;

  for (const auto& q : batch.queries()) {
    const QueryBlock* block = graph.block_for(q.id);
    if (!block) continue;
    QuerySelection sel;
    sel.query_id = q.id;
    sel.group_id = q.group_id;
    sel.kind = q.kind;
    sel.predicate = q.predicate;
    if (q.kind == QueryKind::boolean) {
      const auto var = static_cast<std::size_t>(block->var_ids.front() - 1);
      sel.truth = solution.values[var];
      sel.baseline_truth = baseline[var];
      sel.answer = sel.truth ? "yes" : "no";
      sel.baseline_answer = sel.baseline_truth ? "yes" : "no";
      sel.flipped = sel.truth != sel.baseline_truth;
    } else {
      std::optional<std::size_t> chosen;
      std::size_t base = 0;
      for (std::size_t j = 0; j < block->var_ids.size(); ++j) {
        const auto var = static_cast<std::size_t>(block->var_ids[j] - 1);
        if (solution.values[var] && !chosen) chosen = j;
        if (baseline[var]) base = j;
      }
      if (!chosen) throw Error(ErrorCode::HardUnsat, "query '" + q.id + "' has no true candidate");
      sel.candidate_index = chosen;
      sel.answer = q.candidates[*chosen].answer_text;
      sel.baseline_answer = q.candidates[base].answer_text;
      sel.flipped = *chosen != base;
    }
    out.selections.push_back(std::move(sel));
  }

  for (const auto& e : graph.edges) {
    if (!relation_holds(graph, e, solution.values)) out.violated_relations.push_back(e);
  }
  return out;
}

Assignment infer_group(const ValidatedBatch& batch, std::span<const RelationEdge> edges,
                       const Config& config) {
  const FactorGraph graph = build_factor_graph(batch, edges, config);
  const WeightedClauseSet clauses = encode(graph);
  const std::vector<bool> baseline = naive_baseline(graph, batch);
  const Solution solution = solve(clauses, config.timeout_ms, baseline);
  return resolve_assignment(graph, batch, solution, baseline);
}

Problem Problem::prepare(const ValidatedBatch& batch, std::span<const RelationEdge> edges,
                         double epsilon) {
  std::vector<std::string> order;
  std::map<std::string, Batch> parts;
  std::map<std::string, std::string> query_group;
  for (const auto& q : batch.queries()) {
    auto [it, inserted] = parts.try_emplace(q.group_id);
    if (inserted) order.push_back(q.group_id);
    it->second.queries.push_back(q);
    query_group.emplace(q.id, q.group_id);
  }
  for (const auto& c : batch.contexts()) {
    parts.at(query_group.at(c.query_id)).contexts.push_back(c);
  }
  std::map<std::string, std::vector<RelationEdge>> group_edges;
  for (const auto& e : edges) {
    const std::string* src = batch.group_of_statement(e.source_id);
    const std::string* dst = batch.group_of_statement(e.target_id);
    if (!src || !dst) {
      throw Error(ErrorCode::DanglingReference,
                  "relation " + e.source_id + " -> " + e.target_id + " not in batch");
    }
    if (*src != *dst) {
      throw Error(ErrorCode::CrossGroupRelation,
                  "relation " + e.source_id + " -> " + e.target_id + " spans groups");
    }
    group_edges[*src].push_back(e);
  }

  Problem problem;
  for (const auto& id : order) {
    const auto& raw = group_edges[id];
    problem.groups.push_back({id, validate_batch(std::move(parts.at(id)), epsilon), dedup_relations(raw)});
  }
  return problem;
}

std::size_t Problem::num_queries() const {
  std::size_t n = 0;
  for (const auto& g : groups) n += g.batch.queries().size();
  return n;
}

RunResult run(const Problem& problem, const Config& config, const RunOptions& options) {
  validate_config(config);
  const std::size_t n = problem.groups.size();
  std::vector<GroupOutcome> outcomes(n);
  std::vector<std::vector<QuerySelection>> selections(n);
  std::vector<std::exception_ptr> errors(n);

  auto work = [&](std::size_t i) {
    try {
      const GroupProblem& g = problem.groups[i];
      auto active = filter_relations(g.edges, config.lambda, config.relation_mask);
      Assignment a = infer_group(g.batch, active, config);
      outcomes[i] = {g.group_id, a.status, a.objective, std::move(active),
                     std::move(a.violated_relations), a.stats};
      selections[i] = std::move(a.selections);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };

  const unsigned jobs = std::max(1U, std::min<unsigned>(options.jobs, static_cast<unsigned>(n)));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n; ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < jobs; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) work(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  RunResult result;
  result.config = config;
  result.groups = std::move(outcomes);
  for (auto& s : selections) {
    for (auto& sel : s) result.selections.push_back(std::move(sel));
  }
  std::sort(result.selections.begin(), result.selections.end(),
            [](const QuerySelection& a, const QuerySelection& b) { return a.query_id < b.query_id; });
  return result;
}

}  // namespace concord
