#include "concord/synthetic.hpp"

#include <chrono>
#include <cmath>

#include "concord/graph.hpp"
#include "concord/inference.hpp"

namespace concord {

RandomInstance random_instance(std::mt19937_64& rng, const RandomInstanceOptions& options) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform_int = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

  RandomInstance out;
  Batch& batch = out.batch;
  const int num_queries = uniform_int(1, options.max_queries);
  std::vector<std::string> statements;
  std::vector<int> statement_query;
  for (int i = 0; i < num_queries; ++i) {
    Query q;
    q.id = "q" + std::to_string(i);
    q.group_id = "g";
    q.kind = unit(rng) < options.boolean_probability ? QueryKind::boolean : QueryKind::multiple_choice;
    const int j_count = q.kind == QueryKind::boolean ? 1 : uniform_int(1, options.max_candidates);
    for (int j = 0; j < j_count; ++j) {
      Candidate c;
      c.answer_text = "a" + std::to_string(j);
      c.statement = q.id + " answer " + c.answer_text;
      c.raw_prob = 0.01 + 0.99 * unit(rng);
      c.polarity = unit(rng) < 0.5 ? Polarity::affirm : Polarity::negate;
      q.candidates.push_back(std::move(c));
      statements.push_back(candidate_statement_id(q.id, static_cast<std::size_t>(j)));
      statement_query.push_back(i);
    }
    batch.queries.push_back(std::move(q));
  }
  if (unit(rng) < options.context_probability) {
    const int target = uniform_int(0, num_queries - 1);
    batch.contexts.push_back({"c0", batch.queries[static_cast<std::size_t>(target)].id, "context", true});
    statements.push_back(context_statement_id("c0"));
    statement_query.push_back(-1);
  }

  const int num_relations = uniform_int(0, options.max_relations);
  const RelationLabel labels[] = {RelationLabel::fwd_entail, RelationLabel::contradict,
                                  RelationLabel::equivalence};
  const int n = static_cast<int>(statements.size());
  for (int r = 0; r < num_relations && n > 1; ++r) {
    const int a = uniform_int(0, n - 1);
    int b = uniform_int(0, n - 2);
    if (b >= a) ++b;
    if (statement_query[static_cast<std::size_t>(a)] == statement_query[static_cast<std::size_t>(b)]) {
      continue;
    }
    const double prob = options.min_relation_prob + (1.0 - options.min_relation_prob) * unit(rng);
    batch.relations.push_back({statements[static_cast<std::size_t>(a)],
                               statements[static_cast<std::size_t>(b)], labels[uniform_int(0, 2)],
                               prob});
  }

  out.config.beta = unit(rng);
  out.config.lambda = unit(rng);
  out.config.entailment_correction = unit(rng) < 0.5;
  return out;
}

OracleCheckReport oracle_check(std::size_t count, std::uint64_t seed, double tolerance,
                               const RandomInstanceOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(seed);
  OracleCheckReport report;
  for (std::size_t i = 0; i < count; ++i) {
    RandomInstance inst = random_instance(rng, options);
    const ValidatedBatch batch = validate_batch(inst.batch);
    const auto edges = filter_relations(dedup_relations(batch.relations()), inst.config.lambda,
                                        inst.config.relation_mask);
    const FactorGraph graph = build_factor_graph(batch, edges, inst.config);
    const WeightedClauseSet clauses = encode(graph);
    const std::vector<bool> baseline = naive_baseline(graph, batch);
    const Solution fast = solve(clauses, 0, baseline);
    const Solution slow = exhaustive_oracle(clauses, baseline);
    ++report.instances;
    if (std::abs(fast.objective - slow.objective) <= tolerance) {
      ++report.matches;
    } else {
      report.mismatches.push_back({i, fast.objective, slow.objective});
    }
  }
  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace concord
