#include <algorithm>
#include <cmath>
#include <random>

#include "builders.hpp"
#include "concord/graph.hpp"
#include "concord/solver.hpp"
#include "concord/synthetic.hpp"
#include "doctest.h"
#include "reference.hpp"

using namespace concord;
using namespace concord::testing;

namespace {

std::vector<const Factor*> factors_of(const FactorGraph& g, FactorKind kind) {
  std::vector<const Factor*> out;
  for (const auto& f : g.factors) {
    if (f.kind == kind) out.push_back(&f);
  }
  return out;
}

Config with_beta(double beta) {
  Config c;
  c.beta = beta;
  return c;
}

}  // namespace

TEST_CASE("filter_relations applies threshold and mask") {
  const std::vector<RelationEdge> edges = {edge("a", "b", RelationLabel::contradict, 0.6)};
  CHECK(filter_relations(edges, 0.7, RelationMask::all).empty());

  const std::vector<RelationEdge> entail = {edge("a", "b", RelationLabel::fwd_entail, 0.9)};
  CHECK(filter_relations(entail, 0.5, RelationMask::contradict_only).empty());
  CHECK(filter_relations(entail, 0.5, RelationMask::entail_only).size() == 1);

  const std::vector<RelationEdge> three = {edge("a", "b", RelationLabel::contradict, 0.5),
                                           edge("a", "c", RelationLabel::contradict, 0.8),
                                           edge("b", "c", RelationLabel::fwd_entail, 0.95)};
  const auto kept = filter_relations(three, 0.8, RelationMask::all);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].target_id == "c");
  CHECK(kept[1].source_id == "b");

  const std::vector<RelationEdge> eq = {edge("a", "b", RelationLabel::equivalence, 0.9)};
  CHECK(filter_relations(eq, 0.5, RelationMask::entail_only).size() == 1);
  CHECK(filter_relations(eq, 0.5, RelationMask::contradict_only).empty());
}

TEST_CASE("dedup keeps the highest-weighted duplicate") {
  const std::vector<RelationEdge> in = {edge("a", "b", RelationLabel::contradict, 0.7),
                                        edge("b", "a", RelationLabel::contradict, 0.9)};
  const auto out = dedup_relations(in);
  REQUIRE(out.size() == 1);
  CHECK(out[0].label == RelationLabel::contradict);
  CHECK(out[0].prob == 0.9);
}

TEST_CASE("dedup merges two-way entailment into equivalence with the smaller prob") {
  const std::vector<RelationEdge> in = {edge("a", "b", RelationLabel::fwd_entail, 0.8),
                                        edge("b", "a", RelationLabel::fwd_entail, 0.9)};
  const auto out = dedup_relations(in);
  REQUIRE(out.size() == 1);
  CHECK(out[0].label == RelationLabel::equivalence);
  CHECK(out[0].prob == 0.8);
}

TEST_CASE("dedup leaves a single edge alone") {
  const std::vector<RelationEdge> in = {edge("x", "y", RelationLabel::fwd_entail, 0.66)};
  CHECK(dedup_relations(in) == in);
}

TEST_CASE("grounding the sparrow constraint") {
  ConstraintGraph cg;
  cg.predicates = {"bird", "has_feet", "mammal", "lays_eggs", "fish"};
  cg.edges = {{"bird", "has_feet", EdgePolarity::positive, 1.0},
              {"mammal", "lays_eggs", EdgePolarity::negative, 0.9},
              {"fish", "has_feet", EdgePolarity::negative, 0.8}};
  Batch b;
  b.queries.push_back(yes_no("s-bird", "sparrow", 0.9, Polarity::affirm, "bird"));
  b.queries.push_back(yes_no("s-feet", "sparrow", 0.6, Polarity::negate, "has_feet"));
  b.queries.push_back(yes_no("d-mammal", "dog", 0.9, Polarity::affirm, "mammal"));
  b.queries.push_back(yes_no("d-eggs", "dog", 0.8, Polarity::negate, "lays_eggs"));
  b.queries.push_back(yes_no("c-fish", "cod", 0.8, Polarity::affirm, "fish"));
  const auto v = validate_batch(b);
  validate_constraint_graph(cg);
  const auto grounded = ground_constraint_graph(cg, v);
  REQUIRE(grounded.size() == 2);
  const auto feet = std::find_if(grounded.begin(), grounded.end(),
                                 [](const RelationEdge& e) { return e.source_id == "s-bird#0"; });
  REQUIRE(feet != grounded.end());
  CHECK(feet->target_id == "s-feet#0");
  CHECK(feet->label == RelationLabel::fwd_entail);
  CHECK(feet->prob == 1.0);
  const auto eggs = std::find_if(grounded.begin(), grounded.end(),
                                 [](const RelationEdge& e) { return e.source_id == "d-mammal#0"; });
  REQUIRE(eggs != grounded.end());
  CHECK(eggs->label == RelationLabel::contradict);
  CHECK(eggs->prob == 0.9);
}

TEST_CASE("grounding rejects unknown predicates") {
  ConstraintGraph cg;
  cg.predicates = {"bird"};
  cg.edges = {{"bird", "has_wings", EdgePolarity::positive, 1.0}};
  CHECK_THROWS_AS(validate_constraint_graph(cg), Error);
}

TEST_CASE("unary weights") {
  CHECK(unary_log_weight(0.8, 1.0) == doctest::Approx(1.3863).epsilon(1e-4));

  Batch b;
  b.queries.push_back(yes_no("q", "g", 0.9, Polarity::negate));
  const auto v = validate_batch(b);
  const auto g = build_factor_graph(v, {}, with_beta(1.0));
  const auto unary = factors_of(g, FactorKind::unary);
  REQUIRE(unary.size() == 1);
  CHECK(unary[0]->weight == doctest::Approx(2.1972).epsilon(1e-4));
  CHECK(unary[0]->literals[0].negated);
  CHECK(factors_of(g, FactorKind::exactly_one).empty());
}

TEST_CASE("low-probability candidates get a negated literal with positive weight") {
  Batch b;
  b.queries.push_back(mc("q", "g", {{"x", 0.7}, {"y", 0.3}}));
  const auto g = build_factor_graph(validate_batch(b), {}, with_beta(1.0));
  const auto unary = factors_of(g, FactorKind::unary);
  REQUIRE(unary.size() == 2);
  CHECK_FALSE(unary[0]->literals[0].negated);
  CHECK(unary[1]->literals[0].negated);
  CHECK(unary[0]->weight == doctest::Approx(std::log(7.0 / 3.0)));
  CHECK(unary[1]->weight == doctest::Approx(std::log(7.0 / 3.0)));
}

TEST_CASE("beta = 1 zeroes every relation weight") {
  const auto v = validate_batch(capitals_batch());
  const auto g = build_factor_graph(v, v.relations(), with_beta(1.0));
  for (const auto* f : factors_of(g, FactorKind::relation)) CHECK(f->weight == 0.0);
  const auto clauses = encode(g);
  for (const auto& c : clauses.soft_clauses) CHECK(c.literals.size() == 1);
}

TEST_CASE("entailment correction splits into two half-weight units") {
  Batch b;
  b.queries.push_back(mc("q1", "g", {{"x", 0.5}, {"y", 0.5}}));
  b.queries.push_back(mc("q2", "g", {{"x", 0.5}, {"y", 0.5}}));
  b.relations.push_back(edge("q1#0", "q2#0", RelationLabel::fwd_entail, 0.96));
  const auto v = validate_batch(b);
  Config c = with_beta(0.25);
  c.entailment_correction = true;
  const auto g = build_factor_graph(v, v.relations(), c);
  const auto ec = factors_of(g, FactorKind::entailment_corrected);
  REQUIRE(ec.size() == 2);
  for (const auto* f : ec) {
    CHECK(f->literals.size() == 1);
    CHECK_FALSE(f->literals[0].negated);
    CHECK(f->weight == doctest::Approx(0.75 * 1.6094).epsilon(1e-4));
  }
  CHECK(factors_of(g, FactorKind::relation).empty());
}

TEST_CASE("EC decomposition equals the three-case table") {
  for (double p : {0.1, 0.5, 0.9, 0.96, 0.999}) {
    const double w = -std::log(1.0 - p) / 2.0;
    const double top = 2.0 * w;
    for (int a = 0; a < 2; ++a) {
      for (int bb = 0; bb < 2; ++bb) {
        const double clauses = (a ? w : 0.0) + (bb ? w : 0.0) - top;
        CHECK(std::abs(clauses - std::log(ec_factor(a, bb, p))) <= 1e-12);
      }
    }
  }
}

TEST_CASE("equivalence yields two full-weight clauses") {
  const std::vector<RelationEdge> eq = {edge("q1#0", "q2#0", RelationLabel::equivalence, 0.9)};
  auto b = capitals_batch();
  b.relations.clear();
  const auto g = build_factor_graph(validate_batch(b), eq, with_beta(0.5));
  const auto rel = factors_of(g, FactorKind::relation);
  REQUIRE(rel.size() == 2);
  CHECK(rel[0]->weight == doctest::Approx(0.5 * -std::log(0.1)));
  CHECK(rel[1]->weight == rel[0]->weight);
}

TEST_CASE("factor graph structure") {
  Batch b = capitals_batch();
  b.queries.push_back(yes_no("q3", "capitals", 0.8, Polarity::affirm));
  b.contexts.push_back({"c", "q1", "Kabul is the capital of Afghanistan.", true});
  const auto v = validate_batch(b);
  const auto g = build_factor_graph(v, v.relations(), with_beta(0.5));
  CHECK(g.variables.size() == 6);
  CHECK(g.variables.front().var_id == 1);
  CHECK(g.variables.back().source == VariableSource::context);
  CHECK(factors_of(g, FactorKind::exactly_one).size() == 2);
  CHECK(factors_of(g, FactorKind::context_fix).size() == 1);
  CHECK(g.block_for("q2")->var_ids == std::vector<int>{3, 4});
  CHECK(*g.var_for_statement("ctx:c") == 6);
}

TEST_CASE("mask excludes the other relation type") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    const auto inst = random_instance(rng);
    const auto v = validate_batch(inst.batch);
    const auto deduped = dedup_relations(v.relations());
    Config c = inst.config;
    c.relation_mask = RelationMask::entail_only;
    auto g = build_factor_graph(v, filter_relations(deduped, c.lambda, c.relation_mask), c);
    for (const auto& f : g.factors) CHECK(f.relation_label != RelationLabel::contradict);
    c.relation_mask = RelationMask::contradict_only;
    g = build_factor_graph(v, filter_relations(deduped, c.lambda, c.relation_mask), c);
    for (const auto& f : g.factors) {
      CHECK(f.relation_label != RelationLabel::fwd_entail);
      CHECK(f.relation_label != RelationLabel::equivalence);
    }
  }
}

TEST_CASE("relation order does not change the graph") {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 200; ++i) {
    const auto inst = random_instance(rng);
    const auto v = validate_batch(inst.batch);
    auto shuffled = v.relations();
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto c = inst.config;
    const auto g1 =
        build_factor_graph(v, filter_relations(dedup_relations(v.relations()), c.lambda, c.relation_mask), c);
    const auto g2 =
        build_factor_graph(v, filter_relations(dedup_relations(shuffled), c.lambda, c.relation_mask), c);
    CHECK(g1 == g2);
  }
}

TEST_CASE("raising lambda only removes relations") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const auto inst = random_instance(rng);
    const auto deduped = dedup_relations(validate_batch(inst.batch).relations());
    const double lo = unit(rng);
    const double hi = lo + (1.0 - lo) * unit(rng);
    const auto a = filter_relations(deduped, lo, RelationMask::all);
    const auto b = filter_relations(deduped, hi, RelationMask::all);
    CHECK(b.size() <= a.size());
    for (const auto& e : b) CHECK(std::find(a.begin(), a.end(), e) != a.end());
  }
}

TEST_CASE("soft clause sum matches the factor product up to a constant") {
  std::mt19937_64 rng(29);
  int checked = 0;
  for (int i = 0; i < 300; ++i) {
    const auto inst = random_instance(rng);
    const auto v = validate_batch(inst.batch);
    const auto edges = filter_relations(dedup_relations(v.relations()), inst.config.lambda,
                                        inst.config.relation_mask);
    const auto g = build_factor_graph(v, edges, inst.config);
    const auto clauses = encode(g);
    const int n = clauses.num_vars;
    if (n > 12) continue;
    ++checked;
    std::optional<double> offset;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
      std::vector<bool> values(static_cast<std::size_t>(n));
      StatementValues z;
      for (int k = 0; k < n; ++k) {
        values[static_cast<std::size_t>(k)] = (mask >> k) & 1u;
        z[g.variables[static_cast<std::size_t>(k)].statement_id] = values[static_cast<std::size_t>(k)];
      }
      const double ref = reference_log_phi(v, edges, inst.config, z);
      const bool feasible = satisfies_hard(clauses, values);
      CHECK(feasible == std::isfinite(ref));
      if (!feasible) continue;
      const double diff = evaluate_objective(clauses, values) - ref;
      if (!offset) offset = diff;
      CHECK(std::abs(diff - *offset) <= 1e-9);
    }
  }
  CHECK(checked > 200);
}
