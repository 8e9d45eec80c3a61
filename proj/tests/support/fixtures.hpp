// Generated fixtures shared by the tuner tests and the acceptance suite.
#pragma once

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "builders.hpp"
#include "concord/graph.hpp"
#include "concord/metrics.hpp"
#include "concord/model.hpp"

namespace concord::testing {

struct LabelledBatch {
  Batch batch;
  std::vector<GoldRecord> golds;
  ConstraintGraph graph;
};

// Two-question groups. In "true alarm" groups the first answer is a confident
// mistake contradicted (p in [0.9, 0.99]) by a very confident correct second
// answer; fixing it needs beta low enough and lambda below the contradiction.
// In "false alarm" groups a weaker contradiction (p in [0.6, 0.8]) links two
// correct answers, so lambda must also stay above those.
inline LabelledBatch planted_contradictions(std::uint64_t seed = 2024) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  LabelledBatch out;
  auto add_gold = [&](const std::string& q, const std::string& g, const std::string& a) {
    GoldRecord r;
    r.query_id = q;
    r.group_id = g;
    r.gold_answers = std::vector<std::string>{a};
    out.golds.push_back(r);
  };
  for (int i = 0; i < 16; ++i) {
    const bool true_alarm = i % 2 == 0;
    const std::string g = "pair" + std::to_string(10 + i);
    const std::string q1 = g + "-a", q2 = g + "-b";
    const double wrong = 0.53 + 0.04 * unit(rng);
    if (true_alarm) {
      out.batch.queries.push_back(mc(q1, g, {{"wrong", wrong}, {"right", 1.0 - wrong}}));
    } else {
      out.batch.queries.push_back(mc(q1, g, {{"right", wrong}, {"wrong", 1.0 - wrong}}));
    }
    out.batch.queries.push_back(mc(q2, g, {{"right", 0.85 + 0.1 * unit(rng)}, {"other", 0.05}}));
    add_gold(q1, g, "right");
    add_gold(q2, g, "right");
    const double p = true_alarm ? 0.9 + 0.09 * unit(rng) : 0.6 + 0.2 * unit(rng);
    out.batch.relations.push_back(edge(q1 + "#0", q2 + "#0", RelationLabel::contradict, p));
  }
  return out;
}

// Five entities with ten yes/no beliefs each over a small taxonomy. Each
// correct answer has confidence in [0.6, 0.95]; ten answers are corrupted,
// chosen among consequents of the entity's class so the corruption violates
// a gold constraint, with confidence in [0.55, 0.7]. Relations are the
// grounded gold constraints plus spurious low-confidence edges.
inline LabelledBatch entity_batch(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  LabelledBatch out;
  ConstraintGraph& cg = out.graph;
  cg.predicates = {"animal",    "bird",      "mammal",  "fish",      "has_wings",
                   "lays_eggs", "feathers",  "has_fur", "has_gills", "breathes_air"};
  auto pos = [&](const char* a, const char* b, double w) {
    cg.edges.push_back({a, b, EdgePolarity::positive, w});
  };
  auto neg = [&](const char* a, const char* b, double w) {
    cg.edges.push_back({a, b, EdgePolarity::negative, w});
  };
  pos("bird", "animal", 1.0);
  pos("mammal", "animal", 1.0);
  pos("fish", "animal", 1.0);
  pos("bird", "has_wings", 0.95);
  pos("bird", "lays_eggs", 0.95);
  pos("bird", "feathers", 1.0);
  pos("bird", "breathes_air", 1.0);
  pos("mammal", "has_fur", 0.9);
  pos("mammal", "breathes_air", 1.0);
  pos("fish", "has_gills", 1.0);
  neg("bird", "mammal", 1.0);
  neg("bird", "fish", 1.0);
  neg("mammal", "fish", 1.0);
  neg("mammal", "feathers", 1.0);
  neg("fish", "has_fur", 1.0);
  neg("fish", "feathers", 1.0);
  neg("bird", "has_gills", 1.0);
  neg("mammal", "has_gills", 1.0);
  neg("fish", "breathes_air", 0.9);
  neg("bird", "has_fur", 1.0);

  const std::vector<std::pair<std::string, std::string>> entities = {
      {"sparrow", "bird"}, {"eagle", "bird"}, {"dog", "mammal"}, {"cat", "mammal"}, {"salmon", "fish"}};
  const std::map<std::string, std::set<std::string>> true_facts = {
      {"bird", {"animal", "bird", "has_wings", "lays_eggs", "feathers", "breathes_air"}},
      {"mammal", {"animal", "mammal", "has_fur", "breathes_air"}},
      {"fish", {"animal", "fish", "lays_eggs", "has_gills"}}};

  // Corruption candidates: every belief except the entity's own class.
  std::vector<std::pair<std::size_t, std::string>> corruptible;
  for (std::size_t e = 0; e < entities.size(); ++e) {
    for (const auto& p : cg.predicates) {
      if (p != entities[e].second && p != "animal") corruptible.emplace_back(e, p);
    }
  }
  std::shuffle(corruptible.begin(), corruptible.end(), rng);
  std::set<std::pair<std::size_t, std::string>> corrupted(corruptible.begin(), corruptible.begin() + 10);

  for (std::size_t e = 0; e < entities.size(); ++e) {
    const auto& [entity, cls] = entities[e];
    for (const auto& p : cg.predicates) {
      const bool truth = true_facts.at(cls).count(p) > 0;
      cg.facts.push_back({entity, p, truth});
      const bool bad = corrupted.count({e, p}) > 0;
      const bool answer = bad ? !truth : truth;
      const double conf = bad ? 0.55 + 0.15 * unit(rng) : 0.6 + 0.35 * unit(rng);
      out.batch.queries.push_back(
          yes_no(entity + "." + p, entity, conf, answer ? Polarity::affirm : Polarity::negate, p));
      GoldRecord g;
      g.query_id = entity + "." + p;
      g.group_id = entity;
      g.gold_truth = truth;
      out.golds.push_back(g);
    }
  }

  const ValidatedBatch v = validate_batch(out.batch);
  out.batch.relations = ground_constraint_graph(cg, v);
  // Spurious relations a noisy relation model might add.
  for (std::size_t e = 0; e < entities.size(); ++e) {
    for (int k = 0; k < 4; ++k) {
      const auto a = cg.predicates[rng() % cg.predicates.size()];
      const auto b = cg.predicates[rng() % cg.predicates.size()];
      if (a == b) continue;
      const auto label = rng() % 2 ? RelationLabel::contradict : RelationLabel::fwd_entail;
      out.batch.relations.push_back(edge(entities[e].first + "." + a + "#0",
                                         entities[e].first + "." + b + "#0", label,
                                         0.5 + 0.25 * unit(rng)));
    }
  }
  return out;
}

}  // namespace concord::testing
