#include "concord/io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace concord {

using nlohmann::json;

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Schema, "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Schema, "cannot write '" + tmp.string() + "'");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw Error(ErrorCode::Schema, "short write to '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

namespace {

json parse_document(std::string_view text, std::string_view what) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Schema, std::string(what) + ": " + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::Schema, std::string(what) + ": expected an object");
  if (!doc.contains("version") || !doc["version"].is_number_integer() ||
      doc["version"].get<int>() != kSchemaVersion) {
    throw Error(ErrorCode::Schema, std::string(what) + ": missing or unsupported version");
  }
  return doc;
}

const json& field(const json& obj, std::string_view key, std::string_view where) {
  if (!obj.is_object()) throw Error(ErrorCode::Schema, std::string(where) + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw Error(ErrorCode::Schema, std::string(where) + ": missing '" + std::string(key) + "'");
  }
  return *it;
}

std::string get_string(const json& obj, std::string_view key, std::string_view where) {
  const json& v = field(obj, key, where);
  if (!v.is_string()) {
    throw Error(ErrorCode::Schema, std::string(where) + ": '" + std::string(key) + "' must be a string");
  }
  return v.get<std::string>();
}

double get_number(const json& obj, std::string_view key, std::string_view where) {
  const json& v = field(obj, key, where);
  if (!v.is_number()) {
    throw Error(ErrorCode::Schema, std::string(where) + ": '" + std::string(key) + "' must be a number");
  }
  return v.get<double>();
}

bool get_bool(const json& obj, std::string_view key, std::string_view where) {
  const json& v = field(obj, key, where);
  if (!v.is_boolean()) {
    throw Error(ErrorCode::Schema, std::string(where) + ": '" + std::string(key) + "' must be a boolean");
  }
  return v.get<bool>();
}

const json& get_array(const json& obj, std::string_view key, std::string_view where) {
  const json& v = field(obj, key, where);
  if (!v.is_array()) {
    throw Error(ErrorCode::Schema, std::string(where) + ": '" + std::string(key) + "' must be an array");
  }
  return v;
}

std::optional<std::string> opt_string(const json& obj, std::string_view key, std::string_view where) {
  if (!obj.contains(key) || obj[std::string(key)].is_null()) return std::nullopt;
  return get_string(obj, key, where);
}

json edge_to_json(const RelationEdge& e) {
  return {{"source", e.source_id}, {"target", e.target_id}, {"label", to_string(e.label)},
          {"prob", e.prob}};
}

RelationEdge edge_from_json(const json& j) {
  return {get_string(j, "source", "edge"), get_string(j, "target", "edge"),
          parse_relation_label(get_string(j, "label", "edge")), get_number(j, "prob", "edge")};
}

json config_to_json(const Config& c) {
  return {{"beta", c.beta},
          {"lambda", c.lambda},
          {"entailment_correction", c.entailment_correction},
          {"relation_mask", to_string(c.relation_mask)},
          {"timeout_ms", c.timeout_ms},
          {"epsilon", c.epsilon}};
}

Config config_from_json(const json& j) {
  Config c;
  c.beta = get_number(j, "beta", "config");
  c.lambda = get_number(j, "lambda", "config");
  c.entailment_correction = get_bool(j, "entailment_correction", "config");
  c.relation_mask = parse_relation_mask(get_string(j, "relation_mask", "config"));
  c.timeout_ms = static_cast<std::int64_t>(get_number(j, "timeout_ms", "config"));
  c.epsilon = get_number(j, "epsilon", "config");
  return c;
}

SolveStatus parse_status(std::string_view text) {
  if (text == "optimal") return SolveStatus::optimal;
  if (text == "timeout_fallback") return SolveStatus::timeout_fallback;
  throw Error(ErrorCode::Schema, "unknown solver status '" + std::string(text) + "'");
}

}  // namespace

Batch parse_beliefs(std::string_view text) {
  const json doc = parse_document(text, "beliefs");
  Batch batch;
  for (const json& jq : get_array(doc, "queries", "beliefs")) {
    Query q;
    q.id = get_string(jq, "id", "query");
    const std::string where = "query '" + q.id + "'";
    q.group_id = get_string(jq, "group_id", where);
    q.kind = parse_query_kind(get_string(jq, "kind", where));
    q.text = jq.contains("text") ? get_string(jq, "text", where) : std::string{};
    q.predicate = opt_string(jq, "predicate", where);
    for (const json& jc : get_array(jq, "candidates", where)) {
      Candidate c;
      c.answer_text = get_string(jc, "answer_text", where);
      c.statement = get_string(jc, "statement", where);
      c.raw_prob = get_number(jc, "prob", where);
      if (auto p = opt_string(jc, "polarity", where)) c.polarity = parse_polarity(*p);
      q.candidates.push_back(std::move(c));
    }
    batch.queries.push_back(std::move(q));
  }
  if (doc.contains("contexts")) {
    for (const json& jc : get_array(doc, "contexts", "beliefs")) {
      batch.contexts.push_back({get_string(jc, "id", "context"), get_string(jc, "query_id", "context"),
                                get_string(jc, "text", "context"), true});
    }
  }
  return batch;
}

std::string serialize_beliefs(const Batch& batch) {
  json queries = json::array();
  for (const auto& q : batch.queries) {
    json candidates = json::array();
    for (const auto& c : q.candidates) {
      json jc = {{"answer_text", c.answer_text}, {"statement", c.statement}, {"prob", c.raw_prob}};
      if (q.kind == QueryKind::boolean) jc["polarity"] = to_string(c.polarity);
      candidates.push_back(std::move(jc));
    }
    json jq = {{"id", q.id},
               {"group_id", q.group_id},
               {"kind", to_string(q.kind)},
               {"text", q.text},
               {"candidates", std::move(candidates)}};
    if (q.predicate) jq["predicate"] = *q.predicate;
    queries.push_back(std::move(jq));
  }
  json contexts = json::array();
  for (const auto& c : batch.contexts) {
    contexts.push_back({{"id", c.id}, {"query_id", c.query_id}, {"text", c.text}});
  }
  return json{{"version", kSchemaVersion}, {"queries", queries}, {"contexts", contexts}}.dump(2);
}

std::vector<RelationEdge> parse_relations(std::string_view text) {
  const json doc = parse_document(text, "relations");
  std::vector<RelationEdge> edges;
  for (const json& je : get_array(doc, "edges", "relations")) edges.push_back(edge_from_json(je));
  return edges;
}

std::string serialize_relations(const std::vector<RelationEdge>& edges) {
  json arr = json::array();
  for (const auto& e : edges) arr.push_back(edge_to_json(e));
  return json{{"version", kSchemaVersion}, {"edges", arr}}.dump(2);
}

ConstraintGraph parse_constraint_graph(std::string_view text) {
  const json doc = parse_document(text, "constraint graph");
  ConstraintGraph g;
  for (const json& p : get_array(doc, "predicates", "constraint graph")) {
    if (!p.is_string()) throw Error(ErrorCode::Schema, "constraint graph: predicates must be strings");
    g.predicates.push_back(p.get<std::string>());
  }
  if (doc.contains("facts")) {
    for (const json& f : get_array(doc, "facts", "constraint graph")) {
      g.facts.push_back({get_string(f, "entity", "fact"), get_string(f, "predicate", "fact"),
                         get_bool(f, "truth", "fact")});
    }
  }
  for (const json& e : get_array(doc, "edges", "constraint graph")) {
    ConstraintEdge edge;
    edge.source_predicate = get_string(e, "source_predicate", "constraint edge");
    edge.target_predicate = get_string(e, "target_predicate", "constraint edge");
    const std::string polarity = get_string(e, "polarity", "constraint edge");
    if (polarity == "positive") {
      edge.target_polarity = EdgePolarity::positive;
    } else if (polarity == "negative") {
      edge.target_polarity = EdgePolarity::negative;
    } else {
      throw Error(ErrorCode::Schema, "constraint edge: unknown polarity '" + polarity + "'");
    }
    edge.weight = get_number(e, "weight", "constraint edge");
    g.edges.push_back(std::move(edge));
  }
  return g;
}

std::string serialize_constraint_graph(const ConstraintGraph& graph) {
  json facts = json::array();
  for (const auto& f : graph.facts) {
    facts.push_back({{"entity", f.entity}, {"predicate", f.predicate}, {"truth", f.truth}});
  }
  json edges = json::array();
  for (const auto& e : graph.edges) {
    edges.push_back({{"source_predicate", e.source_predicate},
                     {"target_predicate", e.target_predicate},
                     {"polarity", e.target_polarity == EdgePolarity::positive ? "positive" : "negative"},
                     {"weight", e.weight}});
  }
  return json{{"version", kSchemaVersion},
              {"predicates", graph.predicates},
              {"facts", facts},
              {"edges", edges}}
      .dump(2);
}

std::vector<GoldRecord> parse_golds(std::string_view text) {
  const json doc = parse_document(text, "golds");
  std::vector<GoldRecord> golds;
  for (const json& jg : get_array(doc, "golds", "golds")) {
    GoldRecord g;
    g.query_id = get_string(jg, "query_id", "gold");
    g.group_id = jg.contains("group_id") ? get_string(jg, "group_id", "gold") : std::string{};
    if (jg.contains("gold_truth")) g.gold_truth = get_bool(jg, "gold_truth", "gold");
    if (jg.contains("gold_answers")) {
      std::vector<std::string> answers;
      for (const json& a : get_array(jg, "gold_answers", "gold")) {
        if (!a.is_string()) throw Error(ErrorCode::Schema, "gold: answers must be strings");
        answers.push_back(a.get<std::string>());
      }
      g.gold_answers = std::move(answers);
    }
    validate_gold(g);
    golds.push_back(std::move(g));
  }
  return golds;
}

std::string serialize_golds(const std::vector<GoldRecord>& golds) {
  json arr = json::array();
  for (const auto& g : golds) {
    json jg = {{"query_id", g.query_id}, {"group_id", g.group_id}};
    if (g.gold_truth) jg["gold_truth"] = *g.gold_truth;
    if (g.gold_answers) jg["gold_answers"] = *g.gold_answers;
    arr.push_back(std::move(jg));
  }
  return json{{"version", kSchemaVersion}, {"golds", arr}}.dump(2);
}

std::string serialize_run_report(const RunReport& report) {
  const RunResult& r = report.result;
  json selections = json::array();
  for (const auto& s : r.selections) {
    json js = {{"query_id", s.query_id},
               {"group_id", s.group_id},
               {"kind", to_string(s.kind)},
               {"answer", s.answer},
               {"truth", s.truth},
               {"baseline_answer", s.baseline_answer},
               {"baseline_truth", s.baseline_truth},
               {"flipped", s.flipped}};
    if (s.candidate_index) js["candidate_index"] = *s.candidate_index;
    if (s.predicate) js["predicate"] = *s.predicate;
    selections.push_back(std::move(js));
  }
  json groups = json::array();
  for (const auto& g : r.groups) {
    json violated = json::array();
    for (const auto& e : g.violated_relations) violated.push_back(edge_to_json(e));
    groups.push_back({{"group_id", g.group_id},
                      {"status", to_string(g.status)},
                      {"objective", g.objective},
                      {"active_relations", g.active_relations.size()},
                      {"violated_relations", violated},
                      {"nodes", g.stats.nodes}});
  }
  json doc = {{"version", kSchemaVersion},
              {"config", config_to_json(r.config)},
              {"selections", selections},
              {"groups", groups}};
  if (!report.metrics.empty()) doc["metrics"] = report.metrics;
  if (report.flips) doc["flips"] = {{"good", report.flips->good}, {"bad", report.flips->bad}};
  return doc.dump(2);
}

RunReport parse_run_report(std::string_view text) {
  const json doc = parse_document(text, "run result");
  RunReport report;
  RunResult& r = report.result;
  r.config = config_from_json(field(doc, "config", "run result"));
  for (const json& js : get_array(doc, "selections", "run result")) {
    QuerySelection s;
    s.query_id = get_string(js, "query_id", "selection");
    s.group_id = get_string(js, "group_id", "selection");
    s.kind = parse_query_kind(get_string(js, "kind", "selection"));
    s.answer = get_string(js, "answer", "selection");
    s.truth = get_bool(js, "truth", "selection");
    s.baseline_answer = get_string(js, "baseline_answer", "selection");
    s.baseline_truth = get_bool(js, "baseline_truth", "selection");
    s.flipped = get_bool(js, "flipped", "selection");
    if (js.contains("candidate_index")) {
      s.candidate_index = static_cast<std::size_t>(get_number(js, "candidate_index", "selection"));
    }
    s.predicate = opt_string(js, "predicate", "selection");
    r.selections.push_back(std::move(s));
  }
  for (const json& jg : get_array(doc, "groups", "run result")) {
    GroupOutcome g;
    g.group_id = get_string(jg, "group_id", "group");
    g.status = parse_status(get_string(jg, "status", "group"));
    g.objective = get_number(jg, "objective", "group");
    for (const json& je : get_array(jg, "violated_relations", "group")) {
      g.violated_relations.push_back(edge_from_json(je));
    }
    r.groups.push_back(std::move(g));
  }
  if (doc.contains("metrics")) {
    for (const auto& [name, value] : field(doc, "metrics", "run result").items()) {
      if (!value.is_number()) throw Error(ErrorCode::Schema, "metric '" + name + "' must be a number");
      report.metrics[name] = value.get<double>();
    }
  }
  if (doc.contains("flips")) {
    const json& jf = doc["flips"];
    report.flips = FlipCounts{static_cast<std::size_t>(get_number(jf, "good", "flips")),
                              static_cast<std::size_t>(get_number(jf, "bad", "flips"))};
  }
  return report;
}

std::string serialize_trial(const TuneResult& result, const SearchSpace& space) {
  json trials = json::array();
  for (const auto& t : result.trials) {
    trials.push_back({{"beta", t.beta}, {"lambda", t.lambda}, {"ec", t.ec}, {"metric", t.metric_value}});
  }
  const TrialResult& b = result.best;
  return json{{"version", kSchemaVersion},
              {"best",
               {{"beta", b.beta},
                {"lambda", b.lambda},
                {"ec", b.ec},
                {"metric_value", b.metric_value},
                {"trial_index", b.trial_index}}},
              {"space",
               {{"beta_bounds", {space.beta.lo, space.beta.hi}},
                {"lambda_bounds", {space.lambda.lo, space.lambda.hi}},
                {"ec_choices", space.ec_choices},
                {"trials", space.trials},
                {"seed", space.seed}}},
              {"trials", trials}}
      .dump(2);
}

}  // namespace concord
