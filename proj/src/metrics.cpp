#include "concord/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>
#include <unordered_map>

namespace concord {

void validate_gold(const GoldRecord& gold) {
  if (gold.gold_truth.has_value() == gold.gold_answers.has_value()) {
    throw Error(ErrorCode::Schema, "gold record '" + gold.query_id +
                                       "' needs exactly one of gold_truth / gold_answers");
  }
  if (gold.gold_answers && gold.gold_answers->empty()) {
    throw Error(ErrorCode::Schema, "gold record '" + gold.query_id + "' has no gold answers");
  }
}

namespace {

std::string_view trim(std::string_view s) {
  auto space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!s.empty() && space(s.front())) s.remove_prefix(1);
  while (!s.empty() && space(s.back())) s.remove_suffix(1);
  return s;
}

std::unordered_map<std::string_view, const GoldRecord*> index_golds(
    std::span<const GoldRecord> golds) {
  std::unordered_map<std::string_view, const GoldRecord*> index;
  for (const auto& g : golds) index.emplace(g.query_id, &g);
  return index;
}

std::vector<std::string> tokens(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{normalize_answer(text)};
  for (std::string t; in >> t;) out.push_back(std::move(t));
  return out;
}

double single_token_f1(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
  if (pred.empty() || gold.empty()) return pred.empty() && gold.empty() ? 1.0 : 0.0;
  std::map<std::string_view, int> counts;
  for (const auto& t : gold) ++counts[t];
  int same = 0;
  for (const auto& t : pred) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++same;
    }
  }
  if (same == 0) return 0.0;
  const double precision = static_cast<double>(same) / static_cast<double>(pred.size());
  const double recall = static_cast<double>(same) / static_cast<double>(gold.size());
  return 2.0 * precision * recall / (precision + recall);
}

}  // namespace

bool exact_answer_match(std::string_view predicted, std::string_view gold) {
  predicted = trim(predicted);
  gold = trim(gold);
  return predicted.size() == gold.size() &&
         std::equal(predicted.begin(), predicted.end(), gold.begin(), [](char a, char b) {
           return std::tolower(static_cast<unsigned char>(a)) ==
                  std::tolower(static_cast<unsigned char>(b));
         });
}

BinaryF1 binary_f1(std::span<const QuerySelection> selections, std::span<const GoldRecord> golds) {
  const auto index = index_golds(golds);
  std::size_t tp = 0, fp = 0, fn = 0;
  for (const auto& s : selections) {
    auto it = index.find(s.query_id);
    if (it == index.end() || !it->second->gold_truth) continue;
    const bool gold = *it->second->gold_truth;
    if (s.truth && gold) ++tp;
    if (s.truth && !gold) ++fp;
    if (!s.truth && gold) ++fn;
  }
  BinaryF1 out;
  out.no_positives = tp + fn == 0;
  if (tp == 0) return out;
  out.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  out.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  out.f1 = 2.0 * out.precision * out.recall / (out.precision + out.recall);
  return out;
}

ConsistencyResult consistency_tau(std::span<const QuerySelection> selections,
                                  const ConstraintGraph& graph) {
  std::map<std::string, std::map<std::string, std::vector<const QuerySelection*>>> beliefs;
  for (const auto& s : selections) {
    if (s.kind != QueryKind::boolean || !s.predicate) continue;
    beliefs[s.group_id][*s.predicate].push_back(&s);
  }
  ConsistencyResult out;
  for (const auto& [entity, by_predicate] : beliefs) {
    for (const auto& edge : graph.edges) {
      auto src = by_predicate.find(edge.source_predicate);
      auto dst = by_predicate.find(edge.target_predicate);
      if (src == by_predicate.end() || dst == by_predicate.end()) continue;
      for (const QuerySelection* a : src->second) {
        if (!a->truth) continue;
        for (const QuerySelection* b : dst->second) {
          if (a == b) continue;
          ++out.relevant;
          const bool violated =
              edge.target_polarity == EdgePolarity::positive ? !b->truth : b->truth;
          if (violated) ++out.violated;
        }
      }
    }
  }
  if (out.relevant > 0) {
    out.tau = static_cast<double>(out.violated) / static_cast<double>(out.relevant);
  }
  out.consistency = 1.0 - out.tau;
  return out;
}

std::optional<bool> is_correct(const QuerySelection& selection, const GoldRecord& gold,
                               const AnswerMatcher& match) {
  if (selection.kind == QueryKind::boolean && gold.gold_truth) {
    return selection.truth == *gold.gold_truth;
  }
  if (gold.gold_answers) {
    return std::any_of(gold.gold_answers->begin(), gold.gold_answers->end(),
                       [&](const std::string& g) { return match(selection.answer, g); });
  }
  return std::nullopt;
}

double accuracy(std::span<const QuerySelection> selections, std::span<const GoldRecord> golds,
                const AnswerMatcher& match) {
  const auto index = index_golds(golds);
  std::size_t scored = 0, correct = 0;
  for (const auto& s : selections) {
    auto it = index.find(s.query_id);
    if (it == index.end()) continue;
    auto ok = is_correct(s, *it->second, match);
    if (!ok) continue;
    ++scored;
    if (*ok) ++correct;
  }
  return scored == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(scored);
}

double perfect_consistency(std::span<const QuerySelection> selections,
                           std::span<const GoldRecord> golds, const AnswerMatcher& match) {
  const auto index = index_golds(golds);
  std::map<std::string, bool> group_ok;
  for (const auto& s : selections) {
    auto it = index.find(s.query_id);
    if (it == index.end()) continue;
    auto ok = is_correct(s, *it->second, match);
    if (!ok) continue;
    auto [g, inserted] = group_ok.try_emplace(s.group_id, true);
    g->second = g->second && *ok;
  }
  if (group_ok.empty()) return 0.0;
  const auto perfect = std::count_if(group_ok.begin(), group_ok.end(),
                                     [](const auto& kv) { return kv.second; });
  return static_cast<double>(perfect) / static_cast<double>(group_ok.size());
}

std::string normalize_answer(std::string_view text) {
  std::string lowered;
  lowered.reserve(text.size());
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (std::ispunct(u)) continue;
    lowered.push_back(static_cast<char>(std::tolower(u)));
  }
  std::istringstream in{lowered};
  std::string out;
  for (std::string word; in >> word;) {
    if (word == "a" || word == "an" || word == "the") continue;
    if (!out.empty()) out.push_back(' ');
    out += word;
  }
  return out;
}

double token_f1(std::string_view predicted, std::span<const std::string> golds) {
  const auto pred = tokens(predicted);
  double best = 0.0;
  for (const auto& g : golds) best = std::max(best, single_token_f1(pred, tokens(g)));
  return best;
}

double mean_token_f1(std::span<const QuerySelection> selections, std::span<const GoldRecord> golds) {
  const auto index = index_golds(golds);
  double total = 0.0;
  std::size_t scored = 0;
  for (const auto& s : selections) {
    auto it = index.find(s.query_id);
    if (it == index.end() || !it->second->gold_answers) continue;
    total += token_f1(s.answer, *it->second->gold_answers);
    ++scored;
  }
  return scored == 0 ? 0.0 : total / static_cast<double>(scored);
}

FlipCounts flip_report(std::span<const QuerySelection> selections,
                       std::span<const QuerySelection> baseline,
                       std::span<const GoldRecord> golds, FlipScore score,
                       const AnswerMatcher& match) {
  const auto index = index_golds(golds);
  std::unordered_map<std::string_view, const QuerySelection*> base;
  for (const auto& b : baseline) base.emplace(b.query_id, &b);

  auto score_of = [&](const QuerySelection& s, const GoldRecord& g) -> std::optional<double> {
    if (score == FlipScore::token_f1 && g.gold_answers && s.kind != QueryKind::boolean) {
      return token_f1(s.answer, *g.gold_answers);
    }
    auto ok = is_correct(s, g, match);
    if (!ok) return std::nullopt;
    return *ok ? 1.0 : 0.0;
  };

  FlipCounts out;
  for (const auto& s : selections) {
    auto b = base.find(s.query_id);
    auto g = index.find(s.query_id);
    if (b == base.end() || g == index.end()) continue;
    if (s.answer == b->second->answer && s.truth == b->second->truth) continue;
    auto now = score_of(s, *g->second);
    auto before = score_of(*b->second, *g->second);
    if (!now || !before) continue;
    if (*now > *before) ++out.good;
    if (*now < *before) ++out.bad;
  }
  return out;
}

std::vector<QuerySelection> baseline_selections(std::span<const QuerySelection> selections) {
  std::vector<QuerySelection> out;
  out.reserve(selections.size());
  for (const auto& s : selections) {
    QuerySelection b = s;
    b.answer = s.baseline_answer;
    b.truth = s.baseline_truth;
    b.flipped = false;
    if (s.flipped) b.candidate_index.reset();
    out.push_back(std::move(b));
  }
  return out;
}

}  // namespace concord
