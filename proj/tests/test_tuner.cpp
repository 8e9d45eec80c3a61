#include <algorithm>
#include <sstream>

#include "builders.hpp"
#include "concord/inference.hpp"
#include "concord/tuner.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace concord;
using namespace concord::testing;

namespace {

struct Setup {
  Problem problem;
  MetricFn metric;
};

Setup planted() {
  auto f = planted_contradictions();
  const auto v = validate_batch(f.batch);
  auto golds = f.golds;
  return {Problem::prepare(v, v.relations()),
          [golds](std::span<const QuerySelection> s) { return accuracy(s, golds); }};
}

Setup capitals() {
  const auto v = validate_batch(capitals_batch());
  GoldRecord g1, g2;
  g1.query_id = "q1";
  g1.gold_answers = std::vector<std::string>{"Kabul"};
  g2.query_id = "q2";
  g2.gold_answers = std::vector<std::string>{"Tbilisi"};
  std::vector<GoldRecord> golds = {g1, g2};
  return {Problem::prepare(v, v.relations()),
          [golds](std::span<const QuerySelection> s) { return accuracy(s, golds); }};
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(lo + (hi - lo) * i / (n - 1));
  return out;
}

}  // namespace

TEST_CASE("empty search space") {
  const auto s = planted();
  SearchSpace space;
  space.beta = {0.8, 0.2};
  CHECK_THROWS_AS(tune(s.problem, space, s.metric, {}), Error);
  space = SearchSpace{};
  space.ec_choices.clear();
  CHECK_THROWS_AS(tune(s.problem, space, s.metric, {}), Error);
  space = SearchSpace{};
  space.trials = 0;
  CHECK_THROWS_AS(tune(s.problem, space, s.metric, {}), Error);
}

TEST_CASE("degenerate beta box returns the baseline metric") {
  const auto s = planted();
  SearchSpace space;
  space.beta = {1.0, 1.0};
  space.trials = 10;
  const auto r = tune(s.problem, space, s.metric, {});
  CHECK(r.best.beta == 1.0);
  Config c;
  c.beta = 1.0;
  CHECK(r.best.metric_value == s.metric(run(s.problem, c).selections));
}

TEST_CASE("planted contradictions need beta below 1") {
  const auto s = planted();
  SearchSpace space = beliefbank_space();
  space.ec_choices = {false};
  space.trials = 200;
  space.seed = 1;
  const auto r = tune(s.problem, space, s.metric, {});
  CHECK(r.best.beta < 1.0);
  CHECK(r.best.metric_value == 1.0);
}

TEST_CASE("random search lands in the top 5% of a full grid") {
  const auto s = planted();
  const auto betas = linspace(0.05, 1.0, 20);
  const auto lambdas = linspace(0.5, 1.0, 20);
  const auto rows = sweep(s.problem, betas, lambdas, false, s.metric, {});
  REQUIRE(rows.size() == 400);
  std::vector<double> values;
  for (const auto& r : rows) values.push_back(r.metric);
  std::sort(values.begin(), values.end(), std::greater<>());
  const double cutoff = values[19];
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    SearchSpace space = beliefbank_space();
    space.ec_choices = {false};
    space.trials = 200;
    space.seed = seed;
    const auto r = tune(s.problem, space, s.metric, {});
    CHECK(r.best.metric_value >= cutoff);
  }
}

TEST_CASE("tuning is deterministic and never worse than the upper beta corner") {
  const auto s = planted();
  SearchSpace space;
  space.trials = 1;
  space.seed = 77;
  const auto a = tune(s.problem, space, s.metric, {});
  const auto b = tune(s.problem, space, s.metric, {});
  CHECK(a.best.beta == b.best.beta);
  CHECK(a.best.lambda == b.best.lambda);
  CHECK(a.best.metric_value == b.best.metric_value);
  CHECK(a.trials.size() == 6);
  for (const auto& t : a.trials) {
    if (t.beta == space.beta.hi) CHECK(a.best.metric_value >= t.metric_value);
  }
}

TEST_CASE("ties go to the earliest trial") {
  const auto s = capitals();
  SearchSpace space;
  space.beta = {0.1, 0.4};
  space.lambda = {0.5, 0.6};
  space.trials = 20;
  const auto r = tune(s.problem, space, s.metric, {});
  CHECK(r.best.trial_index == 0);
}

TEST_CASE("EC is searched as a third dimension") {
  const auto s = planted();
  SearchSpace space;
  space.ec_choices = {true, false};
  space.trials = 40;
  const auto r = tune(s.problem, space, s.metric, {});
  const auto with_ec = std::count_if(r.trials.begin(), r.trials.end(),
                                     [](const TrialResult& t) { return t.ec; });
  CHECK(with_ec >= 5);
  CHECK(static_cast<std::size_t>(with_ec) <= r.trials.size() - 5);
}

TEST_CASE("NQ bounds keep beta at most 0.5") {
  const auto s = planted();
  SearchSpace space = nq_space();
  space.trials = 30;
  const auto r = tune(s.problem, space, s.metric, {});
  CHECK(r.best.beta <= 0.5);
  CHECK(r.best.lambda <= 0.6);
}

TEST_CASE("sweep shape and baseline delta") {
  const auto s = capitals();
  const std::vector<double> betas = {1.0, 0.5, 0.25};
  const std::vector<double> lambdas = {0.9, 0.5, 0.7};
  const auto rows = sweep(s.problem, betas, lambdas, false, s.metric, {});
  CHECK(rows.size() == 9);
  for (const auto& r : rows) {
    if (r.beta == 1.0) CHECK(r.delta == 0.0);
  }
  auto at = [&](double b, double l) {
    return std::find_if(rows.begin(), rows.end(),
                        [&](const SweepRow& r) { return r.beta == b && r.lambda == l; })
        ->delta;
  };
  CHECK(at(0.5, 0.5) > at(1.0, 0.5));

  const std::vector<double> betas2 = {0.25, 1.0, 0.5};
  const std::vector<double> lambdas2 = {0.5, 0.7, 0.9};
  const auto rows2 = sweep(s.problem, betas2, lambdas2, false, s.metric, {});
  REQUIRE(rows2.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].beta == rows2[i].beta);
    CHECK(rows[i].lambda == rows2[i].lambda);
    CHECK(rows[i].metric == rows2[i].metric);
  }

  std::ostringstream out;
  write_sweep_table(rows, out);
  const std::string table = out.str();
  CHECK(table.rfind("beta,lambda,ec,metric,delta\n", 0) == 0);
  CHECK(std::count(table.begin(), table.end(), '\n') == 10);
}

TEST_CASE("parallel groups give the same result") {
  const auto s = planted();
  Config c;
  c.beta = 0.4;
  c.lambda = 0.85;
  const auto serial = run(s.problem, c, {1});
  const auto parallel = run(s.problem, c, {4});
  CHECK(serial.selections == parallel.selections);
  CHECK(s.metric(serial.selections) == 1.0);
}
