#include "concord/tuner.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

namespace concord {

SearchSpace beliefbank_space() { return {{0.05, 1.0}, {0.5, 1.0}, {false, true}, 300, 0}; }
SearchSpace vqa_space() { return {{0.05, 1.0}, {1.0 / 3.0, 1.0}, {false, true}, 100, 0}; }
SearchSpace nq_space() { return {{0.0, 0.5}, {0.0, 0.6}, {false, true}, 200, 0}; }

void validate_space(const SearchSpace& space) {
  auto check = [](const Bounds& b, const char* name) {
    if (!(b.lo >= 0.0 && b.hi <= 1.0 && b.lo <= b.hi)) {
      throw Error(ErrorCode::EmptySpace, std::string(name) + " bounds must satisfy 0 <= lo <= hi <= 1");
    }
  };
  check(space.beta, "beta");
  check(space.lambda, "lambda");
  if (space.ec_choices.empty()) throw Error(ErrorCode::EmptySpace, "no entailment-correction choice");
  if (space.trials <= 0) throw Error(ErrorCode::EmptySpace, "trials must be positive");
}

namespace {

double evaluate(const Problem& problem, Config config, double beta, double lambda, bool ec,
                const MetricFn& metric, const RunOptions& options) {
  config.beta = beta;
  config.lambda = lambda;
  config.entailment_correction = ec;
  const RunResult result = run(problem, config, options);
  return metric(result.selections);
}

}  // namespace

TuneResult tune(const Problem& problem, const SearchSpace& space, const MetricFn& metric,
                const Config& base, const RunOptions& options) {
  validate_space(space);
  std::vector<bool> ec_choices = space.ec_choices;
  std::sort(ec_choices.begin(), ec_choices.end());
  ec_choices.erase(std::unique(ec_choices.begin(), ec_choices.end()), ec_choices.end());

  TuneResult out;
  auto trial = [&](double beta, double lambda, bool ec) {
    TrialResult t{beta, lambda, ec, evaluate(problem, base, beta, lambda, ec, metric, options),
                  out.trials.size()};
    if (out.trials.empty() || t.metric_value > out.best.metric_value) out.best = t;
    out.trials.push_back(t);
  };

  const auto& b = space.beta;
  const auto& l = space.lambda;
  for (bool ec : ec_choices) {
    trial(b.hi, l.lo, ec);
    trial(b.hi, l.hi, ec);
    trial(b.lo, l.lo, ec);
    trial(b.lo, l.hi, ec);
    trial((b.lo + b.hi) / 2.0, (l.lo + l.hi) / 2.0, ec);
  }

  std::mt19937_64 rng(space.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick_ec(0, ec_choices.size() - 1);
  for (int i = 0; i < space.trials; ++i) {
    const double beta = b.lo + (b.hi - b.lo) * unit(rng);
    const double lambda = l.lo + (l.hi - l.lo) * unit(rng);
    const bool ec = ec_choices[pick_ec(rng)];
    trial(beta, lambda, ec);
  }
  return out;
}

std::vector<SweepRow> sweep(const Problem& problem, std::span<const double> beta_grid,
                            std::span<const double> lambda_grid, bool ec, const MetricFn& metric,
                            const Config& base, const RunOptions& options) {
  if (beta_grid.empty() || lambda_grid.empty()) {
    throw Error(ErrorCode::EmptySpace, "sweep grids must be non-empty");
  }
  std::vector<double> betas(beta_grid.begin(), beta_grid.end());
  std::vector<double> lambdas(lambda_grid.begin(), lambda_grid.end());
  std::sort(betas.begin(), betas.end());
  betas.erase(std::unique(betas.begin(), betas.end()), betas.end());
  std::sort(lambdas.begin(), lambdas.end());
  lambdas.erase(std::unique(lambdas.begin(), lambdas.end()), lambdas.end());

  // beta = 1 zeroes every relation weight, so lambda and EC are irrelevant.
  const double reference = evaluate(problem, base, 1.0, lambdas.front(), false, metric, options);

  std::vector<SweepRow> rows;
  rows.reserve(betas.size() * lambdas.size());
  for (double beta : betas) {
    for (double lambda : lambdas) {
      const double value = beta == 1.0
                               ? reference
                               : evaluate(problem, base, beta, lambda, ec, metric, options);
      rows.push_back({beta, lambda, ec, value, value - reference});
    }
  }
  return rows;
}

void write_sweep_table(std::span<const SweepRow> rows, std::ostream& out) {
  out << "beta,lambda,ec,metric,delta\n";
  const auto precision = out.precision(10);
  for (const auto& r : rows) {
    out << r.beta << ',' << r.lambda << ',' << (r.ec ? "true" : "false") << ',' << r.metric << ','
        << r.delta << '\n';
  }
  out.precision(precision);
}

}  // namespace concord
