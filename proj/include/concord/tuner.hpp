// Hyperparameter search over (beta, lambda, entailment correction).
#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "concord/inference.hpp"

namespace concord {

struct Bounds {
  double lo = 0.0;
  double hi = 1.0;
};

struct SearchSpace {
  Bounds beta{0.05, 1.0};
  Bounds lambda{0.5, 1.0};
  std::vector<bool> ec_choices{false};
  int trials = 100;
  std::uint64_t seed = 0;
};

// Bounds from the reported tuning setups.
SearchSpace beliefbank_space();  // beta [0.05, 1], lambda [0.5, 1]
SearchSpace vqa_space();         // beta [0.05, 1], lambda [1/3, 1]
SearchSpace nq_space();          // beta [0, 0.5], lambda [0, 0.6]

void validate_space(const SearchSpace& space);

using MetricFn = std::function<double(std::span<const QuerySelection>)>;

struct TrialResult {
  double beta = 1.0;
  double lambda = 0.0;
  bool ec = false;
  double metric_value = 0.0;
  std::size_t trial_index = 0;
};

struct TuneResult {
  TrialResult best;
  std::vector<TrialResult> trials;  // evaluation order
};

// Evaluates the four corners and the midpoint of the box (for each EC
// choice), then `trials` uniform samples, and returns the best trial; ties go
// to the earliest trial. Deterministic for a given seed.
TuneResult tune(const Problem& problem, const SearchSpace& space, const MetricFn& metric,
                const Config& base = {}, const RunOptions& options = {});

struct SweepRow {
  double beta = 1.0;
  double lambda = 0.0;
  bool ec = false;
  double metric = 0.0;
  double delta = 0.0;  // metric minus the beta = 1 baseline metric
};

// Full Cartesian grid; rows sorted by (beta, lambda) regardless of grid order.
std::vector<SweepRow> sweep(const Problem& problem, std::span<const double> beta_grid,
                            std::span<const double> lambda_grid, bool ec, const MetricFn& metric,
                            const Config& base = {}, const RunOptions& options = {});

// "beta,lambda,ec,metric,delta" text table.
void write_sweep_table(std::span<const SweepRow> rows, std::ostream& out);

}  // namespace concord
