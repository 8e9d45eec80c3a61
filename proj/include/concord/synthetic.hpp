// Randomized instances for cross-checking the solver against the exhaustive
// oracle.
#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "concord/model.hpp"
#include "concord/solver.hpp"

namespace concord {

struct RandomInstanceOptions {
  int max_queries = 4;
  int max_candidates = 3;
  int max_relations = 8;
  double min_relation_prob = 0.5;
  double context_probability = 0.2;
  double boolean_probability = 0.2;
};

struct RandomInstance {
  Batch batch;  // relations included
  Config config;
};

RandomInstance random_instance(std::mt19937_64& rng, const RandomInstanceOptions& options = {});

struct OracleMismatch {
  std::size_t instance = 0;
  double solver_objective = 0.0;
  double oracle_objective = 0.0;
};

struct OracleCheckReport {
  std::size_t instances = 0;
  std::size_t matches = 0;
  std::vector<OracleMismatch> mismatches;
  double seconds = 0.0;
};

// Solves `count` random instances with both solve and exhaustive_oracle and
// compares objectives within `tolerance`.
OracleCheckReport oracle_check(std::size_t count, std::uint64_t seed, double tolerance = 1e-9,
                               const RandomInstanceOptions& options = {});

}  // namespace concord
