// Weighted partial MaxSAT encoding of a factor graph and an exact
// branch-and-bound solver for it.
#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "concord/graph.hpp"

namespace concord {

// Literals use the DIMACS convention: +v is var v true, -v is var v false.
struct SoftClause {
  std::vector<int> literals;
  double weight = 0.0;

  bool operator==(const SoftClause&) const = default;
};

struct WeightedClauseSet {
  int num_vars = 0;
  std::vector<std::vector<int>> hard_clauses;
  std::vector<SoftClause> soft_clauses;

  double total_soft_weight() const;
  bool operator==(const WeightedClauseSet&) const = default;
};

inline constexpr double kMinSoftWeight = 1e-12;
// Objectives closer than this are treated as tied.
inline constexpr double kTieTolerance = 1e-9;
inline constexpr int kOracleMaxVars = 22;

// unary/relation/EC factors -> soft clauses; exactly_one -> one hard
// at-least-one clause plus pairwise at-most-one clauses; context_fix -> hard
// unit clause. Soft clauses lighter than kMinSoftWeight are dropped.
WeightedClauseSet encode(const FactorGraph& graph);

// Standard WCNF text: "p wcnf <vars> <clauses> <top>", weights scaled by 1e6.
void write_wcnf(const WeightedClauseSet& clauses, std::ostream& out);

enum class SolveStatus { optimal, timeout_fallback };

std::string_view to_string(SolveStatus status);

struct SolveStats {
  std::uint64_t nodes = 0;
  std::uint64_t lower_bound_calls = 0;

  bool operator==(const SolveStats&) const = default;
};

struct Solution {
  std::vector<bool> values;  // indexed by var - 1
  double objective = 0.0;    // sum of satisfied soft weights
  SolveStatus status = SolveStatus::optimal;
  SolveStats stats;

  bool operator==(const Solution&) const = default;
};

// Sum of satisfied soft clause weights, accumulated in clause order.
double evaluate_objective(const WeightedClauseSet& clauses, const std::vector<bool>& values);
bool satisfies_hard(const WeightedClauseSet& clauses, const std::vector<bool>& values);

// Tie order shared by solve and exhaustive_oracle: between two assignments of
// equal objective, prefer the one holding the baseline's value at the first
// variable where they differ. With variables numbered query by query this
// prefers the baseline answer on the lowest-indexed disagreeing query, and
// otherwise the lexicographically smallest values.
bool tie_preferred(const std::vector<bool>& a, const std::vector<bool>& b,
                   const std::vector<bool>& baseline);

// Maximizes satisfied soft weight subject to the hard clauses. timeout_ms == 0
// disables the limit; on expiry the baseline is returned with status
// timeout_fallback. Throws Error(HardUnsat) when no feasible assignment exists.
Solution solve(const WeightedClauseSet& clauses, std::int64_t timeout_ms,
               const std::vector<bool>& baseline);

// Enumerates every assignment. Throws Error(TooLarge) above kOracleMaxVars.
Solution exhaustive_oracle(const WeightedClauseSet& clauses, const std::vector<bool>& baseline);

}  // namespace concord
