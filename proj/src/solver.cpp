#include "concord/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>

namespace concord {

std::string_view to_string(SolveStatus status) {
  return status == SolveStatus::optimal ? "optimal" : "timeout_fallback";
}

double WeightedClauseSet::total_soft_weight() const {
  double total = 0.0;
  for (const auto& c : soft_clauses) total += c.weight;
  return total;
}

namespace {

int dimacs(const Literal& lit) { return lit.negated ? -lit.var_id : lit.var_id; }

bool literal_true(int lit, const std::vector<bool>& values) {
  const bool v = values[static_cast<std::size_t>(std::abs(lit) - 1)];
  return lit > 0 ? v : !v;
}

bool clause_true(const std::vector<int>& clause, const std::vector<bool>& values) {
  return std::any_of(clause.begin(), clause.end(),
                     [&](int lit) { return literal_true(lit, values); });
}

void check_clause_set(const WeightedClauseSet& clauses) {
  auto check = [&](const std::vector<int>& clause) {
    for (int lit : clause) {
      if (lit == 0 || std::abs(lit) > clauses.num_vars) {
        throw Error(ErrorCode::Schema, "clause literal " + std::to_string(lit) + " out of range");
      }
    }
  };
  for (const auto& c : clauses.hard_clauses) check(c);
  for (const auto& c : clauses.soft_clauses) {
    check(c.literals);
    if (!(c.weight > 0.0)) throw Error(ErrorCode::Schema, "soft clause weight must be positive");
  }
}

}  // namespace

WeightedClauseSet encode(const FactorGraph& graph) {
  WeightedClauseSet out;
  out.num_vars = static_cast<int>(graph.variables.size());
  for (const auto& f : graph.factors) {
    switch (f.kind) {
      case FactorKind::unary:
      case FactorKind::relation:
      case FactorKind::entailment_corrected: {
        if (f.weight < kMinSoftWeight) break;
        SoftClause clause{{}, f.weight};
        for (const auto& lit : f.literals) clause.literals.push_back(dimacs(lit));
        out.soft_clauses.push_back(std::move(clause));
        break;
      }
      case FactorKind::exactly_one: {
        std::vector<int> at_least_one;
        for (const auto& lit : f.literals) at_least_one.push_back(dimacs(lit));
        out.hard_clauses.push_back(at_least_one);
        for (std::size_t i = 0; i < at_least_one.size(); ++i) {
          for (std::size_t j = i + 1; j < at_least_one.size(); ++j) {
            out.hard_clauses.push_back({-at_least_one[i], -at_least_one[j]});
          }
        }
        break;
      }
      case FactorKind::context_fix:
        for (const auto& lit : f.literals) out.hard_clauses.push_back({dimacs(lit)});
        break;
    }
  }
  return out;
}

double evaluate_objective(const WeightedClauseSet& clauses, const std::vector<bool>& values) {
  double total = 0.0;
  for (const auto& c : clauses.soft_clauses) {
    if (clause_true(c.literals, values)) total += c.weight;
  }
  return total;
}

bool satisfies_hard(const WeightedClauseSet& clauses, const std::vector<bool>& values) {
  return std::all_of(clauses.hard_clauses.begin(), clauses.hard_clauses.end(),
                     [&](const auto& c) { return clause_true(c, values); });
}

bool tie_preferred(const std::vector<bool>& a, const std::vector<bool>& b,
                   const std::vector<bool>& baseline) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return a[i] == baseline[i];
  }
  return false;
}

namespace {

using Clock = std::chrono::steady_clock;

constexpr std::int8_t kUnassigned = -1;

// Internal literal code: 2*var + (negated ? 1 : 0), var 0-based.
int code_of(int dimacs_lit) {
  return 2 * (std::abs(dimacs_lit) - 1) + (dimacs_lit < 0 ? 1 : 0);
}

struct Clause {
  std::vector<int> lits;  // internal codes
  double weight = 0.0;
  bool hard = false;
};

// Depth-first branch and bound over variables in index order, trying the
// baseline value first. That order enumerates leaves in tie-preference order,
// so a leaf only replaces the incumbent when strictly better and subtrees
// whose bound cannot beat the incumbent are cut.
class BranchAndBound {
 public:
  BranchAndBound(const WeightedClauseSet& set, std::int64_t timeout_ms,
                 const std::vector<bool>& baseline)
      : set_(set), baseline_(baseline), n_(set.num_vars) {
    if (timeout_ms > 0) deadline_ = Clock::now() + std::chrono::milliseconds(timeout_ms);
    occ_.resize(static_cast<std::size_t>(2 * n_));
    auto add = [&](const std::vector<int>& lits, double weight, bool hard) {
      Clause c;
      c.weight = weight;
      c.hard = hard;
      for (int lit : lits) c.lits.push_back(code_of(lit));
      std::sort(c.lits.begin(), c.lits.end());
      c.lits.erase(std::unique(c.lits.begin(), c.lits.end()), c.lits.end());
      const int index = static_cast<int>(clauses_.size());
      for (int code : c.lits) occ_[static_cast<std::size_t>(code)].push_back(index);
      clauses_.push_back(std::move(c));
    };
    for (const auto& h : set.hard_clauses) add(h, 0.0, true);
    for (const auto& s : set.soft_clauses) add(s.literals, s.weight, false);
    total_soft_ = set.total_soft_weight();

    value_.assign(static_cast<std::size_t>(n_), kUnassigned);
    n_true_.assign(clauses_.size(), 0);
    n_false_.assign(clauses_.size(), 0);
    residual_.assign(clauses_.size(), 0.0);
    local_value_.assign(static_cast<std::size_t>(n_), kUnassigned);
    reason_.assign(static_cast<std::size_t>(n_), -1);
    seen_clause_.assign(clauses_.size(), 0);
    seen_var_.assign(static_cast<std::size_t>(n_), 0);
  }

  // Returns false on timeout.
  bool run() {
    if (satisfies_hard(set_, baseline_)) {
      best_ = baseline_;
      best_objective_ = evaluate_objective(set_, baseline_);
    }
    // Empty hard clauses and root-level unit propagation.
    for (std::size_t c = 0; c < clauses_.size(); ++c) {
      if (clauses_[c].hard && clauses_[c].lits.empty()) return true;
    }
    if (!propagate_units_from_scratch()) return true;
    search();
    return !aborted_;
  }

  bool found() const { return best_.has_value(); }
  const std::vector<bool>& best() const { return *best_; }
  double best_objective() const { return best_objective_; }
  SolveStats stats() const { return stats_; }

 private:
  bool timed_out() {
    if (!deadline_) return false;
    if (aborted_) return true;
    if ((clock_checks_++ & 0x3f) != 0) return false;
    if (Clock::now() >= *deadline_) aborted_ = true;
    return aborted_;
  }

  // Cost (falsified soft weight) the incumbent leaves; anything not strictly
  // better by more than the tie tolerance is cut.
  double cost_threshold() const {
    if (!best_) return std::numeric_limits<double>::infinity();
    return total_soft_ - best_objective_ - kTieTolerance;
  }

  // Sets var and updates clause counters; returns false on a hard conflict.
  // Newly unit hard clauses are pushed on pending_.
  bool assign(int var, bool val) {
    value_[static_cast<std::size_t>(var)] = val ? 1 : 0;
    trail_.push_back(var);
    const int true_code = 2 * var + (val ? 0 : 1);
    for (int c : occ_[static_cast<std::size_t>(true_code)]) ++n_true_[static_cast<std::size_t>(c)];
    bool ok = true;
    for (int c : occ_[static_cast<std::size_t>(true_code ^ 1)]) {
      const auto ci = static_cast<std::size_t>(c);
      const Clause& clause = clauses_[ci];
      ++n_false_[ci];
      if (n_true_[ci] > 0) continue;
      const auto size = static_cast<int>(clause.lits.size());
      if (n_false_[ci] == size) {
        if (clause.hard) {
          ok = false;
        } else {
          cost_ += clause.weight;
        }
      } else if (clause.hard && n_false_[ci] == size - 1) {
        pending_.push_back(c);
      }
    }
    return ok;
  }

  void unassign_to(std::size_t mark) {
    while (trail_.size() > mark) {
      const int var = trail_.back();
      trail_.pop_back();
      const bool val = value_[static_cast<std::size_t>(var)] == 1;
      const int true_code = 2 * var + (val ? 0 : 1);
      for (int c : occ_[static_cast<std::size_t>(true_code)]) --n_true_[static_cast<std::size_t>(c)];
      for (int c : occ_[static_cast<std::size_t>(true_code ^ 1)]) {
        const auto ci = static_cast<std::size_t>(c);
        const Clause& clause = clauses_[ci];
        if (!clause.hard && n_true_[ci] == 0 &&
            n_false_[ci] == static_cast<int>(clause.lits.size())) {
          cost_ -= clause.weight;
        }
        --n_false_[ci];
      }
      value_[static_cast<std::size_t>(var)] = kUnassigned;
    }
    if (trail_.empty()) cost_ = 0.0;
  }

  // Hard unit propagation over pending_.
  bool propagate() {
    while (!pending_.empty()) {
      const auto ci = static_cast<std::size_t>(pending_.back());
      pending_.pop_back();
      if (n_true_[ci] > 0) continue;
      const Clause& clause = clauses_[ci];
      int unassigned = -1;
      int free_count = 0;
      for (int code : clause.lits) {
        if (value_[static_cast<std::size_t>(code >> 1)] == kUnassigned) {
          unassigned = code;
          ++free_count;
        }
      }
      if (free_count == 0) {
        pending_.clear();
        return false;
      }
      if (free_count > 1) continue;
      if (!assign(unassigned >> 1, (unassigned & 1) == 0)) {
        pending_.clear();
        return false;
      }
    }
    return true;
  }

  bool propagate_units_from_scratch() {
    for (std::size_t c = 0; c < clauses_.size(); ++c) {
      if (clauses_[c].hard && clauses_[c].lits.size() == 1) pending_.push_back(static_cast<int>(c));
    }
    return propagate();
  }

  // Lower bound on the additional soft weight any completion must falsify,
  // from disjoint inconsistent subsets found by simulated unit propagation
  // (each found subset is charged its minimum residual weight, which is then
  // subtracted from its members). Infinity when the hard clauses alone
  // conflict. Stops early once `limit` is reached.
  double lower_bound(double limit) {
    ++stats_.lower_bound_calls;
    for (std::size_t c = 0; c < clauses_.size(); ++c) {
      const bool active = n_true_[c] == 0 &&
                          n_false_[c] < static_cast<int>(clauses_[c].lits.size());
      residual_[c] = (active && !clauses_[c].hard) ? clauses_[c].weight : 0.0;
    }
    double bound = 0.0;
    while (bound < limit) {
      if (timed_out()) return bound;
      const int conflict = simulate_propagation();
      if (conflict < 0) break;
      const double charge = collect_conflict(conflict);
      if (charge == std::numeric_limits<double>::infinity()) return charge;
      bound += charge;
    }
    return bound;
  }

  bool usable(std::size_t c) const {
    return n_true_[c] == 0 && (clauses_[c].hard || residual_[c] > 0.0);
  }

  // Unit propagation treating every usable clause as hard, starting from the
  // current search assignment. Returns the index of a clause all of whose
  // literals end up false, or -1.
  int simulate_propagation() {
    std::copy(value_.begin(), value_.end(), local_value_.begin());
    std::fill(reason_.begin(), reason_.end(), -1);
    queue_.clear();

    auto status = [&](std::size_t c, int& free_lit) {
      int free_count = 0;
      for (int code : clauses_[c].lits) {
        const std::int8_t v = local_value_[static_cast<std::size_t>(code >> 1)];
        if (v == kUnassigned) {
          free_lit = code;
          ++free_count;
        } else if ((v == 1) == ((code & 1) == 0)) {
          return -1;  // satisfied
        }
      }
      return free_count;
    };

    // Hard units first so that conflicts lean on free hard clauses.
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t c = 0; c < clauses_.size(); ++c) {
        if (!usable(c) || clauses_[c].hard != (pass == 0)) continue;
        int free_lit = -1;
        const int s = status(c, free_lit);
        if (s == 0) return static_cast<int>(c);
        if (s == 1) queue_.push_back({free_lit, static_cast<int>(c)});
      }
    }

    for (std::size_t head = 0; head < queue_.size(); ++head) {
      const auto [code, source] = queue_[head];
      const auto var = static_cast<std::size_t>(code >> 1);
      const bool val = (code & 1) == 0;
      if (local_value_[var] != kUnassigned) {
        if ((local_value_[var] == 1) != val) return source;
        continue;
      }
      local_value_[var] = val ? 1 : 0;
      reason_[var] = source;
      for (int c : occ_[static_cast<std::size_t>(code ^ 1)]) {
        const auto ci = static_cast<std::size_t>(c);
        if (!usable(ci)) continue;
        int free_lit = -1;
        const int s = status(ci, free_lit);
        if (s == 0) return c;
        if (s == 1) queue_.push_back({free_lit, c});
      }
    }
    return -1;
  }

  // Gathers the clauses behind a conflict, charges their minimum residual and
  // subtracts it from each soft member.
  double collect_conflict(int conflict) {
    members_.clear();
    stack_.clear();
    auto visit_clause = [&](int c) {
      const auto ci = static_cast<std::size_t>(c);
      if (seen_clause_[ci]) return;
      seen_clause_[ci] = 1;
      members_.push_back(c);
      for (int code : clauses_[ci].lits) stack_.push_back(code >> 1);
    };
    visit_clause(conflict);
    while (!stack_.empty()) {
      const auto var = static_cast<std::size_t>(stack_.back());
      stack_.pop_back();
      if (seen_var_[var]) continue;
      seen_var_[var] = 1;
      touched_vars_.push_back(static_cast<int>(var));
      if (reason_[var] >= 0) visit_clause(reason_[var]);
    }
    for (int v : touched_vars_) seen_var_[static_cast<std::size_t>(v)] = 0;
    touched_vars_.clear();

    double charge = std::numeric_limits<double>::infinity();
    for (int c : members_) {
      const auto ci = static_cast<std::size_t>(c);
      seen_clause_[ci] = 0;
      if (!clauses_[ci].hard) charge = std::min(charge, residual_[ci]);
    }
    if (charge == std::numeric_limits<double>::infinity()) return charge;
    for (int c : members_) {
      const auto ci = static_cast<std::size_t>(c);
      if (clauses_[ci].hard) continue;
      residual_[ci] -= charge;
      if (residual_[ci] < kMinSoftWeight) residual_[ci] = 0.0;
    }
    return charge;
  }

  void record_leaf() {
    std::vector<bool> values(static_cast<std::size_t>(n_));
    for (int v = 0; v < n_; ++v) values[static_cast<std::size_t>(v)] = value_[static_cast<std::size_t>(v)] == 1;
    const double objective = evaluate_objective(set_, values);
    if (!best_ || objective > best_objective_ + kTieTolerance) {
      best_ = std::move(values);
      best_objective_ = objective;
    }
  }

  void search() {
    if (timed_out()) return;
    ++stats_.nodes;

    int var = -1;
    for (int v = 0; v < n_; ++v) {
      if (value_[static_cast<std::size_t>(v)] == kUnassigned) {
        var = v;
        break;
      }
    }
    if (var < 0) {
      record_leaf();
      return;
    }

    const double threshold = cost_threshold();
    if (cost_ >= threshold) return;
    if (cost_ + lower_bound(threshold - cost_) >= threshold) return;
    if (aborted_) return;

    const bool preferred = baseline_[static_cast<std::size_t>(var)];
    for (bool val : {preferred, !preferred}) {
      const std::size_t mark = trail_.size();
      if (assign(var, val) && propagate()) search();
      pending_.clear();
      unassign_to(mark);
      if (aborted_) return;
    }
  }

  const WeightedClauseSet& set_;
  const std::vector<bool>& baseline_;
  const int n_;
  std::optional<Clock::time_point> deadline_;
  std::uint64_t clock_checks_ = 0;
  bool aborted_ = false;

  std::vector<Clause> clauses_;
  std::vector<std::vector<int>> occ_;
  double total_soft_ = 0.0;

  std::vector<std::int8_t> value_;
  std::vector<int> n_true_;
  std::vector<int> n_false_;
  std::vector<int> trail_;
  std::vector<int> pending_;
  double cost_ = 0.0;

  // Lower-bound scratch space.
  std::vector<double> residual_;
  std::vector<std::int8_t> local_value_;
  std::vector<int> reason_;
  std::vector<std::pair<int, int>> queue_;
  std::vector<char> seen_clause_;
  std::vector<char> seen_var_;
  std::vector<int> touched_vars_;
  std::vector<int> members_;
  std::vector<int> stack_;

  std::optional<std::vector<bool>> best_;
  double best_objective_ = -std::numeric_limits<double>::infinity();
  SolveStats stats_;
};

void check_baseline(const WeightedClauseSet& clauses, const std::vector<bool>& baseline) {
  if (baseline.size() != static_cast<std::size_t>(clauses.num_vars)) {
    throw Error(ErrorCode::Schema, "baseline has " + std::to_string(baseline.size()) +
                                       " values for " + std::to_string(clauses.num_vars) +
                                       " variables");
  }
}

}  // namespace

Solution solve(const WeightedClauseSet& clauses, std::int64_t timeout_ms,
               const std::vector<bool>& baseline) {
  check_clause_set(clauses);
  check_baseline(clauses, baseline);
  BranchAndBound bnb(clauses, timeout_ms, baseline);
  const bool finished = bnb.run();
  if (!finished) {
    return {baseline, evaluate_objective(clauses, baseline), SolveStatus::timeout_fallback,
            bnb.stats()};
  }
  if (!bnb.found()) throw Error(ErrorCode::HardUnsat, "hard clauses are unsatisfiable");
  return {bnb.best(), bnb.best_objective(), SolveStatus::optimal, bnb.stats()};
}

Solution exhaustive_oracle(const WeightedClauseSet& clauses, const std::vector<bool>& baseline) {
  if (clauses.num_vars > kOracleMaxVars) {
    throw Error(ErrorCode::TooLarge, std::to_string(clauses.num_vars) + " variables exceed " +
                                         std::to_string(kOracleMaxVars));
  }
  check_clause_set(clauses);
  check_baseline(clauses, baseline);
  const auto n = static_cast<std::size_t>(clauses.num_vars);
  const std::uint64_t count = std::uint64_t{1} << n;

  std::optional<std::vector<bool>> best;
  double best_objective = 0.0;
  std::vector<bool> values(n);
  SolveStats stats;
  // Increasing mask walks assignments in tie-preference order: variable 1 is
  // the most significant bit and a zero bit keeps the baseline value.
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    ++stats.nodes;
    for (std::size_t i = 0; i < n; ++i) {
      const bool flip = (mask >> (n - 1 - i)) & 1U;
      values[i] = baseline[i] != flip;
    }
    if (!satisfies_hard(clauses, values)) continue;
    const double objective = evaluate_objective(clauses, values);
    if (!best || objective > best_objective + kTieTolerance) {
      best = values;
      best_objective = objective;
    }
  }
  if (!best) throw Error(ErrorCode::HardUnsat, "hard clauses are unsatisfiable");
  return {*best, best_objective, SolveStatus::optimal, stats};
}

}  // namespace concord
