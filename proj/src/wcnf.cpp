#include <cmath>
#include <cstdint>
#include <ostream>

#include "concord/solver.hpp"

namespace concord {

void write_wcnf(const WeightedClauseSet& clauses, std::ostream& out) {
  std::vector<std::pair<std::int64_t, const std::vector<int>*>> soft;
  std::int64_t total = 0;
  for (const auto& c : clauses.soft_clauses) {
    const auto scaled = static_cast<std::int64_t>(std::llround(c.weight * 1e6));
    if (scaled <= 0) continue;  // WCNF weights must be positive integers
    soft.emplace_back(scaled, &c.literals);
    total += scaled;
  }
  const std::int64_t top = total + 1;
  out << "p wcnf " << clauses.num_vars << ' ' << clauses.hard_clauses.size() + soft.size() << ' '
      << top << '\n';
  auto line = [&](std::int64_t weight, const std::vector<int>& lits) {
    out << weight;
    for (int lit : lits) out << ' ' << lit;
    out << " 0\n";
  };
  for (const auto& h : clauses.hard_clauses) line(top, h);
  for (const auto& [weight, lits] : soft) line(weight, *lits);
}

}  // namespace concord
