// Command-line front end: infer, evaluate, tune, sweep, oracle-check and
// export-wcnf.
#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "concord/metrics.hpp"
#include "concord/tuner.hpp"

namespace concord {

enum ExitCode : int {
  kExitOk = 0,
  kExitInputError = 2,
  kExitSolverError = 3,
  kExitOracleMismatch = 4,
};

// Every metric the gold data supports: binary_f1/precision/recall when golds
// carry truth values, token_f1/perfect_consistency when they carry answers,
// accuracy always, consistency/tau when a constraint graph is supplied.
std::map<std::string, double> compute_metrics(std::span<const QuerySelection> selections,
                                              std::span<const GoldRecord> golds,
                                              const ConstraintGraph* graph);

// Scalar metric used for tuning and sweeps. Names: binary-f1, tau (reported
// as consistency 1 - tau), perfect-consistency, token-f1, accuracy.
MetricFn make_metric(const std::string& name, std::vector<GoldRecord> golds,
                     std::optional<ConstraintGraph> graph);

// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace concord
