#pragma once

// Command implementations behind the qosctl executable. Each returns a
// process exit code and writes human-readable text to `out` / `err`, so
// the same code paths run in-process under test.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace qosctl::cli {

enum ExitCode : int {
  kOk = 0,
  kInputError = 1,     // unreadable/invalid files or flags
  kRuntimeError = 2,   // the simulation itself failed
  kAnalysisError = 3,  // identification could not produce a model
};

struct RunOptions {
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;  // "section.key=value"
  std::size_t bins = 20;
  double tail_threshold = 0.9;
};

/// Writes series.csv, report.txt and histogram.csv into out_dir.
int cmd_run(const std::string& scenario_path, const RunOptions& opts, std::ostream& out, std::ostream& err);

/// Runs the scenario with control off and on (same seeds) and writes
/// comparison.csv plus report_/histogram_ files for both arms.
int cmd_compare(const std::string& scenario_path, const RunOptions& opts, std::ostream& out, std::ostream& err);

/// Prints spectral radius, stability, controllability and observability.
int cmd_analyze(const std::string& model_path, std::ostream& out, std::ostream& err);

/// Fits A, B to a trajectory file and emits them as a model file (to
/// `out_path`, or to `out` when empty) with the RMS residual as a comment.
int cmd_identify(const std::string& trajectory_path, const std::string& out_path, std::ostream& out,
                 std::ostream& err);

/// Drives a model with seeded uniform random inputs (inside the input box,
/// or [-1, 1] where unbounded) from a seeded random start and writes the
/// trajectory (to `out_path`, or to `out` when empty).
int cmd_simulate(const std::string& model_path, std::int64_t ticks, std::uint64_t seed,
                 const std::string& out_path, std::ostream& out, std::ostream& err);

}  // namespace qosctl::cli
