#pragma once

// Load histograms, drop accounting and tail measures for simulation runs,
// and the controlled-versus-uncontrolled comparison built from them.

#include "qosctl/plant.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qosctl::metrics {

using control::ClassId;

/// Equal-width bins over [0, 1]; the last bin is closed on the right.
struct LoadHistogram {
  std::vector<double> edges;        // bins + 1 ascending values, 0 .. 1
  std::vector<double> frequencies;  // fraction of samples per bin
  std::size_t samples = 0;
  std::size_t clamped = 0;  // samples above 1 folded into the last bin

  std::size_t bins() const { return frequencies.size(); }
  bool operator==(const LoadHistogram&) const = default;
};

/// Throws InputError on an empty sample list, nbins == 0, or a negative or
/// NaN sample.
LoadHistogram histogram(std::span<const double> utilizations, std::size_t nbins);

/// Fraction of samples strictly above `threshold` (which must lie in [0, 1]).
double tail_mass(std::span<const double> samples, double threshold);

struct Totals {
  double offered = 0.0;
  double carried = 0.0;
  double dropped = 0.0;
  double final_backlog = 0.0;

  /// dropped / offered, 0 when nothing was offered.
  double drop_ratio() const;
  bool operator==(const Totals&) const = default;
};

struct ReportOptions {
  std::size_t bins = 20;
  double tail_threshold = 0.9;
};

struct RunReport {
  double capacity = 0.0;
  std::size_t ticks = 0;
  std::map<ClassId, Totals> classes;
  Totals total;
  LoadHistogram histogram;  // channel utilization
  std::map<ClassId, LoadHistogram> class_histograms;  // carried / width
  double tail_threshold = 0.9;
  double tail_mass = 0.0;
  double peak_utilization = 0.0;
  double mean_utilization = 0.0;
  std::size_t activations = 0;

  bool operator==(const RunReport&) const = default;
};

/// Channel utilization per tick of a run.
std::vector<double> utilizations(const std::vector<plant::Measurement>& series);

RunReport summarize(const plant::RunResult& run, double capacity, const ReportOptions& opts = {});

struct MetricDelta {
  std::string name;
  double base = 0.0;
  double controlled = 0.0;
  double delta = 0.0;            // controlled - base
  std::optional<double> ratio;   // controlled / base, absent when base == 0
  std::optional<bool> improved;  // set for lower-is-better metrics only
};

struct ComparisonReport {
  std::vector<MetricDelta> metrics;

  /// Throws InputError for an unknown metric name.
  const MetricDelta& at(const std::string& name) const;
  bool drops_improved() const;
  bool tail_improved() const;
};

/// Throws InputError when the two reports cover different classes.
ComparisonReport compare(const RunReport& base, const RunReport& controlled);

// Plain-text exports. Column order is fixed; numbers use the shortest
// round-trip decimal form so identical runs give identical bytes.
void write_series_csv(std::ostream& os, const std::vector<plant::Measurement>& series);
void write_histogram_csv(std::ostream& os, const LoadHistogram& h);
void write_report(std::ostream& os, const RunReport& r);
void write_comparison(std::ostream& os, const ComparisonReport& c);

}  // namespace qosctl::metrics
