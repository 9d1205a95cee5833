#include "qosctl/metrics.hpp"

#include "qosctl/compensated_sum.hpp"
#include "qosctl/error.hpp"
#include "qosctl/text_format.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace qosctl::metrics {

using text::format_double;

LoadHistogram histogram(std::span<const double> utilizations, std::size_t nbins) {
  if (nbins == 0) throw InputError("histogram needs at least one bin");
  if (utilizations.empty()) throw InputError("histogram of an empty sample list");

  LoadHistogram h;
  h.edges.resize(nbins + 1);
  for (std::size_t i = 0; i <= nbins; ++i) h.edges[i] = static_cast<double>(i) / static_cast<double>(nbins);
  std::vector<std::size_t> counts(nbins, 0);

  for (double u : utilizations) {
    if (std::isnan(u) || u < 0.0) throw InputError("utilization samples must be >= 0");
    if (u > 1.0) {
      ++h.clamped;
      u = 1.0;
    }
    // Bin by the stored edges so refining the bin count never moves a
    // sample across a shared edge.
    auto bin = static_cast<std::size_t>(std::min(std::floor(u * static_cast<double>(nbins)),
                                                 static_cast<double>(nbins - 1)));
    while (bin > 0 && u < h.edges[bin]) --bin;
    while (bin + 1 < nbins && u >= h.edges[bin + 1]) ++bin;
    ++counts[bin];
  }

  h.samples = utilizations.size();
  h.frequencies.resize(nbins);
  for (std::size_t i = 0; i < nbins; ++i) {
    h.frequencies[i] = static_cast<double>(counts[i]) / static_cast<double>(h.samples);
  }
  return h;
}

double tail_mass(std::span<const double> samples, double threshold) {
  if (samples.empty()) throw InputError("tail mass of an empty sample list");
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw InputError("tail threshold must lie in [0, 1]");
  const auto above = std::count_if(samples.begin(), samples.end(),
                                   [&](double u) { return std::min(u, 1.0) > threshold; });
  return static_cast<double>(above) / static_cast<double>(samples.size());
}

double Totals::drop_ratio() const { return offered > 0.0 ? dropped / offered : 0.0; }

std::vector<double> utilizations(const std::vector<plant::Measurement>& series) {
  std::vector<double> out;
  out.reserve(series.size());
  for (const auto& m : series) out.push_back(m.utilization);
  return out;
}

RunReport summarize(const plant::RunResult& run, double capacity, const ReportOptions& opts) {
  if (run.series.empty()) throw InputError("cannot summarize an empty run");

  RunReport r;
  r.capacity = capacity;
  r.ticks = run.series.size();
  r.tail_threshold = opts.tail_threshold;

  struct Acc {
    CompensatedSum offered, carried, dropped;
    std::vector<double> util;
  };
  std::map<ClassId, Acc> acc;
  CompensatedSum util_sum;
  for (const auto& m : run.series) {
    util_sum.add(m.utilization);
    r.peak_utilization = std::max(r.peak_utilization, m.utilization);
    for (const auto& [id, c] : m.classes) {
      auto& a = acc[id];
      a.offered.add(c.offered);
      a.carried.add(c.carried);
      a.dropped.add(c.dropped);
      a.util.push_back(c.width > 0.0 ? c.carried / c.width : 0.0);
    }
  }

  CompensatedSum offered, carried, dropped, backlog;
  for (auto& [id, a] : acc) {
    Totals t;
    t.offered = a.offered.value();
    t.carried = a.carried.value();
    t.dropped = a.dropped.value();
    t.final_backlog = run.series.back().classes.at(id).backlog_after;
    offered.add(t.offered);
    carried.add(t.carried);
    dropped.add(t.dropped);
    backlog.add(t.final_backlog);
    r.classes.emplace(id, t);
    r.class_histograms.emplace(id, histogram(a.util, opts.bins));
  }
  r.total = {offered.value(), carried.value(), dropped.value(), backlog.value()};

  const auto util = utilizations(run.series);
  r.histogram = histogram(util, opts.bins);
  r.tail_mass = tail_mass(util, opts.tail_threshold);
  r.mean_utilization = util_sum.value() / static_cast<double>(util.size());
  r.activations = static_cast<std::size_t>(std::count_if(
      run.control_log.begin(), run.control_log.end(), [](const auto& d) { return d.activated; }));
  return r;
}

namespace {

MetricDelta make_delta(std::string name, double base, double controlled, bool lower_is_better) {
  MetricDelta d;
  d.name = std::move(name);
  d.base = base;
  d.controlled = controlled;
  d.delta = controlled - base;
  if (base != 0.0) d.ratio = controlled / base;
  if (lower_is_better) d.improved = controlled < base;
  return d;
}

}  // namespace

const MetricDelta& ComparisonReport::at(const std::string& name) const {
  for (const auto& m : metrics) {
    if (m.name == name) return m;
  }
  throw InputError("comparison has no metric '" + name + "'");
}

bool ComparisonReport::drops_improved() const { return at("total.dropped").improved.value_or(false); }
bool ComparisonReport::tail_improved() const { return at("tail_mass").improved.value_or(false); }

ComparisonReport compare(const RunReport& base, const RunReport& controlled) {
  if (base.classes.size() != controlled.classes.size() ||
      !std::equal(base.classes.begin(), base.classes.end(), controlled.classes.begin(),
                  [](const auto& a, const auto& b) { return a.first == b.first; })) {
    throw InputError("reports cover different traffic classes");
  }
  ComparisonReport c;
  auto add = [&](std::string name, double b, double k, bool lower) {
    c.metrics.push_back(make_delta(std::move(name), b, k, lower));
  };
  add("total.offered", base.total.offered, controlled.total.offered, false);
  add("total.carried", base.total.carried, controlled.total.carried, false);
  add("total.dropped", base.total.dropped, controlled.total.dropped, true);
  add("total.drop_ratio", base.total.drop_ratio(), controlled.total.drop_ratio(), true);
  add("tail_mass", base.tail_mass, controlled.tail_mass, true);
  add("peak_utilization", base.peak_utilization, controlled.peak_utilization, false);
  add("mean_utilization", base.mean_utilization, controlled.mean_utilization, false);
  add("activations", static_cast<double>(base.activations),
      static_cast<double>(controlled.activations), false);
  for (const auto& [id, t] : base.classes) {
    const auto& k = controlled.classes.at(id);
    add("class." + id + ".dropped", t.dropped, k.dropped, true);
    add("class." + id + ".drop_ratio", t.drop_ratio(), k.drop_ratio(), true);
  }
  return c;
}

void write_series_csv(std::ostream& os, const std::vector<plant::Measurement>& series) {
  os << "tick,class_id,offered,backlog_before,carried,backlog_after,dropped,width,channel_utilization\n";
  for (const auto& m : series) {
    for (const auto& [id, c] : m.classes) {
      os << m.tick << ',' << id << ',' << format_double(c.offered) << ','
         << format_double(c.backlog_before) << ',' << format_double(c.carried) << ','
         << format_double(c.backlog_after) << ',' << format_double(c.dropped) << ','
         << format_double(c.width) << ',' << format_double(m.utilization) << '\n';
    }
  }
}

void write_histogram_csv(std::ostream& os, const LoadHistogram& h) {
  os << "bin_lo,bin_hi,frequency\n";
  for (std::size_t i = 0; i < h.bins(); ++i) {
    os << format_double(h.edges[i]) << ',' << format_double(h.edges[i + 1]) << ','
       << format_double(h.frequencies[i]) << '\n';
  }
}

void write_report(std::ostream& os, const RunReport& r) {
  os << "run report\n";
  auto line = [&](const std::string& label, const std::string& value) {
    os << "  " << label << std::string(label.size() < 22 ? 22 - label.size() : 1, ' ') << value << '\n';
  };
  line("ticks", std::to_string(r.ticks));
  line("capacity", format_double(r.capacity));
  line("control activations", std::to_string(r.activations));
  line("mean utilization", format_double(r.mean_utilization));
  line("peak utilization", format_double(r.peak_utilization));
  line("tail mass (> " + format_double(r.tail_threshold) + ")", format_double(r.tail_mass));
  if (r.histogram.clamped > 0) {
    os << "  warning: " << r.histogram.clamped << " utilization samples above 1 were clamped\n";
  }
  os << "\n";
  os << "class,offered,carried,dropped,drop_ratio,final_backlog\n";
  auto row = [&](const std::string& name, const Totals& t) {
    os << name << ',' << format_double(t.offered) << ',' << format_double(t.carried) << ','
       << format_double(t.dropped) << ',' << format_double(t.drop_ratio()) << ','
       << format_double(t.final_backlog) << '\n';
  };
  for (const auto& [id, t] : r.classes) row(id, t);
  row("total", r.total);
}

void write_comparison(std::ostream& os, const ComparisonReport& c) {
  os << "metric,base,controlled,delta,ratio,improved\n";
  for (const auto& m : c.metrics) {
    os << m.name << ',' << format_double(m.base) << ',' << format_double(m.controlled) << ','
       << format_double(m.delta) << ',' << (m.ratio ? format_double(*m.ratio) : "n/a") << ','
       << (m.improved ? (*m.improved ? "yes" : "no") : "-") << '\n';
  }
}

}  // namespace qosctl::metrics
