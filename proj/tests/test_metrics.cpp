#include "qosctl/error.hpp"
#include "qosctl/metrics.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

using namespace qosctl;
using namespace qosctl::metrics;

namespace {

double sum(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s;
}

plant::RunResult tiny_run() {
  plant::RunResult r;
  auto tick = [](plant::Tick t, double off, double carried, double dropped, double width) {
    plant::Measurement m;
    m.tick = t;
    plant::ClassMeasurement c;
    c.offered = off;
    c.carried = carried;
    c.dropped = dropped;
    c.backlog_after = off - carried - dropped;
    c.width = width;
    m.classes["a"] = c;
    m.utilization = carried / 10;
    return m;
  };
  r.series = {tick(0, 5, 5, 0, 10), tick(1, 12, 10, 2, 10), tick(2, 9.5, 9.5, 0, 10)};
  return r;
}

}  // namespace

TEST_CASE("histogram examples") {
  const std::vector<double> half(7, 0.5);
  const auto h = histogram(half, 10);
  CHECK(h.frequencies[5] == 1.0);
  CHECK(sum(h.frequencies) == 1.0);
  CHECK(h.edges.front() == 0.0);
  CHECK(h.edges.back() == 1.0);

  const std::vector<double> spread{0.05, 0.15, 0.95};
  const auto g = histogram(spread, 10);
  CHECK(g.frequencies[0] == doctest::Approx(1.0 / 3));
  CHECK(g.frequencies[1] == doctest::Approx(1.0 / 3));
  CHECK(g.frequencies[9] == doctest::Approx(1.0 / 3));

  const std::vector<double> top{1.0, 1.2};
  const auto t = histogram(top, 4);
  CHECK(t.frequencies[3] == 1.0);
  CHECK(t.clamped == 1);

  CHECK_THROWS_AS(histogram(std::vector<double>{}, 10), InputError);
  CHECK_THROWS_AS(histogram(half, 0), InputError);
  CHECK_THROWS_AS(histogram(std::vector<double>{-0.1}, 10), InputError);
}

TEST_CASE("histogram mass is normalised and survives refinement") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> v(1 + trial * 37);
    for (auto& x : v) x = u(rng);
    const std::size_t coarse = 1 + static_cast<std::size_t>(trial % 12);
    const auto h = histogram(v, coarse);
    const auto fine = histogram(v, coarse * 4);
    CHECK(sum(h.frequencies) == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t b = 0; b < coarse; ++b) {
      double merged = 0;
      for (std::size_t k = 0; k < 4; ++k) merged += fine.frequencies[4 * b + k];
      CHECK(merged == doctest::Approx(h.frequencies[b]).epsilon(1e-12));
    }
  }
}

TEST_CASE("tail_mass examples") {
  const std::vector<double> v{0.5, 0.95, 0.99};
  CHECK(tail_mass(v, 0.9) == doctest::Approx(2.0 / 3));
  const std::vector<double> w{0, 0, 0.3, 1};
  CHECK(tail_mass(w, 0.0) == 0.5);
  CHECK(tail_mass(w, 1.0) == 0.0);
  CHECK_THROWS_AS(tail_mass(std::vector<double>{}, 0.5), InputError);
  CHECK_THROWS_AS(tail_mass(v, 1.5), InputError);
}

TEST_CASE("tail_mass is non-increasing in the threshold") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> v(500);
  for (auto& x : v) x = u(rng);
  double prev = 1.0;
  for (int i = 0; i <= 100; ++i) {
    const double t = tail_mass(v, i / 100.0);
    CHECK(t <= prev);
    prev = t;
  }
}

TEST_CASE("summarize") {
  const auto r = summarize(tiny_run(), 10, {4, 0.9});
  CHECK(r.ticks == 3);
  CHECK(r.total.offered == 26.5);
  CHECK(r.total.carried == 24.5);
  CHECK(r.total.dropped == 2);
  CHECK(r.total.drop_ratio() == doctest::Approx(2 / 26.5));
  CHECK(r.peak_utilization == 1.0);
  CHECK(r.tail_mass == doctest::Approx(2.0 / 3));
  CHECK(r.histogram.bins() == 4);
  CHECK(r.class_histograms.at("a").bins() == 4);
}

TEST_CASE("compare") {
  const auto base = summarize(tiny_run(), 10);
  const auto same = compare(base, base);
  for (const auto& m : same.metrics) CHECK(m.delta == 0);
  CHECK_FALSE(same.drops_improved());

  auto better = base;
  better.total.dropped = 60;
  auto worse = base;
  worse.total.dropped = 100;
  const auto c = compare(worse, better);
  CHECK(c.at("total.dropped").delta == -40);
  CHECK(*c.at("total.dropped").ratio == 0.6);
  CHECK(*c.at("total.dropped").improved);
  CHECK(c.drops_improved());
  CHECK_THROWS_AS(c.at("nope"), InputError);

  auto other = base;
  other.classes.clear();
  CHECK_THROWS_AS(compare(base, other), InputError);
}

TEST_CASE("writers have fixed columns") {
  const auto run = tiny_run();
  std::ostringstream series;
  write_series_csv(series, run.series);
  CHECK(series.str().rfind(
            "tick,class_id,offered,backlog_before,carried,backlog_after,dropped,width,channel_utilization\n"
            "0,a,5,0,5,0,0,10,0.5\n",
            0) == 0);

  std::ostringstream hist;
  write_histogram_csv(hist, histogram(std::vector<double>{0.1, 0.6}, 2));
  CHECK(hist.str() == "bin_lo,bin_hi,frequency\n0,0.5,0.5\n0.5,1,0.5\n");

  std::ostringstream cmp;
  const auto r = summarize(run, 10);
  write_comparison(cmp, compare(r, r));
  CHECK(cmp.str().rfind("metric,base,controlled,delta,ratio,improved\n", 0) == 0);
}
