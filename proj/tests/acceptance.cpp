// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// non-zero if any fails.

#include "qosctl/commands.hpp"
#include "qosctl/controller.hpp"
#include "qosctl/forecast.hpp"
#include "qosctl/metrics.hpp"
#include "qosctl/plant.hpp"
#include "qosctl/scenario_file.hpp"
#include "qosctl/statespace.hpp"
#include "qosctl/text_format.hpp"
#include "support.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

using namespace qosctl;
namespace fs = std::filesystem;

namespace {

const std::string kBurst = QOSCTL_SOURCE_DIR "/scenarios/burst_two_class.ini";
const std::string kQuiet = QOSCTL_SOURCE_DIR "/scenarios/quiet.ini";

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v) { return text::format_double(v); }

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  std::random_device rd;
  auto p = fs::temp_directory_path() / ("qosctl-acceptance-" + std::to_string(rd()) + "-" + name);
  fs::create_directories(p);
  return p;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// --- 1 ----------------------------------------------------------------------

Outcome burst_contrast() {
  const auto dir = scratch_dir("burst");
  cli::RunOptions opts;
  opts.out_dir = dir.string();
  std::ostringstream out, err;
  const auto start = std::chrono::steady_clock::now();
  const int code = cli::cmd_compare(kBurst, opts, out, err);
  const double elapsed = seconds_since(start);
  if (code != 0) return {false, "compare exited " + std::to_string(code) + ": " + err.str()};

  // Read the numbers back from the written comparison file.
  std::map<std::string, std::pair<double, double>> rows;
  std::istringstream csv(slurp(dir / "comparison.csv"));
  std::string line;
  std::getline(csv, line);
  while (std::getline(csv, line)) {
    const auto cells = text::split(line, ",");
    rows[std::string(cells[0])] = {*text::parse_double(cells[1]), *text::parse_double(cells[2])};
  }
  fs::remove_all(dir);
  const auto [drop_base, drop_ctl] = rows.at("total.dropped");
  const auto [tail_base, tail_ctl] = rows.at("tail_mass");
  const bool pass = drop_ctl < drop_base && tail_ctl < tail_base && elapsed < 10.0;
  return {pass, "dropped " + num(drop_base) + " -> " + num(drop_ctl) + ", tail_mass(0.9) " + num(tail_base) +
                    " -> " + num(tail_ctl) + ", " + num(std::round(elapsed * 1000) / 1000) + " s"};
}

// --- 2 and 3 ----------------------------------------------------------------

struct FuzzStats {
  long decisions = 0;
  long violations = 0;
  long scenarios = 0;
};

bool decision_safe(const control::ControlDecision& d, const std::vector<control::TrafficClassSpec>& specs,
                   double capacity) {
  control::AllocationState a{capacity, d.new_widths};
  if (!(a.total_width() <= capacity)) return false;
  for (const auto& s : specs) {
    const auto it = d.new_widths.find(s.id);
    if (it == d.new_widths.end() || !(it->second >= s.critical_min_width)) return false;
  }
  return true;
}

plant::ScenarioSpec random_scenario(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> count(1, 6);
  plant::ScenarioSpec s;
  s.capacity = 1.0 + 999.0 * unit(rng);
  s.ticks = 150;
  s.seed = rng();
  const int n = count(rng);
  std::vector<int> prios(static_cast<std::size_t>(n));
  int next = 0;
  for (int i = 0; i < n; ++i) prios[static_cast<std::size_t>(i)] = next += std::uniform_int_distribution<int>(1, 3)(rng);
  std::shuffle(prios.begin(), prios.end(), rng);

  // Random split of capacity: minima first, then initial widths above them.
  std::vector<double> share(static_cast<std::size_t>(n));
  double total = 0;
  for (auto& v : share) total += (v = 0.05 + unit(rng));
  const double used = 0.5 + 0.5 * unit(rng);
  for (int i = 0; i < n; ++i) {
    const double width = share[static_cast<std::size_t>(i)] / total * used * s.capacity;
    const double min = unit(rng) < 0.25 ? 0.0 : width * unit(rng);
    plant::ScenarioClass c;
    c.spec = {"k" + std::to_string(i), prios[static_cast<std::size_t>(i)], min, width};
    c.buffer_size = width * 4 * unit(rng);
    const double scale = width * (0.3 + 1.7 * unit(rng));
    switch (std::uniform_int_distribution<int>(0, 3)(rng)) {
      case 0: c.source.params = plant::Constant{scale}; break;
      case 1: {
        const auto on = std::uniform_int_distribution<plant::Tick>(1, 30)(rng);
        const auto off = std::uniform_int_distribution<plant::Tick>(0, 40)(rng);
        c.source.params = plant::OnOff{scale * 1.5, scale * 0.2 * unit(rng), on, off};
        break;
      }
      case 2: c.source.params = plant::Poisson{scale}; break;
      default: {
        std::vector<double> samples(static_cast<std::size_t>(std::uniform_int_distribution<int>(5, 60)(rng)));
        for (auto& v : samples) v = 2 * scale * unit(rng);
        c.source.params = plant::Trace{samples, true};
      }
    }
    s.classes.push_back(c);
  }
  // Guard against the share arithmetic rounding a hair above capacity.
  control::AllocationState a{s.capacity, {}};
  for (const auto& c : s.classes) a.widths[c.spec.id] = c.spec.initial_width;
  while (a.total_width() > s.capacity) s.capacity = std::nextafter(s.capacity, 1e300);

  auto& cfg = s.controller;
  cfg.threshold = 0.3 + 0.65 * unit(rng);
  cfg.beta = 0.8 + 0.7 * unit(rng);
  cfg.cooldown = std::uniform_int_distribution<int>(1, 5)(rng);
  cfg.forecast.window = static_cast<std::size_t>(std::uniform_int_distribution<int>(2, 30)(rng));
  cfg.forecast.horizon = std::uniform_int_distribution<plant::Tick>(1, 10)(rng);
  cfg.forecast.dead_band = 0.05 * unit(rng);
  if (unit(rng) < 0.5) {
    cfg.forecast.method = forecast::Method::ModelBank;
    cfg.bank = {forecast::SlidingTrend{}, forecast::FirstOrder{0.5 + unit(rng), s.capacity * 0.05 * unit(rng)},
                forecast::FixedLine{unit(rng) - 0.5, s.capacity * unit(rng)}};
  }
  s.control_enabled = true;
  return s;
}

Outcome controller_fuzz(std::vector<plant::RunResult>* keep) {
  std::mt19937_64 rng(90210);
  FuzzStats st;
  const auto start = std::chrono::steady_clock::now();

  // Closed-loop runs: every decision the controller takes in a simulation.
  for (int i = 0; i < 1000; ++i) {
    const auto s = random_scenario(rng);
    const auto run = plant::run_scenario(s);
    const auto specs = s.class_specs();
    for (const auto& d : run.control_log) {
      ++st.decisions;
      if (!decision_safe(d, specs, s.capacity)) ++st.violations;
    }
    ++st.scenarios;
    if (keep != nullptr && i < 200) keep->push_back(run);
  }

  // Direct calls with arbitrary forecasts, widths and priorities.
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const forecast::Trend trends[] = {forecast::Trend::Increase, forecast::Trend::Decrease, forecast::Trend::Flat};
  for (int i = 0; i < 20000; ++i) {
    const auto s = random_scenario(rng);
    control::AllocationState alloc{s.capacity, {}};
    std::map<control::ClassId, forecast::Forecast> forecasts;
    for (const auto& c : s.classes) {
      alloc.widths[c.spec.id] = c.spec.initial_width;
      forecast::Forecast f;
      f.class_id = c.spec.id;
      f.predicted_load = unit(rng) < 0.1 ? 0.0 : 1.5 * s.capacity * unit(rng);
      f.trend = trends[std::uniform_int_distribution<int>(0, 2)(rng)];
      forecasts[c.spec.id] = f;
    }
    const auto d = control::reallocate(alloc, forecasts, s.class_specs(), s.controller.beta);
    ++st.decisions;
    if (!decision_safe(d, s.class_specs(), s.capacity)) ++st.violations;
  }
  const double elapsed = seconds_since(start);
  return {st.violations == 0 && elapsed < 60.0,
          std::to_string(st.scenarios) + " closed-loop scenarios + 20000 direct calls, " +
              std::to_string(st.decisions) + " decisions, " + std::to_string(st.violations) + " violations, " +
              num(std::round(elapsed * 100) / 100) + " s"};
}

Outcome conservation(const std::vector<plant::RunResult>& runs) {
  long ticks = 0, nonzero = 0;
  double worst_per_10k = 0.0;
  for (const auto& run : runs) {
    double accumulated = 0.0;
    for (const auto& m : run.series) {
      ++ticks;
      for (const auto& [id, c] : m.classes) {
        const double r = c.conservation_residual();
        if (r != 0.0) ++nonzero;
        accumulated += std::abs(r);
      }
    }
    const double per_10k = accumulated * 1e4 / static_cast<double>(std::max<std::size_t>(1, run.series.size()));
    worst_per_10k = std::max(worst_per_10k, per_10k);
  }
  return {worst_per_10k <= 1e-9, std::to_string(runs.size()) + " runs, " + std::to_string(ticks) + " ticks, " +
                                     std::to_string(nonzero) + " non-zero residuals, worst accumulated " +
                                     num(worst_per_10k) + " per 10^4 ticks"};
}

// --- 4 ----------------------------------------------------------------------

Outcome identification() {
  std::mt19937_64 rng(4242);
  std::uniform_int_distribution<int> ndim(1, 4), mdim(1, 2);
  std::uniform_real_distribution<double> rho(0.1, 0.95), u(-1, 1);
  double worst = 0.0;
  int failures = 0;
  for (int i = 0; i < 50; ++i) {
    const auto n = static_cast<std::size_t>(ndim(rng));
    const auto a = testing::matrix_with_moduli(testing::random_moduli(n, rho(rng), rng), rng);
    statespace::Matrix b(static_cast<Eigen::Index>(n), mdim(rng));
    for (Eigen::Index k = 0; k < b.size(); ++k) b.data()[k] = u(rng);

    statespace::Trajectory traj;
    statespace::Vector x(a.rows());
    for (Eigen::Index k = 0; k < x.size(); ++k) x[k] = u(rng);
    traj.states.push_back(x);
    for (int t = 0; t < 99; ++t) {
      statespace::Vector in(b.cols());
      for (Eigen::Index k = 0; k < in.size(); ++k) in[k] = u(rng);
      x = a * x + b * in;
      traj.inputs.push_back(in);
      traj.states.push_back(x);
    }
    const auto fit = statespace::identify(traj);
    statespace::Matrix err(a.rows(), a.cols() + b.cols());
    err << fit.a - a, fit.b - b;
    worst = std::max(worst, err.norm());
    if (err.norm() > 1e-8) ++failures;
  }
  return {failures == 0, "50 systems, length 100, worst Frobenius error " + num(worst)};
}

// --- 5 ----------------------------------------------------------------------

Outcome stability() {
  std::mt19937_64 rng(5150);
  std::uniform_real_distribution<double> inside(0.1, 0.99), outside(1.01, 1.6);
  std::uniform_int_distribution<std::size_t> dim(1, 5);
  int agree = 0, stable_count = 0;
  for (int i = 0; i < 100; ++i) {
    const bool want_stable = i % 2 == 0;
    double r = want_stable ? inside(rng) : outside(rng);
    if (want_stable && r >= 0.99) r = 0.98;
    const auto a = testing::matrix_with_moduli(testing::random_moduli(dim(rng), r, rng), rng);
    // The simulated verdict: does a unit start decay below 1 after 1000 steps?
    const bool sim_stable = testing::free_response_norm(a, 1000, rng) < 1.0;
    if (sim_stable) ++stable_count;
    if (statespace::is_stable(a) == sim_stable) ++agree;
  }
  return {agree == 100, std::to_string(agree) + "/100 agree (" + std::to_string(stable_count) +
                            " stable by simulation)"};
}

// --- 6 ----------------------------------------------------------------------

Outcome controllability() {
  std::mt19937_64 rng(606);
  std::uniform_int_distribution<int> entry(-1, 1), ndim(1, 3), mdim(1, 2);
  int agree = 0, controllable = 0;
  for (int i = 0; i < 200; ++i) {
    const int n = ndim(rng), m = mdim(rng);
    std::vector<std::vector<std::int64_t>> a(static_cast<std::size_t>(n), std::vector<std::int64_t>(static_cast<std::size_t>(n)));
    std::vector<std::vector<std::int64_t>> b(static_cast<std::size_t>(n), std::vector<std::int64_t>(static_cast<std::size_t>(m)));
    for (auto& row : a) for (auto& v : row) v = entry(rng);
    for (auto& row : b) for (auto& v : row) v = entry(rng);

    // Brute force: reachable directions A^k b_j in exact integer arithmetic.
    std::vector<std::vector<std::int64_t>> reach;
    for (int j = 0; j < m; ++j) {
      std::vector<std::int64_t> v(static_cast<std::size_t>(n));
      for (int r = 0; r < n; ++r) v[static_cast<std::size_t>(r)] = b[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)];
      for (int k = 0; k < n; ++k) {
        reach.push_back(v);
        std::vector<std::int64_t> next(static_cast<std::size_t>(n), 0);
        for (int r = 0; r < n; ++r) {
          for (int c = 0; c < n; ++c) next[static_cast<std::size_t>(r)] += a[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] * v[static_cast<std::size_t>(c)];
        }
        v = next;
      }
    }
    const int exact = testing::integer_rank(reach);

    statespace::Matrix am(n, n), bm(n, m);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) am(r, c) = static_cast<double>(a[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]);
      for (int c = 0; c < m; ++c) bm(r, c) = static_cast<double>(b[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]);
    }
    const statespace::StateSpaceModel model(am, bm);
    const auto rank = statespace::numerical_rank(statespace::controllability_matrix(model));
    if (rank == exact && statespace::is_controllable(model) == (exact == n)) ++agree;
    if (exact == n) ++controllable;
  }
  return {agree == 200, std::to_string(agree) + "/200 agree (" + std::to_string(controllable) + " controllable)"};
}

// --- 7 ----------------------------------------------------------------------

Outcome forecaster() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> slope(-4, 4), offset(0, 100);
  std::uniform_int_distribution<forecast::Tick> first(0, 100000);
  double worst = 0.0;
  long cases = 0;
  for (std::size_t w = 2; w <= 128; ++w) {
    for (forecast::Tick h = 1; h <= 10; ++h) {
      const double s = slope(rng);
      // Start high enough that the line stays non-negative through the target.
      const double base = offset(rng) + std::abs(s) * static_cast<double>(w + 15);
      forecast::LoadHistory hist("c");
      const forecast::Tick t0 = first(rng);
      for (std::size_t i = 0; i < w + 5; ++i) hist.append(t0 + static_cast<forecast::Tick>(i), base + s * static_cast<double>(i));
      forecast::ForecastConfig cfg;
      cfg.window = w;
      cfg.horizon = h;
      const double expected = base + s * static_cast<double>(static_cast<forecast::Tick>(w + 4) + h);
      const double err = std::abs(forecast::predict(hist, cfg).predicted_load - expected);
      worst = std::max(worst, err);
      ++cases;
    }
  }
  return {worst <= 1e-12, std::to_string(cases) + " (W, H) pairs, W = 2..128, H = 1..10, worst error " + num(worst)};
}

// --- 8 ----------------------------------------------------------------------

Outcome determinism() {
  const auto a = scratch_dir("det-a");
  const auto b = scratch_dir("det-b");
  cli::RunOptions oa, ob;
  oa.out_dir = a.string();
  ob.out_dir = b.string();
  std::ostringstream out, err;
  const int ca = cli::cmd_run(kBurst, oa, out, err);
  const int cb = cli::cmd_run(kBurst, ob, out, err);
  bool same = ca == 0 && cb == 0;
  std::size_t bytes = 0;
  for (const char* f : {"series.csv", "report.txt", "histogram.csv"}) {
    const auto x = slurp(a / f);
    same = same && !x.empty() && x == slurp(b / f);
    bytes += x.size();
  }
  fs::remove_all(a);
  fs::remove_all(b);
  return {same, "3 files, " + std::to_string(bytes) + " bytes compared"};
}

// --- 9 ----------------------------------------------------------------------

Outcome inactivity() {
  auto spec = io::load_scenario(kQuiet);
  spec.control_enabled = false;
  const auto off = plant::run_scenario(spec);
  spec.control_enabled = true;
  const auto on = plant::run_scenario(spec);
  std::size_t activations = 0;
  for (const auto& d : on.control_log) activations += d.activated ? 1 : 0;
  bool below = true;
  for (const auto& m : on.series) {
    for (const auto& [id, c] : m.classes) below = below && c.offered < spec.controller.threshold * c.width;
  }
  const bool identical = off.series == on.series;
  return {identical && activations == 0 && below,
          std::to_string(on.series.size()) + " ticks, " + std::to_string(activations) + " activations, series " +
              (identical ? "bit-identical" : "differ")};
}

}  // namespace

int main() {
  std::vector<plant::RunResult> runs;
  // Conservation also covers both arms of the bundled scenario.
  {
    auto spec = io::load_scenario(kBurst);
    spec.control_enabled = false;
    runs.push_back(plant::run_scenario(spec));
    spec.control_enabled = true;
    runs.push_back(plant::run_scenario(spec));
  }

  struct Row {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Row> rows{
      {1, "controlled run drops less and has a thinner utilization tail", burst_contrast},
      {2, "controller safety fuzz", [&] { return controller_fuzz(&runs); }},
      {3, "per-tick conservation", [&] { return conservation(runs); }},
      {4, "identification recovers random stable systems", identification},
      {5, "stability verdict matches free-response simulation", stability},
      {6, "controllability rank matches exact reachable dimension", controllability},
      {7, "trend forecast exact on affine series", forecaster},
      {8, "run output is byte-identical across invocations", determinism},
      {9, "quiet scenario identical with control on and off", inactivity},
  };

  int failed = 0;
  for (const auto& row : rows) {
    Outcome o;
    try {
      o = row.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s  [%d] %s: %s\n", o.pass ? "PASS" : "FAIL", row.id, row.name, o.detail.c_str());
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(rows.size()) - failed, rows.size());
  return failed == 0 ? 0 : 1;
}
