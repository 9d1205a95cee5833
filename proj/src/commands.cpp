#include "qosctl/commands.hpp"

#include "qosctl/error.hpp"
#include "qosctl/metrics.hpp"
#include "qosctl/model_file.hpp"
#include "qosctl/scenario_file.hpp"
#include "qosctl/statespace.hpp"
#include "qosctl/text_format.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <random>
#include <sstream>

namespace qosctl::cli {
namespace {

namespace fs = std::filesystem;

int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const IdentificationError& e) {
    err << "error: " << e.what() << '\n';
    return kAnalysisError;
  } catch (const SimulationError& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}

void check_options(const RunOptions& opts) {
  if (opts.bins < 1) throw InputError("--bins must be at least 1");
  if (!(opts.tail_threshold >= 0.0 && opts.tail_threshold <= 1.0)) {
    throw InputError("--tail-threshold must lie in [0, 1]");
  }
}

plant::ScenarioSpec load_with_overrides(const std::string& path, const RunOptions& opts) {
  auto overrides = opts.overrides;
  if (opts.seed) overrides.push_back("channel.seed=" + std::to_string(*opts.seed));
  return io::load_scenario(path, overrides);
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw InputError("cannot write " + path.string());
  body(os);
  if (!os) throw InputError("failed writing " + path.string());
}

fs::path prepare_dir(const std::string& dir) {
  fs::path p(dir.empty() ? "." : dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw InputError("cannot create output directory " + p.string() + ": " + ec.message());
  return p;
}

metrics::ReportOptions report_options(const RunOptions& opts) { return {opts.bins, opts.tail_threshold}; }

// Simulation failures surface as exit 2, not as input errors.
plant::RunResult simulate(const plant::ScenarioSpec& spec) {
  try {
    return plant::run_scenario(spec);
  } catch (const InputError& e) {
    throw SimulationError(e.what());
  }
}

}  // namespace

int cmd_run(const std::string& scenario_path, const RunOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    check_options(opts);
    const auto spec = load_with_overrides(scenario_path, opts);
    const auto run = simulate(spec);
    const auto report = metrics::summarize(run, spec.capacity, report_options(opts));

    const auto dir = prepare_dir(opts.out_dir);
    write_file(dir / "series.csv", [&](std::ostream& os) { metrics::write_series_csv(os, run.series); });
    write_file(dir / "report.txt", [&](std::ostream& os) { metrics::write_report(os, report); });
    write_file(dir / "histogram.csv", [&](std::ostream& os) { metrics::write_histogram_csv(os, report.histogram); });

    metrics::write_report(out, report);
    return kOk;
  });
}

int cmd_compare(const std::string& scenario_path, const RunOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    check_options(opts);
    auto spec = load_with_overrides(scenario_path, opts);

    spec.control_enabled = false;
    const auto base_run = simulate(spec);
    const auto base = metrics::summarize(base_run, spec.capacity, report_options(opts));

    spec.control_enabled = true;
    const auto ctl_run = simulate(spec);
    const auto controlled = metrics::summarize(ctl_run, spec.capacity, report_options(opts));

    const auto cmp = metrics::compare(base, controlled);

    const auto dir = prepare_dir(opts.out_dir);
    write_file(dir / "comparison.csv", [&](std::ostream& os) { metrics::write_comparison(os, cmp); });
    write_file(dir / "report_base.txt", [&](std::ostream& os) { metrics::write_report(os, base); });
    write_file(dir / "report_controlled.txt", [&](std::ostream& os) { metrics::write_report(os, controlled); });
    write_file(dir / "histogram_base.csv", [&](std::ostream& os) { metrics::write_histogram_csv(os, base.histogram); });
    write_file(dir / "histogram_controlled.csv",
               [&](std::ostream& os) { metrics::write_histogram_csv(os, controlled.histogram); });

    metrics::write_comparison(out, cmp);
    out << "drops " << (cmp.drops_improved() ? "improved" : "not improved") << ", tail mass "
        << (cmp.tail_improved() ? "improved" : "not improved") << '\n';
    return kOk;
  });
}

int cmd_analyze(const std::string& model_path, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto model = io::load_model(model_path);
    const auto n = model.states();
    const double radius = statespace::spectral_radius(model.a());
    const auto ctrl_rank = statespace::numerical_rank(statespace::controllability_matrix(model));
    const auto obs_rank = statespace::numerical_rank(statespace::observability_matrix(model));

    out << "states " << n << ", inputs " << model.inputs() << ", outputs " << model.outputs() << '\n';
    out << "spectral radius: " << text::format_double(radius) << '\n';
    out << "stability: " << (radius < 1.0 ? "stable" : "not stable") << '\n';
    out << "controllability rank: " << ctrl_rank << " of " << n << '\n';
    out << "controllability: " << (ctrl_rank == n ? "controllable" : "not controllable") << '\n';
    out << "observability rank: " << obs_rank << " of " << n << '\n';
    out << "observability: " << (obs_rank == n ? "observable" : "not observable") << '\n';
    return kOk;
  });
}

int cmd_identify(const std::string& trajectory_path, const std::string& out_path, std::ostream& out,
                 std::ostream& err) {
  return guarded(err, [&] {
    const auto traj = io::load_trajectory(trajectory_path);
    const auto fit = statespace::identify(traj);
    const statespace::StateSpaceModel model(fit.a, fit.b);

    std::ostringstream text_out;
    text_out << "# identified from " << trajectory_path << '\n';
    text_out << "# rms_residual = " << text::format_double(fit.rms_residual) << '\n';
    text_out << io::emit_model(model);

    if (out_path.empty()) {
      out << text_out.str();
    } else {
      write_file(out_path, [&](std::ostream& os) { os << text_out.str(); });
      out << "rms_residual " << text::format_double(fit.rms_residual) << '\n';
    }
    return kOk;
  });
}

int cmd_simulate(const std::string& model_path, std::int64_t ticks, std::uint64_t seed,
                 const std::string& out_path, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (ticks < 1) throw InputError("--ticks must be at least 1");
    const auto model = io::load_model(model_path);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    auto draw = [&](const statespace::Interval& iv) {
      const double lo = std::isfinite(iv.lo) ? iv.lo : (std::isfinite(iv.hi) ? iv.hi - 2.0 : -1.0);
      const double hi = std::isfinite(iv.hi) ? iv.hi : lo + 2.0;
      return lo + (hi - lo) * 0.5 * (unit(rng) + 1.0);
    };

    statespace::Trajectory traj;
    statespace::Vector x(model.states());
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = draw(model.state_bounds()[static_cast<std::size_t>(i)]);
    traj.states.push_back(x);
    for (std::int64_t t = 0; t < ticks; ++t) {
      statespace::Vector u(model.inputs());
      for (Eigen::Index j = 0; j < u.size(); ++j) u[j] = draw(model.input_bounds()[static_cast<std::size_t>(j)]);
      x = statespace::step(model, x, u).state;
      traj.inputs.push_back(u);
      traj.states.push_back(x);
    }

    const auto body = io::emit_trajectory(traj);
    if (out_path.empty()) {
      out << body;
    } else {
      write_file(out_path, [&](std::ostream& os) { os << body; });
    }
    return kOk;
  });
}

}  // namespace qosctl::cli
