#include "qosctl/statespace.hpp"

#include "qosctl/error.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

namespace qosctl::statespace {
namespace {

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_finite(const Matrix& m, const char* name) {
  if (!m.allFinite()) throw InputError(std::string(name) + " has non-finite entries");
}

void require_finite(const Vector& v, const char* name) {
  if (!v.allFinite()) throw InputError(std::string(name) + " has non-finite entries");
}

Box checked_box(Box box, Eigen::Index dim, const char* name) {
  if (box.empty()) return unbounded_box(dim);
  if (static_cast<Eigen::Index>(box.size()) != dim) {
    throw InputError(std::string(name) + " has " + std::to_string(box.size()) +
                     " intervals, expected " + std::to_string(dim));
  }
  for (const auto& iv : box) {
    if (std::isnan(iv.lo) || std::isnan(iv.hi) || iv.lo > iv.hi) {
      throw InputError(std::string(name) + " contains an empty or NaN interval");
    }
  }
  return box;
}

}  // namespace

Box unbounded_box(Eigen::Index dim) { return Box(static_cast<std::size_t>(dim)); }

StateSpaceModel::StateSpaceModel(Matrix a, Matrix b, std::optional<Matrix> c, Box state_bounds,
                                 Box input_bounds)
    : a_(std::move(a)), b_(std::move(b)) {
  if (a_.rows() != a_.cols()) throw InputError("A must be square, got " + shape(a_));
  if (a_.rows() == 0) throw InputError("state dimension must be at least 1");
  if (b_.rows() != a_.rows()) {
    throw InputError("B has " + std::to_string(b_.rows()) + " rows, expected " +
                     std::to_string(a_.rows()));
  }
  c_ = c ? std::move(*c) : Matrix::Identity(a_.rows(), a_.rows());
  if (c_.cols() != a_.rows()) {
    throw InputError("C has " + std::to_string(c_.cols()) + " columns, expected " +
                     std::to_string(a_.rows()));
  }
  require_finite(a_, "A");
  require_finite(b_, "B");
  require_finite(c_, "C");
  state_bounds_ = checked_box(std::move(state_bounds), a_.rows(), "state bounds");
  input_bounds_ = checked_box(std::move(input_bounds), b_.cols(), "input bounds");
}

bool StateSpaceModel::operator==(const StateSpaceModel& other) const {
  return a_.rows() == other.a_.rows() && b_.cols() == other.b_.cols() &&
         c_.rows() == other.c_.rows() && a_ == other.a_ && b_ == other.b_ && c_ == other.c_ &&
         state_bounds_ == other.state_bounds_ && input_bounds_ == other.input_bounds_;
}

StepResult step(const StateSpaceModel& model, const Vector& x, const Vector& u) {
  if (x.size() != model.states()) {
    throw InputError("state has length " + std::to_string(x.size()) + ", expected " +
                     std::to_string(model.states()));
  }
  if (u.size() != model.inputs()) {
    throw InputError("input has length " + std::to_string(u.size()) + ", expected " +
                     std::to_string(model.inputs()));
  }
  require_finite(x, "state");
  require_finite(u, "input");
  for (Eigen::Index j = 0; j < u.size(); ++j) {
    if (!model.input_bounds()[j].contains(u[j])) {
      throw InputError("input component " + std::to_string(j) + " lies outside its bounds");
    }
  }

  StepResult out{model.a() * x + model.b() * u, false};
  for (Eigen::Index i = 0; i < out.state.size(); ++i) {
    const auto& iv = model.state_bounds()[i];
    const double v = std::clamp(out.state[i], iv.lo, iv.hi);
    if (v != out.state[i]) {
      out.state[i] = v;
      out.clamped = true;
    }
  }
  return out;
}

double spectral_radius(const Matrix& a) {
  if (a.rows() != a.cols()) throw InputError("spectral radius needs a square matrix, got " + shape(a));
  require_finite(a, "matrix");
  if (a.size() == 0) return 0.0;

  // Eigen reduces to Hessenberg form and runs shifted QR; deterministic.
  Eigen::EigenSolver<Matrix> solver(a, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) throw InputError("eigenvalue iteration did not converge");
  const auto& eig = solver.eigenvalues();
  const Eigen::Index n = eig.size();

  // A defective eigenvalue of multiplicity k is only resolved to about
  // eps^(1/k), but the mean of its perturbed cluster is accurate to eps.
  // Single-linkage clusters within a relative 1e-6 ball are replaced by
  // their centroid before taking moduli.
  double scale = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) scale = std::max(scale, std::abs(eig[i]));
  const double tol = 1e-6 * std::max(scale, 1.0);

  std::vector<Eigen::Index> cluster(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) cluster[i] = i;
  bool merged = true;
  while (merged) {
    merged = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) {
        if (cluster[i] != cluster[j] && std::abs(eig[i] - eig[j]) <= tol) {
          const auto from = std::max(cluster[i], cluster[j]);
          const auto to = std::min(cluster[i], cluster[j]);
          for (auto& c : cluster) {
            if (c == from) c = to;
          }
          merged = true;
        }
      }
    }
  }

  double radius = 0.0;
  for (Eigen::Index root = 0; root < n; ++root) {
    std::complex<double> sum{0.0, 0.0};
    int count = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (cluster[i] == root) {
        sum += eig[i];
        ++count;
      }
    }
    if (count > 0) radius = std::max(radius, std::abs(sum / static_cast<double>(count)));
  }
  return radius;
}

bool is_stable(const Matrix& a) { return spectral_radius(a) < 1.0; }

Eigen::Index numerical_rank(const Matrix& m) {
  if (m.size() == 0) return 0;
  require_finite(m, "matrix");
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  const double sigma_max = sv.size() > 0 ? sv[0] : 0.0;
  if (sigma_max == 0.0) return 0;
  const double cutoff = static_cast<double>(std::min(m.rows(), m.cols())) * sigma_max * 1e-12;
  return (sv.array() > cutoff).count();
}

Matrix controllability_matrix(const StateSpaceModel& model) {
  const auto n = model.states();
  const auto m = model.inputs();
  Matrix out(n, n * m);
  Matrix block = model.b();
  for (Eigen::Index k = 0; k < n; ++k) {
    out.middleCols(k * m, m) = block;
    block = model.a() * block;
  }
  return out;
}

bool is_controllable(const StateSpaceModel& model) {
  return numerical_rank(controllability_matrix(model)) == model.states();
}

Matrix observability_matrix(const StateSpaceModel& model) {
  const auto n = model.states();
  const auto p = model.outputs();
  Matrix out(p * n, n);
  Matrix block = model.c();
  for (Eigen::Index k = 0; k < n; ++k) {
    out.middleRows(k * p, p) = block;
    block = block * model.a();
  }
  return out;
}

bool is_observable(const StateSpaceModel& model) {
  return numerical_rank(observability_matrix(model)) == model.states();
}

void Trajectory::validate() const {
  if (states.empty()) throw InputError("trajectory has no states");
  if (inputs.size() + 1 != states.size()) {
    throw InputError("trajectory has " + std::to_string(states.size()) + " states but " +
                     std::to_string(inputs.size()) + " inputs; expected one fewer input");
  }
  const auto n = states.front().size();
  if (n == 0) throw InputError("trajectory states are empty vectors");
  for (const auto& x : states) {
    if (x.size() != n) throw InputError("trajectory states have inconsistent dimensions");
    require_finite(x, "trajectory state");
  }
  if (!inputs.empty()) {
    const auto m = inputs.front().size();
    for (const auto& u : inputs) {
      if (u.size() != m) throw InputError("trajectory inputs have inconsistent dimensions");
      require_finite(u, "trajectory input");
    }
  }
}

Identified identify(const Trajectory& trajectory) {
  trajectory.validate();
  const auto n = trajectory.states.front().size();
  const auto m = trajectory.inputs.empty() ? Eigen::Index{0} : trajectory.inputs.front().size();
  const auto samples = static_cast<Eigen::Index>(trajectory.inputs.size());
  if (samples < n + m) {
    throw IdentificationError(IdentificationError::Kind::InsufficientSamples,
                              "insufficient samples: " + std::to_string(samples) +
                                  " transitions for " + std::to_string(n + m) + " unknowns per row");
  }

  // Rows of the regression: [x(t)' u(t)'] * [A B]' = x(t+1)'.
  Matrix regressors(samples, n + m);
  Matrix targets(samples, n);
  for (Eigen::Index t = 0; t < samples; ++t) {
    regressors.row(t).head(n) = trajectory.states[t].transpose();
    if (m > 0) regressors.row(t).tail(m) = trajectory.inputs[t].transpose();
    targets.row(t) = trajectory.states[t + 1].transpose();
  }

  if (numerical_rank(regressors) < n + m) {
    throw IdentificationError(IdentificationError::Kind::Unidentifiable,
                              "unidentifiable: state/input regressors are rank deficient");
  }

  const Eigen::ColPivHouseholderQR<Matrix> qr(regressors);
  const Matrix theta = qr.solve(targets);  // (n + m) x n

  Identified out;
  out.a = theta.topRows(n).transpose();
  out.b = theta.bottomRows(m).transpose();
  const Matrix residual = targets - regressors * theta;
  out.rms_residual = std::sqrt(residual.squaredNorm() / static_cast<double>(samples));
  return out;
}

}  // namespace qosctl::statespace
