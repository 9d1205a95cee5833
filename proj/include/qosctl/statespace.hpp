#pragma once

// Discrete-time linear plant x(t+1) = A x(t) + B u(t), y = C x, with
// box constraints on states and inputs, plus the classical analyses:
// stability (spectral radius), controllability, observability, and
// least-squares identification from recorded trajectories.

#include <Eigen/Dense>

#include <limits>
#include <optional>
#include <vector>

namespace qosctl::statespace {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  bool contains(double v) const { return v >= lo && v <= hi; }
  bool operator==(const Interval&) const = default;
};

/// Axis-aligned box; one interval per dimension.
using Box = std::vector<Interval>;

Box unbounded_box(Eigen::Index dim);

class StateSpaceModel {
 public:
  /// `c` defaults to the n x n identity; empty boxes mean unbounded.
  /// Throws InputError on inconsistent shapes, non-finite entries or
  /// inverted bounds.
  StateSpaceModel(Matrix a, Matrix b, std::optional<Matrix> c = std::nullopt,
                  Box state_bounds = {}, Box input_bounds = {});

  const Matrix& a() const { return a_; }
  const Matrix& b() const { return b_; }
  const Matrix& c() const { return c_; }
  const Box& state_bounds() const { return state_bounds_; }
  const Box& input_bounds() const { return input_bounds_; }

  Eigen::Index states() const { return a_.rows(); }
  Eigen::Index inputs() const { return b_.cols(); }
  Eigen::Index outputs() const { return c_.rows(); }

  bool operator==(const StateSpaceModel& other) const;

 private:
  Matrix a_;
  Matrix b_;
  Matrix c_;
  Box state_bounds_;
  Box input_bounds_;
};

struct StepResult {
  Vector state;
  bool clamped = false;
};

/// One transition. The raw successor is clamped into the state box; the
/// input must already lie inside the input box.
StepResult step(const StateSpaceModel& model, const Vector& x, const Vector& u);

/// Largest eigenvalue modulus of a square matrix.
double spectral_radius(const Matrix& a);
bool is_stable(const Matrix& a);

/// Rank via singular values with cutoff n * sigma_max * 1e-12, where n is
/// the smaller matrix dimension (the state dimension for both the
/// controllability and observability matrices).
Eigen::Index numerical_rank(const Matrix& m);

/// [B | AB | ... | A^(n-1) B], n x (n m).
Matrix controllability_matrix(const StateSpaceModel& model);
bool is_controllable(const StateSpaceModel& model);

/// [C; CA; ...; C A^(n-1)], (p n) x n.
Matrix observability_matrix(const StateSpaceModel& model);
bool is_observable(const StateSpaceModel& model);

/// Recorded run of the plant; inputs[t] drives states[t] -> states[t + 1].
struct Trajectory {
  std::vector<Vector> states;
  std::vector<Vector> inputs;

  /// Throws InputError unless inputs.size() == states.size() - 1 and all
  /// vectors share dimensions and are finite.
  void validate() const;
};

struct Identified {
  Matrix a;
  Matrix b;
  /// sqrt(mean over transitions of |x(t+1) - A x(t) - B u(t)|^2)
  double rms_residual = 0.0;
};

/// Least-squares fit of A, B. Throws IdentificationError when there are
/// fewer than n + m transitions or the regressors are rank deficient.
Identified identify(const Trajectory& trajectory);

}  // namespace qosctl::statespace
