#pragma once

#include <cstddef>
#include <vector>

#include "sweep/fields.hpp"
#include "sweep/proxsets.hpp"

namespace sweep {

/// Step-safety factor: h * M must stay below this fraction of prox_r.
inline constexpr double kStepSafety = 0.5;

/// A validated initial-value problem x' in f(x) - N_C(x), x(0) = x0.
class Scenario {
 public:
  /// Validates x0 in C, positive T and h, an integer step count T/h and the
  /// step-safety inequality h * M < 0.5 * prox_r. Throws ValidationError
  /// naming the offending field.
  static Scenario create(ProxSet set, Field field, Vector x0, double horizon, double step);

  const ProxSet& set() const noexcept { return set_; }
  const Field& field() const noexcept { return field_; }
  const Vector& x0() const noexcept { return x0_; }
  double horizon() const noexcept { return horizon_; }
  double step() const noexcept { return step_; }
  std::size_t num_steps() const noexcept { return num_steps_; }
  /// sup |f| over the a-priori reachable box used by the step-safety check.
  double speed_bound() const noexcept { return speed_bound_; }

  Scenario with_step(double step) const { return create(set_, field_, x0_, horizon_, step); }
  Scenario with_horizon(double horizon) const { return create(set_, field_, x0_, horizon, step_); }
  Scenario with_x0(Vector x0) const { return create(set_, field_, std::move(x0), horizon_, step_); }

  friend bool operator==(const Scenario& a, const Scenario& b);

 private:
  Scenario(ProxSet set, Field field, Vector x0, double horizon, double step, std::size_t n, double m)
      : set_(std::move(set)), field_(std::move(field)), x0_(std::move(x0)), horizon_(horizon),
        step_(step), num_steps_(n), speed_bound_(m) {}

  ProxSet set_;
  Field field_;
  Vector x0_;
  double horizon_;
  double step_;
  std::size_t num_steps_;
  double speed_bound_;
};

/// sup of |f| over the box around x0 of half-width T |f(x0)| e^{kT}.
double reachable_speed_bound(const Field& field, const Vector& x0, double horizon);

/// Discrete trajectory of the catching-up scheme on a uniform grid.
struct Trajectory {
  ProxSet set;
  Field field;
  double step_size = 0.0;
  std::vector<double> times;
  std::vector<Vector> states;
  /// (x_{k+1} - x_k) / h, one fewer entry than states.
  std::vector<Vector> discrete_velocities;
  /// Minimal-norm element of f(x_k) - N_C(x_k).
  std::vector<Vector> right_velocities;
  /// Active constraint identifiers at each state.
  std::vector<std::vector<int>> active_sets;

  std::size_t size() const noexcept { return states.size(); }
};

/// One catching-up step: proj(C, x + h f(x)).
Vector step(const ProxSet& set, const Field& field, const Vector& x, double h);

/// Minimal-norm velocity at x; equals the right derivative of the exact flow.
Vector right_velocity(const ProxSet& set, const Field& field, const Vector& x);

/// Runs the scheme for T/h steps. Throws IntegrationFailure naming the
/// failing step index and state.
Trajectory integrate(const Scenario& scenario);

/// Continues from a starting state for a given number of steps on the same
/// grid spacing (times start at t0).
Trajectory integrate_from(const ProxSet& set, const Field& field, const Vector& x0, double t0,
                          double h, std::size_t num_steps);

struct Refinement {
  Trajectory reference;
  /// Endpoint discrepancies between consecutive levels.
  std::vector<double> discrepancies;
  /// log2(e_{L-2} / e_{L-1}) from the last two discrepancies; NaN when both
  /// vanish (levels agree to rounding).
  double observed_order = 0.0;
};

/// Integrates at h, h/2, ..., h/2^(levels-1). Requires levels >= 3.
Refinement refine(const Scenario& scenario, int levels);

}  // namespace sweep
