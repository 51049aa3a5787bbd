#include "sweep/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace sweep {

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// Grid points per axis for the coarse speed probe.
int probe_resolution(Eigen::Index dim) {
  if (dim > 6) return 2;
  const int p = static_cast<int>(std::floor(std::pow(4096.0, 1.0 / static_cast<double>(dim)) + 1e-9));
  return std::clamp(p, 2, 9);
}

}  // namespace

double reachable_speed_bound(const Field& field, const Vector& x0, double horizon) {
  const double f0 = eval_field(field, x0).norm();
  const double radius = horizon * f0 * std::exp(field.lipschitz_k() * horizon);
  if (!std::isfinite(radius)) return kInfinity;
  if (radius == 0.0) return f0;

  const auto n = x0.size();
  const int per_axis = probe_resolution(n);
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  Vector p(n);
  double sup = f0;
  while (true) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double frac = static_cast<double>(idx[static_cast<std::size_t>(i)]) / (per_axis - 1);
      p[i] = x0[i] - radius + 2.0 * radius * frac;
    }
    sup = std::max(sup, eval_field(field, p).norm());
    std::size_t axis = 0;
    while (axis < idx.size() && ++idx[axis] == per_axis) idx[axis++] = 0;
    if (axis == idx.size()) break;
  }
  return sup;
}

Scenario Scenario::create(ProxSet set, Field field, Vector x0, double horizon, double step) {
  if (field.dim() != set.dim()) {
    throw Error(ErrorCode::ValidationError, "field: dimension " + std::to_string(field.dim()) +
                                                " does not match set dimension " +
                                                std::to_string(set.dim()));
  }
  if (x0.size() != set.dim() || !x0.allFinite()) {
    throw Error(ErrorCode::ValidationError, "x0: must be a finite vector of dimension " +
                                                std::to_string(set.dim()));
  }
  if (!contains(set, x0)) {
    throw Error(ErrorCode::ValidationError, "x0 not in C: d(x0, C) = " + num(distance(set, x0)));
  }
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw Error(ErrorCode::ValidationError, "T: horizon must be positive and finite");
  }
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw Error(ErrorCode::ValidationError, "h: step must be positive and finite");
  }
  const double ratio = horizon / step;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(rounded * step - horizon) > 1e-9 * horizon) {
    throw Error(ErrorCode::ValidationError, "h: T/h = " + num(ratio) + " is not an integer");
  }
  const double speed = reachable_speed_bound(field, x0, horizon);
  if (!std::isinf(set.prox_r()) && !(step * speed < kStepSafety * set.prox_r())) {
    throw Error(ErrorCode::ValidationError,
                "h: step-safety violated, h * M = " + num(step) + " * " + num(speed) + " = " +
                    num(step * speed) + " is not below " + num(kStepSafety) + " * prox_r = " +
                    num(kStepSafety * set.prox_r()) + " (h = " + num(step) + ", M = " + num(speed) +
                    ", prox_r = " + num(set.prox_r()) + ")");
  }
  const auto n = static_cast<std::size_t>(rounded);
  return Scenario(std::move(set), std::move(field), std::move(x0), horizon, step, n, speed);
}

bool operator==(const Scenario& a, const Scenario& b) {
  return a.set_ == b.set_ && a.field_ == b.field_ && a.x0_.size() == b.x0_.size() &&
         (a.x0_.array() == b.x0_.array()).all() && a.horizon_ == b.horizon_ && a.step_ == b.step_;
}

Vector step(const ProxSet& set, const Field& field, const Vector& x, double h) {
  if (!contains(set, x)) {
    throw Error(ErrorCode::NotInSet, "step from " + format_vector(x) + " outside the set");
  }
  const Vector fx = eval_field(field, x);
  if (!std::isinf(set.prox_r()) && !(h * fx.norm() < set.prox_r())) {
    throw Error(ErrorCode::StepTooLarge, "h |f(x)| = " + num(h * fx.norm()) +
                                             " is not below prox_r = " + num(set.prox_r()));
  }
  return project(set, x + h * fx);
}

Vector right_velocity(const ProxSet& set, const Field& field, const Vector& x) {
  return minimal_norm_velocity(set, x, eval_field(field, x));
}

Trajectory integrate_from(const ProxSet& set, const Field& field, const Vector& x0, double t0,
                          double h, std::size_t num_steps) {
  Trajectory traj{set, field, h, {}, {}, {}, {}, {}};
  traj.times.reserve(num_steps + 1);
  traj.states.reserve(num_steps + 1);
  traj.states.push_back(x0);
  for (std::size_t k = 0; k < num_steps; ++k) {
    try {
      traj.states.push_back(step(set, field, traj.states.back(), h));
    } catch (const Error& e) {
      throw Error(ErrorCode::IntegrationFailure, "step " + std::to_string(k) + " from state " +
                                                     format_vector(traj.states.back()) + ": " +
                                                     e.what());
    }
  }
  for (std::size_t k = 0; k <= num_steps; ++k) {
    traj.times.push_back(t0 + static_cast<double>(k) * h);
  }

  traj.discrete_velocities.reserve(num_steps);
  for (std::size_t k = 0; k < num_steps; ++k) {
    traj.discrete_velocities.push_back((traj.states[k + 1] - traj.states[k]) / h);
  }

  traj.right_velocities.reserve(num_steps + 1);
  traj.active_sets.reserve(num_steps + 1);
  for (std::size_t k = 0; k <= num_steps; ++k) {
    try {
      // Evaluated at the snapped state: the cone needs exact membership.
      const Vector x = project(set, traj.states[k]);
      const ConeRep cone = normal_cone(set, x);
      const Vector fx = eval_field(field, x);
      traj.right_velocities.push_back(fx - project_onto_cone(cone, fx));
      traj.active_sets.push_back(active_constraints(set, x));
    } catch (const Error& e) {
      throw Error(ErrorCode::IntegrationFailure, "velocity at index " + std::to_string(k) +
                                                     ", state " + format_vector(traj.states[k]) +
                                                     ": " + e.what());
    }
  }
  return traj;
}

Trajectory integrate(const Scenario& scenario) {
  return integrate_from(scenario.set(), scenario.field(), scenario.x0(), 0.0, scenario.step(),
                        scenario.num_steps());
}

Refinement refine(const Scenario& scenario, int levels) {
  if (levels < 3) {
    throw Error(ErrorCode::InvalidArgument, "refine needs at least 3 levels to estimate an order");
  }
  std::vector<double> discrepancies;
  Trajectory coarse = integrate(scenario);
  double h = scenario.step();
  for (int level = 1; level < levels; ++level) {
    h *= 0.5;
    Trajectory fine = integrate(scenario.with_step(h));
    discrepancies.push_back((fine.states.back() - coarse.states.back()).norm());
    coarse = std::move(fine);
  }
  Refinement out{std::move(coarse), std::move(discrepancies), 0.0};

  const double e1 = out.discrepancies[out.discrepancies.size() - 2];
  const double e2 = out.discrepancies.back();
  const double floor = 1e-14 * (1.0 + out.reference.states.back().norm());
  if (e1 <= floor && e2 <= floor) {
    out.observed_order = std::numeric_limits<double>::quiet_NaN();
  } else if (e2 <= floor) {
    out.observed_order = kInfinity;
  } else {
    out.observed_order = std::log2(e1 / e2);
  }
  return out;
}

}  // namespace sweep
