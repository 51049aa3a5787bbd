#include "sweep/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace sweep {

namespace {

BoundCheck finish(BoundCheck c) {
  c.pass = c.recompute();
  return c;
}

double inverse_radius(double r) { return std::isinf(r) ? 0.0 : 1.0 / r; }

double constant_or_default(const Trajectory& traj, const CheckOptions& opts) {
  return opts.constant ? *opts.constant : default_check_constant(traj);
}

void require_gradient_of(const Trajectory& traj, const Potential& p, const char* what) {
  const Potential* own = traj.field.potential();
  if (own == nullptr || !(*own == p)) {
    throw Error(ErrorCode::WrongFieldKind,
                std::string(what) + " needs a trajectory of the field -grad V for this potential");
  }
}

// Index with the largest excess of measured over the allowance; all k pass
// exactly when this one does.
struct Worst {
  double measured = 0.0;
  double bound = 0.0;
  double excess = -kInfinity;
};

void track(Worst& w, double measured, double bound, const CheckOptions& opts) {
  const double excess = measured - (bound * (1.0 + opts.slack) + opts.abs_tol);
  if (excess > w.excess) w = {measured, bound, excess};
}

std::vector<double> field_norms(const Trajectory& traj) {
  std::vector<double> out;
  out.reserve(traj.size());
  for (const auto& x : traj.states) out.push_back(eval_field(traj.field, x).norm());
  return out;
}

}  // namespace

bool VerificationReport::overall_pass() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const BoundCheck& c) { return c.informational || c.pass; });
}

double default_check_constant(const Trajectory& traj) {
  double m = 0.0;
  for (double f : field_norms(traj)) m = std::max(m, f);
  return 10.0 * (1.0 + traj.field.lipschitz_k()) * (1.0 + m);
}

std::vector<double> cumulative_trapezoid(std::span<const double> values, std::span<const double> grid) {
  if (values.size() != grid.size() || grid.empty()) {
    throw Error(ErrorCode::GridMismatch, "values and grid must have equal nonzero length");
  }
  std::vector<double> out(grid.size(), 0.0);
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double dt = grid[k] - grid[k - 1];
    if (!(dt > 0.0)) throw Error(ErrorCode::GridMismatch, "grid must be strictly increasing");
    out[k] = out[k - 1] + 0.5 * dt * (values[k] + values[k - 1]);
  }
  return out;
}

std::vector<double> gronwall_bound(std::span<const double> a, std::span<const double> b, double alpha,
                                   double w0, std::span<const double> grid) {
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::InvalidAlpha, "alpha must lie in [0, 1), got " + std::to_string(alpha));
  }
  if (a.size() != grid.size() || b.size() != grid.size()) {
    throw Error(ErrorCode::GridMismatch, "a, b and grid must have equal length");
  }
  for (std::size_t k = 0; k < b.size(); ++k) {
    if (b[k] < 0.0) {
      throw Error(ErrorCode::NegativeB, "b(t) < 0 at grid index " + std::to_string(k));
    }
  }
  if (!(w0 >= 0.0)) throw Error(ErrorCode::InvalidArgument, "w0 must be nonnegative");

  // R(t) = exp(A(t)) * (w0^{1-alpha} + int_0^t exp(-A(s)) b(s) ds)
  const std::vector<double> big_a = cumulative_trapezoid(a, grid);
  std::vector<double> weighted(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) weighted[k] = std::exp(-big_a[k]) * b[k];
  const std::vector<double> source = cumulative_trapezoid(weighted, grid);

  const double start = std::pow(w0, 1.0 - alpha);
  std::vector<double> out(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) out[k] = std::exp(big_a[k]) * (start + source[k]);
  return out;
}

bool active_set_changed(const std::vector<int>& before, const std::vector<int>& after) {
  return before != after;
}

std::vector<std::size_t> active_set_events(const Trajectory& traj) {
  std::vector<std::size_t> events;
  for (std::size_t k = 0; k + 1 < traj.active_sets.size(); ++k) {
    if (active_set_changed(traj.active_sets[k], traj.active_sets[k + 1])) events.push_back(k);
  }
  return events;
}

BoundCheck check_velocity_field_bound(const Trajectory& traj, const CheckOptions& opts) {
  // |x' - f(x)| <= |f(x)|; the O(h) allowance sits in abs_tol since bound = 0.
  BoundCheck c{.name = "velocity_field_bound", .slack = opts.slack};
  c.abs_tol = opts.abs_tol + opts.slack * traj.step_size;
  c.measured = -kInfinity;
  for (std::size_t k = 0; k < traj.discrete_velocities.size(); ++k) {
    const Vector fx = eval_field(traj.field, traj.states[k]);
    c.measured = std::max(c.measured, (traj.discrete_velocities[k] - fx).norm() - fx.norm());
  }
  if (traj.discrete_velocities.empty()) c.measured = 0.0;
  return finish(std::move(c));
}

BoundCheck check_two_solution_bound(const Trajectory& x, const Trajectory& y, double r,
                                    const CheckOptions& opts) {
  if (x.times != y.times || !(x.set == y.set) || !(x.field == y.field)) {
    throw Error(ErrorCode::GridMismatch, "trajectories must share set, field and grid");
  }
  const std::vector<double> fx = field_norms(x);
  const std::vector<double> fy = field_norms(y);
  std::vector<double> rate(x.size());
  const double inv_r = inverse_radius(r);
  for (std::size_t k = 0; k < rate.size(); ++k) {
    rate[k] = x.field.lipschitz_k() + inv_r * (fx[k] + fy[k]);
  }
  const std::vector<double> zero(x.size(), 0.0);
  const std::vector<double> bound =
      gronwall_bound(rate, zero, 0.0, (x.states.front() - y.states.front()).norm(), x.times);

  Worst worst;
  for (std::size_t k = 0; k < x.size(); ++k) {
    track(worst, (x.states[k] - y.states[k]).norm(), bound[k], opts);
  }
  return finish({.name = "two_solution_bound",
                 .measured = worst.measured,
                 .bound = worst.bound,
                 .slack = opts.slack,
                 .abs_tol = opts.abs_tol});
}

BoundCheck check_velocity_decay_bound(const Trajectory& traj, double r, const CheckOptions& opts) {
  const std::vector<double> f = field_norms(traj);
  std::vector<double> rate(traj.size());
  const double inv_r = inverse_radius(r);
  for (std::size_t k = 0; k < rate.size(); ++k) {
    rate[k] = traj.field.lipschitz_k() + 2.0 * inv_r * f[k];
  }
  const std::vector<double> zero(traj.size(), 0.0);
  const std::vector<double> bound =
      gronwall_bound(rate, zero, 0.0, traj.right_velocities.front().norm(), traj.times);

  Worst worst;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    track(worst, traj.right_velocities[k].norm(), bound[k], opts);
  }
  return finish({.name = "velocity_decay_bound",
                 .measured = worst.measured,
                 .bound = worst.bound,
                 .slack = opts.slack,
                 .abs_tol = opts.abs_tol});
}

BoundCheck check_right_derivative(const Trajectory& traj, const ProxSet& set, const Field& field,
                                  double t, const CheckOptions& opts) {
  const auto it = std::lower_bound(traj.times.begin(), traj.times.end(),
                                   t - 1e-9 * traj.step_size);
  if (it == traj.times.end() || std::abs(*it - t) > 1e-9 * traj.step_size) {
    throw Error(ErrorCode::OffGrid, "t = " + std::to_string(t) + " is not a grid time");
  }
  const auto i = static_cast<std::size_t>(it - traj.times.begin());
  if (i + 8 >= traj.size()) {
    throw Error(ErrorCode::OffGrid, "t + 8h lies beyond the trajectory horizon");
  }
  const Vector x = project(set, traj.states[i]);
  const Vector v = right_velocity(set, field, x);

  double quotients[3];
  const std::size_t offsets[3] = {8, 4, 2};
  for (int j = 0; j < 3; ++j) {
    const double delta = static_cast<double>(offsets[j]) * traj.step_size;
    quotients[j] = ((traj.states[i + offsets[j]] - traj.states[i]) / delta - v).norm();
  }
  BoundCheck c{.name = "right_derivative",
               .measured = quotients[2],
               .bound = constant_or_default(traj, opts) * 2.0 * traj.step_size,
               .slack = opts.slack,
               .abs_tol = opts.abs_tol};
  c.side_condition = quotients[1] <= quotients[0] + opts.abs_tol &&
                     quotients[2] <= quotients[1] + opts.abs_tol;
  if (!c.side_condition) c.note = "difference quotient does not decrease as delta shrinks";
  return finish(std::move(c));
}

BoundCheck check_right_continuity_v(const Trajectory& traj, const CheckOptions& opts) {
  BoundCheck c{.name = "right_continuity_v",
               .bound = constant_or_default(traj, opts) * traj.step_size,
               .slack = opts.slack,
               .abs_tol = opts.abs_tol};
  c.events = active_set_events(traj);
  const std::size_t halo = opts.event_halo;
  std::vector<bool> excluded(traj.size(), false);
  for (std::size_t e : c.events) {
    const std::size_t lo = e >= halo ? e - halo : 0;
    for (std::size_t k = lo; k <= std::min(e + halo, traj.size() - 1); ++k) excluded[k] = true;
  }
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
    if (excluded[k]) continue;
    c.measured =
        std::max(c.measured, (traj.right_velocities[k + 1] - traj.right_velocities[k]).norm());
  }
  return finish(std::move(c));
}

BoundCheck check_liminf_lower(const Trajectory& traj, const CheckOptions& opts) {
  const std::size_t window = std::min(opts.window, traj.size() - 1);
  const double v0 = traj.right_velocities.front().norm();
  double lowest = v0;
  for (std::size_t k = 1; k <= window; ++k) lowest = std::min(lowest, traj.right_velocities[k].norm());
  return finish({.name = "liminf_lower",
                 .measured = v0 - lowest,
                 .bound = constant_or_default(traj, opts) * static_cast<double>(window) * traj.step_size,
                 .slack = opts.slack,
                 .abs_tol = opts.abs_tol});
}

BoundCheck check_difference_quotient_limsup(const Trajectory& traj, const CheckOptions& opts) {
  const std::size_t window = std::min(opts.window, traj.size() - 1);
  double worst = 0.0;
  for (std::size_t m = 1; m <= window; m *= 2) {
    const double delta = static_cast<double>(m) * traj.step_size;
    worst = std::max(worst, (traj.states[m] - traj.states.front()).norm() / delta);
  }
  return finish({.name = "difference_quotient_limsup",
                 .measured = worst,
                 .bound = traj.right_velocities.front().norm(),
                 .slack = opts.slack,
                 .abs_tol = opts.abs_tol});
}

BoundCheck energy_identity_residual(const Trajectory& traj, const Potential& p, const CheckOptions& opts) {
  require_gradient_of(traj, p, "energy_identity_residual");
  BoundCheck c{.name = "energy_identity",
               .bound = constant_or_default(traj, opts) * traj.step_size,
               .slack = opts.slack,
               .abs_tol = opts.abs_tol};
  c.events = active_set_events(traj);
  const std::set<std::size_t> skip(c.events.begin(), c.events.end());
  const double h = traj.step_size;
  double v_prev = potential_value(p, traj.states.front());
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
    const double v_next = potential_value(p, traj.states[k + 1]);
    if (v_next > v_prev + 1e-9 * (1.0 + std::abs(v_prev))) {
      c.side_condition = false;
      c.note = "V increased at step " + std::to_string(k);
    }
    if (!skip.count(k)) {
      const double residual =
          std::abs((v_next - v_prev) / h + traj.right_velocities[k].squaredNorm());
      c.measured = std::max(c.measured, residual);
    }
    v_prev = v_next;
  }
  return finish(std::move(c));
}

double dissipated_energy(const Trajectory& traj) {
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
    total += traj.right_velocities[k].squaredNorm() * (traj.times[k + 1] - traj.times[k]);
  }
  return total;
}

BoundCheck dissipation_integral(const Trajectory& traj, const Potential& p, const CheckOptions& opts) {
  require_gradient_of(traj, p, "dissipation_integral");
  const double v_end = traj.right_velocities.back().norm();
  if (v_end > opts.stop_tol) {
    throw Error(ErrorCode::NotConverged, "|v(T)| = " + std::to_string(v_end) +
                                             " exceeds the stop tolerance " +
                                             std::to_string(opts.stop_tol));
  }
  const double drop = potential_value(p, traj.states.front()) - potential_value(p, traj.states.back());
  const double span = traj.times.back() - traj.times.front();
  BoundCheck c{.name = "dissipation_integral",
               .measured = std::abs(dissipated_energy(traj) - drop),
               .bound = constant_or_default(traj, opts) * traj.step_size * span,
               .slack = opts.slack,
               .abs_tol = opts.abs_tol};
  return finish(std::move(c));
}

BoundCheck convex_minimization_check(const Trajectory& traj, const Potential& p, const ProxSet& set,
                                     std::span<const Vector> y_samples, const CheckOptions& opts) {
  if (!p.convex()) throw Error(ErrorCode::NotConvex, "potential is not convex");
  require_gradient_of(traj, p, "convex_minimization_check");
  if (y_samples.empty()) throw Error(ErrorCode::InvalidArgument, "need at least one sample of C");

  const Vector* best = nullptr;
  double best_value = kInfinity;
  for (const auto& y : y_samples) {
    if (!contains(set, y)) {
      throw Error(ErrorCode::NotInSet, "sample " + format_vector(y) + " is not in the set");
    }
    const double v = potential_value(p, y);
    if (v < best_value) {
      best_value = v;
      best = &y;
    }
  }
  const double v_end = potential_value(p, traj.states.back());
  const double span = traj.times.back() - traj.times.front();
  // V(x(t)) <= V(y) + |x0 - y|^2 / (2t)
  BoundCheck c{.name = "convex_minimization",
               .measured = v_end - best_value,
               .bound = 0.5 * (traj.states.front() - *best).squaredNorm() / span,
               .slack = opts.slack,
               .abs_tol = opts.slack * (1.0 + std::abs(v_end))};
  if (!set.is_convex()) {
    c.informational = true;
    c.note = "set is not convex; the flow may settle in a component-local minimum";
  }
  return finish(std::move(c));
}

}  // namespace sweep
