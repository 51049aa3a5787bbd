#include "sweep/prox_regularity.hpp"

#include <algorithm>
#include <cmath>

namespace sweep {

namespace {

double half_inverse_radius(const ProxSet& set) {
  return std::isinf(set.prox_r()) ? 0.0 : 0.5 / set.prox_r();
}

void require_member(const ProxSet& set, const Vector& x, const char* what) {
  if (!contains(set, x)) {
    throw Error(ErrorCode::NotInSet, std::string(what) + " " + format_vector(x) + " is not in the set");
  }
}

Vector uniform_in(const SampleBox& box, std::mt19937_64& rng) {
  Vector s(box.lower.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    std::uniform_real_distribution<double> u(box.lower[i], box.upper[i]);
    s[i] = u(rng);
  }
  return s;
}

void include(SampleBox& box, const Vector& lo, const Vector& hi) {
  if (box.lower.size() == 0) {
    box.lower = lo;
    box.upper = hi;
    return;
  }
  box.lower = box.lower.cwiseMin(lo);
  box.upper = box.upper.cwiseMax(hi);
}

void extend_box(const ProxSet& set, SampleBox& box) {
  const auto n = set.dim();
  const Vector ones = Vector::Ones(n);
  if (const auto* b = set.as<Box>()) {
    Vector lo = b->lower, hi = b->upper;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::isinf(lo[i])) lo[i] = std::isinf(hi[i]) ? -3.0 : hi[i] - 3.0;
      if (std::isinf(hi[i])) hi[i] = lo[i] + 3.0;
    }
    include(box, lo - ones, hi + ones);
  } else if (const auto* b = set.as<Ball>()) {
    include(box, b->center - (b->radius + 1.0) * ones, b->center + (b->radius + 1.0) * ones);
  } else if (const auto* b = set.as<BallComplement>()) {
    include(box, b->center - 2.0 * b->radius * ones, b->center + 2.0 * b->radius * ones);
  } else if (const auto* h = set.as<HalfSpace>()) {
    const Vector anchor = h->offset * h->normal;
    include(box, anchor - 3.0 * ones, anchor + 3.0 * ones);
  } else if (const auto* p = set.as<Polytope>()) {
    for (const auto& f : p->faces) {
      const Vector anchor = f.offset * f.normal;
      include(box, anchor - 2.0 * ones, anchor + 2.0 * ones);
    }
  } else if (const auto* u = set.as<DisjointConvexUnion>()) {
    for (const auto& m : u->members) extend_box(m, box);
  } else {
    include(box, -3.0 * ones, 3.0 * ones);
  }
}

}  // namespace

bool verify_projection_identity(const ProxSet& set, const Vector& x, const Vector& xi,
                                double check_tol) {
  require_dim(xi, set.dim(), "verify_projection_identity");
  require_member(set, x, "x");
  const Vector p = project(set, x + xi);
  return (p - x).norm() <= check_tol;
}

double prox_inequality_residual(const ProxSet& set, const Vector& x, const Vector& xi,
                                std::span<const Vector> samples) {
  require_dim(xi, set.dim(), "prox_inequality_residual");
  require_member(set, x, "x");
  const double curvature = xi.norm() * half_inverse_radius(set);
  double worst = -kInfinity;
  for (const auto& y : samples) {
    require_member(set, y, "sample");
    const Vector dy = y - x;
    worst = std::max(worst, xi.dot(dy) - curvature * dy.squaredNorm());
  }
  return worst;
}

double hypo_monotonicity_gap(const ProxSet& set, const Vector& x, const Vector& x_other,
                             const Vector& xi, const Vector& xi_other) {
  require_dim(xi, set.dim(), "hypo_monotonicity_gap");
  require_dim(xi_other, set.dim(), "hypo_monotonicity_gap");
  require_member(set, x, "x");
  require_member(set, x_other, "x'");
  const double r = set.prox_r();
  if (xi.norm() > r * (1.0 + 1e-12) || xi_other.norm() > r * (1.0 + 1e-12)) {
    throw Error(ErrorCode::InvalidArgument, "normals must have norm at most prox_r");
  }
  const Vector dx = x - x_other;
  return (xi - xi_other).dot(dx) + dx.squaredNorm();
}

double estimate_prox_constant(const ProxSet& set, const SampleBox& box, std::size_t n_samples) {
  const auto n = set.dim();
  require_dim(box.lower, n, "sample box");
  require_dim(box.upper, n, "sample box");
  if (!all_finite(box.lower) || !all_finite(box.upper) ||
      ((box.upper - box.lower).array() <= 0.0).any()) {
    throw Error(ErrorCode::InvalidArgument, "sample box must be finite with positive extent");
  }

  const auto per_axis = static_cast<long>(
      std::floor(std::pow(static_cast<double>(n_samples), 1.0 / static_cast<double>(n)) + 1e-9));
  if (per_axis < 2) {
    throw Error(ErrorCode::InsufficientSamples,
                std::to_string(n_samples) + " samples cannot grid a " + std::to_string(n) +
                    "-dimensional box");
  }
  const Vector spacing = (box.upper - box.lower) / static_cast<double>(per_axis - 1);
  // Any point of the box lies within half a cell diagonal of a grid point;
  // the candidate-distance gap grows at most twice as fast as the offset.
  const double resolution = 1.05 * spacing.norm();

  double min_ambiguous = kInfinity;
  double max_unique = 0.0;
  std::vector<long> idx(static_cast<std::size_t>(n), 0);
  Vector s(n);
  bool any_in_enlargement = false;
  while (true) {
    for (Eigen::Index i = 0; i < n; ++i) {
      s[i] = box.lower[i] + static_cast<double>(idx[static_cast<std::size_t>(i)]) * spacing[i];
    }
    const NearestPointProfile p = nearest_point_profile(set, s);
    if (p.best < set.prox_r()) any_in_enlargement = true;
    if (p.runner_up - p.best <= resolution) {
      min_ambiguous = std::min(min_ambiguous, p.best);
    } else {
      max_unique = std::max(max_unique, p.best);
    }

    std::size_t axis = 0;
    while (axis < idx.size() && ++idx[axis] == per_axis) idx[axis++] = 0;
    if (axis == idx.size()) break;
  }
  if (!any_in_enlargement) {
    throw Error(ErrorCode::InsufficientSamples, "no grid point lies in the r-enlargement");
  }
  return std::isinf(min_ambiguous) ? max_unique : min_ambiguous;
}

SampleBox default_sample_box(const ProxSet& set) {
  SampleBox box;
  extend_box(set, box);
  return box;
}

Vector sample_point(const ProxSet& set, const SampleBox& box, std::mt19937_64& rng) {
  for (int attempt = 0; attempt < 10000; ++attempt) {
    const Vector s = uniform_in(box, rng);
    if (contains(set, s, 0.0)) return s;
    const NearestPointProfile p = nearest_point_profile(set, s);
    if (p.best < 0.99 * set.prox_r() && p.runner_up - p.best > 1e-6) return project(set, s);
  }
  throw Error(ErrorCode::InsufficientSamples, "could not sample a point of the set in the box");
}

Vector sample_boundary_point(const ProxSet& set, const SampleBox& box, std::mt19937_64& rng) {
  for (int attempt = 0; attempt < 10000; ++attempt) {
    const Vector s = uniform_in(box, rng);
    if (contains(set, s, 0.0)) continue;
    const NearestPointProfile p = nearest_point_profile(set, s);
    if (p.best < 0.99 * set.prox_r() && p.runner_up - p.best > 1e-6) return project(set, s);
  }
  return sample_point(set, box, rng);
}

Vector sample_normal(const ProxSet& set, const Vector& x, double max_norm, std::mt19937_64& rng) {
  const ConeRep cone = normal_cone(set, x);
  Vector xi = Vector::Zero(set.dim());
  if (cone.is_zero_cone()) return xi;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const auto& g : cone.generators) xi += unit(rng) * g;
  const double len = xi.norm();
  if (len == 0.0) return xi;
  return (unit(rng) * max_norm / len) * xi;
}

}  // namespace sweep
