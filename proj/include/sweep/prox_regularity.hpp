#pragma once

#include <cstddef>
#include <random>
#include <span>

#include "sweep/proxsets.hpp"

namespace sweep {

// Numerical certifiers for the equivalent characterizations of uniform
// prox-regularity, plus the samplers that feed them.

/// Checks x == proj(C, x + xi) for a normal xi with |xi| below prox_r.
bool verify_projection_identity(const ProxSet& set, const Vector& x, const Vector& xi,
                                double check_tol = kCheckTol);

/// max over samples y of <xi, y - x> - |xi| / (2r) |y - x|^2.
/// Nonpositive (up to tolerance) for every normal xi at x. Returns -inf for
/// an empty sample list.
double prox_inequality_residual(const ProxSet& set, const Vector& x, const Vector& xi,
                                std::span<const Vector> samples);

/// <xi - xi', x - x'> + |x - x'|^2, nonnegative for normals of norm <= r.
double hypo_monotonicity_gap(const ProxSet& set, const Vector& x, const Vector& x_other,
                             const Vector& xi, const Vector& xi_other);

struct SampleBox {
  Vector lower;
  Vector upper;
};

/// Empirical lower estimate of the prox constant from a regular grid of about
/// n_samples points over the box. A grid point is ambiguous when its two best
/// nearest-point candidates differ by less than the grid cell diagonal; the
/// estimate is the smallest distance-to-set among ambiguous points, or the
/// largest sampled distance when none is ambiguous.
double estimate_prox_constant(const ProxSet& set, const SampleBox& box, std::size_t n_samples);

/// A bounded region around the set's defining data, for sampling.
SampleBox default_sample_box(const ProxSet& set);

/// Random point of the set: a uniform box sample kept if inside, otherwise
/// replaced by its projection when that is well defined.
Vector sample_point(const ProxSet& set, const SampleBox& box, std::mt19937_64& rng);

/// Random boundary-biased point: a box sample projected onto the set.
Vector sample_boundary_point(const ProxSet& set, const SampleBox& box, std::mt19937_64& rng);

/// Random element of N(C, x) with norm at most max_norm (zero for a zero cone).
Vector sample_normal(const ProxSet& set, const Vector& x, double max_norm, std::mt19937_64& rng);

/// The probing scale used when the prox constant is infinite.
inline constexpr double kConvexProbeScale = 10.0;

}  // namespace sweep
