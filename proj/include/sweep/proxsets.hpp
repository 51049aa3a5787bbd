#pragma once

#include <string_view>
#include <variant>
#include <vector>

#include "sweep/vector.hpp"

namespace sweep {

// ---------------------------------------------------------------------------
// Set catalogue
//
// Every set is closed and uniformly r-prox-regular: each point at distance
// < r from the set has a unique nearest point. Convex kinds carry r = +inf.
// ---------------------------------------------------------------------------

struct WholeSpace {
  Eigen::Index dim = 1;
};

/// {x : <normal, x> <= offset}, normal stored with unit length.
struct HalfSpace {
  Vector normal;
  double offset = 0.0;
};

/// Axis-aligned box; bounds may be infinite.
struct Box {
  Vector lower;
  Vector upper;
};

struct Ball {
  Vector center;
  double radius = 0.0;
};

/// Closure of the complement of the open ball B(center, radius).
struct BallComplement {
  Vector center;
  double radius = 0.0;
};

/// Nonempty intersection of finitely many half-spaces.
struct Polytope {
  std::vector<HalfSpace> faces;
};

class ProxSet;

/// Finite union of pairwise disjoint closed convex members.
struct DisjointConvexUnion {
  std::vector<ProxSet> members;
  double min_gap = 0.0;
};

class ProxSet {
 public:
  using Kind = std::variant<WholeSpace, HalfSpace, Box, Ball, BallComplement, Polytope,
                            DisjointConvexUnion>;

  static ProxSet whole_space(Eigen::Index dim);
  static ProxSet half_space(Vector normal, double offset);
  static ProxSet box(Vector lower, Vector upper);
  static ProxSet ball(Vector center, double radius);
  static ProxSet ball_complement(Vector center, double radius);
  static ProxSet polytope(std::vector<HalfSpace> faces);
  /// Members must be convex catalogue sets with positive pairwise gaps.
  /// The prox constant defaults to half the smallest gap.
  static ProxSet disjoint_union(std::vector<ProxSet> members);

  /// Returns a copy declaring a smaller prox constant. Only nonconvex kinds
  /// accept an override and it may not exceed the constructed value.
  ProxSet with_prox_r(double r) const;

  const Kind& kind() const noexcept { return kind_; }
  double prox_r() const noexcept { return prox_r_; }
  Eigen::Index dim() const noexcept { return dim_; }
  bool is_convex() const noexcept;
  std::string_view kind_name() const noexcept;

  template <class T>
  const T* as() const noexcept {
    return std::get_if<T>(&kind_);
  }

  friend bool operator==(const ProxSet& a, const ProxSet& b);

 private:
  ProxSet(Kind kind, double prox_r, Eigen::Index dim)
      : kind_(std::move(kind)), prox_r_(prox_r), dim_(dim) {}

  Kind kind_;
  double prox_r_;
  Eigen::Index dim_;
};

/// Finitely generated cone {sum_i lambda_i g_i : lambda_i >= 0} anchored at
/// apex_point. An empty generator list is the zero cone.
struct ConeRep {
  Vector apex_point;
  std::vector<Vector> generators;

  bool is_zero_cone() const noexcept { return generators.empty(); }
};

bool contains(const ProxSet& set, const Vector& x, double tol = kMembershipTol);

double distance(const ProxSet& set, const Vector& s);

/// Unique nearest point of s in the set. Throws OutsideEnlargement when
/// d(s, C) >= prox_r and AmbiguousProjection on a numerical tie between
/// union members.
Vector project(const ProxSet& set, const Vector& s);

/// Proximal normal cone at x. Constraints within tol of being active
/// contribute a generator.
ConeRep normal_cone(const ProxSet& set, const Vector& x, double tol = kMembershipTol);

/// Identifiers of the constraints (faces, box bounds, union member faces)
/// active at x, in the same order as the normal_cone generators. Two states
/// share an active set exactly when these lists are equal.
std::vector<int> active_constraints(const ProxSet& set, const Vector& x, double tol = kMembershipTol);

/// Euclidean projection of w onto the cone (relative to its apex direction
/// space), by enumeration of linearly independent generator subsets.
Vector project_onto_cone(const ConeRep& cone, const Vector& w);

/// Minimal-norm element of fx - N_C(x).
Vector minimal_norm_velocity(const ProxSet& set, const Vector& x, const Vector& fx,
                             double tol = kMembershipTol);

/// Best and second-best distances among the competing nearest-point
/// candidates of s. For convex sets the runner-up is +inf; for a ball
/// complement it is the antipodal boundary critical point; for a union it is
/// the second-closest member.
struct NearestPointProfile {
  double best = 0.0;
  double runner_up = kInfinity;
};

NearestPointProfile nearest_point_profile(const ProxSet& set, const Vector& s);

}  // namespace sweep
