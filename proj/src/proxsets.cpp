#include "sweep/proxsets.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>

namespace sweep {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidSet: return "InvalidSet";
    case ErrorCode::InvalidField: return "InvalidField";
    case ErrorCode::NotInSet: return "NotInSet";
    case ErrorCode::OutsideEnlargement: return "OutsideEnlargement";
    case ErrorCode::AmbiguousProjection: return "AmbiguousProjection";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::IntegrationFailure: return "IntegrationFailure";
    case ErrorCode::InvalidAlpha: return "InvalidAlpha";
    case ErrorCode::NegativeB: return "NegativeB";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::OffGrid: return "OffGrid";
    case ErrorCode::WrongFieldKind: return "WrongFieldKind";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::NotConvex: return "NotConvex";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
  }
  return "Unknown";
}

std::string format_vector(const Vector& v) {
  std::ostringstream os;
  os.precision(17);
  os << '[';
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) os << ", ";
    os << v[i];
  }
  os << ']';
  return os.str();
}

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_finite(const Vector& v, const char* what) {
  if (v.size() == 0 || !all_finite(v)) {
    throw Error(ErrorCode::InvalidSet, std::string(what) + " must be a nonempty finite vector");
  }
}

bool same_vector(const Vector& a, const Vector& b) {
  return a.size() == b.size() && (a.array() == b.array()).all();
}

// Calls fn(subset) for every subset of {0..m-1} with at most max_size
// elements, smallest subsets first.
void for_each_subset(int m, int max_size, const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> subset;
  std::function<void(int, int)> rec = [&](int start, int remaining) {
    if (remaining == 0) {
      fn(subset);
      return;
    }
    for (int i = start; i <= m - remaining; ++i) {
      subset.push_back(i);
      rec(i + 1, remaining - 1);
      subset.pop_back();
    }
  };
  for (int size = 0; size <= std::min(m, max_size); ++size) rec(0, size);
}

// Projection onto {x : A x <= b} by active-set enumeration. Returns false
// when no KKT point exists (empty polytope).
bool project_polytope(const std::vector<HalfSpace>& faces, const Vector& s, Vector& out) {
  const auto n = s.size();
  const int m = static_cast<int>(faces.size());
  double best = kInfinity;
  bool found = false;

  for_each_subset(m, static_cast<int>(n), [&](const std::vector<int>& active) {
    const auto k = static_cast<Eigen::Index>(active.size());
    Vector x = s;
    if (k > 0) {
      Matrix a(k, n);
      Vector b(k);
      for (Eigen::Index i = 0; i < k; ++i) {
        a.row(i) = faces[static_cast<std::size_t>(active[static_cast<std::size_t>(i)])].normal.transpose();
        b[i] = faces[static_cast<std::size_t>(active[static_cast<std::size_t>(i)])].offset;
      }
      Eigen::FullPivLU<Matrix> lu(a * a.transpose());
      if (lu.rank() < k) return;
      const Vector lambda = lu.solve(a * s - b);
      if ((lambda.array() < -1e-12).any()) return;
      x = s - a.transpose() * lambda;
    }
    for (const auto& f : faces) {
      if (f.normal.dot(x) > f.offset + 1e-10 * (1.0 + std::abs(f.offset))) return;
    }
    const double d = (s - x).norm();
    if (d < best) {
      best = d;
      out = x;
      found = true;
    }
  });
  return found;
}

Vector project_convex(const ProxSet& set, const Vector& s) {
  return std::visit(
      Overloaded{
          [&](const WholeSpace&) -> Vector { return s; },
          [&](const HalfSpace& h) -> Vector {
            const double excess = h.normal.dot(s) - h.offset;
            return excess > 0.0 ? Vector(s - excess * h.normal) : s;
          },
          [&](const Box& b) -> Vector { return s.cwiseMax(b.lower).cwiseMin(b.upper); },
          [&](const Ball& b) -> Vector {
            const Vector d = s - b.center;
            const double r = d.norm();
            return r > b.radius ? Vector(b.center + (b.radius / r) * d) : s;
          },
          [&](const Polytope& p) -> Vector {
            Vector out;
            if (!project_polytope(p.faces, s, out)) {
              throw Error(ErrorCode::InvalidSet, "polytope is empty");
            }
            return out;
          },
          [&](const BallComplement&) -> Vector {
            throw Error(ErrorCode::InvalidArgument, "ball complement is not convex");
          },
          [&](const DisjointConvexUnion&) -> Vector {
            throw Error(ErrorCode::InvalidArgument, "union is not convex");
          },
      },
      set.kind());
}

// Distance between two disjoint convex members.
double member_gap(const ProxSet& a, const ProxSet& b) {
  const auto* box_a = a.as<Box>();
  const auto* box_b = b.as<Box>();
  if (box_a && box_b) {
    const Vector sep = (box_a->lower - box_b->upper)
                           .cwiseMax(box_b->lower - box_a->upper)
                           .cwiseMax(Vector::Zero(a.dim()));
    return sep.norm();
  }
  const auto* ball_a = a.as<Ball>();
  const auto* ball_b = b.as<Ball>();
  if (ball_a && ball_b) {
    return std::max(0.0, (ball_a->center - ball_b->center).norm() - ball_a->radius - ball_b->radius);
  }
  if (ball_a) return std::max(0.0, distance(b, ball_a->center) - ball_a->radius);
  if (ball_b) return std::max(0.0, distance(a, ball_b->center) - ball_b->radius);

  // Alternating projections converge to a best-approximation pair.
  Vector pa = project_convex(a, project_convex(b, Vector::Zero(a.dim())));
  Vector pb = project_convex(b, pa);
  for (int it = 0; it < 200000; ++it) {
    const Vector na = project_convex(a, pb);
    const Vector nb = project_convex(b, na);
    const double change = (na - pa).norm() + (nb - pb).norm();
    pa = na;
    pb = nb;
    if (change < 1e-14) break;
  }
  return (pa - pb).norm();
}

}  // namespace

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

ProxSet ProxSet::whole_space(Eigen::Index dim) {
  if (dim < 1) throw Error(ErrorCode::InvalidSet, "dimension must be >= 1");
  return ProxSet(WholeSpace{dim}, kInfinity, dim);
}

ProxSet ProxSet::half_space(Vector normal, double offset) {
  require_finite(normal, "half-space normal");
  const double len = normal.norm();
  if (len == 0.0 || !std::isfinite(offset)) {
    throw Error(ErrorCode::InvalidSet, "half-space needs a nonzero normal and finite offset");
  }
  const auto dim = normal.size();
  // Already-unit normals are kept bit-exact so that descriptors round-trip.
  if (std::abs(len - 1.0) <= 4.0 * std::numeric_limits<double>::epsilon()) {
    return ProxSet(HalfSpace{std::move(normal), offset}, kInfinity, dim);
  }
  return ProxSet(HalfSpace{normal / len, offset / len}, kInfinity, dim);
}

ProxSet ProxSet::box(Vector lower, Vector upper) {
  if (lower.size() == 0 || lower.size() != upper.size()) {
    throw Error(ErrorCode::InvalidSet, "box bounds must be nonempty and of equal length");
  }
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    if (std::isnan(lower[i]) || std::isnan(upper[i]) || lower[i] > upper[i] ||
        lower[i] == kInfinity || upper[i] == -kInfinity) {
      throw Error(ErrorCode::InvalidSet, "box bounds must satisfy lower <= upper at index " +
                                             std::to_string(i));
    }
  }
  const auto dim = lower.size();
  return ProxSet(Box{std::move(lower), std::move(upper)}, kInfinity, dim);
}

ProxSet ProxSet::ball(Vector center, double radius) {
  require_finite(center, "ball center");
  if (!(radius >= 0.0) || !std::isfinite(radius)) {
    throw Error(ErrorCode::InvalidSet, "ball radius must be finite and nonnegative");
  }
  const auto dim = center.size();
  return ProxSet(Ball{std::move(center), radius}, kInfinity, dim);
}

ProxSet ProxSet::ball_complement(Vector center, double radius) {
  require_finite(center, "ball complement center");
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw Error(ErrorCode::InvalidSet, "ball complement radius must be finite and positive");
  }
  const auto dim = center.size();
  return ProxSet(BallComplement{std::move(center), radius}, radius, dim);
}

ProxSet ProxSet::polytope(std::vector<HalfSpace> faces) {
  if (faces.empty()) throw Error(ErrorCode::InvalidSet, "polytope needs at least one face");
  const auto dim = faces.front().normal.size();
  for (auto& f : faces) {
    if (f.normal.size() != dim) {
      throw Error(ErrorCode::InvalidSet, "polytope faces must share one dimension");
    }
    const ProxSet h = half_space(f.normal, f.offset);
    f = *h.as<HalfSpace>();
  }
  Vector probe;
  if (!project_polytope(faces, Vector::Zero(dim), probe)) {
    throw Error(ErrorCode::InvalidSet, "polytope is empty");
  }
  return ProxSet(Polytope{std::move(faces)}, kInfinity, dim);
}

ProxSet ProxSet::disjoint_union(std::vector<ProxSet> members) {
  if (members.size() < 2) throw Error(ErrorCode::InvalidSet, "union needs at least two members");
  const auto dim = members.front().dim();
  for (const auto& m : members) {
    if (m.dim() != dim) throw Error(ErrorCode::InvalidSet, "union members must share one dimension");
    if (!m.is_convex() || m.as<WholeSpace>()) {
      throw Error(ErrorCode::InvalidSet,
                  std::string("union member must be a proper convex set, got ") +
                      std::string(m.kind_name()));
    }
  }
  double min_gap = kInfinity;
  for (std::size_t i = 0; i < members.size(); ++i) {
    for (std::size_t j = i + 1; j < members.size(); ++j) {
      const double g = member_gap(members[i], members[j]);
      if (!(g > 1e-9)) {
        throw Error(ErrorCode::InvalidSet, "union members " + std::to_string(i) + " and " +
                                               std::to_string(j) + " are not disjoint");
      }
      min_gap = std::min(min_gap, g);
    }
  }
  return ProxSet(DisjointConvexUnion{std::move(members), min_gap}, 0.5 * min_gap, dim);
}

ProxSet ProxSet::with_prox_r(double r) const {
  if (is_convex()) {
    throw Error(ErrorCode::InvalidSet, "convex sets carry prox_r = inf; no override allowed");
  }
  if (!(r > 0.0) || r > prox_r_) {
    throw Error(ErrorCode::InvalidSet, "prox_r override must lie in (0, " +
                                           std::to_string(prox_r_) + "]");
  }
  ProxSet copy = *this;
  copy.prox_r_ = r;
  return copy;
}

bool ProxSet::is_convex() const noexcept {
  return !std::holds_alternative<BallComplement>(kind_) &&
         !std::holds_alternative<DisjointConvexUnion>(kind_);
}

std::string_view ProxSet::kind_name() const noexcept {
  return std::visit(Overloaded{
                        [](const WholeSpace&) { return std::string_view("whole_space"); },
                        [](const HalfSpace&) { return std::string_view("half_space"); },
                        [](const Box&) { return std::string_view("box"); },
                        [](const Ball&) { return std::string_view("ball"); },
                        [](const BallComplement&) { return std::string_view("ball_complement"); },
                        [](const Polytope&) { return std::string_view("polytope"); },
                        [](const DisjointConvexUnion&) { return std::string_view("disjoint_union"); },
                    },
                    kind_);
}

bool operator==(const ProxSet& a, const ProxSet& b) {
  if (a.dim_ != b.dim_ || a.kind_.index() != b.kind_.index()) return false;
  if (!(a.prox_r_ == b.prox_r_)) return false;
  return std::visit(
      Overloaded{
          [&](const WholeSpace&) { return true; },
          [&](const HalfSpace& h) {
            const auto& o = *b.as<HalfSpace>();
            return same_vector(h.normal, o.normal) && h.offset == o.offset;
          },
          [&](const Box& x) {
            const auto& o = *b.as<Box>();
            return same_vector(x.lower, o.lower) && same_vector(x.upper, o.upper);
          },
          [&](const Ball& x) {
            const auto& o = *b.as<Ball>();
            return same_vector(x.center, o.center) && x.radius == o.radius;
          },
          [&](const BallComplement& x) {
            const auto& o = *b.as<BallComplement>();
            return same_vector(x.center, o.center) && x.radius == o.radius;
          },
          [&](const Polytope& p) {
            const auto& o = *b.as<Polytope>();
            if (p.faces.size() != o.faces.size()) return false;
            for (std::size_t i = 0; i < p.faces.size(); ++i) {
              if (!same_vector(p.faces[i].normal, o.faces[i].normal) ||
                  p.faces[i].offset != o.faces[i].offset) {
                return false;
              }
            }
            return true;
          },
          [&](const DisjointConvexUnion& u) { return u.members == b.as<DisjointConvexUnion>()->members; },
      },
      a.kind_);
}

// ---------------------------------------------------------------------------
// Geometry
// ---------------------------------------------------------------------------

double distance(const ProxSet& set, const Vector& s) {
  require_dim(s, set.dim(), "distance");
  return std::visit(
      Overloaded{
          [&](const WholeSpace&) { return 0.0; },
          [&](const HalfSpace& h) { return std::max(0.0, h.normal.dot(s) - h.offset); },
          [&](const Box&) { return (s - project_convex(set, s)).norm(); },
          [&](const Ball& b) { return std::max(0.0, (s - b.center).norm() - b.radius); },
          [&](const BallComplement& b) { return std::max(0.0, b.radius - (s - b.center).norm()); },
          [&](const Polytope&) { return (s - project_convex(set, s)).norm(); },
          [&](const DisjointConvexUnion& u) {
            double d = kInfinity;
            for (const auto& m : u.members) d = std::min(d, distance(m, s));
            return d;
          },
      },
      set.kind());
}

bool contains(const ProxSet& set, const Vector& x, double tol) {
  require_dim(x, set.dim(), "contains");
  return distance(set, x) <= tol;
}

NearestPointProfile nearest_point_profile(const ProxSet& set, const Vector& s) {
  require_dim(s, set.dim(), "nearest_point_profile");
  if (const auto* bc = set.as<BallComplement>()) {
    const double off = (s - bc->center).norm();
    if (off >= bc->radius) return {0.0, kInfinity};
    return {bc->radius - off, bc->radius + off};
  }
  if (const auto* u = set.as<DisjointConvexUnion>()) {
    NearestPointProfile p{kInfinity, kInfinity};
    for (const auto& m : u->members) {
      const double d = distance(m, s);
      if (d < p.best) {
        p.runner_up = p.best;
        p.best = d;
      } else if (d < p.runner_up) {
        p.runner_up = d;
      }
    }
    return p;
  }
  return {distance(set, s), kInfinity};
}

Vector project(const ProxSet& set, const Vector& s) {
  require_dim(s, set.dim(), "project");
  if (set.is_convex()) return project_convex(set, s);

  const NearestPointProfile profile = nearest_point_profile(set, s);
  if (profile.best >= set.prox_r()) {
    throw Error(ErrorCode::OutsideEnlargement,
                "d(s, C) = " + std::to_string(profile.best) + " >= prox_r = " +
                    std::to_string(set.prox_r()) + " at s = " + format_vector(s));
  }
  if (profile.runner_up - profile.best <= kMembershipTol) {
    throw Error(ErrorCode::AmbiguousProjection,
                "two nearest-point candidates tie at distance " + std::to_string(profile.best) +
                    " for s = " + format_vector(s));
  }

  if (const auto* bc = set.as<BallComplement>()) {
    const Vector d = s - bc->center;
    const double off = d.norm();
    if (off >= bc->radius) return s;
    return bc->center + (bc->radius / off) * d;
  }
  const auto& u = *set.as<DisjointConvexUnion>();
  for (const auto& m : u.members) {
    if (distance(m, s) == profile.best) return project_convex(m, s);
  }
  throw Error(ErrorCode::AmbiguousProjection, "no member attains the union distance");
}

namespace {

struct ActiveFace {
  int label;
  Vector generator;
};

std::vector<ActiveFace> active_faces(const ProxSet& set, const Vector& x, double tol) {
  std::vector<ActiveFace> faces;
  const auto n = set.dim();
  std::visit(
      Overloaded{
          [&](const WholeSpace&) {},
          [&](const HalfSpace& h) {
            if (h.normal.dot(x) - h.offset >= -tol) faces.push_back({0, h.normal});
          },
          [&](const Box& b) {
            for (Eigen::Index i = 0; i < n; ++i) {
              const int axis = static_cast<int>(i);
              if (x[i] <= b.lower[i] + tol) faces.push_back({2 * axis, -Vector::Unit(n, i)});
              if (x[i] >= b.upper[i] - tol) faces.push_back({2 * axis + 1, Vector::Unit(n, i)});
            }
          },
          [&](const Ball& b) {
            const Vector d = x - b.center;
            const double r = d.norm();
            if (b.radius > 0.0 && r >= b.radius - tol) faces.push_back({0, d / r});
          },
          [&](const BallComplement& b) {
            const Vector d = b.center - x;
            const double r = d.norm();
            if (r <= b.radius + tol) faces.push_back({0, d / r});
          },
          [&](const Polytope& p) {
            for (std::size_t i = 0; i < p.faces.size(); ++i) {
              const auto& f = p.faces[i];
              if (f.normal.dot(x) - f.offset >= -tol) faces.push_back({static_cast<int>(i), f.normal});
            }
          },
          [&](const DisjointConvexUnion& u) {
            for (std::size_t i = 0; i < u.members.size(); ++i) {
              if (contains(u.members[i], x, tol)) {
                // Labels are offset per member so that faces of different
                // members never compare equal.
                const int base = static_cast<int>(i) * 1'000'000;
                for (auto& f : active_faces(u.members[i], x, tol)) {
                  faces.push_back({base + f.label, std::move(f.generator)});
                }
                return;
              }
            }
          },
      },
      set.kind());
  return faces;
}

void require_contained(const ProxSet& set, const Vector& x, double tol) {
  require_dim(x, set.dim(), "normal_cone");
  if (!contains(set, x, tol)) {
    throw Error(ErrorCode::NotInSet, "point " + format_vector(x) + " is not in the " +
                                         std::string(set.kind_name()));
  }
}

}  // namespace

ConeRep normal_cone(const ProxSet& set, const Vector& x, double tol) {
  require_contained(set, x, tol);
  ConeRep cone{x, {}};
  for (auto& f : active_faces(set, x, tol)) cone.generators.push_back(std::move(f.generator));
  return cone;
}

std::vector<int> active_constraints(const ProxSet& set, const Vector& x, double tol) {
  require_contained(set, x, tol);
  std::vector<int> labels;
  for (const auto& f : active_faces(set, x, tol)) labels.push_back(f.label);
  return labels;
}

Vector project_onto_cone(const ConeRep& cone, const Vector& w) {
  const auto n = w.size();
  for (const auto& g : cone.generators) require_dim(g, n, "project_onto_cone");
  if (cone.is_zero_cone()) return Vector::Zero(n);
  if (cone.generators.size() == 1) {
    const Vector& g = cone.generators.front();
    return std::max(w.dot(g), 0.0) * g;
  }

  const int m = static_cast<int>(cone.generators.size());
  Vector best = Vector::Zero(n);
  double best_res = w.norm();
  for_each_subset(m, static_cast<int>(n), [&](const std::vector<int>& active) {
    const auto k = static_cast<Eigen::Index>(active.size());
    if (k == 0) return;
    Matrix g(n, k);
    for (Eigen::Index j = 0; j < k; ++j) {
      g.col(j) = cone.generators[static_cast<std::size_t>(active[static_cast<std::size_t>(j)])];
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(g);
    if (qr.rank() < k) return;
    const Vector lambda = qr.solve(w);
    if ((lambda.array() < -1e-14).any()) return;
    const Vector p = g * lambda.cwiseMax(0.0);
    const double res = (w - p).norm();
    if (res < best_res) {
      best_res = res;
      best = p;
    }
  });
  return best;
}

Vector minimal_norm_velocity(const ProxSet& set, const Vector& x, const Vector& fx, double tol) {
  require_dim(fx, set.dim(), "minimal_norm_velocity");
  const ConeRep cone = normal_cone(set, x, tol);
  return fx - project_onto_cone(cone, fx);
}

}  // namespace sweep
