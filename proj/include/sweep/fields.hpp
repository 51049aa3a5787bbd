#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <variant>
#include <vector>

#include "sweep/vector.hpp"

namespace sweep {

/// Region on which Lipschitz and gradient certificates are sampled.
struct WorkingRegion {
  Vector lower;
  Vector upper;

  static WorkingRegion centered_cube(Eigen::Index dim, double half_width = 10.0);
};

// ---------------------------------------------------------------------------
// Potentials V with Lipschitz gradient
// ---------------------------------------------------------------------------

/// V(x) = 1/2 x^T Q x + q^T x + c0 with Q symmetric.
struct Quadratic {
  Matrix q_matrix;
  Vector q_vector;
  double constant = 0.0;
};

/// V(x) = sum_i sum_j coefficients[i][j] * x_i^j.
struct SeparablePolynomial {
  std::vector<std::vector<double>> coefficients;
};

class Potential {
 public:
  using Kind = std::variant<Quadratic, SeparablePolynomial>;

  static Potential quadratic(Matrix q, Vector linear, double constant);
  /// grad_lipschitz and the convexity flag are certified on the region.
  static Potential separable_polynomial(std::vector<std::vector<double>> coefficients,
                                        const WorkingRegion& region);
  static Potential separable_polynomial(std::vector<std::vector<double>> coefficients);

  const Kind& kind() const noexcept { return kind_; }
  double grad_lipschitz() const noexcept { return grad_lipschitz_; }
  bool convex() const noexcept { return convex_; }
  Eigen::Index dim() const noexcept { return dim_; }

  friend bool operator==(const Potential& a, const Potential& b);

 private:
  Potential(Kind kind, double lip, bool convex, Eigen::Index dim)
      : kind_(std::move(kind)), grad_lipschitz_(lip), convex_(convex), dim_(dim) {}

  Kind kind_;
  double grad_lipschitz_;
  bool convex_;
  Eigen::Index dim_;
};

double potential_value(const Potential& p, const Vector& x);
Vector potential_grad(const Potential& p, const Vector& x);

// ---------------------------------------------------------------------------
// Lipschitz vector fields f
// ---------------------------------------------------------------------------

struct ConstantField {
  Vector value;
};

/// x -> A x + b.
struct LinearField {
  Matrix a;
  Vector b;
};

/// x -> -grad V(x).
struct NegGradientField {
  Potential potential;
};

class Field {
 public:
  using Kind = std::variant<ConstantField, LinearField, NegGradientField>;

  static Field constant(Vector value);
  /// Without a declared constant, lipschitz_k is the power-iteration
  /// estimate of |A|_2; a declared constant below that estimate is rejected.
  static Field linear(Matrix a, Vector b, std::optional<double> lipschitz_k = std::nullopt);
  static Field neg_gradient(Potential potential);

  const Kind& kind() const noexcept { return kind_; }
  double lipschitz_k() const noexcept { return lipschitz_k_; }
  Eigen::Index dim() const noexcept { return dim_; }

  const Potential* potential() const noexcept {
    const auto* g = std::get_if<NegGradientField>(&kind_);
    return g ? &g->potential : nullptr;
  }

  friend bool operator==(const Field& a, const Field& b);

 private:
  Field(Kind kind, double k, Eigen::Index dim) : kind_(std::move(kind)), lipschitz_k_(k), dim_(dim) {}

  Kind kind_;
  double lipschitz_k_;
  Eigen::Index dim_;
};

Vector eval_field(const Field& field, const Vector& x);

/// Largest singular value of A by power iteration on A^T A.
double operator_norm_estimate(const Matrix& a);

/// max over n_pairs random pairs of |f(x) - f(y)| / (k |x - y|); a valid
/// certificate keeps this at or below 1 + 1e-9.
double lipschitz_ratio(const Field& field, const WorkingRegion& region, std::size_t n_pairs,
                       std::uint64_t seed);

/// max over probes of |grad V - central FD| / (1 + |grad V|), step 1e-5.
double gradient_fd_error(const Potential& p, const WorkingRegion& region, std::size_t n_probes,
                         std::uint64_t seed);

}  // namespace sweep
