#include "sweep/fields.hpp"

#include <algorithm>
#include <cmath>

namespace sweep {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool same_matrix(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

double poly_eval(const std::vector<double>& c, double t, int derivative) {
  double acc = 0.0;
  for (std::size_t j = c.size(); j-- > static_cast<std::size_t>(derivative);) {
    double factor = 1.0;
    for (int d = 0; d < derivative; ++d) factor *= static_cast<double>(j - static_cast<std::size_t>(d));
    acc = acc * t + factor * c[j];
  }
  return acc;
}

Vector random_in(const WorkingRegion& region, std::mt19937_64& rng) {
  Vector x(region.lower.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    x[i] = std::uniform_real_distribution<double>(region.lower[i], region.upper[i])(rng);
  }
  return x;
}

}  // namespace

WorkingRegion WorkingRegion::centered_cube(Eigen::Index dim, double half_width) {
  return {Vector::Constant(dim, -half_width), Vector::Constant(dim, half_width)};
}

Potential Potential::quadratic(Matrix q, Vector linear, double constant) {
  const auto n = q.rows();
  if (n == 0 || q.cols() != n || linear.size() != n || !q.allFinite() || !linear.allFinite() ||
      !std::isfinite(constant)) {
    throw Error(ErrorCode::InvalidField, "quadratic potential needs a finite square Q matching q");
  }
  if ((q - q.transpose()).norm() > 1e-12 * (1.0 + q.norm())) {
    throw Error(ErrorCode::InvalidField, "quadratic potential needs a symmetric Q");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(q);
  const auto& ev = eig.eigenvalues();
  const double lip = ev.cwiseAbs().maxCoeff();
  const bool convex = ev.minCoeff() >= -1e-10;
  return Potential(Quadratic{std::move(q), std::move(linear), constant}, lip, convex, n);
}

Potential Potential::separable_polynomial(std::vector<std::vector<double>> coefficients,
                                          const WorkingRegion& region) {
  const auto n = static_cast<Eigen::Index>(coefficients.size());
  if (n == 0 || region.lower.size() != n || region.upper.size() != n) {
    throw Error(ErrorCode::InvalidField, "polynomial potential dimension must match the region");
  }
  double lip = 0.0;
  bool convex = true;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& c = coefficients[static_cast<std::size_t>(i)];
    for (double a : c) {
      if (!std::isfinite(a)) throw Error(ErrorCode::InvalidField, "non-finite coefficient");
    }
    // |p''| <= sum_j |a_j| j (j-1) R^(j-2) on [-R, R].
    const double radius = std::max(std::abs(region.lower[i]), std::abs(region.upper[i]));
    double bound = 0.0;
    for (std::size_t j = 2; j < c.size(); ++j) {
      bound += std::abs(c[j]) * static_cast<double>(j * (j - 1)) *
               std::pow(radius, static_cast<double>(j - 2));
    }
    lip = std::max(lip, bound);
    constexpr int kProbes = 2001;
    for (int k = 0; k < kProbes; ++k) {
      const double t = region.lower[i] + (region.upper[i] - region.lower[i]) * k / (kProbes - 1);
      if (poly_eval(c, t, 2) < -1e-10) {
        convex = false;
        break;
      }
    }
  }
  return Potential(SeparablePolynomial{std::move(coefficients)}, lip, convex, n);
}

Potential Potential::separable_polynomial(std::vector<std::vector<double>> coefficients) {
  const auto n = static_cast<Eigen::Index>(coefficients.size());
  return separable_polynomial(std::move(coefficients), WorkingRegion::centered_cube(std::max<Eigen::Index>(n, 1)));
}

bool operator==(const Potential& a, const Potential& b) {
  if (a.kind_.index() != b.kind_.index() || a.dim_ != b.dim_) return false;
  if (const auto* qa = std::get_if<Quadratic>(&a.kind_)) {
    const auto& qb = std::get<Quadratic>(b.kind_);
    return same_matrix(qa->q_matrix, qb.q_matrix) && same_matrix(qa->q_vector, qb.q_vector) &&
           qa->constant == qb.constant;
  }
  return std::get<SeparablePolynomial>(a.kind_).coefficients ==
             std::get<SeparablePolynomial>(b.kind_).coefficients &&
         a.grad_lipschitz_ == b.grad_lipschitz_;
}

double potential_value(const Potential& p, const Vector& x) {
  require_dim(x, p.dim(), "potential_value");
  return std::visit(Overloaded{
                        [&](const Quadratic& q) {
                          return 0.5 * x.dot(q.q_matrix * x) + q.q_vector.dot(x) + q.constant;
                        },
                        [&](const SeparablePolynomial& s) {
                          double v = 0.0;
                          for (Eigen::Index i = 0; i < x.size(); ++i) {
                            v += poly_eval(s.coefficients[static_cast<std::size_t>(i)], x[i], 0);
                          }
                          return v;
                        },
                    },
                    p.kind());
}

Vector potential_grad(const Potential& p, const Vector& x) {
  require_dim(x, p.dim(), "potential_grad");
  return std::visit(Overloaded{
                        [&](const Quadratic& q) -> Vector { return q.q_matrix * x + q.q_vector; },
                        [&](const SeparablePolynomial& s) -> Vector {
                          Vector g(x.size());
                          for (Eigen::Index i = 0; i < x.size(); ++i) {
                            g[i] = poly_eval(s.coefficients[static_cast<std::size_t>(i)], x[i], 1);
                          }
                          return g;
                        },
                    },
                    p.kind());
}

Field Field::constant(Vector value) {
  if (value.size() == 0 || !value.allFinite()) {
    throw Error(ErrorCode::InvalidField, "constant field needs a finite vector");
  }
  const auto n = value.size();
  return Field(ConstantField{std::move(value)}, 0.0, n);
}

Field Field::linear(Matrix a, Vector b, std::optional<double> lipschitz_k) {
  const auto n = a.rows();
  if (n == 0 || a.cols() != n || b.size() != n || !a.allFinite() || !b.allFinite()) {
    throw Error(ErrorCode::InvalidField, "linear field needs a finite square A matching b");
  }
  const double estimate = operator_norm_estimate(a);
  double k = estimate;
  if (lipschitz_k) {
    if (!(*lipschitz_k >= 0.0) || *lipschitz_k < estimate * (1.0 - 1e-9)) {
      throw Error(ErrorCode::InvalidField, "declared lipschitz_k " + std::to_string(*lipschitz_k) +
                                               " is below |A|_2 ~ " + std::to_string(estimate));
    }
    k = *lipschitz_k;
  }
  return Field(LinearField{std::move(a), std::move(b)}, k, n);
}

Field Field::neg_gradient(Potential potential) {
  const double k = potential.grad_lipschitz();
  const auto n = potential.dim();
  return Field(NegGradientField{std::move(potential)}, k, n);
}

bool operator==(const Field& a, const Field& b) {
  if (a.kind_.index() != b.kind_.index() || a.dim_ != b.dim_ || a.lipschitz_k_ != b.lipschitz_k_) {
    return false;
  }
  return std::visit(Overloaded{
                        [&](const ConstantField& c) {
                          return same_matrix(c.value, std::get<ConstantField>(b.kind_).value);
                        },
                        [&](const LinearField& l) {
                          const auto& o = std::get<LinearField>(b.kind_);
                          return same_matrix(l.a, o.a) && same_matrix(l.b, o.b);
                        },
                        [&](const NegGradientField& g) {
                          return g.potential == std::get<NegGradientField>(b.kind_).potential;
                        },
                    },
                    a.kind_);
}

Vector eval_field(const Field& field, const Vector& x) {
  require_dim(x, field.dim(), "eval_field");
  return std::visit(Overloaded{
                        [&](const ConstantField& c) -> Vector { return c.value; },
                        [&](const LinearField& l) -> Vector { return l.a * x + l.b; },
                        [&](const NegGradientField& g) -> Vector { return -potential_grad(g.potential, x); },
                    },
                    field.kind());
}

double operator_norm_estimate(const Matrix& a) {
  const auto n = a.cols();
  if (n == 0) return 0.0;
  const Matrix ata = a.transpose() * a;
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> gauss;
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = gauss(rng);
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < 10000; ++it) {
    Vector w = ata * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    w /= norm;
    const double next = w.dot(ata * w);
    v = w;
    if (std::abs(next - lambda) <= 1e-15 * std::max(1.0, next)) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return std::sqrt(std::max(lambda, 0.0));
}

double lipschitz_ratio(const Field& field, const WorkingRegion& region, std::size_t n_pairs,
                       std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (std::size_t i = 0; i < n_pairs; ++i) {
    const Vector x = random_in(region, rng);
    const Vector y = random_in(region, rng);
    const double dx = (x - y).norm();
    const double df = (eval_field(field, x) - eval_field(field, y)).norm();
    if (dx == 0.0) continue;
    if (field.lipschitz_k() == 0.0) {
      if (df > 0.0) return kInfinity;
      continue;
    }
    worst = std::max(worst, df / (field.lipschitz_k() * dx));
  }
  return worst;
}

double gradient_fd_error(const Potential& p, const WorkingRegion& region, std::size_t n_probes,
                         std::uint64_t seed) {
  constexpr double kStep = 1e-5;
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (std::size_t k = 0; k < n_probes; ++k) {
    const Vector x = random_in(region, rng);
    const Vector g = potential_grad(p, x);
    Vector fd(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      Vector xp = x, xm = x;
      xp[i] += kStep;
      xm[i] -= kStep;
      fd[i] = (potential_value(p, xp) - potential_value(p, xm)) / (2.0 * kStep);
    }
    worst = std::max(worst, (g - fd).norm() / (1.0 + g.norm()));
  }
  return worst;
}

}  // namespace sweep
