#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "sweep/error.hpp"

namespace sweep {

/// A point or velocity in R^n.
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Membership tolerance (absolute distance to the set).
inline constexpr double kMembershipTol = 1e-9;
/// Tolerance used by the geometric certifications.
inline constexpr double kCheckTol = 1e-7;

inline Vector make_vector(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

inline Vector to_vector(const std::vector<double>& values) {
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

inline std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

inline bool all_finite(const Vector& v) { return v.allFinite(); }

inline void require_dim(const Vector& v, Eigen::Index dim, const char* what) {
  if (v.size() != dim) {
    throw Error(ErrorCode::DimensionMismatch, std::string(what) + ": expected dimension " +
                                                  std::to_string(dim) + ", got " +
                                                  std::to_string(v.size()));
  }
}

std::string format_vector(const Vector& v);

}  // namespace sweep
