#pragma once

#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "sweep/error.hpp"
#include "sweep/proxsets.hpp"

namespace sweep::test {

#define EXPECT_SWEEP_ERROR(stmt, expected_code)                         \
  do {                                                                  \
    try {                                                               \
      stmt;                                                             \
      ADD_FAILURE() << "expected " << ::sweep::to_string(expected_code); \
    } catch (const ::sweep::Error& e) {                                 \
      EXPECT_EQ(e.code(), expected_code) << e.what();                   \
    }                                                                   \
  } while (0)

inline void expect_near(const Vector& a, const Vector& b, double tol) {
  ASSERT_EQ(a.size(), b.size());
  EXPECT_LE((a - b).norm(), tol) << "got " << format_vector(a) << " want " << format_vector(b);
}

// Hand-rolled generators for the property tests.
inline Vector random_vector(std::mt19937_64& rng, Eigen::Index dim, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = u(rng);
  return v;
}

/// One instance of every catalogue kind, in one and two dimensions.
inline std::vector<ProxSet> catalogue() {
  std::vector<ProxSet> out;
  out.push_back(ProxSet::whole_space(2));
  out.push_back(ProxSet::half_space(make_vector({-1.0}), 0.0));
  out.push_back(ProxSet::half_space(make_vector({1.0, 2.0}), 1.0));
  out.push_back(ProxSet::box(make_vector({0.0}), make_vector({1.0})));
  out.push_back(ProxSet::box(make_vector({-1.0, 0.0}), make_vector({1.0, kInfinity})));
  out.push_back(ProxSet::ball(make_vector({0.5, -0.5}), 1.5));
  out.push_back(ProxSet::ball_complement(make_vector({0.0, 0.0}), 1.0));
  out.push_back(ProxSet::ball_complement(make_vector({1.0}), 0.5));
  out.push_back(ProxSet::polytope({{make_vector({-1.0, 0.0}), 0.0},
                                   {make_vector({0.0, -1.0}), 0.0},
                                   {make_vector({1.0, 1.0}), 2.0}}));
  out.push_back(ProxSet::disjoint_union(
      {ProxSet::box(make_vector({0.0}), make_vector({1.0})), ProxSet::box(make_vector({2.0}), make_vector({3.0}))}));
  out.push_back(ProxSet::disjoint_union({ProxSet::ball(make_vector({0.0, 0.0}), 1.0),
                                         ProxSet::box(make_vector({2.0, -1.0}), make_vector({3.0, 1.0}))}));
  return out;
}

}  // namespace sweep::test
