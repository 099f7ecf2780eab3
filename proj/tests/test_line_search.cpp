// Copyright 2026 The QNPE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qnpe/line_search.hpp"

using namespace qnpe;

namespace {

std::function<Vector(const Vector&)> linear_f(const Matrix& a, int* calls = nullptr) {
  return [a, calls](const Vector& z) {
    if (calls) ++*calls;
    return Vector(a * z);
  };
}

}  // namespace

TEST(Backtrack, IdentityOperatorClosedForm) {
  const Matrix id = Matrix::Identity(3, 3);
  LineSearchParams p;
  p.alpha1 = 0.1;
  p.alpha2 = 0.4;
  p.mu = 1.0;
  Vector z = Vector::Zero(3);
  z(0) = 1.0;
  const double sigma = 0.3;
  const LineSearchOutcome r = backtrack(z, z, dense_op(id, true), sigma, p, linear_f(id), 1.0);
  EXPECT_FALSE(r.backtracked);
  EXPECT_EQ(r.trial_count, 1);
  EXPECT_EQ(r.operator_evals, 1);
  EXPECT_DOUBLE_EQ(r.eta, sigma);
  const Vector s = r.z_hat - z;
  EXPECT_NEAR(s(0), -sigma / (1 + sigma), 1e-12);
  EXPECT_LE((s + sigma * r.f_zhat).norm(), 1e-12);
}

TEST(Backtrack, StationaryPointAcceptsImmediately) {
  const Matrix a = Matrix::Identity(4, 4);
  const Vector z = Vector::Ones(4);
  auto f = [&](const Vector& x) { return Vector(x - z); };
  const LineSearchOutcome r = backtrack(z, Vector::Zero(4), dense_op(a, true), 1.0, {}, f, 1.0);
  EXPECT_EQ(r.z_hat, z);
  EXPECT_FALSE(r.backtracked);
  EXPECT_EQ(r.trial_count, 1);
}

TEST(Backtrack, ExactModelAlwaysAcceptsFirstTrial) {
  const auto p = make_quadratic_min(10, 0.1, 1.0, 3);
  const Matrix a = dense_jacobian(p, Vector::Zero(10));
  Rng rng(4);
  LineSearchParams ls;
  ls.alpha1 = 0.0;
  ls.mu = 0.1;
  for (double sigma : {0.1, 1.0, 100.0}) {
    const Vector z = oracle::gaussian_vector(10, rng);
    const LineSearchOutcome r = backtrack(z, p.eval(z), dense_op(a, true), sigma, ls, p.eval, 1.0);
    EXPECT_FALSE(r.backtracked);
    const Vector s = r.z_hat - z;
    EXPECT_LE((s + sigma * r.f_zhat).norm(), 1e-8 * (1 + s.norm()));
  }
}

TEST(Backtrack, AcceptedStepSatisfiesBothConditions) {
  Rng rng(5);
  const auto prob = make_logsumexp_min(12, 30, 0.1, 0.5, 6);
  LineSearchParams ls;
  ls.mu = prob.mu;
  for (int t = 0; t < 10; ++t) {
    const Vector z = oracle::gaussian_vector(12, rng);
    const Vector g = prob.eval(z);
    const Matrix b = prob.l1 * Matrix::Identity(12, 12);
    int calls = 0;
    auto f = [&](const Vector& x) {
      ++calls;
      return prob.eval(x);
    };
    const LineSearchOutcome r = backtrack(z, g, dense_op(b, true), 10.0 / prob.l1, ls, f, prob.l1);
    const Vector s = r.z_hat - z;
    const double scale = std::sqrt(1 + r.eta * ls.mu);
    EXPECT_LE((s + r.eta * (g + b * s)).norm(), ls.alpha1 * scale * s.norm() * (1 + 1e-10));
    EXPECT_LE((s + r.eta * prob.eval(r.z_hat)).norm(), (ls.alpha1 + ls.alpha2) * scale * s.norm() * (1 + 1e-10));
    EXPECT_EQ(calls, r.trial_count);
    EXPECT_EQ(r.operator_evals, r.trial_count);
    EXPECT_EQ(r.backtracked, r.trial_count > 1);
    if (r.backtracked) {
      ASSERT_TRUE(r.z_tilde && r.f_ztilde);
      EXPECT_DOUBLE_EQ(r.eta_tilde, r.eta / ls.beta);
      const Vector st = *r.z_tilde - z;
      const double sc = std::sqrt(1 + r.eta_tilde * ls.mu);
      // The rejected trial met the inexact solve condition but not the proximal one.
      EXPECT_LE((st + r.eta_tilde * (g + b * st)).norm(), ls.alpha1 * sc * st.norm() * (1 + 1e-10));
      EXPECT_GT((st + r.eta_tilde * *r.f_ztilde).norm(), (ls.alpha1 + ls.alpha2) * sc * st.norm());
      // Lower bound on the accepted step.
      const Vector resid = *r.f_ztilde - g - b * st;
      EXPECT_GT(r.eta, ls.alpha2 * ls.beta * st.norm() / resid.norm() * (1 - 1e-12));
    } else {
      EXPECT_FALSE(r.z_tilde);
    }
  }
}

TEST(Backtrack, ExceedingTheCapIsAnError) {
  // Declared l1 far below the truth forces endless rejections.
  const Matrix a = 1e6 * Matrix::Identity(3, 3);
  LineSearchParams ls;
  ls.max_backtracks = 3;
  try {
    backtrack(Vector::Ones(3), a * Vector::Ones(3), dense_op(Matrix::Zero(3, 3), true), 1.0, ls, linear_f(a), 1.0);
    FAIL();
  } catch (const LineSearchError& e) {
    EXPECT_EQ(e.trials(), 4);
  }
}

TEST(Backtrack, NonFiniteGradientIsRejected) {
  Vector g = Vector::Ones(2);
  g(1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(backtrack(Vector::Zero(2), g, dense_op(Matrix::Identity(2, 2), true), 1.0, {},
                         linear_f(Matrix::Identity(2, 2)), 1.0),
               NumericalBreakdown);
}

TEST(Backtrack, ParameterValidation) {
  LineSearchParams p;
  p.alpha2 = 0.6;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p = {};
  p.beta = 1.0;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p = {};
  p.alpha1 = 0.45;
  p.alpha2 = 0.45;
  EXPECT_NO_THROW(p.validate());
}

TEST(Backtrack, DefaultCapFormula) {
  LineSearchParams p;
  const int n = default_max_backtracks(1.0, 1.0, p);
  EXPECT_EQ(n, 1 + static_cast<int>(std::ceil(std::log(8.0 / 0.25) / std::log(2.0))) + 8);
}
