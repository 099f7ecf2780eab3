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
#include "qnpe/linear_solver.hpp"

using namespace qnpe;

namespace {

// I + P with sym(P) positive semidefinite; optionally symmetric.
Matrix well_posed(int d, bool symmetric, Rng& rng) {
  const Matrix g = oracle::gaussian(d, d, rng);
  Matrix a = Matrix::Identity(d, d) + g * g.transpose() / d;
  if (!symmetric) {
    const Matrix h = oracle::gaussian(d, d, rng);
    a += (h - h.transpose()) / std::sqrt(static_cast<double>(d));
  }
  return a;
}

}  // namespace

TEST(LinearSolve, IdentityInOneIteration) {
  auto counter = std::make_shared<MatvecCounter>();
  const LinearOp op = dense_op(Matrix::Identity(5, 5), true, counter);
  const Vector b = Vector::LinSpaced(5, 1, 5);
  const SolveReport r = linear_solve(op, b, 1e-10);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 1);
  EXPECT_LE((r.solution - b).norm(), 1e-14);
  EXPECT_LE(r.residual_norm, 1e-14);
}

TEST(LinearSolve, DiagonalInverse) {
  Matrix a = Matrix::Zero(3, 3);
  a.diagonal() << 1, 2, 3;
  const SolveReport r = linear_solve(dense_op(a, true), Vector::Ones(3), 1e-10);
  ASSERT_TRUE(r.converged);
  EXPECT_NEAR(r.solution(0), 1.0, 1e-8);
  EXPECT_NEAR(r.solution(1), 0.5, 1e-8);
  EXPECT_NEAR(r.solution(2), 1.0 / 3.0, 1e-8);
}

TEST(LinearSolve, ZeroRightHandSideShortCircuits) {
  auto counter = std::make_shared<MatvecCounter>();
  const SolveReport r = linear_solve(dense_op(Matrix::Identity(4, 4), true, counter), Vector::Zero(4), 0.1);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 0);
  EXPECT_EQ(r.solution, Vector::Zero(4));
  EXPECT_EQ(counter->value(), 0);
}

TEST(LinearSolve, ContractHoldsOnRandomNonsymmetricSystems) {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = well_posed(20, false, rng);
    const Vector b = oracle::gaussian_vector(20, rng);
    const SolveReport r = linear_solve(dense_op(a, false), b, 0.25);
    ASSERT_TRUE(r.converged);
    EXPECT_LE((a * r.solution - b).norm(), 0.25 * r.solution.norm() + 1e-8);
  }
}

TEST(LinearSolve, MatvecAccounting) {
  Rng rng(2);
  for (bool symmetric : {true, false}) {
    auto counter = std::make_shared<MatvecCounter>();
    const Matrix a = well_posed(15, symmetric, rng);
    const SolveReport r = linear_solve(dense_op(a, symmetric, counter), oracle::gaussian_vector(15, rng), 1e-3);
    ASSERT_TRUE(r.converged);
    const std::int64_t expected = symmetric ? r.iterations + 1 : 2 * r.iterations + 1;
    EXPECT_EQ(r.matvecs, expected);
    EXPECT_EQ(counter->value(), expected);
  }
}

TEST(LinearSolve, SolutionNormsIncreaseAndResidualsDecrease) {
  Rng rng(3);
  for (bool symmetric : {true, false}) {
    const Matrix a = well_posed(25, symmetric, rng);
    const SolveReport r = linear_solve(dense_op(a, symmetric), oracle::gaussian_vector(25, rng), 1e-8, 0, true);
    ASSERT_TRUE(r.converged);
    for (std::size_t k = 1; k < r.solution_norms.size(); ++k)
      EXPECT_GE(r.solution_norms[k], r.solution_norms[k - 1] * (1 - 1e-12));
    if (symmetric)
      for (std::size_t k = 1; k < r.residual_norms.size(); ++k)
        EXPECT_LE(r.residual_norms[k], r.residual_norms[k - 1] * (1 + 1e-12));
  }
}

TEST(LinearSolve, ReorthogonalizationMatchesPlainCglsOnEasySystems) {
  Rng rng(7);
  const Matrix a = well_posed(10, false, rng);
  const Vector b = oracle::gaussian_vector(10, rng);
  const SolveReport x = linear_solve(dense_op(a, false), b, 1e-6, 0, false, true);
  const SolveReport y = linear_solve(dense_op(a, false), b, 1e-6, 0, false, false);
  ASSERT_TRUE(x.converged && y.converged);
  EXPECT_LE((x.solution - y.solution).norm(), 1e-8 * y.solution.norm());
}

TEST(LinearSolve, ExhaustedBudgetIsReported) {
  Rng rng(4);
  const Matrix a = well_posed(30, false, rng);
  const SolveReport r = linear_solve(dense_op(a, false), oracle::gaussian_vector(30, rng), 1e-14, 2);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations, 2);
}

TEST(LinearSolve, NonsymmetricWithoutTransposeIsRejected) {
  LinearOp op;
  op.dim = 2;
  op.apply = [](const Vector& v) { return v; };
  EXPECT_THROW(linear_solve(op, Vector::Ones(2), 0.1), InvalidArgument);
}

TEST(LinearSolve, NonFiniteInputBreaksDown) {
  LinearOp op = dense_op(Matrix::Identity(2, 2), true);
  op.apply = [](const Vector& v) { return Vector(v * std::numeric_limits<double>::quiet_NaN()); };
  EXPECT_THROW(linear_solve(op, Vector::Ones(2), 0.1), NumericalBreakdown);
}

TEST(ShiftedIdentity, AppliesIPlusEtaB) {
  Rng rng(5);
  const Matrix b = oracle::gaussian(6, 6, rng);
  auto counter = std::make_shared<MatvecCounter>();
  const LinearOp op = shifted_identity_op(dense_op(b, false, counter), 0.3);
  const Vector v = oracle::gaussian_vector(6, rng);
  EXPECT_LE((op.mul(v) - (v + 0.3 * b * v)).norm(), 1e-13);
  EXPECT_LE((op.mul_t(v) - (v + 0.3 * b.transpose() * v)).norm(), 1e-13);
  EXPECT_EQ(counter->value(), 2);
}

TEST(LinearOpTest, IsLinear) {
  Rng rng(6);
  const LinearOp op = dense_op(oracle::gaussian(8, 8, rng));
  const Vector u = oracle::gaussian_vector(8, rng), v = oracle::gaussian_vector(8, rng);
  const Vector lhs = op.mul(2.5 * u + v);
  EXPECT_LE((lhs - (2.5 * op.mul(u) + op.mul(v))).norm(), 1e-10 * lhs.norm());
}
