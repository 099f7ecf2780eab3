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

#include "qnpe/spectral.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

namespace qnpe {

Matrix LanczosResult::tridiagonal() const {
  const int n = static_cast<int>(alpha.size());
  Matrix t = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) t(i, i) = alpha[i];
  for (int i = 0; i + 1 < n; ++i) t(i, i + 1) = t(i + 1, i) = beta[i];
  return t;
}

LanczosResult lanczos(const std::function<Vector(const Vector&)>& apply_sym, int d, int n_steps, Rng& rng,
                      bool reorthogonalize) {
  if (d < 1) throw InvalidArgument("lanczos: d must be positive");
  if (n_steps < 1) throw InvalidArgument("lanczos: n_steps must be positive");
  const int cap = std::min(n_steps, d);
  Matrix v(d, cap);
  std::vector<double> alpha, beta;
  v.col(0) = random_unit_vector(d, rng);
  double norm_est = 0.0;
  double beta_prev = 0.0;
  LanczosResult res;
  for (int k = 0; k < cap; ++k) {
    Vector w = apply_sym(v.col(k));
    if (!w.allFinite()) throw NumericalBreakdown("lanczos: non-finite matvec");
    const double a = v.col(k).dot(w);
    w -= a * v.col(k);
    if (k > 0) w -= beta_prev * v.col(k - 1);
    if (reorthogonalize) {
      for (int pass = 0; pass < 2; ++pass) {
        const Vector coeff = v.leftCols(k + 1).transpose() * w;
        w -= v.leftCols(k + 1) * coeff;
      }
    }
    alpha.push_back(a);
    const double b = w.norm();
    if (!std::isfinite(a) || !std::isfinite(b)) throw NumericalBreakdown("lanczos: non-finite recurrence");
    norm_est = std::max(norm_est, std::abs(a) + beta_prev + b);
    res.steps_taken = k + 1;
    if (b <= 1e-12 * norm_est) {
      res.broke_down = true;
      break;
    }
    if (k + 1 == cap) break;
    beta.push_back(b);
    v.col(k + 1) = w / b;
    beta_prev = b;
  }
  res.alpha = Eigen::Map<Vector>(alpha.data(), static_cast<Eigen::Index>(alpha.size()));
  res.beta = Eigen::Map<Vector>(beta.data(), static_cast<Eigen::Index>(beta.size()));
  res.basis = v.leftCols(res.steps_taken);
  return res;
}

namespace {

// Number of eigenvalues strictly below x.
int sturm_count(const Vector& alpha, const Vector& beta, double x, double tiny) {
  int count = 0;
  double q = 1.0;
  for (int i = 0; i < alpha.size(); ++i) {
    const double b2 = i > 0 ? beta[i - 1] * beta[i - 1] : 0.0;
    q = alpha[i] - x - (i > 0 ? b2 / q : 0.0);
    if (q == 0.0) q = -tiny;
    if (q < 0) ++count;
  }
  return count;
}

// Largest (want_max) or smallest eigenvalue by bisection.
double bisect(const Vector& alpha, const Vector& beta, bool want_max, double lo, double hi, double tiny) {
  const int n = static_cast<int>(alpha.size());
  for (int it = 0; it < 4000; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const int c = sturm_count(alpha, beta, mid, tiny);
    const bool upper = want_max ? (c == n) : (c >= 1);
    if (upper)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

// Inverse iteration with a pivoted tridiagonal LU of (T - lambda I).
Vector inverse_iteration(const Vector& alpha, const Vector& beta, double lambda, double tiny) {
  const int n = static_cast<int>(alpha.size());
  std::vector<std::array<double, 3>> u(n);
  std::vector<double> l(std::max(n - 1, 0));
  std::vector<bool> swapped(std::max(n - 1, 0), false);
  std::array<double, 3> cur = {alpha[0] - lambda, n > 1 ? beta[0] : 0.0, 0.0};
  for (int k = 0; k < n; ++k) {
    if (k == n - 1) {
      if (std::abs(cur[0]) < tiny) cur[0] = cur[0] < 0 ? -tiny : tiny;
      u[k] = cur;
      break;
    }
    std::array<double, 3> nxt = {beta[k], alpha[k + 1] - lambda, k + 1 < n - 1 ? beta[k + 1] : 0.0};
    if (std::abs(nxt[0]) > std::abs(cur[0])) {
      std::swap(cur, nxt);
      swapped[k] = true;
    }
    if (std::abs(cur[0]) < tiny) cur[0] = cur[0] < 0 ? -tiny : tiny;
    const double m = nxt[0] / cur[0];
    l[k] = m;
    u[k] = cur;
    cur = {nxt[1] - m * cur[1], nxt[2] - m * cur[2], 0.0};
  }

  Vector x(n);
  for (int i = 0; i < n; ++i) x[i] = 1.0 + std::fmod(0.6180339887498949 * (i + 1), 1.0);
  x.normalize();
  for (int iter = 0; iter < 4; ++iter) {
    Vector b = x;
    for (int k = 0; k + 1 < n; ++k) {
      if (swapped[k]) std::swap(b[k], b[k + 1]);
      b[k + 1] -= l[k] * b[k];
    }
    for (int k = n - 1; k >= 0; --k) {
      double acc = b[k];
      if (k + 1 < n) acc -= u[k][1] * b[k + 1];
      if (k + 2 < n) acc -= u[k][2] * b[k + 2];
      b[k] = acc / u[k][0];
    }
    const double nb = b.norm();
    if (!(nb > 0) || !std::isfinite(nb)) break;
    x = b / nb;
  }
  Eigen::Index imax = 0;
  x.cwiseAbs().maxCoeff(&imax);
  if (x[imax] < 0) x = -x;
  return x;
}

}  // namespace

TridiagEigs tridiag_extreme_eigs(const Vector& alpha, const Vector& beta) {
  const int n = static_cast<int>(alpha.size());
  if (n < 1) throw InvalidArgument("tridiag: empty matrix");
  if (beta.size() != n - 1) throw InvalidArgument("tridiag: off-diagonal length must be N - 1");
  TridiagEigs out;
  if (n == 1) {
    out.lambda_max = out.lambda_min = alpha[0];
    out.z_max = out.z_min = Vector::Ones(1);
    return out;
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int i = 0; i < n; ++i) {
    const double r = (i > 0 ? std::abs(beta[i - 1]) : 0.0) + (i + 1 < n ? std::abs(beta[i]) : 0.0);
    lo = std::min(lo, alpha[i] - r);
    hi = std::max(hi, alpha[i] + r);
  }
  const double norm_t = std::max(std::abs(lo), std::abs(hi));
  const double eps = std::numeric_limits<double>::epsilon();
  const double tiny = eps * std::max(norm_t, std::numeric_limits<double>::min());
  const double pad = 2.0 * tiny + eps * norm_t;
  lo -= pad;
  hi += pad;
  out.lambda_max = bisect(alpha, beta, true, lo, hi, tiny);
  out.lambda_min = bisect(alpha, beta, false, lo, hi, tiny);
  out.z_max = inverse_iteration(alpha, beta, out.lambda_max, tiny);
  out.z_min = inverse_iteration(alpha, beta, out.lambda_min, tiny);
  return out;
}

Matrix SepResult::s_dense(int d) const {
  if (!case_two()) return Matrix::Zero(d, d);
  return scale * left * right.transpose();
}

double SepResult::s_frobenius_norm() const {
  if (!case_two()) return 0.0;
  return std::abs(scale) * left.norm() * right.norm();
}

namespace {

int step_formula(int d, double delta, double q, double factor) {
  if (d < 1) throw InvalidArgument("oracle: d must be positive");
  if (!(delta > 0)) throw InvalidArgument("oracle: delta must be positive");
  if (!(q > 0 && q < 1)) throw InvalidArgument("oracle: q must lie in (0, 1)");
  const double n = 0.25 * std::sqrt(2.0 * (1.0 + 1.0 / delta)) * std::log(factor * d / (q * q)) + 0.5;
  return static_cast<int>(std::ceil(n));
}

}  // namespace

int ext_evec_steps(int d, double delta, double q) { return step_formula(d, delta, q, 11.0); }
int max_svec_steps(int d, double delta, double q) { return step_formula(d, delta, q, 22.0); }

SepResult ext_evec(const LinearOp& w, double delta, double q, Rng& rng, bool reorthogonalize) {
  const int d = w.dim;
  const int n_steps = ext_evec_steps(d, delta, q);
  std::int64_t matvecs = 0;
  auto apply = [&](const Vector& v) -> Vector {
    if (w.symmetric) {
      ++matvecs;
      return w.mul(v);
    }
    matvecs += 2;
    return 0.5 * (w.mul(v) + w.mul_t(v));
  };
  const LanczosResult lz = lanczos(apply, d, n_steps, rng, reorthogonalize);
  const TridiagEigs eig = tridiag_extreme_eigs(lz.alpha, lz.beta);

  SepResult res;
  res.lanczos_steps = lz.steps_taken;
  res.matvecs = matvecs;
  res.gamma = std::max(eig.lambda_max, -eig.lambda_min);
  if (res.gamma <= 1.0) return res;
  res.sep_case = SepCase::kCaseII;
  if (eig.lambda_max >= -eig.lambda_min) {
    Vector u = lz.basis * eig.z_max;
    u.normalize();
    res.scale = 1.0;
    res.left = u;
    res.right = u;
  } else {
    Vector u = lz.basis * eig.z_min;
    u.normalize();
    res.scale = -1.0;
    res.left = u;
    res.right = u;
  }
  return res;
}

SepResult max_svec(const LinearOp& w, double delta, double q, Rng& rng, bool reorthogonalize) {
  const int d = w.dim;
  const int n_steps = max_svec_steps(d, delta, q);
  std::int64_t matvecs = 0;
  auto apply = [&](const Vector& x) -> Vector {
    Vector out(2 * d);
    out.head(d) = w.mul(x.tail(d));
    out.tail(d) = w.mul_t(x.head(d));
    matvecs += 2;
    return out;
  };
  const LanczosResult lz = lanczos(apply, 2 * d, n_steps, rng, reorthogonalize);
  const TridiagEigs eig = tridiag_extreme_eigs(lz.alpha, lz.beta);

  SepResult res;
  res.lanczos_steps = lz.steps_taken;
  res.matvecs = matvecs;
  res.gamma = eig.lambda_max / 3.0;
  if (res.gamma <= 1.0) {
    res.gamma = std::max(res.gamma, 0.0);
    return res;
  }
  Vector ritz = lz.basis * eig.z_max;
  ritz.normalize();
  res.sep_case = SepCase::kCaseII;
  res.scale = 2.0 / 3.0;
  res.left = ritz.head(d);
  res.right = ritz.tail(d);
  return res;
}

}  // namespace qnpe
