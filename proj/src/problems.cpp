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

#include "qnpe/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>

namespace qnpe {

std::string family_name(ProblemFamily f) {
  switch (f) {
    case ProblemFamily::kQuadratic: return "quadratic";
    case ProblemFamily::kLogSumExp: return "logsumexp";
    case ProblemFamily::kBilinear: return "bilinear";
    case ProblemFamily::kSparse: return "sparse";
    case ProblemFamily::kCustom: return "custom";
  }
  return "custom";
}

ProblemFamily family_from_name(const std::string& name) {
  if (name == "quadratic") return ProblemFamily::kQuadratic;
  if (name == "logsumexp") return ProblemFamily::kLogSumExp;
  if (name == "bilinear") return ProblemFamily::kBilinear;
  if (name == "sparse") return ProblemFamily::kSparse;
  throw InvalidArgument("unknown problem family '" + name + "'");
}

nlohmann::json ProblemDescriptor::to_json() const {
  nlohmann::json j;
  j["family"] = family_name(family);
  j["seed"] = seed;
  j["mu"] = mu;
  j["l1"] = l1;
  switch (family) {
    case ProblemFamily::kQuadratic:
      j["dim"] = dim;
      break;
    case ProblemFamily::kLogSumExp:
      j["dim"] = dim;
      j["n_terms"] = n_terms;
      j["smoothing"] = smoothing;
      break;
    case ProblemFamily::kBilinear:
      j["m"] = m;
      j["n"] = n;
      break;
    case ProblemFamily::kSparse:
      j["dim"] = dim;
      j["avg_degree"] = avg_degree;
      j["eps_frac"] = eps_frac;
      break;
    case ProblemFamily::kCustom:
      j["dim"] = dim;
      break;
  }
  return j;
}

namespace {

template <typename T>
T required(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw InvalidArgument(std::string("problem: missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InvalidArgument(std::string("problem: field '") + key + "' has the wrong type");
  }
}

template <typename T>
T optional_field(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InvalidArgument(std::string("problem: field '") + key + "' has the wrong type");
  }
}

}  // namespace

ProblemDescriptor ProblemDescriptor::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidArgument("problem: descriptor must be an object");
  ProblemDescriptor d;
  d.family = family_from_name(required<std::string>(j, "family"));
  d.seed = optional_field<std::uint64_t>(j, "seed", 0);
  d.mu = required<double>(j, "mu");
  d.l1 = required<double>(j, "l1");
  switch (d.family) {
    case ProblemFamily::kQuadratic:
      d.dim = required<int>(j, "dim");
      break;
    case ProblemFamily::kLogSumExp:
      d.dim = required<int>(j, "dim");
      d.n_terms = required<int>(j, "n_terms");
      d.smoothing = optional_field<double>(j, "smoothing", 1.0);
      break;
    case ProblemFamily::kBilinear:
      d.m = required<int>(j, "m");
      d.n = required<int>(j, "n");
      d.dim = d.m + d.n;
      break;
    case ProblemFamily::kSparse:
      d.dim = required<int>(j, "dim");
      d.avg_degree = required<int>(j, "avg_degree");
      d.eps_frac = optional_field<double>(j, "eps_frac", 0.1);
      break;
    case ProblemFamily::kCustom:
      throw InvalidArgument("problem: custom problems cannot be regenerated");
  }
  return d;
}

namespace {

Matrix random_orthogonal(int d, Rng& rng) {
  Matrix g(d, d);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) g(i, j) = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(d, d);
  // Fix column signs so Q is Haar distributed.
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < d; ++j)
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  return q;
}

double top_singular_value(const Matrix& c) {
  if (c.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(c);
  return svd.singularValues()(0);
}

}  // namespace

Problem make_quadratic_from_matrix(const Matrix& a, const Vector& root) {
  if (a.rows() != a.cols() || a.rows() != root.size() || a.rows() == 0)
    throw InvalidArgument("quadratic: shape mismatch");
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, a.cwiseAbs().maxCoeff()))
    throw InvalidArgument("quadratic: matrix must be symmetric");
  auto held = std::make_shared<const Matrix>(0.5 * (a + a.transpose()));
  auto z_star = std::make_shared<const Vector>(root);
  Eigen::SelfAdjointEigenSolver<Matrix> es(*held, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (lo < 0) throw InvalidArgument("quadratic: matrix must be positive semidefinite");
  if (hi <= 0) throw InvalidArgument("quadratic: matrix must be nonzero");

  Problem p;
  p.dim = static_cast<int>(a.rows());
  p.mu = lo;
  p.l1 = hi;
  p.l2 = 0.0;
  p.structure = StructureSpec::symmetric();
  p.known_root = root;
  p.eval = [held, z_star](const Vector& z) -> Vector { return (*held) * (z - *z_star); };
  p.jacobian_matvec = [held](const Vector&, const Vector& v) -> Vector { return (*held) * v; };
  p.jacobian_transpose_matvec = p.jacobian_matvec;
  p.objective = [held, z_star](const Vector& z) {
    const Vector e = z - *z_star;
    return 0.5 * e.dot((*held) * e);
  };
  p.descriptor.family = ProblemFamily::kCustom;
  p.descriptor.dim = p.dim;
  p.descriptor.mu = p.mu;
  p.descriptor.l1 = p.l1;
  return p;
}

Problem make_quadratic_min(int d, double mu, double l1, std::uint64_t seed) {
  if (d < 1) throw InvalidArgument("quadratic: d must be positive");
  if (!(mu > 0) || !(mu <= l1) || !std::isfinite(l1))
    throw InvalidArgument("quadratic: requires 0 < mu <= l1");
  if (d == 1 && mu != l1) throw InvalidArgument("quadratic: d = 1 needs mu = l1");
  Rng rng(seed);
  std::uniform_real_distribution<double> unif(mu, l1);
  Vector lambda(d);
  lambda[0] = mu;
  lambda[d - 1] = l1;
  for (int i = 1; i < d - 1; ++i) lambda[i] = unif(rng);
  const Matrix q = random_orthogonal(d, rng);
  Matrix a = q * lambda.asDiagonal() * q.transpose();
  a = 0.5 * (a + a.transpose());
  const Vector root = random_normal_vector(d, rng);

  Problem p = make_quadratic_from_matrix(a, root);
  // The generated spectrum is known exactly; keep the requested constants.
  p.mu = mu;
  p.l1 = l1;
  p.descriptor = ProblemDescriptor{};
  p.descriptor.family = ProblemFamily::kQuadratic;
  p.descriptor.dim = d;
  p.descriptor.mu = mu;
  p.descriptor.l1 = l1;
  p.descriptor.seed = seed;
  return p;
}

namespace {

struct LogSumExpData {
  Matrix a;  // n_terms x d
  Vector b;
  double mu;
  double rho;

  // Returns the softmax weights at z and, optionally, the objective.
  Vector weights(const Vector& z, double* f = nullptr) const {
    Vector t = (a * z - b) / rho;
    const double tmax = t.maxCoeff();
    Vector e = (t.array() - tmax).exp();
    const double sum = e.sum();
    if (f) *f = rho * (tmax + std::log(sum)) + 0.5 * mu * z.squaredNorm();
    return e / sum;
  }
  Vector grad(const Vector& z) const { return a.transpose() * weights(z) + mu * z; }
  Matrix hessian(const Vector& z) const {
    const Vector p = weights(z);
    Matrix inner = Matrix(p.asDiagonal()) - p * p.transpose();
    Matrix h = a.transpose() * inner * a / rho;
    h.diagonal().array() += mu;
    return h;
  }
};

Vector newton_root(const LogSumExpData& data, int d, double l1) {
  Vector z = Vector::Zero(d);
  double f = 0.0;
  data.weights(z, &f);
  Vector g = data.grad(z);
  for (int it = 0; it < 500 && g.norm() > 1e-12; ++it) {
    const Matrix h = data.hessian(z);
    const Vector step = h.ldlt().solve(-g);
    double t = 1.0;
    Vector trial;
    double f_trial = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      trial = z + t * step;
      data.weights(trial, &f_trial);
      if (f_trial <= f + 1e-4 * t * g.dot(step) || data.grad(trial).norm() < g.norm()) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
    z = trial;
    f = f_trial;
    g = data.grad(z);
  }
  if (!z.allFinite() || g.norm() > 1e-10 * l1 * (1.0 + z.norm()))
    throw GenerationError("logsumexp: Newton root finding failed, |F| = " + std::to_string(g.norm()));
  return z;
}

Problem logsumexp_problem(std::shared_ptr<const LogSumExpData> data) {
  const int d = static_cast<int>(data->a.cols());
  double max_row = 0.0;
  for (int i = 0; i < data->a.rows(); ++i) max_row = std::max(max_row, data->a.row(i).norm());

  Problem p;
  p.dim = d;
  p.mu = data->mu;
  // The Hessian of the smoothed max is a covariance under the softmax weights,
  // bounded by max_i |a_i|^2 / rho.
  p.l1 = data->mu + max_row * max_row / data->rho;
  p.l2 = 2.0 * max_row * max_row * max_row / (data->rho * data->rho);
  p.structure = StructureSpec::symmetric();
  p.eval = [data](const Vector& z) { return data->grad(z); };
  p.jacobian_matvec = [data](const Vector& z, const Vector& v) -> Vector {
    const Vector w = data->weights(z);
    const Vector av = data->a * v;
    const Vector inner = w.cwiseProduct(av) - w * w.dot(av);
    return data->a.transpose() * inner / data->rho + data->mu * v;
  };
  p.jacobian_transpose_matvec = p.jacobian_matvec;
  p.objective = [data](const Vector& z) {
    double f = 0.0;
    data->weights(z, &f);
    return f;
  };
  p.known_root = newton_root(*data, d, p.l1);
  return p;
}

}  // namespace

Problem make_logsumexp_from_data(const Matrix& a, const Vector& b, double mu, double smoothing) {
  if (a.rows() < 1 || a.cols() < 1 || b.size() != a.rows())
    throw InvalidArgument("logsumexp: shape mismatch");
  if (!(mu > 0) || !(smoothing > 0)) throw InvalidArgument("logsumexp: requires mu > 0 and smoothing > 0");
  auto data = std::make_shared<const LogSumExpData>(LogSumExpData{a, b, mu, smoothing});
  Problem p = logsumexp_problem(data);
  p.descriptor.family = ProblemFamily::kCustom;
  p.descriptor.dim = p.dim;
  p.descriptor.mu = mu;
  p.descriptor.l1 = p.l1;
  return p;
}

Problem make_logsumexp_min(int d, int n_terms, double mu, double smoothing, std::uint64_t seed,
                           std::optional<double> l1_target) {
  if (d < 1 || n_terms < 1) throw InvalidArgument("logsumexp: d and n_terms must be positive");
  if (!(mu > 0) || !(smoothing > 0)) throw InvalidArgument("logsumexp: requires mu > 0 and smoothing > 0");
  if (l1_target && !(*l1_target >= mu)) throw InvalidArgument("logsumexp: l1 target below mu");
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix a(n_terms, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < n_terms; ++i) a(i, j) = normal(rng) / std::sqrt(static_cast<double>(d));
  Vector b(n_terms);
  for (int i = 0; i < n_terms; ++i) b[i] = normal(rng);
  if (l1_target) {
    double max_row = 0.0;
    for (int i = 0; i < n_terms; ++i) max_row = std::max(max_row, a.row(i).norm());
    const double wanted = std::sqrt((*l1_target - mu) * smoothing);
    a *= max_row > 0 ? wanted / max_row : 0.0;
  }
  auto data = std::make_shared<const LogSumExpData>(LogSumExpData{a, b, mu, smoothing});
  Problem p = logsumexp_problem(data);
  if (l1_target) p.l1 = std::max(p.l1, *l1_target);
  p.descriptor.family = ProblemFamily::kLogSumExp;
  p.descriptor.dim = d;
  p.descriptor.n_terms = n_terms;
  p.descriptor.mu = mu;
  p.descriptor.smoothing = smoothing;
  p.descriptor.l1 = l1_target ? *l1_target : 0.0;
  p.descriptor.seed = seed;
  return p;
}

Problem make_bilinear_from_matrix(const Matrix& c, double mu) {
  const int m = static_cast<int>(c.rows());
  const int n = static_cast<int>(c.cols());
  if (m < 1 || n < 1) throw InvalidArgument("bilinear: m, n >= 1 required");
  if (!(mu >= 0)) throw InvalidArgument("bilinear: mu must be nonnegative");
  auto data = std::make_shared<const BilinearData>(BilinearData{c, mu, m, n});
  const double sigma = top_singular_value(c);
  const double l1 = std::sqrt(mu * mu + sigma * sigma);

  Problem p;
  p.dim = m + n;
  p.mu = mu;
  // Any positive constant bounds the zero operator.
  p.l1 = l1 > 0 ? l1 : 1.0;
  p.l2 = 0.0;
  p.structure = StructureSpec::j_symmetric(m, n);
  p.known_root = Vector::Zero(m + n);
  p.eval = [data](const Vector& z) -> Vector {
    Vector out(z.size());
    const auto x = z.head(data->m);
    const auto y = z.tail(data->n);
    out.head(data->m) = data->mu * x + data->c * y;
    out.tail(data->n) = -data->c.transpose() * x + data->mu * y;
    return out;
  };
  p.jacobian_matvec = [data](const Vector&, const Vector& v) -> Vector {
    Vector out(v.size());
    out.head(data->m) = data->mu * v.head(data->m) + data->c * v.tail(data->n);
    out.tail(data->n) = -data->c.transpose() * v.head(data->m) + data->mu * v.tail(data->n);
    return out;
  };
  p.jacobian_transpose_matvec = [data](const Vector&, const Vector& v) -> Vector {
    Vector out(v.size());
    out.head(data->m) = data->mu * v.head(data->m) - data->c * v.tail(data->n);
    out.tail(data->n) = data->c.transpose() * v.head(data->m) + data->mu * v.tail(data->n);
    return out;
  };
  p.bilinear = *data;
  p.descriptor.family = ProblemFamily::kCustom;
  p.descriptor.dim = m + n;
  p.descriptor.m = m;
  p.descriptor.n = n;
  p.descriptor.mu = mu;
  p.descriptor.l1 = p.l1;
  return p;
}

Problem make_bilinear_minimax(int m, int n, double mu, double l1, std::uint64_t seed) {
  if (m < 1 || n < 1) throw InvalidArgument("bilinear: m, n >= 1 required");
  if (!(mu >= 0) || !(mu < l1) || !std::isfinite(l1)) throw InvalidArgument("bilinear: requires 0 <= mu < l1");
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix c(m, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < m; ++i) c(i, j) = normal(rng);
  c *= std::sqrt(l1 * l1 - mu * mu) / top_singular_value(c);
  Problem p = make_bilinear_from_matrix(c, mu);
  p.l1 = l1;
  p.descriptor = ProblemDescriptor{};
  p.descriptor.family = ProblemFamily::kBilinear;
  p.descriptor.dim = m + n;
  p.descriptor.m = m;
  p.descriptor.n = n;
  p.descriptor.mu = mu;
  p.descriptor.l1 = l1;
  p.descriptor.seed = seed;
  return p;
}

namespace {

struct SparseData {
  std::shared_ptr<const SparsityPattern> pattern;
  std::vector<double> values;  // aligned with the pattern CSR
  Vector offset;
  double eps = 0.0;

  Vector mul(const Vector& v) const {
    Vector out(v.size());
    for (int i = 0; i < pattern->dim(); ++i) {
      double acc = 0.0;
      for (int k = pattern->row_ptr()[i]; k < pattern->row_ptr()[i + 1]; ++k)
        acc += values[k] * v[pattern->col_idx()[k]];
      out[i] = acc;
    }
    return out;
  }
  Vector mul_t(const Vector& v) const {
    Vector out = Vector::Zero(v.size());
    for (int i = 0; i < pattern->dim(); ++i)
      for (int k = pattern->row_ptr()[i]; k < pattern->row_ptr()[i + 1]; ++k)
        out[pattern->col_idx()[k]] += values[k] * v[i];
    return out;
  }
};

}  // namespace

Problem make_sparse_equation(int d, int avg_degree, double mu, double l1, std::uint64_t seed,
                             double eps_frac) {
  if (d < 2) throw InvalidArgument("sparse: d >= 2 required");
  if (avg_degree < 0 || avg_degree >= d) throw InvalidArgument("sparse: requires 0 <= avg_degree < d");
  if (!(mu >= 0) || !(l1 > 0) || !(eps_frac >= 0) || !(eps_frac < 1))
    throw InvalidArgument("sparse: invalid constants");
  const double l_lin = (1.0 - eps_frac) * l1;
  if (!(mu < l_lin)) throw GenerationError("sparse: mu must be below (1 - eps_frac) * l1");

  Rng rng(seed);
  std::vector<std::pair<int, int>> entries;
  std::vector<int> cols(d - 1);
  for (int i = 0; i < d; ++i) {
    std::iota(cols.begin(), cols.end(), 0);
    for (int& c : cols)
      if (c >= i) ++c;
    for (int k = 0; k < avg_degree; ++k) {
      std::uniform_int_distribution<int> pick(k, d - 2);
      std::swap(cols[k], cols[pick(rng)]);
      entries.emplace_back(i, cols[k]);
    }
  }
  auto pattern = SparsityPattern::make(d, entries);

  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix off = Matrix::Zero(d, d);
  for (const auto& [i, j] : pattern->off_diagonal()) off(i, j) = normal(rng);
  const double off_norm = top_singular_value(off);
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (off + off.transpose()), Eigen::EigenvaluesOnly);
  const double lam_min = std::min(0.0, es.eigenvalues().minCoeff());
  double scale = 0.0;
  if (off_norm - lam_min > 0) scale = (l_lin - mu) / (off_norm - lam_min);
  const double shift = mu - scale * lam_min;
  const Matrix mat = scale * off + shift * Matrix::Identity(d, d);
  {
    Eigen::SelfAdjointEigenSolver<Matrix> check(0.5 * (mat + mat.transpose()), Eigen::EigenvaluesOnly);
    if (check.eigenvalues().minCoeff() < mu * (1 - 1e-10) - 1e-14 ||
        top_singular_value(mat) > l_lin * (1 + 1e-10))
      throw GenerationError("sparse: spectral scaling failed");
  }

  auto data = std::make_shared<SparseData>();
  data->pattern = pattern;
  data->values.resize(pattern->nnz());
  for (int i = 0; i < d; ++i)
    for (int k = pattern->row_ptr()[i]; k < pattern->row_ptr()[i + 1]; ++k)
      data->values[k] = mat(i, pattern->col_idx()[k]);
  data->eps = eps_frac * l1;
  // Plant the root: choose the offset so that F(root) = 0 exactly in exact arithmetic.
  const Vector root = random_normal_vector(d, rng);
  data->offset = data->mul(root) + data->eps * root.array().tanh().matrix();
  std::shared_ptr<const SparseData> held = data;

  Problem p;
  p.dim = d;
  p.mu = mu;
  p.l1 = l1;
  // sup |tanh''| = 4 / (3 sqrt 3)
  p.l2 = data->eps * 4.0 / (3.0 * std::sqrt(3.0));
  p.structure = StructureSpec::sparse(pattern);
  p.known_root = root;
  p.eval = [held](const Vector& z) -> Vector {
    return held->mul(z) + held->eps * z.array().tanh().matrix() - held->offset;
  };
  p.jacobian_matvec = [held](const Vector& z, const Vector& v) -> Vector {
    const Vector sech2 = 1.0 - z.array().tanh().square();
    return held->mul(v) + held->eps * sech2.cwiseProduct(v);
  };
  p.jacobian_transpose_matvec = [held](const Vector& z, const Vector& v) -> Vector {
    const Vector sech2 = 1.0 - z.array().tanh().square();
    return held->mul_t(v) + held->eps * sech2.cwiseProduct(v);
  };
  p.descriptor.family = ProblemFamily::kSparse;
  p.descriptor.dim = d;
  p.descriptor.avg_degree = avg_degree;
  p.descriptor.mu = mu;
  p.descriptor.l1 = l1;
  p.descriptor.eps_frac = eps_frac;
  p.descriptor.seed = seed;
  return p;
}

Problem make_problem(const ProblemDescriptor& desc) {
  switch (desc.family) {
    case ProblemFamily::kQuadratic:
      return make_quadratic_min(desc.dim, desc.mu, desc.l1, desc.seed);
    case ProblemFamily::kLogSumExp:
      return make_logsumexp_min(desc.dim, desc.n_terms, desc.mu, desc.smoothing, desc.seed,
                                desc.l1 > 0 ? std::optional<double>(desc.l1) : std::nullopt);
    case ProblemFamily::kBilinear:
      return make_bilinear_minimax(desc.m, desc.n, desc.mu, desc.l1, desc.seed);
    case ProblemFamily::kSparse:
      return make_sparse_equation(desc.dim, desc.avg_degree, desc.mu, desc.l1, desc.seed, desc.eps_frac);
    case ProblemFamily::kCustom:
      break;
  }
  throw InvalidArgument("custom problems cannot be regenerated from a descriptor");
}

Matrix dense_jacobian(const Problem& problem, const Vector& z) {
  if (!problem.jacobian_matvec) throw InvalidArgument("problem has no Jacobian matvec");
  Matrix j(problem.dim, problem.dim);
  for (int k = 0; k < problem.dim; ++k) j.col(k) = problem.jacobian_matvec(z, Vector::Unit(problem.dim, k));
  return j;
}

namespace {

Vector project_ball(const Vector& z, const Vector& center, double radius) {
  const Vector off = z - center;
  const double n = off.norm();
  return n <= radius ? z : Vector(center + off * (radius / n));
}

double weak_gap_ball(const Problem& problem, const Vector& z, const WeakGapBall& ball) {
  if (!(ball.radius > 0)) throw InvalidArgument("gap: radius must be positive");
  if (ball.center.size() != problem.dim) throw InvalidArgument("gap: center dimension mismatch");
  if (!problem.jacobian_transpose_matvec)
    throw InvalidArgument("gap: weak gap needs the Jacobian transpose matvec");
  auto value = [&](const Vector& zp) { return problem.eval(zp).dot(z - zp); };
  const double step = 1.0 / (2.0 * problem.l1);
  Rng rng(0x5eed);
  double best = -std::numeric_limits<double>::infinity();
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int start = 0; start < 8; ++start) {
    Vector zp;
    if (start == 0) {
      zp = ball.center;
    } else if (start == 1) {
      zp = project_ball(z, ball.center, ball.radius);
    } else {
      const double r = ball.radius * std::pow(unif(rng), 1.0 / problem.dim);
      zp = ball.center + r * random_unit_vector(problem.dim, rng);
    }
    double val = value(zp);
    best = std::max(best, val);
    for (int it = 0; it < 500; ++it) {
      const Vector f = problem.eval(zp);
      const Vector grad = problem.jacobian_transpose_matvec(zp, z - zp) - f;
      const Vector next = project_ball(zp + step * grad, ball.center, ball.radius);
      const double moved = (next - zp).norm();
      zp = next;
      val = value(zp);
      best = std::max(best, val);
      if (moved <= 1e-14 * (1.0 + zp.norm())) break;
    }
  }
  return best;
}

// max over [lo, hi] of g t - (c/2) t^2 (c >= 0), per coordinate.
double box_max_concave(const Vector& g, double c, const Vector& lo, const Vector& hi) {
  double total = 0.0;
  for (int i = 0; i < g.size(); ++i) {
    double t;
    if (c > 0) {
      t = std::clamp(g[i] / c, lo[i], hi[i]);
    } else {
      t = g[i] >= 0 ? hi[i] : lo[i];
    }
    total += g[i] * t - 0.5 * c * t * t;
  }
  return total;
}

double primal_dual_box(const Problem& problem, const Vector& z, const PrimalDualBox& box) {
  if (!problem.bilinear) throw InvalidArgument("gap: primal-dual box gap needs a bilinear problem");
  const auto& b = *problem.bilinear;
  if (box.x_lo.size() != b.m || box.x_hi.size() != b.m || box.y_lo.size() != b.n || box.y_hi.size() != b.n)
    throw InvalidArgument("gap: box dimension mismatch");
  if ((box.x_lo.array() > box.x_hi.array()).any() || (box.y_lo.array() > box.y_hi.array()).any())
    throw InvalidArgument("gap: empty box");
  const Vector x = z.head(b.m);
  const Vector y = z.tail(b.n);
  // max_y' f(x, y') = (mu/2)|x|^2 + max_y' [(C^T x)^T y' - (mu/2)|y'|^2]
  const double upper = 0.5 * b.mu * x.squaredNorm() + box_max_concave(b.c.transpose() * x, b.mu, box.y_lo, box.y_hi);
  // min_x' f(x', y) = -(mu/2)|y|^2 - max_x' [(-C y)^T x' - (mu/2)|x'|^2]
  const double lower = -0.5 * b.mu * y.squaredNorm() - box_max_concave(-(b.c * y), b.mu, box.x_lo, box.x_hi);
  return upper - lower;
}

}  // namespace

double evaluate_gap(const Problem& problem, const Vector& z, const GapSpec& spec) {
  if (z.size() != problem.dim) throw InvalidArgument("gap: point dimension mismatch");
  if (const auto* ball = std::get_if<WeakGapBall>(&spec)) return weak_gap_ball(problem, z, *ball);
  if (std::holds_alternative<FunctionValueGap>(spec)) {
    if (!problem.objective || !problem.known_root)
      throw InvalidArgument("gap: function-value gap needs a minimization problem with a known root");
    return problem.objective(z) - problem.objective(*problem.known_root);
  }
  return primal_dual_box(problem, z, std::get<PrimalDualBox>(spec));
}

double max_sq_distance(const Vector& z0, const GapSpec& spec) {
  if (const auto* ball = std::get_if<WeakGapBall>(&spec)) {
    const double r = (z0 - ball->center).norm() + ball->radius;
    return r * r;
  }
  if (const auto* box = std::get_if<PrimalDualBox>(&spec)) {
    const int m = static_cast<int>(box->x_lo.size());
    const int n = static_cast<int>(box->y_lo.size());
    if (z0.size() != m + n) throw InvalidArgument("gap: box dimension mismatch");
    Vector lo(m + n), hi(m + n);
    lo << box->x_lo, box->y_lo;
    hi << box->x_hi, box->y_hi;
    double total = 0.0;
    for (int i = 0; i < m + n; ++i)
      total += std::max((z0[i] - lo[i]) * (z0[i] - lo[i]), (z0[i] - hi[i]) * (z0[i] - hi[i]));
    return total;
  }
  throw InvalidArgument("gap: function-value gap has no bounded set");
}

}  // namespace qnpe
