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

#include "qnpe/structure.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace qnpe {

std::shared_ptr<const SparsityPattern> SparsityPattern::make(
    int dim, const std::vector<std::pair<int, int>>& entries) {
  if (dim <= 0) throw InvalidArgument("sparsity pattern: dim must be positive");
  std::vector<std::set<int>> rows(dim);
  for (int i = 0; i < dim; ++i) rows[i].insert(i);
  for (const auto& [i, j] : entries) {
    if (i < 0 || j < 0 || i >= dim || j >= dim)
      throw InvalidArgument("sparsity pattern: index out of range");
    rows[i].insert(j);
  }
  auto p = std::make_shared<SparsityPattern>();
  p->dim_ = dim;
  p->row_ptr_.assign(dim + 1, 0);
  for (int i = 0; i < dim; ++i) {
    p->row_ptr_[i + 1] = p->row_ptr_[i] + static_cast<int>(rows[i].size());
    p->col_idx_.insert(p->col_idx_.end(), rows[i].begin(), rows[i].end());
  }
  return p;
}

bool SparsityPattern::contains(int row, int col) const {
  if (row < 0 || row >= dim_) return false;
  auto first = col_idx_.begin() + row_ptr_[row];
  auto last = col_idx_.begin() + row_ptr_[row + 1];
  return std::binary_search(first, last, col);
}

std::vector<std::pair<int, int>> SparsityPattern::off_diagonal() const {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < dim_; ++i)
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
      if (col_idx_[k] != i) out.emplace_back(i, col_idx_[k]);
  return out;
}

void StructureSpec::validate(int dim) const {
  if (dim <= 0) throw InvalidArgument("structure: dimension must be positive");
  switch (kind) {
    case StructureKind::kJSymmetric:
      if (m < 0 || n < 0 || m + n != dim)
        throw InvalidArgument("structure: JSymmetric requires m + n = d");
      break;
    case StructureKind::kSparse:
      if (!pattern) throw InvalidArgument("structure: Sparse requires a pattern");
      if (pattern->dim() != dim) throw InvalidArgument("structure: pattern dimension mismatch");
      break;
    default:
      break;
  }
}

std::string StructureSpec::name() const {
  switch (kind) {
    case StructureKind::kGeneral: return "general";
    case StructureKind::kSymmetric: return "symmetric";
    case StructureKind::kJSymmetric: return "j_symmetric";
    case StructureKind::kSparse: return "sparse";
  }
  return "unknown";
}

Vector StructureSpec::j_signs() const {
  Vector s = Vector::Ones(m + n);
  s.tail(n).setConstant(-1.0);
  return s;
}

bool operator==(const StructureSpec& a, const StructureSpec& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case StructureKind::kJSymmetric:
      return a.m == b.m && a.n == b.n;
    case StructureKind::kSparse:
      if (a.pattern == b.pattern) return true;
      if (!a.pattern || !b.pattern) return false;
      return a.pattern->dim() == b.pattern->dim() && a.pattern->row_ptr() == b.pattern->row_ptr() &&
             a.pattern->col_idx() == b.pattern->col_idx();
    default:
      return true;
  }
}

namespace {

void check_square(const Matrix& w, int expected = -1) {
  if (w.rows() != w.cols()) throw InvalidArgument("matrix must be square");
  if (expected >= 0 && w.rows() != expected) throw InvalidArgument("matrix dimension mismatch");
}

// Rebuilds the strictly lower triangle from the upper one so the structural
// predicate holds bit-for-bit.
void mirror_upper(const StructureSpec& st, Matrix& w) {
  const int d = static_cast<int>(w.rows());
  if (st.kind == StructureKind::kSymmetric) {
    for (int j = 0; j < d; ++j)
      for (int i = j + 1; i < d; ++i) w(i, j) = w(j, i);
  } else if (st.kind == StructureKind::kJSymmetric) {
    for (int j = 0; j < d; ++j)
      for (int i = j + 1; i < d; ++i) {
        const bool flip = (i < st.m) != (j < st.m);
        w(i, j) = flip ? -w(j, i) : w(j, i);
      }
  }
}

}  // namespace

Matrix project_subspace(const StructureSpec& structure, const Matrix& w) {
  check_square(w);
  const int d = static_cast<int>(w.rows());
  structure.validate(d);
  Matrix out = w;
  switch (structure.kind) {
    case StructureKind::kGeneral:
      break;
    case StructureKind::kSymmetric:
      for (int j = 0; j < d; ++j)
        for (int i = 0; i < j; ++i) out(i, j) = 0.5 * (w(i, j) + w(j, i));
      mirror_upper(structure, out);
      break;
    case StructureKind::kJSymmetric:
      for (int j = 0; j < d; ++j)
        for (int i = 0; i < j; ++i) {
          const bool flip = (i < structure.m) != (j < structure.m);
          out(i, j) = 0.5 * (w(i, j) + (flip ? -w(j, i) : w(j, i)));
        }
      mirror_upper(structure, out);
      break;
    case StructureKind::kSparse:
      for (int j = 0; j < d; ++j)
        for (int i = 0; i < d; ++i)
          if (!structure.pattern->contains(i, j)) out(i, j) = 0.0;
      break;
  }
  return out;
}

double structure_residual(const StructureSpec& structure, const Matrix& w) {
  check_square(w);
  const int d = static_cast<int>(w.rows());
  structure.validate(d);
  double worst = 0.0;
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) {
      double v = 0.0;
      switch (structure.kind) {
        case StructureKind::kGeneral:
          break;
        case StructureKind::kSymmetric:
          v = w(i, j) - w(j, i);
          break;
        case StructureKind::kJSymmetric: {
          const bool flip = (i < structure.m) != (j < structure.m);
          v = w(i, j) - (flip ? -w(j, i) : w(j, i));
          break;
        }
        case StructureKind::kSparse:
          if (!structure.pattern->contains(i, j)) v = w(i, j);
          break;
      }
      worst = std::max(worst, std::abs(v));
    }
  return worst;
}

StructuredMatrix StructuredMatrix::zero(const StructureSpec& structure, int dim) {
  structure.validate(dim);
  StructuredMatrix m;
  m.structure_ = structure;
  m.dim_ = dim;
  if (m.is_sparse())
    m.values_.assign(structure.pattern->nnz(), 0.0);
  else
    m.dense_ = Matrix::Zero(dim, dim);
  return m;
}

StructuredMatrix StructuredMatrix::identity(const StructureSpec& structure, int dim, double scale) {
  StructuredMatrix m = zero(structure, dim);
  m.add_identity(scale);
  return m;
}

StructuredMatrix StructuredMatrix::from_dense(const StructureSpec& structure, const Matrix& dense) {
  check_square(dense);
  const int d = static_cast<int>(dense.rows());
  StructuredMatrix m = zero(structure, d);
  if (m.is_sparse()) {
    const auto& p = *structure.pattern;
    for (int i = 0; i < d; ++i)
      for (int k = p.row_ptr()[i]; k < p.row_ptr()[i + 1]; ++k) m.values_[k] = dense(i, p.col_idx()[k]);
  } else {
    m.dense_ = project_subspace(structure, dense);
  }
  return m;
}

StructuredMatrix StructuredMatrix::from_storage(const StructureSpec& structure, int dim, Matrix dense,
                                                std::vector<double> values) {
  StructuredMatrix m = zero(structure, dim);
  if (m.is_sparse()) {
    if (values.size() != structure.pattern->nnz()) throw InvalidArgument("sparse storage size mismatch");
    m.values_ = std::move(values);
  } else {
    check_square(dense, dim);
    if (structure_residual(structure, dense) != 0.0)
      throw InvalidArgument("dense storage violates the structure");
    m.dense_ = std::move(dense);
  }
  return m;
}

Vector StructuredMatrix::apply(const Vector& v) const {
  if (v.size() != dim_) throw InvalidArgument("matvec dimension mismatch");
  if (!is_sparse()) return dense_ * v;
  const auto& p = *structure_.pattern;
  Vector out = Vector::Zero(dim_);
  for (int i = 0; i < dim_; ++i) {
    double acc = 0.0;
    for (int k = p.row_ptr()[i]; k < p.row_ptr()[i + 1]; ++k) acc += values_[k] * v[p.col_idx()[k]];
    out[i] = acc;
  }
  return out;
}

Vector StructuredMatrix::apply_transpose(const Vector& v) const {
  if (v.size() != dim_) throw InvalidArgument("matvec dimension mismatch");
  if (symmetric_storage()) return dense_ * v;
  if (!is_sparse()) return dense_.transpose() * v;
  const auto& p = *structure_.pattern;
  Vector out = Vector::Zero(dim_);
  for (int i = 0; i < dim_; ++i)
    for (int k = p.row_ptr()[i]; k < p.row_ptr()[i + 1]; ++k) out[p.col_idx()[k]] += values_[k] * v[i];
  return out;
}

void StructuredMatrix::add_projected_rank_one(double scale, const Vector& left, const Vector& right) {
  if (left.size() != dim_ || right.size() != dim_) throw InvalidArgument("rank-one dimension mismatch");
  switch (structure_.kind) {
    case StructureKind::kGeneral:
      dense_.noalias() += scale * left * right.transpose();
      break;
    case StructureKind::kSymmetric:
      for (int j = 0; j < dim_; ++j)
        for (int i = 0; i <= j; ++i) dense_(i, j) += 0.5 * scale * (left[i] * right[j] + left[j] * right[i]);
      mirror_upper(structure_, dense_);
      break;
    case StructureKind::kJSymmetric:
      for (int j = 0; j < dim_; ++j)
        for (int i = 0; i <= j; ++i) {
          const bool flip = (i < structure_.m) != (j < structure_.m);
          const double cross = left[j] * right[i];
          dense_(i, j) += 0.5 * scale * (left[i] * right[j] + (flip ? -cross : cross));
        }
      mirror_upper(structure_, dense_);
      break;
    case StructureKind::kSparse: {
      const auto& p = *structure_.pattern;
      for (int i = 0; i < dim_; ++i)
        for (int k = p.row_ptr()[i]; k < p.row_ptr()[i + 1]; ++k)
          values_[k] += scale * left[i] * right[p.col_idx()[k]];
      break;
    }
  }
}

void StructuredMatrix::add_identity(double c) {
  if (!is_sparse()) {
    dense_.diagonal().array() += c;
    return;
  }
  const auto& p = *structure_.pattern;
  for (int i = 0; i < dim_; ++i)
    for (int k = p.row_ptr()[i]; k < p.row_ptr()[i + 1]; ++k)
      if (p.col_idx()[k] == i) values_[k] += c;
}

void StructuredMatrix::scale(double c) {
  if (is_sparse())
    for (double& v : values_) v *= c;
  else
    dense_ *= c;
}

void StructuredMatrix::check_compatible(const StructuredMatrix& other) const {
  if (dim_ != other.dim_ || !(structure_ == other.structure_))
    throw InvalidArgument("structured matrices are incompatible");
}

void StructuredMatrix::axpy(double c, const StructuredMatrix& other) {
  check_compatible(other);
  if (is_sparse()) {
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += c * other.values_[k];
  } else {
    dense_ += c * other.dense_;
  }
}

double StructuredMatrix::dot(const StructuredMatrix& other) const {
  check_compatible(other);
  if (!is_sparse()) return (dense_.array() * other.dense_.array()).sum();
  double acc = 0.0;
  for (std::size_t k = 0; k < values_.size(); ++k) acc += values_[k] * other.values_[k];
  return acc;
}

double StructuredMatrix::frobenius_norm() const {
  if (!is_sparse()) return dense_.norm();
  double acc = 0.0;
  for (double v : values_) acc += v * v;
  return std::sqrt(acc);
}

Matrix StructuredMatrix::to_dense() const {
  if (!is_sparse()) return dense_;
  Matrix out = Matrix::Zero(dim_, dim_);
  const auto& p = *structure_.pattern;
  for (int i = 0; i < dim_; ++i)
    for (int k = p.row_ptr()[i]; k < p.row_ptr()[i + 1]; ++k) out(i, p.col_idx()[k]) = values_[k];
  return out;
}

std::size_t StructuredMatrix::stored_entries() const {
  return is_sparse() ? values_.size() : static_cast<std::size_t>(dim_) * dim_;
}

LinearOp as_linear_op(const StructuredMatrix& m, std::shared_ptr<MatvecCounter> counter) {
  auto held = std::make_shared<const StructuredMatrix>(m);
  LinearOp op;
  op.dim = m.dim();
  op.apply = [held](const Vector& v) { return held->apply(v); };
  op.apply_transpose = [held](const Vector& v) { return held->apply_transpose(v); };
  op.symmetric = m.symmetric_storage();
  op.counter = std::move(counter);
  return op;
}

}  // namespace qnpe
