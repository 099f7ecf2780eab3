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

#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "qnpe/common.hpp"

namespace qnpe {

/// Fixed sparsity pattern in CSR form. The diagonal is always present.
class SparsityPattern {
 public:
  /// Builds the pattern from off-diagonal (row, col) pairs (0-based).
  /// Duplicates and diagonal entries in `entries` are ignored.
  static std::shared_ptr<const SparsityPattern> make(
      int dim, const std::vector<std::pair<int, int>>& entries);

  int dim() const { return dim_; }
  std::size_t nnz() const { return col_idx_.size(); }
  bool contains(int row, int col) const;
  const std::vector<int>& row_ptr() const { return row_ptr_; }
  const std::vector<int>& col_idx() const { return col_idx_; }
  /// Off-diagonal entries, row-major.
  std::vector<std::pair<int, int>> off_diagonal() const;

 private:
  int dim_ = 0;
  std::vector<int> row_ptr_;
  std::vector<int> col_idx_;
};

enum class StructureKind { kGeneral, kSymmetric, kJSymmetric, kSparse };

/// Jacobian structure tag. It selects the linear subspace that Jacobian
/// approximations are confined to.
struct StructureSpec {
  StructureKind kind = StructureKind::kGeneral;
  int m = 0;  // JSymmetric block sizes, J = diag(I_m, -I_n)
  int n = 0;
  std::shared_ptr<const SparsityPattern> pattern;

  static StructureSpec general() { return {}; }
  static StructureSpec symmetric() { return {StructureKind::kSymmetric, 0, 0, nullptr}; }
  static StructureSpec j_symmetric(int m, int n) {
    return {StructureKind::kJSymmetric, m, n, nullptr};
  }
  static StructureSpec sparse(std::shared_ptr<const SparsityPattern> p) {
    return {StructureKind::kSparse, 0, 0, std::move(p)};
  }

  /// Throws InvalidArgument when inconsistent with the dimension.
  void validate(int dim) const;
  std::string name() const;
  /// Diagonal of J for JSymmetric (+1 on the first m entries, -1 after).
  Vector j_signs() const;
};

bool operator==(const StructureSpec& a, const StructureSpec& b);

/// Orthogonal projection of a dense matrix onto the structure subspace.
Matrix project_subspace(const StructureSpec& structure, const Matrix& w);

/// Largest absolute violation of the structural predicate (0 when exact).
double structure_residual(const StructureSpec& structure, const Matrix& w);

/// A d x d matrix living in the structure subspace. General, Symmetric and
/// JSymmetric use dense storage; Sparse stores only the pattern entries.
/// Every mutation keeps the matrix exactly inside the subspace.
class StructuredMatrix {
 public:
  StructuredMatrix() = default;
  static StructuredMatrix zero(const StructureSpec& structure, int dim);
  static StructuredMatrix identity(const StructureSpec& structure, int dim, double scale = 1.0);
  /// Projects `dense` onto the subspace.
  static StructuredMatrix from_dense(const StructureSpec& structure, const Matrix& dense);

  int dim() const { return dim_; }
  const StructureSpec& structure() const { return structure_; }
  /// True when apply and apply_transpose coincide.
  bool symmetric_storage() const { return structure_.kind == StructureKind::kSymmetric; }

  Vector apply(const Vector& v) const;
  Vector apply_transpose(const Vector& v) const;

  /// this += scale * P(left * right^T)
  void add_projected_rank_one(double scale, const Vector& left, const Vector& right);
  void add_identity(double c);
  void scale(double c);
  /// this += c * other
  void axpy(double c, const StructuredMatrix& other);

  /// Frobenius inner product.
  double dot(const StructuredMatrix& other) const;
  double frobenius_norm() const;

  Matrix to_dense() const;
  /// Number of stored entries (d^2 for dense storage, |pattern| for sparse).
  std::size_t stored_entries() const;

  /// Raw storage, used for serialization.
  const Matrix& dense_storage() const { return dense_; }
  const std::vector<double>& sparse_values() const { return values_; }
  static StructuredMatrix from_storage(const StructureSpec& structure, int dim, Matrix dense,
                                       std::vector<double> values);

 private:
  void check_compatible(const StructuredMatrix& other) const;
  bool is_sparse() const { return structure_.kind == StructureKind::kSparse; }

  StructureSpec structure_;
  int dim_ = 0;
  Matrix dense_;
  std::vector<double> values_;
};

/// LinearOp view over a structured matrix (shares ownership of a copy).
LinearOp as_linear_op(const StructuredMatrix& m, std::shared_ptr<MatvecCounter> counter = nullptr);

}  // namespace qnpe
