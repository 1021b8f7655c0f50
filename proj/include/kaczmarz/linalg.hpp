#pragma once

#include <Eigen/SVD>

#include <vector>

#include "kaczmarz/types.hpp"

namespace kaczmarz {

// Singular values at or below sigma_max * kSvdRelativeCutoff count as zero,
// so rank-deficient blocks solve deterministically.
inline constexpr double kSvdRelativeCutoff = 1e-12;

/// Euclidean norm of each row.
Vector row_norms(const Matrix& a);

/// Smallest of the d singular values of an n x d matrix (0 when n < d).
double min_singular_value(const Matrix& a);

/// Largest singular value.
double spectral_norm(const Matrix& a);

/// lambda_max(A A^T), computed by a symmetric eigendecomposition of the Gram
/// matrix rather than an SVD of A.
double gram_max_eigenvalue(const Matrix& a);

/// Minimum-norm least-squares solve A z ~= r via SVD with the relative cutoff.
Vector lsq_min_norm(const Matrix& a, const Vector& r);

/// Reusable factorization of one row block for repeated min-norm solves.
/// solve() follows the exact code path of lsq_min_norm.
class MinNormSolver {
public:
    explicit MinNormSolver(Matrix block);

    const Matrix& block() const { return block_; }
    Vector solve(const Vector& r) const { return svd_.solve(r); }

private:
    Matrix block_;
    Eigen::BDCSVD<Matrix> svd_;
};

/// Rows of `a` indexed by `rows`, in the given order.
Matrix gather_rows(const Matrix& a, const std::vector<Index>& rows);
Vector gather_entries(const Vector& v, const std::vector<Index>& rows);

}  // namespace kaczmarz
