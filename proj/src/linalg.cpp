#include "kaczmarz/linalg.hpp"

#include <Eigen/Eigenvalues>

namespace kaczmarz {

Vector row_norms(const Matrix& a) {
    return a.rowwise().norm();
}

double min_singular_value(const Matrix& a) {
    if (a.rows() < a.cols()) {
        return 0.0;  // sigma_d of a wide matrix
    }
    Eigen::BDCSVD<Matrix> svd(a);
    return svd.singularValues().minCoeff();
}

double spectral_norm(const Matrix& a) {
    Eigen::BDCSVD<Matrix> svd(a);
    return svd.singularValues()(0);
}

double gram_max_eigenvalue(const Matrix& a) {
    Eigen::MatrixXd gram = a * a.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
    return eig.eigenvalues().maxCoeff();
}

MinNormSolver::MinNormSolver(Matrix block)
    : block_(std::move(block)),
      svd_(block_, Eigen::ComputeThinU | Eigen::ComputeThinV) {
    svd_.setThreshold(kSvdRelativeCutoff);
}

Vector lsq_min_norm(const Matrix& a, const Vector& r) {
    return MinNormSolver(a).solve(r);
}

Matrix gather_rows(const Matrix& a, const std::vector<Index>& rows) {
    Matrix out(static_cast<Index>(rows.size()), a.cols());
    for (Index i = 0; i < out.rows(); ++i) {
        out.row(i) = a.row(rows[static_cast<std::size_t>(i)]);
    }
    return out;
}

Vector gather_entries(const Vector& v, const std::vector<Index>& rows) {
    Vector out(static_cast<Index>(rows.size()));
    for (Index i = 0; i < out.size(); ++i) {
        out(i) = v(rows[static_cast<std::size_t>(i)]);
    }
    return out;
}

}  // namespace kaczmarz
