#pragma once

#include <string>
#include <utility>
#include <vector>

#include "kaczmarz/types.hpp"

namespace kaczmarz {

inline constexpr double kZeroRowCutoff = 1e-14;
inline constexpr double kStandardizedTol = 1e-12;
inline constexpr double kFeasibilityTol = 1e-10;

/// Divide each row of A and the matching entry of b by the row norm.
/// The solution set is unchanged. Throws ZeroRowError below kZeroRowCutoff.
std::pair<Matrix, Vector> standardize(const Matrix& a, const Vector& b);

/// A standardized system of n_e equality rows followed by inequality rows:
///   <a_i, x>  = b_i   for i <  n_e
///   <a_i, x> <= b_i   for i >= n_e
/// Immutable after construction; safe to share across threads.
class MixedSystem {
public:
    MixedSystem(Matrix a, Vector b, Index num_equalities);

    /// Reorders arbitrary rows so equalities come first. `equality_rows`
    /// lists the input rows that are equalities; relative order is kept.
    /// When `perm_out` is given, perm_out[i] is the input row that became
    /// system row i.
    static MixedSystem from_unordered(const Matrix& a, const Vector& b,
                                      const std::vector<Index>& equality_rows,
                                      std::vector<Index>* perm_out = nullptr);

    const Matrix& a() const { return a_; }
    const Vector& b() const { return b_; }
    Index rows() const { return a_.rows(); }
    Index cols() const { return a_.cols(); }
    Index num_equalities() const { return n_e_; }
    Index num_inequalities() const { return a_.rows() - n_e_; }
    bool is_equality(Index row) const { return row < n_e_; }

private:
    Matrix a_;
    Vector b_;
    Index n_e_;
};

/// The residual map e(Ax - b): identity on equality rows, positive part on
/// inequality rows. Zero exactly on the feasible set.
Vector residual(const MixedSystem& sys, const Vector& x);

double residual_norm(const MixedSystem& sys, const Vector& x);

bool is_feasible(const MixedSystem& sys, const Vector& x, double tol = kFeasibilityTol);

struct GeneratedSystem {
    MixedSystem system;
    Vector planted;  // x_star, feasible by construction
};

/// Standardized i.i.d. Gaussian system with a planted solution:
/// b = A x_star, then b_i += slack on inequality rows.
GeneratedSystem gen_gaussian_system(Index n, Index d, Index n_e, Seed seed, double slack);

// --- serialization ---

/// JSON document {n, d, n_e, A (row-major), b}.
void save_system_json(const MixedSystem& sys, const std::string& path);
MixedSystem load_system_json(const std::string& path);

struct MatrixMarketData {
    Matrix a;
    Index n_e = -1;               // -1 when the file carries no system header
    std::vector<Index> perm;      // original row index of each stored row
};

/// Matrix Market array format. A structured comment line records n_e and the
/// row permutation when n_e >= 0.
void save_matrix_market(const Matrix& a, const std::string& path, Index n_e = -1,
                        const std::vector<Index>& perm = {});
MatrixMarketData load_matrix_market(const std::string& path);

}  // namespace kaczmarz
