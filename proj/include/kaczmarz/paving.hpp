#pragma once

#include <limits>
#include <string>
#include <vector>

#include "kaczmarz/system.hpp"
#include "kaczmarz/types.hpp"

namespace kaczmarz {

/// Partition of a contiguous row-index range into non-empty blocks, together
/// with the measured upper paving bound beta = max_tau lambda_max(A_tau A_tau^T).
struct RowPaving {
    std::vector<std::vector<Index>> blocks;
    double beta = std::numeric_limits<double>::quiet_NaN();  // NaN until measured

    Index size() const { return static_cast<Index>(blocks.size()); }
    bool has_beta() const { return beta == beta; }

    /// True iff the blocks are disjoint, non-empty, and cover [lo, hi).
    bool is_partition_of(Index lo, Index hi) const;
};

/// Uniformly random partition of [first_index, first_index + n_rows) into m
/// blocks whose sizes differ by at most one. Deterministic in the seed.
RowPaving random_partition(Index n_rows, Index m, Seed seed, Index first_index = 0);

/// Trivial paving of singletons.
RowPaving singleton_paving(Index n_rows, Index first_index = 0);

/// Measures and stores the upper paving bound of `paving` against A.
double measure_beta(const Matrix& a, RowPaving& paving);

struct Prop1Report {
    double delta = 0.0;
    double beta = 0.0;
    bool beta_upper_ok = false;   // beta <= 1 + delta
    bool beta_lower_ok = false;   // 1 - delta <= beta
    Index m = 0;
    double m_bound = 0.0;         // C * delta^-2 * ||A||^2 * log(1 + n)
    bool m_ok = false;
    double spec_norm_sq = 0.0;
};

/// Diagnostic check of the paving against the (m, beta) existence regime.
/// The absolute constant defaults to 1 and is caller-configurable.
Prop1Report check_prop1_regime(const Matrix& a, const RowPaving& paving, double delta,
                               double c = 1.0);

/// Per-block flags: true iff every distinct pair of rows in the block has
/// non-positive inner product. A sufficient condition for the block geometry
/// that keeps pruned block projections from overshooting the feasible set.
std::vector<bool> is_pairwise_obtuse(const Matrix& a, const RowPaving& paving);

bool all_pairwise_obtuse(const Matrix& a, const RowPaving& paving);

/// Sign-flip transform over the inequality blocks of `t_ineq`: sweeps each
/// block in index order, negating the later row (and its b entry) of every
/// positively correlated pair, repeated until a sweep makes no flip or
/// max_passes is hit. Afterwards adds `slack` to every inequality b entry so
/// the planted solution stays feasible.
///
/// A fixpoint with all pairs non-positive does not exist for most blocks of
/// three or more random rows (flipping cannot repair a triple whose pairwise
/// sign pattern is unbalanced), so for such pavings the sweep stalls at the
/// cap. With strict=true that raises ObtusifyFailedError; strict=false
/// returns the best-effort system, which is the transform the Figure 2(b)
/// style experiments actually need.
MixedSystem obtusify(const MixedSystem& sys, const RowPaving& t_ineq, double slack,
                     int max_passes = 100, bool strict = true);

/// JSON document {m, beta, blocks: [[indices]]}.
void save_paving_json(const RowPaving& paving, const std::string& path);
RowPaving load_paving_json(const std::string& path);

}  // namespace kaczmarz
