#pragma once

#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "kaczmarz/paving.hpp"
#include "kaczmarz/system.hpp"
#include "kaczmarz/types.hpp"

namespace kaczmarz {

// An iteration counts toward an epoch only when it moves the iterate.
inline constexpr double kIterateChangeTol = 1e-14;

/// Uniform draws with a fixed consumption pattern: every driver iteration
/// draws one q from [0,1) and then exactly one index in the chosen branch,
/// so drivers with matching branch layouts can share a stream.
class RandomStream {
public:
    explicit RandomStream(Seed seed) : engine_(seed) {}

    double uniform01() {
        return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
    }
    Index uniform_index(Index lo, Index hi) {  // uniform over [lo, hi)
        return std::uniform_int_distribution<Index>(lo, hi - 1)(engine_);
    }

private:
    std::mt19937_64 engine_;
};

// --- single-constraint and block updates ---

/// Orthogonal projection of x onto the hyperplane of equality row i.
Vector simple_step(const MixedSystem& sys, const Vector& x, Index row);

/// Projection onto the hyperplane of inequality row i, applied only when the
/// inequality is violated; exact satisfaction leaves x unchanged.
Vector inequality_step(const MixedSystem& sys, const Vector& x, Index row);

/// x + A_tau^+ (b_tau - A_tau x): projection onto the solution set of the
/// block's equations. The correction lies in the row space of A_tau.
Vector block_step(const MixedSystem& sys, const Vector& x, const std::vector<Index>& tau);

/// Block update restricted to the violated subset of an inequality block;
/// returns x unchanged when every row is satisfied.
Vector pruned_block_step(const MixedSystem& sys, const Vector& x,
                         const std::vector<Index>& tau_ineq);

// --- randomized drivers ---

enum class BlockProbabilityRule {
    PavingWeighted,  // beta*m / (n_i + beta*m), or its double-paving analogue
    RowCount,        // n_e / n
};

enum class StopReason { Converged, IterationCap, EpochBudget };

struct SolverConfig {
    double epsilon = 1e-6;     // tolerance on ||e(Ax - b)||
    Index max_iterations = 0;  // 0: one hundred epochs' worth
    BlockProbabilityRule rule = BlockProbabilityRule::PavingWeighted;
    Seed seed = 0;
    Index epoch_budget = 0;    // 0: off; otherwise stop after this many counted epochs
    // Optional per-record hook (e.g. distance to the feasible set); evaluated
    // outside the timed section.
    std::function<double(const Vector&)> distance_probe;
};

struct TraceRecord {
    Index iteration = 0;
    bool counted = false;       // iterate moved this iteration
    Index counted_total = 0;
    double residual_norm = 0.0;
    double seconds = 0.0;       // cumulative update + stopping-rule work
    double distance = std::numeric_limits<double>::quiet_NaN();
};

struct ResidualTrace {
    std::vector<TraceRecord> records;  // record 0 is the initial state
    Index epoch_length = 0;
};

struct SolveResult {
    Vector x;
    ResidualTrace trace;
    StopReason stop_reason = StopReason::IterationCap;
    Index iterations = 0;
    bool converged() const { return stop_reason == StopReason::Converged; }
};

/// Mixed solver: equality blocks from t_eq (uniformly at random) with
/// probability given by the configured rule, otherwise one uniformly random
/// inequality row. t_eq must carry a measured beta.
SolveResult run_algorithm1(const MixedSystem& sys, const RowPaving& t_eq, const Vector& x0,
                           const SolverConfig& cfg);

/// Double-block solver: the non-equality branch draws an inequality block
/// from t_ineq and applies the pruned block update. Both pavings need
/// measured betas; the paving-weighted threshold is beta*m/(beta'm' + beta*m).
SolveResult run_algorithm2(const MixedSystem& sys, const RowPaving& t_eq,
                           const RowPaving& t_ineq, const Vector& x0,
                           const SolverConfig& cfg);

/// Single-row method for mixed systems: one uniformly random row per
/// iteration, hyperplane projection on equalities, violated-only projection
/// on inequalities. Row selection is uniform over all n rows, drawn in the
/// same two-stage pattern as the block drivers (class first, then row).
SolveResult run_leventhal_lewis(const MixedSystem& sys, const Vector& x0,
                                const SolverConfig& cfg);

/// Like run_algorithm2 but enforcing every row of the drawn inequality block
/// with equality, satisfied or not. This is the naive double-block variant
/// whose overshoot the obtuse-paving condition exists to rule out; it is kept
/// for side-by-side experiments and stalls on systems with interior slack.
SolveResult run_full_block(const MixedSystem& sys, const RowPaving& t_eq,
                           const RowPaving& t_ineq, const Vector& x0,
                           const SolverConfig& cfg);

// --- theoretical contraction factors ---

enum class RateVariant {
    SimpleKaczmarz,   // 1 - sigma_min^2 / ||A||_F^2 (consistent equalities)
    LeventhalLewis,   // 1 - 1 / (L^2 ||A||_F^2)
    BlockKaczmarz,    // 1 - sigma_min^2 / (beta m)
    MixedBlock,       // 1 - 1 / (L^2 (n_i + beta m))
    MixedBlockPaved,  // 1 - 1 / (L^2 (n_i + C ||A_=||^2 log(1+n)))
    DoubleBlock,      // 1 - 1 / (L^2 (beta' m' + beta m))
};

struct RateParams {
    double hoffman = 0.0;          // L
    Index n_i = 0;                 // inequality rows
    double beta = 0.0;             // equality paving bound
    Index m = 0;                   // equality paving size
    double beta_p = 0.0;           // inequality paving bound
    Index m_p = 0;                 // inequality paving size
    double sigma_min = 0.0;
    double frob_norm_sq = 0.0;
    double spec_norm_sq_eq = 0.0;  // ||A_=||^2
    Index n = 0;                   // total rows
    double c = 1.0;                // paving-existence constant
};

/// Per-iteration contraction factor of the requested bound. Throws
/// InvalidParamsError when the inputs put the factor outside [0, 1).
double theoretical_rate(RateVariant variant, const RateParams& p);

struct EpochRateComparison {
    double simple_per_epoch;  // n * rho_s      = 1 / L^2
    double block_per_epoch;   // (n_i + m) * rho_b
    bool block_faster_per_iteration;  // n_i + beta m < n
};

EpochRateComparison epoch_rate_comparison(const RateParams& p);

/// 1 / sigma_min: the Hoffman constant of an equality-only full-column-rank
/// system. Throws RankDeficientError when sigma_min <= 1e-10.
double hoffman_equality_case(const Matrix& a_eq);

}  // namespace kaczmarz
