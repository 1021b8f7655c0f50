#include "kaczmarz/solvers.hpp"

#include <chrono>
#include <cmath>
#include <utility>

#include "kaczmarz/linalg.hpp"

namespace kaczmarz {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_between(Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
}

// One prepared equality block: rows, right-hand side, and its factorization.
struct PreparedBlock {
    MinNormSolver solver;
    Vector rhs;
};

std::vector<PreparedBlock> prepare_blocks(const MixedSystem& sys, const RowPaving& paving) {
    std::vector<PreparedBlock> out;
    out.reserve(paving.blocks.size());
    for (const auto& block : paving.blocks) {
        out.push_back({MinNormSolver(gather_rows(sys.a(), block)),
                       gather_entries(sys.b(), block)});
    }
    return out;
}

Vector apply_block(const PreparedBlock& blk, const Vector& x) {
    return x + blk.solver.solve(blk.rhs - blk.solver.block() * x);
}

std::vector<Index> violated_subset(const MixedSystem& sys, const Vector& x,
                                   const std::vector<Index>& rows) {
    std::vector<Index> violated;
    for (Index i : rows) {
        if (sys.a().row(i).dot(x) > sys.b()(i)) {  // ties count as satisfied
            violated.push_back(i);
        }
    }
    return violated;
}

// Shared driver loop. Each iteration draws q, picks a branch, and lets the
// branch draw exactly one index from the stream.
struct DriverSpec {
    double threshold;  // probability of the first branch; negative disables it
    Index epoch_length;
    std::function<Vector(RandomStream&, const Vector&)> primary;
    std::function<Vector(RandomStream&, const Vector&)> secondary;
};

SolveResult run_driver(const MixedSystem& sys, const Vector& x0, const SolverConfig& cfg,
                       const DriverSpec& spec) {
    if (x0.size() != sys.cols()) {
        throw KaczmarzError("solver: x0 has the wrong dimension");
    }
    if (cfg.epsilon < 0.0 || cfg.max_iterations < 0) {
        throw InvalidParamsError("solver: bad config");
    }
    const Index max_iterations =
        cfg.max_iterations > 0 ? cfg.max_iterations : 100 * spec.epoch_length;
    const double eps_sq = cfg.epsilon * cfg.epsilon;

    RandomStream stream(cfg.seed);
    SolveResult result;
    result.x = x0;
    result.trace.epoch_length = spec.epoch_length;
    result.trace.records.reserve(static_cast<std::size_t>(max_iterations) + 1);

    auto probe = [&](const Vector& x) {
        return cfg.distance_probe ? cfg.distance_probe(x)
                                  : std::numeric_limits<double>::quiet_NaN();
    };

    double res = residual_norm(sys, result.x);
    result.trace.records.push_back({0, false, 0, res, 0.0, probe(result.x)});
    if (res * res <= eps_sq) {
        result.stop_reason = StopReason::Converged;
        return result;
    }

    double work_seconds = 0.0;
    Index counted_total = 0;
    result.stop_reason = StopReason::IterationCap;
    for (Index j = 1; j <= max_iterations; ++j) {
        const auto t0 = Clock::now();
        const double q = stream.uniform01();
        Vector x_new = (q <= spec.threshold) ? spec.primary(stream, result.x)
                                             : spec.secondary(stream, result.x);
        const bool counted = (x_new - result.x).norm() > kIterateChangeTol;
        res = residual_norm(sys, x_new);
        work_seconds += seconds_between(t0, Clock::now());

        if (counted) ++counted_total;
        result.x = std::move(x_new);
        result.iterations = j;
        result.trace.records.push_back(
            {j, counted, counted_total, res, work_seconds, probe(result.x)});

        if (res * res <= eps_sq) {
            result.stop_reason = StopReason::Converged;
            break;
        }
        if (cfg.epoch_budget > 0 && counted_total >= cfg.epoch_budget * spec.epoch_length) {
            result.stop_reason = StopReason::EpochBudget;
            break;
        }
    }
    return result;
}

void require_equality_paving(const MixedSystem& sys, const RowPaving& t_eq) {
    if (!t_eq.is_partition_of(0, sys.num_equalities())) {
        throw KaczmarzError("solver: paving does not partition the equality rows");
    }
    if (t_eq.size() > 0 && !t_eq.has_beta()) {
        throw KaczmarzError("solver: equality paving has no measured beta");
    }
}

void require_inequality_paving(const MixedSystem& sys, const RowPaving& t_ineq) {
    if (!t_ineq.is_partition_of(sys.num_equalities(), sys.rows())) {
        throw KaczmarzError("solver: paving does not partition the inequality rows");
    }
    if (t_ineq.size() > 0 && !t_ineq.has_beta()) {
        throw KaczmarzError("solver: inequality paving has no measured beta");
    }
}

}  // namespace

Vector simple_step(const MixedSystem& sys, const Vector& x, Index row) {
    const auto a_i = sys.a().row(row);
    return x + ((sys.b()(row) - a_i.dot(x)) / a_i.squaredNorm()) * a_i.transpose();
}

Vector inequality_step(const MixedSystem& sys, const Vector& x, Index row) {
    const auto a_i = sys.a().row(row);
    const double overshoot = a_i.dot(x) - sys.b()(row);
    if (overshoot <= 0.0) {
        return x;
    }
    return x - (overshoot / a_i.squaredNorm()) * a_i.transpose();
}

Vector block_step(const MixedSystem& sys, const Vector& x, const std::vector<Index>& tau) {
    const Matrix a_tau = gather_rows(sys.a(), tau);
    const Vector b_tau = gather_entries(sys.b(), tau);
    return x + lsq_min_norm(a_tau, b_tau - a_tau * x);
}

Vector pruned_block_step(const MixedSystem& sys, const Vector& x,
                         const std::vector<Index>& tau_ineq) {
    const std::vector<Index> sigma = violated_subset(sys, x, tau_ineq);
    if (sigma.empty()) {
        return x;
    }
    return block_step(sys, x, sigma);
}

SolveResult run_algorithm1(const MixedSystem& sys, const RowPaving& t_eq, const Vector& x0,
                           const SolverConfig& cfg) {
    require_equality_paving(sys, t_eq);
    const Index n = sys.rows();
    const Index n_e = sys.num_equalities();
    const Index n_i = sys.num_inequalities();
    const Index m = t_eq.size();
    const auto blocks = prepare_blocks(sys, t_eq);

    double threshold = -1.0;
    if (m > 0) {
        const double weight = t_eq.beta * static_cast<double>(m);
        threshold = (cfg.rule == BlockProbabilityRule::PavingWeighted)
                        ? weight / (static_cast<double>(n_i) + weight)
                        : static_cast<double>(n_e) / static_cast<double>(n);
    }

    DriverSpec spec;
    spec.threshold = threshold;
    spec.epoch_length = n_i + m;
    spec.primary = [&](RandomStream& stream, const Vector& x) {
        return apply_block(blocks[static_cast<std::size_t>(stream.uniform_index(0, m))], x);
    };
    spec.secondary = [&](RandomStream& stream, const Vector& x) {
        return inequality_step(sys, x, stream.uniform_index(n_e, n));
    };
    return run_driver(sys, x0, cfg, spec);
}

SolveResult run_algorithm2(const MixedSystem& sys, const RowPaving& t_eq,
                           const RowPaving& t_ineq, const Vector& x0,
                           const SolverConfig& cfg) {
    require_equality_paving(sys, t_eq);
    require_inequality_paving(sys, t_ineq);
    const Index m = t_eq.size();
    const Index m_p = t_ineq.size();
    const auto blocks = prepare_blocks(sys, t_eq);

    double threshold = -1.0;
    if (m > 0) {
        const double weight = t_eq.beta * static_cast<double>(m);
        const double weight_p = t_ineq.beta * static_cast<double>(m_p);
        threshold = (cfg.rule == BlockProbabilityRule::PavingWeighted)
                        ? weight / (weight_p + weight)
                        : static_cast<double>(sys.num_equalities()) /
                              static_cast<double>(sys.rows());
    }

    DriverSpec spec;
    spec.threshold = threshold;
    spec.epoch_length = m + m_p;
    spec.primary = [&](RandomStream& stream, const Vector& x) {
        return apply_block(blocks[static_cast<std::size_t>(stream.uniform_index(0, m))], x);
    };
    spec.secondary = [&](RandomStream& stream, const Vector& x) {
        const auto& block = t_ineq.blocks[static_cast<std::size_t>(stream.uniform_index(0, m_p))];
        return pruned_block_step(sys, x, block);
    };
    return run_driver(sys, x0, cfg, spec);
}

SolveResult run_leventhal_lewis(const MixedSystem& sys, const Vector& x0,
                                const SolverConfig& cfg) {
    const Index n = sys.rows();
    const Index n_e = sys.num_equalities();

    DriverSpec spec;
    spec.threshold = n_e > 0 ? static_cast<double>(n_e) / static_cast<double>(n) : -1.0;
    spec.epoch_length = n;
    spec.primary = [&](RandomStream& stream, const Vector& x) {
        return simple_step(sys, x, stream.uniform_index(0, n_e));
    };
    spec.secondary = [&](RandomStream& stream, const Vector& x) {
        return inequality_step(sys, x, stream.uniform_index(n_e, n));
    };
    return run_driver(sys, x0, cfg, spec);
}

SolveResult run_full_block(const MixedSystem& sys, const RowPaving& t_eq,
                           const RowPaving& t_ineq, const Vector& x0,
                           const SolverConfig& cfg) {
    require_equality_paving(sys, t_eq);
    require_inequality_paving(sys, t_ineq);
    const Index m = t_eq.size();
    const Index m_p = t_ineq.size();
    const auto eq_blocks = prepare_blocks(sys, t_eq);
    const auto ineq_blocks = prepare_blocks(sys, t_ineq);

    double threshold = -1.0;
    if (m > 0) {
        const double weight = t_eq.beta * static_cast<double>(m);
        const double weight_p = t_ineq.beta * static_cast<double>(m_p);
        threshold = (cfg.rule == BlockProbabilityRule::PavingWeighted)
                        ? weight / (weight_p + weight)
                        : static_cast<double>(sys.num_equalities()) /
                              static_cast<double>(sys.rows());
    }

    DriverSpec spec;
    spec.threshold = threshold;
    spec.epoch_length = m + m_p;
    spec.primary = [&](RandomStream& stream, const Vector& x) {
        return apply_block(eq_blocks[static_cast<std::size_t>(stream.uniform_index(0, m))], x);
    };
    spec.secondary = [&](RandomStream& stream, const Vector& x) {
        return apply_block(ineq_blocks[static_cast<std::size_t>(stream.uniform_index(0, m_p))], x);
    };
    return run_driver(sys, x0, cfg, spec);
}

namespace {

double checked_factor(double factor, const char* what) {
    if (!std::isfinite(factor) || factor < 0.0 || factor >= 1.0) {
        throw InvalidParamsError(std::string(what) + ": contraction factor outside [0,1)");
    }
    return factor;
}

}  // namespace

double theoretical_rate(RateVariant variant, const RateParams& p) {
    switch (variant) {
        case RateVariant::SimpleKaczmarz: {
            if (p.sigma_min <= 0.0 || p.frob_norm_sq <= 0.0) {
                throw InvalidParamsError("simple rate: needs sigma_min > 0 and ||A||_F^2 > 0");
            }
            const double scaled_condition = p.frob_norm_sq / (p.sigma_min * p.sigma_min);
            return checked_factor(1.0 - 1.0 / scaled_condition, "simple rate");
        }
        case RateVariant::LeventhalLewis: {
            if (p.hoffman <= 0.0 || p.frob_norm_sq <= 0.0) {
                throw InvalidParamsError("single-row rate: needs L > 0 and ||A||_F^2 > 0");
            }
            return checked_factor(1.0 - 1.0 / (p.hoffman * p.hoffman * p.frob_norm_sq),
                                  "single-row rate");
        }
        case RateVariant::BlockKaczmarz: {
            if (p.sigma_min <= 0.0 || p.beta <= 0.0 || p.m < 1) {
                throw InvalidParamsError("block rate: needs sigma_min, beta, m");
            }
            return checked_factor(
                1.0 - p.sigma_min * p.sigma_min / (p.beta * static_cast<double>(p.m)),
                "block rate");
        }
        case RateVariant::MixedBlock: {
            if (p.hoffman <= 0.0 || p.beta <= 0.0 || p.m < 1 || p.n_i < 0) {
                throw InvalidParamsError("mixed rate: needs L, beta, m, n_i");
            }
            const double denom = p.hoffman * p.hoffman *
                                 (static_cast<double>(p.n_i) + p.beta * static_cast<double>(p.m));
            return checked_factor(1.0 - 1.0 / denom, "mixed rate");
        }
        case RateVariant::MixedBlockPaved: {
            if (p.hoffman <= 0.0 || p.spec_norm_sq_eq <= 0.0 || p.n < 1 || p.c <= 0.0) {
                throw InvalidParamsError("paved mixed rate: needs L, ||A_=||^2, n, C");
            }
            const double paving_term =
                p.c * p.spec_norm_sq_eq * std::log1p(static_cast<double>(p.n));
            const double denom =
                p.hoffman * p.hoffman * (static_cast<double>(p.n_i) + paving_term);
            return checked_factor(1.0 - 1.0 / denom, "paved mixed rate");
        }
        case RateVariant::DoubleBlock: {
            if (p.hoffman <= 0.0 || p.beta <= 0.0 || p.m < 1 || p.beta_p <= 0.0 || p.m_p < 1) {
                throw InvalidParamsError("double-block rate: needs L, beta, m, beta', m'");
            }
            const double denom =
                p.hoffman * p.hoffman *
                (p.beta_p * static_cast<double>(p.m_p) + p.beta * static_cast<double>(p.m));
            return checked_factor(1.0 - 1.0 / denom, "double-block rate");
        }
    }
    throw InvalidParamsError("theoretical_rate: unknown variant");
}

EpochRateComparison epoch_rate_comparison(const RateParams& p) {
    if (p.hoffman <= 0.0 || p.beta <= 0.0 || p.m < 1 || p.n < 1) {
        throw InvalidParamsError("epoch_rate_comparison: needs L, beta, m, n");
    }
    const double l_sq = p.hoffman * p.hoffman;
    const double beta_m = p.beta * static_cast<double>(p.m);
    EpochRateComparison cmp;
    cmp.simple_per_epoch = 1.0 / l_sq;
    cmp.block_per_epoch = static_cast<double>(p.n_i + p.m) /
                          (l_sq * (static_cast<double>(p.n_i) + beta_m));
    cmp.block_faster_per_iteration = static_cast<double>(p.n_i) + beta_m < static_cast<double>(p.n);
    return cmp;
}

double hoffman_equality_case(const Matrix& a_eq) {
    const double sigma = min_singular_value(a_eq);
    if (sigma <= 1e-10) {
        throw RankDeficientError("hoffman_equality_case: matrix lacks full column rank");
    }
    return 1.0 / sigma;
}

}  // namespace kaczmarz
