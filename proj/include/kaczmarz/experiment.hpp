#pragma once

#include <string>
#include <vector>

#include "kaczmarz/solvers.hpp"
#include "kaczmarz/types.hpp"

namespace kaczmarz {

struct StatsRow {
    double index = 0.0;  // iteration number, epoch number, or seconds
    double min = 0.0;
    double median = 0.0;
    double max = 0.0;
};

struct StatsSeries {
    std::string axis;  // "iteration", "epoch", or "time"
    std::vector<StatsRow> rows;
};

/// Residual statistics across a set of trials, one series per axis.
/// Finished trials carry their last value forward so every index aggregates
/// the same number of trials.
struct TrialStats {
    Index trials = 0;
    std::string config_echo;  // JSON snapshot of the configuration
    std::vector<StatsSeries> series;

    const StatsSeries* find(const std::string& axis) const;
};

StatsSeries aggregate_per_iteration(const std::vector<ResidualTrace>& traces);

/// Epoch k takes each trial's residual at the last record with at most
/// k * epoch_length counted iterations. max_epochs = 0 sizes the series to
/// the longest trial.
StatsSeries aggregate_per_epoch(const std::vector<ResidualTrace>& traces, Index max_epochs = 0);

/// Buckets the per-trial step functions residual(seconds) on a shared grid
/// from 0 to the longest trial duration.
StatsSeries aggregate_per_time(const std::vector<ResidualTrace>& traces, Index buckets = 100);

enum class TraceFormat { Csv, Json };

/// Writes one row per index: `index,axis,min,median,max` (CSV header fixed),
/// values at 17 significant digits. squared=true writes squared residuals.
/// Refuses empty stats.
void export_traces(const TrialStats& stats, const std::string& path, TraceFormat format,
                   bool squared = false);

TrialStats import_traces(const std::string& path, TraceFormat format);

// --- experiment protocols ---

/// Mixed-system benchmark: per trial a fresh standardized Gaussian system
/// with a planted solution and tight inequalities, a random partition of the
/// equality rows, x0 = A^T b, then the block driver and the single-row driver
/// run to the residual target.
struct Fig3Config {
    Index n = 500;
    Index d = 100;
    Index n_e = 400;
    Index m = 16;
    Index trials = 100;
    Seed seed = 0;
    double target = 1e-4;  // on ||e(Ax-b)||
    Index max_iterations = 0;
    int jobs = 1;  // wall-time comparisons need jobs = 1
    BlockProbabilityRule rule = BlockProbabilityRule::RowCount;
};

struct ArmResult {
    TrialStats stats;  // iteration, epoch, and time series
    std::vector<double> seconds_to_target;  // NaN when the trial missed the target
    std::vector<char> converged;
};

struct Fig3Result {
    ArmResult block;
    ArmResult simple;
};

Fig3Result run_experiment_fig3(const Fig3Config& cfg);
Fig3Result run_experiment_fig3(Index trials, Seed seed);

/// Inequality-blocking study: arms run on the same per-trial systems with a
/// fixed epoch budget and report per-epoch residual statistics.
enum class Fig2Arm {
    BlockNonObtuse,      // double-block driver on the generated system
    BlockObtuse,         // same, after the sign-flip transform plus slack
    Simple,              // single-row driver on the generated system
    FullBlockNonObtuse,  // unpruned double-block driver (stalls by design)
};

struct Fig2Config {
    Index n = 300;
    Index d = 100;
    Index n_e = 200;
    Index m_eq = 20;
    Index m_ineq = 10;
    Index trials = 40;
    Seed seed = 0;
    double base_slack = 0.1;      // margin of the generated system at x_star
    double obtusify_slack = 0.1;  // margin restored after sign flips
    Index epochs = 100;
    int jobs = 1;
    BlockProbabilityRule rule = BlockProbabilityRule::PavingWeighted;
};

TrialStats run_experiment_fig2(const Fig2Config& cfg, Fig2Arm arm);
TrialStats run_experiment_fig2(Index trials, Seed seed, bool obtuse);

const char* fig2_arm_name(Fig2Arm arm);

}  // namespace kaczmarz
