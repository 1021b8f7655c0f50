#include "kaczmarz/experiment.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

using nlohmann::json;

namespace kaczmarz {

namespace {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Distinct, reproducible streams per (trial, role) pair.
Seed derive_seed(Seed master, Seed a, Seed b) {
    Seed z = master + 0x9E3779B97F4A7C15ull * (a + 1) + 0xBF58476D1CE4E5B9ull * (b + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

StatsRow make_row(double index, std::vector<double>& values) {
    std::sort(values.begin(), values.end());
    const std::size_t k = values.size();
    StatsRow row;
    row.index = index;
    row.min = values.front();
    row.max = values.back();
    row.median = (k % 2 == 1) ? values[k / 2] : 0.5 * (values[k / 2 - 1] + values[k / 2]);
    return row;
}

void run_trials(Index trials, int jobs, const std::function<void(Index)>& body) {
    if (jobs <= 1) {
        for (Index t = 0; t < trials; ++t) body(t);
        return;
    }
    std::atomic<Index> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const Index t = next.fetch_add(1);
            if (t >= trials) return;
            try {
                body(t);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const int count = std::min<int>(jobs, static_cast<int>(trials));
    pool.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace

const StatsSeries* TrialStats::find(const std::string& axis) const {
    for (const auto& s : series) {
        if (s.axis == axis) return &s;
    }
    return nullptr;
}

StatsSeries aggregate_per_iteration(const std::vector<ResidualTrace>& traces) {
    StatsSeries series;
    series.axis = "iteration";
    std::size_t longest = 0;
    for (const auto& trace : traces) {
        longest = std::max(longest, trace.records.size());
    }
    std::vector<double> values(traces.size());
    for (std::size_t j = 0; j < longest; ++j) {
        for (std::size_t t = 0; t < traces.size(); ++t) {
            const auto& records = traces[t].records;
            values[t] = records[std::min(j, records.size() - 1)].residual_norm;
        }
        series.rows.push_back(make_row(static_cast<double>(j), values));
    }
    return series;
}

StatsSeries aggregate_per_epoch(const std::vector<ResidualTrace>& traces, Index max_epochs) {
    StatsSeries series;
    series.axis = "epoch";
    if (traces.empty()) return series;
    const Index epoch_length = traces.front().epoch_length;

    Index epochs = max_epochs;
    if (epochs == 0) {
        for (const auto& trace : traces) {
            epochs = std::max(epochs, trace.records.back().counted_total / epoch_length);
        }
    }
    std::vector<double> values(traces.size());
    std::vector<std::size_t> cursor(traces.size(), 0);
    for (Index k = 0; k <= epochs; ++k) {
        const Index budget = k * epoch_length;
        for (std::size_t t = 0; t < traces.size(); ++t) {
            const auto& records = traces[t].records;
            auto& pos = cursor[t];
            while (pos + 1 < records.size() && records[pos + 1].counted_total <= budget) {
                ++pos;
            }
            values[t] = records[pos].residual_norm;
        }
        series.rows.push_back(make_row(static_cast<double>(k), values));
    }
    return series;
}

StatsSeries aggregate_per_time(const std::vector<ResidualTrace>& traces, Index buckets) {
    StatsSeries series;
    series.axis = "time";
    if (traces.empty() || buckets < 1) return series;
    double horizon = 0.0;
    for (const auto& trace : traces) {
        horizon = std::max(horizon, trace.records.back().seconds);
    }
    std::vector<double> values(traces.size());
    std::vector<std::size_t> cursor(traces.size(), 0);
    for (Index k = 1; k <= buckets; ++k) {
        const double t_k = horizon * static_cast<double>(k) / static_cast<double>(buckets);
        for (std::size_t t = 0; t < traces.size(); ++t) {
            const auto& records = traces[t].records;
            auto& pos = cursor[t];
            while (pos + 1 < records.size() && records[pos + 1].seconds <= t_k) {
                ++pos;
            }
            values[t] = records[pos].residual_norm;
        }
        series.rows.push_back(make_row(t_k, values));
    }
    return series;
}

void export_traces(const TrialStats& stats, const std::string& path, TraceFormat format,
                   bool squared) {
    bool has_rows = false;
    for (const auto& s : stats.series) {
        has_rows = has_rows || !s.rows.empty();
    }
    if (!has_rows) {
        throw InvalidParamsError("export_traces: nothing to write");
    }
    auto value = [squared](double v) { return squared ? v * v : v; };

    if (format == TraceFormat::Csv) {
        std::ofstream out(path);
        if (!out) throw IoError("cannot open for writing: " + path);
        out << "index,axis,min,median,max\n";
        for (const auto& s : stats.series) {
            for (const auto& row : s.rows) {
                out << format_double(row.index) << ',' << s.axis << ','
                    << format_double(value(row.min)) << ',' << format_double(value(row.median))
                    << ',' << format_double(value(row.max)) << '\n';
            }
        }
        if (!out) throw IoError("write failed: " + path);
        return;
    }

    json doc;
    doc["trials"] = stats.trials;
    doc["config"] = stats.config_echo;
    json series = json::array();
    for (const auto& s : stats.series) {
        json rows = json::array();
        for (const auto& row : s.rows) {
            rows.push_back({row.index, value(row.min), value(row.median), value(row.max)});
        }
        series.push_back({{"axis", s.axis}, {"rows", rows}});
    }
    doc["series"] = series;
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << doc.dump(2) << "\n";
    if (!out) throw IoError("write failed: " + path);
}

TrialStats import_traces(const std::string& path, TraceFormat format) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    TrialStats stats;

    if (format == TraceFormat::Csv) {
        std::string line;
        if (!std::getline(in, line) || line != "index,axis,min,median,max") {
            throw ParseError(path + ": missing trace header");
        }
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::stringstream ss(line);
            std::string field;
            StatsRow row;
            std::string axis;
            std::getline(ss, field, ',');
            row.index = std::stod(field);
            std::getline(ss, axis, ',');
            std::getline(ss, field, ',');
            row.min = std::stod(field);
            std::getline(ss, field, ',');
            row.median = std::stod(field);
            std::getline(ss, field, ',');
            row.max = std::stod(field);
            if (stats.series.empty() || stats.series.back().axis != axis) {
                stats.series.push_back({axis, {}});
            }
            stats.series.back().rows.push_back(row);
        }
        return stats;
    }

    json doc;
    try {
        in >> doc;
        stats.trials = doc.at("trials").get<Index>();
        stats.config_echo = doc.at("config").get<std::string>();
        for (const auto& s : doc.at("series")) {
            StatsSeries series;
            series.axis = s.at("axis").get<std::string>();
            for (const auto& r : s.at("rows")) {
                series.rows.push_back({r.at(0).get<double>(), r.at(1).get<double>(),
                                       r.at(2).get<double>(), r.at(3).get<double>()});
            }
            stats.series.push_back(std::move(series));
        }
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    return stats;
}

Fig3Result run_experiment_fig3(const Fig3Config& cfg) {
    std::vector<ResidualTrace> block_traces(static_cast<std::size_t>(cfg.trials));
    std::vector<ResidualTrace> simple_traces(static_cast<std::size_t>(cfg.trials));
    Fig3Result result;
    result.block.seconds_to_target.assign(static_cast<std::size_t>(cfg.trials),
                                          std::numeric_limits<double>::quiet_NaN());
    result.simple.seconds_to_target = result.block.seconds_to_target;
    result.block.converged.assign(static_cast<std::size_t>(cfg.trials), 0);
    result.simple.converged = result.block.converged;

    run_trials(cfg.trials, cfg.jobs, [&](Index t) {
        auto generated =
            gen_gaussian_system(cfg.n, cfg.d, cfg.n_e, derive_seed(cfg.seed, t, 0), 0.0);
        const MixedSystem& sys = generated.system;
        RowPaving paving = random_partition(cfg.n_e, cfg.m, derive_seed(cfg.seed, t, 1));
        measure_beta(sys.a(), paving);
        const Vector x0 = sys.a().transpose() * sys.b();

        SolverConfig solver_cfg;
        solver_cfg.epsilon = cfg.target;
        solver_cfg.max_iterations = cfg.max_iterations;
        solver_cfg.rule = cfg.rule;

        solver_cfg.seed = derive_seed(cfg.seed, t, 2);
        SolveResult block = run_algorithm1(sys, paving, x0, solver_cfg);
        solver_cfg.seed = derive_seed(cfg.seed, t, 3);
        SolveResult simple = run_leventhal_lewis(sys, x0, solver_cfg);

        const auto idx = static_cast<std::size_t>(t);
        result.block.converged[idx] = block.converged() ? 1 : 0;
        result.simple.converged[idx] = simple.converged() ? 1 : 0;
        if (block.converged()) {
            result.block.seconds_to_target[idx] = block.trace.records.back().seconds;
        }
        if (simple.converged()) {
            result.simple.seconds_to_target[idx] = simple.trace.records.back().seconds;
        }
        block_traces[idx] = std::move(block.trace);
        simple_traces[idx] = std::move(simple.trace);
    });

    json echo = {{"experiment", "fig3"},
                 {"n", cfg.n},
                 {"d", cfg.d},
                 {"n_e", cfg.n_e},
                 {"m", cfg.m},
                 {"trials", cfg.trials},
                 {"seed", cfg.seed},
                 {"target", cfg.target},
                 {"rule", cfg.rule == BlockProbabilityRule::RowCount ? "rowcount" : "paving"},
                 {"jobs", cfg.jobs}};

    for (auto* arm : {&result.block, &result.simple}) {
        arm->stats.trials = cfg.trials;
        arm->stats.config_echo = echo.dump();
    }
    result.block.stats.series = {aggregate_per_iteration(block_traces),
                                 aggregate_per_epoch(block_traces),
                                 aggregate_per_time(block_traces)};
    result.simple.stats.series = {aggregate_per_iteration(simple_traces),
                                  aggregate_per_epoch(simple_traces),
                                  aggregate_per_time(simple_traces)};
    return result;
}

Fig3Result run_experiment_fig3(Index trials, Seed seed) {
    Fig3Config cfg;
    cfg.trials = trials;
    cfg.seed = seed;
    return run_experiment_fig3(cfg);
}

const char* fig2_arm_name(Fig2Arm arm) {
    switch (arm) {
        case Fig2Arm::BlockNonObtuse: return "block_nonobtuse";
        case Fig2Arm::BlockObtuse: return "block_obtuse";
        case Fig2Arm::Simple: return "simple";
        case Fig2Arm::FullBlockNonObtuse: return "full_block_nonobtuse";
    }
    return "unknown";
}

TrialStats run_experiment_fig2(const Fig2Config& cfg, Fig2Arm arm) {
    std::vector<ResidualTrace> traces(static_cast<std::size_t>(cfg.trials));

    run_trials(cfg.trials, cfg.jobs, [&](Index t) {
        auto generated = gen_gaussian_system(cfg.n, cfg.d, cfg.n_e,
                                             derive_seed(cfg.seed, t, 0), cfg.base_slack);
        MixedSystem sys = std::move(generated.system);
        RowPaving t_eq = random_partition(cfg.n_e, cfg.m_eq, derive_seed(cfg.seed, t, 1));
        RowPaving t_ineq = random_partition(cfg.n - cfg.n_e, cfg.m_ineq,
                                            derive_seed(cfg.seed, t, 2), cfg.n_e);
        if (arm == Fig2Arm::BlockObtuse) {
            // Best-effort sweeps: blocks of three or more random rows admit no
            // sign-flip fixpoint, so the strict contract cannot apply here.
            sys = obtusify(sys, t_ineq, cfg.obtusify_slack, 100, /*strict=*/false);
        }
        measure_beta(sys.a(), t_eq);
        measure_beta(sys.a(), t_ineq);
        const Vector x0 = sys.a().transpose() * sys.b();

        SolverConfig solver_cfg;
        solver_cfg.epsilon = 1e-13;  // numerical floor; the epoch budget is the stop
        solver_cfg.rule = cfg.rule;
        solver_cfg.epoch_budget = cfg.epochs;
        solver_cfg.seed = derive_seed(cfg.seed, t, 3);

        SolveResult run;
        switch (arm) {
            case Fig2Arm::BlockNonObtuse:
            case Fig2Arm::BlockObtuse:
                solver_cfg.max_iterations = 20 * cfg.epochs * (cfg.m_eq + cfg.m_ineq);
                run = run_algorithm2(sys, t_eq, t_ineq, x0, solver_cfg);
                break;
            case Fig2Arm::Simple:
                solver_cfg.max_iterations = 20 * cfg.epochs * cfg.n;
                run = run_leventhal_lewis(sys, x0, solver_cfg);
                break;
            case Fig2Arm::FullBlockNonObtuse:
                solver_cfg.max_iterations = 20 * cfg.epochs * (cfg.m_eq + cfg.m_ineq);
                run = run_full_block(sys, t_eq, t_ineq, x0, solver_cfg);
                break;
        }
        traces[static_cast<std::size_t>(t)] = std::move(run.trace);
    });

    json echo = {{"experiment", "fig2"},
                 {"arm", fig2_arm_name(arm)},
                 {"n", cfg.n},
                 {"d", cfg.d},
                 {"n_e", cfg.n_e},
                 {"m_eq", cfg.m_eq},
                 {"m_ineq", cfg.m_ineq},
                 {"trials", cfg.trials},
                 {"seed", cfg.seed},
                 {"base_slack", cfg.base_slack},
                 {"obtusify_slack", cfg.obtusify_slack},
                 {"epochs", cfg.epochs},
                 {"jobs", cfg.jobs}};

    TrialStats stats;
    stats.trials = cfg.trials;
    stats.config_echo = echo.dump();
    stats.series = {aggregate_per_epoch(traces, cfg.epochs)};
    return stats;
}

TrialStats run_experiment_fig2(Index trials, Seed seed, bool obtuse) {
    Fig2Config cfg;
    cfg.trials = trials;
    cfg.seed = seed;
    return run_experiment_fig2(cfg, obtuse ? Fig2Arm::BlockObtuse : Fig2Arm::BlockNonObtuse);
}

}  // namespace kaczmarz
