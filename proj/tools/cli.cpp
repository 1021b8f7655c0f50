#include "cli.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>

#include "kaczmarz/experiment.hpp"
#include "kaczmarz/linalg.hpp"
#include "kaczmarz/oracle.hpp"
#include "kaczmarz/paving.hpp"
#include "kaczmarz/solvers.hpp"
#include "kaczmarz/system.hpp"

using nlohmann::json;

namespace kaczmarz::cli {

namespace {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

Seed env_seed_or_zero() {
    if (const char* env = std::getenv("KACZMARZ_SEED")) {
        return std::strtoull(env, nullptr, 10);
    }
    return 0;
}

void write_vector(const std::string& path, const Vector& x) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    for (Index i = 0; i < x.size(); ++i) {
        out << format_double(x(i)) << "\n";
    }
    if (!out) throw IoError("write failed: " + path);
}

Vector read_vector(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open: " + path);
    std::vector<double> values;
    double v = 0.0;
    while (in >> v) values.push_back(v);
    if (values.empty()) throw ParseError(path + ": no values");
    return Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
}

// Timing goes in the last column so byte comparisons can strip it.
void write_trace_csv(const std::string& path, const ResidualTrace& trace) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "iteration,counted,counted_total,residual,seconds\n";
    for (const auto& rec : trace.records) {
        out << rec.iteration << ',' << (rec.counted ? 1 : 0) << ',' << rec.counted_total << ','
            << format_double(rec.residual_norm) << ',' << format_double(rec.seconds) << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

BlockProbabilityRule parse_rule(const std::string& rule) {
    if (rule == "paving") return BlockProbabilityRule::PavingWeighted;
    if (rule == "rowcount") return BlockProbabilityRule::RowCount;
    throw UsageError("unknown probability rule: " + rule);
}

// --- solve ---

struct SolveArgs {
    std::string system_path;
    std::string paving_path;
    std::string ineq_paving_path;
    std::string algorithm;
    double epsilon = 1e-6;
    Index max_iters = 0;
    Seed seed = 0;
    std::string rule = "paving";
    std::string x0 = "zero";
    std::string x0_file;
    std::string out_solution = "solution.txt";
    std::string out_trace;
    bool as_json = false;
};

RowPaving load_measured_paving(const std::string& path, const MixedSystem& sys) {
    RowPaving paving = load_paving_json(path);
    if (!paving.has_beta()) {
        measure_beta(sys.a(), paving);
    }
    return paving;
}

int cmd_solve(const SolveArgs& args, std::ostream& out) {
    const MixedSystem sys = load_system_json(args.system_path);

    const bool needs_eq_paving = args.algorithm == "block" || args.algorithm == "alg1" ||
                                 args.algorithm == "alg2";
    if (needs_eq_paving && args.paving_path.empty()) {
        throw UsageError("--algorithm " + args.algorithm + " requires --paving");
    }
    if (args.algorithm == "alg2" && args.ineq_paving_path.empty()) {
        throw UsageError("--algorithm alg2 requires --ineq-paving");
    }

    Vector x0;
    if (!args.x0_file.empty()) {
        x0 = read_vector(args.x0_file);
        if (x0.size() != sys.cols()) throw ParseError("x0 file has the wrong dimension");
    } else if (args.x0 == "atb") {
        x0 = sys.a().transpose() * sys.b();
    } else {
        x0 = Vector::Zero(sys.cols());
    }

    SolverConfig cfg;
    cfg.epsilon = args.epsilon;
    cfg.max_iterations = args.max_iters;
    cfg.seed = args.seed;
    cfg.rule = parse_rule(args.rule);

    SolveResult result;
    if (args.algorithm == "simple" || args.algorithm == "ll") {
        result = run_leventhal_lewis(sys, x0, cfg);
    } else if (args.algorithm == "block" || args.algorithm == "alg1") {
        const RowPaving t_eq = load_measured_paving(args.paving_path, sys);
        result = run_algorithm1(sys, t_eq, x0, cfg);
    } else if (args.algorithm == "alg2") {
        const RowPaving t_eq = load_measured_paving(args.paving_path, sys);
        const RowPaving t_ineq = load_measured_paving(args.ineq_paving_path, sys);
        result = run_algorithm2(sys, t_eq, t_ineq, x0, cfg);
    } else {
        throw UsageError("unknown algorithm: " + args.algorithm);
    }

    write_vector(args.out_solution, result.x);
    if (!args.out_trace.empty()) {
        write_trace_csv(args.out_trace, result.trace);
    }

    const double final_residual = result.trace.records.back().residual_norm;
    if (args.as_json) {
        json doc = {{"algorithm", args.algorithm},
                    {"iterations", result.iterations},
                    {"converged", result.converged()},
                    {"residual", final_residual},
                    {"epsilon", args.epsilon},
                    {"seed", args.seed}};
        out << doc.dump(2) << "\n";
    } else {
        out << "algorithm:  " << args.algorithm << "\n"
            << "iterations: " << result.iterations << "\n"
            << "converged:  " << (result.converged() ? "yes" : "no") << "\n"
            << "residual:   " << format_double(final_residual) << "\n";
    }
    return result.converged() ? kExitOk : kExitNotConverged;
}

// --- pave ---

struct PaveArgs {
    std::string system_path;
    Index m = 0;
    Seed seed = 0;
    std::string target = "eq";
    bool do_obtusify = false;
    double slack = 0.1;
    double delta = 0.5;
    double c = 1.0;
    std::string out_paving = "paving.json";
    std::string out_system;
    bool as_json = false;
};

int cmd_pave(const PaveArgs& args, std::ostream& out) {
    MixedSystem sys = load_system_json(args.system_path);

    Index first = 0;
    Index count = 0;
    if (args.target == "eq") {
        first = 0;
        count = sys.num_equalities();
    } else if (args.target == "ineq") {
        first = sys.num_equalities();
        count = sys.num_inequalities();
    } else if (args.target == "all") {
        first = 0;
        count = sys.rows();
    } else {
        throw UsageError("unknown --target: " + args.target);
    }
    if (args.do_obtusify && args.target != "ineq") {
        throw UsageError("--obtusify requires --target ineq");
    }
    if (args.do_obtusify && args.out_system.empty()) {
        throw UsageError("--obtusify requires --out-system for the transformed system");
    }

    RowPaving paving = random_partition(count, args.m, args.seed, first);
    if (args.do_obtusify) {
        sys = obtusify(sys, paving, args.slack, 100, /*strict=*/false);
        save_system_json(sys, args.out_system);
    }
    measure_beta(sys.a(), paving);
    const auto obtuse_flags = is_pairwise_obtuse(sys.a(), paving);
    const Index obtuse_count =
        static_cast<Index>(std::count(obtuse_flags.begin(), obtuse_flags.end(), true));
    const Prop1Report report = check_prop1_regime(sys.a(), paving, args.delta, args.c);

    save_paving_json(paving, args.out_paving);

    if (args.as_json) {
        json doc = {{"m", paving.size()},
                    {"beta", paving.beta},
                    {"pairwise_obtuse", std::vector<bool>(obtuse_flags.begin(), obtuse_flags.end())},
                    {"regime",
                     {{"delta", report.delta},
                      {"beta_upper_ok", report.beta_upper_ok},
                      {"beta_lower_ok", report.beta_lower_ok},
                      {"m_bound", report.m_bound},
                      {"m_ok", report.m_ok},
                      {"spec_norm_sq", report.spec_norm_sq}}}};
        out << doc.dump(2) << "\n";
    } else {
        out << "m:               " << paving.size() << "\n"
            << "beta:            " << format_double(paving.beta) << "\n"
            << "pairwise obtuse: " << obtuse_count << "/" << paving.size() << " blocks\n"
            << "regime:          beta in [1-delta, 1+delta]: "
            << (report.beta_lower_ok && report.beta_upper_ok ? "yes" : "no")
            << "; m <= C delta^-2 ||A||^2 log(1+n) = " << format_double(report.m_bound) << ": "
            << (report.m_ok ? "yes" : "no") << "\n";
    }
    return kExitOk;
}

// --- bound ---

struct BoundArgs {
    std::string variant;
    RateParams params;
    std::string system_path;
    std::string paving_path;
    std::string ineq_paving_path;
    bool as_json = false;
};

RateVariant parse_variant(const std::string& name) {
    if (name == "simple") return RateVariant::SimpleKaczmarz;
    if (name == "single") return RateVariant::LeventhalLewis;
    if (name == "block") return RateVariant::BlockKaczmarz;
    if (name == "mixed") return RateVariant::MixedBlock;
    if (name == "mixed-paved") return RateVariant::MixedBlockPaved;
    if (name == "double") return RateVariant::DoubleBlock;
    throw UsageError("unknown variant: " + name);
}

int cmd_bound(BoundArgs args, std::ostream& out) {
    RateParams& p = args.params;
    if (!args.system_path.empty()) {
        const MixedSystem sys = load_system_json(args.system_path);
        p.n = sys.rows();
        p.n_i = sys.num_inequalities();
        if (p.sigma_min <= 0.0) p.sigma_min = min_singular_value(sys.a());
        if (p.frob_norm_sq <= 0.0) p.frob_norm_sq = sys.a().squaredNorm();
        if (p.spec_norm_sq_eq <= 0.0 && sys.num_equalities() > 0) {
            const double norm = spectral_norm(sys.a().topRows(sys.num_equalities()));
            p.spec_norm_sq_eq = norm * norm;
        }
        if (p.hoffman <= 0.0 && sys.num_inequalities() == 0) {
            p.hoffman = hoffman_equality_case(sys.a());
        }
        if (!args.paving_path.empty()) {
            RowPaving t_eq = load_paving_json(args.paving_path);
            if (!t_eq.has_beta()) measure_beta(sys.a(), t_eq);
            p.beta = t_eq.beta;
            p.m = t_eq.size();
        }
        if (!args.ineq_paving_path.empty()) {
            RowPaving t_ineq = load_paving_json(args.ineq_paving_path);
            if (!t_ineq.has_beta()) measure_beta(sys.a(), t_ineq);
            p.beta_p = t_ineq.beta;
            p.m_p = t_ineq.size();
        }
    }

    const double factor = theoretical_rate(parse_variant(args.variant), p);

    std::optional<EpochRateComparison> comparison;
    if (p.hoffman > 0.0 && p.beta > 0.0 && p.m >= 1 && p.n >= 1) {
        comparison = epoch_rate_comparison(p);
    }

    if (args.as_json) {
        json doc = {{"variant", args.variant}, {"factor", factor}};
        if (comparison) {
            doc["per_epoch"] = {{"simple", comparison->simple_per_epoch},
                                {"block", comparison->block_per_epoch}};
            doc["block_faster_per_iteration"] = comparison->block_faster_per_iteration;
        }
        out << doc.dump(2) << "\n";
    } else {
        out << "variant:               " << args.variant << "\n"
            << "per-iteration factor:  " << format_double(factor) << "\n";
        if (comparison) {
            out << "per-epoch lower bounds: simple " << format_double(comparison->simple_per_epoch)
                << ", block " << format_double(comparison->block_per_epoch) << "\n"
                << "block faster per iteration (n_i + beta m < n): "
                << (comparison->block_faster_per_iteration ? "yes" : "no") << "\n";
        }
    }
    return kExitOk;
}

// --- experiment ---

struct ExperimentArgs {
    std::string name;
    std::string out_dir = ".";
    std::string config_path;
    Index trials = -1;
    Seed seed = 0;
    bool seed_given = false;
    int jobs = 1;
    Index n = -1, d = -1, n_e = -1, m = -1, m_eq = -1, m_ineq = -1, epochs = -1;
    double target_sq = -1.0, slack = -1.0, obtusify_slack = -1.0;
    std::string rule;
    bool with_unpruned = false;
};

// Values resolve flag > config file > environment/default.
template <typename T>
void apply_config(const json& doc, const char* key, T& value, bool flag_given) {
    if (!flag_given && doc.contains(key)) {
        value = doc.at(key).get<T>();
    }
}

int cmd_experiment(const ExperimentArgs& args, const CLI::App* sub, std::ostream& out) {
    json config;
    if (!args.config_path.empty()) {
        std::ifstream in(args.config_path);
        if (!in) throw ParseError("cannot open: " + args.config_path);
        try {
            in >> config;
        } catch (const json::exception& e) {
            throw ParseError(args.config_path + ": " + e.what());
        }
    }
    auto given = [&](const std::string& flag) { return sub->count(flag) > 0; };

    Index trials = args.trials;
    Seed seed = args.seed;
    int jobs = args.jobs;
    bool with_unpruned = args.with_unpruned;
    std::string rule = args.rule;
    apply_config(config, "trials", trials, given("--trials"));
    apply_config(config, "jobs", jobs, given("--jobs"));
    apply_config(config, "rule", rule, given("--rule"));
    apply_config(config, "with_unpruned", with_unpruned, given("--with-unpruned"));
    if (given("--seed")) {
        seed = args.seed;
    } else if (config.contains("seed")) {
        seed = config.at("seed").get<Seed>();
    } else {
        seed = env_seed_or_zero();
    }

    std::filesystem::create_directories(args.out_dir);
    auto path_for = [&](const std::string& name) { return args.out_dir + "/" + name; };

    if (args.name == "fig3") {
        Fig3Config cfg;
        if (trials >= 0) cfg.trials = trials;
        cfg.seed = seed;
        cfg.jobs = jobs;
        Index n = args.n, d = args.d, n_e = args.n_e, m = args.m;
        double target_sq = args.target_sq;
        apply_config(config, "n", n, given("--n"));
        apply_config(config, "d", d, given("--d"));
        apply_config(config, "n_e", n_e, given("--ne"));
        apply_config(config, "m", m, given("--m"));
        apply_config(config, "target_sq", target_sq, given("--target-sq"));
        if (n > 0) cfg.n = n;
        if (d > 0) cfg.d = d;
        if (n_e >= 0) cfg.n_e = n_e;
        if (m > 0) cfg.m = m;
        if (target_sq > 0) cfg.target = std::sqrt(target_sq);
        if (!rule.empty()) cfg.rule = parse_rule(rule);

        const Fig3Result result = run_experiment_fig3(cfg);
        export_traces(result.block.stats, path_for("fig3_block.csv"), TraceFormat::Csv,
                      /*squared=*/true);
        export_traces(result.simple.stats, path_for("fig3_simple.csv"), TraceFormat::Csv,
                      /*squared=*/true);
        {
            const std::string path = path_for("fig3_times.csv");
            std::ofstream times(path);
            if (!times) throw IoError("cannot open for writing: " + path);
            times << "trial,block_seconds,simple_seconds,block_converged,simple_converged\n";
            for (Index t = 0; t < cfg.trials; ++t) {
                const auto idx = static_cast<std::size_t>(t);
                times << t << ',' << format_double(result.block.seconds_to_target[idx]) << ','
                      << format_double(result.simple.seconds_to_target[idx]) << ','
                      << int(result.block.converged[idx]) << ','
                      << int(result.simple.converged[idx]) << '\n';
            }
            if (!times) throw IoError("write failed: " + path);
        }
        Index block_ok = 0, simple_ok = 0, block_faster = 0;
        for (Index t = 0; t < cfg.trials; ++t) {
            const auto idx = static_cast<std::size_t>(t);
            block_ok += result.block.converged[idx] != 0;
            simple_ok += result.simple.converged[idx] != 0;
            if (result.block.converged[idx] && result.simple.converged[idx] &&
                result.block.seconds_to_target[idx] < result.simple.seconds_to_target[idx]) {
                ++block_faster;
            }
        }
        out << "fig3: trials=" << cfg.trials << " block_converged=" << block_ok
            << " simple_converged=" << simple_ok << " block_faster=" << block_faster << "\n"
            << "wrote " << path_for("fig3_block.csv") << ", " << path_for("fig3_simple.csv")
            << ", " << path_for("fig3_times.csv") << "\n";
        return kExitOk;
    }

    if (args.name == "fig2") {
        Fig2Config cfg;
        if (trials >= 0) cfg.trials = trials;
        cfg.seed = seed;
        cfg.jobs = jobs;
        Index n = args.n, d = args.d, n_e = args.n_e, m_eq = args.m_eq, m_ineq = args.m_ineq,
              epochs = args.epochs;
        double slack = args.slack, obtusify_slack = args.obtusify_slack;
        apply_config(config, "n", n, given("--n"));
        apply_config(config, "d", d, given("--d"));
        apply_config(config, "n_e", n_e, given("--ne"));
        apply_config(config, "m_eq", m_eq, given("--m-eq"));
        apply_config(config, "m_ineq", m_ineq, given("--m-ineq"));
        apply_config(config, "epochs", epochs, given("--epochs"));
        apply_config(config, "slack", slack, given("--slack"));
        apply_config(config, "obtusify_slack", obtusify_slack, given("--obtusify-slack"));
        if (n > 0) cfg.n = n;
        if (d > 0) cfg.d = d;
        if (n_e >= 0) cfg.n_e = n_e;
        if (m_eq > 0) cfg.m_eq = m_eq;
        if (m_ineq > 0) cfg.m_ineq = m_ineq;
        if (epochs > 0) cfg.epochs = epochs;
        if (slack >= 0) cfg.base_slack = slack;
        if (obtusify_slack >= 0) cfg.obtusify_slack = obtusify_slack;
        if (!rule.empty()) cfg.rule = parse_rule(rule);

        std::vector<Fig2Arm> arms = {Fig2Arm::BlockNonObtuse, Fig2Arm::BlockObtuse,
                                     Fig2Arm::Simple};
        if (with_unpruned) arms.push_back(Fig2Arm::FullBlockNonObtuse);
        for (Fig2Arm arm : arms) {
            const TrialStats stats = run_experiment_fig2(cfg, arm);
            const std::string path = path_for(std::string("fig2_") + fig2_arm_name(arm) + ".csv");
            export_traces(stats, path, TraceFormat::Csv);
            const auto& rows = stats.find("epoch")->rows;
            out << "fig2 " << fig2_arm_name(arm) << ": trials=" << cfg.trials
                << " final_median_residual=" << format_double(rows.back().median) << " -> " << path
                << "\n";
        }
        return kExitOk;
    }

    throw UsageError("unknown experiment: " + args.name);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Randomized block Kaczmarz solvers for mixed equality/inequality systems"};
    app.require_subcommand(1);

    SolveArgs solve_args;
    solve_args.seed = env_seed_or_zero();
    auto* solve = app.add_subcommand("solve", "Run a solver on a system file");
    solve->add_option("--system", solve_args.system_path, "System JSON file")->required();
    solve->add_option("--algorithm", solve_args.algorithm,
                      "simple | ll | block | alg1 | alg2")
        ->required()
        ->check(CLI::IsMember({"simple", "ll", "block", "alg1", "alg2"}));
    solve->add_option("--paving", solve_args.paving_path, "Equality paving JSON");
    solve->add_option("--ineq-paving", solve_args.ineq_paving_path, "Inequality paving JSON");
    solve->add_option("--epsilon", solve_args.epsilon, "Residual tolerance");
    solve->add_option("--max-iters", solve_args.max_iters, "Iteration cap (0: auto)");
    solve->add_option("--seed", solve_args.seed, "RNG seed (env KACZMARZ_SEED as fallback)");
    solve->add_option("--rule", solve_args.rule, "paving | rowcount")
        ->check(CLI::IsMember({"paving", "rowcount"}));
    solve->add_option("--x0", solve_args.x0, "zero | atb")
        ->check(CLI::IsMember({"zero", "atb"}));
    solve->add_option("--x0-file", solve_args.x0_file, "Initial iterate file");
    solve->add_option("--out-solution", solve_args.out_solution, "Solution output path");
    solve->add_option("--out-trace", solve_args.out_trace, "Trace CSV output path");
    solve->add_flag("--json", solve_args.as_json, "Machine-readable summary");

    PaveArgs pave_args;
    pave_args.seed = env_seed_or_zero();
    auto* pave = app.add_subcommand("pave", "Build and measure a row paving");
    pave->add_option("--system", pave_args.system_path, "System JSON file")->required();
    pave->add_option("--m", pave_args.m, "Number of blocks")->required();
    pave->add_option("--seed", pave_args.seed, "RNG seed (env KACZMARZ_SEED as fallback)");
    pave->add_option("--target", pave_args.target, "eq | ineq | all")
        ->check(CLI::IsMember({"eq", "ineq", "all"}));
    pave->add_flag("--obtusify", pave_args.do_obtusify,
                   "Apply the sign-flip transform to the inequality blocks");
    pave->add_option("--slack", pave_args.slack, "Slack added after the transform");
    pave->add_option("--delta", pave_args.delta, "Regime-check delta in (0,1)");
    pave->add_option("--C", pave_args.c, "Regime-check constant");
    pave->add_option("--out", pave_args.out_paving, "Paving JSON output path");
    pave->add_option("--out-system", pave_args.out_system, "Transformed system output path");
    pave->add_flag("--json", pave_args.as_json, "Machine-readable report");

    BoundArgs bound_args;
    auto* bound = app.add_subcommand("bound", "Evaluate theoretical contraction factors");
    bound->add_option("--variant", bound_args.variant,
                      "simple | single | block | mixed | mixed-paved | double")
        ->required();
    bound->add_option("--L", bound_args.params.hoffman, "Hoffman constant");
    bound->add_option("--sigma-min", bound_args.params.sigma_min, "Smallest singular value");
    bound->add_option("--frob-sq", bound_args.params.frob_norm_sq, "||A||_F^2");
    bound->add_option("--spec-eq-sq", bound_args.params.spec_norm_sq_eq, "||A_=||^2");
    bound->add_option("--beta", bound_args.params.beta, "Equality paving bound");
    bound->add_option("--m", bound_args.params.m, "Equality paving size");
    bound->add_option("--beta-p", bound_args.params.beta_p, "Inequality paving bound");
    bound->add_option("--m-p", bound_args.params.m_p, "Inequality paving size");
    bound->add_option("--ni", bound_args.params.n_i, "Inequality row count");
    bound->add_option("--n", bound_args.params.n, "Total row count");
    bound->add_option("--C", bound_args.params.c, "Paving-existence constant");
    bound->add_option("--system", bound_args.system_path, "Derive spectral params from a system");
    bound->add_option("--paving", bound_args.paving_path, "Derive beta, m from a paving");
    bound->add_option("--ineq-paving", bound_args.ineq_paving_path,
                      "Derive beta', m' from a paving");
    bound->add_flag("--json", bound_args.as_json, "Machine-readable report");

    ExperimentArgs exp_args;
    auto* experiment = app.add_subcommand("experiment", "Reproduce the benchmark protocols");
    experiment->add_option("name", exp_args.name, "fig2 | fig3")->required();
    experiment->add_option("--trials", exp_args.trials, "Trial count");
    experiment->add_option("--seed", exp_args.seed, "Master seed");
    experiment->add_option("--jobs", exp_args.jobs, "Concurrent trials (1 for timing fidelity)");
    experiment->add_option("--out-dir", exp_args.out_dir, "Output directory");
    experiment->add_option("--config", exp_args.config_path, "JSON config mirroring the flags");
    experiment->add_option("--n", exp_args.n, "Rows");
    experiment->add_option("--d", exp_args.d, "Columns");
    experiment->add_option("--ne", exp_args.n_e, "Equality rows");
    experiment->add_option("--m", exp_args.m, "Equality paving size (fig3)");
    experiment->add_option("--m-eq", exp_args.m_eq, "Equality paving size (fig2)");
    experiment->add_option("--m-ineq", exp_args.m_ineq, "Inequality paving size (fig2)");
    experiment->add_option("--epochs", exp_args.epochs, "Epoch budget (fig2)");
    experiment->add_option("--target-sq", exp_args.target_sq, "Squared residual target (fig3)");
    experiment->add_option("--slack", exp_args.slack, "Generator slack (fig2)");
    experiment->add_option("--obtusify-slack", exp_args.obtusify_slack,
                           "Slack restored after sign flips (fig2)");
    experiment->add_option("--rule", exp_args.rule, "paving | rowcount")
        ->check(CLI::IsMember({"paving", "rowcount"}));
    experiment->add_flag("--with-unpruned", exp_args.with_unpruned,
                         "Also run the unpruned double-block arm (fig2)");

    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("kaczmarz");
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (app.got_subcommand(solve)) return cmd_solve(solve_args, out);
        if (app.got_subcommand(pave)) return cmd_pave(pave_args, out);
        if (app.got_subcommand(bound)) return cmd_bound(bound_args, out);
        if (app.got_subcommand(experiment)) return cmd_experiment(exp_args, experiment, out);
        err << "usage error: no subcommand\n";
        return kExitUsage;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const BadBlockCountError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const InvalidParamsError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << "\n";
        return kExitParse;
    } catch (const IoError& e) {
        err << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const KaczmarzError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}

}  // namespace kaczmarz::cli
