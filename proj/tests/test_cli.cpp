#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "kaczmarz/experiment.hpp"
#include "kaczmarz/paving.hpp"
#include "kaczmarz/system.hpp"

using namespace kaczmarz;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliRun {
    int exit_code = 0;
    std::string out;
    std::string err;
};

CliRun run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    CliRun result;
    result.exit_code = cli::run_cli(args, out, err);
    result.out = out.str();
    result.err = err.str();
    return result;
}

fs::path make_workdir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "kaczmarz_cli_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string write_small_system(const fs::path& dir, Index n = 60, Index d = 10, Index n_e = 45,
                               Seed seed = 7, double slack = 0.1) {
    const auto gen = gen_gaussian_system(n, d, n_e, seed, slack);
    const auto path = (dir / "system.json").string();
    save_system_json(gen.system, path);
    return path;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Trace CSVs carry cumulative seconds in the last column; drop it before
// comparing runs.
std::string strip_last_column(const std::string& csv) {
    std::stringstream in(csv), out;
    std::string line;
    while (std::getline(in, line)) {
        const auto pos = line.rfind(',');
        out << line.substr(0, pos) << "\n";
    }
    return out.str();
}

// Experiment stats CSVs are deterministic except for rows on the time axis.
std::string drop_time_rows(const std::string& csv) {
    std::stringstream in(csv), out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find(",time,") == std::string::npos) out << line << "\n";
    }
    return out.str();
}

}  // namespace

TEST_CASE("solve converges on a generated system") {
    const auto dir = make_workdir("solve_ok");
    const auto sys_path = write_small_system(dir);
    const auto run1 = run({"pave", "--system", sys_path, "--m", "5", "--seed", "3", "--out",
                           (dir / "paving.json").string()});
    REQUIRE(run1.exit_code == 0);

    const CliRun solve = run({"solve", "--system", sys_path, "--algorithm", "alg1", "--paving",
                              (dir / "paving.json").string(), "--epsilon", "1e-7", "--seed", "5",
                              "--out-solution", (dir / "x.txt").string(), "--out-trace",
                              (dir / "trace.csv").string(), "--json"});
    CHECK(solve.exit_code == 0);
    const json doc = json::parse(solve.out);
    CHECK(doc.at("converged").get<bool>());
    CHECK(doc.at("residual").get<double>() <= 1e-7);
    CHECK(fs::exists(dir / "x.txt"));
    CHECK(fs::exists(dir / "trace.csv"));
}

TEST_CASE("solve exits 0 with a trivial trace when x0 is already feasible") {
    const auto dir = make_workdir("solve_feasible");
    // b = 0 with equality rows only: x0 = zero is exactly feasible.
    const auto gen = gen_gaussian_system(8, 4, 8, 2, 0.0);
    const MixedSystem sys(gen.system.a(), Vector::Zero(8), 8);
    const auto sys_path = (dir / "system.json").string();
    save_system_json(sys, sys_path);

    const CliRun solve = run({"solve", "--system", sys_path, "--algorithm", "ll",
                              "--out-solution", (dir / "x.txt").string(), "--out-trace",
                              (dir / "trace.csv").string()});
    CHECK(solve.exit_code == 0);
    const std::string trace = slurp((dir / "trace.csv").string());
    CHECK(std::count(trace.begin(), trace.end(), '\n') == 2);  // header + initial record
}

TEST_CASE("solve usage and parse failures use distinct exit codes") {
    const auto dir = make_workdir("solve_fail");
    const auto sys_path = write_small_system(dir);

    SUBCASE("alg2 without an inequality paving is a usage error") {
        run({"pave", "--system", sys_path, "--m", "5", "--out", (dir / "p.json").string()});
        const CliRun r = run({"solve", "--system", sys_path, "--algorithm", "alg2", "--paving",
                              (dir / "p.json").string()});
        CHECK(r.exit_code == cli::kExitUsage);
        CHECK(r.err.find("ineq-paving") != std::string::npos);
    }
    SUBCASE("unknown algorithm is a usage error") {
        const CliRun r = run({"solve", "--system", sys_path, "--algorithm", "sor"});
        CHECK(r.exit_code == cli::kExitUsage);
    }
    SUBCASE("missing system file is a parse error") {
        const CliRun r = run({"solve", "--system", (dir / "nope.json").string(), "--algorithm",
                              "ll"});
        CHECK(r.exit_code == cli::kExitParse);
    }
    SUBCASE("malformed system file is a parse error") {
        const auto bad = (dir / "bad.json").string();
        std::ofstream(bad) << "{ not json";
        const CliRun r = run({"solve", "--system", bad, "--algorithm", "ll"});
        CHECK(r.exit_code == cli::kExitParse);
    }
    SUBCASE("iteration cap maps to the not-converged exit code") {
        const CliRun r = run({"solve", "--system", sys_path, "--algorithm", "ll", "--epsilon",
                              "1e-13", "--max-iters", "3", "--out-solution",
                              (dir / "x.txt").string()});
        CHECK(r.exit_code == cli::kExitNotConverged);
    }
}

TEST_CASE("pave reports the paving and regime diagnostics") {
    const auto dir = make_workdir("pave");
    const auto sys_path = write_small_system(dir, 60, 10, 45, 11);

    SUBCASE("singleton paving of a standardized system has beta 1") {
        const CliRun r = run({"pave", "--system", sys_path, "--m", "45", "--json", "--out",
                              (dir / "p.json").string()});
        REQUIRE(r.exit_code == 0);
        const json doc = json::parse(r.out);
        CHECK(doc.at("beta").get<double>() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(doc.at("regime").at("beta_upper_ok").get<bool>());
    }
    SUBCASE("benchmark shape: sixteen blocks of twenty-five") {
        const auto big_dir = make_workdir("pave_big");
        const auto big = write_small_system(big_dir, 500, 100, 400, 4, 0.0);
        const CliRun r = run({"pave", "--system", big, "--m", "16", "--seed", "9", "--out",
                              (big_dir / "p.json").string()});
        REQUIRE(r.exit_code == 0);
        const RowPaving paving = load_paving_json((big_dir / "p.json").string());
        CHECK(paving.size() == 16);
        for (const auto& block : paving.blocks) CHECK(block.size() == 25);
        CHECK(paving.has_beta());
    }
    SUBCASE("bad block count is a usage error") {
        const CliRun r = run({"pave", "--system", sys_path, "--m", "0"});
        CHECK(r.exit_code == cli::kExitUsage);
        const CliRun r2 = run({"pave", "--system", sys_path, "--m", "99"});
        CHECK(r2.exit_code == cli::kExitUsage);
    }
    SUBCASE("obtusify requires an inequality target and an output system") {
        CHECK(run({"pave", "--system", sys_path, "--m", "5", "--obtusify"}).exit_code ==
              cli::kExitUsage);
        const CliRun r = run({"pave", "--system", sys_path, "--m", "5", "--target", "ineq",
                              "--obtusify", "--out", (dir / "p.json").string(), "--out-system",
                              (dir / "sys2.json").string(), "--json"});
        REQUIRE(r.exit_code == 0);
        CHECK(fs::exists(dir / "sys2.json"));
        const json doc = json::parse(r.out);
        CHECK(doc.at("pairwise_obtuse").is_array());
        const MixedSystem transformed = load_system_json((dir / "sys2.json").string());
        CHECK(transformed.rows() == 60);
    }
}

TEST_CASE("bound prints factors and the per-epoch comparison") {
    SUBCASE("identity-system parameters") {
        const CliRun r = run({"bound", "--variant", "simple", "--sigma-min", "1", "--frob-sq",
                              "5", "--json"});
        REQUIRE(r.exit_code == 0);
        CHECK(json::parse(r.out).at("factor").get<double>() == doctest::Approx(0.8));
    }
    SUBCASE("mixed variant with the comparison block") {
        const CliRun r = run({"bound", "--variant", "mixed", "--L", "2", "--ni", "100", "--beta",
                              "1.1", "--m", "16", "--n", "500", "--json"});
        REQUIRE(r.exit_code == 0);
        const json doc = json::parse(r.out);
        CHECK(doc.at("factor").get<double>() ==
              doctest::Approx(1.0 - 1.0 / (4.0 * 117.6)).epsilon(1e-12));
        CHECK(doc.at("block_faster_per_iteration").get<bool>());
        CHECK(doc.at("per_epoch").at("simple").get<double>() == doctest::Approx(0.25));
    }
    SUBCASE("invalid parameters exit 2") {
        const CliRun r = run({"bound", "--variant", "block", "--sigma-min", "3", "--beta", "1",
                              "--m", "2"});
        CHECK(r.exit_code == cli::kExitUsage);
    }
}

TEST_CASE("experiment fig3 writes stats and timing files") {
    const auto dir = make_workdir("exp_fig3");
    const CliRun r = run({"experiment", "fig3", "--trials", "2", "--seed", "3", "--n", "40",
                          "--d", "8", "--ne", "32", "--m", "4", "--out-dir", dir.string()});
    REQUIRE(r.exit_code == 0);
    for (const char* name : {"fig3_block.csv", "fig3_simple.csv", "fig3_times.csv"}) {
        CHECK(fs::exists(dir / name));
    }
    const std::string block = slurp((dir / "fig3_block.csv").string());
    CHECK(block.rfind("index,axis,min,median,max", 0) == 0);
    const std::string times = slurp((dir / "fig3_times.csv").string());
    CHECK(times.find("trial,block_seconds,simple_seconds") == 0);
}

TEST_CASE("experiment fig2 writes one file per arm") {
    const auto dir = make_workdir("exp_fig2");
    const CliRun r = run({"experiment", "fig2", "--trials", "2", "--seed", "3", "--n", "45",
                          "--d", "9", "--ne", "30", "--m-eq", "6", "--m-ineq", "3", "--epochs",
                          "8", "--out-dir", dir.string(), "--with-unpruned"});
    REQUIRE(r.exit_code == 0);
    for (const char* name : {"fig2_block_nonobtuse.csv", "fig2_block_obtuse.csv",
                             "fig2_simple.csv", "fig2_full_block_nonobtuse.csv"}) {
        CHECK(fs::exists(dir / name));
    }
}

TEST_CASE("experiment accepts a JSON config with flag overrides") {
    const auto dir = make_workdir("exp_config");
    const auto config_path = (dir / "config.json").string();
    std::ofstream(config_path) << R"({"trials": 2, "seed": 5, "n": 40, "d": 8, "n_e": 32, "m": 4})";
    const CliRun r = run({"experiment", "fig3", "--config", config_path, "--out-dir",
                          dir.string(), "--trials", "1"});
    REQUIRE(r.exit_code == 0);
    // --trials overrides the config; a single trial collapses min/median/max.
    const std::string csv = slurp((dir / "fig3_block.csv").string());
    std::stringstream in(csv);
    std::string line;
    std::getline(in, line);
    bool saw_data = false;
    while (std::getline(in, line)) {
        if (line.find(",iteration,") == std::string::npos) continue;
        saw_data = true;
        std::stringstream fields(line);
        std::string idx, axis, mn, md, mx;
        std::getline(fields, idx, ',');
        std::getline(fields, axis, ',');
        std::getline(fields, mn, ',');
        std::getline(fields, md, ',');
        std::getline(fields, mx, ',');
        CHECK(mn == md);
        CHECK(md == mx);
    }
    CHECK(saw_data);
}

TEST_CASE("single-trial experiment collapses the spread") {
    const auto dir = make_workdir("exp_single");
    const CliRun r = run({"experiment", "fig2", "--trials", "1", "--seed", "8", "--n", "45",
                          "--d", "9", "--ne", "30", "--m-eq", "6", "--m-ineq", "3", "--epochs",
                          "5", "--out-dir", dir.string()});
    REQUIRE(r.exit_code == 0);
    const TrialStats stats =
        import_traces((dir / "fig2_simple.csv").string(), TraceFormat::Csv);
    for (const auto& row : stats.find("epoch")->rows) {
        CHECK(row.min == row.median);
        CHECK(row.median == row.max);
    }
}

TEST_CASE("repeated runs with the same seed are byte-identical on non-timing output") {
    const auto dir_a = make_workdir("det_a");
    const auto dir_b = make_workdir("det_b");
    const auto sys_a = write_small_system(dir_a, 50, 10, 40, 21);
    const auto sys_b = write_small_system(dir_b, 50, 10, 40, 21);
    CHECK(slurp(sys_a) == slurp(sys_b));

    auto run_all = [&](const fs::path& dir, const std::string& sys_path) {
        REQUIRE(run({"pave", "--system", sys_path, "--m", "5", "--seed", "2", "--out",
                     (dir / "p.json").string()})
                    .exit_code == 0);
        REQUIRE(run({"solve", "--system", sys_path, "--algorithm", "alg1", "--paving",
                     (dir / "p.json").string(), "--seed", "4", "--epsilon", "1e-7",
                     "--out-solution", (dir / "x.txt").string(), "--out-trace",
                     (dir / "t.csv").string()})
                    .exit_code == 0);
        REQUIRE(run({"experiment", "fig3", "--trials", "2", "--seed", "6", "--n", "40", "--d",
                     "8", "--ne", "32", "--m", "4", "--out-dir", dir.string()})
                    .exit_code == 0);
    };
    run_all(dir_a, sys_a);
    run_all(dir_b, sys_b);

    CHECK(slurp((dir_a / "p.json").string()) == slurp((dir_b / "p.json").string()));
    CHECK(slurp((dir_a / "x.txt").string()) == slurp((dir_b / "x.txt").string()));
    CHECK(strip_last_column(slurp((dir_a / "t.csv").string())) ==
          strip_last_column(slurp((dir_b / "t.csv").string())));
    CHECK(drop_time_rows(slurp((dir_a / "fig3_block.csv").string())) ==
          drop_time_rows(slurp((dir_b / "fig3_block.csv").string())));
    CHECK(drop_time_rows(slurp((dir_a / "fig3_simple.csv").string())) ==
          drop_time_rows(slurp((dir_b / "fig3_simple.csv").string())));
}

TEST_CASE("KACZMARZ_SEED is the fallback seed") {
    const auto dir = make_workdir("env_seed");
    const auto sys_path = write_small_system(dir);
    setenv("KACZMARZ_SEED", "424242", 1);
    const CliRun r = run({"solve", "--system", sys_path, "--algorithm", "ll", "--epsilon",
                          "1e-6", "--out-solution", (dir / "x.txt").string(), "--json"});
    unsetenv("KACZMARZ_SEED");
    REQUIRE(r.exit_code == 0);
    CHECK(json::parse(r.out).at("seed").get<Seed>() == 424242);
}

TEST_CASE("help and bad subcommands") {
    CHECK(run({"--help"}).exit_code == 0);
    CHECK(run({"frobnicate"}).exit_code == cli::kExitUsage);
    CHECK(run({}).exit_code == cli::kExitUsage);
}
