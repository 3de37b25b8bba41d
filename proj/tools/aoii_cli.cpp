// Batch front-end for the AoII evaluation library: verifies the threshold-1
// optimality condition over parameter grids, sweeps expected-AoII curves,
// runs the truncated-MDP solvers and the Monte Carlo simulator.
//
// Exit codes: 0 success, 1 verification/solver failure, 2 usage or config error.

#include "CLI11.hpp"

#include <cstdio>
#include <exception>
#include <string>

#include "aoii/report.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_path;
    std::string format;
    int threads = 0;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_seed) {
    cmd->add_option("--config", args.config_path, "experiment config (JSON)")
        ->required();
    cmd->add_option("--out", args.out_path, "output path (default: stdout)");
    cmd->add_option("--format", args.format, "output format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--threads", args.threads, "worker threads (default: all)");
    if (with_seed) {
        cmd->add_option("--seed", args.seed, "override the simulation seed")
            ->each([&args](const std::string&) { args.seed_set = true; });
    }
}

aoii::ExperimentConfig load(const CommonArgs& args) {
    aoii::ExperimentConfig cfg = aoii::load_config_file(args.config_path);
    if (!args.out_path.empty()) cfg.out_path = args.out_path;
    if (!args.format.empty()) cfg.format = args.format;
    if (args.seed_set) cfg.simulation.seed = args.seed;
    return cfg;
}

std::string default_format(const std::string& configured,
                           const std::string& fallback) {
    return configured.empty() ? fallback : configured;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"expected Age of Incorrect Information over random-delay channels"};
    app.require_subcommand(1);

    CommonArgs verify_args, sweep_args, solve_args, sim_args;
    CLI::App* verify = app.add_subcommand(
        "verify-condition1",
        "evaluate the threshold-1 optimality condition over a parameter grid");
    add_common(verify, verify_args, false);
    CLI::App* sweep = app.add_subcommand(
        "sweep", "expected AoII of threshold policies over parameter grids");
    add_common(sweep, sweep_args, true);
    CLI::App* solve = app.add_subcommand(
        "solve", "run relative value iteration and policy iteration");
    add_common(solve, solve_args, false);
    CLI::App* simulate = app.add_subcommand(
        "simulate", "Monte Carlo simulation of a threshold policy");
    add_common(simulate, sim_args, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (verify->parsed()) {
            const auto cfg = load(verify_args);
            const auto rows = aoii::run_verify_condition1(cfg, verify_args.threads);
            const std::string format = default_format(cfg.format, "csv");
            if (format == "csv") {
                aoii::detail::write_payload(aoii::condition1_csv(rows), cfg.out_path);
            } else {
                aoii::detail::write_payload(aoii::condition1_json(rows).dump(2) + "\n",
                                            cfg.out_path);
            }
            if (cfg.expect_all_hold) {
                for (const auto& row : rows) {
                    if (!row.report.holds) {
                        std::fprintf(stderr,
                                     "condition does not hold at kind=%s p=%g "
                                     "t_max=%d\n",
                                     row.delay_kind.c_str(), row.p, row.t_max);
                        return 1;
                    }
                }
            }
            return 0;
        }
        if (sweep->parsed()) {
            const auto cfg = load(sweep_args);
            const auto rows = aoii::run_sweep(cfg, sweep_args.threads);
            const std::string format = default_format(cfg.format, "csv");
            if (format == "csv") {
                aoii::detail::write_payload(aoii::sweep_csv(rows), cfg.out_path);
            } else {
                aoii::detail::write_payload(aoii::sweep_json(rows).dump(2) + "\n",
                                            cfg.out_path);
            }
            return 0;
        }
        if (solve->parsed()) {
            const auto cfg = load(solve_args);
            const auto report = aoii::run_solve(cfg);
            aoii::detail::write_payload(report.dump(2) + "\n", cfg.out_path);
            return 0;
        }
        if (simulate->parsed()) {
            const auto cfg = load(sim_args);
            const auto report = aoii::run_simulate(cfg);
            aoii::detail::write_payload(report.dump(2) + "\n", cfg.out_path);
            return 0;
        }
    } catch (const aoii::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const aoii::NonConvergenceError& e) {
        std::fprintf(stderr, "solver error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
