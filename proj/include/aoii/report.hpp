#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "aoii/mdp.hpp"
#include "aoii/model.hpp"
#include "aoii/simulator.hpp"
#include "aoii/threshold.hpp"

namespace aoii {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Delay-family description as it appears in experiment configs.
struct DelaySpec {
    std::string kind = "geometric";  // geometric | zipf | twopoint | pmf
    DelayVariant variant = DelayVariant::GuaranteedDelivery;
    double p_s = 0.7;
    double a = 0.0;
    std::vector<double> pmf;
    double p_tail = 0.0;
    int t_max = 5;

    bool uses_p_s() const { return kind == "geometric"; }
    bool uses_a() const { return kind == "zipf"; }
};

DelayModel build_delay(const DelaySpec& spec);

struct SolverSettings {
    int m = 200;
    double epsilon = 1e-9;
    long max_iter = 500000;
};

struct SimSettings {
    long long slots = 10'000'000;
    std::uint64_t seed = 1;
    long long warmup = 10'000;
    int batch_count = 30;
};

/// Threshold value in configs: a nonnegative integer or "inf".
struct TauValue {
    bool infinite = false;
    int tau = 1;
    std::string label() const { return infinite ? "inf" : std::to_string(tau); }
    ThresholdPolicy policy() const {
        return infinite ? ThresholdPolicy::infinite() : ThresholdPolicy(tau);
    }
};

struct ExperimentConfig {
    DelaySpec delay;
    double p = 0.35;
    TauValue tau;

    // Grids; an absent grid falls back to the scalar above, an explicitly
    // empty grid yields zero points.
    std::optional<std::vector<double>> p_grid;
    std::optional<std::vector<double>> p_s_grid;
    std::optional<std::vector<double>> a_grid;
    std::optional<std::vector<int>> t_max_grid;
    std::optional<std::vector<TauValue>> tau_grid;
    std::vector<DelayVariant> variants;

    // verify-condition1 iterates delay families instead of a single spec.
    std::optional<std::vector<DelaySpec>> systems;
    bool expect_all_hold = false;

    bool sweep_condition1 = true;
    bool sweep_simulate = false;
    bool sweep_solve = false;

    SolverSettings solver;
    SimSettings simulation;

    std::string out_path;
    std::string format;  // "csv" or "json"; empty = command default
};

/// Parses and validates a config document. Grid values outside the model
/// preconditions are rejected here, before any computation runs.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config_file(const std::string& path);

struct Condition1Row {
    std::string delay_kind;
    std::string variant;
    double p = 0.0;
    std::optional<double> p_s;
    std::optional<double> a;
    int t_max = 0;
    Condition1Report report;
};

std::vector<Condition1Row> run_verify_condition1(const ExperimentConfig& cfg,
                                                 int threads = 0);
std::string condition1_csv(const std::vector<Condition1Row>& rows);
nlohmann::json condition1_json(const std::vector<Condition1Row>& rows);

struct SweepRow {
    std::string delay_kind;
    std::string variant;
    double p = 0.0;
    std::optional<double> p_s;
    std::optional<double> a;
    int t_max = 0;
    std::string tau;
    std::optional<double> expected_aoii;
    std::optional<double> sim_mean;
    std::optional<double> sim_stderr;
    std::optional<bool> condition1_holds;
    std::string solver_policy_summary;
    std::string error;
};

std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, int threads = 0);
std::string sweep_csv(const std::vector<SweepRow>& rows);
nlohmann::json sweep_json(const std::vector<SweepRow>& rows);

nlohmann::json run_solve(const ExperimentConfig& cfg);
nlohmann::json run_simulate(const ExperimentConfig& cfg);

/// 12-significant-digit rendering used for all CSV numbers.
std::string format_sig(double v);
/// RFC-4180 quoting.
std::string csv_escape(const std::string& field);

namespace detail {
/// Writes to out_path, or stdout when the path is empty.
void write_payload(const std::string& payload, const std::string& out_path);
}  // namespace detail

}  // namespace aoii
