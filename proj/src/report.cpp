#include "aoii/report.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <sstream>

namespace aoii {

namespace {

using nlohmann::json;

[[noreturn]] void config_fail(const std::string& field, const std::string& what) {
    throw ConfigError("config." + field + ": " + what);
}

double require_p(double value, const std::string& field) {
    if (!(value > 0.0 && value <= 0.5)) {
        config_fail(field, "p must satisfy 0 < p <= 0.5 (got " +
                               std::to_string(value) + ")");
    }
    return value;
}

double require_p_s(double value, const std::string& field) {
    if (!(value >= 0.0 && value < 1.0)) {
        config_fail(field, "p_s must satisfy 0 <= p_s < 1 (got " +
                               std::to_string(value) + ")");
    }
    return value;
}

double require_a(double value, const std::string& field) {
    if (!(value >= 0.0)) {
        config_fail(field, "a must be >= 0 (got " + std::to_string(value) + ")");
    }
    return value;
}

int require_t_max(int value, const std::string& field) {
    if (value < 2) {
        config_fail(field, "t_max must be >= 2 (got " + std::to_string(value) + ")");
    }
    return value;
}

DelayVariant parse_variant(const json& j, const std::string& field) {
    if (!j.is_string()) config_fail(field, "expected \"guaranteed\" or \"discard\"");
    const std::string s = j.get<std::string>();
    if (s == "guaranteed") return DelayVariant::GuaranteedDelivery;
    if (s == "discard") return DelayVariant::DiscardAfterTmax;
    config_fail(field, "unknown variant \"" + s + "\"");
}

std::string variant_name(DelayVariant v) {
    return v == DelayVariant::GuaranteedDelivery ? "guaranteed" : "discard";
}

TauValue parse_tau(const json& j, const std::string& field) {
    TauValue t;
    if (j.is_string()) {
        if (j.get<std::string>() != "inf") {
            config_fail(field, "tau must be a nonnegative integer or \"inf\"");
        }
        t.infinite = true;
        return t;
    }
    if (!j.is_number_integer() || j.get<long long>() < 0) {
        config_fail(field, "tau must be a nonnegative integer or \"inf\"");
    }
    t.tau = j.get<int>();
    return t;
}

// Grids accept either an explicit array or {"from","to","step"}.
template <typename T, typename Check>
std::vector<T> parse_grid(const json& j, const std::string& field, Check check) {
    std::vector<T> values;
    if (j.is_array()) {
        int i = 0;
        for (const auto& item : j) {
            if (!item.is_number()) config_fail(field, "grid entries must be numbers");
            values.push_back(check(item.get<T>(), field + "[" + std::to_string(i) + "]"));
            ++i;
        }
        return values;
    }
    if (j.is_object() && j.contains("from") && j.contains("to") && j.contains("step")) {
        const double from = j.at("from").get<double>();
        const double to = j.at("to").get<double>();
        const double step = j.at("step").get<double>();
        if (!(step > 0.0) || to < from) {
            config_fail(field, "range needs step > 0 and to >= from");
        }
        const int count = static_cast<int>(std::floor((to - from) / step + 1e-9)) + 1;
        for (int i = 0; i < count; ++i) {
            const double v = from + i * step;
            values.push_back(check(static_cast<T>(v), field + "[" + std::to_string(i) + "]"));
        }
        return values;
    }
    config_fail(field, "expected an array or {from,to,step}");
}

DelaySpec parse_delay_spec(const json& j, const std::string& field) {
    if (!j.is_object()) config_fail(field, "expected an object");
    DelaySpec spec;
    spec.kind = j.value("kind", std::string("geometric"));
    if (spec.kind != "geometric" && spec.kind != "zipf" &&
        spec.kind != "twopoint" && spec.kind != "pmf") {
        config_fail(field + ".kind", "unknown delay kind \"" + spec.kind + "\"");
    }
    if (j.contains("variant")) {
        spec.variant = parse_variant(j.at("variant"), field + ".variant");
    }
    if ((spec.kind == "zipf" || spec.kind == "twopoint") &&
        spec.variant == DelayVariant::DiscardAfterTmax) {
        config_fail(field + ".variant",
                    spec.kind + " delays support only the guaranteed variant");
    }
    if (spec.kind == "pmf") {
        if (!j.contains("pmf")) config_fail(field + ".pmf", "missing pmf array");
        for (const auto& v : j.at("pmf")) spec.pmf.push_back(v.get<double>());
        spec.t_max = static_cast<int>(spec.pmf.size());
        require_t_max(spec.t_max, field + ".pmf (length)");
        spec.p_tail = j.value("p_tail", 0.0);
    } else {
        spec.t_max = require_t_max(j.value("t_max", spec.t_max), field + ".t_max");
    }
    if (spec.kind == "geometric") {
        spec.p_s = require_p_s(j.value("p_s", spec.p_s), field + ".p_s");
    }
    if (spec.kind == "zipf") {
        spec.a = require_a(j.value("a", spec.a), field + ".a");
    }
    return spec;
}

DelaySpec with_overrides(const DelaySpec& base, DelayVariant variant,
                         std::optional<double> p_s, std::optional<double> a,
                         std::optional<int> t_max) {
    DelaySpec spec = base;
    spec.variant = variant;
    if (p_s) spec.p_s = *p_s;
    if (a) spec.a = *a;
    if (t_max) spec.t_max = *t_max;
    return spec;
}

std::string bool_name(bool b) { return b ? "true" : "false"; }

std::string opt_field(const std::optional<double>& v) {
    return v ? format_sig(*v) : std::string();
}

void write_or_print(const std::string& payload, const std::string& out_path) {
    if (out_path.empty()) {
        std::fwrite(payload.data(), 1, payload.size(), stdout);
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file " + out_path);
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
}

int resolve_threads(int threads) {
    return threads > 0 ? threads : omp_get_max_threads();
}

// Model points of a sweep, before the tau dimension.
struct SweepPoint {
    DelaySpec delay;
    double p;
};

std::string policy_summary(const TabularPolicy& policy, int check_up_to) {
    const auto tau = threshold_equivalent_tau(policy, check_up_to);
    if (!tau) return "non-threshold";
    if (*tau > check_up_to) return "threshold tau=inf";
    return "threshold tau=" + std::to_string(*tau);
}

}  // namespace

DelayModel build_delay(const DelaySpec& spec) {
    if (spec.kind == "geometric") {
        return make_delay_geometric(spec.p_s, spec.t_max, spec.variant);
    }
    if (spec.kind == "zipf") return make_delay_zipf(spec.a, spec.t_max);
    if (spec.kind == "twopoint") return make_delay_twopoint(spec.t_max);
    if (spec.kind == "pmf") {
        return make_delay_pmf(spec.pmf, spec.variant, spec.p_tail);
    }
    throw ConfigError("unknown delay kind \"" + spec.kind + "\"");
}

ExperimentConfig parse_config(const json& doc) {
    if (!doc.is_object()) throw ConfigError("config root must be an object");
    ExperimentConfig cfg;

    if (doc.contains("delay")) cfg.delay = parse_delay_spec(doc.at("delay"), "delay");
    if (doc.contains("p")) cfg.p = require_p(doc.at("p").get<double>(), "p");
    if (doc.contains("tau")) cfg.tau = parse_tau(doc.at("tau"), "tau");

    if (doc.contains("grids")) {
        const json& g = doc.at("grids");
        if (!g.is_object()) throw ConfigError("config.grids: expected an object");
        if (g.contains("p")) cfg.p_grid = parse_grid<double>(g.at("p"), "grids.p", require_p);
        if (g.contains("p_s")) {
            cfg.p_s_grid = parse_grid<double>(g.at("p_s"), "grids.p_s", require_p_s);
        }
        if (g.contains("a")) cfg.a_grid = parse_grid<double>(g.at("a"), "grids.a", require_a);
        if (g.contains("t_max")) {
            cfg.t_max_grid = parse_grid<int>(g.at("t_max"), "grids.t_max", require_t_max);
        }
        if (g.contains("tau")) {
            if (!g.at("tau").is_array()) throw ConfigError("config.grids.tau: expected an array");
            std::vector<TauValue> taus;
            int i = 0;
            for (const auto& item : g.at("tau")) {
                taus.push_back(parse_tau(item, "grids.tau[" + std::to_string(i) + "]"));
                ++i;
            }
            cfg.tau_grid = std::move(taus);
        }
    }

    if (doc.contains("variants")) {
        if (!doc.at("variants").is_array()) {
            throw ConfigError("config.variants: expected an array");
        }
        int i = 0;
        for (const auto& item : doc.at("variants")) {
            cfg.variants.push_back(parse_variant(item, "variants[" + std::to_string(i) + "]"));
            ++i;
        }
    }

    if (doc.contains("systems")) {
        if (!doc.at("systems").is_array()) {
            throw ConfigError("config.systems: expected an array");
        }
        std::vector<DelaySpec> systems;
        int i = 0;
        for (const auto& item : doc.at("systems")) {
            systems.push_back(
                parse_delay_spec(item, "systems[" + std::to_string(i) + "]"));
            ++i;
        }
        cfg.systems = std::move(systems);
    }
    cfg.expect_all_hold = doc.value("expect_all_hold", false);

    if (doc.contains("sweep")) {
        const json& s = doc.at("sweep");
        cfg.sweep_condition1 = s.value("condition1", true);
        cfg.sweep_simulate = s.value("simulate", false);
        cfg.sweep_solve = s.value("solve", false);
    }

    if (doc.contains("solver")) {
        const json& s = doc.at("solver");
        cfg.solver.m = s.value("m", cfg.solver.m);
        cfg.solver.epsilon = s.value("epsilon", cfg.solver.epsilon);
        cfg.solver.max_iter = s.value("max_iter", cfg.solver.max_iter);
        if (cfg.solver.m < 4) throw ConfigError("config.solver.m: m too small");
        if (!(cfg.solver.epsilon > 0.0)) {
            throw ConfigError("config.solver.epsilon: must be > 0");
        }
    }
    if (doc.contains("simulation")) {
        const json& s = doc.at("simulation");
        cfg.simulation.slots = s.value("slots", cfg.simulation.slots);
        cfg.simulation.seed = s.value("seed", cfg.simulation.seed);
        cfg.simulation.warmup = s.value("warmup", cfg.simulation.warmup);
        cfg.simulation.batch_count = s.value("batch_count", cfg.simulation.batch_count);
        if (cfg.simulation.slots <= cfg.simulation.warmup) {
            throw ConfigError("config.simulation: slots must exceed warmup");
        }
        if (cfg.simulation.batch_count < 2) {
            throw ConfigError("config.simulation.batch_count: must be >= 2");
        }
    }
    if (doc.contains("output")) {
        const json& o = doc.at("output");
        cfg.out_path = o.value("path", std::string());
        cfg.format = o.value("format", std::string());
        if (!cfg.format.empty() && cfg.format != "csv" && cfg.format != "json") {
            throw ConfigError("config.output.format: must be \"csv\" or \"json\"");
        }
    }
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    return parse_config(doc);
}

std::string format_sig(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::vector<Condition1Row> run_verify_condition1(const ExperimentConfig& cfg,
                                                 int threads) {
    const std::vector<DelaySpec> systems =
        cfg.systems ? *cfg.systems : std::vector<DelaySpec>{cfg.delay};
    const std::vector<double> p_grid =
        cfg.p_grid ? *cfg.p_grid : std::vector<double>{cfg.p};

    // Expand every grid point up front so rows come out in config order no
    // matter how the pool schedules them.
    std::vector<Condition1Row> rows;
    for (const DelaySpec& base : systems) {
        const std::vector<int> t_grid =
            cfg.t_max_grid ? *cfg.t_max_grid : std::vector<int>{base.t_max};
        std::vector<std::optional<double>> family;
        if (base.uses_p_s()) {
            if (!cfg.p_s_grid) {
                family.push_back(base.p_s);
            } else {
                for (double v : *cfg.p_s_grid) family.push_back(v);
            }
        } else if (base.uses_a()) {
            if (!cfg.a_grid) {
                family.push_back(base.a);
            } else {
                for (double v : *cfg.a_grid) family.push_back(v);
            }
        } else {
            family.push_back(std::nullopt);
        }
        for (double p : p_grid) {
            for (int t_max : t_grid) {
                for (const auto& fam : family) {
                    Condition1Row row;
                    row.delay_kind = base.kind;
                    row.variant = variant_name(base.variant);
                    row.p = p;
                    row.t_max = t_max;
                    if (base.uses_p_s()) row.p_s = fam;
                    if (base.uses_a()) row.a = fam;
                    rows.push_back(std::move(row));
                }
            }
        }
    }

    std::exception_ptr failure;
    const int n = static_cast<int>(rows.size());
#pragma omp parallel for schedule(dynamic) num_threads(resolve_threads(threads))
    for (int i = 0; i < n; ++i) {
        try {
            Condition1Row& row = rows[static_cast<std::size_t>(i)];
            DelaySpec spec;
            spec.kind = row.delay_kind;
            spec.variant = row.variant == "discard" ? DelayVariant::DiscardAfterTmax
                                                    : DelayVariant::GuaranteedDelivery;
            spec.t_max = row.t_max;
            if (row.p_s) spec.p_s = *row.p_s;
            if (row.a) spec.a = *row.a;
            const SourceModel src = make_source(row.p);
            const DelayModel delay = build_delay(spec);
            row.report = check_condition1(src, delay);
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return rows;
}

std::string condition1_csv(const std::vector<Condition1Row>& rows) {
    std::string out =
        "delay_kind,variant,p,p_s,a,t_max,sigma,delta_bar_0,delta_bar_1,holds\n";
    for (const auto& row : rows) {
        out += csv_escape(row.delay_kind);
        out += ',';
        out += row.variant;
        out += ',';
        out += format_sig(row.p);
        out += ',';
        out += opt_field(row.p_s);
        out += ',';
        out += opt_field(row.a);
        out += ',';
        out += std::to_string(row.t_max);
        out += ',';
        out += format_sig(row.report.sigma);
        out += ',';
        out += format_sig(row.report.delta_bar_0);
        out += ',';
        out += format_sig(row.report.delta_bar_1);
        out += ',';
        out += bool_name(row.report.holds);
        out += '\n';
    }
    return out;
}

nlohmann::json condition1_json(const std::vector<Condition1Row>& rows) {
    json arr = json::array();
    for (const auto& row : rows) {
        json r{{"delay_kind", row.delay_kind},
               {"variant", row.variant},
               {"p", row.p},
               {"t_max", row.t_max},
               {"sigma", row.report.sigma},
               {"delta_bar_0", row.report.delta_bar_0},
               {"delta_bar_1", row.report.delta_bar_1},
               {"holds", row.report.holds}};
        if (row.p_s) r["p_s"] = *row.p_s;
        if (row.a) r["a"] = *row.a;
        arr.push_back(std::move(r));
    }
    return arr;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, int threads) {
    const std::vector<DelayVariant> variants =
        cfg.variants.empty() ? std::vector<DelayVariant>{cfg.delay.variant}
                             : cfg.variants;
    const std::vector<double> p_grid =
        cfg.p_grid ? *cfg.p_grid : std::vector<double>{cfg.p};
    const std::vector<int> t_grid =
        cfg.t_max_grid ? *cfg.t_max_grid : std::vector<int>{cfg.delay.t_max};
    const std::vector<TauValue> taus =
        cfg.tau_grid ? *cfg.tau_grid : std::vector<TauValue>{cfg.tau};

    if (cfg.delay.kind == "pmf" && cfg.t_max_grid) {
        throw ConfigError("config.grids.t_max: not applicable to explicit pmf");
    }
    for (DelayVariant v : variants) {
        if ((cfg.delay.kind == "zipf" || cfg.delay.kind == "twopoint") &&
            v == DelayVariant::DiscardAfterTmax) {
            throw ConfigError("config.variants: " + cfg.delay.kind +
                              " delays support only the guaranteed variant");
        }
    }

    std::vector<std::optional<double>> family;
    if (cfg.delay.uses_p_s()) {
        if (!cfg.p_s_grid) {
            family.push_back(cfg.delay.p_s);
        } else {
            for (double v : *cfg.p_s_grid) family.push_back(v);
        }
    } else if (cfg.delay.uses_a()) {
        if (!cfg.a_grid) {
            family.push_back(cfg.delay.a);
        } else {
            for (double v : *cfg.a_grid) family.push_back(v);
        }
    } else {
        family.push_back(std::nullopt);
    }

    struct Point {
        DelaySpec spec;
        double p;
    };
    std::vector<Point> points;
    for (DelayVariant variant : variants) {
        for (double p : p_grid) {
            for (const auto& fam : family) {
                for (int t_max : t_grid) {
                    DelaySpec spec = with_overrides(
                        cfg.delay, variant,
                        cfg.delay.uses_p_s() ? fam : std::nullopt,
                        cfg.delay.uses_a() ? fam : std::nullopt, t_max);
                    points.push_back({std::move(spec), p});
                }
            }
        }
    }

    const int n_tau = static_cast<int>(taus.size());
    std::vector<SweepRow> rows(points.size() * static_cast<std::size_t>(n_tau));

    const int n = static_cast<int>(points.size());
#pragma omp parallel for schedule(dynamic) num_threads(resolve_threads(threads))
    for (int pi = 0; pi < n; ++pi) {
        const Point& point = points[static_cast<std::size_t>(pi)];
        std::optional<bool> cond_holds;
        std::string solver_summary;
        std::string point_error;

        SourceModel src{point.p};
        std::optional<DelayModel> delay;
        try {
            src = make_source(point.p);
            delay.emplace(build_delay(point.spec));
            if (cfg.sweep_condition1) {
                cond_holds = check_condition1(src, *delay).holds;
            }
            if (cfg.sweep_solve) {
                const TruncatedMdp mdp(src, *delay, cfg.solver.m);
                SolverOptions opts;
                opts.epsilon = cfg.solver.epsilon;
                opts.max_iter = cfg.solver.max_iter;
                const SolveResult solved = rvi(mdp, opts);
                solver_summary =
                    policy_summary(solved.policy, cfg.solver.m - point.spec.t_max);
            }
        } catch (const std::exception& e) {
            point_error = e.what();
        }

        for (int ti = 0; ti < n_tau; ++ti) {
            SweepRow& row =
                rows[static_cast<std::size_t>(pi) * n_tau + static_cast<std::size_t>(ti)];
            row.delay_kind = point.spec.kind;
            row.variant = variant_name(point.spec.variant);
            row.p = point.p;
            if (point.spec.uses_p_s()) row.p_s = point.spec.p_s;
            if (point.spec.uses_a()) row.a = point.spec.a;
            row.t_max = point.spec.t_max;
            row.tau = taus[static_cast<std::size_t>(ti)].label();
            row.condition1_holds = cond_holds;
            row.solver_policy_summary = solver_summary;
            if (!point_error.empty()) {
                row.error = point_error;
                continue;
            }
            try {
                const ThresholdPolicy policy = taus[static_cast<std::size_t>(ti)].policy();
                row.expected_aoii = expected_aoii(src, *delay, policy).expected_aoii;
                if (cfg.sweep_simulate) {
                    SimConfig sim;
                    sim.slots = cfg.simulation.slots;
                    sim.warmup = cfg.simulation.warmup;
                    sim.batch_count = cfg.simulation.batch_count;
                    sim.seed = derive_stream(cfg.simulation.seed,
                                             static_cast<std::uint64_t>(pi) * 64ULL +
                                                 static_cast<std::uint64_t>(ti));
                    const SimResult sr = simulate(src, *delay, policy, sim);
                    row.sim_mean = sr.mean_aoii;
                    row.sim_stderr = sr.std_error;
                }
            } catch (const std::exception& e) {
                row.error = e.what();
            }
        }
    }
    return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out =
        "delay_kind,variant,p,p_s,a,t_max,tau,expected_aoii,sim_mean,sim_stderr,"
        "condition1_holds,solver_policy_summary,error\n";
    for (const auto& row : rows) {
        out += csv_escape(row.delay_kind);
        out += ',';
        out += row.variant;
        out += ',';
        out += format_sig(row.p);
        out += ',';
        out += opt_field(row.p_s);
        out += ',';
        out += opt_field(row.a);
        out += ',';
        out += std::to_string(row.t_max);
        out += ',';
        out += row.tau;
        out += ',';
        out += opt_field(row.expected_aoii);
        out += ',';
        out += opt_field(row.sim_mean);
        out += ',';
        out += opt_field(row.sim_stderr);
        out += ',';
        out += row.condition1_holds ? bool_name(*row.condition1_holds) : std::string();
        out += ',';
        out += csv_escape(row.solver_policy_summary);
        out += ',';
        out += csv_escape(row.error);
        out += '\n';
    }
    return out;
}

nlohmann::json sweep_json(const std::vector<SweepRow>& rows) {
    json arr = json::array();
    for (const auto& row : rows) {
        json r{{"delay_kind", row.delay_kind}, {"variant", row.variant},
               {"p", row.p},                   {"t_max", row.t_max},
               {"tau", row.tau}};
        if (row.p_s) r["p_s"] = *row.p_s;
        if (row.a) r["a"] = *row.a;
        if (row.expected_aoii) r["expected_aoii"] = *row.expected_aoii;
        if (row.sim_mean) r["sim_mean"] = *row.sim_mean;
        if (row.sim_stderr) r["sim_stderr"] = *row.sim_stderr;
        if (row.condition1_holds) r["condition1_holds"] = *row.condition1_holds;
        if (!row.solver_policy_summary.empty()) {
            r["solver_policy_summary"] = row.solver_policy_summary;
        }
        if (!row.error.empty()) r["error"] = row.error;
        arr.push_back(std::move(r));
    }
    return arr;
}

nlohmann::json run_solve(const ExperimentConfig& cfg) {
    const SourceModel src = make_source(cfg.p);
    const DelayModel delay = build_delay(cfg.delay);
    const TruncatedMdp mdp(src, delay, cfg.solver.m);

    SolverOptions opts;
    opts.epsilon = cfg.solver.epsilon;
    opts.max_iter = cfg.solver.max_iter;
    const SolveResult via_rvi = rvi(mdp, opts);
    const SolveResult via_pi =
        policy_iteration(mdp, TabularPolicy::threshold(cfg.solver.m, ThresholdPolicy(0)));

    const int check_up_to = cfg.solver.m - delay.t_max();
    const Condition1Report cond = check_condition1(src, delay);
    const double d1 = cond.delta_bar_1;
    const double d0 = cond.delta_bar_0;
    const double dinf = 1.0 / (2.0 * src.p);

    json report;
    report["model"] = {{"delay_kind", cfg.delay.kind},
                       {"variant", variant_name(cfg.delay.variant)},
                       {"p", cfg.p},
                       {"t_max", cfg.delay.t_max},
                       {"expected_transmission_time", expected_transmission_time(delay)},
                       {"delay_tail_fold_mass", delay.folded_mass()}};
    if (cfg.delay.uses_p_s()) report["model"]["p_s"] = cfg.delay.p_s;
    if (cfg.delay.uses_a()) report["model"]["a"] = cfg.delay.a;
    report["solver"] = {{"m", cfg.solver.m},
                        {"epsilon", cfg.solver.epsilon},
                        {"max_iter", cfg.solver.max_iter}};
    report["rvi"] = {{"theta_span_mid", via_rvi.theta},
                     {"theta_ref", via_rvi.theta_ref},
                     {"span", via_rvi.span},
                     {"iterations", via_rvi.iterations},
                     {"final_delta", via_rvi.residual},
                     {"policy", policy_summary(via_rvi.policy, check_up_to)},
                     {"compact_bellman_residual",
                      compact_bellman_residual(mdp, via_rvi)}};
    report["policy_iteration"] = {{"theta", via_pi.theta},
                                  {"iterations", via_pi.iterations},
                                  {"evaluation_residual", via_pi.residual},
                                  {"policy", policy_summary(via_pi.policy, check_up_to)}};
    report["analytic"] = {{"delta_bar_0", d0},
                          {"delta_bar_1", d1},
                          {"delta_bar_inf", dinf}};
    report["comparison"] = {
        {"rvi_vs_delta_bar_1_rel", std::abs(via_rvi.theta - d1) / d1},
        {"pi_vs_delta_bar_1_rel", std::abs(via_pi.theta - d1) / d1}};
    report["condition1"] = {{"sigma", cond.sigma},
                            {"bound", cond.bound},
                            {"holds", cond.holds}};
    return report;
}

nlohmann::json run_simulate(const ExperimentConfig& cfg) {
    const SourceModel src = make_source(cfg.p);
    const DelayModel delay = build_delay(cfg.delay);
    const ThresholdPolicy policy = cfg.tau.policy();

    SimConfig sim;
    sim.slots = cfg.simulation.slots;
    sim.seed = cfg.simulation.seed;
    sim.warmup = cfg.simulation.warmup;
    sim.batch_count = cfg.simulation.batch_count;
    const SimResult result = simulate(src, delay, policy, sim);
    const double analytic = expected_aoii(src, delay, policy).expected_aoii;

    json report;
    report["model"] = {{"delay_kind", cfg.delay.kind},
                       {"variant", variant_name(cfg.delay.variant)},
                       {"p", cfg.p},
                       {"t_max", cfg.delay.t_max},
                       {"delay_tail_fold_mass", delay.folded_mass()}};
    if (cfg.delay.uses_p_s()) report["model"]["p_s"] = cfg.delay.p_s;
    if (cfg.delay.uses_a()) report["model"]["a"] = cfg.delay.a;
    report["tau"] = cfg.tau.label();
    report["simulation"] = {{"slots", result.slots},
                            {"measured_slots", result.measured_slots},
                            {"warmup", sim.warmup},
                            {"batch_count", sim.batch_count},
                            {"seed", result.seed},
                            {"rng", result.rng}};
    report["result"] = {{"mean_aoii", result.mean_aoii},
                        {"std_error", result.std_error},
                        {"transmissions", result.transmissions},
                        {"deliveries", result.deliveries},
                        {"discards", result.discards}};
    report["analytic_expected_aoii"] = analytic;
    report["abs_error_in_std_errors"] =
        result.std_error > 0.0
            ? std::abs(result.mean_aoii - analytic) / result.std_error
            : 0.0;
    return report;
}

namespace detail {
void write_payload(const std::string& payload, const std::string& out_path) {
    write_or_print(payload, out_path);
}
}  // namespace detail

}  // namespace aoii
