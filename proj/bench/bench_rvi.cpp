// Timing comparison between the serial and OpenMP relative-value-iteration
// sweeps, plus grid-evaluation throughput for the analytic path.

#include <chrono>
#include <cstdio>
#include <vector>

#include <omp.h>

#include "aoii/mdp.hpp"
#include "aoii/threshold.hpp"

using namespace aoii;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
}

void bench_rvi(int m, int t_max, double p, double p_s) {
    const SourceModel src = make_source(p);
    const DelayModel delay =
        make_delay_geometric(p_s, t_max, DelayVariant::GuaranteedDelivery);
    const TruncatedMdp mdp(src, delay, m);

    SolverOptions serial_opts;
    serial_opts.parallel = false;
    SolverOptions parallel_opts;
    parallel_opts.parallel = true;

    constexpr int kRepeats = 3;
    double serial_sec = 1e18, parallel_sec = 1e18;
    SolveResult serial, parallel;
    for (int r = 0; r < kRepeats; ++r) {
        auto start = std::chrono::steady_clock::now();
        serial = rvi(mdp, serial_opts);
        serial_sec = std::min(serial_sec, seconds_since(start));

        start = std::chrono::steady_clock::now();
        parallel = rvi(mdp, parallel_opts);
        parallel_sec = std::min(parallel_sec, seconds_since(start));
    }

    double max_diff = 0.0;
    for (std::size_t i = 0; i < serial.value.size(); ++i) {
        max_diff = std::max(max_diff,
                            std::abs(serial.value[i] - parallel.value[i]));
    }
    std::printf(
        "rvi m=%-5d states=%-6d iters=%-5ld serial %8.3fs | omp(%d threads) "
        "%8.3fs | speedup %5.2fx | max |dV| %.3g\n",
        m, mdp.num_states(), serial.iterations, serial_sec,
        omp_get_max_threads(), parallel_sec, serial_sec / parallel_sec,
        max_diff);
}

void bench_grid(int points) {
    const auto start = std::chrono::steady_clock::now();
    double sink = 0.0;
    for (int i = 0; i < points; ++i) {
        const double p = 0.05 + 0.4 * (i % 9) / 8.0;
        const double p_s = 0.05 * (i % 20);
        const SourceModel src = make_source(p);
        const DelayModel delay =
            make_delay_geometric(p_s, 5, DelayVariant::GuaranteedDelivery);
        sink += check_condition1(src, delay).delta_bar_1;
    }
    const double sec = seconds_since(start);
    std::printf("condition1 grid: %d points in %.3fs (%.0f points/s) [sink %.3f]\n",
                points, sec, points / sec, sink);
}

}  // namespace

int main() {
    std::printf("== RVI serial vs OpenMP ==\n");
    bench_rvi(200, 5, 0.35, 0.7);
    bench_rvi(1000, 5, 0.35, 0.7);
    bench_rvi(2000, 8, 0.25, 0.4);
    bench_rvi(4000, 8, 0.05, 0.2);  // slow mixing, many sweeps
    std::printf("== analytic grid throughput ==\n");
    bench_grid(2000);
    return 0;
}
