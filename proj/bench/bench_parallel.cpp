// Wall-clock comparison of the serial and OpenMP paths, with a bit-identity
// check on the results. Two levels: whole tracks fan out across workers in the
// ensemble runner, and one consensus iteration fans its per-cell subproblem
// solves out inside a single run.
//
// Usage: bench_parallel [tracks] [steps]

#include <chrono>
#include <cstdio>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "dynbf/admm.hpp"
#include "dynbf/duality.hpp"
#include "dynbf/harness.hpp"
#include "dynbf/tracks.hpp"

using namespace dynbf;

namespace {

double wall(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool same_metrics(const StepMetrics& a, const StepMetrics& b) {
    bool ok = a.step == b.step && a.power == b.power && a.power_opt == b.power_opt &&
              a.sinr_mean == b.sinr_mean && a.dist_w_sq == b.dist_w_sq &&
              a.lyapunov == b.lyapunov && a.primal_residual == b.primal_residual &&
              a.bound_dist == b.bound_dist && a.dual_consistency == b.dual_consistency &&
              a.sinr.size() == b.sinr.size() && a.bound_sinr.size() == b.bound_sinr.size();
    for (int k = 0; ok && k < a.sinr.size(); ++k)
        ok = a.sinr[k] == b.sinr[k] && a.bound_sinr[k] == b.bound_sinr[k];
    return ok;
}

bool same_records(const std::vector<IterationRecord>& a, const std::vector<IterationRecord>& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i].t != b[i].t || a[i].tau != b[i].tau || a[i].nu != b[i].nu) return false;
        for (size_t k = 0; k < a[i].W.w.size(); ++k)
            if (a[i].W.w[k] != b[i].W.w[k]) return false;
    }
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    const int tracks = argc > 1 ? std::atoi(argv[1]) : 24;
    const int steps = argc > 2 ? std::atoi(argv[2]) : 30;
#ifdef _OPENMP
    std::printf("workers: %d\n", omp_get_max_threads());
#else
    std::printf("workers: 1 (built without OpenMP)\n");
#endif

    ExperimentConfig ec;
    ec.track.topo = make_uniform_topology(2, 2, 4);
    ec.track.q = make_uniform_qos(ec.track.topo.num_users, 10.0, 10.0);
    ec.track.length = steps;
    ec.track.seed = 4000;
    ec.num_tracks = tracks;

    ec.jobs = 1;
    auto t0 = std::chrono::steady_clock::now();
    const auto serial = run_ensemble(ec);
    const double t_serial = wall(t0);

    ec.jobs = 0;
    t0 = std::chrono::steady_clock::now();
    const auto parallel = run_ensemble(ec);
    const double t_parallel = wall(t0);

    bool tracks_identical = serial.size() == parallel.size();
    for (size_t r = 0; tracks_identical && r < serial.size(); ++r) {
        tracks_identical = serial[r].tracks.size() == parallel[r].tracks.size();
        for (size_t t = 0; tracks_identical && t < serial[r].tracks.size(); ++t) {
            const auto& sa = serial[r].tracks[t].steps;
            const auto& sb = parallel[r].tracks[t].steps;
            tracks_identical = sa.size() == sb.size();
            for (size_t i = 0; tracks_identical && i < sa.size(); ++i)
                tracks_identical = same_metrics(sa[i], sb[i]);
        }
    }

    std::printf("track fan-out: %d tracks x %d steps\n", tracks, steps);
    std::printf("  serial   %6.2f s\n", t_serial);
    std::printf("  parallel %6.2f s  speedup %.2fx\n", t_parallel, t_serial / t_parallel);
    std::printf("  results identical: %s\n", tracks_identical ? "yes" : "NO");

    // Per-cell fan-out: a wider layout so each worker has a real subproblem.
    const Topology topo = make_uniform_topology(4, 2, 8);
    const QosSpec q = make_uniform_qos(topo.num_users, 10.0, 10.0);
    std::uint64_t seed = 77;
    ChannelSet H = sample_initial(topo, seed);
    while (!is_feasible(H, topo, q)) H = sample_initial(topo, ++seed);

    AdmmConfig cfg;
    cfg.max_static_iters = 50;
    cfg.convergence_eps = 1e-300;  // fixed-length run: time the same work on both paths
    auto run_static = [&](bool par) {
        cfg.parallel_bs = par;
        try {
            return solve_static(topo, H, q, cfg);
        } catch (const AdmmTimeout& to) {
            return to.best;
        }
    };

    t0 = std::chrono::steady_clock::now();
    const StaticResult cell_serial = run_static(false);
    const double t_cell_serial = wall(t0);
    t0 = std::chrono::steady_clock::now();
    const StaticResult cell_parallel = run_static(true);
    const double t_cell_parallel = wall(t0);
    const bool cells_identical = same_records(cell_serial.history, cell_parallel.history);

    std::printf("cell fan-out: %d cells, %d iterations on a fixed channel\n", topo.num_bs,
                cfg.max_static_iters);
    std::printf("  serial   %6.2f s\n", t_cell_serial);
    std::printf("  parallel %6.2f s  speedup %.2fx\n", t_cell_parallel,
                t_cell_serial / t_cell_parallel);
    std::printf("  results identical: %s\n", cells_identical ? "yes" : "NO");

    return tracks_identical && cells_identical ? 0 : 1;
}
