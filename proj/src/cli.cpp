#include "dynbf/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dynbf/duality.hpp"
#include "dynbf/harness.hpp"
#include "dynbf/instance_io.hpp"
#include "dynbf/socp.hpp"
#include "dynbf/tracks.hpp"
#include "dynbf/verify.hpp"

namespace dynbf {
namespace {

struct TopologyArgs {
    int cells = 2;
    int users_per_cell = 2;
    int antennas = 4;
    double gamma = 10.0;
    double sigma2 = 10.0;
};

void add_topology_flags(CLI::App* sub, TopologyArgs& t) {
    sub->add_option("--nb", t.cells, "number of cells")->check(CLI::PositiveNumber);
    sub->add_option("--users-per-bs", t.users_per_cell, "users served per cell")
        ->check(CLI::PositiveNumber);
    sub->add_option("--nt", t.antennas, "transmit antennas per cell")
        ->check(CLI::PositiveNumber);
    sub->add_option("--gamma", t.gamma, "per-user SINR target")->check(CLI::PositiveNumber);
    sub->add_option("--sigma2", t.sigma2, "per-user noise power")->check(CLI::PositiveNumber);
}

Topology make_topo(const TopologyArgs& t) {
    return make_uniform_topology(t.cells, t.users_per_cell, t.antennas);
}

struct ExperimentArgs {
    std::vector<double> rhos{50.0};
    double zeta = 0.01;
    int steps = 50;
    int tracks = 20;
    std::uint64_t seed = 0;
    std::string out;
    int jobs = 0;
};

void add_experiment_flags(CLI::App* sub, ExperimentArgs& a) {
    sub->add_option("--rho", a.rhos, "consensus penalty weight, repeatable")
        ->check(CLI::PositiveNumber);
    sub->add_option("--zeta", a.zeta, "channel innovation weight per step")
        ->check(CLI::Range(0.0, 1.0));
    sub->add_option("--steps", a.steps, "channel steps per track")->check(CLI::PositiveNumber);
    sub->add_option("--seed", a.seed, "base seed; track t adds t");
    sub->add_option("--out", a.out, "directory for per-step CSV output");
    sub->add_option("--jobs", a.jobs, "worker threads, 0 = all cores")
        ->check(CLI::NonNegativeNumber);
}

int cmd_solve(const Instance& inst) {
    const Topology& topo = inst.topo;
    const DualSolution dual = solve_uplink_fixed_point(inst.H, topo, inst.qos);
    const CentralizedProgram cp = build_centralized_program(topo, inst.H, inst.qos);
    const SolveReport rep = solve_cone_program(cp.prog);

    std::printf("layout: %d cells, %d users, %d antennas\n", topo.num_bs, topo.num_users,
                topo.num_antennas);
    const bool dual_ok = dual.status == DualStatus::Optimal;
    const bool socp_ok = rep.status == SolveStatus::Optimal;
    if (dual_ok != socp_ok) {
        std::fprintf(stderr, "oracle disagreement: uplink route says %s, cone route says %s\n",
                     dual_ok ? "feasible" : "infeasible", to_string(rep.status));
        return 1;
    }
    if (!dual_ok) {
        std::printf("instance is infeasible\n");
        std::printf("  uplink route: multiplier iteration diverged after %d sweeps, residual %.2e\n",
                    dual.iterations, dual.residual);
        if (rep.status == SolveStatus::Infeasible)
            std::printf("  cone route: certificate with b'z = %.6f, ||A'z||_inf = %.2e\n",
                        cp.prog.b.dot(rep.z),
                        (cp.prog.A.transpose() * rep.z).cwiseAbs().maxCoeff());
        else
            std::printf("  cone route: %s\n", to_string(rep.status));
        return 2;
    }

    const BeamformerSet W = cp.extract_beamformers(rep.x, topo);
    const Vec sinr = compute_all_sinr(W, inst.H, topo, inst.qos);
    std::printf(" user  cell       power        sinr      target\n");
    for (int k = 0; k < topo.num_users; ++k)
        std::printf("%5d %5d %11.5f %11.5f %11.5f\n", k + 1, topo.bs_of(k) + 1,
                    W.w[static_cast<size_t>(k)].squaredNorm(), sinr[k], inst.qos.gamma[k]);
    std::printf("total_power_socp %.10f\n", rep.objective);
    std::printf("total_power_dual %.10f\n", dual.total_power);
    std::printf("relative_gap %.3e\n",
                std::abs(rep.objective - dual.total_power) / std::max(1.0, rep.objective));
    return 0;
}

int cmd_experiment(const TopologyArgs& t, const ExperimentArgs& a, const CLI::App& sub) {
    ExperimentConfig ec;
    ec.track.topo = make_topo(t);
    ec.track.q = make_uniform_qos(ec.track.topo.num_users, t.gamma, t.sigma2);
    ec.track.zeta = a.zeta;
    ec.track.length = a.steps;
    ec.track.seed = a.seed;
    ec.num_tracks = a.tracks;
    ec.rhos = a.rhos;
    ec.out_dir = a.out;
    ec.jobs = a.jobs;

    std::vector<EnsembleResult> results;
    try {
        results = run_ensemble(ec);
    } catch (const TrackError& e) {
        std::fprintf(stderr, "track generation failed: %s\n", e.what());
        return 2;
    } catch (const HarnessError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }

    // Report the settled tail so the transient after the cold start is not mixed in.
    const size_t lo = static_cast<size_t>(a.steps > 30 ? 30 : a.steps / 2);
    for (const EnsembleResult& er : results) {
        double power = 0, power_opt = 0, sinr = 0;
        int n = 0;
        for (size_t i = lo; i < er.curve.size(); ++i) {
            power += er.curve[i].power_mean;
            power_opt += er.curve[i].power_opt_mean;
            sinr += er.curve[i].sinr_mean;
            ++n;
        }
        power /= n;
        power_opt /= n;
        sinr /= n;
        double min_sinr = std::numeric_limits<double>::infinity();
        for (const TrackResult& tr : er.tracks)
            for (const StepMetrics& m : tr.steps) min_sinr = std::min(min_sinr, m.sinr.minCoeff());
        std::printf("rho %g: settled power gap %.2f%% | settled SINR mean %.3f | "
                    "min user SINR %.3f | violations: %ld distance, %ld guarantee\n",
                    er.rho, 100.0 * std::abs(power - power_opt) / power_opt, sinr, min_sinr,
                    er.dist_bound_violations, er.sinr_bound_violations);
        if (!er.csv_path.empty()) std::printf("  wrote %s\n", er.csv_path.c_str());
    }

    if (!a.out.empty()) {
        std::ofstream cfg(a.out + "/config_effective.txt");
        cfg << sub.config_to_str(true, false);
    }
    return 0;
}

int cmd_verify(const VerifyOptions& vo) {
    const auto results = run_verification(vo);
    bool ok = true;
    for (const auto& r : results) {
        ok = ok && r.passed;
        std::printf("[%s] %-25s %s (%.1f s)\n", r.passed ? "PASS" : "FAIL", r.name.c_str(),
                    r.detail.c_str(), r.seconds);
    }
    std::printf("%s\n", ok ? "verification passed" : "verification FAILED");
    return ok ? 0 : 3;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Distributed dynamic downlink beamforming simulator"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();
    app.set_config("--config", "", "read options from an INI file; flags win");

    int rc = 0;

    auto* solve = app.add_subcommand("solve", "solve one instance with both oracles");
    TopologyArgs solve_topo;
    std::string solve_file;
    std::uint64_t solve_seed = 0;
    add_topology_flags(solve, solve_topo);
    auto* opt_file =
        solve->add_option("instance", solve_file, "instance file")->check(CLI::ExistingFile);
    auto* opt_rand =
        solve->add_option("--random", solve_seed, "draw a fresh instance from this seed");
    opt_file->excludes(opt_rand);
    opt_rand->excludes(opt_file);
    solve->callback([&] {
        if (opt_file->count() == 0 && opt_rand->count() == 0)
            throw CLI::RequiredError("an instance file or --random SEED");
        const Instance inst = opt_file->count() > 0
                                  ? read_instance_file(solve_file)
                                  : Instance{make_topo(solve_topo),
                                             make_uniform_qos(solve_topo.cells *
                                                                  solve_topo.users_per_cell,
                                                              solve_topo.gamma, solve_topo.sigma2),
                                             sample_initial(make_topo(solve_topo), solve_seed)};
        rc = cmd_solve(inst);
    });

    auto* track = app.add_subcommand("track", "follow one fading track, one update per step");
    TopologyArgs track_topo;
    ExperimentArgs track_args;
    add_topology_flags(track, track_topo);
    add_experiment_flags(track, track_args);
    track->callback([&] {
        track_args.tracks = 1;
        rc = cmd_experiment(track_topo, track_args, *track);
    });

    auto* ens = app.add_subcommand("ensemble", "average tracking quality over many tracks");
    TopologyArgs ens_topo;
    ExperimentArgs ens_args;
    add_topology_flags(ens, ens_topo);
    add_experiment_flags(ens, ens_args);
    ens->add_option("--tracks", ens_args.tracks, "number of tracks")->check(CLI::PositiveNumber);
    ens->callback([&] { rc = cmd_experiment(ens_topo, ens_args, *ens); });

    auto* verify = app.add_subcommand("verify", "run the verification battery");
    VerifyOptions vo;
    bool inject = false;
    verify->add_option("--instances", vo.oracle_instances, "cross-oracle sample size")
        ->check(CLI::PositiveNumber);
    verify->add_option("--static-instances", vo.static_instances,
                       "fixed-channel convergence sample size")
        ->check(CLI::PositiveNumber);
    verify->add_option("--tracks", vo.ensemble_tracks, "tracking ensemble size")
        ->check(CLI::PositiveNumber);
    verify->add_option("--steps", vo.track_steps, "steps per track")->check(CLI::PositiveNumber);
    verify->add_option("--jobs", vo.jobs, "worker threads, 0 = all cores")
        ->check(CLI::NonNegativeNumber);
    verify->add_flag("--inject-fault", inject,
                     "bias the consensus averaging to show the checks catch it");
    verify->callback([&] {
        if (inject) vo.consensus_avg_weight = 0.51;
        rc = cmd_verify(vo);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return rc;
}

}  // namespace dynbf
