#include "dynbf/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "dynbf/admm.hpp"
#include "dynbf/duality.hpp"
#include "dynbf/harness.hpp"
#include "dynbf/tracks.hpp"

namespace dynbf {

namespace {

Vec gaussian_vec(RngStream& rng, int n) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = rng.gaussian();
    return v;
}

double positive(RngStream& rng, double floor) { return floor + std::abs(rng.gaussian()); }

// Interior point of the dual/primal cone per block kind.
Vec interior_point(RngStream& rng, const std::vector<ConeBlock>& cones, int rows) {
    Vec v(rows);
    int row = 0;
    for (const auto& blk : cones) {
        if (blk.kind == ConeKind::Zero) {
            v.segment(row, blk.dim) = gaussian_vec(rng, blk.dim);
        } else if (blk.kind == ConeKind::NonNeg || blk.dim == 1) {
            for (int i = 0; i < blk.dim; ++i) v[row + i] = positive(rng, 0.2);
        } else {
            Vec tail = gaussian_vec(rng, blk.dim - 1);
            v[row] = tail.norm() + positive(rng, 0.2);
            v.segment(row + 1, blk.dim - 1) = tail;
        }
        row += blk.dim;
    }
    return v;
}

}  // namespace

PlantedProgram make_planted_program(RngStream& rng) {
    const int d1 = 3 + static_cast<int>(rng.uniform() * 4.0);
    const int d2 = 3 + static_cast<int>(rng.uniform() * 4.0);
    std::vector<ConeBlock> cones = {{ConeKind::Zero, 2},
                                    {ConeKind::NonNeg, 4},
                                    {ConeKind::SecondOrder, d1},
                                    {ConeKind::SecondOrder, d2}};
    const int rows = 6 + d1 + d2;
    // keep the constraint matrix tall so the planted optimum is isolated
    const int n = std::min(8 + static_cast<int>(rng.uniform() * 8.0), rows - 2);

    PlantedProgram pp;
    pp.prog.cones = cones;
    pp.prog.A = Mat(rows, n);
    for (int i = 0; i < rows; ++i) pp.prog.A.row(i) = gaussian_vec(rng, n).transpose();
    pp.x_star = gaussian_vec(rng, n);

    Vec s_star = Vec::Zero(rows);
    pp.z_star = Vec::Zero(rows);
    int row = 0;
    for (const auto& blk : cones) {
        if (blk.kind == ConeKind::Zero) {
            pp.z_star.segment(row, blk.dim) = gaussian_vec(rng, blk.dim);
        } else if (blk.kind == ConeKind::NonNeg) {
            for (int i = 0; i < blk.dim; ++i) {
                if (rng.uniform() < 0.5)
                    pp.z_star[row + i] = positive(rng, 0.1);
                else
                    s_star[row + i] = positive(rng, 0.1);
            }
        } else {
            const double f = rng.uniform();
            const int d = blk.dim;
            if (f < 1.0 / 3.0) {
                Vec tail = gaussian_vec(rng, d - 1);
                s_star[row] = tail.norm() + positive(rng, 0.1);
                s_star.segment(row + 1, d - 1) = tail;
            } else if (f < 2.0 / 3.0) {
                Vec tail = gaussian_vec(rng, d - 1);
                pp.z_star[row] = tail.norm() + positive(rng, 0.1);
                pp.z_star.segment(row + 1, d - 1) = tail;
            } else {
                // both on the boundary with z proportional to the reflection of s
                Vec tail = gaussian_vec(rng, d - 1);
                const double s0 = tail.norm();
                s_star[row] = s0;
                s_star.segment(row + 1, d - 1) = tail;
                const double a = positive(rng, 0.1) / std::max(1.0, s0);
                pp.z_star[row] = a * s0;
                pp.z_star.segment(row + 1, d - 1) = -a * tail;
            }
        }
        row += blk.dim;
    }

    pp.prog.b = pp.prog.A * pp.x_star + s_star;
    pp.prog.c = -pp.prog.A.transpose() * pp.z_star;
    pp.objective = pp.prog.c.dot(pp.x_star);
    pp.prog.validate();
    return pp;
}

ConeProgram make_infeasible_program(RngStream& rng) {
    const int n = 6;
    std::vector<ConeBlock> cones = {
        {ConeKind::Zero, 2}, {ConeKind::NonNeg, 3}, {ConeKind::SecondOrder, 4}};
    const int rows = 9;

    ConeProgram prog;
    prog.cones = cones;
    Vec cert = interior_point(rng, cones, rows);
    const double cn2 = cert.squaredNorm();

    prog.A = Mat(rows, n);
    for (int j = 0; j < n; ++j) {
        Vec col = gaussian_vec(rng, rows);
        col -= cert * (cert.dot(col) / cn2);
        prog.A.col(j) = col;
    }
    prog.b = gaussian_vec(rng, rows);
    prog.b -= cert * ((cert.dot(prog.b) + 1.0) / cn2);

    // cost from a strictly feasible dual point, so unboundedness cannot occur
    Vec z_feas = interior_point(rng, cones, rows);
    prog.c = -prog.A.transpose() * z_feas;
    prog.validate();
    return prog;
}

ConeProgram make_unbounded_program(RngStream& rng) {
    const int n = 6;
    std::vector<ConeBlock> cones = {
        {ConeKind::Zero, 2}, {ConeKind::NonNeg, 3}, {ConeKind::SecondOrder, 4}};
    const int rows = 9;

    ConeProgram prog;
    prog.cones = cones;
    Vec ray = gaussian_vec(rng, n);
    ray.normalize();

    // targets for A*ray: 0 on equality rows, a strictly negative cone point elsewhere
    Vec target(rows);
    target.segment(0, 2).setZero();
    for (int i = 0; i < 3; ++i) target[2 + i] = -positive(rng, 0.2);
    {
        Vec tail = gaussian_vec(rng, 3);
        target[5] = -(tail.norm() + positive(rng, 0.2));
        target.segment(6, 3) = -tail;
    }
    prog.A = Mat(rows, n);
    for (int i = 0; i < rows; ++i) {
        Vec r = gaussian_vec(rng, n);
        r += ray * (target[i] - r.dot(ray));
        prog.A.row(i) = r.transpose();
    }

    Vec x0 = gaussian_vec(rng, n);
    Vec s0 = interior_point(rng, cones, rows);
    s0.segment(0, 2).setZero();
    prog.b = prog.A * x0 + s0;

    prog.c = gaussian_vec(rng, n);
    prog.c -= ray * (prog.c.dot(ray) + 1.0);
    prog.validate();
    return prog;
}

// ---- Verification battery ----------------------------------------------------

namespace {

using VClock = std::chrono::steady_clock;

double elapsed_s(VClock::time_point t0) {
    return std::chrono::duration<double>(VClock::now() - t0).count();
}

std::string strf(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof buf, format, args);
    va_end(args);
    return std::string(buf);
}

int battery_jobs(int requested) {
#ifdef _OPENMP
    return requested > 0 ? requested : omp_get_max_threads();
#else
    (void)requested;
    return 1;
#endif
}

// Two cells, two 4-antenna users each, gamma 10, sigma2 10: the layout every
// cross-module check runs on.
struct Scenario {
    Topology topo;
    QosSpec q;
};

Scenario standard_scenario() {
    Scenario sc;
    sc.topo = make_uniform_topology(2, 2, 4);
    sc.q = make_uniform_qos(sc.topo.num_users, 10.0, 10.0);
    return sc;
}

double frob_dist(const BeamformerSet& a, const BeamformerSet& b) {
    double s = 0;
    for (size_t k = 0; k < a.w.size(); ++k) s += (a.w[k] - b.w[k]).squaredNorm();
    return std::sqrt(s);
}

double inf_norm(const Vec& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

// Worst violation of -A*x belonging to the cone; 0 means a clean recession slack.
double recession_violation(const ConeProgram& prog, const Vec& x) {
    Vec v = prog.A * x;
    double worst = 0;
    int row = 0;
    for (const auto& blk : prog.cones) {
        if (blk.kind == ConeKind::Zero) {
            worst = std::max(worst, v.segment(row, blk.dim).cwiseAbs().maxCoeff());
        } else if (blk.kind == ConeKind::NonNeg || blk.dim == 1) {
            worst = std::max(worst, v.segment(row, blk.dim).maxCoeff());
        } else {
            Vec s = -v.segment(row, blk.dim);
            worst = std::max(worst, s.segment(1, blk.dim - 1).norm() - s[0]);
        }
        row += blk.dim;
    }
    return worst;
}

// Both oracles on fresh draws: identical feasibility verdicts, matching optimal
// power on the feasible ones.
CheckResult check_oracle_equivalence(const VerifyOptions& opts) {
    CheckResult res;
    res.name = "oracle-equivalence";
    const auto t0 = VClock::now();
    const Scenario sc = standard_scenario();

    double worst_gap = 0;
    int found = 0;
    int skipped = 0;
    std::string fail;
    for (std::uint64_t seed = 1; found < opts.oracle_instances; ++seed) {
        ChannelSet H = sample_initial(sc.topo, seed);
        DualSolution dual = solve_uplink_fixed_point(H, sc.topo, sc.q);
        CentralizedProgram cp = build_centralized_program(sc.topo, H, sc.q);
        SolveReport rep = solve_cone_program(cp.prog);
        const bool dual_ok = dual.status == DualStatus::Optimal;
        const bool socp_ok = rep.status == SolveStatus::Optimal;
        if (dual_ok != socp_ok) {
            fail = strf("seed %llu: feasibility verdicts disagree",
                        static_cast<unsigned long long>(seed));
            break;
        }
        if (!dual_ok) {
            ++skipped;
            continue;
        }
        ++found;
        worst_gap = std::max(worst_gap,
                             std::abs(rep.objective - dual.total_power) / rep.objective);
    }
    res.seconds = elapsed_s(t0);
    if (!fail.empty()) {
        res.detail = fail;
        return res;
    }
    res.passed = worst_gap <= 1e-5 && res.seconds <= 60.0;
    res.detail = strf("%d feasible draws (%d skipped), worst relative power gap %.2e",
                      found, skipped, worst_gap);
    return res;
}

// Worst dual-consistency ratio seen anywhere, collected across the static and
// tracking checks and judged on its own afterwards.
struct ConsistencyAggregate {
    double max_ratio = 0;
};

// Fixed channels: the consensus iteration lands on the virtual-uplink optimum
// with the potential decreasing every round.
CheckResult check_static_convergence(const VerifyOptions& opts, ConsistencyAggregate& agg) {
    CheckResult res;
    res.name = "static-convergence";
    const auto t0 = VClock::now();
    const Scenario sc = standard_scenario();
    const ConsensusIndex ix = build_consensus_index(sc.topo);

    std::vector<ChannelSet> batch;
    for (std::uint64_t seed = 200; static_cast<int>(batch.size()) < opts.static_instances;
         ++seed) {
        ChannelSet H = sample_initial(sc.topo, seed);
        if (is_feasible(H, sc.topo, sc.q)) batch.push_back(std::move(H));
    }

    struct Out {
        double dist = 0;
        int iters = 0;
        double ratio = 0;
        std::string fail;
    };
    std::vector<Out> outs(batch.size());

    const int n = static_cast<int>(batch.size());
#pragma omp parallel for schedule(dynamic) num_threads(battery_jobs(opts.jobs))
    for (int i = 0; i < n; ++i) {
        Out& out = outs[static_cast<size_t>(i)];
        try {
            const ChannelSet& H = batch[static_cast<size_t>(i)];
            DualSolution dual = solve_uplink_fixed_point(H, sc.topo, sc.q);
            InterferenceState ref_is = reference_interference(dual.W_star, H, sc.topo, ix);
            ConsensusReference ref{ref_is.tau, extract_consensus_duals(dual, ref_is, ix)};

            AdmmConfig cfg;
            cfg.rho = 50.0;
            cfg.max_static_iters = 500;
            cfg.consensus_avg_weight = opts.consensus_avg_weight;
            StaticResult sr;
            try {
                sr = solve_static(sc.topo, H, sc.q, cfg, &ref);
            } catch (const AdmmTimeout& to) {
                sr = to.best;
            }
            out.dist = frob_dist(sr.W, dual.W_star);
            out.iters = sr.iterations;

            double prev_v = lyapunov(Vec::Zero(ix.t_dim()), Vec::Zero(ix.tau_dim()),
                                     ref.nu_star, ref.tau_star, cfg.rho, ix);
            for (const IterationRecord& rec : sr.history) {
                if (!check_decrease(prev_v, rec, cfg.rho)) {
                    out.fail = strf("potential rose at iteration %d", rec.i);
                    break;
                }
                prev_v = rec.lyapunov;
                out.ratio = std::max(
                    out.ratio, inf_norm(ix.copy_sum(rec.nu)) / std::max(1.0, inf_norm(rec.nu)));
            }
        } catch (const std::exception& e) {
            out.fail = e.what();
        }
    }

    double worst_dist = 0;
    int max_iters = 0;
    std::string fail;
    for (int i = 0; i < n; ++i) {
        const Out& out = outs[static_cast<size_t>(i)];
        if (!out.fail.empty() && fail.empty()) fail = strf("instance %d: %s", i, out.fail.c_str());
        worst_dist = std::max(worst_dist, out.dist);
        max_iters = std::max(max_iters, out.iters);
        agg.max_ratio = std::max(agg.max_ratio, out.ratio);
    }
    res.seconds = elapsed_s(t0);
    if (!fail.empty()) {
        res.detail = fail;
        return res;
    }
    res.passed = worst_dist <= 1e-3;
    res.detail = strf("%d instances, worst final distance %.2e, max %d iterations", n,
                      worst_dist, max_iters);
    return res;
}

// Moving channels at three penalty weights. Produces the tracking check plus the
// distance-bound and power-ordering verdicts from the same runs.
void check_dynamic_tracking(const VerifyOptions& opts, ConsistencyAggregate& agg,
                            CheckResult& dyn, CheckResult& dist, CheckResult& dir) {
    dyn.name = "dynamic-tracking";
    dist.name = "distance-bound";
    dir.name = "rho-direction";

    const Scenario sc = standard_scenario();
    ExperimentConfig ec;
    ec.track.topo = sc.topo;
    ec.track.q = sc.q;
    ec.track.zeta = 0.01;
    ec.track.length = opts.track_steps;
    ec.track.seed = 7000;
    ec.num_tracks = opts.ensemble_tracks;
    ec.jobs = opts.jobs;
    ec.admm.consensus_avg_weight = opts.consensus_avg_weight;

    const auto t0 = VClock::now();
    EnsembleResult e50, e1, e1000;
    try {
        ec.rhos = {50.0};
        e50 = run_ensemble(ec)[0];
        dyn.seconds = elapsed_s(t0);
        ec.rhos = {1.0, 1000.0};
        auto rest = run_ensemble(ec);
        e1 = rest[0];
        e1000 = rest[1];
    } catch (const std::exception& e) {
        dyn.seconds = elapsed_s(t0);
        dyn.detail = dist.detail = dir.detail = e.what();
        return;
    }

    for (const EnsembleResult* er : {&e50, &e1, &e1000})
        for (const TrackResult& tr : er->tracks)
            for (const StepMetrics& m : tr.steps)
                agg.max_ratio = std::max(agg.max_ratio, m.dual_consistency);

    // Settled window: steps 31.. on full-length runs, the back half on short ones.
    const int lo = opts.track_steps > 30 ? 30 : opts.track_steps / 2;
    struct Window {
        double power = 0, power_opt = 0, sinr = 0;
    };
    auto window_means = [lo](const EnsembleResult& er) {
        Window w;
        int n = 0;
        for (size_t i = static_cast<size_t>(lo); i < er.curve.size(); ++i) {
            w.power += er.curve[i].power_mean;
            w.power_opt += er.curve[i].power_opt_mean;
            w.sinr += er.curve[i].sinr_mean;
            ++n;
        }
        w.power /= n;
        w.power_opt /= n;
        w.sinr /= n;
        return w;
    };

    const Window w50 = window_means(e50);
    const double gap = std::abs(w50.power - w50.power_opt) / w50.power_opt;
    // The worst-case-SINR check is scoped to the settled window, like the power
    // gap; the distance check below stays unwindowed.
    long sinr_misses = 0;
    for (const TrackResult& tr : e50.tracks)
        for (const StepMetrics& m : tr.steps) {
            if (m.step <= lo) continue;
            for (Eigen::Index k = 0; k < m.sinr.size(); ++k)
                if (m.sinr[k] < m.bound_sinr[k] - 1e-6 * std::max(1.0, m.bound_sinr[k]))
                    ++sinr_misses;
        }
    dyn.passed = gap <= 0.10 && w50.sinr >= 9.5 && sinr_misses == 0 && dyn.seconds <= 600.0;
    dyn.detail = strf(
        "%d tracks x %d steps, settled power gap %.2f%%, settled SINR mean %.3f, "
        "%ld settled guarantee misses, %.1f s",
        opts.ensemble_tracks, opts.track_steps, 100.0 * gap, w50.sinr, sinr_misses, dyn.seconds);

    const long dist_hits =
        e50.dist_bound_violations + e1.dist_bound_violations + e1000.dist_bound_violations;
    dist.passed = dist_hits == 0;
    dist.detail = strf("%ld violations across %d tracked steps at rho 1/50/1000", dist_hits,
                       3 * opts.ensemble_tracks * opts.track_steps);

    const Window w1 = window_means(e1);
    const Window w1000 = window_means(e1000);
    dir.passed = w1000.power >= w1000.power_opt && w1.power <= w1.power_opt;
    dir.detail = strf("settled means: rho=1000 %.3f >= optimal %.3f >= rho=1 %.3f",
                      w1000.power, w1000.power_opt, w1.power);
}

// Cone solver on programs with planted optima and planted certificates.
CheckResult check_planted_programs(const VerifyOptions& opts) {
    CheckResult res;
    res.name = "planted-cone-programs";
    const auto t0 = VClock::now();

    double worst_rel = 0;
    std::string fail;
    for (int i = 0; i < opts.planted_programs && fail.empty(); ++i) {
        RngStream rng(4242, static_cast<std::uint64_t>(i));
        PlantedProgram pp = make_planted_program(rng);
        SolveReport rep = solve_cone_program(pp.prog);
        if (rep.status != SolveStatus::Optimal) {
            fail = strf("planted program %d not solved", i);
            break;
        }
        worst_rel = std::max(worst_rel, std::abs(rep.objective - pp.objective) /
                                            std::max(1.0, std::abs(pp.objective)));
    }
    if (worst_rel > 1e-7 && fail.empty()) fail = strf("objective recovery off by %.2e", worst_rel);

    int certified = 0;
    for (int i = 0; i < opts.certified_programs && fail.empty(); ++i) {
        RngStream rng(4243, static_cast<std::uint64_t>(i));
        ConeProgram prog = make_infeasible_program(rng);
        SolveReport rep = solve_cone_program(prog);
        const double atz = (prog.A.transpose() * rep.z).cwiseAbs().maxCoeff();
        if (rep.status != SolveStatus::Infeasible)
            fail = strf("infeasible program %d mislabeled", i);
        else if (std::abs(prog.b.dot(rep.z) + 1.0) > 1e-6 ||
                 atz > 1e-6 * std::max(1.0, inf_norm(rep.z)))
            fail = strf("infeasibility certificate %d does not check out", i);
        else
            ++certified;
    }
    for (int i = 0; i < opts.certified_programs && fail.empty(); ++i) {
        RngStream rng(4244, static_cast<std::uint64_t>(i));
        ConeProgram prog = make_unbounded_program(rng);
        SolveReport rep = solve_cone_program(prog);
        if (rep.status != SolveStatus::Unbounded)
            fail = strf("unbounded program %d mislabeled", i);
        else if (std::abs(prog.c.dot(rep.x) + 1.0) > 1e-6 ||
                 recession_violation(prog, rep.x) > 1e-6)
            fail = strf("unboundedness certificate %d does not check out", i);
        else
            ++certified;
    }

    res.seconds = elapsed_s(t0);
    if (!fail.empty()) {
        res.detail = fail;
        return res;
    }
    res.passed = true;
    res.detail = strf("%d planted optima within %.2e, %d certificates verified",
                      opts.planted_programs, worst_rel, certified);
    return res;
}

// Sample statistics of the channel process against its closed-form moments.
CheckResult check_channel_moments(const VerifyOptions& opts) {
    CheckResult res;
    res.name = "channel-moments";
    const auto t0 = VClock::now();
    const Topology topo = make_uniform_topology(2, 2, 4);
    const int set_dim = topo.num_bs * topo.num_users * topo.num_antennas;

    // Fresh draws: unit mean square per complex entry.
    const int num_sets = (100000 + set_dim - 1) / set_dim;
    double sq_sum = 0;
    long entries = 0;
    for (int s = 0; s < num_sets; ++s) {
        ChannelSet H = sample_initial(topo, 90000 + static_cast<std::uint64_t>(s));
        for (const CVec& h : H.h) {
            sq_sum += h.squaredNorm();
            entries += h.size();
        }
    }
    const double entry_mean = sq_sum / static_cast<double>(entries);

    // Step increments of the mixing process. Low targets keep the feasibility
    // filter from biasing the statistics.
    TrackConfig tc;
    tc.topo = topo;
    tc.q = make_uniform_qos(topo.num_users, 0.5, 1.0);
    tc.zeta = 0.01;
    tc.length = 51;
    const int num_tracks = 200;
    const double expected = 2.0 * (1.0 - std::sqrt(1.0 - tc.zeta)) * set_dim;

    std::vector<double> track_sum(num_tracks, 0.0);
    std::vector<std::string> failures(num_tracks);
#pragma omp parallel for schedule(dynamic) num_threads(battery_jobs(opts.jobs))
    for (int t = 0; t < num_tracks; ++t) {
        try {
            TrackConfig local = tc;
            local.seed = 50000 + static_cast<std::uint64_t>(t);
            const std::vector<ChannelSet> track = generate_track(local);
            double s = 0;
            for (size_t i = 1; i < track.size(); ++i)
                for (size_t e = 0; e < track[i].h.size(); ++e)
                    s += (track[i].h[e] - track[i - 1].h[e]).squaredNorm();
            track_sum[static_cast<size_t>(t)] = s;
        } catch (const std::exception& e) {
            failures[static_cast<size_t>(t)] = e.what();
        }
    }
    double delta_sum = 0;
    std::string fail;
    for (int t = 0; t < num_tracks; ++t) {
        if (!failures[static_cast<size_t>(t)].empty() && fail.empty())
            fail = failures[static_cast<size_t>(t)];
        delta_sum += track_sum[static_cast<size_t>(t)];
    }
    const double delta_mean = delta_sum / (static_cast<double>(num_tracks) * (tc.length - 1));

    res.seconds = elapsed_s(t0);
    if (!fail.empty()) {
        res.detail = fail;
        return res;
    }
    res.passed = std::abs(entry_mean - 1.0) <= 0.01 &&
                 std::abs(delta_mean - expected) / expected <= 0.02;
    res.detail = strf("entry power %.4f (%ld samples), step increment %.4f vs %.4f "
                      "(%d samples)",
                      entry_mean, entries, delta_mean, expected,
                      num_tracks * (tc.length - 1));
    return res;
}

}  // namespace

std::vector<CheckResult> run_verification(const VerifyOptions& opts) {
    ConsistencyAggregate agg;

    CheckResult oracle = check_oracle_equivalence(opts);
    CheckResult stat = check_static_convergence(opts, agg);
    CheckResult dyn, dist, dir;
    check_dynamic_tracking(opts, agg, dyn, dist, dir);

    CheckResult inv;
    inv.name = "consensus-dual-invariant";
    inv.passed = agg.max_ratio <= 1e-9;
    inv.detail = strf("worst scaled copy-sum of the duals %.2e across all runs", agg.max_ratio);

    CheckResult planted = check_planted_programs(opts);
    CheckResult moments = check_channel_moments(opts);

    return {oracle, stat, inv, dist, dyn, dir, planted, moments};
}

}  // namespace dynbf
