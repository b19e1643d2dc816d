#include "dynbf/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dynbf/duality.hpp"

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace dynbf {

namespace {

void append_g17(std::string& row, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    row += buf;
}

int resolve_jobs(int requested) {
#if defined(_OPENMP)
    return requested > 0 ? requested : omp_get_max_threads();
#else
    (void)requested;
    return 1;
#endif
}

}  // namespace

double eval_sinr_bound(double v, double rho, const QosSpec& q, int k) {
    if (!(v >= 0)) throw HarnessError("eval_sinr_bound: potential must be nonnegative");
    if (!(rho > 0)) throw HarnessError("eval_sinr_bound: rho must be positive");
    if (k < 0 || k >= static_cast<int>(q.gamma.size()))
        throw HarnessError("eval_sinr_bound: user index out of range");
    return q.gamma[k] * (1.0 - 4.0 * v / (rho * q.sigma2[k] + 4.0 * v));
}

TrackResult run_track(const std::vector<ChannelSet>& track, const Topology& topo,
                      const QosSpec& q, const AdmmConfig& cfg, int track_id) {
    if (track.empty()) throw HarnessError("run_track: empty track");
    const ConsensusIndex ix = build_consensus_index(topo);
    AdmmState st = make_initial_state(ix);

    TrackResult out;
    out.track_id = track_id;
    out.rho = cfg.rho;
    out.steps.reserve(track.size());

    for (size_t i = 0; i < track.size(); ++i) {
        const ChannelSet& H = track[i];
        DualSolution d = solve_uplink_fixed_point(H, topo, q);
        if (d.status != DualStatus::Optimal)
            throw HarnessError("run_track: channel at step " + std::to_string(i + 1) +
                               " is infeasible");
        InterferenceState ri = reference_interference(d.W_star, H, topo, ix);
        const Vec nu_star = extract_consensus_duals(d, ri, ix);
        const double v = lyapunov(st.is.nu, st.is.tau, nu_star, ri.tau, cfg.rho, ix);

        IterationRecord rec = admm_step(topo, H, q, ix, st, cfg);

        StepMetrics m;
        m.step = static_cast<int>(i) + 1;
        m.power = rec.total_power;
        m.power_opt = d.total_power;
        m.sinr = rec.per_user_sinr;
        m.sinr_mean = rec.per_user_sinr.mean();
        double dsq = 0;
        for (size_t k = 0; k < rec.W.w.size(); ++k)
            dsq += (rec.W.w[k] - d.W_star.w[k]).squaredNorm();
        m.dist_w_sq = dsq;
        m.lyapunov = v;
        m.primal_residual = rec.primal_residual;
        m.bound_dist = (1.0 + 1.0 / cfg.rho) * v;
        m.bound_sinr = Vec(topo.num_users);
        for (int k = 0; k < topo.num_users; ++k) m.bound_sinr[k] = eval_sinr_bound(v, cfg.rho, q, k);
        if (ix.tau_dim() > 0)
            m.dual_consistency = ix.copy_sum(rec.nu).cwiseAbs().maxCoeff() /
                                 std::max(1.0, rec.nu.cwiseAbs().maxCoeff());
        out.steps.push_back(std::move(m));
    }
    return out;
}

std::vector<EnsembleResult> run_ensemble(const ExperimentConfig& cfg) {
    if (cfg.num_tracks < 1) throw HarnessError("run_ensemble: need at least one track");
    if (cfg.rhos.empty()) throw HarnessError("run_ensemble: need at least one rho");
    const Topology& topo = cfg.track.topo;
    const QosSpec& q = cfg.track.q;
    const int T = cfg.num_tracks;
    const int jobs = resolve_jobs(cfg.jobs);

    std::vector<std::vector<ChannelSet>> tracks(static_cast<size_t>(T));
    std::vector<std::string> errors(static_cast<size_t>(T));
#pragma omp parallel for schedule(dynamic) num_threads(jobs)
    for (int t = 0; t < T; ++t) {
        try {
            TrackConfig tc = cfg.track;
            tc.seed = cfg.track.seed + static_cast<std::uint64_t>(t);
            tracks[static_cast<size_t>(t)] = generate_track(tc);
        } catch (const std::exception& e) {
            errors[static_cast<size_t>(t)] = e.what();
        }
    }
    for (const std::string& msg : errors)
        if (!msg.empty()) throw HarnessError(msg);

    if (!cfg.out_dir.empty()) std::filesystem::create_directories(cfg.out_dir);

    std::vector<EnsembleResult> out;
    out.reserve(cfg.rhos.size());
    for (double rho : cfg.rhos) {
        AdmmConfig acfg = cfg.admm;
        acfg.rho = rho;

        EnsembleResult er;
        er.rho = rho;
        er.tracks.resize(static_cast<size_t>(T));
#pragma omp parallel for schedule(dynamic) num_threads(jobs)
        for (int t = 0; t < T; ++t) {
            try {
                er.tracks[static_cast<size_t>(t)] =
                    run_track(tracks[static_cast<size_t>(t)], topo, q, acfg, t);
            } catch (const std::exception& e) {
                errors[static_cast<size_t>(t)] = e.what();
            }
        }
        for (const std::string& msg : errors)
            if (!msg.empty()) throw HarnessError(msg);

        const int steps = static_cast<int>(er.tracks.front().steps.size());
        er.curve.resize(static_cast<size_t>(steps));
        for (int s = 0; s < steps; ++s) {
            EnsembleStepStats& st = er.curve[static_cast<size_t>(s)];
            st.step = s + 1;
            double sum_sinr = 0, sum_sinr_sq = 0;
            long n_sinr = 0;
            for (int t = 0; t < T; ++t) {
                const StepMetrics& m = er.tracks[static_cast<size_t>(t)].steps[static_cast<size_t>(s)];
                st.power_mean += m.power;
                st.power_opt_mean += m.power_opt;
                for (int k = 0; k < m.sinr.size(); ++k) {
                    sum_sinr += m.sinr[k];
                    sum_sinr_sq += m.sinr[k] * m.sinr[k];
                    ++n_sinr;
                }
            }
            st.power_mean /= T;
            st.power_opt_mean /= T;
            st.sinr_mean = sum_sinr / static_cast<double>(n_sinr);
            const double var =
                sum_sinr_sq / static_cast<double>(n_sinr) - st.sinr_mean * st.sinr_mean;
            st.sinr_std = std::sqrt(std::max(0.0, var));
        }

        if (cfg.check_bounds) {
            for (const TrackResult& tr : er.tracks)
                for (const StepMetrics& m : tr.steps) {
                    const double slack = 1e-6 * std::max(1.0, m.lyapunov);
                    if (m.dist_w_sq > m.bound_dist + slack) ++er.dist_bound_violations;
                    for (int k = 0; k < m.sinr.size(); ++k)
                        if (m.sinr[k] < m.bound_sinr[k] - 1e-6 * std::max(1.0, m.bound_sinr[k]))
                            ++er.sinr_bound_violations;
                }
        }

        if (!cfg.out_dir.empty()) {
            char name[64];
            std::snprintf(name, sizeof name, "ensemble_rho%g.csv", rho);
            er.csv_path = (std::filesystem::path(cfg.out_dir) / name).string();
            write_track_csv(er.csv_path, er.tracks);
        }
        out.push_back(std::move(er));
    }
    return out;
}

void write_track_csv(const std::string& path, const std::vector<TrackResult>& tracks) {
    if (tracks.empty()) throw HarnessError("write_track_csv: nothing to write");
    const int K = static_cast<int>(tracks.front().steps.front().sinr.size());

    std::ofstream os(path);
    if (!os) throw HarnessError("write_track_csv: cannot open " + path);
    os << "track_id,step,rho,power_admm,power_opt";
    for (int k = 1; k <= K; ++k) os << ",sinr_user_" << k;
    os << ",sinr_mean,dist_W_sq,lyapunov,primal_residual,bound_dist";
    for (int k = 1; k <= K; ++k) os << ",bound_sinr_user_" << k;
    os << "\n";

    std::string row;
    for (const TrackResult& tr : tracks) {
        for (const StepMetrics& m : tr.steps) {
            row.clear();
            row += std::to_string(tr.track_id);
            row += ',';
            row += std::to_string(m.step);
            row += ',';
            append_g17(row, tr.rho);
            for (double v : {m.power, m.power_opt}) {
                row += ',';
                append_g17(row, v);
            }
            for (int k = 0; k < K; ++k) {
                row += ',';
                append_g17(row, m.sinr[k]);
            }
            for (double v : {m.sinr_mean, m.dist_w_sq, m.lyapunov, m.primal_residual,
                             m.bound_dist}) {
                row += ',';
                append_g17(row, v);
            }
            for (int k = 0; k < K; ++k) {
                row += ',';
                append_g17(row, m.bound_sinr[k]);
            }
            row += '\n';
            os << row;
        }
    }
    if (!os) throw HarnessError("write_track_csv: write failed for " + path);
}

std::vector<TrackResult> read_track_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw HarnessError("read_track_csv: cannot open " + path);

    std::string line;
    if (!std::getline(is, line)) throw HarnessError("read_track_csv: empty file " + path);
    int K = 0;
    {
        std::stringstream hdr(line);
        std::string col;
        while (std::getline(hdr, col, ','))
            if (col.rfind("sinr_user_", 0) == 0) ++K;
    }
    if (K == 0) throw HarnessError("read_track_csv: malformed header in " + path);

    std::vector<TrackResult> out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (static_cast<int>(cells.size()) != 10 + 2 * K)
            throw HarnessError("read_track_csv: bad column count in " + path);

        size_t c = 0;
        auto num = [&cells, &c]() { return std::strtod(cells[c++].c_str(), nullptr); };
        const int track_id = static_cast<int>(num());
        StepMetrics m;
        m.step = static_cast<int>(num());
        const double rho = num();
        m.power = num();
        m.power_opt = num();
        m.sinr = Vec(K);
        for (int k = 0; k < K; ++k) m.sinr[k] = num();
        m.sinr_mean = num();
        m.dist_w_sq = num();
        m.lyapunov = num();
        m.primal_residual = num();
        m.bound_dist = num();
        m.bound_sinr = Vec(K);
        for (int k = 0; k < K; ++k) m.bound_sinr[k] = num();

        if (out.empty() || out.back().track_id != track_id) {
            TrackResult tr;
            tr.track_id = track_id;
            tr.rho = rho;
            out.push_back(std::move(tr));
        }
        out.back().steps.push_back(std::move(m));
    }
    return out;
}

}  // namespace dynbf
