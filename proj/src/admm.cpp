#include "dynbf/admm.hpp"

#include <algorithm>
#include <cmath>

#include "dynbf/socp.hpp"

namespace dynbf {

namespace {

void check_config(const AdmmConfig& cfg) {
    if (!(cfg.rho > 0)) throw ModelError("admm: rho must be positive");
    if (!(cfg.inner_tol > 0)) throw ModelError("admm: inner_tol must be positive");
    if (cfg.max_static_iters < 1) throw ModelError("admm: max_static_iters must be >= 1");
    if (!(cfg.convergence_eps > 0)) throw ModelError("admm: convergence_eps must be positive");
}

}  // namespace

AdmmState make_initial_state(const ConsensusIndex& ix) {
    AdmmState st;
    st.is.t = Vec::Zero(ix.t_dim());
    st.is.tau = Vec::Zero(ix.tau_dim());
    st.is.nu = Vec::Zero(ix.t_dim());
    st.iter = 0;
    return st;
}

IterationRecord admm_step(const Topology& topo, const ChannelSet& H, const QosSpec& q,
                          const ConsensusIndex& ix, AdmmState& state, const AdmmConfig& cfg,
                          const ConsensusReference* ref) {
    check_config(cfg);
    if (state.is.tau.size() != ix.tau_dim() || state.is.nu.size() != ix.t_dim())
        throw ModelError("admm_step: state dimensions do not match the consensus index");

    const int B = topo.num_bs;
    const Vec tau_prev = state.is.tau;
    const Vec e_tau_prev = ix.expand(tau_prev);

    BeamformerSet W = make_zero_beamformers(topo);
    Vec t(ix.t_dim());
    std::vector<std::string> failures(static_cast<size_t>(B));

#pragma omp parallel for schedule(static) if (cfg.parallel_bs)
    for (int b = 0; b < B; ++b) {
        try {
            const int lo = ix.bs_begin[static_cast<size_t>(b)];
            const int hi = ix.bs_begin[static_cast<size_t>(b) + 1];
            Vec y_b(hi - lo);
            for (int s = lo; s < hi; ++s)
                y_b[s - lo] = e_tau_prev[s] - state.is.nu[s] / cfg.rho;

            LocalProgram lp = build_local_program(topo, H, q, ix, b, cfg.rho, y_b);
            SolverOptions opts;
            opts.tol = cfg.inner_tol;
            SolveReport rep = solve_cone_program(lp.prog, opts);
            if (rep.status != SolveStatus::Optimal)
                throw AdmmError("base station " + std::to_string(b + 1) +
                                ": local subproblem came back " + to_string(rep.status));
            Vec tb = lp.extract(rep.x, topo, W);
            for (int s = lo; s < hi; ++s) t[s] = tb[s - lo];
        } catch (const std::exception& e) {
            failures[static_cast<size_t>(b)] = e.what();
        }
    }
    for (const std::string& msg : failures)
        if (!msg.empty()) throw AdmmError(msg);

    // Consistency update: per-pair average of the two copies. The off-center
    // weight exists only to exercise the failure detectors.
    const double wo = cfg.consensus_avg_weight;
    Vec tau(ix.tau_dim());
    for (int p = 0; p < ix.tau_dim(); ++p)
        tau[p] = wo * t[ix.owner_slot[static_cast<size_t>(p)]] +
                 (1.0 - wo) * t[ix.sufferer_slot[static_cast<size_t>(p)]];

    IterationRecord rec;
    rec.primal_residual = (t - e_tau_prev).norm();
    rec.dual_change = std::sqrt(2.0) * (tau - tau_prev).norm();

    state.is.nu += cfg.rho * (t - ix.expand(tau));
    state.is.t = t;
    state.is.tau = tau;
    state.iter += 1;

    rec.i = state.iter;
    rec.W = std::move(W);
    rec.t = t;
    rec.tau = tau;
    rec.nu = state.is.nu;
    rec.per_user_sinr = compute_all_sinr(rec.W, H, topo, q);
    rec.total_power = rec.W.total_power();
    if (ref != nullptr)
        rec.lyapunov = lyapunov(state.is.nu, tau, ref->nu_star, ref->tau_star, cfg.rho, ix);
    return rec;
}

StaticResult solve_static(const Topology& topo, const ChannelSet& H, const QosSpec& q,
                          const AdmmConfig& cfg, const ConsensusReference* ref) {
    check_config(cfg);
    const ConsensusIndex ix = build_consensus_index(topo);
    AdmmState st = make_initial_state(ix);

    StaticResult out;
    out.history.reserve(static_cast<size_t>(std::min(cfg.max_static_iters, 4096)));
    auto take_last = [&out]() {
        const IterationRecord& last = out.history.back();
        out.W = last.W;
        out.t = last.t;
        out.tau = last.tau;
        out.nu = last.nu;
        out.iterations = last.i;
    };

    for (int i = 0; i < cfg.max_static_iters; ++i) {
        IterationRecord rec = admm_step(topo, H, q, ix, st, cfg, ref);
        const double stat = std::max(rec.primal_residual, cfg.rho * rec.dual_change);
        out.history.push_back(std::move(rec));
        if (stat <= cfg.convergence_eps) {
            take_last();
            return out;
        }
    }
    take_last();
    throw AdmmTimeout("static consensus loop hit the iteration cap (" +
                          std::to_string(cfg.max_static_iters) + ") before reaching eps " +
                          std::to_string(cfg.convergence_eps),
                      std::move(out));
}

double lyapunov(const Vec& nu, const Vec& tau, const Vec& nu_star, const Vec& tau_star,
                double rho, const ConsensusIndex& ix) {
    if (!(rho > 0)) throw ModelError("lyapunov: rho must be positive");
    if (nu.size() != ix.t_dim() || nu_star.size() != ix.t_dim() || tau.size() != ix.tau_dim() ||
        tau_star.size() != ix.tau_dim())
        throw ModelError("lyapunov: dimension mismatch");
    return (nu - nu_star).squaredNorm() / rho + 2.0 * rho * (tau - tau_star).squaredNorm();
}

bool check_decrease(double prev_v, const IterationRecord& rec, double rho) {
    const double required = rho * rec.primal_residual * rec.primal_residual +
                            rho * rec.dual_change * rec.dual_change;
    const double slack = 1e-6 * std::max(1.0, prev_v);
    return rec.lyapunov <= prev_v - required + slack;
}

}  // namespace dynbf
