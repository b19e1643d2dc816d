#include "dynbf/duality.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace dynbf {

namespace {

using CMat = Eigen::MatrixXcd;

void check_inputs(const ChannelSet& H, const Topology& topo, const QosSpec& q) {
    if (H.num_bs != topo.num_bs || H.num_users != topo.num_users ||
        H.num_antennas != topo.num_antennas)
        throw ModelError("channel set does not match the topology");
    if (static_cast<int>(q.gamma.size()) != topo.num_users ||
        static_cast<int>(q.sigma2.size()) != topo.num_users)
        throw ModelError("qos arrays do not match the number of users");
    for (int k = 0; k < topo.num_users; ++k) {
        if (!(q.gamma[k] > 0) || !(q.sigma2[k] > 0))
            throw ModelError("qos targets and noise powers must be positive");
        if (H.at(topo.bs_of(k), k).norm() == 0)
            throw ModelError("user " + std::to_string(k + 1) +
                             " has a zero channel from its serving base station");
    }
}

// I + sum_j alpha_j h(b,j) h(b,j)^H over all users j, at base station b.
CMat uplink_covariance(const ChannelSet& H, const Topology& topo, const Vec& alpha, int b,
                       int skip_user) {
    const int nt = topo.num_antennas;
    CMat M = CMat::Identity(nt, nt);
    for (int j = 0; j < topo.num_users; ++j) {
        if (j == skip_user || alpha[j] == 0.0) continue;
        const CVec& hj = H.at(b, j);
        M.noalias() += alpha[j] * (hj * hj.adjoint());
    }
    return M;
}

}  // namespace

CouplingMatrices build_coupling(const BeamformerSet& directions, const ChannelSet& H,
                                const Topology& topo, const QosSpec& q) {
    const int K = topo.num_users;
    CouplingMatrices cm;
    cm.Psi = Mat::Zero(K, K);
    cm.D = Mat::Zero(K, K);
    cm.sigma_vec = q.sigma2;
    for (int k = 0; k < K; ++k) {
        for (int j = 0; j < K; ++j) {
            const double g =
                std::norm(H.at(topo.bs_of(j), k).dot(directions.w[static_cast<size_t>(j)]));
            if (j == k) {
                if (!(g > 0))
                    throw ModelError("direction of user " + std::to_string(k + 1) +
                                     " is orthogonal to its own channel");
                cm.D(k, k) = q.gamma[k] / g;
            } else {
                cm.Psi(k, j) = g;
            }
        }
    }
    return cm;
}

std::optional<Vec> solve_power_allocation(const CouplingMatrices& cm) {
    const int K = static_cast<int>(cm.sigma_vec.size());
    Mat DPsi = cm.D * cm.Psi;
    Eigen::EigenSolver<Mat> es(DPsi, false);
    const double radius = es.eigenvalues().cwiseAbs().maxCoeff();
    if (!(radius < 1.0)) return std::nullopt;
    Vec rhs = cm.D * cm.sigma_vec;
    Vec p = (Mat::Identity(K, K) - DPsi).partialPivLu().solve(rhs);
    if (!p.allFinite() || p.minCoeff() <= 0) return std::nullopt;
    return p;
}

DualSolution solve_uplink_fixed_point(const ChannelSet& H, const Topology& topo,
                                      const QosSpec& q, const DualOptions& opts) {
    check_inputs(H, topo, q);
    const int K = topo.num_users;

    DualSolution out;
    out.alpha = Vec::Zero(K);

    // first-sweep values gamma_k/||h_k||^2 set the divergence scale
    Vec cap(K);
    for (int k = 0; k < K; ++k)
        cap[k] = opts.growth_cap * q.gamma[k] / H.at(topo.bs_of(k), k).squaredNorm();

    bool converged = false;
    Vec alpha = Vec::Zero(K);
    for (int it = 0; it < opts.max_iters; ++it) {
        Vec next(K);
        for (int k = 0; k < K; ++k) {
            const int b = topo.bs_of(k);
            const CVec& hk = H.at(b, k);
            CMat M = uplink_covariance(H, topo, alpha, b, k);
            const double val = hk.dot(M.llt().solve(hk)).real();
            next[k] = q.gamma[k] / val;
        }
        double res = 0;
        for (int k = 0; k < K; ++k)
            res = std::max(res, std::abs(next[k] - alpha[k]) / std::max(1.0, next[k]));
        alpha = next;
        out.iterations = it + 1;
        out.residual = res;
        if ((alpha.array() > cap.array()).any()) {
            out.status = DualStatus::Infeasible;
            out.alpha = alpha;
            return out;
        }
        if (res <= opts.tol) {
            converged = true;
            break;
        }
    }
    out.alpha = alpha;
    if (!converged) {
        out.status = DualStatus::Infeasible;
        return out;
    }

    out.lambda = alpha.cwiseProduct(q.sigma2);
    out.directions = make_zero_beamformers(topo);
    for (int k = 0; k < K; ++k) {
        const int b = topo.bs_of(k);
        CMat M = uplink_covariance(H, topo, alpha, b, -1);
        CVec d = M.llt().solve(H.at(b, k));
        out.directions.w[static_cast<size_t>(k)] = d / d.norm();
    }

    CouplingMatrices cm = build_coupling(out.directions, H, topo, q);
    std::optional<Vec> p = solve_power_allocation(cm);
    if (!p) {
        out.status = DualStatus::Infeasible;
        return out;
    }
    out.powers = *p;
    out.W_star = make_zero_beamformers(topo);
    for (int k = 0; k < K; ++k)
        out.W_star.w[static_cast<size_t>(k)] =
            std::sqrt(out.powers[k]) * out.directions.w[static_cast<size_t>(k)];
    out.total_power = out.powers.sum();
    out.status = DualStatus::Optimal;
    return out;
}

bool is_feasible(const ChannelSet& H, const Topology& topo, const QosSpec& q) {
    return solve_uplink_fixed_point(H, topo, q).status == DualStatus::Optimal;
}

InterferenceState reference_interference(const BeamformerSet& W, const ChannelSet& H,
                                         const Topology& topo, const ConsensusIndex& ix) {
    InterferenceState st;
    st.tau = Vec::Zero(ix.tau_dim());
    for (int p = 0; p < ix.tau_dim(); ++p) {
        const int m = ix.pairs[static_cast<size_t>(p)].m;
        const int k = ix.pairs[static_cast<size_t>(p)].k;
        double acc = 0;
        for (int i : topo.users_of(m)) acc += std::norm(H.at(m, k).dot(W.w[static_cast<size_t>(i)]));
        st.tau[p] = std::sqrt(acc);
    }
    st.t = ix.expand(st.tau);
    st.nu = Vec::Zero(ix.t_dim());
    return st;
}

Vec extract_consensus_duals(const DualSolution& dual, const InterferenceState& ref,
                            const ConsensusIndex& ix) {
    Vec nu = Vec::Zero(ix.t_dim());
    for (int p = 0; p < ix.tau_dim(); ++p) {
        const int k = ix.pairs[static_cast<size_t>(p)].k;
        const double v = 2.0 * dual.alpha[k] * ref.tau[p];
        nu[ix.owner_slot[static_cast<size_t>(p)]] = v;
        nu[ix.sufferer_slot[static_cast<size_t>(p)]] = -v;
    }
    return nu;
}

}  // namespace dynbf
