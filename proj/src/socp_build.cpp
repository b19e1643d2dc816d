#include <cmath>
#include <vector>

#include "dynbf/socp.hpp"

namespace dynbf {

namespace {

// Realified row for Re(h^H w) over a [Re w; Im w] block.
void put_re_row(Mat& A, int row, int col0, const CVec& h, double scale) {
    const int nt = static_cast<int>(h.size());
    A.block(row, col0, 1, nt) = scale * h.real().transpose();
    A.block(row, col0 + nt, 1, nt) = scale * h.imag().transpose();
}

// Realified row for Im(h^H w).
void put_im_row(Mat& A, int row, int col0, const CVec& h, double scale) {
    const int nt = static_cast<int>(h.size());
    A.block(row, col0, 1, nt) = -scale * h.imag().transpose();
    A.block(row, col0 + nt, 1, nt) = scale * h.real().transpose();
}

void check_qos(const Topology& topo, const QosSpec& q) {
    if (static_cast<int>(q.gamma.size()) != topo.num_users ||
        static_cast<int>(q.sigma2.size()) != topo.num_users)
        throw ModelError("qos arrays do not match the number of users");
    for (int k = 0; k < topo.num_users; ++k)
        if (!(q.gamma[k] > 0) || !(q.sigma2[k] > 0))
            throw ModelError("qos targets and noise powers must be positive");
}

void check_direct_channel(const Topology& topo, const ChannelSet& H, int k) {
    if (H.at(topo.bs_of(k), k).norm() == 0)
        throw ModelError("user " + std::to_string(k + 1) +
                         " has a zero channel from its serving base station");
}

CVec complex_from(const Vec& x, int off, int nt) {
    CVec w(nt);
    w.real() = x.segment(off, nt);
    w.imag() = x.segment(off + nt, nt);
    return w;
}

}  // namespace

CentralizedProgram build_centralized_program(const Topology& topo, const ChannelSet& H,
                                             const QosSpec& q) {
    check_qos(topo, q);
    const int K = topo.num_users, NT = topo.num_antennas;
    for (int k = 0; k < K; ++k) check_direct_channel(topo, H, k);

    CentralizedProgram cp;
    cp.w_offset.resize(K);
    for (int k = 0; k < K; ++k) cp.w_offset[k] = 2 * NT * k;
    cp.power_var = 2 * NT * K;
    const int n = 2 * NT * K + 1;

    // per user: phase-fix equality + SINR cone of dim 2K+2; then the power cone
    const int rows = K * (1 + 2 * K + 2) + (2 * NT * K + 2);
    ConeProgram& pr = cp.prog;
    pr.c = Vec::Zero(n);
    pr.c[cp.power_var] = 1.0;
    pr.A = Mat::Zero(rows, n);
    pr.b = Vec::Zero(rows);

    int row = 0;
    for (int k = 0; k < K; ++k) {
        const CVec& hk = H.at(topo.bs_of(k), k);
        pr.cones.push_back({ConeKind::Zero, 1});
        put_im_row(pr.A, row, cp.w_offset[k], hk, 1.0);
        ++row;

        pr.cones.push_back({ConeKind::SecondOrder, 2 * K + 2});
        put_re_row(pr.A, row, cp.w_offset[k], hk, -std::sqrt(1.0 + 1.0 / q.gamma[k]));
        ++row;
        for (int i = 0; i < K; ++i) {
            const CVec& hik = H.at(topo.bs_of(i), k);
            put_re_row(pr.A, row, cp.w_offset[i], hik, -1.0);
            ++row;
            put_im_row(pr.A, row, cp.w_offset[i], hik, -1.0);
            ++row;
        }
        pr.b[row] = std::sqrt(q.sigma2[k]);
        ++row;
    }

    // P >= sum ||w||^2 via ||[2 w_all; P-1]|| <= P+1
    pr.cones.push_back({ConeKind::SecondOrder, 2 * NT * K + 2});
    pr.A(row, cp.power_var) = -1.0;
    pr.b[row] = 1.0;
    ++row;
    for (int j = 0; j < 2 * NT * K; ++j) {
        pr.A(row, j) = -2.0;
        ++row;
    }
    pr.A(row, cp.power_var) = -1.0;
    pr.b[row] = -1.0;
    ++row;

    pr.validate();
    return cp;
}

BeamformerSet CentralizedProgram::extract_beamformers(const Vec& x, const Topology& topo) const {
    BeamformerSet W = make_zero_beamformers(topo);
    const int NT = topo.num_antennas;
    for (int k = 0; k < topo.num_users; ++k) W.w[k] = complex_from(x, w_offset[k], NT);
    return W;
}

LocalProgram build_local_program(const Topology& topo, const ChannelSet& H, const QosSpec& q,
                                 const ConsensusIndex& ix, int bs, double rho, const Vec& y_b) {
    check_qos(topo, q);
    if (bs < 0 || bs >= topo.num_bs) throw ModelError("base station index out of range");
    if (!(rho > 0)) throw ModelError("penalty parameter must be positive");

    const int NT = topo.num_antennas;
    const std::vector<int> users = topo.users_of(bs);
    const int nu = static_cast<int>(users.size());
    const int slot0 = ix.bs_begin[bs];
    const int nt = ix.bs_begin[bs + 1] - slot0;
    if (static_cast<int>(y_b.size()) != nt)
        throw ModelError("prox target size does not match this base station's copy block");
    for (int k : users) check_direct_channel(topo, H, k);

    LocalProgram lp;
    lp.bs = bs;
    lp.users = users;
    lp.w_offset.resize(nu);
    for (int j = 0; j < nu; ++j) lp.w_offset[j] = 2 * NT * j;
    const int t_begin = 2 * NT * nu;
    lp.t_offset.resize(nt);
    for (int s = 0; s < nt; ++s) lp.t_offset[s] = t_begin + s;
    lp.power_var = t_begin + nt;
    lp.prox_var = lp.power_var + 1;
    const int n = lp.prox_var + 1;

    int owner_slots = 0;
    for (int s = 0; s < nt; ++s)
        if (ix.slots[slot0 + s].caused) ++owner_slots;

    int rows = 0;
    rows += nu * (1 + (1 + 2 * nu + (topo.num_bs - 1) + 1));  // phase fix + SINR cone
    rows += owner_slots * (1 + 2 * nu);                       // caused-interference cones
    rows += nt;                                               // t >= 0
    rows += 2 * NT * nu + 2;                                  // power cone
    rows += nt + 2;                                           // prox cone

    ConeProgram& pr = lp.prog;
    pr.c = Vec::Zero(n);
    pr.c[lp.power_var] = 1.0;
    pr.c[lp.prox_var] = 0.5 * rho;
    pr.A = Mat::Zero(rows, n);
    pr.b = Vec::Zero(rows);

    int row = 0;
    for (int j = 0; j < nu; ++j) {
        const int k = users[j];
        const CVec& hk = H.at(bs, k);  // all own-cell signals reach user k over h(bs,k)
        pr.cones.push_back({ConeKind::Zero, 1});
        put_im_row(pr.A, row, lp.w_offset[j], hk, 1.0);
        ++row;

        pr.cones.push_back({ConeKind::SecondOrder, 1 + 2 * nu + (topo.num_bs - 1) + 1});
        put_re_row(pr.A, row, lp.w_offset[j], hk, -std::sqrt(1.0 + 1.0 / q.gamma[k]));
        ++row;
        for (int i = 0; i < nu; ++i) {
            put_re_row(pr.A, row, lp.w_offset[i], hk, -1.0);
            ++row;
            put_im_row(pr.A, row, lp.w_offset[i], hk, -1.0);
            ++row;
        }
        for (int m = 0; m < topo.num_bs; ++m) {
            if (m == bs) continue;
            pr.A(row, t_begin + ix.sufferer_slot.at(ix.pair_index(m, k)) - slot0) = -1.0;
            ++row;
        }
        pr.b[row] = std::sqrt(q.sigma2[k]);
        ++row;
    }

    for (int s = 0; s < nt; ++s) {
        if (!ix.slots[slot0 + s].caused) continue;
        const int k = ix.pairs[ix.slots[slot0 + s].pair].k;
        const CVec& hk = H.at(bs, k);  // leakage to the other cell's user k
        pr.cones.push_back({ConeKind::SecondOrder, 1 + 2 * nu});
        pr.A(row, t_begin + s) = -1.0;
        ++row;
        for (int i = 0; i < nu; ++i) {
            put_re_row(pr.A, row, lp.w_offset[i], hk, -1.0);
            ++row;
            put_im_row(pr.A, row, lp.w_offset[i], hk, -1.0);
            ++row;
        }
    }

    if (nt > 0) {
        pr.cones.push_back({ConeKind::NonNeg, nt});
        for (int s = 0; s < nt; ++s) {
            pr.A(row, t_begin + s) = -1.0;
            ++row;
        }
    }

    pr.cones.push_back({ConeKind::SecondOrder, 2 * NT * nu + 2});
    pr.A(row, lp.power_var) = -1.0;
    pr.b[row] = 1.0;
    ++row;
    for (int j = 0; j < 2 * NT * nu; ++j) {
        pr.A(row, j) = -2.0;
        ++row;
    }
    pr.A(row, lp.power_var) = -1.0;
    pr.b[row] = -1.0;
    ++row;

    pr.cones.push_back({ConeKind::SecondOrder, nt + 2});
    pr.A(row, lp.prox_var) = -1.0;
    pr.b[row] = 1.0;
    ++row;
    for (int s = 0; s < nt; ++s) {
        pr.A(row, t_begin + s) = -2.0;
        pr.b[row] = -2.0 * y_b[s];
        ++row;
    }
    pr.A(row, lp.prox_var) = -1.0;
    pr.b[row] = -1.0;
    ++row;

    pr.validate();
    return lp;
}

Vec LocalProgram::extract(const Vec& x, const Topology& topo, BeamformerSet& W) const {
    const int NT = topo.num_antennas;
    for (std::size_t j = 0; j < users.size(); ++j)
        W.w[users[j]] = complex_from(x, w_offset[j], NT);
    Vec t(t_offset.size());
    for (std::size_t s = 0; s < t_offset.size(); ++s) t[s] = x[t_offset[s]];
    return t;
}

}  // namespace dynbf
