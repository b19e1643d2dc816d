#include "dynbf/model.hpp"

#include <algorithm>
#include <cmath>

namespace dynbf {

Topology make_topology(int num_bs, int num_users, int num_antennas, std::vector<int> serving) {
    if (num_bs < 1 || num_users < 1 || num_antennas < 1)
        throw ModelError("topology: counts must be >= 1");
    if (static_cast<int>(serving.size()) != num_users)
        throw ModelError("topology: serving map size != num_users");
    Topology topo;
    topo.num_bs = num_bs;
    topo.num_users = num_users;
    topo.num_antennas = num_antennas;
    topo.serving = std::move(serving);
    topo.cells.resize(static_cast<size_t>(num_bs));
    for (int k = 0; k < num_users; ++k) {
        const int b = topo.serving[static_cast<size_t>(k)];
        if (b < 0 || b >= num_bs) throw ModelError("topology: serving BS out of range");
        topo.cells[static_cast<size_t>(b)].push_back(k);
    }
    return topo;
}

Topology make_uniform_topology(int num_bs, int users_per_bs, int num_antennas) {
    std::vector<int> serving;
    serving.reserve(static_cast<size_t>(num_bs) * users_per_bs);
    for (int b = 0; b < num_bs; ++b)
        for (int u = 0; u < users_per_bs; ++u) serving.push_back(b);
    return make_topology(num_bs, num_bs * users_per_bs, num_antennas, std::move(serving));
}

QosSpec make_uniform_qos(int num_users, double gamma, double sigma2) {
    if (gamma <= 0 || sigma2 <= 0) throw ModelError("qos: gamma and sigma2 must be > 0");
    QosSpec q;
    q.gamma = Vec::Constant(num_users, gamma);
    q.sigma2 = Vec::Constant(num_users, sigma2);
    return q;
}

ChannelSet make_channel_set(const Topology& topo) {
    ChannelSet H;
    H.num_bs = topo.num_bs;
    H.num_users = topo.num_users;
    H.num_antennas = topo.num_antennas;
    H.h.assign(static_cast<size_t>(topo.num_bs) * topo.num_users,
               CVec::Zero(topo.num_antennas));
    return H;
}

double BeamformerSet::total_power() const {
    double p = 0;
    for (const auto& wk : w) p += wk.squaredNorm();
    return p;
}

BeamformerSet make_zero_beamformers(const Topology& topo) {
    BeamformerSet W;
    W.w.assign(static_cast<size_t>(topo.num_users), CVec::Zero(topo.num_antennas));
    return W;
}

namespace {

void check_dims(const BeamformerSet& W, const ChannelSet& H, const Topology& topo,
                const QosSpec& q) {
    if (static_cast<int>(W.w.size()) != topo.num_users ||
        H.num_users != topo.num_users || H.num_bs != topo.num_bs ||
        q.gamma.size() != topo.num_users || q.sigma2.size() != topo.num_users)
        throw ModelError("sinr: dimension mismatch");
    for (const auto& wk : W.w)
        if (wk.size() != topo.num_antennas) throw ModelError("sinr: beamformer length mismatch");
}

}  // namespace

double compute_sinr(const BeamformerSet& W, const ChannelSet& H, const Topology& topo,
                    const QosSpec& q, int k) {
    check_dims(W, H, topo, q);
    const int b = topo.bs_of(k);
    const CVec& hk = H.at(b, k);
    const double signal = std::norm(hk.dot(W.w[static_cast<size_t>(k)]));
    double denom = q.sigma2[k];
    for (int i : topo.users_of(b))
        if (i != k) denom += std::norm(hk.dot(W.w[static_cast<size_t>(i)]));
    for (int m = 0; m < topo.num_bs; ++m) {
        if (m == b) continue;
        const CVec& hmk = H.at(m, k);
        for (int i : topo.users_of(m)) denom += std::norm(hmk.dot(W.w[static_cast<size_t>(i)]));
    }
    return signal / denom;
}

Vec compute_all_sinr(const BeamformerSet& W, const ChannelSet& H, const Topology& topo,
                     const QosSpec& q) {
    Vec s(topo.num_users);
    for (int k = 0; k < topo.num_users; ++k) s[k] = compute_sinr(W, H, topo, q, k);
    return s;
}

double compute_local_sinr(const BeamformerSet& W, const ChannelSet& H, const Topology& topo,
                          const QosSpec& q, int k, const Vec& t_for_k) {
    check_dims(W, H, topo, q);
    if (t_for_k.size() != topo.num_bs - 1)
        throw ModelError("local sinr: need one interference estimate per other BS");
    const int b = topo.bs_of(k);
    const CVec& hk = H.at(b, k);
    const double signal = std::norm(hk.dot(W.w[static_cast<size_t>(k)]));
    double denom = q.sigma2[k];
    for (int i : topo.users_of(b))
        if (i != k) denom += std::norm(hk.dot(W.w[static_cast<size_t>(i)]));
    denom += t_for_k.squaredNorm();
    return signal / denom;
}

int ConsensusIndex::pair_index(int m, int k) const {
    for (size_t p = 0; p < pairs.size(); ++p)
        if (pairs[p].m == m && pairs[p].k == k) return static_cast<int>(p);
    return -1;
}

Vec ConsensusIndex::expand(const Vec& tau) const {
    Vec t(t_dim());
    for (int s = 0; s < t_dim(); ++s) t[s] = tau[slots[static_cast<size_t>(s)].pair];
    return t;
}

Vec ConsensusIndex::copy_sum(const Vec& t) const {
    Vec r = Vec::Zero(tau_dim());
    for (int s = 0; s < t_dim(); ++s) r[slots[static_cast<size_t>(s)].pair] += t[s];
    return r;
}

Vec ConsensusIndex::copy_average(const Vec& t) const {
    return 0.5 * copy_sum(t);
}

Vec ConsensusIndex::expand_block(const Vec& tau, int b) const {
    Vec r(bs_begin[static_cast<size_t>(b) + 1] - bs_begin[static_cast<size_t>(b)]);
    for (int s = bs_begin[static_cast<size_t>(b)]; s < bs_begin[static_cast<size_t>(b) + 1]; ++s)
        r[s - bs_begin[static_cast<size_t>(b)]] = tau[slots[static_cast<size_t>(s)].pair];
    return r;
}

ConsensusIndex build_consensus_index(const Topology& topo) {
    ConsensusIndex ix;
    ix.num_bs = topo.num_bs;
    ix.num_users = topo.num_users;
    for (int m = 0; m < topo.num_bs; ++m)
        for (int k = 0; k < topo.num_users; ++k)
            if (topo.bs_of(k) != m) ix.pairs.push_back({m, k});

    ix.owner_slot.assign(ix.pairs.size(), -1);
    ix.sufferer_slot.assign(ix.pairs.size(), -1);
    ix.bs_begin.assign(static_cast<size_t>(topo.num_bs) + 1, 0);

    for (int b = 0; b < topo.num_bs; ++b) {
        ix.bs_begin[static_cast<size_t>(b)] = static_cast<int>(ix.slots.size());
        // Slots hosted by b, ordered by the frozen (m, k) pair order: the owner
        // copy of every pair with m == b, the sufferer copy of every pair whose
        // victim is served by b.
        for (size_t p = 0; p < ix.pairs.size(); ++p) {
            const auto& pr = ix.pairs[p];
            const bool owns = pr.m == b;
            const bool suffers = topo.bs_of(pr.k) == b;
            if (!owns && !suffers) continue;
            const int slot = static_cast<int>(ix.slots.size());
            ix.slots.push_back({static_cast<int>(p), b, owns});
            (owns ? ix.owner_slot : ix.sufferer_slot)[p] = slot;
        }
    }
    ix.bs_begin[static_cast<size_t>(topo.num_bs)] = static_cast<int>(ix.slots.size());
    return ix;
}

}  // namespace dynbf
