#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dynbf {

using cxd = std::complex<double>;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;

// Thrown by validation and by operations whose preconditions fail.
struct ModelError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Cell layout: B base stations with num_antennas antennas each, K single-antenna
// users, each user served by exactly one base station.
// Users and base stations are 0-indexed internally, 1-indexed in human-facing output.
struct Topology {
    int num_bs = 0;
    int num_users = 0;
    int num_antennas = 0;
    std::vector<int> serving;             // user -> serving BS
    std::vector<std::vector<int>> cells;  // BS -> users, ascending

    int bs_of(int k) const { return serving[static_cast<size_t>(k)]; }
    const std::vector<int>& users_of(int b) const { return cells[static_cast<size_t>(b)]; }
};

// Builds the cell lists and validates; throws ModelError on bad input.
Topology make_topology(int num_bs, int num_users, int num_antennas, std::vector<int> serving);

// Uniform layout: `users_per_bs` users per base station, assigned in order.
Topology make_uniform_topology(int num_bs, int users_per_bs, int num_antennas);

// Per-user QoS: linear SINR target gamma_k > 0 and noise power sigma2_k > 0.
struct QosSpec {
    Vec gamma;
    Vec sigma2;
};

QosSpec make_uniform_qos(int num_users, double gamma, double sigma2);

// Channel vectors h_mk (length num_antennas) from every base station m to every user k.
struct ChannelSet {
    int num_bs = 0;
    int num_users = 0;
    int num_antennas = 0;
    std::vector<CVec> h;  // index m * num_users + k

    CVec& at(int m, int k) { return h[static_cast<size_t>(m) * num_users + k]; }
    const CVec& at(int m, int k) const { return h[static_cast<size_t>(m) * num_users + k]; }
};

ChannelSet make_channel_set(const Topology& topo);

// One transmit beamformer per user (length num_antennas, complex).
struct BeamformerSet {
    std::vector<CVec> w;

    double total_power() const;
};

BeamformerSet make_zero_beamformers(const Topology& topo);

// Received SINR of user k under beamformers W: direct power over intracell
// interference + intercell interference + noise.
double compute_sinr(const BeamformerSet& W, const ChannelSet& H, const Topology& topo,
                    const QosSpec& q, int k);

Vec compute_all_sinr(const BeamformerSet& W, const ChannelSet& H, const Topology& topo,
                     const QosSpec& q);

// SINR of user k as seen by its serving base station b, with the intercell term
// replaced by the local interference estimates t_mk (one per other BS, ascending m).
// t_for_k must have size num_bs - 1.
double compute_local_sinr(const BeamformerSet& W, const ChannelSet& H, const Topology& topo,
                          const QosSpec& q, int k, const Vec& t_for_k);

// Index maps for the interference-consistency variables.
//
// For every cross pair (m, k) with m != b(k) there is one consistency variable
// tau_mk and two local copies in t: the owner copy held by the interfering base
// station m and the sufferer copy held by the serving base station b(k).
// t is laid out as per-BS contiguous blocks; within a block slots are ordered by
// (m, k) lexicographically. The pair list itself is (m, k)-lexicographic and
// frozen, so the 0/1 selection matrix E (t = E tau at consensus) is reproducible
// across runs. E has one 1 per row and two 1s per column, hence E^T E = 2 I and
// the pseudo-inverse is the copy average (1/2) E^T.
struct ConsensusIndex {
    struct Pair {
        int m;  // interfering BS
        int k;  // victim user (served elsewhere)
    };
    struct Slot {
        int pair;     // index into pairs
        int bs;       // BS holding this copy
        bool caused;  // true: owner copy at m; false: sufferer copy at b(k)
    };

    int num_bs = 0;
    int num_users = 0;
    std::vector<Pair> pairs;        // size (B-1)K
    std::vector<Slot> slots;        // size 2(B-1)K, in t order
    std::vector<int> bs_begin;      // size B+1, block bounds of each BS inside t
    std::vector<int> owner_slot;    // pair -> t index of the owner copy
    std::vector<int> sufferer_slot; // pair -> t index of the sufferer copy

    int tau_dim() const { return static_cast<int>(pairs.size()); }
    int t_dim() const { return static_cast<int>(slots.size()); }
    int pair_index(int m, int k) const;  // -1 if (m,k) is not a cross pair

    // E tau: distribute each consistency value to its two copies.
    Vec expand(const Vec& tau) const;
    // E^T t: per-pair sum of the two copies.
    Vec copy_sum(const Vec& t) const;
    // (1/2) E^T t: per-pair average of the two copies (pseudo-inverse of expand).
    Vec copy_average(const Vec& t) const;
    // Rows of E belonging to one BS block applied to tau: (E tau) restricted to b.
    Vec expand_block(const Vec& tau, int b) const;
};

ConsensusIndex build_consensus_index(const Topology& topo);

// ADMM consistency state: local copies t, consensus values tau, duals nu.
struct InterferenceState {
    Vec t;
    Vec tau;
    Vec nu;
};

}  // namespace dynbf
