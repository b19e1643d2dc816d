#pragma once

#include <optional>

#include "dynbf/model.hpp"

namespace dynbf {

enum class DualStatus { Optimal, Infeasible };

// Output of the fixed-point oracle. alpha holds the per-user multipliers of the
// identity-normalized covariance iteration; lambda_k = alpha_k * sigma2_k is the
// virtual uplink power of user k, and sum(lambda) equals the optimal downlink
// transmit power when the instance is feasible.
struct DualSolution {
    DualStatus status = DualStatus::Infeasible;
    Vec alpha;
    Vec lambda;
    BeamformerSet directions;  // unit-norm beam directions
    Vec powers;                // per-user downlink stream powers
    BeamformerSet W_star;      // sqrt(powers_k) * directions_k
    double total_power = std::numeric_limits<double>::quiet_NaN();
    int iterations = 0;
    double residual = std::numeric_limits<double>::infinity();
};

struct DualOptions {
    double tol = 1e-10;
    int max_iters = 5000;
    double growth_cap = 1e9;  // vs the first-sweep value; beyond this: infeasible
};

// Power-coupling data of a fixed set of unit directions: Psi has the cross gains
// G_kj = |h(b(j),k)^H dir_j|^2 off the diagonal, D = diag(gamma_k / G_kk).
struct CouplingMatrices {
    Mat Psi;
    Mat D;
    Vec sigma_vec;  // noise powers sigma_k^2
};
CouplingMatrices build_coupling(const BeamformerSet& directions, const ChannelSet& H,
                                const Topology& topo, const QosSpec& q);

// p = (I - D Psi)^-1 D sigma when the spectral radius of D Psi is < 1;
// empty result otherwise.
std::optional<Vec> solve_power_allocation(const CouplingMatrices& cm);

// Fixed point of the per-user multiplier iteration
//   alpha_k <- gamma_k / ( h_k^H (I + sum_{j != k} alpha_j h_j h_j^H)^-1 h_k ),
// all channels taken at user k's serving base station, started from alpha = 0
// (monotone nondecreasing). Divergence past the cap or running out of sweeps
// without meeting tol reports Infeasible.
DualSolution solve_uplink_fixed_point(const ChannelSet& H, const Topology& topo,
                                      const QosSpec& q, const DualOptions& opts = {});

bool is_feasible(const ChannelSet& H, const Topology& topo, const QosSpec& q);

// Consensus reference for a given beamformer set: tau holds the caused
// interference magnitudes per cross pair, t the expanded copies, nu zero.
InterferenceState reference_interference(const BeamformerSet& W, const ChannelSet& H,
                                         const Topology& topo, const ConsensusIndex& ix);

// Optimal consistency duals: the owner copy of pair (m,k) carries
// +2 alpha_k tau_mk, the sufferer copy -2 alpha_k tau_mk, so the column sums
// over copies vanish exactly.
Vec extract_consensus_duals(const DualSolution& dual, const InterferenceState& ref,
                            const ConsensusIndex& ix);

}  // namespace dynbf
