#pragma once

#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "dynbf/model.hpp"

namespace dynbf {

struct AdmmError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AdmmConfig {
    double rho = 50.0;              // consensus penalty, > 0
    double inner_tol = 1e-8;        // per-station cone solver tolerance
    int max_static_iters = 2000;    // iteration cap for solve_static
    double convergence_eps = 1e-8;  // stop when max(primal res, rho * dual change) drops below
    // Weight of the interferer's copy in the consistency average. 0.5 is the
    // algorithm; anything else breaks the dual invariant on purpose so the
    // consistency checks can be shown to catch a miscoded exchange.
    double consensus_avg_weight = 0.5;
    bool parallel_bs = false;  // run the per-station solves under OpenMP
};

// Optimal consistency point used to evaluate tracking progress.
struct ConsensusReference {
    Vec tau_star;
    Vec nu_star;
};

struct IterationRecord {
    int i = 0;
    BeamformerSet W;
    Vec t, tau, nu;
    double primal_residual = 0;  // ||t^i - E tau^{i-1}||, the copy disagreement
    double dual_change = 0;      // ||E(tau^i - tau^{i-1})||
    // V against the supplied reference; NaN when no reference was given.
    double lyapunov = std::numeric_limits<double>::quiet_NaN();
    Vec per_user_sinr;
    double total_power = 0;
};

struct AdmmState {
    InterferenceState is;
    int iter = 0;
};

AdmmState make_initial_state(const ConsensusIndex& ix);  // tau = nu = 0

// One synchronized round: every base station solves its subproblem against the
// current consensus, the copies are averaged into tau, and the duals absorb the
// remaining disagreement. E^T nu = 0 on entry stays 0 to machine precision.
// Throws AdmmError naming the station whose subproblem does not come back
// optimal (possible only when the channel itself is infeasible).
IterationRecord admm_step(const Topology& topo, const ChannelSet& H, const QosSpec& q,
                          const ConsensusIndex& ix, AdmmState& state, const AdmmConfig& cfg,
                          const ConsensusReference* ref = nullptr);

struct StaticResult {
    BeamformerSet W;
    Vec t, tau, nu;
    std::vector<IterationRecord> history;
    int iterations = 0;
};

struct AdmmTimeout : AdmmError {
    AdmmTimeout(const std::string& msg, StaticResult best_)
        : AdmmError(msg), best(std::move(best_)) {}
    StaticResult best;  // iterate reached at the cap
};

// Iterates on a fixed channel until max(primal residual, rho * dual change)
// drops below cfg.convergence_eps; the converged (tau, nu) serve as the
// reference consistency point for that channel. Throws AdmmTimeout (carrying
// the last iterate) when max_static_iters is exhausted first.
StaticResult solve_static(const Topology& topo, const ChannelSet& H, const QosSpec& q,
                          const AdmmConfig& cfg, const ConsensusReference* ref = nullptr);

// (1/rho)||nu - nu*||^2 + rho||E(tau - tau*)||^2. Every consistency variable
// feeds exactly two copy rows, so ||E u||^2 = 2||u||^2.
double lyapunov(const Vec& nu, const Vec& tau, const Vec& nu_star, const Vec& tau_star,
                double rho, const ConsensusIndex& ix);

// Certified progress on a fixed channel: the drop in V from prev_v must cover
// rho * (primal_residual^2 + dual_change^2), up to slack for the inexact
// subproblem solves.
bool check_decrease(double prev_v, const IterationRecord& rec, double rho);

}  // namespace dynbf
