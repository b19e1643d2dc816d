#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "dynbf/admm.hpp"
#include "dynbf/tracks.hpp"

namespace dynbf {

struct HarnessError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Per-step metrics of one simulated track. The potential V is evaluated with
// the state entering the step, against that step's own optimum, since that is
// the quantity the guarantees are stated in.
struct StepMetrics {
    int step = 0;  // 1-based
    double power = 0;
    double power_opt = 0;
    Vec sinr;  // achieved, per user
    double sinr_mean = 0;
    double dist_w_sq = 0;  // squared Frobenius distance to the step optimum
    double lyapunov = 0;
    double primal_residual = 0;
    double bound_dist = 0;  // (1 + 1/rho) * V, the distance guarantee
    Vec bound_sinr;         // per-user worst-case SINR at this V
    // ||E^T nu||_inf / max(1, ||nu||_inf) after the step. In-memory diagnostic
    // only; not part of the CSV schema.
    double dual_consistency = 0;
};

struct TrackResult {
    int track_id = 0;
    double rho = 0;
    std::vector<StepMetrics> steps;
};

// One ADMM round per channel change, oracle reference recomputed per step.
TrackResult run_track(const std::vector<ChannelSet>& track, const Topology& topo,
                      const QosSpec& q, const AdmmConfig& cfg, int track_id = 0);

// Worst-case SINR of user k guaranteed at potential value v:
// gamma_k * (1 - 4v / (rho * sigma_k^2 + 4v)).
double eval_sinr_bound(double v, double rho, const QosSpec& q, int k);

struct ExperimentConfig {
    TrackConfig track;  // scenario; track t uses seed track.seed + t
    std::vector<double> rhos{50.0};
    int num_tracks = 1;
    std::string out_dir;  // when set, one CSV per rho is written here
    bool check_bounds = true;
    int jobs = 0;  // track-level parallelism; 0 = all cores
    AdmmConfig admm;
};

struct EnsembleStepStats {
    int step = 0;
    double power_mean = 0;
    double power_opt_mean = 0;
    double sinr_mean = 0;  // over tracks and users
    double sinr_std = 0;
};

struct EnsembleResult {
    double rho = 0;
    std::vector<TrackResult> tracks;
    std::vector<EnsembleStepStats> curve;
    long dist_bound_violations = 0;
    long sinr_bound_violations = 0;
    std::string csv_path;  // empty when no output directory was given
};

// Shared tracks, one full sweep per rho. Aggregation runs in fixed track
// order, so results do not depend on the worker count.
std::vector<EnsembleResult> run_ensemble(const ExperimentConfig& cfg);

// CSV schema, one row per (track, step):
//   track_id,step,rho,power_admm,power_opt,sinr_user_1..K,sinr_mean,
//   dist_W_sq,lyapunov,primal_residual,bound_dist,bound_sinr_user_1..K
// Doubles carry 17 significant digits so a re-read reproduces every value
// bit-exactly.
void write_track_csv(const std::string& path, const std::vector<TrackResult>& tracks);
std::vector<TrackResult> read_track_csv(const std::string& path);

}  // namespace dynbf
