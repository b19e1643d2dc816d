#pragma once

#include "dynbf/rng.hpp"
#include "dynbf/socp.hpp"

namespace dynbf {

// Random cone program with a planted strictly complementary primal-dual pair, so
// the optimal objective is known exactly by construction.
struct PlantedProgram {
    ConeProgram prog;
    Vec x_star;
    Vec z_star;
    double objective = 0;
};
PlantedProgram make_planted_program(RngStream& rng);

// Program that is primal infeasible by construction: a dual improving direction
// (Farkas certificate) exists, and the cost is chosen so the dual side stays
// feasible and the solver must land on the infeasibility verdict.
ConeProgram make_infeasible_program(RngStream& rng);

// Program that is feasible but unbounded below: a strict recession direction of
// the feasible set with negative cost is planted.
ConeProgram make_unbounded_program(RngStream& rng);

// End-to-end verification battery. Every check is self-contained and named, so
// a failure report points at the property that broke.
struct VerifyOptions {
    int oracle_instances = 100;  // cross-oracle power agreement sample
    int static_instances = 20;   // fixed-channel convergence sample
    int planted_programs = 20;   // cone solver recovery sample
    int certified_programs = 5;  // per infeasible / unbounded flavor
    int ensemble_tracks = 200;   // dynamic tracking ensemble size
    int track_steps = 50;
    int jobs = 0;  // 0 = all cores
    // Off-center consensus averaging weight. 0.5 runs the real algorithm;
    // anything else demonstrates that the invariant checks catch a miscoded
    // interference exchange.
    double consensus_avg_weight = 0.5;
};

struct CheckResult {
    std::string name;
    bool passed = false;
    double seconds = 0;
    std::string detail;
};

std::vector<CheckResult> run_verification(const VerifyOptions& opts = {});

}  // namespace dynbf
