#pragma once

#include <iosfwd>
#include <limits>
#include <vector>

#include "dynbf/model.hpp"

namespace dynbf {

enum class ConeKind { Zero, NonNeg, SecondOrder };

struct ConeBlock {
    ConeKind kind;
    int dim;
};

// Standard form:  minimize c'x  subject to  s = b - A x,  s in K,
// where K is the ordered product of the cone blocks partitioning the rows.
// Zero blocks are equality rows (s = 0, free dual), NonNeg blocks are
// componentwise s >= 0, SecondOrder blocks require s[0] >= ||s[1:]||.
struct ConeProgram {
    Vec c;
    Mat A;
    Vec b;
    std::vector<ConeBlock> cones;

    int num_vars() const { return static_cast<int>(c.size()); }
    int num_rows() const { return static_cast<int>(b.size()); }
    void validate() const;  // throws ModelError on inconsistent or non-finite data
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, MaxIterations, NumericalProblem };

const char* to_string(SolveStatus s);

struct SolveReport {
    SolveStatus status = SolveStatus::NumericalProblem;
    Vec x;  // primal solution; for Unbounded, a ray with c'x = -1
    Vec z;  // row duals (free on Zero rows, in the dual cone otherwise);
            // for Infeasible, a certificate with b'z = -1, A'z = 0
    Vec s;  // slacks b - A x
    double objective = std::numeric_limits<double>::quiet_NaN();
    int iterations = 0;
    double primal_res = std::numeric_limits<double>::infinity();
    double dual_res = std::numeric_limits<double>::infinity();
    double gap = std::numeric_limits<double>::infinity();
    double tol_used = 0;
};

struct SolverOptions {
    double tol = 1e-8;
    int max_iters = 200;
};

// Dense primal-dual interior-point solver over the homogeneous embedding of the
// primal-dual pair, with Nesterov-Todd scaling and a predictor-corrector step.
// Infeasibility and unboundedness are certified through the embedding.
SolveReport solve_cone_program(const ConeProgram& prog, const SolverOptions& opts = {});

// KKT residuals recomputed from the raw program data, independent of the solver's
// internal bookkeeping. All three are normalized like the solver's stopping rule.
struct KktResiduals {
    double primal;
    double dual;
    double gap;
};
KktResiduals recompute_kkt(const ConeProgram& prog, const SolveReport& rep);

// Plain-text dump (sizes, cones, then coordinate triplets) for external checking.
void dump_cone_program(std::ostream& os, const ConeProgram& prog);

// ---- Builders ----------------------------------------------------------------
//
// Realification convention, used by both builders: a complex vector v maps to
// [Re v; Im v], and for a channel h the linear functionals of w are
//   Re(h^H w) = [Re h; Im h]' [Re w; Im w],
//   Im(h^H w) = [-Im h; Re h]' [Re w; Im w].
// Quadratic objectives enter through the rotated-cone identity
//   t >= ||x||^2  <=>  ||[2x; t-1]|| <= t+1.

// Full-coordination power minimization: minimize total transmit power subject to
// every user's SINR target. Per user, the target is the second-order cone
//   sqrt(1 + 1/gamma_k) Re(h_k^H w_k) >= ||[(h^H w_i)_{all i}; sigma_k]||
// plus the phase-fixing equality Im(h_k^H w_k) = 0.
struct CentralizedProgram {
    ConeProgram prog;
    std::vector<int> w_offset;  // per user, start of [Re w; Im w] in x
    int power_var = -1;         // epigraph variable; objective value = total power

    BeamformerSet extract_beamformers(const Vec& x, const Topology& topo) const;
};
CentralizedProgram build_centralized_program(const Topology& topo, const ChannelSet& H,
                                             const QosSpec& q);

// One base station's subproblem: minimize sum ||w_j||^2 + (rho/2)||t_b - y_b||^2
// over its own beamformers and its interference-copy block t_b, subject to its
// users' SINR cones (with the suffered copies inside the cone norm), the
// caused-interference cones t >= ||(h^H w_i)_i||, and t_b >= 0.
struct LocalProgram {
    ConeProgram prog;
    int bs = -1;
    std::vector<int> users;     // users of this BS, ascending
    std::vector<int> w_offset;  // parallel to users
    std::vector<int> t_offset;  // per slot of this BS's block in the ConsensusIndex
    int power_var = -1;
    int prox_var = -1;

    // Writes this BS's beamformers into W and returns its t block.
    Vec extract(const Vec& x, const Topology& topo, BeamformerSet& W) const;
};
LocalProgram build_local_program(const Topology& topo, const ChannelSet& H, const QosSpec& q,
                                 const ConsensusIndex& ix, int bs, double rho, const Vec& y_b);

}  // namespace dynbf
