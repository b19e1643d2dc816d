#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "dynbf/socp.hpp"
#include "util.hpp"

using namespace dynbf;
using namespace dynbf::testutil;

namespace {

BeamformerSet solve_centralized(const Instance& inst, double& power) {
    CentralizedProgram cp = build_centralized_program(inst.topo, inst.H, inst.qos);
    SolveReport rep = solve_cone_program(cp.prog);
    REQUIRE(rep.status == SolveStatus::Optimal);
    power = rep.objective;
    return cp.extract_beamformers(rep.x, inst.topo);
}

}  // namespace

TEST_CASE("single user matches the matched-filter closed form") {
    Instance inst;
    inst.topo = make_uniform_topology(1, 1, 4);
    inst.qos = make_uniform_qos(1, 10.0, 10.0);
    inst.H = random_channels(inst.topo, 5);
    const CVec& h = inst.H.at(0, 0);
    const double h2 = h.squaredNorm();
    const double p_expect = 10.0 * 10.0 / h2;

    double power = 0;
    BeamformerSet W = solve_centralized(inst, power);
    CHECK(power == doctest::Approx(p_expect).epsilon(1e-6));
    CHECK(W.total_power() == doctest::Approx(p_expect).epsilon(1e-6));
    CVec w_expect = std::sqrt(100.0) / h2 * h;
    CHECK((W.w[0] - w_expect).norm() <= 1e-5 * w_expect.norm());
    CHECK(compute_sinr(W, inst.H, inst.topo, inst.qos, 0) ==
          doctest::Approx(10.0).epsilon(1e-6));
}

TEST_CASE("channel scaling moves power by the inverse square") {
    Instance inst = standard_instance(7);
    double p1 = 0;
    solve_centralized(inst, p1);
    for (auto& h : inst.H.h) h *= 2.0;
    double p2 = 0;
    solve_centralized(inst, p2);
    CHECK(p2 == doctest::Approx(p1 / 4.0).epsilon(1e-6));
}

TEST_CASE("full-coordination optimum meets every target with equality") {
    Instance inst = standard_instance(11);
    double power = 0;
    BeamformerSet W = solve_centralized(inst, power);
    CHECK(std::abs(power - W.total_power()) <= 1e-6 * std::max(1.0, power));
    for (int k = 0; k < inst.topo.num_users; ++k) {
        CHECK(compute_sinr(W, inst.H, inst.topo, inst.qos, k) ==
              doctest::Approx(inst.qos.gamma[k]).epsilon(1e-6));
        const cxd g = inst.H.at(inst.topo.bs_of(k), k).dot(W.w[static_cast<size_t>(k)]);
        CHECK(std::abs(g.imag()) <= 1e-7 * (1.0 + std::abs(g)));
        CHECK(g.real() > 0);
    }
}

TEST_CASE("decoupled cells solve independently to the joint optimum") {
    Instance inst = decoupled_instance(3);
    double p_joint = 0;
    solve_centralized(inst, p_joint);

    ConsensusIndex ix = build_consensus_index(inst.topo);
    BeamformerSet W = make_zero_beamformers(inst.topo);
    double p_sum = 0;
    for (int b = 0; b < inst.topo.num_bs; ++b) {
        const int nt = ix.bs_begin[b + 1] - ix.bs_begin[b];
        LocalProgram lp =
            build_local_program(inst.topo, inst.H, inst.qos, ix, b, 50.0, Vec::Zero(nt));
        SolveReport rep = solve_cone_program(lp.prog);
        REQUIRE(rep.status == SolveStatus::Optimal);
        Vec t = lp.extract(rep.x, inst.topo, W);
        CHECK(t.cwiseAbs().maxCoeff() <= 1e-4);  // nothing to copy across zero channels
        p_sum += rep.objective;
    }
    CHECK(p_sum == doctest::Approx(p_joint).epsilon(1e-6));
    for (int k = 0; k < inst.topo.num_users; ++k)
        CHECK(compute_sinr(W, inst.H, inst.topo, inst.qos, k) ==
              doctest::Approx(inst.qos.gamma[k]).epsilon(1e-6));
}

TEST_CASE("copy variables track the prox target when unconstrained") {
    // BS0 serves user 0; its channel toward user 1 is zero, so the owner copy
    // t(0->1) is free of the interference cone and follows max(0, y).
    Topology topo = make_uniform_topology(2, 1, 2);
    QosSpec q = make_uniform_qos(2, 10.0, 10.0);
    ChannelSet H = random_channels(topo, 21);
    H.at(0, 1).setZero();
    ConsensusIndex ix = build_consensus_index(topo);
    REQUIRE(ix.bs_begin[1] - ix.bs_begin[0] == 2);

    const int owner_pos = ix.owner_slot[static_cast<size_t>(ix.pair_index(0, 1))] - ix.bs_begin[0];
    const int suff_pos =
        ix.sufferer_slot[static_cast<size_t>(ix.pair_index(1, 0))] - ix.bs_begin[0];
    const double p_single = 100.0 / H.at(0, 0).squaredNorm();

    Vec y(2);
    SUBCASE("positive target is matched exactly") {
        y[owner_pos] = 3.7;
        y[suff_pos] = 0.0;
        LocalProgram lp = build_local_program(topo, H, q, ix, 0, 50.0, y);
        SolveReport rep = solve_cone_program(lp.prog);
        REQUIRE(rep.status == SolveStatus::Optimal);
        BeamformerSet W = make_zero_beamformers(topo);
        Vec t = lp.extract(rep.x, topo, W);
        CHECK(t[owner_pos] == doctest::Approx(3.7).epsilon(1e-6));
        CHECK(std::abs(t[suff_pos]) <= 1e-4);
        CHECK(rep.objective == doctest::Approx(p_single).epsilon(1e-6));
    }
    SUBCASE("negative targets clip at zero and pay the prox cost") {
        y[owner_pos] = -2.0;
        y[suff_pos] = -5.0;
        LocalProgram lp = build_local_program(topo, H, q, ix, 0, 50.0, y);
        SolveReport rep = solve_cone_program(lp.prog);
        REQUIRE(rep.status == SolveStatus::Optimal);
        BeamformerSet W = make_zero_beamformers(topo);
        Vec t = lp.extract(rep.x, topo, W);
        CHECK(t.cwiseAbs().maxCoeff() <= 1e-4);
        CHECK(rep.objective ==
              doctest::Approx(p_single + 25.0 * (4.0 + 25.0)).epsilon(1e-6));
    }
}

TEST_CASE("owner copies sit on the caused-interference cone when pushed down") {
    Topology topo = make_uniform_topology(2, 1, 2);
    QosSpec q = make_uniform_qos(2, 10.0, 10.0);
    ChannelSet H = random_channels(topo, 22);  // all channels nonzero
    ConsensusIndex ix = build_consensus_index(topo);
    const int owner_pos = ix.owner_slot[static_cast<size_t>(ix.pair_index(0, 1))] - ix.bs_begin[0];
    const int suff_pos =
        ix.sufferer_slot[static_cast<size_t>(ix.pair_index(1, 0))] - ix.bs_begin[0];

    Vec y = Vec::Zero(2);
    SUBCASE("large target dominates the cone bound") {
        y[owner_pos] = 10.0;
        LocalProgram lp = build_local_program(topo, H, q, ix, 0, 50.0, y);
        SolveReport rep = solve_cone_program(lp.prog);
        REQUIRE(rep.status == SolveStatus::Optimal);
        BeamformerSet W = make_zero_beamformers(topo);
        Vec t = lp.extract(rep.x, topo, W);
        CHECK(t[owner_pos] == doctest::Approx(10.0).epsilon(1e-6));
    }
    SUBCASE("negative target lands on the leaked power exactly") {
        y[owner_pos] = -10.0;
        LocalProgram lp = build_local_program(topo, H, q, ix, 0, 50.0, y);
        SolveReport rep = solve_cone_program(lp.prog);
        REQUIRE(rep.status == SolveStatus::Optimal);
        BeamformerSet W = make_zero_beamformers(topo);
        Vec t = lp.extract(rep.x, topo, W);
        const double leaked = std::abs(H.at(0, 1).dot(W.w[0]));
        CHECK(t[owner_pos] == doctest::Approx(leaked).epsilon(1e-6));
    }
    SUBCASE("suffered copy settles strictly between zero and its target") {
        y[suff_pos] = 1.0;
        LocalProgram lp = build_local_program(topo, H, q, ix, 0, 50.0, y);
        SolveReport rep = solve_cone_program(lp.prog);
        REQUIRE(rep.status == SolveStatus::Optimal);
        BeamformerSet W = make_zero_beamformers(topo);
        Vec t = lp.extract(rep.x, topo, W);
        CHECK(t[suff_pos] > 1e-6);
        CHECK(t[suff_pos] < 1.0 - 1e-6);
    }
}

TEST_CASE("per-station optimum meets its local targets with equality") {
    Instance inst = standard_instance(13);
    ConsensusIndex ix = build_consensus_index(inst.topo);
    const int b = 0;
    const int nt = ix.bs_begin[b + 1] - ix.bs_begin[b];
    LocalProgram lp = build_local_program(inst.topo, inst.H, inst.qos, ix, b, 50.0,
                                          Vec::Constant(nt, 0.3));
    SolveReport rep = solve_cone_program(lp.prog);
    REQUIRE(rep.status == SolveStatus::Optimal);
    BeamformerSet W = make_zero_beamformers(inst.topo);
    Vec t = lp.extract(rep.x, inst.topo, W);

    double own_power = 0;
    for (int k : lp.users) own_power += W.w[static_cast<size_t>(k)].squaredNorm();
    const double prox = (t - Vec::Constant(nt, 0.3)).squaredNorm();
    CHECK(rep.objective ==
          doctest::Approx(own_power + 25.0 * prox).epsilon(1e-6));

    for (int k : lp.users) {
        Vec t_for_k(inst.topo.num_bs - 1);
        int pos = 0;
        for (int m = 0; m < inst.topo.num_bs; ++m) {
            if (m == b) continue;
            t_for_k[pos++] =
                t[ix.sufferer_slot[static_cast<size_t>(ix.pair_index(m, k))] - ix.bs_begin[b]];
        }
        CHECK(compute_local_sinr(W, inst.H, inst.topo, inst.qos, k, t_for_k) ==
              doctest::Approx(inst.qos.gamma[k]).epsilon(1e-6));
    }
}

TEST_CASE("builders reject inconsistent input") {
    Instance inst = standard_instance(17);
    ConsensusIndex ix = build_consensus_index(inst.topo);
    const int nt = ix.bs_begin[1] - ix.bs_begin[0];

    SUBCASE("zero direct channel") {
        inst.H.at(inst.topo.bs_of(0), 0).setZero();
        CHECK_THROWS_AS(build_centralized_program(inst.topo, inst.H, inst.qos), ModelError);
        CHECK_THROWS_AS(
            build_local_program(inst.topo, inst.H, inst.qos, ix, 0, 50.0, Vec::Zero(nt)),
            ModelError);
    }
    SUBCASE("prox target of the wrong length") {
        CHECK_THROWS_AS(
            build_local_program(inst.topo, inst.H, inst.qos, ix, 0, 50.0, Vec::Zero(nt + 1)),
            ModelError);
    }
    SUBCASE("bad station index or penalty") {
        CHECK_THROWS_AS(
            build_local_program(inst.topo, inst.H, inst.qos, ix, 2, 50.0, Vec::Zero(nt)),
            ModelError);
        CHECK_THROWS_AS(
            build_local_program(inst.topo, inst.H, inst.qos, ix, 0, 0.0, Vec::Zero(nt)),
            ModelError);
    }
}
