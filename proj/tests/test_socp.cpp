#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "dynbf/socp.hpp"
#include "dynbf/verify.hpp"

using namespace dynbf;

namespace {

// Worst cone-membership violation of a row vector (dual side: Zero rows free).
double membership_violation(const ConeProgram& prog, const Vec& v, bool dual_side) {
    double viol = 0;
    int row = 0;
    for (const auto& blk : prog.cones) {
        if (blk.kind == ConeKind::Zero) {
            if (!dual_side) viol = std::max(viol, v.segment(row, blk.dim).cwiseAbs().maxCoeff());
        } else if (blk.kind == ConeKind::SecondOrder && blk.dim > 1) {
            viol = std::max(viol, v.segment(row + 1, blk.dim - 1).norm() - v[row]);
        } else {
            viol = std::max(viol, -v.segment(row, blk.dim).minCoeff());
        }
        row += blk.dim;
    }
    return viol;
}

}  // namespace

TEST_CASE("norm bound with pinned argument") {
    ConeProgram prog;
    prog.c = Vec::Zero(2);
    prog.c[1] = 1.0;
    prog.A = Mat::Zero(3, 2);
    prog.b = Vec::Zero(3);
    prog.A(0, 0) = 1.0;
    prog.b[0] = 3.0;  // x0 = 3
    prog.A(1, 1) = -1.0;
    prog.A(2, 0) = -1.0;  // x1 >= |x0|
    prog.cones = {{ConeKind::Zero, 1}, {ConeKind::SecondOrder, 2}};

    SolveReport rep = solve_cone_program(prog);
    REQUIRE(rep.status == SolveStatus::Optimal);
    CHECK(rep.objective == doctest::Approx(3.0).epsilon(1e-7));
    CHECK(rep.x[0] == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(rep.x[1] == doctest::Approx(3.0).epsilon(1e-6));
    KktResiduals kk = recompute_kkt(prog, rep);
    CHECK(kk.primal <= 1e-7);
    CHECK(kk.dual <= 1e-7);
    CHECK(kk.gap <= 1e-7);
}

TEST_CASE("scalar lower bound and its multiplier") {
    ConeProgram prog;
    prog.c = Vec::Constant(1, 1.0);
    prog.A = Mat::Constant(1, 1, -1.0);
    prog.b = Vec::Constant(1, -1.0);
    prog.cones = {{ConeKind::NonNeg, 1}};

    SolveReport rep = solve_cone_program(prog);
    REQUIRE(rep.status == SolveStatus::Optimal);
    CHECK(rep.objective == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(rep.z[0] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("one-dimensional second-order cone is the nonnegative ray") {
    ConeProgram prog;
    prog.c = Vec::Constant(1, 1.0);
    prog.A = Mat::Constant(1, 1, -1.0);
    prog.b = Vec::Zero(1);
    prog.cones = {{ConeKind::SecondOrder, 1}};

    SolveReport rep = solve_cone_program(prog);
    REQUIRE(rep.status == SolveStatus::Optimal);
    CHECK(std::abs(rep.objective) <= 1e-8);
}

TEST_CASE("contradictory bounds produce a certified infeasibility verdict") {
    ConeProgram prog;
    prog.c = Vec::Zero(1);
    prog.A = Mat::Zero(2, 1);
    prog.b = Vec::Zero(2);
    prog.A(0, 0) = -1.0;
    prog.b[0] = -1.0;  // x >= 1
    prog.A(1, 0) = 1.0;  // x <= 0
    prog.cones = {{ConeKind::NonNeg, 2}};

    SolveReport rep = solve_cone_program(prog);
    REQUIRE(rep.status == SolveStatus::Infeasible);
    CHECK(prog.b.dot(rep.z) == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK((prog.A.transpose() * rep.z).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK(membership_violation(prog, rep.z, true) <= 1e-9);
}

TEST_CASE("descent ray is certified as unboundedness") {
    ConeProgram prog;
    prog.c = Vec::Constant(1, -1.0);
    prog.A = Mat::Constant(1, 1, -1.0);
    prog.b = Vec::Zero(1);
    prog.cones = {{ConeKind::NonNeg, 1}};

    SolveReport rep = solve_cone_program(prog);
    REQUIRE(rep.status == SolveStatus::Unbounded);
    CHECK(prog.c.dot(rep.x) == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(membership_violation(prog, Vec(-prog.A * rep.x), false) <= 1e-8);
}

TEST_CASE("squared-distance epigraph collapses onto its center") {
    Vec v0(3);
    v0 << 1.0, -2.0, 3.0;
    ConeProgram prog;
    prog.c = Vec::Zero(4);
    prog.c[3] = 1.0;
    prog.A = Mat::Zero(5, 4);
    prog.b = Vec::Zero(5);
    prog.A(0, 3) = -1.0;
    prog.b[0] = 1.0;
    for (int i = 0; i < 3; ++i) {
        prog.A(1 + i, i) = -2.0;
        prog.b[1 + i] = -2.0 * v0[i];
    }
    prog.A(4, 3) = -1.0;
    prog.b[4] = -1.0;
    prog.cones = {{ConeKind::SecondOrder, 5}};

    SolveReport rep = solve_cone_program(prog);
    REQUIRE(rep.status == SolveStatus::Optimal);
    CHECK(std::abs(rep.objective) <= 1e-6);
    CHECK((rep.x.head(3) - v0).norm() <= 1e-3);
}

TEST_CASE("planted optima are recovered to tight relative accuracy") {
    for (int i = 0; i < 20; ++i) {
        RngStream rng(9001, static_cast<std::uint64_t>(i));
        PlantedProgram pp = make_planted_program(rng);
        SolveReport rep = solve_cone_program(pp.prog);
        INFO("instance ", i, " status ", to_string(rep.status), " iters ", rep.iterations);
        REQUIRE(rep.status == SolveStatus::Optimal);
        CHECK(std::abs(rep.objective - pp.objective) <=
              1e-7 * std::max(1.0, std::abs(pp.objective)));
        KktResiduals kk = recompute_kkt(pp.prog, rep);
        CHECK(kk.primal <= 1e-7);
        CHECK(kk.dual <= 1e-7);
        CHECK(kk.gap <= 1e-7);
    }
}

TEST_CASE("planted infeasible programs are certified") {
    for (int i = 0; i < 5; ++i) {
        RngStream rng(9002, static_cast<std::uint64_t>(i));
        ConeProgram prog = make_infeasible_program(rng);
        SolveReport rep = solve_cone_program(prog);
        INFO("instance ", i, " status ", to_string(rep.status));
        REQUIRE(rep.status == SolveStatus::Infeasible);
        CHECK(prog.b.dot(rep.z) == doctest::Approx(-1.0).epsilon(1e-6));
        CHECK((prog.A.transpose() * rep.z).cwiseAbs().maxCoeff() <=
              1e-6 * std::max(1.0, rep.z.norm()));
        CHECK(membership_violation(prog, rep.z, true) <= 1e-8);
    }
}

TEST_CASE("planted unbounded programs are certified") {
    for (int i = 0; i < 5; ++i) {
        RngStream rng(9003, static_cast<std::uint64_t>(i));
        ConeProgram prog = make_unbounded_program(rng);
        SolveReport rep = solve_cone_program(prog);
        INFO("instance ", i, " status ", to_string(rep.status));
        REQUIRE(rep.status == SolveStatus::Unbounded);
        CHECK(prog.c.dot(rep.x) == doctest::Approx(-1.0).epsilon(1e-6));
        Vec u = -prog.A * rep.x;
        int row = 0;
        for (const auto& blk : prog.cones) {
            if (blk.kind == ConeKind::Zero)
                CHECK(u.segment(row, blk.dim).cwiseAbs().maxCoeff() <= 1e-6);
            row += blk.dim;
        }
        CHECK(membership_violation(prog, u, true) <= 1e-8);
    }
}

TEST_CASE("malformed programs are rejected") {
    ConeProgram prog;
    prog.c = Vec::Zero(2);
    prog.A = Mat::Zero(3, 2);
    prog.b = Vec::Zero(3);
    prog.cones = {{ConeKind::NonNeg, 2}};  // does not cover the rows
    CHECK_THROWS_AS(prog.validate(), ModelError);

    prog.cones = {{ConeKind::NonNeg, 3}};
    prog.b[1] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(prog.validate(), ModelError);
}
