#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <vector>

#include "dynbf/duality.hpp"
#include "dynbf/instance_io.hpp"
#include "dynbf/socp.hpp"
#include "dynbf/tracks.hpp"
#include "util.hpp"

using namespace dynbf;
using namespace dynbf::testutil;

namespace {

// Loose targets so redraws essentially never trigger and moment statistics
// stay unconditioned.
TrackConfig benign_config() {
    TrackConfig cfg;
    cfg.topo = make_uniform_topology(2, 2, 4);
    cfg.q = make_uniform_qos(cfg.topo.num_users, 0.5, 1.0);
    return cfg;
}

double max_entry_diff(const ChannelSet& A, const ChannelSet& B, const Topology& topo) {
    double d = 0;
    for (int m = 0; m < topo.num_bs; ++m)
        for (int k = 0; k < topo.num_users; ++k)
            d = std::max(d, (A.at(m, k) - B.at(m, k)).cwiseAbs().maxCoeff());
    return d;
}

double frob2_diff(const ChannelSet& A, const ChannelSet& B, const Topology& topo) {
    double s = 0;
    for (int m = 0; m < topo.num_bs; ++m)
        for (int k = 0; k < topo.num_users; ++k) s += (A.at(m, k) - B.at(m, k)).squaredNorm();
    return s;
}

}  // namespace

TEST_CASE("tracks are reproducible bit for bit") {
    TrackConfig cfg = benign_config();
    cfg.zeta = 0.05;
    cfg.length = 8;
    cfg.seed = 42;
    std::vector<ChannelSet> a = generate_track(cfg);
    std::vector<ChannelSet> b = generate_track(cfg);
    REQUIRE(a.size() == 8);
    REQUIRE(b.size() == 8);
    for (size_t i = 0; i < a.size(); ++i)
        CHECK(max_entry_diff(a[i], b[i], cfg.topo) == 0.0);

    // The first element is the plain initial draw whenever that draw passes.
    CHECK(max_entry_diff(a[0], sample_initial(cfg.topo, cfg.seed), cfg.topo) == 0.0);
}

TEST_CASE("zeta endpoints freeze or fully refresh the channel") {
    TrackConfig cfg = benign_config();
    ChannelSet H0 = sample_initial(cfg.topo, 7);

    cfg.zeta = 0.0;
    RngStream rng(3, 1);
    ChannelSet same = step_channel(H0, cfg, rng);
    CHECK(max_entry_diff(same, H0, cfg.topo) == 0.0);

    cfg.zeta = 1.0;
    ChannelSet other = sample_initial(cfg.topo, 8);
    RngStream r1(3, 2), r2(3, 2);
    ChannelSet from_H0 = step_channel(H0, cfg, r1);
    ChannelSet from_other = step_channel(other, cfg, r2);
    CHECK(max_entry_diff(from_H0, from_other, cfg.topo) == 0.0);
    CHECK(max_entry_diff(from_H0, H0, cfg.topo) > 0.1);
}

TEST_CASE("fresh draws have unit power and independent coordinates") {
    const Topology topo = make_uniform_topology(2, 2, 4);
    const int sets = 100000;

    double sum_sq = 0;  // |entry|^2 over the first 3125 sets = 1e5 entries
    long n_sq = 0;
    // Three coordinate pairs tracked across all sets.
    double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
    double sc = 0, sd = 0, scc = 0, sdd = 0, scd = 0;
    double se = 0, sf = 0, see = 0, sff = 0, sef = 0;
    for (int i = 0; i < sets; ++i) {
        ChannelSet H = sample_initial(topo, static_cast<std::uint64_t>(i));
        if (i < 3125) {
            for (int m = 0; m < topo.num_bs; ++m)
                for (int k = 0; k < topo.num_users; ++k) {
                    sum_sq += H.at(m, k).squaredNorm();
                    n_sq += topo.num_antennas;
                }
        }
        const double a = H.at(0, 0)[0].real(), b = H.at(1, 3)[2].real();
        const double c = H.at(0, 0)[0].real(), d = H.at(0, 0)[0].imag();
        const double e = H.at(0, 1)[1].imag(), f = H.at(1, 0)[3].real();
        sa += a; sb += b; saa += a * a; sbb += b * b; sab += a * b;
        sc += c; sd += d; scc += c * c; sdd += d * d; scd += c * d;
        se += e; sf += f; see += e * e; sff += f * f; sef += e * f;
    }
    CHECK(n_sq == 100000);
    CHECK(sum_sq / static_cast<double>(n_sq) == doctest::Approx(1.0).epsilon(0.01));

    auto corr = [&](double sx, double sy, double sxx, double syy, double sxy) {
        const double n = sets;
        const double cov = sxy / n - (sx / n) * (sy / n);
        const double vx = sxx / n - (sx / n) * (sx / n);
        const double vy = syy / n - (sy / n) * (sy / n);
        return cov / std::sqrt(vx * vy);
    };
    CHECK(std::abs(corr(sa, sb, saa, sbb, sab)) < 0.02);
    CHECK(std::abs(corr(sc, sd, scc, sdd, scd)) < 0.02);
    CHECK(std::abs(corr(se, sf, see, sff, sef)) < 0.02);
}

TEST_CASE("step size matches the autoregressive closed form") {
    // H' - H = sqrt(z) * inn + (sqrt(1-z) - 1) * H with independent pieces, so
    // E||H' - H||^2 = (z + (1 - sqrt(1-z))^2) * N = 2 * (1 - sqrt(1-z)) * N.
    TrackConfig cfg = benign_config();
    cfg.zeta = 0.01;
    cfg.length = 51;
    const double n_entries = 2.0 * 4.0 * 4.0;
    const double expected = 2.0 * (1.0 - std::sqrt(1.0 - cfg.zeta)) * n_entries;

    double sum = 0;
    long n = 0;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        cfg.seed = seed;
        std::vector<ChannelSet> track = generate_track(cfg);
        for (size_t i = 1; i < track.size(); ++i) {
            sum += frob2_diff(track[i], track[i - 1], cfg.topo);
            ++n;
        }
    }
    CHECK(sum / static_cast<double>(n) == doctest::Approx(expected).epsilon(0.02));
}

TEST_CASE("the unit second moment is stationary along tracks") {
    TrackConfig cfg = benign_config();
    cfg.zeta = 0.3;
    cfg.length = 6;
    double sum = 0;
    long n = 0;
    for (std::uint64_t seed = 100; seed < 400; ++seed) {
        cfg.seed = seed;
        const ChannelSet last = generate_track(cfg).back();
        for (int m = 0; m < cfg.topo.num_bs; ++m)
            for (int k = 0; k < cfg.topo.num_users; ++k) {
                sum += last.at(m, k).squaredNorm();
                n += cfg.topo.num_antennas;
            }
    }
    CHECK(sum / static_cast<double>(n) == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("every emitted channel passes both feasibility oracles") {
    TrackConfig cfg;
    cfg.topo = make_uniform_topology(2, 2, 4);
    cfg.q = make_uniform_qos(4, 10.0, 10.0);
    cfg.zeta = 0.01;
    cfg.length = 10;
    cfg.seed = 123;
    std::vector<ChannelSet> track = generate_track(cfg);
    REQUIRE(track.size() == 10);
    for (const ChannelSet& H : track) {
        CHECK(is_feasible(H, cfg.topo, cfg.q));
        CentralizedProgram cp = build_centralized_program(cfg.topo, H, cfg.q);
        CHECK(solve_cone_program(cp.prog).status == SolveStatus::Optimal);
    }
}

TEST_CASE("a single-step track is just one feasible draw") {
    TrackConfig cfg = benign_config();
    cfg.length = 1;
    cfg.seed = 9;
    std::vector<ChannelSet> track = generate_track(cfg);
    REQUIRE(track.size() == 1);
    CHECK(is_feasible(track[0], cfg.topo, cfg.q));
}

TEST_CASE("overloaded targets exhaust the redraw budget") {
    TrackConfig cfg;
    cfg.topo = make_uniform_topology(1, 3, 1);  // three users on one antenna
    cfg.q = make_uniform_qos(3, 10.0, 10.0);
    cfg.length = 3;
    cfg.max_rejections = 5;
    CHECK_THROWS_AS(generate_track(cfg), TrackError);

    ChannelSet H0 = sample_initial(cfg.topo, 1);
    RngStream rng(2, 5);
    CHECK_THROWS_AS(step_channel(H0, cfg, rng), TrackError);
}

TEST_CASE("bad track configs are rejected") {
    TrackConfig cfg = benign_config();
    cfg.zeta = -0.1;
    CHECK_THROWS_AS(generate_track(cfg), TrackError);
    cfg.zeta = 1.5;
    CHECK_THROWS_AS(generate_track(cfg), TrackError);
    cfg.zeta = 0.5;
    cfg.length = 0;
    CHECK_THROWS_AS(generate_track(cfg), TrackError);
}

TEST_CASE("track files round-trip bit-exactly") {
    TrackConfig cfg = benign_config();
    cfg.zeta = 0.2;
    cfg.length = 4;
    cfg.seed = 77;
    std::vector<ChannelSet> track = generate_track(cfg);

    const std::string path = "roundtrip_track.txt";
    write_track_file(path, cfg.topo, cfg.q, track);
    TrackFile tf = read_track_file(path);
    std::remove(path.c_str());

    REQUIRE(tf.steps.size() == track.size());
    CHECK(tf.topo.num_users == cfg.topo.num_users);
    for (size_t i = 0; i < track.size(); ++i)
        CHECK(max_entry_diff(tf.steps[i], track[i], cfg.topo) == 0.0);
}
