#pragma once

#include "dynbf/instance_io.hpp"
#include "dynbf/model.hpp"
#include "dynbf/rng.hpp"

namespace dynbf::testutil {

inline ChannelSet random_channels(const Topology& topo, std::uint64_t seed) {
    ChannelSet H = make_channel_set(topo);
    for (int m = 0; m < topo.num_bs; ++m)
        for (int k = 0; k < topo.num_users; ++k) {
            RngStream rng(seed, 0x11, static_cast<std::uint64_t>(m),
                          static_cast<std::uint64_t>(k));
            CVec h(topo.num_antennas);
            for (int a = 0; a < topo.num_antennas; ++a) h[a] = rng.cgaussian_unit();
            H.at(m, k) = h;
        }
    return H;
}

// Two cells, two users each, four antennas, gamma 10, sigma2 10.
inline Instance standard_instance(std::uint64_t seed) {
    Instance inst;
    inst.topo = make_uniform_topology(2, 2, 4);
    inst.qos = make_uniform_qos(inst.topo.num_users, 10.0, 10.0);
    inst.H = random_channels(inst.topo, seed);
    return inst;
}

// Same layout as standard_instance but with the cross-cell channels zeroed.
inline Instance decoupled_instance(std::uint64_t seed) {
    Instance inst = standard_instance(seed);
    for (int m = 0; m < inst.topo.num_bs; ++m)
        for (int k = 0; k < inst.topo.num_users; ++k)
            if (inst.topo.bs_of(k) != m) inst.H.at(m, k).setZero();
    return inst;
}

inline BeamformerSet random_beamformers(const Topology& topo, std::uint64_t seed) {
    BeamformerSet W = make_zero_beamformers(topo);
    for (int k = 0; k < topo.num_users; ++k) {
        RngStream rng(seed, 0x22, static_cast<std::uint64_t>(k));
        CVec w(topo.num_antennas);
        for (int a = 0; a < topo.num_antennas; ++a) w[a] = rng.cgaussian_unit();
        W.w[static_cast<size_t>(k)] = w;
    }
    return W;
}

}  // namespace dynbf::testutil
