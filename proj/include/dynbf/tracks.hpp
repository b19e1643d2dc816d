#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "dynbf/model.hpp"
#include "dynbf/rng.hpp"

namespace dynbf {

struct TrackError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TrackConfig {
    Topology topo;
    QosSpec q;
    double zeta = 0.01;  // innovation weight in [0, 1]
    int length = 50;     // number of channel steps, >= 1
    std::uint64_t seed = 0;
    int max_rejections = 100;  // cap on infeasible redraws per step
};

// Fresh channel set, every entry a unit-variance circular complex Gaussian
// (variance 1/2 per real component). Deterministic per seed.
ChannelSet sample_initial(const Topology& topo, std::uint64_t seed);

// Autoregressive update sqrt(zeta) * innovation + sqrt(1 - zeta) * previous,
// which preserves the unit second moment. An update that lands on a channel
// failing the service targets is discarded and only the innovation is redrawn,
// from the same stream, up to cfg.max_rejections times.
ChannelSet step_channel(const ChannelSet& H_prev, const TrackConfig& cfg, RngStream& rng);

// Channel sequence of cfg.length sets, every one of them feasible, fully
// determined by cfg.seed. The initial set is resampled until feasible; each
// later step draws from its own per-step stream.
std::vector<ChannelSet> generate_track(const TrackConfig& cfg);

}  // namespace dynbf
