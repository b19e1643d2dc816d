#include "dynbf/tracks.hpp"

#include <cmath>
#include <string>

#include "dynbf/duality.hpp"

namespace dynbf {

namespace {

constexpr std::uint64_t kInitTag = 0x696e6974;  // initial-draw stream
constexpr std::uint64_t kStepTag = 0x73746570;  // per-step innovation streams

ChannelSet draw_set(const Topology& topo, RngStream& rng) {
    ChannelSet H = make_channel_set(topo);
    for (int m = 0; m < topo.num_bs; ++m)
        for (int k = 0; k < topo.num_users; ++k)
            for (int a = 0; a < topo.num_antennas; ++a) H.at(m, k)[a] = rng.cgaussian_unit();
    return H;
}

void check_config(const TrackConfig& cfg) {
    if (!(cfg.zeta >= 0.0 && cfg.zeta <= 1.0))
        throw TrackError("track config: zeta must lie in [0, 1]");
    if (cfg.length < 1) throw TrackError("track config: length must be >= 1");
    if (cfg.max_rejections < 1) throw TrackError("track config: max_rejections must be >= 1");
    if (cfg.q.gamma.size() != cfg.topo.num_users)
        throw TrackError("track config: QoS size does not match the topology");
}

}  // namespace

ChannelSet sample_initial(const Topology& topo, std::uint64_t seed) {
    RngStream rng(seed, kInitTag);
    return draw_set(topo, rng);
}

ChannelSet step_channel(const ChannelSet& H_prev, const TrackConfig& cfg, RngStream& rng) {
    check_config(cfg);
    const double wi = std::sqrt(cfg.zeta);
    const double wp = std::sqrt(1.0 - cfg.zeta);
    for (int attempt = 0; attempt <= cfg.max_rejections; ++attempt) {
        ChannelSet inn = draw_set(cfg.topo, rng);
        ChannelSet H = make_channel_set(cfg.topo);
        for (int m = 0; m < cfg.topo.num_bs; ++m)
            for (int k = 0; k < cfg.topo.num_users; ++k)
                H.at(m, k) = wi * inn.at(m, k) + wp * H_prev.at(m, k);
        if (is_feasible(H, cfg.topo, cfg.q)) return H;
    }
    throw TrackError("channel step: " + std::to_string(cfg.max_rejections) +
                     " redraws in a row were infeasible; the targets are too tight for this "
                     "layout");
}

std::vector<ChannelSet> generate_track(const TrackConfig& cfg) {
    check_config(cfg);
    std::vector<ChannelSet> out;
    out.reserve(static_cast<size_t>(cfg.length));

    RngStream init_rng(cfg.seed, kInitTag);
    ChannelSet H = draw_set(cfg.topo, init_rng);
    int redraws = 0;
    while (!is_feasible(H, cfg.topo, cfg.q)) {
        if (++redraws > cfg.max_rejections)
            throw TrackError("initial channel: " + std::to_string(cfg.max_rejections) +
                             " redraws in a row were infeasible; the targets are too tight "
                             "for this layout");
        H = draw_set(cfg.topo, init_rng);
    }
    out.push_back(std::move(H));

    for (int i = 1; i < cfg.length; ++i) {
        RngStream rng(cfg.seed, kStepTag, static_cast<std::uint64_t>(i));
        out.push_back(step_channel(out.back(), cfg, rng));
    }
    return out;
}

}  // namespace dynbf
