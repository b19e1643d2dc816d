#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dynbf/model.hpp"

namespace dynbf {

// One scenario: layout, QoS targets, and a channel realization.
struct Instance {
    Topology topo;
    QosSpec qos;
    ChannelSet H;
};

// Flat text format, '#' comments, 1-based indices in the file. Doubles are
// written with 17 significant digits so read(write(x)) is bit-exact.
//
//   B 2
//   K 4
//   NT 4
//   assign 1 1 2 2
//   gamma 10 10 10 10
//   sigma2 10 10 10 10
//   channel <m> <k> <re im>*NT     (one line per (m, k) pair)
//
// A channel track appends "steps N" to the header and stores N channel blocks,
// each introduced by "step i". An instance file is the steps == 1 special case
// without those markers.
void write_instance(std::ostream& os, const Instance& inst);
void write_instance_file(const std::string& path, const Instance& inst);
Instance read_instance(std::istream& is);
Instance read_instance_file(const std::string& path);

void write_track_file(const std::string& path, const Topology& topo, const QosSpec& q,
                      const std::vector<ChannelSet>& steps);
struct TrackFile {
    Topology topo;
    QosSpec qos;
    std::vector<ChannelSet> steps;
};
TrackFile read_track_file(const std::string& path);

}  // namespace dynbf
