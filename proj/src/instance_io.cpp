#include "dynbf/instance_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace dynbf {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_scenario(std::ostream& os, const Topology& topo, const QosSpec& q) {
    os << "B " << topo.num_bs << "\n";
    os << "K " << topo.num_users << "\n";
    os << "NT " << topo.num_antennas << "\n";
    os << "assign";
    for (int k = 0; k < topo.num_users; ++k) os << ' ' << topo.serving[static_cast<size_t>(k)] + 1;
    os << "\n";
    os << "gamma";
    for (int k = 0; k < topo.num_users; ++k) os << ' ' << fmt(q.gamma[k]);
    os << "\n";
    os << "sigma2";
    for (int k = 0; k < topo.num_users; ++k) os << ' ' << fmt(q.sigma2[k]);
    os << "\n";
}

void write_channels(std::ostream& os, const ChannelSet& H) {
    for (int m = 0; m < H.num_bs; ++m)
        for (int k = 0; k < H.num_users; ++k) {
            os << "channel " << m + 1 << ' ' << k + 1;
            const CVec& h = H.at(m, k);
            for (int a = 0; a < H.num_antennas; ++a)
                os << ' ' << fmt(h[a].real()) << ' ' << fmt(h[a].imag());
            os << "\n";
        }
}

[[noreturn]] void bad(const std::string& what) {
    throw ModelError("instance file: " + what);
}

double to_double(const std::string& s) {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) bad("malformed number '" + s + "'");
    return v;
}

int to_int(const std::string& s) {
    size_t pos = 0;
    int v = std::stoi(s, &pos);
    if (pos != s.size()) bad("malformed integer '" + s + "'");
    return v;
}

struct RawFile {
    int B = 0, K = 0, NT = 0, steps = 1;
    std::vector<int> assign;
    std::vector<double> gamma, sigma2;
    // channels[step](m,k)
    std::vector<std::vector<std::vector<cxd>>> channels;
};

RawFile parse(std::istream& is) {
    RawFile raw;
    std::string line;
    int cur_step = 0;
    bool have_b = false, have_k = false, have_nt = false;
    while (std::getline(is, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ss(line);
        std::string key;
        if (!(ss >> key)) continue;
        if (key == "B") {
            if (!(ss >> raw.B)) bad("B");
            have_b = true;
        } else if (key == "K") {
            if (!(ss >> raw.K)) bad("K");
            have_k = true;
        } else if (key == "NT") {
            if (!(ss >> raw.NT)) bad("NT");
            have_nt = true;
        } else if (key == "steps") {
            if (!(ss >> raw.steps) || raw.steps < 1) bad("steps");
        } else if (key == "assign") {
            std::string tok;
            while (ss >> tok) raw.assign.push_back(to_int(tok) - 1);
        } else if (key == "gamma") {
            std::string tok;
            while (ss >> tok) raw.gamma.push_back(to_double(tok));
        } else if (key == "sigma2") {
            std::string tok;
            while (ss >> tok) raw.sigma2.push_back(to_double(tok));
        } else if (key == "step") {
            int s = 0;
            if (!(ss >> s) || s < 1) bad("step marker");
            cur_step = s - 1;
        } else if (key == "channel") {
            if (!have_b || !have_k || !have_nt) bad("channel line before header");
            int m = 0, k = 0;
            if (!(ss >> m >> k)) bad("channel indices");
            m -= 1;
            k -= 1;
            if (m < 0 || m >= raw.B || k < 0 || k >= raw.K) bad("channel index out of range");
            if (raw.channels.empty())
                raw.channels.assign(static_cast<size_t>(raw.steps),
                                    std::vector<std::vector<cxd>>(
                                        static_cast<size_t>(raw.B) * raw.K));
            if (cur_step >= raw.steps) bad("step marker out of range");
            std::vector<cxd> entries;
            std::string re, im;
            while (ss >> re) {
                if (!(ss >> im)) bad("odd number of channel values");
                entries.emplace_back(to_double(re), to_double(im));
            }
            if (static_cast<int>(entries.size()) != raw.NT) bad("channel entry count != NT");
            raw.channels[static_cast<size_t>(cur_step)]
                        [static_cast<size_t>(m) * raw.K + k] = std::move(entries);
        } else {
            bad("unknown key '" + key + "'");
        }
    }
    if (!have_b || !have_k || !have_nt) bad("missing B/K/NT");
    if (static_cast<int>(raw.assign.size()) != raw.K) bad("assign length != K");
    if (static_cast<int>(raw.gamma.size()) != raw.K) bad("gamma length != K");
    if (static_cast<int>(raw.sigma2.size()) != raw.K) bad("sigma2 length != K");
    for (const auto& step : raw.channels)
        for (const auto& h : step)
            if (h.empty()) bad("missing channel line");
    if (raw.channels.empty()) bad("no channels");
    return raw;
}

Topology raw_topology(const RawFile& raw) {
    return make_topology(raw.B, raw.K, raw.NT, raw.assign);
}

QosSpec raw_qos(const RawFile& raw) {
    QosSpec q;
    q.gamma = Eigen::Map<const Vec>(raw.gamma.data(), raw.K);
    q.sigma2 = Eigen::Map<const Vec>(raw.sigma2.data(), raw.K);
    for (int k = 0; k < raw.K; ++k)
        if (q.gamma[k] <= 0 || q.sigma2[k] <= 0) bad("gamma/sigma2 must be > 0");
    return q;
}

ChannelSet raw_channels(const RawFile& raw, const Topology& topo, int step) {
    ChannelSet H = make_channel_set(topo);
    for (int m = 0; m < raw.B; ++m)
        for (int k = 0; k < raw.K; ++k) {
            const auto& e = raw.channels[static_cast<size_t>(step)]
                                        [static_cast<size_t>(m) * raw.K + k];
            CVec h(raw.NT);
            for (int a = 0; a < raw.NT; ++a) h[a] = e[static_cast<size_t>(a)];
            H.at(m, k) = h;
        }
    return H;
}

}  // namespace

void write_instance(std::ostream& os, const Instance& inst) {
    write_scenario(os, inst.topo, inst.qos);
    write_channels(os, inst.H);
}

void write_instance_file(const std::string& path, const Instance& inst) {
    std::ofstream f(path);
    if (!f) throw ModelError("cannot open for writing: " + path);
    write_instance(f, inst);
}

Instance read_instance(std::istream& is) {
    RawFile raw = parse(is);
    Instance inst;
    inst.topo = raw_topology(raw);
    inst.qos = raw_qos(raw);
    inst.H = raw_channels(raw, inst.topo, 0);
    return inst;
}

Instance read_instance_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ModelError("cannot open: " + path);
    return read_instance(f);
}

void write_track_file(const std::string& path, const Topology& topo, const QosSpec& q,
                      const std::vector<ChannelSet>& steps) {
    std::ofstream f(path);
    if (!f) throw ModelError("cannot open for writing: " + path);
    write_scenario(f, topo, q);
    f << "steps " << steps.size() << "\n";
    for (size_t i = 0; i < steps.size(); ++i) {
        f << "step " << i + 1 << "\n";
        write_channels(f, steps[i]);
    }
}

TrackFile read_track_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ModelError("cannot open: " + path);
    RawFile raw = parse(f);
    TrackFile tf;
    tf.topo = raw_topology(raw);
    tf.qos = raw_qos(raw);
    for (int s = 0; s < raw.steps; ++s) tf.steps.push_back(raw_channels(raw, tf.topo, s));
    return tf;
}

}  // namespace dynbf
