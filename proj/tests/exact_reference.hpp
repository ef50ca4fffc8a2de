#pragma once

// Test-only oracle: propagates the photon plus explicit two-state channel
// environments with exact numeric amplitudes (eta = sqrt(1 - eps^2), no
// truncation). Channels are tracked as a bitmask of excited environments,
// so circuits up to 12 channels stay comfortably small. Deliberately
// independent of the EpsPoly/JointState machinery it cross-checks: plain
// complex arithmetic, its own element walk.

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

#include "cfsim/circuit.hpp"

namespace exact_ref {

using cfsim::Circuit;
using cfsim::ElementKind;
using cfsim::kNoSegment;
using cfsim::SegmentId;
using Complex = std::complex<double>;

struct Key {
    int loc_kind;  // 0 segment, 1 terminal
    int loc;       // segment id or terminal index
    std::uint32_t excited;  // bitmask over channel list

    friend bool operator<(const Key& a, const Key& b) {
        if (a.loc_kind != b.loc_kind) return a.loc_kind < b.loc_kind;
        if (a.loc != b.loc) return a.loc < b.loc;
        return a.excited < b.excited;
    }
};

struct ExactState {
    std::map<Key, Complex> amps;
    std::vector<std::string> terminals;
    std::map<SegmentId, int> channel_bit;  // channel segment -> bit position

    int terminal_index(const std::string& n) const {
        for (size_t i = 0; i < terminals.size(); ++i)
            if (terminals[i] == n) return (int)i;
        return -1;
    }
};

inline ExactState propagate_exact(const Circuit& c, double eps) {
    ExactState st;
    int bit = 0;
    for (const auto& s : c.segments) {
        if (s.channel_enabled) {
            if (bit >= 31) throw std::runtime_error("exact oracle supports <= 31 channels");
            st.channel_bit[s.id] = bit++;
        }
    }
    const double eta = std::sqrt(1.0 - eps * eps);

    auto intern = [&](const std::string& n) {
        int i = st.terminal_index(n);
        if (i >= 0) return i;
        st.terminals.push_back(n);
        return (int)st.terminals.size() - 1;
    };
    auto take = [&](SegmentId seg) {
        std::map<std::uint32_t, Complex> out;
        if (seg == kNoSegment) return out;
        auto it = st.amps.lower_bound(Key{0, seg, 0});
        while (it != st.amps.end() && it->first.loc_kind == 0 && it->first.loc == seg) {
            out[it->first.excited] += it->second;
            it = st.amps.erase(it);
        }
        return out;
    };
    auto put_seg = [&](SegmentId seg, const std::map<std::uint32_t, Complex>& src, Complex w) {
        if (seg == kNoSegment || std::abs(w) == 0.0) return;
        // coupling at production when the segment is a channel
        auto ch = st.channel_bit.find(seg);
        for (const auto& [mask, a] : src) {
            Complex amp = a * w;
            if (ch == st.channel_bit.end()) {
                st.amps[Key{0, seg, mask}] += amp;
            } else {
                std::uint32_t b = 1u << ch->second;
                if (mask & b) throw std::logic_error("exact oracle: channel revisit");
                st.amps[Key{0, seg, mask}] += amp * eta;
                if (eps != 0.0) st.amps[Key{0, seg, mask | b}] += amp * eps;
            }
        }
    };
    auto put_term = [&](const std::string& name, const std::map<std::uint32_t, Complex>& src) {
        int t = intern(name);
        for (const auto& [mask, a] : src) st.amps[Key{1, t, mask}] += a;
    };

    for (const auto& e : c.elements) {
        const double g = 1.0 - e.defect;
        switch (e.kind) {
            case ElementKind::Source: {
                std::map<std::uint32_t, Complex> unit{{0u, Complex(1, 0)}};
                put_seg(e.outputs[0], unit, Complex(g, 0));
                break;
            }
            case ElementKind::BeamSplitter: {
                auto i0 = take(e.inputs[0]);
                auto i1 = take(e.inputs[1]);
                const double ct = std::cos(e.theta), sn = std::sin(e.theta);
                std::map<std::uint32_t, Complex> o0, o1;
                for (const auto& [m, a] : i0) {
                    o0[m] += a * ct;
                    o1[m] += a * sn;
                }
                for (const auto& [m, a] : i1) {
                    o0[m] += a * -sn;
                    o1[m] += a * ct;
                }
                put_seg(e.outputs[0], o0, Complex(g, 0));
                put_seg(e.outputs[1], o1, Complex(g, 0));
                break;
            }
            case ElementKind::Mirror:
                put_seg(e.outputs[0], take(e.inputs[0]), Complex(g, 0));
                break;
            case ElementKind::DoubleSidedMirror:
                put_seg(e.outputs[0], take(e.inputs[0]), Complex(g, 0));
                put_seg(e.outputs[1], take(e.inputs[1]), Complex(g, 0));
                break;
            case ElementKind::PhaseShift:
                put_seg(e.outputs[0], take(e.inputs[0]), std::polar(g, e.phi));
                break;
            case ElementKind::Shutter:
                put_term(e.name.empty() ? "absorbed" : e.name, take(e.inputs[0]));
                break;
            case ElementKind::Detector:
                put_term(e.name, take(e.inputs[0]));
                break;
        }
    }
    for (auto seg : c.declared_open) put_term("open:" + c.segment(seg).label, take(seg));
    return st;
}

/// Amplitude at (terminal, excited set given as sorted segment ids).
inline Complex terminal_amplitude(const ExactState& st, const std::string& terminal,
                                  const std::vector<SegmentId>& excited) {
    int t = st.terminal_index(terminal);
    if (t < 0) return {0, 0};
    std::uint32_t mask = 0;
    for (auto s : excited) mask |= 1u << st.channel_bit.at(s);
    auto it = st.amps.find(Key{1, t, mask});
    return it == st.amps.end() ? Complex(0, 0) : it->second;
}

inline double terminal_probability(const ExactState& st, const std::string& terminal) {
    int t = st.terminal_index(terminal);
    if (t < 0) return 0.0;
    double p = 0;
    auto it = st.amps.lower_bound(Key{1, t, 0});
    while (it != st.amps.end() && it->first.loc_kind == 1 && it->first.loc == t) {
        p += std::norm(it->second);
        ++it;
    }
    return p;
}

}  // namespace exact_ref
