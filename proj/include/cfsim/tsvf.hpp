#pragma once

#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "circuit.hpp"
#include "eps_poly.hpp"

namespace cfsim {

/// Forward and backward amplitudes plus weak values on one cut.
/// Convention: forward_amp(s) = <s|psi>, backward_amp(s) = <phi|s> (bra
/// components, transpose evolution, no conjugation), so
/// <phi|P_s|psi> = backward_amp(s) * forward_amp(s).
struct TwoStateRow {
    SegmentId segment = kNoSegment;
    std::string label;
    Complex forward{0, 0};
    Complex backward{0, 0};
    Complex weak_value{0, 0};
    bool weak_defined = false;
};

struct TwoStateCut {
    std::string cut;
    std::vector<TwoStateRow> rows;
    Complex overlap{0, 0};  // <phi|psi>, the post-selection amplitude
    bool postselection_possible = false;
};

struct ScalarState {
    std::map<SegmentId, Complex> seg;        // amplitude captured at production
    std::map<std::string, Complex> terminal;  // amplitude at each terminal
};

/// eps = 0 photon amplitudes (environment decoupled) on every segment.
inline ScalarState forward_amplitudes(const Circuit& c, double global_defect = 0.0) {
    {
        ValidationResult v = validate_circuit(c);
        if (!v.ok()) throw std::invalid_argument("invalid circuit: " + v.summary());
    }
    ScalarState st;
    auto amp = [&](SegmentId s) -> Complex {
        if (s == kNoSegment) return {0, 0};
        auto it = st.seg.find(s);
        return it == st.seg.end() ? Complex(0, 0) : it->second;
    };
    for (const auto& e : c.elements) {
        const double gain = (1.0 - e.defect) * (1.0 - global_defect);
        switch (e.kind) {
            case ElementKind::Source:
                st.seg[e.outputs[0]] = Complex(gain, 0);
                break;
            case ElementKind::BeamSplitter: {
                const double cth = std::cos(e.theta), sth = std::sin(e.theta);
                Complex i0 = amp(e.inputs[0]), i1 = amp(e.inputs[1]);
                st.seg[e.outputs[0]] = gain * (cth * i0 - sth * i1);
                st.seg[e.outputs[1]] = gain * (sth * i0 + cth * i1);
                break;
            }
            case ElementKind::Mirror:
                st.seg[e.outputs[0]] = gain * amp(e.inputs[0]);
                break;
            case ElementKind::DoubleSidedMirror:
                st.seg[e.outputs[0]] = gain * amp(e.inputs[0]);
                st.seg[e.outputs[1]] = gain * amp(e.inputs[1]);
                break;
            case ElementKind::PhaseShift:
                st.seg[e.outputs[0]] = std::polar(gain, e.phi) * amp(e.inputs[0]);
                break;
            case ElementKind::Shutter:
                st.terminal[e.name.empty() ? "absorbed" : e.name] += amp(e.inputs[0]);
                break;
            case ElementKind::Detector:
                st.terminal[e.name] += amp(e.inputs[0]);
                break;
        }
    }
    for (auto seg : c.declared_open) st.terminal["open:" + c.segment(seg).label] += amp(seg);
    return st;
}

/// Bra components <phi|s| for the detector-anchored state, via transpose
/// evolution in reverse element order. backward(s) equals the s -> detector
/// propagator; a shutter passes nothing backward (its outcome is not the
/// chosen detector), which realizes the shutter-as-projector convention.
inline std::map<SegmentId, Complex> backward_amplitudes(const Circuit& c,
                                                        const std::string& detector,
                                                        double global_defect = 0.0) {
    {
        ValidationResult v = validate_circuit(c);
        if (!v.ok()) throw std::invalid_argument("invalid circuit: " + v.summary());
    }
    bool found = false;
    std::map<SegmentId, Complex> bwd;
    auto get = [&](SegmentId s) -> Complex {
        if (s == kNoSegment) return {0, 0};
        auto it = bwd.find(s);
        return it == bwd.end() ? Complex(0, 0) : it->second;
    };
    for (auto it = c.elements.rbegin(); it != c.elements.rend(); ++it) {
        const auto& e = *it;
        const double gain = (1.0 - e.defect) * (1.0 - global_defect);
        switch (e.kind) {
            case ElementKind::Detector:
                if (e.name == detector) {
                    bwd[e.inputs[0]] = Complex(1, 0);
                    found = true;
                }
                break;
            case ElementKind::Shutter:
                // absorbed outcome is orthogonal to the detector bra
                break;
            case ElementKind::BeamSplitter: {
                const double cth = std::cos(e.theta), sth = std::sin(e.theta);
                Complex o0 = get(e.outputs[0]), o1 = get(e.outputs[1]);
                // transpose of [[c,-s],[s,c]]
                if (e.inputs[0] != kNoSegment) bwd[e.inputs[0]] = gain * (cth * o0 + sth * o1);
                if (e.inputs[1] != kNoSegment) bwd[e.inputs[1]] = gain * (-sth * o0 + cth * o1);
                break;
            }
            case ElementKind::Mirror:
                bwd[e.inputs[0]] = gain * get(e.outputs[0]);
                break;
            case ElementKind::DoubleSidedMirror:
                if (e.inputs[0] != kNoSegment) bwd[e.inputs[0]] = gain * get(e.outputs[0]);
                if (e.inputs[1] != kNoSegment) bwd[e.inputs[1]] = gain * get(e.outputs[1]);
                break;
            case ElementKind::PhaseShift:
                bwd[e.inputs[0]] = std::polar(gain, e.phi) * get(e.outputs[0]);
                break;
            case ElementKind::Source:
                break;
        }
    }
    if (!found) throw std::invalid_argument("backward_amplitudes: unknown detector '" + detector + "'");
    return bwd;
}

/// Forward amplitudes restricted to one declared cut.
inline std::map<SegmentId, Complex> forward_state(const Circuit& c, const std::string& cut_name) {
    const Cut* cut = c.find_cut(cut_name);
    if (!cut) throw std::invalid_argument("unknown cut '" + cut_name + "'");
    ScalarState st = forward_amplitudes(c);
    std::map<SegmentId, Complex> out;
    for (auto s : cut->segments) out[s] = st.seg.count(s) ? st.seg[s] : Complex(0, 0);
    return out;
}

/// Backward (bra) amplitudes restricted to one declared cut.
inline std::map<SegmentId, Complex> backward_state(const Circuit& c, const std::string& detector,
                                                   const std::string& cut_name) {
    const Cut* cut = c.find_cut(cut_name);
    if (!cut) throw std::invalid_argument("unknown cut '" + cut_name + "'");
    auto bwd = backward_amplitudes(c, detector);
    std::map<SegmentId, Complex> out;
    for (auto s : cut->segments) out[s] = bwd.count(s) ? bwd[s] : Complex(0, 0);
    return out;
}

/// Weak values of the path projectors on every declared cut for the given
/// post-selection. Weak values are flagged undefined when <phi|psi> = 0.
inline std::vector<TwoStateCut> overlap_map(const Circuit& c, const std::string& detector) {
    ScalarState fwd = forward_amplitudes(c);
    auto bwd = backward_amplitudes(c, detector);
    Complex overlap = fwd.terminal.count(detector) ? fwd.terminal[detector] : Complex(0, 0);
    const bool defined = std::abs(overlap) > kAmpTol;

    std::vector<TwoStateCut> cuts;
    for (const auto& cut : c.cuts) {
        TwoStateCut tc;
        tc.cut = cut.name;
        tc.overlap = overlap;
        tc.postselection_possible = defined;
        for (auto s : cut.segments) {
            TwoStateRow row;
            row.segment = s;
            row.label = c.segment(s).label;
            row.forward = fwd.seg.count(s) ? fwd.seg[s] : Complex(0, 0);
            row.backward = bwd.count(s) ? bwd[s] : Complex(0, 0);
            if (defined) {
                row.weak_value = row.backward * row.forward / overlap;
                row.weak_defined = true;
            }
            tc.rows.push_back(row);
        }
        cuts.push_back(std::move(tc));
    }
    return cuts;
}

/// Reverse a shutter-free circuit: the chosen detector becomes the source,
/// the source becomes detector "rev_source", every element is transposed and
/// the element order flipped. Other detectors and declared open exits become
/// vacuum input ports. forward_amplitudes of the result reproduces
/// backward_amplitudes of the original (same transpose convention).
inline Circuit reverse_circuit(const Circuit& c, const std::string& detector) {
    for (const auto& e : c.elements)
        if (e.kind == ElementKind::Shutter)
            throw std::invalid_argument("reverse_circuit: shutter is not reversible");

    std::set<SegmentId> dead;  // segments that become vacuum in the reversed circuit
    for (const auto& e : c.elements)
        if (e.kind == ElementKind::Detector && e.name != detector) dead.insert(e.inputs[0]);
    for (auto s : c.declared_open) dead.insert(s);

    Circuit r;
    std::map<SegmentId, SegmentId> remap;
    for (const auto& s : c.segments) {
        if (dead.count(s.id)) continue;
        remap[s.id] = r.add_segment(s.label, s.channel_enabled);
    }
    auto mapped = [&](SegmentId s) -> SegmentId {
        if (s == kNoSegment || dead.count(s)) return kNoSegment;
        return remap.at(s);
    };

    for (auto it = c.elements.rbegin(); it != c.elements.rend(); ++it) {
        const auto& e = *it;
        OpticalElement n;
        n.defect = e.defect;
        switch (e.kind) {
            case ElementKind::Detector:
                if (e.name != detector) continue;  // vacuum port
                n.kind = ElementKind::Source;
                n.outputs = {mapped(e.inputs[0])};
                break;
            case ElementKind::Source:
                n.kind = ElementKind::Detector;
                n.name = "rev_source";
                n.inputs = {mapped(e.outputs[0])};
                break;
            case ElementKind::BeamSplitter:
                n.kind = ElementKind::BeamSplitter;
                n.theta = -e.theta;  // transpose of the rotation
                n.inputs = {mapped(e.outputs[0]), mapped(e.outputs[1])};
                n.outputs = {mapped(e.inputs[0]), mapped(e.inputs[1])};
                break;
            case ElementKind::Mirror:
                n.kind = ElementKind::Mirror;
                n.inputs = {mapped(e.outputs[0])};
                n.outputs = {mapped(e.inputs[0])};
                break;
            case ElementKind::DoubleSidedMirror:
                n.kind = ElementKind::DoubleSidedMirror;
                n.inputs = {mapped(e.outputs[0]), mapped(e.outputs[1])};
                n.outputs = {mapped(e.inputs[0]), mapped(e.inputs[1])};
                break;
            case ElementKind::PhaseShift:
                n.kind = ElementKind::PhaseShift;
                n.phi = e.phi;  // transpose keeps the phase
                n.inputs = {mapped(e.outputs[0])};
                n.outputs = {mapped(e.inputs[0])};
                break;
            case ElementKind::Shutter:
                continue;
        }
        // Transposed elements with a vacuum output would leak amplitude;
        // reroute such ports to fresh declared-open exits.
        for (auto& s : n.outputs) {
            if (s == kNoSegment) {
                s = r.add_segment("rev_open_" + std::to_string(r.segments.size()));
                r.declared_open.insert(s);
            }
        }
        r.elements.push_back(std::move(n));
    }
    for (const auto& cut : c.cuts) {
        Cut nc;
        nc.name = cut.name;
        for (auto s : cut.segments)
            if (!dead.count(s)) nc.segments.push_back(remap.at(s));
        r.cuts.push_back(std::move(nc));
    }
    return r;
}

}  // namespace cfsim
