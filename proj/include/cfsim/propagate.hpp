#pragma once

#include <cmath>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>

#include "circuit.hpp"
#include "joint_state.hpp"
#include "trace.hpp"

namespace cfsim {

struct PropagateOptions {
    int max_order = 2;
    /// Channels to couple. Empty optional = all enabled channels; an explicit
    /// empty set disables coupling (pure eps = 0 amplitude propagation).
    std::optional<std::set<SegmentId>> coupling_on;
    /// When set, records truncation overflow on the state (always recorded;
    /// strict mode turns it into an error at the call site).
    bool strict = false;
    /// Global per-element amplitude defect applied on top of per-element ones.
    double defect = 0.0;
};

namespace detail {

inline void scatter(JointState& state, const std::map<TermKey, EpsPoly>& picked,
                    const Loc& dst, Complex weight) {
    if (std::abs(weight) == 0.0) return;
    for (const auto& [k, p] : picked) {
        state.add(TermKey{dst, k.excited}, p.scaled(weight));
    }
}

/// Remove and return all terms located on `seg`. Terms of one location are
/// contiguous in the ordered map, so this is a ranged extraction.
inline std::map<TermKey, EpsPoly> take_segment(JointState& state, SegmentId seg) {
    std::map<TermKey, EpsPoly> out;
    if (seg == kNoSegment) return out;
    auto it = state.terms.lower_bound(TermKey{Loc::segment(seg), {}});
    while (it != state.terms.end() && it->first.loc == Loc::segment(seg)) {
        out.emplace(it->first, std::move(it->second));
        it = state.terms.erase(it);
    }
    return out;
}

}  // namespace detail

/// Propagate the photon-plus-environment joint state through the circuit.
/// Elements are applied in order; amplitude landing on a coupled channel
/// segment is split by the Eq.-style map (eta stay / eps excite) at once.
/// The returned state lives entirely on terminal outcomes.
inline JointState propagate(const Circuit& c, const PropagateOptions& opt = {}) {
    {
        ValidationResult v = validate_circuit(c);
        if (!v.ok()) throw std::invalid_argument("invalid circuit: " + v.summary());
    }

    std::set<SegmentId> coupled;
    if (opt.coupling_on.has_value()) {
        coupled = *opt.coupling_on;
        for (auto s : coupled) {
            if (s < 0 || static_cast<size_t>(s) >= c.segments.size() || !c.segment(s).channel_enabled)
                throw std::invalid_argument("coupling_on references a non-channel segment");
        }
    } else {
        for (const auto& s : c.segments)
            if (s.channel_enabled) coupled.insert(s.id);
    }

    JointState state;
    state.max_order = opt.max_order;

    auto deposit = [&](SegmentId seg, const std::map<TermKey, EpsPoly>& src, Complex w) {
        if (seg == kNoSegment || std::abs(w) == 0.0) return;
        detail::scatter(state, src, Loc::segment(seg), w);
        if (coupled.count(seg)) couple(state, seg);
    };

    for (const auto& e : c.elements) {
        const double gain = (1.0 - e.defect) * (1.0 - opt.defect);
        switch (e.kind) {
            case ElementKind::Source: {
                std::map<TermKey, EpsPoly> unit;
                unit.emplace(TermKey{Loc::segment(e.outputs[0]), {}},
                             EpsPoly::constant(Complex(1, 0), opt.max_order));
                // Seed directly, then apply coupling if the source segment is a channel.
                for (const auto& [k, p] : unit) state.add(k, p.scaled(gain));
                if (coupled.count(e.outputs[0])) couple(state, e.outputs[0]);
                break;
            }
            case ElementKind::BeamSplitter: {
                auto in0 = detail::take_segment(state, e.inputs[0]);
                auto in1 = detail::take_segment(state, e.inputs[1]);
                const double cth = std::cos(e.theta), sth = std::sin(e.theta);
                // o0 = c i0 - s i1 ; o1 = s i0 + c i1
                std::map<TermKey, EpsPoly> out0, out1;
                auto mix = [&](const std::map<TermKey, EpsPoly>& src, double w0, double w1) {
                    for (const auto& [k, p] : src) {
                        if (w0 != 0.0) {
                            TermKey k0{Loc::segment(kNoSegment), k.excited};
                            auto it = out0.find(k0);
                            if (it == out0.end()) out0.emplace(k0, p.scaled(w0 * gain));
                            else it->second += p.scaled(w0 * gain);
                        }
                        if (w1 != 0.0) {
                            TermKey k1{Loc::segment(kNoSegment), k.excited};
                            auto it = out1.find(k1);
                            if (it == out1.end()) out1.emplace(k1, p.scaled(w1 * gain));
                            else it->second += p.scaled(w1 * gain);
                        }
                    }
                };
                mix(in0, cth, sth);
                mix(in1, -sth, cth);
                deposit(e.outputs[0], out0, Complex(1, 0));
                deposit(e.outputs[1], out1, Complex(1, 0));
                break;
            }
            case ElementKind::Mirror: {
                auto in = detail::take_segment(state, e.inputs[0]);
                deposit(e.outputs[0], in, Complex(gain, 0));
                break;
            }
            case ElementKind::DoubleSidedMirror: {
                auto in0 = detail::take_segment(state, e.inputs[0]);
                auto in1 = detail::take_segment(state, e.inputs[1]);
                deposit(e.outputs[0], in0, Complex(gain, 0));
                deposit(e.outputs[1], in1, Complex(gain, 0));
                break;
            }
            case ElementKind::PhaseShift: {
                auto in = detail::take_segment(state, e.inputs[0]);
                deposit(e.outputs[0], in, std::polar(gain, e.phi));
                break;
            }
            case ElementKind::Shutter: {
                auto in = detail::take_segment(state, e.inputs[0]);
                std::string name = e.name.empty() ? "absorbed" : e.name;
                int t = state.intern_terminal(name);
                detail::scatter(state, in, Loc::terminal(t), Complex(1, 0));
                break;
            }
            case ElementKind::Detector: {
                auto in = detail::take_segment(state, e.inputs[0]);
                int t = state.intern_terminal(e.name);
                detail::scatter(state, in, Loc::terminal(t), Complex(1, 0));
                break;
            }
        }
    }

    // Route declared open exits to named terminals.
    for (auto seg : c.declared_open) {
        auto in = detail::take_segment(state, seg);
        if (in.empty()) continue;
        int t = state.intern_terminal("open:" + c.segment(seg).label);
        detail::scatter(state, in, Loc::terminal(t), Complex(1, 0));
    }

    for (const auto& [k, p] : state.terms) {
        if (k.loc.kind == Loc::Segment)
            throw std::logic_error("propagate: amplitude stranded on segment '" +
                                   c.segment(k.loc.idx).label + "'");
    }

    if (opt.strict && state.truncation_overflow)
        throw std::runtime_error("propagate: truncation overflow (term needed degree > max_order)");

    return state;
}

struct Postselected {
    JointState conditional;   // unnormalized environment state at the outcome
    EpsPoly probability;      // outcome probability as a polynomial in eps
    bool dark = false;        // amplitude identically zero at every tracked order
};

/// Condition on one terminal outcome. No normalization is applied; the
/// paper-style leading-order comparisons are made on unnormalized amplitudes.
inline Postselected postselect(const JointState& state, const std::string& outcome) {
    int t = state.terminal_index(outcome);
    if (t < 0) throw std::invalid_argument("postselect: unknown outcome '" + outcome + "'");
    Postselected out;
    out.conditional = state.restrict_to_terminal(t);
    out.probability = state.terminal_probability(t);
    out.dark = state.terminal_is_dark(t);
    return out;
}

}  // namespace cfsim
