#pragma once

#include <map>
#include <stdexcept>
#include <string>

#include "joint_state.hpp"

namespace cfsim {

/// Environment coupling |chi> -> eta |chi> + eps |chi_perp| applied to every
/// term currently located on the channel's segment. The unexcited branch is
/// weighted by the eta expansion, the excited branch by one power of eps.
/// A second visit to an already-excited channel is undefined in the model
/// and raises.
inline void couple(JointState& state, SegmentId channel) {
    const EpsPoly eta = EpsPoly::eta(state.max_order);
    // Extract the contiguous run of terms sitting on the channel's segment.
    std::vector<std::pair<TermKey, EpsPoly>> picked;
    {
        auto it = state.terms.lower_bound(TermKey{Loc::segment(channel), {}});
        while (it != state.terms.end() && it->first.loc == Loc::segment(channel)) {
            picked.emplace_back(it->first, std::move(it->second));
            it = state.terms.erase(it);
        }
    }
    for (auto& [key, amp] : picked) {
        if (contains_channel(key.excited, channel))
            throw std::logic_error("couple: channel visited twice (model undefined)");

        state.add(key, amp * eta);

        if (static_cast<int>(key.excited.size()) + 1 <= state.max_order) {
            EpsPoly kick = amp;
            kick.shift_degree(1);
            state.add(TermKey{key.loc, with_channel(key.excited, channel)}, kick);
        } else if (!amp.is_zero()) {
            // Excitation would exceed the truncation degree; its leading order
            // is |excited|+1 > max_order, so dropping it is consistent, but
            // the event is recorded rather than silently ignored.
            state.truncation_overflow = true;
        }
    }
}

enum class Verdict { Present, Absent, NoTrace };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Present: return "present";
        case Verdict::Absent: return "absent";
        case Verdict::NoTrace: return "no_trace";
    }
    return "?";
}

struct ChannelTrace {
    std::string label;
    SegmentId channel = kNoSegment;
    int leading_order = -1;         // -1 encodes "none"
    Complex leading_coefficient{0, 0};  // relative to the zeroth-order all-|chi> term
    Verdict verdict = Verdict::NoTrace;
    /// Per excited-set contributions at the leading order (relative), for
    /// structure checks such as the Eq. (7)/(8) pair patterns.
    std::map<ExcitedSet, Complex> leading_terms;
};

struct TraceReport {
    std::map<std::string, ChannelTrace> channels;  // keyed by segment label
    Complex zeroth_reference{0, 0};  // eps^0 amplitude of the all-|chi> term
    bool has_reference = false;

    const ChannelTrace* find(const std::string& label) const {
        auto it = channels.find(label);
        return it == channels.end() ? nullptr : &it->second;
    }
};

struct DarkPortError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Per-channel leading eps order and coefficient of the orthogonal component
/// in a post-selected environment state, relative to the zeroth-order
/// all-|chi> term. Channels listed in `channels` (label -> id) are reported
/// even when untouched (verdict NoTrace).
inline TraceReport trace_report(const JointState& conditional,
                                const std::map<std::string, SegmentId>& channels,
                                double tol = kAmpTol) {
    bool any = false;
    for (const auto& [k, p] : conditional.terms)
        if (!p.is_zero(tol)) any = true;
    if (!any) throw DarkPortError("postselected on dark port");

    TraceReport rep;
    for (const auto& [k, p] : conditional.terms) {
        if (k.excited.empty()) {
            rep.zeroth_reference += p.coeff(0);
        }
    }
    rep.has_reference = std::abs(rep.zeroth_reference) > tol;
    const Complex ref = rep.has_reference ? rep.zeroth_reference : Complex(1, 0);

    for (const auto& [label, ch] : channels) {
        ChannelTrace t;
        t.label = label;
        t.channel = ch;
        // Distinct excited sets are orthogonal environment states, so the
        // leading order is the minimum over terms carrying this channel,
        // never an aggregate (aggregation could cancel, e.g. the Eq. (7)
        // pair terms carry opposite signs).
        int d = -1;
        for (const auto& [k, p] : conditional.terms) {
            if (!contains_channel(k.excited, ch)) continue;
            int ld = p.leading_degree(tol * std::abs(ref));
            if (ld >= 0 && (d < 0 || ld < d)) d = ld;
        }
        if (d < 0) {
            t.verdict = Verdict::NoTrace;
        } else {
            t.leading_order = d;
            t.verdict = (d == 1) ? Verdict::Present : Verdict::Absent;
            for (const auto& [k, p] : conditional.terms) {
                if (!contains_channel(k.excited, ch)) continue;
                Complex c = p.coeff(d);
                if (std::abs(c) > tol * std::abs(ref)) t.leading_terms[k.excited] += c / ref;
            }
            // Scalar coefficient: the norm of the chi_perp-carrying component
            // at the leading order, with the phase of its largest term. For a
            // single contributing term this is exactly that term's relative
            // coefficient.
            double norm2 = 0;
            Complex biggest(0, 0);
            for (const auto& [es, c] : t.leading_terms) {
                norm2 += std::norm(c);
                if (std::abs(c) > std::abs(biggest)) biggest = c;
            }
            if (std::abs(biggest) > 0) {
                t.leading_coefficient = std::sqrt(norm2) * (biggest / std::abs(biggest));
            }
        }
        rep.channels.emplace(label, std::move(t));
    }
    return rep;
}

/// Present -> true; Absent/NoTrace -> false.
inline std::map<std::string, bool> presence_verdict(const TraceReport& rep) {
    std::map<std::string, bool> out;
    for (const auto& [label, t] : rep.channels) out[label] = (t.verdict == Verdict::Present);
    return out;
}

/// A protocol is counterfactual iff no boundary channel is Present.
inline bool counterfactual_for(const TraceReport& rep, const std::vector<std::string>& boundary) {
    for (const auto& label : boundary) {
        const ChannelTrace* t = rep.find(label);
        if (t && t->verdict == Verdict::Present) return false;
    }
    return true;
}

}  // namespace cfsim
