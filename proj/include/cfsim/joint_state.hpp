#pragma once

#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "circuit.hpp"
#include "eps_poly.hpp"

namespace cfsim {

/// Photon location: either a live path segment or a named terminal outcome
/// (detector click, shutter absorption, declared open exit).
struct Loc {
    enum Kind : int { Segment = 0, Terminal = 1 };
    int kind = Segment;
    int idx = kNoSegment;

    static Loc segment(SegmentId s) { return {Segment, s}; }
    static Loc terminal(int t) { return {Terminal, t}; }

    friend bool operator<(const Loc& a, const Loc& b) {
        return std::tie(a.kind, a.idx) < std::tie(b.kind, b.idx);
    }
    friend bool operator==(const Loc& a, const Loc& b) {
        return a.kind == b.kind && a.idx == b.idx;
    }
};

/// Excited-channel set: sorted segment ids, |set| <= max_order.
using ExcitedSet = std::vector<SegmentId>;

inline ExcitedSet with_channel(const ExcitedSet& s, SegmentId ch) {
    ExcitedSet out;
    out.reserve(s.size() + 1);
    bool inserted = false;
    for (auto x : s) {
        if (!inserted && ch < x) {
            out.push_back(ch);
            inserted = true;
        }
        out.push_back(x);
    }
    if (!inserted) out.push_back(ch);
    return out;
}

inline bool contains_channel(const ExcitedSet& s, SegmentId ch) {
    for (auto x : s)
        if (x == ch) return true;
    return false;
}

struct TermKey {
    Loc loc;
    ExcitedSet excited;

    friend bool operator<(const TermKey& a, const TermKey& b) {
        if (a.loc < b.loc) return true;
        if (b.loc < a.loc) return false;
        return a.excited < b.excited;
    }
};

/// Sparse superposition over (location, excited channel set) with
/// eps-polynomial amplitudes. Immutable value semantics; terms whose
/// amplitude underflows to zero are dropped.
struct JointState {
    int max_order = 2;
    std::map<TermKey, EpsPoly> terms;
    std::vector<std::string> terminal_names;  // Loc::Terminal idx -> name
    std::map<std::string, int> terminal_index_;
    bool truncation_overflow = false;  // a generated term needed degree > max_order

    int terminal_index(const std::string& name) const {
        auto it = terminal_index_.find(name);
        return it == terminal_index_.end() ? -1 : it->second;
    }

    int intern_terminal(const std::string& name) {
        int i = terminal_index(name);
        if (i >= 0) return i;
        terminal_names.push_back(name);
        i = static_cast<int>(terminal_names.size()) - 1;
        terminal_index_.emplace(name, i);
        return i;
    }

    void add(const TermKey& k, const EpsPoly& p) {
        if (p.empty()) return;
        auto it = terms.find(k);
        if (it == terms.end()) {
            terms.emplace(k, p);
        } else {
            it->second += p;
            if (it->second.empty()) terms.erase(it);
        }
    }

    /// Restrict to one terminal; the returned state is keyed by excited sets
    /// on that terminal (unnormalized conditional environment state).
    JointState restrict_to_terminal(int t) const {
        JointState out;
        out.max_order = max_order;
        out.terminal_names = terminal_names;
        out.terminal_index_ = terminal_index_;
        out.truncation_overflow = truncation_overflow;
        auto it = terms.lower_bound(TermKey{Loc::terminal(t), {}});
        for (; it != terms.end() && it->first.loc == Loc::terminal(t); ++it)
            out.terms.emplace(it->first, it->second);
        return out;
    }

    /// |amplitude|^2 summed over all terms at one terminal, as a polynomial
    /// (probabilities tracked to the same truncation order).
    EpsPoly terminal_probability(int t) const {
        EpsPoly prob(max_order);
        auto it = terms.lower_bound(TermKey{Loc::terminal(t), {}});
        for (; it != terms.end() && it->first.loc == Loc::terminal(t); ++it)
            prob += it->second.conj() * it->second;
        return prob;
    }

    /// One pass over all terms: probability polynomial per terminal name.
    std::map<std::string, EpsPoly> all_terminal_probabilities() const {
        std::map<std::string, EpsPoly> out;
        for (const auto& name : terminal_names) out.emplace(name, EpsPoly(max_order));
        for (const auto& [k, p] : terms) {
            if (k.loc.kind != Loc::Terminal) continue;
            out.at(terminal_names.at(static_cast<size_t>(k.loc.idx))) += p.conj() * p;
        }
        return out;
    }

    /// Sum of terminal probabilities over every outcome (norm check).
    EpsPoly total_terminal_probability() const {
        EpsPoly prob(max_order);
        for (const auto& [k, p] : terms) {
            if (k.loc.kind == Loc::Terminal) prob += p.conj() * p;
        }
        return prob;
    }

    /// True when every tracked amplitude at the terminal vanishes at every
    /// degree (an exact dark port, as opposed to a numerically small one).
    bool terminal_is_dark(int t, double tol = kAmpTol) const {
        auto it = terms.lower_bound(TermKey{Loc::terminal(t), {}});
        for (; it != terms.end() && it->first.loc == Loc::terminal(t); ++it)
            if (!it->second.is_zero(tol)) return false;
        return true;
    }
};

}  // namespace cfsim
