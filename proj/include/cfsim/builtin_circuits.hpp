#pragma once

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "circuit.hpp"

namespace cfsim {

/// A built circuit plus the protocol-level metadata the runners need.
struct BuiltCircuit {
    std::string name;
    Circuit circuit;
    std::map<std::string, SegmentId> channels;   // enabled channels, label -> id
    std::vector<std::string> default_boundary;   // transmission-channel labels
    std::string postselect;                      // designated trace detector
};

namespace builders {

inline void finish_channels(BuiltCircuit& b) {
    for (const auto& s : b.circuit.segments)
        if (s.channel_enabled) b.channels[s.label] = s.id;
}

/// Fig. 1: Mach-Zehnder IFM. Two 50:50 splitters, mirrors in both arms,
/// optional shutter behind Bob's mirror. Tuned so D is dark when both paths
/// are free; with the shutter, P(D) = 1/4.
inline BuiltCircuit ifm(bool shutter, double defect = 0.0) {
    BuiltCircuit b;
    b.name = shutter ? "fig1_blocked" : "fig1_open";
    Circuit& c = b.circuit;
    SegmentId src = c.add_segment("src");
    SegmentId A = c.add_segment("A", true);
    SegmentId B = c.add_segment("B", true);
    SegmentId Am = c.add_segment("A_m");
    SegmentId Bm = c.add_segment("B_m");
    SegmentId dD = c.add_segment("to_D");
    SegmentId dDb = c.add_segment("to_Dbar");

    c.elements.push_back({ElementKind::Source, "", 0, 0, 0, {}, {src}});
    c.elements.push_back({ElementKind::BeamSplitter, "", kPi / 4, 0, defect, {src, kNoSegment}, {A, B}});
    c.elements.push_back({ElementKind::Mirror, "", 0, 0, defect, {A}, {Am}});
    c.elements.push_back({ElementKind::Mirror, "", 0, 0, defect, {B}, {Bm}});
    if (shutter) {
        c.elements.push_back({ElementKind::Shutter, "shutter_B", 0, 0, 0, {Bm}, {}});
        c.elements.push_back({ElementKind::BeamSplitter, "", kPi / 4, 0, defect, {Am, kNoSegment}, {dD, dDb}});
    } else {
        c.elements.push_back({ElementKind::BeamSplitter, "", kPi / 4, 0, defect, {Am, Bm}, {dD, dDb}});
    }
    c.elements.push_back({ElementKind::Detector, "D", 0, 0, 0, {dD}, {}});
    c.elements.push_back({ElementKind::Detector, "Dbar", 0, 0, 0, {dDb}, {}});

    c.cuts.push_back({"mid", {A, B}});
    c.cuts.push_back({"late", {Am, Bm}});
    b.default_boundary = {"B"};
    b.postselect = "D";
    finish_channels(b);
    return b;
}

/// Fig. 2: nested Mach-Zehnder. Outer splitters 1:2 (cos^2 = 1/3 toward the
/// continuing arm C), balanced inner interferometer dark toward the
/// continuation F. Midpoint state (|A>+|B>+|C>)/sqrt(3); P(D|open) = 1/9;
/// D dark when B is blocked.
inline BuiltCircuit nested_mzi(bool blocked, double defect = 0.0) {
    BuiltCircuit b;
    b.name = blocked ? "fig2_blocked" : "fig2_open";
    Circuit& c = b.circuit;
    const double th_outer = std::acos(1.0 / std::sqrt(3.0));
    SegmentId src = c.add_segment("src");
    SegmentId C = c.add_segment("C", true);
    SegmentId E = c.add_segment("E", true);
    SegmentId A = c.add_segment("A", true);
    SegmentId B = c.add_segment("B", true);
    SegmentId F = c.add_segment("F", true);
    SegmentId G = c.add_segment("G");
    SegmentId dD = c.add_segment("to_D");
    SegmentId dDb = c.add_segment("to_Dbar");

    c.elements.push_back({ElementKind::Source, "", 0, 0, 0, {}, {src}});
    c.elements.push_back({ElementKind::BeamSplitter, "", th_outer, 0, defect, {src, kNoSegment}, {C, E}});
    c.elements.push_back({ElementKind::BeamSplitter, "", kPi / 4, 0, defect, {E, kNoSegment}, {A, B}});
    if (blocked) {
        c.elements.push_back({ElementKind::Shutter, "shutter_B", 0, 0, 0, {B}, {}});
        c.elements.push_back({ElementKind::BeamSplitter, "", kPi / 4, 0, defect, {A, kNoSegment}, {F, G}});
    } else {
        c.elements.push_back({ElementKind::BeamSplitter, "", kPi / 4, 0, defect, {A, B}, {F, G}});
    }
    c.elements.push_back({ElementKind::Detector, "G", 0, 0, 0, {G}, {}});
    c.elements.push_back({ElementKind::BeamSplitter, "", th_outer, 0, defect, {C, F}, {dD, dDb}});
    c.elements.push_back({ElementKind::Detector, "D", 0, 0, 0, {dD}, {}});
    c.elements.push_back({ElementKind::Detector, "Dbar", 0, 0, 0, {dDb}, {}});

    c.cuts.push_back({"early", {C, E}});
    c.cuts.push_back({"mid", {C, A, B}});
    c.cuts.push_back({"late", {C, F}});
    b.default_boundary = {"B"};
    b.postselect = "D";
    finish_channels(b);
    return b;
}

enum class Fig3Shutters { Open, Blocked, OnlyB, OnlyBPrime };

/// Fig. 3: two Fig.-2 interferometers joined by a double-sided mirror.
/// Outer splitters 1:4 (cos^2 = 1/5), both inner interferometers balanced
/// and dark toward their continuation. D dark when B and B' are blocked;
/// P(D|open) = 1/25.
inline BuiltCircuit modified_nested(Fig3Shutters sh, double defect = 0.0) {
    BuiltCircuit b;
    switch (sh) {
        case Fig3Shutters::Open: b.name = "fig3_open"; break;
        case Fig3Shutters::Blocked: b.name = "fig3_blocked"; break;
        case Fig3Shutters::OnlyB: b.name = "fig3_only_B"; break;
        case Fig3Shutters::OnlyBPrime: b.name = "fig3_only_Bprime"; break;
    }
    const bool block_B = (sh == Fig3Shutters::Blocked || sh == Fig3Shutters::OnlyB);
    const bool block_Bp = (sh == Fig3Shutters::Blocked || sh == Fig3Shutters::OnlyBPrime);

    Circuit& c = b.circuit;
    const double th_outer = std::acos(1.0 / std::sqrt(5.0));
    SegmentId src = c.add_segment("src");
    SegmentId C = c.add_segment("C", true);
    SegmentId E = c.add_segment("E", true);
    SegmentId A = c.add_segment("A", true);
    SegmentId B = c.add_segment("B", true);
    SegmentId F = c.add_segment("F", true);
    SegmentId G = c.add_segment("G");
    SegmentId C2 = c.add_segment("C2");
    SegmentId Ep = c.add_segment("E'", true);
    SegmentId Ap = c.add_segment("A'", true);
    SegmentId Bp = c.add_segment("B'", true);
    SegmentId Fp = c.add_segment("F'", true);
    SegmentId Gp = c.add_segment("G'");
    SegmentId dD = c.add_segment("to_D");
    SegmentId dDb = c.add_segment("to_Dbar");

    c.elements.push_back({ElementKind::Source, "", 0, 0, 0, {}, {src}});
    c.elements.push_back({ElementKind::BeamSplitter, "", th_outer, 0, defect, {src, kNoSegment}, {C, E}});
    c.elements.push_back({ElementKind::BeamSplitter, "", kPi / 4, 0, defect, {E, kNoSegment}, {A, B}});
    if (block_B) {
        c.elements.push_back({ElementKind::Shutter, "shutter_B", 0, 0, 0, {B}, {}});
        c.elements.push_back({ElementKind::BeamSplitter, "", kPi / 4, 0, defect, {A, kNoSegment}, {F, G}});
    } else {
        c.elements.push_back({ElementKind::BeamSplitter, "", kPi / 4, 0, defect, {A, B}, {F, G}});
    }
    c.elements.push_back({ElementKind::Detector, "G", 0, 0, 0, {G}, {}});
    c.elements.push_back({ElementKind::DoubleSidedMirror, "", 0, 0, defect, {F, C}, {Ep, C2}});
    c.elements.push_back({ElementKind::BeamSplitter, "", kPi / 4, 0, defect, {Ep, kNoSegment}, {Ap, Bp}});
    if (block_Bp) {
        c.elements.push_back({ElementKind::Shutter, "shutter_B'", 0, 0, 0, {Bp}, {}});
        c.elements.push_back({ElementKind::BeamSplitter, "", kPi / 4, 0, defect, {Ap, kNoSegment}, {Fp, Gp}});
    } else {
        c.elements.push_back({ElementKind::BeamSplitter, "", kPi / 4, 0, defect, {Ap, Bp}, {Fp, Gp}});
    }
    c.elements.push_back({ElementKind::Detector, "G'", 0, 0, 0, {Gp}, {}});
    c.elements.push_back({ElementKind::BeamSplitter, "", th_outer, 0, defect, {C2, Fp}, {dD, dDb}});
    c.elements.push_back({ElementKind::Detector, "D", 0, 0, 0, {dD}, {}});
    c.elements.push_back({ElementKind::Detector, "Dbar", 0, 0, 0, {dDb}, {}});

    c.cuts.push_back({"early", {C, E}});
    c.cuts.push_back({"mid_upper", {C, A, B}});
    c.cuts.push_back({"mid_lower", {C2, Ap, Bp}});
    c.cuts.push_back({"late", {C2, Fp}});
    b.default_boundary = {"B", "B'"};
    b.postselect = "D";
    finish_channels(b);
    return b;
}

/// One element of the original (Fig. 4a style) chain: outer rotation
/// pi/(2N) on (alice, chain) rails, then the chain rail crosses into the
/// channel on the shutter rail w and an M-step pi/(2M) ladder swaps it onto
/// the return rail r, which rejoins the chain. Shutters in: the crossing
/// amplitude is absorbed at the entry site (exact projection per element),
/// so P(D1) = cos^{2N}(pi/(2N)). Shutters out: the ladder is an exact
/// passthrough and the rotations compose to a deterministic D2 transfer.
inline BuiltCircuit zeno_original(int N, int M, bool shutters_in, double defect = 0.0) {
    if (N < 2 || M < 2) throw std::invalid_argument("zeno chain requires N >= 2 and M >= 2");
    BuiltCircuit b;
    b.name = std::string("zeno_original_") + (shutters_in ? "blocked" : "open");
    Circuit& c = b.circuit;
    const double thN = kPi / (2.0 * N);
    const double thM = kPi / (2.0 * M);

    SegmentId alice = c.add_segment("al0");
    c.elements.push_back({ElementKind::Source, "", 0, 0, 0, {}, {alice}});
    SegmentId chain = kNoSegment;

    for (int k = 1; k <= N; ++k) {
        const std::string K = std::to_string(k);
        SegmentId al_next = c.add_segment("al" + K);
        SegmentId w = c.add_segment("w" + K + "_0", true);
        c.elements.push_back({ElementKind::BeamSplitter, "", thN, 0, defect, {alice, chain}, {al_next, w}});
        alice = al_next;

        if (shutters_in) {
            // The crossing amplitude dies at the entry site; the rest of the
            // ladder carries nothing and is not instantiated.
            c.elements.push_back({ElementKind::Shutter, "absorbed", 0, 0, 0, {w}, {}});
            chain = kNoSegment;
            c.cuts.push_back({"stage" + K, {alice}});
            continue;
        }

        SegmentId r = kNoSegment;
        for (int j = 1; j <= M; ++j) {
            const std::string J = std::to_string(j);
            SegmentId w_next = c.add_segment("w" + K + "_" + J, true);
            SegmentId r_next = c.add_segment("r" + K + "_" + J, j < M);
            c.elements.push_back({ElementKind::BeamSplitter, "", thM, 0, defect, {w, r}, {w_next, r_next}});
            w = w_next;
            r = r_next;
        }
        c.elements.push_back({ElementKind::Detector, "leak" + K, 0, 0, 0, {w}, {}});
        chain = r;
        c.cuts.push_back({"stage" + K, {alice, chain}});
    }
    c.elements.push_back({ElementKind::Detector, "D1", 0, 0, 0, {alice}, {}});
    // Structurally dark when every element absorbed the crossing amplitude.
    c.elements.push_back({ElementKind::Detector, "D2", 0, 0, 0, {chain}, {}});

    b.postselect = shutters_in ? "D1" : "D2";
    finish_channels(b);
    for (const auto& [label, id] : b.channels) b.default_boundary.push_back(label);
    return b;
}

/// One element of the modified (Fig. 4c style) chain: the chain rail enters
/// sub-chain 1 on the non-shutter rail x; the M-step ladder swaps it onto
/// the shutter rail y, so the continuation x_M is exactly dark when the
/// shutters are out. The continuation passes the double-sided mirror into
/// the mirrored sub-chain 2 with the same tuning, then rejoins the chain.
/// Shutters out: per-element exact removal of the chain rail (Zeno pinning,
/// P(D1) = cos^{2N}(pi/(2N))) and every D1-conditioned channel trace is
/// order >= 2 (a term coupled once in sub-chain 1 cannot traverse sub-chain
/// 2's dark continuation uncoupled). Shutters in: the y-projections pin the
/// crossing amplitude on x (inner Zeno), each sub-chain transmits
/// cos^M(pi/(2M)), and the chain transfers toward D2.
inline BuiltCircuit zeno_modified(int N, int M, bool shutters_in, double defect = 0.0) {
    if (N < 2 || M < 2) throw std::invalid_argument("zeno chain requires N >= 2 and M >= 2");
    BuiltCircuit b;
    b.name = std::string("zeno_modified_") + (shutters_in ? "blocked" : "open");
    Circuit& c = b.circuit;
    const double thN = kPi / (2.0 * N);
    const double thM = kPi / (2.0 * M);

    SegmentId alice = c.add_segment("al0");
    c.elements.push_back({ElementKind::Source, "", 0, 0, 0, {}, {alice}});
    SegmentId chain = kNoSegment;

    auto sub_chain = [&](const std::string& tag, int k, SegmentId entry) -> SegmentId {
        const std::string K = std::to_string(k);
        SegmentId x = entry;
        SegmentId y = kNoSegment;
        for (int j = 1; j <= M; ++j) {
            const std::string J = std::to_string(j);
            SegmentId x_next = c.add_segment(tag + K + "_x" + J, j < M || tag == "s1_");
            SegmentId y_next = c.add_segment(tag + K + "_y" + J, true);
            c.elements.push_back({ElementKind::BeamSplitter, "", thM, 0, defect, {x, y}, {x_next, y_next}});
            x = x_next;
            y = y_next;
            if (shutters_in) {
                c.elements.push_back({ElementKind::Shutter, "absorbed", 0, 0, 0, {y}, {}});
                y = kNoSegment;
            }
        }
        if (!shutters_in) {
            c.elements.push_back({ElementKind::Detector, tag + K + "_leak", 0, 0, 0, {y}, {}});
        }
        return x;  // the (dark-when-open) continuation
    };

    for (int k = 1; k <= N; ++k) {
        const std::string K = std::to_string(k);
        SegmentId al_next = c.add_segment("al" + K + "a");
        SegmentId x0 = c.add_segment("s1_" + K + "_x0", true);
        c.elements.push_back({ElementKind::BeamSplitter, "", thN, 0, defect, {alice, chain}, {al_next, x0}});

        SegmentId x1_end = sub_chain("s1_", k, x0);

        // Double-sided mirror: side 1 carries the continuation into
        // sub-chain 2, side 2 folds the Alice rail past the element.
        SegmentId x2_0 = c.add_segment("s2_" + K + "_x0", true);
        SegmentId al_mirror = c.add_segment("al" + K);
        c.elements.push_back({ElementKind::DoubleSidedMirror, "", 0, 0, defect,
                              {x1_end, al_next}, {x2_0, al_mirror}});
        alice = al_mirror;

        chain = sub_chain("s2_", k, x2_0);
        c.cuts.push_back({"stage" + K, {alice, chain}});
    }
    c.elements.push_back({ElementKind::Detector, "D1", 0, 0, 0, {alice}, {}});
    c.elements.push_back({ElementKind::Detector, "D2", 0, 0, 0, {chain}, {}});

    b.postselect = shutters_in ? "D2" : "D1";
    finish_channels(b);
    for (const auto& [label, id] : b.channels) b.default_boundary.push_back(label);
    return b;
}

}  // namespace builders

}  // namespace cfsim
