#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace cfsim {

inline constexpr double kPi = 3.14159265358979323846;

using SegmentId = int;
inline constexpr SegmentId kNoSegment = -1;

/// A labeled spatial-temporal arm of the interferometer. Channel-enabled
/// segments carry a two-state environment that couples to a passing photon.
struct PathSegment {
    SegmentId id = kNoSegment;
    std::string label;
    bool channel_enabled = false;
};

enum class ElementKind {
    Source,
    BeamSplitter,
    Mirror,
    DoubleSidedMirror,
    Shutter,
    PhaseShift,
    Detector,
};

inline const char* to_string(ElementKind k) {
    switch (k) {
        case ElementKind::Source: return "source";
        case ElementKind::BeamSplitter: return "beam_splitter";
        case ElementKind::Mirror: return "mirror";
        case ElementKind::DoubleSidedMirror: return "double_sided_mirror";
        case ElementKind::Shutter: return "shutter";
        case ElementKind::PhaseShift: return "phase_shift";
        case ElementKind::Detector: return "detector";
    }
    return "?";
}

/// One optical element. Ports reference segments; kNoSegment marks an
/// unused input port (vacuum) or a discarded output.
///
/// BeamSplitter convention: real rotation, outputs (o0, o1) from inputs
/// (i0, i1) via o0 = cos(theta) i0 - sin(theta) i1,
///              o1 = sin(theta) i0 + cos(theta) i1.
struct OpticalElement {
    ElementKind kind = ElementKind::Mirror;
    std::string name;                  // detector/terminal name where applicable
    double theta = 0.0;                // BeamSplitter mixing angle
    double phi = 0.0;                  // PhaseShift angle
    double defect = 0.0;               // uniform amplitude defect (outputs scaled by 1-defect)
    std::vector<SegmentId> inputs;
    std::vector<SegmentId> outputs;
};

/// Named cut: a set of segments forming an antichain the photon crosses
/// exactly once on every source-to-detector path. Used by the TSVF module.
struct Cut {
    std::string name;
    std::vector<SegmentId> segments;
};

struct Circuit {
    std::vector<PathSegment> segments;       // indexed by SegmentId
    std::vector<OpticalElement> elements;    // topological (time) order
    std::vector<Cut> cuts;
    std::set<SegmentId> declared_open;       // unconsumed segments that are intentional exits

    SegmentId add_segment(std::string label, bool channel = false) {
        PathSegment s;
        s.id = static_cast<SegmentId>(segments.size());
        s.label = std::move(label);
        s.channel_enabled = channel;
        segments.push_back(s);
        return s.id;
    }

    const PathSegment& segment(SegmentId id) const { return segments.at(static_cast<size_t>(id)); }

    SegmentId find_segment(const std::string& label) const {
        for (const auto& s : segments)
            if (s.label == label) return s.id;
        return kNoSegment;
    }

    std::vector<SegmentId> channel_segments() const {
        std::vector<SegmentId> out;
        for (const auto& s : segments)
            if (s.channel_enabled) out.push_back(s.id);
        return out;
    }

    std::vector<std::string> detector_names() const {
        std::vector<std::string> names;
        for (const auto& e : elements)
            if (e.kind == ElementKind::Detector) names.push_back(e.name);
        return names;
    }

    const Cut* find_cut(const std::string& name) const {
        for (const auto& c : cuts)
            if (c.name == name) return &c;
        return nullptr;
    }
};

struct Violation {
    std::string message;
};

struct ValidationResult {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
    std::string summary() const {
        std::string s;
        for (const auto& v : violations) {
            if (!s.empty()) s += "; ";
            s += v.message;
        }
        return s;
    }
};

/// Structural validation: port arities, unique labels, single production and
/// consumption per segment, source/detector placement, element ordering
/// consistent with the segment flow (acyclicity), declared exits.
inline ValidationResult validate_circuit(const Circuit& c) {
    ValidationResult r;
    auto fail = [&](std::string m) { r.violations.push_back({std::move(m)}); };

    std::set<std::string> labels;
    for (const auto& s : c.segments) {
        if (!labels.insert(s.label).second)
            fail("duplicate segment label '" + s.label + "'");
    }

    std::map<SegmentId, int> produced, consumed;
    int sources = 0;
    std::set<std::string> detector_names;
    for (size_t idx = 0; idx < c.elements.size(); ++idx) {
        const auto& e = c.elements[idx];
        auto where = [&] { return std::string(to_string(e.kind)) + " #" + std::to_string(idx); };
        size_t want_in = 0, want_out = 0;
        switch (e.kind) {
            case ElementKind::Source: want_in = 0; want_out = 1; ++sources; break;
            case ElementKind::BeamSplitter: want_in = 2; want_out = 2; break;
            case ElementKind::Mirror: want_in = 1; want_out = 1; break;
            case ElementKind::DoubleSidedMirror: want_in = 2; want_out = 2; break;
            case ElementKind::Shutter: want_in = 1; want_out = 0; break;
            case ElementKind::PhaseShift: want_in = 1; want_out = 1; break;
            case ElementKind::Detector: want_in = 1; want_out = 0; break;
        }
        if (e.inputs.size() != want_in)
            fail(where() + ": expected " + std::to_string(want_in) + " input ports");
        if (e.outputs.size() != want_out)
            fail(where() + ": expected " + std::to_string(want_out) + " output ports");
        if (e.kind == ElementKind::Detector) {
            if (e.name.empty()) fail(where() + ": detector without a name");
            if (!detector_names.insert(e.name).second)
                fail(where() + ": duplicate detector name '" + e.name + "'");
        }
        if (e.kind == ElementKind::BeamSplitter) {
            bool any_in = false;
            for (auto s : e.inputs) any_in |= (s != kNoSegment);
            if (!any_in) fail(where() + ": beam splitter with no connected input");
        }
        for (auto s : e.inputs) {
            if (s == kNoSegment) continue;
            if (s < 0 || static_cast<size_t>(s) >= c.segments.size()) {
                fail(where() + ": input references unknown segment");
                continue;
            }
            if (++consumed[s] > 1)
                fail("segment '" + c.segment(s).label + "' consumed twice");
            if (produced.find(s) == produced.end())
                fail("segment '" + c.segment(s).label + "' consumed before production (ordering/acyclicity)");
        }
        for (auto s : e.outputs) {
            if (s == kNoSegment) {
                // Discarded outputs would silently leak probability.
                fail(where() + ": disconnected output port");
                continue;
            }
            if (s < 0 || static_cast<size_t>(s) >= c.segments.size()) {
                fail(where() + ": output references unknown segment");
                continue;
            }
            if (++produced[s] > 1)
                fail("segment '" + c.segment(s).label + "' produced twice");
        }
        if (e.kind == ElementKind::BeamSplitter || e.kind == ElementKind::DoubleSidedMirror) {
            // 2x2 transfer must be unitary: rotation matrices are by construction;
            // a defect in [0,1) is an explicit non-unitary loss knob, not an error.
            if (!(e.defect >= 0.0 && e.defect < 1.0))
                fail(where() + ": defect outside [0, 1)");
        }
    }
    if (sources != 1) fail("circuit must have exactly one source");

    for (const auto& s : c.segments) {
        if (produced.find(s.id) == produced.end())
            fail("segment '" + s.label + "' never produced");
        if (consumed.find(s.id) == consumed.end() && !c.declared_open.count(s.id))
            fail("segment '" + s.label + "' never consumed and not a declared open port");
    }

    // Channel single-visit: with single production/consumption and elements in
    // topological order every segment is traversed at most once per history,
    // so each enabled channel sees at most one coupling event per run.
    return r;
}

}  // namespace cfsim
