#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "builtin_circuits.hpp"
#include "circuit.hpp"

namespace cfsim {

using Json = nlohmann::ordered_json;

/// Declarative circuit description (JSON). Segments are referenced by label;
/// null stands for a vacuum input port.
///
/// {
///   "segments": [ {"label": "A", "channel": true}, ... ],
///   "elements": [
///     {"kind": "source", "outputs": ["src"]},
///     {"kind": "beam_splitter", "theta": 0.785398, "inputs": ["src", null],
///      "outputs": ["A", "B"], "defect": 0.0},
///     {"kind": "shutter", "name": "shutter_B", "inputs": ["B"]},
///     {"kind": "detector", "name": "D", "inputs": ["to_D"]}
///   ],
///   "cuts": [ {"name": "mid", "segments": ["A", "B"]} ],
///   "open_ports": ["G"]
/// }
inline Json circuit_to_json(const Circuit& c) {
    Json j;
    Json segs = Json::array();
    for (const auto& s : c.segments) {
        Json js;
        js["label"] = s.label;
        if (s.channel_enabled) js["channel"] = true;
        segs.push_back(js);
    }
    j["segments"] = segs;

    auto port = [&](SegmentId s) -> Json {
        return s == kNoSegment ? Json(nullptr) : Json(c.segment(s).label);
    };
    Json els = Json::array();
    for (const auto& e : c.elements) {
        Json je;
        je["kind"] = to_string(e.kind);
        if (!e.name.empty()) je["name"] = e.name;
        if (e.kind == ElementKind::BeamSplitter) je["theta"] = e.theta;
        if (e.kind == ElementKind::PhaseShift) je["phi"] = e.phi;
        if (e.defect != 0.0) je["defect"] = e.defect;
        if (!e.inputs.empty()) {
            Json in = Json::array();
            for (auto s : e.inputs) in.push_back(port(s));
            je["inputs"] = in;
        }
        if (!e.outputs.empty()) {
            Json out = Json::array();
            for (auto s : e.outputs) out.push_back(port(s));
            je["outputs"] = out;
        }
        els.push_back(je);
    }
    j["elements"] = els;

    if (!c.cuts.empty()) {
        Json cuts = Json::array();
        for (const auto& cut : c.cuts) {
            Json jc;
            jc["name"] = cut.name;
            Json ss = Json::array();
            for (auto s : cut.segments) ss.push_back(c.segment(s).label);
            jc["segments"] = ss;
            cuts.push_back(jc);
        }
        j["cuts"] = cuts;
    }
    if (!c.declared_open.empty()) {
        Json op = Json::array();
        for (auto s : c.declared_open) op.push_back(c.segment(s).label);
        j["open_ports"] = op;
    }
    return j;
}

inline Circuit circuit_from_json(const Json& j) {
    Circuit c;
    std::map<std::string, SegmentId> by_label;
    for (const auto& js : j.at("segments")) {
        std::string label = js.at("label").get<std::string>();
        bool channel = js.contains("channel") && js.at("channel").get<bool>();
        if (by_label.count(label))
            throw std::invalid_argument("duplicate segment label '" + label + "'");
        by_label[label] = c.add_segment(label, channel);
    }
    auto port = [&](const Json& v) -> SegmentId {
        if (v.is_null()) return kNoSegment;
        std::string label = v.get<std::string>();
        auto it = by_label.find(label);
        if (it == by_label.end())
            throw std::invalid_argument("element references unknown segment '" + label + "'");
        return it->second;
    };
    for (const auto& je : j.at("elements")) {
        OpticalElement e;
        std::string kind = je.at("kind").get<std::string>();
        if (kind == "source") e.kind = ElementKind::Source;
        else if (kind == "beam_splitter") e.kind = ElementKind::BeamSplitter;
        else if (kind == "mirror") e.kind = ElementKind::Mirror;
        else if (kind == "double_sided_mirror") e.kind = ElementKind::DoubleSidedMirror;
        else if (kind == "shutter") e.kind = ElementKind::Shutter;
        else if (kind == "phase_shift") e.kind = ElementKind::PhaseShift;
        else if (kind == "detector") e.kind = ElementKind::Detector;
        else throw std::invalid_argument("unknown element kind '" + kind + "'");
        if (je.contains("name")) e.name = je.at("name").get<std::string>();
        if (je.contains("theta")) e.theta = je.at("theta").get<double>();
        if (je.contains("phi")) e.phi = je.at("phi").get<double>();
        if (je.contains("defect")) e.defect = je.at("defect").get<double>();
        if (je.contains("inputs"))
            for (const auto& v : je.at("inputs")) e.inputs.push_back(port(v));
        if (je.contains("outputs"))
            for (const auto& v : je.at("outputs")) e.outputs.push_back(port(v));
        c.elements.push_back(std::move(e));
    }
    if (j.contains("cuts")) {
        for (const auto& jc : j.at("cuts")) {
            Cut cut;
            cut.name = jc.at("name").get<std::string>();
            for (const auto& v : jc.at("segments")) cut.segments.push_back(port(v));
            c.cuts.push_back(std::move(cut));
        }
    }
    if (j.contains("open_ports"))
        for (const auto& v : j.at("open_ports")) c.declared_open.insert(port(v));
    return c;
}

/// Built-in circuits by name. Zeno chains take their size from (N, M).
inline std::optional<BuiltCircuit> built_in_circuit(const std::string& name, int N = 4, int M = 3) {
    using namespace builders;
    if (name == "fig1_open") return ifm(false);
    if (name == "fig1_blocked") return ifm(true);
    if (name == "fig2_open") return nested_mzi(false);
    if (name == "fig2_blocked") return nested_mzi(true);
    if (name == "fig3_open") return modified_nested(Fig3Shutters::Open);
    if (name == "fig3_blocked") return modified_nested(Fig3Shutters::Blocked);
    if (name == "fig3_only_B") return modified_nested(Fig3Shutters::OnlyB);
    if (name == "fig3_only_Bprime") return modified_nested(Fig3Shutters::OnlyBPrime);
    if (name == "zeno_original_open") return zeno_original(N, M, false);
    if (name == "zeno_original_blocked") return zeno_original(N, M, true);
    if (name == "zeno_modified_open") return zeno_modified(N, M, false);
    if (name == "zeno_modified_blocked") return zeno_modified(N, M, true);
    return std::nullopt;
}

inline std::vector<std::string> built_in_circuit_names() {
    return {"fig1_open",       "fig1_blocked",      "fig2_open",          "fig2_blocked",
            "fig3_open",       "fig3_blocked",      "fig3_only_B",        "fig3_only_Bprime",
            "zeno_original_open", "zeno_original_blocked", "zeno_modified_open",
            "zeno_modified_blocked"};
}

}  // namespace cfsim
