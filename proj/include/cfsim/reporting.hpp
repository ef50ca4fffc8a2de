#pragma once

#include <cstdio>
#include <string>

#include <json.hpp>

#include "protocols.hpp"
#include "tsvf.hpp"

namespace cfsim {

using Json = nlohmann::ordered_json;

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline Json poly_to_json(const EpsPoly& p) {
    Json j = Json::object();
    for (const auto& [d, c] : p.coeffs()) {
        j[std::to_string(d)] = Json::array({c.real(), c.imag()});
    }
    return j;
}

inline Json trace_report_to_json(const TraceReport& rep) {
    Json j;
    j["zeroth_reference"] = Json::array({rep.zeroth_reference.real(), rep.zeroth_reference.imag()});
    j["has_reference"] = rep.has_reference;
    Json chans = Json::object();
    for (const auto& [label, t] : rep.channels) {
        Json jc;
        jc["leading_order"] = t.leading_order < 0 ? Json(nullptr) : Json(t.leading_order);
        jc["leading_coefficient"] =
            Json::array({t.leading_coefficient.real(), t.leading_coefficient.imag()});
        jc["verdict"] = to_string(t.verdict);
        if (!t.leading_terms.empty()) {
            Json terms = Json::array();
            for (const auto& [es, c] : t.leading_terms) {
                Json te;
                te["excited"] = es;
                te["coefficient"] = Json::array({c.real(), c.imag()});
                terms.push_back(te);
            }
            jc["leading_terms"] = terms;
        }
        chans[label] = jc;
    }
    j["channels"] = chans;
    return j;
}

/// Fixed-column CSV: channel, leading_order, re, im, verdict.
inline std::string trace_report_to_csv(const TraceReport& rep) {
    std::string s = "channel,leading_order,re,im,verdict\n";
    for (const auto& [label, t] : rep.channels) {
        s += label + ",";
        s += (t.leading_order < 0 ? std::string("none") : std::to_string(t.leading_order)) + ",";
        s += fmt_double(t.leading_coefficient.real()) + ",";
        s += fmt_double(t.leading_coefficient.imag()) + ",";
        s += to_string(t.verdict);
        s += "\n";
    }
    return s;
}

inline Json two_state_cuts_to_json(const std::vector<TwoStateCut>& cuts) {
    Json arr = Json::array();
    for (const auto& tc : cuts) {
        Json j;
        j["cut"] = tc.cut;
        j["overlap"] = Json::array({tc.overlap.real(), tc.overlap.imag()});
        j["postselection_possible"] = tc.postselection_possible;
        Json rows = Json::array();
        for (const auto& r : tc.rows) {
            Json jr;
            jr["segment"] = r.label;
            jr["forward"] = Json::array({r.forward.real(), r.forward.imag()});
            jr["backward"] = Json::array({r.backward.real(), r.backward.imag()});
            if (r.weak_defined)
                jr["weak_value"] = Json::array({r.weak_value.real(), r.weak_value.imag()});
            else
                jr["weak_value"] = nullptr;
            rows.push_back(jr);
        }
        j["rows"] = rows;
        arr.push_back(j);
    }
    return arr;
}

/// Presence-map CSV: cut, segment, fwd_re, fwd_im, bwd_re, bwd_im,
/// weak_re, weak_im, weak_defined.
inline std::string two_state_cuts_to_csv(const std::vector<TwoStateCut>& cuts) {
    std::string s = "cut,segment,fwd_re,fwd_im,bwd_re,bwd_im,weak_re,weak_im,weak_defined\n";
    for (const auto& tc : cuts) {
        for (const auto& r : tc.rows) {
            s += tc.cut + "," + r.label + ",";
            s += fmt_double(r.forward.real()) + "," + fmt_double(r.forward.imag()) + ",";
            s += fmt_double(r.backward.real()) + "," + fmt_double(r.backward.imag()) + ",";
            s += fmt_double(r.weak_value.real()) + "," + fmt_double(r.weak_value.imag()) + ",";
            s += r.weak_defined ? "1" : "0";
            s += "\n";
        }
    }
    return s;
}

inline Json config_to_json(const ProtocolConfig& c) {
    Json j;
    j["protocol"] = to_string(c.protocol);
    j["bit"] = c.bit;
    j["eps"] = c.eps;
    if (c.protocol == Protocol::ZenoChain) {
        j["N"] = c.N;
        j["M"] = c.M;
        j["variant"] = c.variant == ZenoVariant::Original ? "original" : "modified";
    }
    j["defect"] = c.defect;
    j["max_order"] = c.max_order;
    if (!c.boundary.empty()) j["boundary"] = c.boundary;
    if (!c.postselect.empty()) j["postselect"] = c.postselect;
    if (!c.explicit_shutters.empty()) j["shutters"] = c.explicit_shutters;
    return j;
}

inline ProtocolConfig config_from_json(const Json& j) {
    ProtocolConfig c;
    auto p = protocol_from_string(j.at("protocol").get<std::string>());
    if (!p) throw std::invalid_argument("unknown protocol '" + j.at("protocol").get<std::string>() + "'");
    c.protocol = *p;
    if (j.contains("bit")) c.bit = j.at("bit").get<int>();
    if (j.contains("eps")) c.eps = j.at("eps").get<double>();
    if (j.contains("N")) c.N = j.at("N").get<int>();
    if (j.contains("M")) c.M = j.at("M").get<int>();
    if (j.contains("variant")) {
        std::string v = j.at("variant").get<std::string>();
        if (v == "original") c.variant = ZenoVariant::Original;
        else if (v == "modified") c.variant = ZenoVariant::Modified;
        else throw std::invalid_argument("unknown variant '" + v + "'");
    }
    if (j.contains("defect")) c.defect = j.at("defect").get<double>();
    if (j.contains("max_order")) c.max_order = j.at("max_order").get<int>();
    if (j.contains("boundary")) c.boundary = j.at("boundary").get<std::vector<std::string>>();
    if (j.contains("postselect")) c.postselect = j.at("postselect").get<std::string>();
    if (j.contains("shutters"))
        c.explicit_shutters = j.at("shutters").get<std::vector<std::string>>();
    return c;
}

inline Json result_to_json(const ProtocolResult& r) {
    Json j;
    j["circuit"] = r.circuit_name;
    j["config"] = config_to_json(r.config);
    Json cal = Json::array();
    for (const auto& c : r.calibration) {
        Json jc;
        jc["check"] = c.description;
        jc["magnitude"] = c.magnitude;
        jc["pass"] = c.pass;
        cal.push_back(jc);
    }
    j["calibration"] = cal;
    j["calibration_ok"] = r.calibration_ok;

    Json outs = Json::object();
    for (const auto& [name, info] : r.outcomes) {
        Json jo;
        jo["p0"] = info.p0;
        jo["p_at_eps"] = info.p_at_eps;
        jo["poly"] = poly_to_json(info.probability);
        outs[name] = jo;
    }
    j["outcomes"] = outs;
    j["success_outcome"] = r.success_outcome;
    j["success_probability"] = r.success_probability;
    j["other_bit_success_outcome"] = r.other_bit_success_outcome;
    j["other_bit_success_probability"] = r.other_bit_success_probability;
    j["trace_postselect"] = r.trace_postselect;
    j["dark_postselect"] = r.dark_postselect;
    if (r.conditional_trace) j["trace"] = trace_report_to_json(*r.conditional_trace);
    j["counterfactual"] = r.counterfactual ? Json(*r.counterfactual) : Json(nullptr);
    if (r.boundary.size() <= 64) j["boundary"] = r.boundary;
    else j["boundary_size"] = r.boundary.size();
    j["promise_violation"] = r.promise_violation;
    j["truncation_overflow"] = r.truncation_overflow;
    return j;
}

/// Outcome CSV: outcome, p0, p_at_eps.
inline std::string result_outcomes_to_csv(const ProtocolResult& r) {
    std::string s = "outcome,p0,p_at_eps\n";
    for (const auto& [name, info] : r.outcomes) {
        s += name + "," + fmt_double(info.p0) + "," + fmt_double(info.p_at_eps) + "\n";
    }
    return s;
}

inline Json scan_to_json(const std::vector<ScanCell>& cells) {
    Json arr = Json::array();
    for (const auto& c : cells) {
        Json j;
        j["N"] = c.N;
        j["M"] = c.M;
        j["eps"] = c.eps;
        j["defect"] = c.defect;
        j["ok"] = c.ok;
        if (!c.error.empty()) j["error"] = c.error;
        j["success_outcome"] = c.success_outcome;
        j["success_probability"] = c.success_probability;
        j["failure_probability"] = c.failure_probability;
        j["counterfactual"] = c.counterfactual ? Json(*c.counterfactual) : Json(nullptr);
        arr.push_back(j);
    }
    return arr;
}

/// Scan CSV: N, M, eps, defect, ok, success_outcome, success_probability,
/// failure_probability, error.
inline std::string scan_to_csv(const std::vector<ScanCell>& cells) {
    std::string s = "N,M,eps,defect,ok,success_outcome,success_probability,failure_probability,error\n";
    for (const auto& c : cells) {
        s += std::to_string(c.N) + "," + std::to_string(c.M) + ",";
        s += fmt_double(c.eps) + "," + fmt_double(c.defect) + ",";
        s += (c.ok ? "1" : "0") + std::string(",");
        s += c.success_outcome + ",";
        s += fmt_double(c.success_probability) + "," + fmt_double(c.failure_probability) + ",";
        s += c.error;
        s += "\n";
    }
    return s;
}

}  // namespace cfsim
