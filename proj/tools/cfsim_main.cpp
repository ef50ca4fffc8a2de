// cfsim: command-line front end for the interferometer simulator.
//
// Subcommands: run, tsvf, scan, calibrate, list-circuits.
// Exit codes: 0 ok, 2 usage error, 3 calibration failure, 4 dark-port
// postselection.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cfsim/circuit_json.hpp"
#include "cfsim/propagate.hpp"
#include "cfsim/protocols.hpp"
#include "cfsim/reporting.hpp"
#include "cfsim/tsvf.hpp"

using namespace cfsim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitCalibration = 3;
constexpr int kExitDarkPort = 4;

void write_output(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        if (!content.empty() && content.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
    out << content;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

struct CommonProtocolArgs {
    std::string protocol = "ifm";
    int bit = 0;
    double eps = 1e-3;
    int N = 25, M = 25;
    std::string variant = "original";
    double defect = 0.0;
    int max_order = 2;
    std::string boundary;   // comma-separated labels
    std::string postselect;
    std::string shutters;   // comma-separated arms for modified_nested
    std::string manifest;   // JSON file with {"config": ...}

    ProtocolConfig to_config() const {
        ProtocolConfig c;
        if (!manifest.empty()) {
            std::ifstream in(manifest);
            if (!in) throw std::invalid_argument("cannot open manifest '" + manifest + "'");
            Json j = Json::parse(in);
            c = config_from_json(j.contains("config") ? j.at("config") : j);
            return c;
        }
        auto p = protocol_from_string(protocol);
        if (!p) throw std::invalid_argument("unknown protocol '" + protocol + "'");
        c.protocol = *p;
        c.bit = bit;
        c.eps = eps;
        c.N = N;
        c.M = M;
        if (variant == "original") c.variant = ZenoVariant::Original;
        else if (variant == "modified") c.variant = ZenoVariant::Modified;
        else throw std::invalid_argument("unknown variant '" + variant + "'");
        c.defect = defect;
        c.max_order = max_order;
        c.boundary = split_list(boundary);
        c.postselect = postselect;
        c.explicit_shutters = split_list(shutters);
        return c;
    }
};

void add_protocol_options(CLI::App* cmd, CommonProtocolArgs& a) {
    cmd->add_option("--protocol", a.protocol,
                    "ifm | nested_mzi | modified_nested | zeno_chain");
    cmd->add_option("--bit", a.bit, "shutter configuration: 1 = present / all-in");
    cmd->add_option("--eps", a.eps, "coupling strength for numeric evaluation");
    cmd->add_option("--N", a.N, "outer chain length (zeno)");
    cmd->add_option("--M", a.M, "inner chain length (zeno)");
    cmd->add_option("--variant", a.variant, "zeno variant: original | modified");
    cmd->add_option("--defect", a.defect, "per-element amplitude defect in [0,1)");
    cmd->add_option("--max-order", a.max_order, "eps truncation degree (0..4)");
    cmd->add_option("--boundary", a.boundary, "transmission-channel labels, comma separated");
    cmd->add_option("--postselect", a.postselect, "trace postselection detector");
    cmd->add_option("--shutters", a.shutters,
                    "explicit shutters for modified_nested (e.g. B or B,B')");
    cmd->add_option("--manifest", a.manifest, "JSON manifest with {\"config\": ...}");
}

int report_calibration(const std::vector<CalibrationCheck>& checks) {
    bool ok = true;
    for (const auto& c : checks) {
        std::fprintf(stderr, "[%s] %s (|amp| = %.3e)\n", c.pass ? "PASS" : "FAIL",
                     c.description.c_str(), c.magnitude);
        ok &= c.pass;
    }
    return ok ? kExitOk : kExitCalibration;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cfsim: weak-trace analysis of counterfactual communication interferometers"};
    app.require_subcommand(1);

    // ---- run ----
    auto* run = app.add_subcommand("run", "run a protocol and emit the result");
    CommonProtocolArgs run_args;
    add_protocol_options(run, run_args);
    std::string run_format = "json", run_out;
    bool run_no_trace = false;
    run->add_option("--format", run_format, "json | csv");
    run->add_option("--out,-o", run_out, "output file (default stdout)");
    run->add_flag("--no-trace", run_no_trace, "probabilities only, skip trace propagation");

    // ---- tsvf ----
    auto* tsvf = app.add_subcommand("tsvf", "forward/backward presence map for a circuit");
    std::string tsvf_circuit = "fig2_open", tsvf_file, tsvf_detector = "D";
    std::string tsvf_format = "csv", tsvf_out;
    int tsvf_N = 4, tsvf_M = 3;
    tsvf->add_option("--circuit", tsvf_circuit, "built-in circuit name (see list-circuits)");
    tsvf->add_option("--circuit-file", tsvf_file, "circuit description JSON file");
    tsvf->add_option("--detector", tsvf_detector, "post-selection detector");
    tsvf->add_option("--N", tsvf_N, "outer chain length for zeno circuits");
    tsvf->add_option("--M", tsvf_M, "inner chain length for zeno circuits");
    tsvf->add_option("--format", tsvf_format, "csv | json");
    tsvf->add_option("--out,-o", tsvf_out, "output file (default stdout)");

    // ---- scan ----
    auto* scan_cmd = app.add_subcommand("scan", "parameter scan, one row per grid cell");
    CommonProtocolArgs scan_args;
    add_protocol_options(scan_cmd, scan_args);
    std::string scan_Ns, scan_Ms, scan_epss, scan_defects;
    std::string scan_format = "csv", scan_out;
    unsigned scan_jobs = 0;
    scan_cmd->add_option("--N-list", scan_Ns, "comma-separated N values");
    scan_cmd->add_option("--M-list", scan_Ms, "comma-separated M values");
    scan_cmd->add_option("--eps-list", scan_epss, "comma-separated eps values");
    scan_cmd->add_option("--defect-list", scan_defects, "comma-separated defect values");
    scan_cmd->add_option("--jobs", scan_jobs, "parallel workers (0 = hardware)");
    scan_cmd->add_option("--format", scan_format, "csv | json");
    scan_cmd->add_option("--out,-o", scan_out, "output file (default stdout)");

    // ---- calibrate ----
    auto* cal = app.add_subcommand("calibrate", "dark-port calibration checks");
    CommonProtocolArgs cal_args;
    add_protocol_options(cal, cal_args);
    bool cal_all = false;
    cal->add_flag("--all", cal_all, "calibrate every protocol");

    // ---- list-circuits ----
    auto* list = app.add_subcommand("list-circuits", "list built-in circuits");
    std::string dump_name;
    int list_N = 4, list_M = 3;
    list->add_option("--dump", dump_name, "print the named circuit as JSON");
    list->add_option("--N", list_N, "outer chain length for zeno circuits");
    list->add_option("--M", list_M, "inner chain length for zeno circuits");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*run) {
            ProtocolConfig cfg = run_args.to_config();
            cfg.compute_trace = !run_no_trace;
            ProtocolResult res = run_protocol(cfg);
            std::string content;
            if (run_format == "json") {
                content = result_to_json(res).dump(2);
            } else if (run_format == "csv") {
                content = result_outcomes_to_csv(res);
                if (res.conditional_trace)
                    content += "\n" + trace_report_to_csv(*res.conditional_trace);
            } else {
                throw std::invalid_argument("unknown format '" + run_format + "'");
            }
            write_output(run_out, content);
            if (!res.calibration_ok) {
                std::fprintf(stderr, "calibration failure\n");
                return kExitCalibration;
            }
            if (res.dark_postselect) {
                std::fprintf(stderr, "postselected on dark port '%s'\n",
                             res.trace_postselect.c_str());
                return kExitDarkPort;
            }
            return kExitOk;
        }

        if (*tsvf) {
            Circuit circuit;
            if (!tsvf_file.empty()) {
                std::ifstream in(tsvf_file);
                if (!in) throw std::invalid_argument("cannot open '" + tsvf_file + "'");
                circuit = circuit_from_json(Json::parse(in));
            } else {
                auto b = built_in_circuit(tsvf_circuit, tsvf_N, tsvf_M);
                if (!b) throw std::invalid_argument("unknown circuit '" + tsvf_circuit + "'");
                circuit = std::move(b->circuit);
            }
            auto cuts = overlap_map(circuit, tsvf_detector);
            std::string content = tsvf_format == "json" ? two_state_cuts_to_json(cuts).dump(2)
                                                        : two_state_cuts_to_csv(cuts);
            write_output(tsvf_out, content);
            if (!cuts.empty() && !cuts.front().postselection_possible) {
                std::fprintf(stderr, "detector '%s' is a dark port (overlap = 0)\n",
                             tsvf_detector.c_str());
                return kExitDarkPort;
            }
            return kExitOk;
        }

        if (*scan_cmd) {
            ProtocolConfig base = scan_args.to_config();
            ScanGrid grid;
            auto ints = [](const std::string& s, std::vector<int> dflt) {
                if (s.empty()) return dflt;
                std::vector<int> out;
                for (const auto& t : split_list(s)) out.push_back(std::stoi(t));
                return out;
            };
            auto doubles = [](const std::string& s, std::vector<double> dflt) {
                if (s.empty()) return dflt;
                std::vector<double> out;
                for (const auto& t : split_list(s)) out.push_back(std::stod(t));
                return out;
            };
            grid.Ns = ints(scan_Ns, {base.N});
            grid.Ms = ints(scan_Ms, {base.M});
            grid.epss = doubles(scan_epss, {base.eps});
            grid.defects = doubles(scan_defects, {base.defect});
            unsigned jobs = scan_jobs ? scan_jobs : std::thread::hardware_concurrency();
            auto cells = scan(base, grid, jobs);
            std::string content = scan_format == "json" ? scan_to_json(cells).dump(2)
                                                        : scan_to_csv(cells);
            write_output(scan_out, content);
            return kExitOk;
        }

        if (*cal) {
            if (cal_all) {
                int worst = kExitOk;
                for (auto p : {Protocol::Ifm, Protocol::NestedMzi, Protocol::ModifiedNested}) {
                    ProtocolConfig c;
                    c.protocol = p;
                    worst = std::max(worst, report_calibration(calibrate(c)));
                }
                for (auto v : {ZenoVariant::Original, ZenoVariant::Modified}) {
                    ProtocolConfig c;
                    c.protocol = Protocol::ZenoChain;
                    c.variant = v;
                    c.N = cal_args.N;
                    c.M = cal_args.M;
                    worst = std::max(worst, report_calibration(calibrate(c)));
                }
                return worst;
            }
            return report_calibration(calibrate(cal_args.to_config()));
        }

        if (*list) {
            if (!dump_name.empty()) {
                auto b = built_in_circuit(dump_name, list_N, list_M);
                if (!b) throw std::invalid_argument("unknown circuit '" + dump_name + "'");
                std::cout << circuit_to_json(b->circuit).dump(2) << "\n";
                return kExitOk;
            }
            for (const auto& n : built_in_circuit_names()) std::cout << n << "\n";
            std::cout << "(zeno_* circuits are parameterized by --N and --M)\n";
            return kExitOk;
        }
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return kExitUsage;
}
