#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "cfsim/propagate.hpp"
#include "cfsim/tsvf.hpp"
#include "exact_reference.hpp"

using namespace cfsim;
using Catch::Approx;

namespace {

struct GenOptions {
    int rails = 4;
    int layers = 4;
    double channel_prob = 0.35;
    double shutter_prob = 0.0;
    double phase_prob = 0.2;
    int max_channels = 12;
};

/// Random layered circuit: rails become live as beam splitters fan amplitude
/// out; every live rail emits exactly one segment per layer, so each layer
/// forms a complete cut.
Circuit random_layered_circuit(std::mt19937& rng, const GenOptions& g) {
    Circuit c;
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::uniform_real_distribution<double> angle(0.1, 1.4);

    int channels_left = g.max_channels;
    auto add_seg = [&](int layer, int rail) {
        bool channel = channels_left > 0 && uni(rng) < g.channel_prob;
        if (channel) --channels_left;
        return c.add_segment("L" + std::to_string(layer) + "R" + std::to_string(rail), channel);
    };

    std::vector<SegmentId> live(static_cast<size_t>(g.rails), kNoSegment);
    SegmentId src = c.add_segment("src");
    c.elements.push_back({ElementKind::Source, "", 0, 0, 0, {}, {src}});
    live[0] = src;

    for (int layer = 1; layer <= g.layers; ++layer) {
        std::vector<SegmentId> next(static_cast<size_t>(g.rails), kNoSegment);
        int rail = 0;
        while (rail < g.rails) {
            bool pair_up = rail + 1 < g.rails && uni(rng) < 0.7 &&
                           (live[rail] != kNoSegment || live[rail + 1] != kNoSegment);
            if (pair_up) {
                SegmentId o0 = add_seg(layer, rail);
                SegmentId o1 = add_seg(layer, rail + 1);
                c.elements.push_back({ElementKind::BeamSplitter, "", angle(rng), 0, 0,
                                      {live[rail], live[rail + 1]}, {o0, o1}});
                next[rail] = o0;
                next[rail + 1] = o1;
                rail += 2;
                continue;
            }
            if (live[rail] != kNoSegment) {
                if (g.shutter_prob > 0 && uni(rng) < g.shutter_prob) {
                    c.elements.push_back({ElementKind::Shutter,
                                          "abs" + std::to_string(layer) + "_" + std::to_string(rail),
                                          0, 0, 0, {live[rail]}, {}});
                    next[rail] = kNoSegment;
                } else if (uni(rng) < g.phase_prob) {
                    SegmentId o = add_seg(layer, rail);
                    c.elements.push_back({ElementKind::PhaseShift, "", 0, uni(rng) * 2 * kPi, 0,
                                          {live[rail]}, {o}});
                    next[rail] = o;
                } else {
                    SegmentId o = add_seg(layer, rail);
                    c.elements.push_back({ElementKind::Mirror, "", 0, 0, 0, {live[rail]}, {o}});
                    next[rail] = o;
                }
            }
            ++rail;
        }
        live = next;

        Cut cut;
        cut.name = "layer" + std::to_string(layer);
        for (auto s : live)
            if (s != kNoSegment) cut.segments.push_back(s);
        if (!cut.segments.empty()) c.cuts.push_back(std::move(cut));
    }
    for (int rail = 0; rail < g.rails; ++rail) {
        if (live[rail] != kNoSegment)
            c.elements.push_back(
                {ElementKind::Detector, "d" + std::to_string(rail), 0, 0, 0, {live[rail]}, {}});
    }
    return c;
}

}  // namespace

TEST_CASE("random circuits validate and conserve probability at eps = 0") {
    std::mt19937 rng(12345);
    GenOptions g;
    g.shutter_prob = 0.1;
    for (int trial = 0; trial < 40; ++trial) {
        Circuit c = random_layered_circuit(rng, g);
        auto v = validate_circuit(c);
        INFO("trial " << trial << ": " << v.summary());
        REQUIRE(v.ok());
        PropagateOptions opt;
        opt.coupling_on = std::set<SegmentId>{};
        JointState st = propagate(c, opt);
        CHECK(st.total_terminal_probability().coeff(0).real() == Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("random circuits: truncated norm deviates only beyond max_order") {
    std::mt19937 rng(777);
    GenOptions g;
    g.shutter_prob = 0.1;
    for (int trial = 0; trial < 15; ++trial) {
        Circuit c = random_layered_circuit(rng, g);
        int n_ch = static_cast<int>(c.channel_segments().size());
        PropagateOptions opt;
        opt.max_order = 2;
        JointState st = propagate(c, opt);
        EpsPoly total = st.total_terminal_probability();
        CHECK(total.coeff(0).real() == Approx(1.0).margin(1e-12));
        CHECK(std::abs(total.coeff(1)) < 1e-12);  // probabilities have no odd head
        for (double eps : {1e-2, 1e-3}) {
            double dev = std::abs(total.eval(eps).real() - 1.0);
            CHECK(dev < 100.0 * (n_ch + 1) * std::pow(eps, 3) + 1e-12);
        }
    }
}

TEST_CASE("random circuits: symbolic amplitudes match the exact oracle") {
    std::mt19937 rng(424242);
    GenOptions g;
    g.shutter_prob = 0.15;
    for (int trial = 0; trial < 10; ++trial) {
        Circuit c = random_layered_circuit(rng, g);
        PropagateOptions opt;
        opt.max_order = 4;
        JointState st = propagate(c, opt);
        const double eps = 1e-2;
        exact_ref::ExactState ex = exact_ref::propagate_exact(c, eps);
        for (const auto& [key, poly] : st.terms) {
            const std::string& term = st.terminal_names[(size_t)key.loc.idx];
            Complex mine = poly.eval(eps);
            Complex theirs = exact_ref::terminal_amplitude(ex, term, key.excited);
            if (std::abs(theirs) < 1e-13) {
                CHECK(std::abs(mine) < 1e-11);
            } else {
                CHECK(std::abs(mine - theirs) / std::abs(theirs) < 1e-6);
            }
        }
    }
}

TEST_CASE("random circuits: excitation count lower-bounds the leading order") {
    std::mt19937 rng(999);
    GenOptions g;
    for (int trial = 0; trial < 15; ++trial) {
        Circuit c = random_layered_circuit(rng, g);
        PropagateOptions opt;
        opt.max_order = 3;
        JointState st = propagate(c, opt);
        for (const auto& [key, poly] : st.terms) {
            int d = poly.leading_degree(1e-14);
            if (d < 0) continue;
            CHECK(d >= static_cast<int>(key.excited.size()));
            // excited sets are sorted, duplicate-free, channel-only
            for (size_t i = 0; i < key.excited.size(); ++i) {
                CHECK(c.segment(key.excited[i]).channel_enabled);
                if (i > 0) CHECK(key.excited[i - 1] < key.excited[i]);
            }
        }
    }
}

TEST_CASE("random circuits: projector completeness on every layer cut") {
    std::mt19937 rng(31337);
    GenOptions g;  // no shutters: keeps every detector reachable
    for (int trial = 0; trial < 15; ++trial) {
        Circuit c = random_layered_circuit(rng, g);
        ScalarState fwd = forward_amplitudes(c);
        for (const auto& [term, amp] : fwd.terminal) {
            if (std::abs(amp) < 1e-9) continue;
            auto cuts = overlap_map(c, term);
            for (const auto& tc : cuts) {
                Complex sum(0, 0);
                for (const auto& r : tc.rows) sum += r.backward * r.forward;
                CHECK(std::abs(sum - tc.overlap) < 1e-12);
            }
        }
    }
}

TEST_CASE("random circuits: reversal reproduces backward amplitudes") {
    std::mt19937 rng(2024);
    GenOptions g;  // shutter-free
    for (int trial = 0; trial < 10; ++trial) {
        Circuit c = random_layered_circuit(rng, g);
        ScalarState fwd = forward_amplitudes(c);
        std::string det;
        for (const auto& [term, amp] : fwd.terminal)
            if (std::abs(amp) > 0.05) det = term;
        if (det.empty()) continue;
        auto bwd = backward_amplitudes(c, det);
        Circuit rev = reverse_circuit(c, det);
        REQUIRE(validate_circuit(rev).ok());
        ScalarState fr = forward_amplitudes(rev);
        for (const auto& s : c.segments) {
            SegmentId mapped = rev.find_segment(s.label);
            if (mapped == kNoSegment) continue;
            Complex b = bwd.count(s.id) ? bwd.at(s.id) : Complex(0, 0);
            Complex f = fr.seg.count(mapped) ? fr.seg.at(mapped) : Complex(0, 0);
            INFO("trial " << trial << " segment " << s.label);
            CHECK(std::abs(b - f) < 1e-12);
        }
    }
}
