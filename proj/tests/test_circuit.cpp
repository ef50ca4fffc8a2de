#include <catch2/catch_amalgamated.hpp>

#include "cfsim/builtin_circuits.hpp"
#include "cfsim/circuit.hpp"

using namespace cfsim;

TEST_CASE("fig1 reference circuit validates") {
    for (bool shutter : {false, true}) {
        auto b = builders::ifm(shutter);
        auto v = validate_circuit(b.circuit);
        INFO(v.summary());
        CHECK(v.ok());
    }
    // 2 beam splitters, 2 mirrors, optional shutter, 2 detectors
    auto b = builders::ifm(true);
    int bs = 0, mirrors = 0, shutters = 0, detectors = 0;
    for (const auto& e : b.circuit.elements) {
        bs += e.kind == ElementKind::BeamSplitter;
        mirrors += e.kind == ElementKind::Mirror;
        shutters += e.kind == ElementKind::Shutter;
        detectors += e.kind == ElementKind::Detector;
    }
    CHECK(bs == 2);
    CHECK(mirrors == 2);
    CHECK(shutters == 1);
    CHECK(detectors == 2);
}

TEST_CASE("fig3 circuit with double-sided mirror validates") {
    for (auto sh : {builders::Fig3Shutters::Open, builders::Fig3Shutters::Blocked,
                    builders::Fig3Shutters::OnlyB, builders::Fig3Shutters::OnlyBPrime}) {
        auto b = builders::modified_nested(sh);
        auto v = validate_circuit(b.circuit);
        INFO(v.summary());
        CHECK(v.ok());
    }
}

TEST_CASE("segment consumed twice is rejected") {
    auto b = builders::ifm(false);
    Circuit c = b.circuit;
    // Feed segment B into a second consumer.
    SegmentId extra = c.add_segment("extra");
    c.elements.push_back({ElementKind::Mirror, "", 0, 0, 0, {c.find_segment("B")}, {extra}});
    c.elements.push_back({ElementKind::Detector, "X", 0, 0, 0, {extra}, {}});
    auto v = validate_circuit(c);
    CHECK_FALSE(v.ok());
    CHECK(v.summary().find("consumed twice") != std::string::npos);
}

TEST_CASE("unconsumed segment must be a declared open port") {
    Circuit c;
    SegmentId s0 = c.add_segment("src");
    SegmentId a = c.add_segment("a");
    SegmentId bseg = c.add_segment("b");
    c.elements.push_back({ElementKind::Source, "", 0, 0, 0, {}, {s0}});
    c.elements.push_back({ElementKind::BeamSplitter, "", 0.5, 0, 0, {s0, kNoSegment}, {a, bseg}});
    c.elements.push_back({ElementKind::Detector, "D", 0, 0, 0, {a}, {}});
    auto v = validate_circuit(c);
    CHECK_FALSE(v.ok());
    CHECK(v.summary().find("never consumed") != std::string::npos);

    c.declared_open.insert(bseg);
    CHECK(validate_circuit(c).ok());
}

TEST_CASE("element arity and ordering violations are reported") {
    Circuit c;
    SegmentId s0 = c.add_segment("src");
    SegmentId a = c.add_segment("a");
    c.elements.push_back({ElementKind::Source, "", 0, 0, 0, {}, {s0}});
    // consumes a segment that is only produced later
    c.elements.push_back({ElementKind::Mirror, "", 0, 0, 0, {a}, {a}});
    auto v = validate_circuit(c);
    CHECK_FALSE(v.ok());
    CHECK(v.summary().find("before production") != std::string::npos);

    Circuit c2;
    SegmentId t0 = c2.add_segment("src");
    c2.elements.push_back({ElementKind::Source, "", 0, 0, 0, {}, {t0}});
    c2.elements.push_back({ElementKind::BeamSplitter, "", 0.3, 0, 0, {t0}, {}});
    auto v2 = validate_circuit(c2);
    CHECK_FALSE(v2.ok());
    CHECK(v2.summary().find("input ports") != std::string::npos);
}

TEST_CASE("duplicate labels and detectors are rejected") {
    Circuit c;
    c.add_segment("x");
    c.add_segment("x");
    auto v = validate_circuit(c);
    CHECK_FALSE(v.ok());
    CHECK(v.summary().find("duplicate segment label") != std::string::npos);
}

TEST_CASE("zeno builders produce valid circuits") {
    for (bool bit : {false, true}) {
        auto o = builders::zeno_original(3, 2, bit);
        INFO(validate_circuit(o.circuit).summary());
        CHECK(validate_circuit(o.circuit).ok());
        auto m = builders::zeno_modified(3, 2, bit);
        INFO(validate_circuit(m.circuit).summary());
        CHECK(validate_circuit(m.circuit).ok());
    }
    CHECK_THROWS_AS(builders::zeno_original(1, 2, false), std::invalid_argument);
    CHECK_THROWS_AS(builders::zeno_modified(2, 1, false), std::invalid_argument);
}
