#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "cfsim/builtin_circuits.hpp"
#include "cfsim/propagate.hpp"
#include "cfsim/trace.hpp"

using namespace cfsim;
using Catch::Approx;

namespace {

JointState single_term_state(Loc loc, ExcitedSet excited, EpsPoly amp, int mo) {
    JointState st;
    st.max_order = mo;
    st.terms.emplace(TermKey{loc, std::move(excited)}, std::move(amp));
    return st;
}

TraceReport report_for(const BuiltCircuit& b, const std::string& det, int max_order = 2) {
    PropagateOptions opt;
    opt.max_order = max_order;
    JointState st = propagate(b.circuit, opt);
    Postselected ps = postselect(st, det);
    return trace_report(ps.conditional, b.channels);
}

}  // namespace

TEST_CASE("couple splits a term into eta and eps branches") {
    // (B, {}, 1) -> (B, {}, eta) + (B, {B}, eps)
    JointState st = single_term_state(Loc::segment(7), {}, EpsPoly::constant({1, 0}, 2), 2);
    couple(st, 7);
    REQUIRE(st.terms.size() == 2);
    auto stay = st.terms.find(TermKey{Loc::segment(7), {}});
    auto kick = st.terms.find(TermKey{Loc::segment(7), {7}});
    REQUIRE(stay != st.terms.end());
    REQUIRE(kick != st.terms.end());
    CHECK(stay->second.coeff(0).real() == Approx(1.0));
    CHECK(stay->second.coeff(2).real() == Approx(-0.5));
    CHECK(kick->second.coeff(1).real() == Approx(1.0));
}

TEST_CASE("couple at eps = 0 evaluation leaves the state unchanged") {
    JointState st = single_term_state(Loc::segment(3), {}, EpsPoly::constant({0.5, 0.25}, 2), 2);
    couple(st, 3);
    Complex total(0, 0);
    for (const auto& [k, p] : st.terms) {
        if (k.excited.empty()) total += p.eval(0.0);
        else CHECK(std::abs(p.eval(0.0)) == 0.0);
    }
    CHECK(total == Complex(0.5, 0.25));
}

TEST_CASE("couple on an already-excited term multiplies polynomials") {
    // (A, {C}, eps) with max_order 2 -> (A, {C}, eps*eta) + (A, {A,C}, eps^2)
    JointState st =
        single_term_state(Loc::segment(1), {9}, EpsPoly::monomial(1, {1, 0}, 2), 2);
    couple(st, 1);
    auto stay = st.terms.find(TermKey{Loc::segment(1), {9}});
    auto kick = st.terms.find(TermKey{Loc::segment(1), {1, 9}});
    REQUIRE(stay != st.terms.end());
    REQUIRE(kick != st.terms.end());
    // eps * eta truncated at degree 2 is just eps
    CHECK(stay->second.coeff(1).real() == Approx(1.0));
    CHECK(stay->second.coeff(2) == Complex(0, 0));
    CHECK(kick->second.coeff(2).real() == Approx(1.0));
}

TEST_CASE("double visit is a hard error") {
    JointState st = single_term_state(Loc::segment(4), {4}, EpsPoly::monomial(1, {1, 0}, 2), 2);
    CHECK_THROWS_AS(couple(st, 4), std::logic_error);
}

TEST_CASE("fig2 open trace: first order in A, B, C with signs (-, +, +)") {
    auto b = builders::nested_mzi(false);
    TraceReport rep = report_for(b, "D");

    for (const char* ch : {"A", "B", "C"}) {
        const ChannelTrace* t = rep.find(ch);
        REQUIRE(t);
        CHECK(t->leading_order == 1);
        CHECK(t->verdict == Verdict::Present);
        CHECK(std::abs(t->leading_coefficient) == Approx(1.0).margin(1e-10));
    }
    CHECK(rep.find("A")->leading_coefficient.real() == Approx(-1.0).margin(1e-10));
    CHECK(rep.find("B")->leading_coefficient.real() == Approx(+1.0).margin(1e-10));
    CHECK(rep.find("C")->leading_coefficient.real() == Approx(+1.0).margin(1e-10));
}

TEST_CASE("fig2 open trace: E and F are second order, paired with A or B") {
    auto b = builders::nested_mzi(false);
    TraceReport rep = report_for(b, "D");
    SegmentId A = b.circuit.find_segment("A"), B = b.circuit.find_segment("B");
    SegmentId E = b.circuit.find_segment("E"), F = b.circuit.find_segment("F");

    for (auto [ch, other] : {std::pair{E, A}, {E, B}, {F, A}, {F, B}}) {
        (void)other;
        const ChannelTrace* t = rep.find(b.circuit.segment(ch).label);
        REQUIRE(t);
        CHECK(t->leading_order == 2);
        CHECK(t->verdict == Verdict::Absent);
    }
    // Eq.-(7)-style pairing: each second-order term joins E or F with A or B.
    auto check_pairs = [&](SegmentId ch) {
        const ChannelTrace* t = rep.find(b.circuit.segment(ch).label);
        REQUIRE(t->leading_terms.size() == 2);
        for (const auto& [es, c] : t->leading_terms) {
            REQUIRE(es.size() == 2);
            bool joins_inner = contains_channel(es, A) || contains_channel(es, B);
            CHECK(joins_inner);
            CHECK(std::abs(c) == Approx(1.0).margin(1e-10));
        }
    };
    check_pairs(E);
    check_pairs(F);
    // Sign structure: {E,B} and {F,B} positive, {E,A} and {F,A} negative.
    CHECK(rep.find("E")->leading_terms.at(with_channel({E}, B)).real() == Approx(1.0).margin(1e-10));
    CHECK(rep.find("E")->leading_terms.at(with_channel({E}, A)).real() == Approx(-1.0).margin(1e-10));
    CHECK(rep.find("F")->leading_terms.at(with_channel({F}, B)).real() == Approx(1.0).margin(1e-10));
    CHECK(rep.find("F")->leading_terms.at(with_channel({F}, A)).real() == Approx(-1.0).margin(1e-10));
}

TEST_CASE("fig3 open trace: B and B' second order, C first order") {
    auto b = builders::modified_nested(builders::Fig3Shutters::Open);
    TraceReport rep = report_for(b, "D");

    CHECK(rep.find("C")->leading_order == 1);
    CHECK(rep.find("C")->verdict == Verdict::Present);
    CHECK(rep.find("C")->leading_coefficient.real() == Approx(1.0).margin(1e-10));

    for (const char* ch : {"B", "B'"}) {
        const ChannelTrace* t = rep.find(ch);
        REQUIRE(t);
        CHECK(t->leading_order == 2);
        CHECK(t->verdict == Verdict::Absent);
    }
    // Channels with no path to D at any order stay NoTrace (exact nulls).
    for (const char* ch : {"E", "E'", "F", "F'"}) {
        CHECK(rep.find(ch)->verdict == Verdict::NoTrace);
    }
}

TEST_CASE("fig1 blocked trace: A present, B exact NoTrace") {
    auto b = builders::ifm(true);
    TraceReport rep = report_for(b, "D");
    CHECK(rep.find("A")->leading_order == 1);
    CHECK(rep.find("A")->verdict == Verdict::Present);
    CHECK(rep.find("A")->leading_coefficient.real() == Approx(1.0).margin(1e-10));
    CHECK(rep.find("B")->verdict == Verdict::NoTrace);
    CHECK(rep.find("B")->leading_order == -1);

    auto verdicts = presence_verdict(rep);
    CHECK(verdicts.at("A"));
    CHECK_FALSE(verdicts.at("B"));
    CHECK(counterfactual_for(rep, {"B"}));
    CHECK_FALSE(counterfactual_for(rep, {"A"}));
}

TEST_CASE("presence verdict maps orders per the criterion") {
    auto b = builders::nested_mzi(false);
    TraceReport rep = report_for(b, "D");
    auto verdicts = presence_verdict(rep);
    CHECK(verdicts.at("B"));        // order 1 -> present -> not counterfactual
    CHECK_FALSE(verdicts.at("E"));  // order 2 -> absent
    CHECK_FALSE(counterfactual_for(rep, {"B"}));
    CHECK(counterfactual_for(rep, {"E", "F"}));
}

TEST_CASE("trace_report on a dark state throws DarkPortError") {
    JointState st;
    st.max_order = 2;
    CHECK_THROWS_AS(trace_report(st, {}), DarkPortError);
}
