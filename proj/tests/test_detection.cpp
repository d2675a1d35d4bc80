#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "photonloom/detection.hpp"
#include "photonloom/protocols.hpp"
#include "test_support.hpp"

using namespace photonloom;
using P = Polarization;
using L = AtomLevel;

namespace {

HybridState final_state(const ProtocolParams& p) {
    auto setup = build_setup(p);
    return apply_circuit(prepare_input(setup, p), setup.circuit);
}

DetectorSet ports(std::vector<std::string> names) {
    DetectorSet d;
    for (auto& n : names) d.push_back(port_detector(n, {P::H, P::V}));
    return d;
}

}  // namespace

TEST(Enumerate, GhzEightEqualPatterns) {
    ProtocolParams p;
    auto setup = ghz_setup();
    auto table = enumerate_outcomes(final_state(p), setup.detectors, p.semantics);
    int heralds = 0;
    for (const auto& r : table.records) {
        if (r.pattern.fired.size() == 3 && setup.herald(r.pattern.fired)) {
            ++heralds;
            EXPECT_NEAR(r.probability, 1.0 / 32, 1e-14);
            EXPECT_TRUE(r.pure());
        }
    }
    EXPECT_EQ(heralds, 8);
    EXPECT_NEAR(table.total(), 1.0, 1e-12);
}

TEST(Enumerate, GhzParityRule) {
    ProtocolParams p;
    auto setup = ghz_setup();
    auto s = final_state(p);
    for (int mask = 0; mask < 8; ++mask) {
        std::vector<std::string> fired;
        int f = 0;
        for (int k = 0; k < 3; ++k) {
            bool is_f = mask >> k & 1;
            f += is_f;
            fired.push_back(std::string(1, char('a' + k)) + (is_f ? "F" : "S"));
        }
        auto ps = post_select(s, pattern_of(fired, setup.detectors), setup.detectors, p.semantics);
        bool odd = f % 2 == 1;
        EXPECT_NEAR(fidelity(ghz_target(odd), ps.atoms()), 1.0, 1e-12) << mask;
        EXPECT_NEAR(fidelity(ghz_target(!odd), ps.atoms()), 0.0, 1e-12) << mask;
    }
}

TEST(Enumerate, WDirectFourHeraldPatterns) {
    ProtocolParams p;
    p.variant = Variant::w_direct;
    auto setup = w_direct_setup();
    auto table = enumerate_outcomes(final_state(p), setup.detectors, p.semantics);
    int three = 0;
    for (const auto& r : table.records) {
        if (r.pattern.fired.size() != 3) continue;
        ++three;
        bool ab = std::count(r.pattern.fired.begin(), r.pattern.fired.end(), "a") &&
                  std::count(r.pattern.fired.begin(), r.pattern.fired.end(), "b");
        EXPECT_NEAR(fidelity(w_target(!ab), r.conditional_atoms()), 1.0, 1e-12);
    }
    EXPECT_EQ(three, 4);
}

TEST(Enumerate, VacuumGivesSingleSilentRecord) {
    auto s = new_product_state({L::excited}).scaled(0.7);
    auto table = enumerate_outcomes(s, ports({"a", "b"}), DetectorSemantics::exactly_one);
    ASSERT_EQ(table.records.size(), 1u);
    EXPECT_TRUE(table.records[0].pattern.fired.empty());
    EXPECT_EQ(table.records[0].pattern.str(), "none");
    EXPECT_NEAR(table.records[0].probability, 0.49, 1e-15);
}

TEST(Enumerate, CompletenessOnRandomStates) {
    std::mt19937_64 rng(17);
    std::vector<ModeId> modes = {mode("a", P::H), mode("a", P::V), mode("b", P::H), mode("x", P::V)};
    for (auto sem : {DetectorSemantics::exactly_one, DetectorSemantics::at_least_one}) {
        for (int i = 0; i < 200; ++i) {
            auto s = test_support::random_state(modes, 2, 3, 8, rng).scaled(0.9);
            auto table = enumerate_outcomes(s, ports({"a", "b"}), sem);
            ASSERT_NEAR(table.total(), s.squared_norm(), 1e-10);
        }
    }
}

TEST(Enumerate, SemanticsDifferOnDoubleOccupation) {
    HybridState s(1);
    s.add(BasisTerm{{L::ground_l}, {{mode("a", P::H), 2}}}, 1.0);
    auto exact = enumerate_outcomes(s, ports({"a"}), DetectorSemantics::exactly_one);
    EXPECT_NEAR(exact.discarded, 1.0, 1e-15);
    EXPECT_TRUE(exact.records.empty());
    auto thr = enumerate_outcomes(s, ports({"a"}), DetectorSemantics::at_least_one);
    ASSERT_EQ(thr.records.size(), 1u);
    EXPECT_EQ(thr.records[0].pattern.str(), "a");
}

TEST(Enumerate, UndetectedModesLeaveMixture) {
    HybridState s(1);
    s.add(BasisTerm{{L::ground_l}, {{mode("a", P::H), 1}, {mode("x", P::H), 1}}}, std::sqrt(0.5));
    s.add(BasisTerm{{L::ground_r}, {{mode("a", P::H), 1}, {mode("x", P::V), 1}}}, std::sqrt(0.5));
    auto table = enumerate_outcomes(s, ports({"a"}), DetectorSemantics::exactly_one);
    ASSERT_EQ(table.records.size(), 1u);
    EXPECT_EQ(table.records[0].branches.size(), 2u);
    EXPECT_THROW(table.records[0].conditional_atoms(), StateError);
}

TEST(PostSelect, ZeroProbabilityIsNotAnError) {
    auto s = new_product_state({L::ground_l});
    auto ps = post_select(s, pattern_of({"a"}, ports({"a", "b"})), ports({"a", "b"}), DetectorSemantics::exactly_one);
    EXPECT_EQ(ps.probability, 0.0);
    EXPECT_TRUE(ps.pure());
    EXPECT_EQ(ps.atoms().squared_norm(), 0.0);
}

TEST(PostSelect, MatchesEnumeration) {
    ProtocolParams p;
    p.variant = Variant::w_direct;
    auto setup = w_direct_setup();
    auto s = final_state(p);
    for (const auto& r : enumerate_outcomes(s, setup.detectors, p.semantics).records) {
        auto ps = post_select(s, r.pattern, setup.detectors, p.semantics);
        EXPECT_NEAR(ps.probability, r.probability, 1e-15);
    }
}

TEST(PostSelect, PatternValidation) {
    auto d = ports({"a", "b"});
    EXPECT_THROW(pattern_of({"z"}, d), StateError);
    ClickPattern partial{{"a"}, {}};
    EXPECT_THROW(post_select(new_product_state({L::ground_l}), partial, d, DetectorSemantics::exactly_one),
                 StateError);
    DetectorSet dup = {port_detector("a", {P::H}), port_detector("a", {P::V})};
    EXPECT_THROW(enumerate_outcomes(new_product_state({L::ground_l}), dup, DetectorSemantics::exactly_one), StateError);
}

TEST(SequentialProject, EveryOrderMatchesSimultaneous) {
    for (auto v : {Variant::ghz, Variant::w_direct, Variant::w_bunching}) {
        ProtocolParams p;
        p.variant = v;
        p.coupling.lambda_l = 1.2;
        auto setup = build_setup(p);
        auto s = final_state(p);
        for (const auto& r : enumerate_outcomes(s, setup.detectors, p.semantics).records) {
            if (!setup.herald(r.pattern.fired)) continue;
            auto ref = post_select(s, r.pattern, setup.detectors, p.semantics);
            auto order = r.pattern.fired;
            std::sort(order.begin(), order.end());
            do {
                auto seq = sequential_project(s, order, setup.detectors, p.semantics);
                ASSERT_NEAR(seq.probability, ref.probability, 1e-12);
                ASSERT_EQ(seq.branches.size(), ref.branches.size());
                for (std::size_t b = 0; b < seq.branches.size(); ++b) {
                    EXPECT_NEAR(seq.branches[b].weight, ref.branches[b].weight, 1e-12);
                    EXPECT_GE(fidelity(ref.branches[b].atoms, seq.branches[b].atoms), 1 - 1e-12);
                }
            } while (std::next_permutation(order.begin(), order.end()));
        }
    }
}

TEST(SequentialProject, SingleClickMarginal) {
    HybridState s(1);
    s.add(BasisTerm{{L::ground_l}, {{mode("a", P::H), 1}}}, std::sqrt(0.3));
    s.add(BasisTerm{{L::ground_r}, {{mode("b", P::H), 1}}}, std::sqrt(0.7));
    auto d = ports({"a", "b"});
    auto ps = sequential_project(s, {"a"}, d, DetectorSemantics::exactly_one);
    EXPECT_NEAR(ps.probability, 0.3, 1e-15);
    EXPECT_NEAR(fidelity(atomic_ket({{"l", 1.0}}), ps.atoms()), 1.0, 1e-15);
}

TEST(EnsembleFidelity, WeightsBranches) {
    std::vector<Branch> b = {{0.25, atomic_ket({{"l", 1.0}}), {}}, {0.75, atomic_ket({{"r", 1.0}}), {}}};
    EXPECT_NEAR(ensemble_fidelity(b, atomic_ket({{"l", 1.0}}), {0}), 0.25, 1e-15);
}
