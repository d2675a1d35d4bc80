#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "photonloom/emission.hpp"

using namespace photonloom;
using P = Polarization;
using L = AtomLevel;

namespace {

double photon_norm(const HybridState& s) {
    return s.filtered([](const BasisTerm& t) { return !t.occupation.empty(); }).squared_norm();
}

}  // namespace

TEST(Emit, FullEmissionEqualCouplings) {
    EmissionConfig cfg;
    auto s = emit(cfg);
    const double h = 1 / std::sqrt(2.0);
    EXPECT_NEAR(s.amplitude(BasisTerm{{L::ground_l}, {{mode("A", P::V), 1}}}).real(), h, 1e-15);
    EXPECT_NEAR(s.amplitude(BasisTerm{{L::ground_r}, {{mode("A", P::H), 1}}}).real(), h, 1e-15);
    EXPECT_NEAR(s.squared_norm(), 1.0, 1e-15);
}

TEST(Emit, NoEvolutionKeepsExcitedAtom) {
    EmissionConfig cfg;
    cfg.coupling.theta = 0;
    cfg.keep_vacuum_term = true;
    auto s = emit(cfg);
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(s.amplitude(BasisTerm{{L::excited}, {}}), complex(1.0));
}

TEST(Emit, QuarterTurnHalfEmission) {
    EmissionConfig cfg;
    cfg.coupling.theta = std::numbers::pi / 4;
    EXPECT_NEAR(photon_norm(emit(cfg)), 0.5, 1e-15);
    EXPECT_NEAR(cfg.emission_probability(), 0.5, 1e-15);
}

TEST(Emit, PhotonBranchNormIsSinSquaredTheta) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> th(-4, 4), lam(0.1, 3);
    for (int i = 0; i < 100; ++i) {
        EmissionConfig cfg;
        cfg.coupling = {lam(rng), lam(rng), th(rng)};
        const double s2 = std::pow(std::sin(cfg.coupling.theta), 2);
        EXPECT_NEAR(photon_norm(emit(cfg)), s2, 1e-12);
        cfg.keep_vacuum_term = true;
        EXPECT_NEAR(emit(cfg).squared_norm(), 1.0, 1e-12);
    }
}

TEST(Emit, RejectsBadCoupling) {
    EmissionConfig cfg;
    cfg.coupling.lambda_l = 0;
    EXPECT_THROW(emit(cfg), StateError);
}

TEST(EmitAll, DuplicateAtomIndicesRejected) {
    EmissionConfig a, b;
    a.atom_index = b.atom_index = "1";
    EXPECT_THROW(emit_all({a, b}), StateError);
}

TEST(EmitAll, SharedPortTripleTermWeight) {
    std::vector<EmissionConfig> cfgs(3);
    for (int i = 0; i < 3; ++i) {
        cfgs[i].atom_index = std::to_string(i + 1);
        cfgs[i].coupling = {1.3, 0.7, std::numbers::pi / 2};
    }
    auto s = emit_all(cfgs, std::string("OUT"));
    const double w = std::hypot(1.3, 0.7);
    auto amp = s.amplitude(BasisTerm{{L::ground_l, L::ground_l, L::ground_l}, {{mode("OUT", P::V), 3}}});
    EXPECT_NEAR(amp.real(), std::pow(1.3 / w, 3), 1e-14);
    auto mixed = s.amplitude(BasisTerm{{L::ground_l, L::ground_r, L::ground_l},
                                       {{mode("OUT", P::H), 1}, {mode("OUT", P::V), 2}}});
    EXPECT_NEAR(mixed.real(), 1.3 * 1.3 * 0.7 / (w * w * w), 1e-14);
    // Each atomic configuration labels its own ket, so the bunched input stays normalized.
    EXPECT_NEAR(s.squared_norm(), 1.0, 1e-14);
    EXPECT_EQ(s.size(), 8u);
}

TEST(EmitAll, SeparatePortsIsTheTensorProduct) {
    EmissionConfig a, b;
    a.atom_index = "1";
    b.atom_index = "2";
    b.output_port = "B";
    auto s = emit_all({a, b});
    auto ref = tensor(emit(a), emit(b));
    EXPECT_EQ(serialize(s), serialize(ref));
    EXPECT_NEAR(s.squared_norm(), 1.0, 1e-15);
}

TEST(EmitAll, SingleAtomMatchesEmit) {
    EmissionConfig a;
    a.coupling.lambda_l = 2.0;
    EXPECT_EQ(serialize(emit_all({a})), serialize(emit(a)));
}

TEST(BunchMerge, AddsCountsWithoutBosonicFactors) {
    HybridState a(1), b(1);
    a.add(BasisTerm{{L::ground_l}, {{mode("X", P::V), 1}}}, 0.5);
    b.add(BasisTerm{{L::ground_r}, {{mode("X", P::V), 1}}}, 0.5);
    auto s = bunch_merge(a, b);
    EXPECT_NEAR(s.amplitude(BasisTerm{{L::ground_l, L::ground_r}, {{mode("X", P::V), 2}}}).real(), 0.25, 1e-15);
}
