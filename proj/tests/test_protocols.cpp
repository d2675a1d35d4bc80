#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "photonloom/protocols.hpp"

using namespace photonloom;

// Hand-derived closed forms used as references below (x = l^2 r^2, W^2 = l^2 + r^2):
//   GHZ total             (l^6 + r^6) / W^6, conditional state ~ l^3|lll> +- r^3|rrr>
//   W direct total        6 t (1-t) x / W^4 at bs transmittance t
//                         (configurations with two equal photons split one per
//                          arm with 2t(1-t); the odd photon always clicks)
//   both photons in t'    (W^4 - x) / (2 W^4)
//                         (equal polarizations bunch with 1/2, unequal with 1/4)

namespace {

double ghz_total(double l, double r) {
    double w2 = l * l + r * r;
    return (std::pow(l, 6) + std::pow(r, 6)) / std::pow(w2, 3);
}

double ghz_fidelity(double l, double r) {
    double a = std::pow(l, 3), b = std::pow(r, 3);
    return (a + b) * (a + b) / (2 * (a * a + b * b));
}

double w_direct_total(double l, double r, double t = 0.5) {
    double w2 = l * l + r * r;
    return 6 * t * (1 - t) * l * l * r * r / (w2 * w2);
}

ProtocolParams with(Variant v, double l = 1, double r = 1) {
    ProtocolParams p;
    p.variant = v;
    p.coupling.lambda_l = l;
    p.coupling.lambda_r = r;
    return p;
}

}  // namespace

TEST(Ghz, IdealRun) {
    auto r = run_ghz(with(Variant::ghz));
    EXPECT_NEAR(r.total_success_probability, 0.25, 1e-12);
    EXPECT_EQ(r.herald_count(), 8u);
    for (const auto& o : r.outcomes) {
        if (!o.heralded) continue;
        EXPECT_NEAR(o.record.probability, 1.0 / 32, 1e-14);
        EXPECT_NEAR(o.fidelity, 1.0, 1e-12);
    }
    EXPECT_NEAR(r.quantities.at("p_antibunch_pbs1"), 0.5, 1e-14);
    EXPECT_NEAR(r.quantities.at("p_antibunch_pbs2"), 0.5, 1e-14);
    EXPECT_NEAR(r.per_target_yield.at("GHZ+"), 0.125, 1e-14);
    EXPECT_NEAR(r.per_target_yield.at("GHZ-"), 0.125, 1e-14);
}

TEST(Ghz, RandomCouplingsMatchClosedForm) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> lam(0.2, 3);
    for (int i = 0; i < 20; ++i) {
        double l = lam(rng), r = lam(rng);
        auto rep = run_ghz(with(Variant::ghz, l, r));
        EXPECT_NEAR(rep.total_success_probability, ghz_total(l, r), 1e-12);
        EXPECT_NEAR(rep.min_fidelity(), ghz_fidelity(l, r), 1e-12);
        EXPECT_NEAR(rep.max_fidelity(), ghz_fidelity(l, r), 1e-12);
    }
}

TEST(Ghz, CouplingImbalanceBound) {
    auto rep = run_ghz(with(Variant::ghz, 1.1, 1.0));
    EXPECT_GT(rep.min_fidelity(), 0.98);
    EXPECT_NEAR(rep.min_fidelity(), ghz_fidelity(1.1, 1.0), 1e-12);
}

TEST(WDirect, IdealRun) {
    auto r = run_w_direct(with(Variant::w_direct));
    EXPECT_EQ(r.herald_count(), 4u);
    EXPECT_NEAR(r.total_success_probability, w_direct_total(1, 1), 1e-12);
    EXPECT_NEAR(r.per_target_yield.at("W"), r.per_target_yield.at("W~"), 1e-14);
    EXPECT_NEAR(r.min_fidelity(), 1.0, 1e-12);
    EXPECT_NEAR(r.quantities.at("p_prime"), r.total_success_probability, 1e-14);
}

TEST(WDirect, FidelityIgnoresCouplingsAndTransmittance) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> lam(0.2, 3), tr(0.1, 0.9);
    for (int i = 0; i < 20; ++i) {
        auto p = with(Variant::w_direct, lam(rng), lam(rng));
        p.bs_transmittance = tr(rng);
        auto r = run_w_direct(p);
        EXPECT_NEAR(r.total_success_probability,
                    w_direct_total(p.coupling.lambda_l, p.coupling.lambda_r, p.bs_transmittance), 1e-12);
        EXPECT_NEAR(r.min_fidelity(), 1.0, 1e-12);
    }
}

TEST(WBunching, StagesAtEqualCouplings) {
    auto r = run_w_bunching(with(Variant::w_bunching));
    EXPECT_NEAR(r.quantities.at("p_t"), 3.0 / 8, 1e-14);
    EXPECT_NEAR(r.quantities.at("p_s"), 1.0 / 4, 1e-14);
    EXPECT_NEAR(r.quantities.at("p_prime"), 1.0 / 4, 1e-14);
    EXPECT_NEAR(r.total_success_probability, r.quantities.at("stage_product"), 1e-14);
    EXPECT_NEAR(r.total_success_probability, 3.0 / 128, 1e-14);
    EXPECT_NEAR(r.min_fidelity(), 1.0, 1e-12);
    EXPECT_EQ(r.herald_count(), 4u);
}

TEST(WBunching, BothInTPrimeClosedForm) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> lam(0.2, 3);
    for (int i = 0; i < 10; ++i) {
        double l = lam(rng), rr = lam(rng), w4 = std::pow(l * l + rr * rr, 2), x = l * l * rr * rr;
        auto st = w_bunching_stages(with(Variant::w_bunching, l, rr));
        EXPECT_NEAR(st.p_t, (w4 - x) / (2 * w4), 1e-13);
        EXPECT_NEAR(st.p_s_port, st.p_t, 1e-13);
    }
}

TEST(WBunching, ExtensionsDoubleTheYield) {
    double base = run_w_bunching(with(Variant::w_bunching)).total_success_probability;
    double f2 = run_w_bunching(with(Variant::w_bunching_with_f2)).total_success_probability;
    double all = run_w_bunching(with(Variant::w_bunching_with_f1_aux)).total_success_probability;
    EXPECT_NEAR(f2, 2 * base, 1e-14);
    EXPECT_NEAR(all, 4 * base, 1e-14);
    auto p = with(Variant::w_bunching);
    p.with_f1_aux = true;
    EXPECT_NEAR(run_w_bunching(p).total_success_probability, 2 * base, 1e-14);
}

TEST(WBunching, NotesAdjudicateBothExpressions) {
    auto r = run_w_bunching(with(Variant::w_bunching));
    bool found = false;
    for (const auto& n : r.notes) {
        if (n.rfind("p_s computed", 0) == 0) {
            found = true;
            EXPECT_NE(n.find("(matches)"), std::string::npos);
            EXPECT_NE(n.find("(does not match)"), std::string::npos);
        }
    }
    EXPECT_TRUE(found);
}

TEST(Ledger, ClosesForEveryVariantWithVacuumKept) {
    for (auto v : {Variant::ghz, Variant::w_direct, Variant::w_bunching, Variant::w_bunching_with_f2,
                   Variant::w_bunching_with_f1_aux}) {
        for (double theta : {std::numbers::pi / 2, 1.0}) {
            auto p = with(v, 1.3, 0.8);
            p.keep_vacuum_term = true;
            p.coupling.theta = theta;
            auto r = run_protocol(p);
            EXPECT_NEAR(r.input_norm, 1.0, 1e-12);
            EXPECT_NEAR(r.total_success_probability + r.not_heralded + r.discarded, 1.0, 1e-10) << r.variant;
        }
    }
}

TEST(Ledger, PartialEmissionScalesYield) {
    auto p = with(Variant::ghz);
    p.keep_vacuum_term = true;
    p.coupling.theta = 1.0;
    EXPECT_NEAR(run_ghz(p).total_success_probability, 0.25 * std::pow(std::sin(1.0), 6), 1e-12);
}

TEST(Scaling, OnlyTheCouplingRatioMatters) {
    for (auto v : {Variant::ghz, Variant::w_direct, Variant::w_bunching}) {
        auto a = run_protocol(with(v, 1.2, 0.9));
        auto b = run_protocol(with(v, 1.2 * 3.7, 0.9 * 3.7));
        ASSERT_EQ(a.outcomes.size(), b.outcomes.size());
        EXPECT_NEAR(a.total_success_probability, b.total_success_probability, 1e-13);
        for (std::size_t i = 0; i < a.outcomes.size(); ++i) {
            EXPECT_EQ(a.outcomes[i].record.pattern, b.outcomes[i].record.pattern);
            EXPECT_NEAR(a.outcomes[i].record.probability, b.outcomes[i].record.probability, 1e-13);
        }
    }
}

TEST(Sweep, CouplingRatioRowsInOrder) {
    auto rows = sweep_coupling_ratio(with(Variant::ghz), {1.0, 1.1, 0.5}, 3);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[1].parameter, 1.1);
    EXPECT_NEAR(rows[0].min_fidelity, 1.0, 1e-12);
    EXPECT_GT(rows[1].min_fidelity, 0.98);
    EXPECT_NEAR(rows[2].total_probability, ghz_total(0.5, 1.0), 1e-12);
    EXPECT_THROW(sweep_coupling_ratio(with(Variant::ghz), {0.0}), StateError);
}

TEST(Sweep, WFidelityPinnedAtOne) {
    auto rows = sweep_coupling_ratio(with(Variant::w_direct), {2.0});
    EXPECT_NEAR(rows[0].min_fidelity, 1.0, 1e-12);
    EXPECT_LT(rows[0].total_probability, w_direct_total(1, 1));
    auto ts = sweep_bs_imbalance(with(Variant::w_direct), {0.5, 0.6, 1.0});
    EXPECT_NEAR(ts[0].total_probability, w_direct_total(1, 1), 1e-12);
    EXPECT_NEAR(ts[1].min_fidelity, 1.0, 1e-12);
    EXPECT_NEAR(ts[2].total_probability, 0.0, 1e-15);
    EXPECT_THROW(sweep_bs_imbalance(with(Variant::w_direct), {1.2}), StateError);
}

TEST(Sweep, ThreadCountDoesNotChangeRows) {
    std::vector<double> ratios = {0.5, 0.8, 1.0, 1.1, 2.0};
    auto a = sweep_coupling_ratio(with(Variant::w_bunching), ratios, 1);
    auto b = sweep_coupling_ratio(with(Variant::w_bunching), ratios, 4);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].total_probability, b[i].total_probability);
        EXPECT_EQ(a[i].min_fidelity, b[i].min_fidelity);
    }
}

TEST(Variants, NamesRoundTrip) {
    for (auto v : {Variant::ghz, Variant::w_direct, Variant::w_bunching, Variant::w_bunching_with_f2,
                   Variant::w_bunching_with_f1_aux}) {
        EXPECT_EQ(parse_variant(variant_name(v)), v);
    }
    EXPECT_EQ(parse_variant("w_direct"), Variant::w_direct);
    EXPECT_FALSE(parse_variant("bogus"));
}
