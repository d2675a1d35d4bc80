#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "photonloom/elements.hpp"
#include "photonloom/oracle.hpp"
#include "test_support.hpp"

using namespace photonloom;
using P = Polarization;
using L = AtomLevel;

namespace {

std::vector<ModeId> port_modes(std::vector<std::string> ports) {
    std::vector<ModeId> m;
    for (auto& p : ports) {
        m.push_back(mode(p, P::H));
        m.push_back(mode(p, P::V));
    }
    return m;
}

// Random transform on up to four of `modes`: a beam splitter, a PBS or a dense unitary.
ModeTransform random_element(const std::vector<ModeId>& modes, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> kind(0, 2);
    std::uniform_real_distribution<double> u(0, 1);
    switch (kind(rng)) {
    case 0:
        return bs("p", "q", "r", "s", u(rng));
    case 1:
        return pbs("q", "r", "s", "p");
    default: {
        std::vector<ModeId> sub = modes;
        std::shuffle(sub.begin(), sub.end(), rng);
        sub.resize(std::uniform_int_distribution<std::size_t>(1, 4)(rng));
        ModeTransform t;
        t.name = "u";
        t.inputs = t.outputs = sub;
        t.matrix = test_support::random_unitary(int(sub.size()), rng);
        return t;
    }
    }
}

}  // namespace

TEST(PhotonBasis, SizesAndOrder) {
    PhotonBasis pb(port_modes({"a", "b"}), 3);
    EXPECT_EQ(pb.size(), 35u);  // C(3+4, 4)
    EXPECT_EQ(pb.counts(0), std::vector<int>(4, 0));
    EXPECT_EQ(PhotonBasis(port_modes({"a", "b", "c"}), 2, 2).size(), 21u);
    for (std::size_t i = 0; i < pb.size(); ++i) {
        EXPECT_EQ(pb.index_of(pb.counts(i)), i);
        auto enc = pb.encode(pb.decode(pb.counts(i)));
        ASSERT_TRUE(enc);
        EXPECT_EQ(*enc, pb.counts(i));
    }
    EXPECT_FALSE(pb.encode({{mode("z", P::H), 1}}));
}

TEST(DenseBasis, RoundTrip) {
    std::mt19937_64 rng(3);
    auto modes = port_modes({"a", "b"});
    DenseBasis basis(2, PhotonBasis(modes, 3));
    EXPECT_EQ(basis.size(), 9u * 35u);
    for (std::size_t k = 0; k < basis.atom_dim(); ++k) EXPECT_EQ(basis.atom_index(basis.atoms_at(k)), k);
    auto s = test_support::random_state(modes, 2, 3, 10, rng);
    auto back = from_dense(to_dense(s, basis), basis);
    EXPECT_LT(test_support::max_gap(s, back), 1e-15);
    EXPECT_EQ(to_dense(new_product_state({L::ground_l, L::ground_l}), basis)(0), complex(1.0));
}

TEST(DenseLift, IdentityAndSinglePhotonBlock) {
    auto modes = port_modes({"a", "b", "c", "d"});
    PhotonBasis pb(modes, 3);
    auto id = dense_lift(identity_transform(modes), pb);
    EXPECT_LT((id - Eigen::MatrixXcd::Identity(id.rows(), id.cols())).norm(), 1e-14);

    auto t = bs("a", "b", "c", "d", 0.3);
    auto u = dense_lift(t, pb);
    auto m = single_photon_map(t, pb);
    for (std::size_t i = 0; i < pb.size(); ++i) {
        for (std::size_t j = 0; j < pb.size(); ++j) {
            const auto &ci = pb.counts(i), &cj = pb.counts(j);
            int ni = 0, nj = 0, ki = 0, kj = 0;
            for (std::size_t k = 0; k < ci.size(); ++k) {
                ni += ci[k];
                nj += cj[k];
                if (ci[k]) ki = int(k);
                if (cj[k]) kj = int(k);
            }
            if (ni == 1 && nj == 1) EXPECT_NEAR(std::abs(u(i, j) - m(ki, kj)), 0, 1e-15);
        }
    }
}

TEST(DenseLift, UnitaryOnEveryPhotonNumber) {
    std::mt19937_64 rng(5);
    auto modes = port_modes({"a", "b", "c"});
    ModeTransform t;
    t.name = "u";
    t.inputs = t.outputs = modes;
    t.matrix = test_support::random_unitary(6, rng);
    auto u = dense_lift(t, PhotonBasis(modes, 3));
    EXPECT_LT((u.adjoint() * u - Eigen::MatrixXcd::Identity(u.rows(), u.cols())).norm(), 1e-12);
}

TEST(Permanent, SmallCases) {
    EXPECT_EQ(permanent(Eigen::MatrixXcd(0, 0)), complex(1.0));
    EXPECT_NEAR(std::abs(permanent(Eigen::MatrixXcd::Ones(4, 4)) - 24.0), 0, 1e-12);
    Eigen::MatrixXcd m(2, 2);
    m << 1, 2, 3, 4;
    EXPECT_NEAR(std::abs(permanent(m) - 10.0), 0, 1e-14);
}

TEST(OracleApply, AgreesWithSparseEngineOnRandomCircuits) {
    std::mt19937_64 rng(77);
    auto modes = port_modes({"p", "q", "r", "s"});
    for (int i = 0; i < 200; ++i) {
        auto s = test_support::random_state(modes, 1, 3, 6, rng);
        HybridState sparse = s, dense = s;
        for (int k = 0; k < 3; ++k) {
            auto t = random_element(modes, rng);
            sparse = lift_apply(sparse, t);
            dense = oracle_apply(dense, t, 3);
        }
        ASSERT_LT(test_support::max_gap(sparse, dense), 1e-10) << "circuit " << i;
    }
}

TEST(OracleInput, MatchesEmission) {
    CouplingParams c{1.3, 0.6, 1.1};
    auto in = oracle_input(c, true, {"A", "B"});
    EXPECT_NEAR(in.squared_norm(), 1.0, 1e-14);
    auto shared = oracle_input(c, false, {"1", "2", "3"}, std::string("OUT"));
    EXPECT_NEAR(shared.squared_norm(), std::pow(std::sin(1.1), 6), 1e-14);
}

TEST(VerifyProtocol, EveryVariantAgrees) {
    for (auto v : {Variant::ghz, Variant::w_direct, Variant::w_bunching, Variant::w_bunching_with_f2,
                   Variant::w_bunching_with_f1_aux}) {
        ProtocolParams p;
        p.variant = v;
        p.coupling.lambda_l = 1.2;
        auto r = verify_protocol(p);
        EXPECT_TRUE(r.passed) << r.variant;
        EXPECT_LT(r.max_amplitude_deviation, 1e-10);
        EXPECT_LT(r.max_probability_deviation, 1e-10);
        EXPECT_NEAR(r.sparse_total, r.dense_total, 1e-10);
        EXPECT_GT(r.terms_compared, 0u);
    }
}

TEST(VerifyProtocol, DenseStagesForBunching) {
    ProtocolParams p;
    p.variant = Variant::w_bunching;
    auto r = verify_protocol(p);
    ASSERT_TRUE(r.dense_p_t && r.dense_p_s && r.dense_p_prime && r.dense_product);
    EXPECT_NEAR(*r.dense_p_t, 3.0 / 8, 1e-12);
    EXPECT_NEAR(*r.dense_p_s, 1.0 / 4, 1e-12);
    EXPECT_NEAR(*r.dense_product, r.dense_total, 1e-12);
    EXPECT_NEAR(r.ps_expr_a, 0.25, 1e-15);
    EXPECT_NEAR(r.ps_expr_b, 1.0 / 6, 1e-15);
}
