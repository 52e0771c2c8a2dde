#include <etm/fixed_points.hpp>
#include <etm/integrability.hpp>
#include <etm/lattes.hpp>
#include <etm/metric.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace etm;

namespace {

const Model& lattes2() {
    static Model M(lattes_rule(2));
    return M;
}

Potential test_phi(const Model& M) {
    std::vector<Rational> v;
    for (int t = 0; t < M.T; ++t) v.push_back(Rational(t % 3 + 1) + Rational(t, 7));
    return Potential(M, 1, v);
}

Potential random_potential(const Model& M, int k, std::mt19937& g) {
    WordCodec codec(M);
    std::vector<Rational> v;
    for (std::uint64_t r = 0; r < codec.total(k); ++r)
        v.push_back(Rational(static_cast<int>(g() % 11) - 5, static_cast<int>(1 + g() % 4)));
    return Potential(M, k, v);
}

// tiles X whose constant coding X^inf is an interior fixed point of f
std::vector<int> self_loops(const Model& M) {
    std::vector<int> out;
    FixedPointLedger L(M, 1, false);
    for (const auto& x : L.points())
        if (x.key.cls == PointClass::tile_interior) out.push_back(x.key.word[0]);
    return out;
}

}  // namespace

TEST(VisualMetric, EqualPointsAtZero) {
    const Model& M = lattes2();
    Hierarchy H(M);
    VisualMetricParams p;
    FixedPointLedger L(M, 2, false);
    for (const auto& x : L.points()) EXPECT_EQ(visual_distance(H, x.code, x.code, p), 0.0);
}

TEST(VisualMetric, NonAdjacentOneTilesGiveLambdaInverse) {
    const Model& M = lattes2();
    Hierarchy H(M);
    VisualMetricParams p{3.0, 1.0};
    const auto& L1 = H.level(1);
    int found = 0;
    for (int a = 0; a < M.T; ++a)
        for (int b = 0; b < M.T; ++b) {
            if (L1.intersect(a, b)) continue;
            // X followed by an interior periodic point
            CodedPoint x{{a}, detail::interior_tails(M, M.color[a]).first};
            CodedPoint y{{b}, detail::interior_tails(M, M.color[b]).first};
            EXPECT_DOUBLE_EQ(visual_distance(H, x, y, p), 1.0 / 3.0);
            ++found;
        }
    EXPECT_GT(found, 0);
}

TEST(VisualMetric, VertexSharingTilesSeparateLater) {
    // interior fixed points in distinct 1-tiles that share only a vertex sit at Lambda^-2
    const Model& M = lattes2();
    Hierarchy H(M);
    VisualMetricParams p;
    const auto& L1 = H.level(1);
    auto loops = self_loops(M);
    int checked = 0;
    for (int a : loops)
        for (int b : loops) {
            if (a == b || !L1.intersect(a, b)) continue;
            double d = visual_distance(H, {{}, {a}}, {{}, {b}}, p);
            EXPECT_LE(d, 0.25);
            EXPECT_GT(d, 0.0);
            ++checked;
        }
    for (int a : loops)
        for (int b : loops)
            if (a != b && !L1.intersect(a, b)) EXPECT_DOUBLE_EQ(visual_distance(H, {{}, {a}}, {{}, {b}}, p), 0.5);
    EXPECT_GT(checked, 0);
}

TEST(VisualMetric, SymmetricAndLevelConsistent) {
    const Model& M = lattes2();
    Hierarchy H(M);
    VisualMetricParams p;
    FixedPointLedger L(M, 2, false);
    const auto& P = L.points();
    for (std::size_t i = 0; i < P.size(); ++i)
        for (std::size_t j = i + 1; j < P.size(); ++j) {
            ResolvedPoint x(M, P[i].code), y(M, P[j].code);
            auto s = separation(H, x, y);
            ASSERT_FALSE(s.equal);
            EXPECT_GE(s.level(), 1);
            double d = visual_distance(H, P[i].code, P[j].code, p);
            EXPECT_DOUBLE_EQ(d, visual_distance(H, P[j].code, P[i].code, p));
            EXPECT_DOUBLE_EQ(d, std::pow(2.0, -s.level()));
            // tiles containing x and y meet at level m and at every coarser level
            for (int n = 1; n <= s.m; ++n) {
                bool meet = false;
                for (const auto& a : tiles_containing(M, x, n))
                    for (const auto& b : tiles_containing(M, y, n)) meet = meet || H.level(n).intersect(H.tile_of(a), H.tile_of(b));
                EXPECT_TRUE(meet);
            }
        }
}

TEST(VisualMetric, BadParamsRejected) {
    EXPECT_THROW((VisualMetricParams{1.0, 1.0}.check()), std::invalid_argument);
    EXPECT_THROW((VisualMetricParams{2.0, 0.0}.check()), std::invalid_argument);
    EXPECT_THROW((VisualMetricParams{2.0, 1.5}.check()), std::invalid_argument);
}

TEST(Holder, ConstantIsZero) {
    const Model& M = lattes2();
    Hierarchy H(M);
    EXPECT_EQ(holder_seminorm(H, Potential::constant(M, Rational(7, 3)), {}), 0.0);
}

TEST(Holder, IndicatorOnLattes2) {
    const Model& M = lattes2();
    Hierarchy H(M);
    for (int t = 0; t < M.T; ++t) EXPECT_DOUBLE_EQ(holder_seminorm(H, Potential::indicator(M, t, 1), {2.0, 1.0}), 4.0);
}

TEST(Holder, Homogeneous) {
    const Model& M = lattes2();
    Hierarchy H(M);
    auto phi = test_phi(M);
    double base = holder_seminorm(H, phi, {});
    EXPECT_GT(base, 0.0);
    EXPECT_NEAR(holder_seminorm(H, phi.scaled(Rational(-5, 2)), {}), 2.5 * base, 1e-12 * base);
    std::mt19937 g(3);
    auto psi = random_potential(M, 2, g);
    EXPECT_NEAR(holder_seminorm(H, psi.scaled(3), {}), 3 * holder_seminorm(H, psi, {}), 1e-9);
}

TEST(Birkhoff, Basics) {
    const Model& M = lattes2();
    auto phi = test_phi(M);
    FixedPointLedger L(M, 1, false);
    for (const auto& x : L.points()) {
        EXPECT_EQ(birkhoff_sum(phi, x.code, 0), Rational(0));
        EXPECT_EQ(birkhoff_sum(Potential::constant(M, Rational(2, 3)), x.code, 5), Rational(10, 3));
        EXPECT_EQ(birkhoff_sum(phi, x.code, 4), 4 * point_value(phi, x.code));
    }
}

TEST(Birkhoff, CoboundaryIsExactAtFixedPoints) {
    // S_n(c + beta o f - beta)(x) = n c at every fixed point of f^n
    const Model& M = lattes2();
    std::mt19937 g(11);
    for (int kb = 1; kb <= 2; ++kb) {
        auto phi = Potential::coboundary(Rational(3, 2), random_potential(M, kb, g));
        for (int n = 1; n <= 3; ++n) {
            FixedPointLedger L(M, n, false);
            for (const auto& x : L.points()) EXPECT_EQ(birkhoff_sum(phi, x.code, n), Rational(3, 2) * n) << key_string(M, x.key);
        }
    }
}

TEST(TemporalDistance, TrivialCases) {
    const Model& M = lattes2();
    auto phi = test_phi(M);
    PointValueCache pv(phi);
    auto loops = self_loops(M);
    int checked = 0;
    for (int X : loops) {
        auto pts = sample_points(M, X);
        for (int xi = 0; xi < M.T; ++xi)
            for (int eta = 0; eta < M.T; ++eta) {
                if (M.color[xi] != M.color[eta] || M.color[xi] != M.face[X]) continue;
                for (std::size_t i = 0; i < pts.size() && i < 4; ++i) {
                    auto same = temporal_distance(pv, {xi}, {eta}, pts[i], pts[i]);
                    if (same) EXPECT_EQ(*same, Rational(0));
                    for (std::size_t j = 0; j < pts.size() && j < 4; ++j) {
                        auto d = temporal_distance(pv, {xi}, {xi}, pts[i], pts[j]);
                        if (d) {
                            EXPECT_EQ(*d, Rational(0));
                            ++checked;
                        }
                    }
                }
            }
    }
    EXPECT_GT(checked, 0);
}

TEST(TemporalDistance, Antisymmetric) {
    const Model& M = lattes2();
    auto phi = test_phi(M);
    PointValueCache pv(phi);
    int X = self_loops(M)[0];
    auto pts = sample_points(M, X);
    for (int xi = 0; xi < M.T; ++xi)
        for (int eta = 0; eta < M.T; ++eta) {
            if (M.color[xi] != M.face[X] || M.color[eta] != M.face[X]) continue;
            auto a = temporal_distance(pv, {xi}, {eta}, pts[0], pts[1]);
            auto b = temporal_distance(pv, {eta}, {xi}, pts[0], pts[1]);
            auto c = temporal_distance(pv, {xi}, {eta}, pts[1], pts[0]);
            if (a && b && c) {
                EXPECT_EQ(*a, -*b);
                EXPECT_EQ(*a, -*c);
            }
        }
}

TEST(TemporalDistance, CoboundaryVanishes) {
    const Model& M = lattes2();
    std::mt19937 g(5);
    for (int trial = 0; trial < 3; ++trial) {
        auto phi = Potential::coboundary(Rational(trial - 1, 2), random_potential(M, 1 + trial % 2, g));
        auto v = nli_test(phi, 600);
        EXPECT_TRUE(v.integrable_on_samples);
        EXPECT_FALSE(v.witness.has_value());
        EXPECT_GT(v.samples, v.skipped);
    }
}

TEST(TemporalDistance, InadmissibleDataRejected) {
    const Model& M = lattes2();
    auto phi = test_phi(M);
    int X = self_loops(M)[0];
    auto pts = sample_points(M, X);
    int xi = -1, wrong = -1;
    for (int t = 0; t < M.T; ++t) (M.color[t] == M.face[X] ? xi : wrong) = t;
    EXPECT_THROW(temporal_distance(phi, {}, {xi}, pts[0], pts[1]), std::invalid_argument);
    EXPECT_THROW(temporal_distance(phi, {xi}, {wrong}, pts[0], pts[1]), std::invalid_argument);
}

TEST(Nli, ConstantIsIntegrable) {
    auto v = nli_test(Potential::constant(lattes2(), 2), 500);
    EXPECT_TRUE(v.integrable_on_samples);
}

TEST(Nli, IndicatorHasWitness) {
    const Model& M = lattes2();
    auto v = nli_test(Potential::indicator(M, 0, 1), 5000);
    ASSERT_TRUE(v.witness.has_value());
    EXPECT_NE(v.witness->value, Rational(0));
    // the witness reproduces
    auto d = temporal_distance(Potential::indicator(M, 0, 1), v.witness->xi, v.witness->eta, v.witness->x, v.witness->y);
    ASSERT_TRUE(d.has_value());
    EXPECT_EQ(*d, v.witness->value);
}

TEST(Cohomology, Constants) {
    auto r = cohomology_test(Potential::constant(lattes2(), Rational(5, 7)), 3);
    ASSERT_TRUE(r.K.has_value());
    EXPECT_EQ(*r.K, Rational(5, 7));
}

TEST(Cohomology, CoboundaryGivesExactK) {
    const Model& M = lattes2();
    std::mt19937 g(7);
    for (int trial = 0; trial < 4; ++trial) {
        Rational c(trial * 3 - 2, 5);
        auto r = cohomology_test(Potential::coboundary(c, random_potential(M, 1 + trial % 2, g)), 3);
        ASSERT_TRUE(r.K.has_value());
        EXPECT_EQ(*r.K, c);
    }
}

TEST(Cohomology, GenericHasWitness) {
    const Model& M = lattes2();
    auto r = cohomology_test(test_phi(M), 2);
    EXPECT_FALSE(r.K.has_value());
    EXPECT_NE(r.avg_a, r.avg_b);
    EXPECT_FALSE(r.witness_a.empty());
}

TEST(Sni, ConstantAndCoboundaryGiveZero) {
    const Model& M = lattes2();
    Hierarchy H(M);
    SniParams p;
    std::vector<Word> cand{{0}, {1}};
    auto r = sni_probe(H, Potential::constant(M, 3), p, cand);
    EXPECT_FALSE(r.rows.empty());
    EXPECT_EQ(r.floor, 0.0);
    EXPECT_FALSE(r.clears);
    std::mt19937 g(2);
    auto cob = Potential::coboundary(Rational(1), random_potential(M, 2, g));
    auto rc = sni_probe(H, cob, p, cand);
    EXPECT_EQ(rc.floor, 0.0);
}

TEST(Sni, DeepPotentialClears) {
    const Model& M = lattes2();
    Hierarchy H(M);
    std::mt19937 g(9);
    auto phi = random_potential(M, 3, g);
    SniParams p;
    std::vector<Word> cand;
    for (int t = 0; t < M.T; ++t) cand.push_back({t});
    auto r = sni_probe(H, phi, p, cand);
    EXPECT_GT(r.floor, 0.0);
    EXPECT_TRUE(r.clears);
    EXPECT_THROW(sni_probe(H, phi, SniParams{1, 2, 2, 1}, cand), std::invalid_argument);
}

TEST(Sni, LambdaWarning) {
    const Model& M = lattes2();
    Hierarchy H(M);
    SniParams p;
    p.metric = {4.0, 1.0};
    p.lambda0 = 2.0;
    auto r = sni_probe(H, Potential::constant(M, 1), p, {{0}});
    EXPECT_TRUE(r.lambda_warning);
}
