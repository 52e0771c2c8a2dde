#include <etm/counting.hpp>
#include <etm/lattes.hpp>

#include <gtest/gtest.h>

#include <random>
#include <set>

using namespace etm;

namespace {

const Model& lattes2() {
    static Model M(lattes_rule(2));
    return M;
}
const Model& lattes3() {
    static Model M(lattes_rule(3));
    return M;
}

Potential test_phi(const Model& M) {
    std::vector<Rational> v;
    for (int t = 0; t < M.T; ++t) v.push_back(Rational(t % 3 + 1) + Rational(t, 7));
    return Potential(M, 1, v);
}

const OrbitLedger& ledger2() {
    static OrbitLedger L = primitive_orbits(test_phi(lattes2()), 7);
    return L;
}

}  // namespace

TEST(Orbits, SieveIdentity) {
    for (const Model* M : {&lattes2(), &lattes3()}) {
        const int P = M == &lattes2() ? 6 : 4;
        auto L = primitive_orbits(Potential::constant(*M, 1), P);
        for (int n = 1; n <= P; ++n) {
            long long points = 0;
            BigInt weighted = 0;
            for (const auto& o : L.orbits) {
                if (n % o.period) continue;
                points += o.period;
                BigInt w = 1;
                for (int r = 0; r < n / o.period; ++r) w *= o.degree_weight;
                weighted += o.period * w;
            }
            FixedPointLedger F(*M, n, false);
            EXPECT_EQ(points, static_cast<long long>(F.points().size())) << "n=" << n;
            BigInt expect = 1;
            for (int r = 0; r < n; ++r) expect *= M->deg;
            EXPECT_EQ(weighted, expect + 1) << "n=" << n;
        }
    }
}

TEST(Orbits, LengthsForConstant) {
    auto L = primitive_orbits(Potential::constant(lattes2(), Rational(3, 2)), 5);
    for (const auto& o : L.orbits) EXPECT_EQ(o.length, Rational(3, 2) * o.period);
    EXPECT_DOUBLE_EQ(L.horizon, 7.5);
}

TEST(Orbits, RepresentativesUniqueAndSorted) {
    const auto& L = ledger2();
    std::set<std::string> seen;
    for (std::size_t i = 0; i < L.orbits.size(); ++i) {
        EXPECT_TRUE(seen.insert(L.orbits[i].representative).second) << L.orbits[i].representative;
        if (i) EXPECT_TRUE(L.orbits[i - 1] < L.orbits[i]);
    }
}

TEST(Orbits, HorizonFromBirkhoffMinima) {
    // phi = 1 + beta o sigma - beta has negative values but every orbit length is its period
    const Model& M = lattes2();
    std::vector<Rational> b;
    for (int t = 0; t < M.T; ++t) b.push_back(Rational(3 * (t % 2)));
    auto phi = Potential::coboundary(1, Potential(M, 1, b));
    ASSERT_LT(phi.min_value(), 0);
    auto rate = length_rate(phi);
    ASSERT_TRUE(rate.has_value());
    EXPECT_GT(*rate, 0);
    EXPECT_LE(*rate, 1.0 + 1e-12);
    auto L = primitive_orbits(phi, 4);
    for (const auto& o : L.orbits) EXPECT_EQ(o.length, Rational(o.period));
    EXPECT_FALSE(length_rate(Potential::constant(M, 0)).has_value());
    EXPECT_THROW(primitive_orbits(phi, 0), std::invalid_argument);
}

TEST(Li, KnownValues) {
    EXPECT_EQ(li(2.0), 0.0);
    EXPECT_NEAR(li(10.0), 5.120435724669805, 1e-10);
    EXPECT_NEAR(li(1e6), 78626.50382, 1e-3);
    EXPECT_LT(li(1.5), 0.0);
    // 78498 primes below a million
    EXPECT_NEAR(78498.0 / li(1e6), 1.0, 0.05);
}

TEST(Li, DomainError) {
    EXPECT_THROW(li(1.0), std::domain_error);
    EXPECT_THROW(li(0.5), std::domain_error);
    EXPECT_THROW(li(std::nan("")), std::domain_error);
}

TEST(Li, DerivativeIsOneOverLog) {
    for (double y : {3.0, 50.0, 1e4}) {
        const double h = 1e-4 * y;
        EXPECT_NEAR((li(y + h) - li(y - h)) / (2 * h), 1 / std::log(y), 1e-6);
    }
}

TEST(PiCount, ConstantPotential) {
    auto L = primitive_orbits(Potential::constant(lattes2(), 1), 5);
    long long cum = 0;
    for (int T = 1; T <= 5; ++T) {
        for (const auto& o : L.orbits) cum += o.period == T;
        EXPECT_EQ(pi_count(L, T), cum);
        EXPECT_EQ(pi_count(L, T - 1e-9), cum - static_cast<long long>(std::count_if(
                                                    L.orbits.begin(), L.orbits.end(),
                                                    [&](const OrbitRecord& o) { return o.period == T; })));
    }
    EXPECT_THROW(pi_count(L, 5.5), HorizonError);
    try {
        pi_count(L, 6);
    } catch (const HorizonError& e) {
        EXPECT_DOUBLE_EQ(e.horizon(), 5.0);
    }
}

TEST(PiCount, Monotone) {
    const auto& L = ledger2();
    long long prev = 0;
    for (double T = 0.5; T <= L.horizon; T += 0.25) {
        long long c = pi_count(L, T);
        EXPECT_GE(c, prev);
        prev = c;
    }
}

TEST(PiCount, ScalingThePotential) {
    const Model& M = lattes2();
    auto phi = test_phi(M);
    std::vector<Rational> v;
    for (int t = 0; t < M.T; ++t) v.push_back(2 * phi.dat(t));
    auto phi2 = Potential(M, 1, v);
    auto L1 = primitive_orbits(phi, 6), L2 = primitive_orbits(phi2, 6);
    EXPECT_NEAR(s0(phi2), s0(phi) / 2, 1e-9);
    for (double T : {1.0, 2.5, 4.0, 6.0}) EXPECT_EQ(pi_count(L2, 2 * T), pi_count(L1, T));
}

TEST(Pot, LatticeFlag) {
    const Model& M = lattes2();
    std::vector<double> grid{1, 2, 3, 4};
    auto one = Potential::constant(M, 1);
    auto r1 = pot_report(one, primitive_orbits(one, 4), grid);
    EXPECT_TRUE(r1.lattice);
    ASSERT_TRUE(r1.K.has_value());
    EXPECT_EQ(*r1.K, Rational(1));
    EXPECT_EQ(r1.distinct_lengths, 4u);
    EXPECT_NEAR(r1.s0, std::log(4.0), 1e-9);

    std::mt19937 g(4);
    for (int trial = 0; trial < 3; ++trial) {
        std::vector<Rational> b;
        for (int t = 0; t < M.T; ++t) b.push_back(Rational(static_cast<int>(g() % 7) - 3, 2));
        const Rational c(static_cast<int>(1 + g() % 5), 3);
        auto phi = Potential::coboundary(c, Potential(M, 1, b));
        auto L = primitive_orbits(phi, 4);
        auto r = pot_report(phi, L, {0.5, 1.0});
        EXPECT_TRUE(r.lattice);
        ASSERT_TRUE(r.K.has_value());
        EXPECT_EQ(*r.K, c);
    }

    auto phi = test_phi(M);
    auto rt = pot_report(phi, ledger2(), grid);
    EXPECT_FALSE(rt.lattice);
    EXPECT_GT(rt.distinct_lengths, 7u);
}

TEST(Pot, RatiosAndTrend) {
    auto phi = test_phi(lattes2());
    const auto& L = ledger2();
    std::vector<double> grid;
    for (int T = 1; T <= 7; ++T) grid.push_back(T);
    auto r = pot_report(phi, L, grid);
    ASSERT_EQ(r.rows.size(), grid.size());
    EXPECT_GT(r.s0, 0);
    for (const auto& row : r.rows) {
        EXPECT_EQ(row.pi, pi_count(L, row.T));
        ASSERT_TRUE(row.Li.has_value());
        EXPECT_NEAR(*row.Li, li(std::exp(r.s0 * row.T)), 1e-12 * std::max(1.0, *row.Li));
    }
    ASSERT_TRUE(r.rows.back().ratio.has_value());
    EXPECT_GT(*r.rows.back().ratio, 0.1);
    EXPECT_LT(*r.rows.back().ratio, 10);
    EXPECT_TRUE(r.trend_slope.has_value());
    EXPECT_THROW(pot_report(phi, L, {L.horizon + 1}), HorizonError);
}

TEST(Ledger, RoundTrip) {
    const auto& L = ledger2();
    auto text = export_ledger(L);
    auto back = parse_ledger(text);
    EXPECT_EQ(back.p_max, L.p_max);
    EXPECT_DOUBLE_EQ(back.horizon, L.horizon);
    EXPECT_EQ(back.orbits, L.orbits);
    EXPECT_EQ(export_ledger(back), text);
}

TEST(Ledger, RoundTripWithDegrees) {
    // Lattes post points have local degree 1, so exercise a large weight by hand
    auto L = primitive_orbits(Potential::constant(lattes2(), Rational(1, 3)), 3);
    L.orbits.push_back({9, "P:0", Rational(-7, 3), BigInt("123456789012345678901234567890"), PointClass::postcritical});
    EXPECT_EQ(parse_ledger(export_ledger(L)).orbits, L.orbits);
}

TEST(Ledger, RejectsMalformed) {
    auto text = export_ledger(primitive_orbits(Potential::constant(lattes2(), 1), 2));
    EXPECT_THROW(parse_ledger("# etm-ledger v0\n" + text.substr(text.find('\n') + 1)), std::invalid_argument);
    auto hdr = text.find(kLedgerHeader);
    auto bad = text;
    bad.replace(hdr, std::string(kLedgerHeader).size(), "period,length");
    EXPECT_THROW(parse_ledger(bad), std::invalid_argument);
    EXPECT_THROW(parse_ledger(text + "1,x,1,1,nowhere\n"), std::invalid_argument);
    EXPECT_THROW(parse_ledger(text + "1,x,abc,1,tile-interior\n"), std::invalid_argument);
    EXPECT_THROW(parse_ledger(text + "1,x\n"), std::invalid_argument);
    EXPECT_THROW(import_ledger("/nonexistent/ledger.csv"), std::runtime_error);
}

TEST(Orbits, HorizonCheckOneBeyond) {
    auto phi = test_phi(lattes2());
    auto h = horizon_check(phi, primitive_orbits(phi, 4));
    EXPECT_EQ(h.period, 5);
    EXPECT_GT(h.scanned, 0u);
    EXPECT_TRUE(h.ok());
    // a forged horizon far beyond the certified one is caught
    auto L = primitive_orbits(phi, 4);
    L.horizon = 100;
    EXPECT_FALSE(horizon_check(phi, L).ok());
}
