#include <etm/lattes.hpp>
#include <etm/thermo.hpp>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <random>

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

Potential random_potential(const Model& M, int k, unsigned seed) {
    std::mt19937 g(seed);
    WordCodec codec(M);
    std::vector<Rational> v;
    for (std::uint64_t r = 0; r < codec.total(k); ++r)
        v.push_back(Rational(static_cast<int>(g() % 11) - 5, static_cast<int>(1 + g() % 4)));
    return Potential(M, k, v);
}

// dense matrix of an operator, column j = L e_j
Eigen::MatrixXd dense(const RuelleOperator& L) {
    const auto N = static_cast<Eigen::Index>(L.size());
    Eigen::MatrixXd A(N, N);
    for (Eigen::Index j = 0; j < N; ++j) {
        std::vector<double> e(L.size(), 0.0);
        e[j] = 1;
        auto c = L.apply(e);
        for (Eigen::Index i = 0; i < N; ++i) A(i, j) = c[i];
    }
    return A;
}

std::vector<double> sorted_moduli(const Eigen::MatrixXd& A) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(A);
    std::vector<double> m;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) m.push_back(std::abs(es.eigenvalues()[i]));
    std::sort(m.rbegin(), m.rend());
    return m;
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double e = 0;
    for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, std::abs(a[i] - b[i]));
    return e;
}

}  // namespace

TEST(Operator, MatchesDirectDefinition) {
    // depth-1 potential on depth-1 functions: (L u)(Y) = sum_{X -> Y} e^{phi(X)} u(X)
    const Model& M = lattes2();
    auto phi = test_phi(M);
    auto L = ruelle_operator(M, real_potential(phi), 1);
    std::vector<double> u(M.T);
    for (int i = 0; i < M.T; ++i) u[i] = 0.5 + i;
    auto v = L.apply(u);
    for (int Y = 0; Y < M.T; ++Y) {
        double s = 0;
        for (int X = 0; X < M.T; ++X)
            if (M.admissible(X, Y)) s += std::exp(phi.dat(X)) * u[X];
        EXPECT_NEAR(v[Y], s, 1e-12 * s);
    }
    // transpose is the adjoint
    std::vector<double> m(M.T);
    for (int i = 0; i < M.T; ++i) m[i] = 1.0 / (i + 1);
    auto mt = L.apply_transpose(m);
    double lhs = 0, rhs = 0;
    for (int i = 0; i < M.T; ++i) lhs += m[i] * v[i], rhs += mt[i] * u[i];
    EXPECT_NEAR(lhs, rhs, 1e-10 * std::abs(lhs));
}

TEST(Operator, DepthMismatchRejected) {
    const Model& M = lattes2();
    auto psi = real_potential(random_potential(M, 3, 1));
    EXPECT_THROW(ruelle_operator(M, psi, 1), std::invalid_argument);
    EXPECT_NO_THROW(ruelle_operator(M, psi, 2));
    auto L = ruelle_operator(M, psi, 2);
    EXPECT_THROW(L.apply(std::vector<double>(3, 1.0)), std::invalid_argument);
}

TEST(Operator, ComplexWithZeroImaginaryMatchesReal) {
    const Model& M = lattes2();
    auto phi = random_potential(M, 2, 4);
    auto re = real_potential(phi, -0.7);
    RealPotential im{re.k, std::vector<double>(re.v.size(), 0.0)};
    auto L = ruelle_operator(M, re, 2);
    auto C = complex_ruelle_operator(M, re, im, 2);
    std::vector<double> u(L.size());
    std::vector<std::complex<double>> uc(L.size());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::sin(1.0 + i), uc[i] = u[i];
    auto a = ruelle_apply(L, u, 3);
    auto b = ruelle_apply(C, uc, 3);
    for (std::size_t i = 0; i < u.size(); ++i) {
        EXPECT_NEAR(b[i].real(), a[i], 1e-12 * (1 + std::abs(a[i])));
        EXPECT_NEAR(b[i].imag(), 0.0, 1e-12);
    }
}

TEST(Pressure, MatchesDenseSpectralRadius) {
    for (const Model* M : {&lattes2(), &lattes3()})
        for (int k = 1; k <= 2; ++k) {
            auto phi = random_potential(*M, k, 10 + k);
            for (double t : {1.0, -0.5, 2.0}) {
                auto L = ruelle_operator(*M, real_potential(phi, t), k);
                double rho = sorted_moduli(dense(L))[0];
                EXPECT_NEAR(pressure(phi, t), std::log(rho), 1e-10) << k << " " << t;
            }
        }
}

TEST(Pressure, ConstantsAndLifts) {
    const Model& M = lattes2();
    EXPECT_NEAR(pressure(Potential::constant(M, 0), 1), std::log(4.0), 1e-12);
    EXPECT_NEAR(pressure(Potential::constant(M, Rational(3, 2)), 2), std::log(4.0) + 3, 1e-12);
    EXPECT_NEAR(pressure(Potential::constant(lattes3(), 1), -1), std::log(9.0) - 1, 1e-12);
    auto phi = test_phi(M);
    double p = pressure(phi, 0.8);
    EXPECT_NEAR(pressure(phi.lifted(2), 0.8), p, 1e-10);
    EXPECT_NEAR(pressure(phi.lifted(3), 0.8), p, 1e-10);
    // a coboundary shifts pressure by its constant only
    auto cob = Potential::coboundary(Rational(2), random_potential(M, 1, 8));
    EXPECT_NEAR(pressure(cob, 1), std::log(4.0) + 2, 1e-10);
}

TEST(Pressure, StrictlyDecreasingInT) {
    auto phi = test_phi(lattes2());
    std::vector<double> ts;
    for (int i = 0; i <= 20; ++i) ts.push_back(-1.0 + 0.2 * i);
    EXPECT_TRUE(strictly_decreasing(pressure_curve(phi, ts)));
}

TEST(Positivity, BirkhoffMinimaMatchBruteForce) {
    const Model& M = lattes2();
    auto phi = random_potential(M, 2, 21);
    auto c = birkhoff_minima(phi, 4);
    WordCodec codec(M);
    for (int n = 1; n <= 4; ++n) {
        std::optional<Rational> best;
        for (std::uint64_t r = 0; r < codec.total(n + 1); ++r) {
            Word w = codec.decode(r, n + 1);
            Rational s = 0;
            for (int j = 0; j < n; ++j) s += phi.value(Word(w.begin() + j, w.begin() + j + 2));
            if (!best || s < *best) best = s;
        }
        EXPECT_EQ(c[n - 1], *best) << n;
    }
}

TEST(Positivity, EventuallyButNotImmediately) {
    // 1 + beta o f - beta with a large beta: negative somewhere, S_n = n + O(1) > 0 for large n
    const Model& M = lattes2();
    std::vector<Rational> b(M.T, Rational(0));
    b[0] = 5;
    auto phi = Potential::coboundary(1, Potential(M, 1, b));
    EXPECT_LT(phi.min_value(), 0);
    auto ep = eventual_positivity(phi);
    ASSERT_TRUE(ep.has_value());
    EXPECT_GT(ep->n, 1);
    EXPECT_GT(ep->c, 0);
    EXPECT_FALSE(eventual_positivity(Potential::indicator(M, 0, 1)).has_value());
    EXPECT_THROW(s0(Potential::constant(M, -1)), NotEventuallyPositive);
}

TEST(S0, ConstantPotentials) {
    EXPECT_NEAR(s0(Potential::constant(lattes2(), 1)), std::log(4.0), 1e-9);
    EXPECT_NEAR(s0(Potential::constant(lattes2(), Rational(1, 2))), 2 * std::log(4.0), 1e-9);
    EXPECT_NEAR(s0(Potential::constant(lattes3(), 1)), std::log(9.0), 1e-9);
}

TEST(S0, ZeroOfPressure) {
    auto phi = test_phi(lattes2());
    auto r = s0_ex(phi);
    EXPECT_NEAR(pressure(phi, -r.s0), 0.0, 1e-9);
    ASSERT_GT(r.samples.size(), 3u);
    for (std::size_t i = 1; i < r.samples.size(); ++i) EXPECT_LT(r.samples[i].second, r.samples[i - 1].second);
    // bounds from min and max values: log deg / max <= s0 <= log deg / min
    EXPECT_LE(r.s0, std::log(4.0) / to_double(phi.min_value()) + 1e-12);
    EXPECT_GE(r.s0, std::log(4.0) / to_double(phi.max_value()) - 1e-12);
}

class Normalized : public ::testing::TestWithParam<int> {};

TEST_P(Normalized, TildeFixesOne) {
    const int d = GetParam();
    const Model& M = lattes2();
    auto phi = test_phi(M);
    for (double t : {1.0, -0.4}) {
        auto nd = normalize(phi, t, d);
        EXPECT_NEAR(nd.P, pressure(phi, t), 1e-10);
        auto L = tilde_operator(M, nd);
        auto one = L.apply(std::vector<double>(L.size(), 1.0));
        EXPECT_LT(sup_diff(one, std::vector<double>(L.size(), 1.0)), 1e-10);
        // split form: both colour pieces fixed at 1
        SplitPair<double> p{std::vector<double>(split(L, one).black.size(), 1.0),
                            std::vector<double>(split(L, one).white.size(), 1.0)};
        auto q = split_ruelle_apply(L, p, 1);
        EXPECT_LT(sup_diff(q.black, p.black), 1e-10);
        EXPECT_LT(sup_diff(q.white, p.white), 1e-10);
        double s = 0;
        for (double g : nd.gibbs) {
            EXPECT_GT(g, 0);
            s += g;
        }
        EXPECT_NEAR(s, 1.0, 1e-12);
        for (double u : nd.u) EXPECT_GT(u, 0);
    }
}
INSTANTIATE_TEST_SUITE_P(Depths, Normalized, ::testing::Values(1, 2, 3));

TEST(Normalized, GibbsIsInvariantForTilde) {
    const Model& M = lattes2();
    auto phi = random_potential(M, 2, 31);
    auto nd = normalize(phi, 0.6, 2);
    auto L = tilde_operator(M, nd);
    auto mu = L.apply_transpose(nd.gibbs);
    EXPECT_LT(sup_diff(mu, nd.gibbs), 1e-10);
    // duality: integral of L u equals integral of u
    std::vector<double> u(L.size());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::cos(0.3 * i);
    auto v = L.apply(u);
    double a = 0, b = 0;
    for (std::size_t i = 0; i < u.size(); ++i) a += nd.gibbs[i] * v[i], b += nd.gibbs[i] * u[i];
    EXPECT_NEAR(a, b, 1e-10);
    EXPECT_THROW(normalize(phi, 1, 1), std::invalid_argument);
}

TEST(Split, PiecesSumToSplitOperator) {
    const Model& M = lattes2();
    auto phi = random_potential(M, 2, 41);
    auto L = ruelle_operator(M, real_potential(phi, 0.3), 2);
    std::vector<double> u(L.size());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = 1.0 + 0.1 * static_cast<double>(i % 5);
    auto p = split(L, u);
    for (int n = 1; n <= 3; ++n) {
        auto full = split_ruelle_apply(L, p, n);
        for (Color c : {Color::black, Color::white}) {
            std::vector<double> sum;
            for (Color cp : {Color::black, Color::white}) {
                auto piece = split_ruelle_piece(L, c, words_in_zero_tile(M, cp, n), n, u);
                if (sum.empty()) sum.assign(piece.size(), 0.0);
                for (std::size_t i = 0; i < piece.size(); ++i) sum[i] += piece[i];
            }
            const auto& ref = c == Color::black ? full.black : full.white;
            ASSERT_EQ(sum.size(), ref.size());
            for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(sum[i], ref[i], 1e-10 * std::abs(ref[i]));
        }
    }
}

TEST(Split, EdgeCases) {
    const Model& M = lattes2();
    auto L = ruelle_operator(M, real_potential(test_phi(M)), 1);
    std::vector<double> u(L.size(), 2.0);
    auto z = split_ruelle_piece(L, Color::black, {}, 2, u);
    for (double x : z) EXPECT_EQ(x, 0.0);
    auto id = split_ruelle_piece(L, Color::white, words_in_zero_tile(M, Color::white, 0), 0, u);
    for (double x : id) EXPECT_EQ(x, 2.0);
    std::set<Word> bad{{0, 0, 0}};
    EXPECT_THROW(split_ruelle_piece(L, Color::black, bad, 2, u), std::invalid_argument);
    // the operator power is the iterate
    auto a = ruelle_apply(L, u, 2);
    auto b = L.apply(L.apply(u));
    EXPECT_LT(sup_diff(a, b), 1e-9);
}

TEST(Gap, MatchesSecondEigenvalue) {
    const Model& M = lattes2();
    auto phi = test_phi(M);
    for (double t : {1.0, -0.5}) {
        auto g = spectral_gap_estimate(phi, t, 2, 12, 4, 7);
        EXPECT_LT(g.ratio, 1.0);
        EXPECT_LT(g.residual, 1e-2);
        auto nd = normalize(phi, t, 1);
        auto m = sorted_moduli(dense(tilde_operator(M, nd)));
        EXPECT_NEAR(m[0], 1.0, 1e-10);
        EXPECT_NEAR(g.ratio, m[1], 1e-4);
    }
}

TEST(Gap, ZeroPotentialIsDegenerate) {
    EXPECT_THROW(spectral_gap_estimate(Potential::constant(lattes2(), 0), 1, 2, 12), FitDegenerate);
}
