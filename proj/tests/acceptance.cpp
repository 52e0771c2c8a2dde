// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <etm/etm.hpp>

#include <array>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>

using namespace etm;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Potential test_phi(const Model& M) {
    std::vector<Rational> v;
    for (int t = 0; t < M.T; ++t) v.push_back(Rational(t % 3 + 1) + Rational(t, 7));
    return Potential(M, 1, v);
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& body) {
    auto t0 = Clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2fs", seconds_since(t0));
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << id << " " << name << " [" << buf << "] " << o.detail << std::endl;
    failures += !o.pass;
}

std::string fmt(double x) {
    std::ostringstream o;
    o.precision(3);
    o << x;
    return o.str();
}

Outcome cell_counts() {
    auto t0 = Clock::now();
    bool ok = true;
    std::string bad;
    for (auto [k, n_max] : {std::pair{2, 6}, std::pair{3, 4}}) {
        Model M(lattes_rule(k));
        Hierarchy H(M, 50'000'000);
        long long d = 1;
        for (int n = 0; n <= n_max; ++n) {
            const auto& L = H.level(n);
            if (L.tiles() != 2 * d || L.edges() != 4 * d) {
                ok = false;
                bad += " lattes(" + std::to_string(k) + ") n=" + std::to_string(n);
            }
            d *= M.deg;
        }
    }
    double t = seconds_since(t0);
    return {ok && t < 30, "runtime " + fmt(t) + "s" + bad};
}

Outcome weighted_count() {
    Model M(lattes_rule(2));
    long long d = 1;
    for (int n = 1; n <= 5; ++n) {
        d *= M.deg;
        FixedPointLedger L(M, n, false);
        if (L.weighted_count() != 1 + d) return {false, "n=" + std::to_string(n)};
    }
    return {true, "n<=5"};
}

Outcome counting_identity() {
    for (auto [k, n_max] : {std::pair{2, 5}, std::pair{3, 3}}) {
        Model M(lattes_rule(k));
        for (int n = 1; n <= n_max; ++n) {
            auto r = verify_counting_identity(M, n);
            if (!r.all_pass) return {false, "lattes(" + std::to_string(k) + ") n=" + std::to_string(n) + " at " + r.failures[0]};
        }
    }
    return {true, "lattes(2) n<=5, lattes(3) n<=3"};
}

Outcome factorization() {
    Model M(lattes_rule(2));
    double worst = 0;
    bool ok = true;
    if (cohomology_test(test_phi(M), 3).K) return {false, "test potential is cohomologous to a constant"};
    for (const auto& phi : {Potential::constant(M, 1), test_phi(M)}) {
        const double s = s0(phi);
        std::vector<cplx> grid{{s - 0.3, 0}, {s - 0.3, 1}, {s + 0.3, 0}, {s + 0.3, 1}, {s, 1}};
        ZetaData Z(phi);
        auto r = verify_factorization(Z, grid, 6, 1e-10);
        ok = ok && r.all_pass;
        for (const auto& row : r.rows) worst = std::max(worst, row.error);
    }
    return {ok, "max residual " + fmt(worst)};
}

Outcome pressure_consistency() {
    Model M(lattes_rule(2));
    auto phi = test_phi(M);
    double diff = std::abs(pressure(phi, 1.0) - periodic_pressure(phi, 12, 1.0));
    double e = std::abs(s0(Potential::constant(M, 1)) - std::log(4.0));
    std::vector<double> ts;
    for (int i = 0; i <= 12; ++i) ts.push_back(0.25 * i);
    std::vector<std::pair<double, double>> curve;
    for (double t : ts) curve.emplace_back(t, pressure(phi, -t));
    bool dec = strictly_decreasing(curve);
    return {diff <= 1e-3 && e <= 1e-9 && dec,
            "|P - P_12| " + fmt(diff) + ", |s0 - log 4| " + fmt(e) + ", decreasing " + (dec ? "yes" : "no")};
}

Outcome curve_gap() {
    Model M(lattes_rule(2));
    double g0 = pressure_on_curve(Potential::constant(M, 0)).gap;
    double g1 = pressure_on_curve(test_phi(M)).gap;
    bool ok = std::abs(g0 - std::log(2.0)) <= 1e-9 && g1 > 0;
    return {ok, "gap(0) - log 2 = " + fmt(g0 - std::log(2.0)) + ", gap(phi) = " + fmt(g1)};
}

Outcome normalization() {
    Model M(lattes_rule(2));
    auto phi = test_phi(M);
    double worst = 0;
    for (int d = 1; d <= 3; ++d) {
        auto nd = normalize(phi, 1.0, d);
        auto L = tilde_operator(M, nd);
        auto parts = split(L, std::vector<double>(L.size(), 1.0));
        auto q = split_ruelle_apply(L, parts, 1);
        for (double x : q.black) worst = std::max(worst, std::abs(x - 1));
        for (double x : q.white) worst = std::max(worst, std::abs(x - 1));
    }
    auto g = spectral_gap_estimate(phi, 1.0, 2, 12, 4, 1);
    bool ok = worst <= 1e-10 && g.ratio < 1 && g.residual < 1e-2;
    return {ok, "max |L(1,1) - 1| " + fmt(worst) + ", decay ratio " + fmt(g.ratio) + ", residual " + fmt(g.residual)};
}

Outcome em_bound() {
    Model M(lattes_rule(2));
    CurveCircle C(M);
    const int m = 14, n = 28;
    int violations = 0;
    std::size_t worst = 0;
    for (unsigned seed = 1; seed <= 100; ++seed) {
        std::mt19937_64 rng(seed);
        auto c = random_Em_run(C, m, n, rng);
        violations += !c.within_bound;
        worst = std::max(worst, c.max_card);
    }
    return {violations == 0, "100 sequences, max card " + std::to_string(worst) + ", violations " + std::to_string(violations)};
}

Outcome cohomology_suite() {
    Model M(lattes_rule(2));
    std::mt19937 g(2024);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Rational> b;
        for (int t = 0; t < M.T; ++t) b.push_back(Rational(static_cast<int>(g() % 9) - 4, static_cast<int>(1 + g() % 3)));
        const Rational c(static_cast<int>(g() % 13) - 6, static_cast<int>(1 + g() % 4));
        auto phi = Potential::coboundary(c, Potential(M, 1, b));
        auto r = cohomology_test(phi, 3);
        if (!r.K || *r.K != c) return {false, "trial " + std::to_string(trial) + ": constant not recovered"};
        auto v = nli_test(phi, 1000);
        if (!v.integrable_on_samples) return {false, "trial " + std::to_string(trial) + ": nonzero temporal distance"};
    }
    auto w = nli_test(test_phi(M));
    if (!w.witness) return {false, "no witness for the shipped potential"};
    return {true, "20 coboundaries exact; witness " + to_string(w.witness->value) + " for the shipped potential"};
}

Outcome pot_harness() {
    auto t0 = Clock::now();
    Model M(lattes_rule(2));
    auto phi = test_phi(M);
    auto L = primitive_orbits(phi, 10);
    auto h = horizon_check(phi, L);
    std::vector<double> grid;
    for (int T = 1; T <= static_cast<int>(L.horizon); ++T) grid.push_back(T);
    auto r = pot_report(phi, L, grid);
    bool ratios = true;
    for (const auto& row : r.rows)
        if (row.T >= 2 && !(row.ratio && std::isfinite(*row.ratio) && *row.ratio > 0)) ratios = false;
    bool trend = r.trend_slope.has_value();
    // lattice flag: off for the test potential, on for cohomologous ones
    bool flag = !r.lattice;
    auto one = Potential::constant(M, 1);
    flag = flag && pot_report(one, primitive_orbits(one, 6), {1, 2, 3}).lattice;
    std::vector<Rational> b{0, Rational(1, 2), -1, 0, 2, Rational(1, 3), 0, Rational(-3, 2)};
    auto cob = Potential::coboundary(Rational(5, 2), Potential(M, 1, b));
    flag = flag && pot_report(cob, primitive_orbits(cob, 6), {1, 2, 3}).lattice;
    double t = seconds_since(t0);
    bool ok = h.ok() && ratios && trend && flag && t < 300;
    return {ok, std::to_string(L.orbits.size()) + " orbits, horizon " + fmt(L.horizon) + ", last ratio " +
                    (r.rows.back().ratio ? fmt(*r.rows.back().ratio) : "n/a") + ", trend slope " +
                    (trend ? fmt(*r.trend_slope) : "n/a") + ", runtime " + fmt(t) + "s"};
}

std::string run_capture(const std::string& cmd) {
    std::array<char, 4096> buf;
    std::string out;
    std::unique_ptr<FILE, int (*)(FILE*)> p(popen(cmd.c_str(), "r"), pclose);
    if (!p) throw std::runtime_error("cannot run " + cmd);
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), p.get())) > 0) out.append(buf.data(), n);
    return out;
}

Outcome cli_determinism() {
    const std::string cli = ETM_CLI_PATH;
    const std::string data = ETM_DEMO_DIR;
    const std::vector<std::string> cmds{
        "levels lattes:2 --n 4",
        "shifts lattes:2 --n 6",
        "orbits lattes:2 --phi table:" + data + "/phi.csv --n 4 --p-max 5",
        "pressure lattes:2 --phi table:" + data + "/phi.csv",
        "s0 lattes:2 --phi const:1",
        "zeta lattes:2 --phi table:" + data + "/phi.csv --system f --weight deg --s 3,1 --N 6",
        "factorize lattes:2 --N 6 --s 1.7",
        "curvegap lattes:2 --phi const:0",
        "em lattes:2 --m 14 --n 28 --runs 10 --seed 3",
        "nli lattes:2 --phi table:" + data + "/phi.csv",
        "sni lattes:2 --phi table:" + data + "/phi.csv",
        "pot lattes:2 --phi table:" + data + "/phi.csv --p-max 6",
    };
    for (const auto& c : cmds) {
        auto a = run_capture(cli + " " + c + " 2>&1"), b = run_capture(cli + " " + c + " 2>&1");
        if (a.empty() || a != b) return {false, "differs: " + c};
    }
    return {true, std::to_string(cmds.size()) + " commands byte-identical"};
}

}  // namespace

int main() {
    report(1, "cell counts", cell_counts);
    report(2, "weighted fixed-point count", weighted_count);
    report(3, "counting identity", counting_identity);
    report(4, "per-n factorization", factorization);
    report(5, "pressure consistency", pressure_consistency);
    report(6, "curve pressure gap", curve_gap);
    report(7, "transfer-operator normalization", normalization);
    report(8, "E_m bound", em_bound);
    report(9, "cohomology and NLI suite", cohomology_suite);
    report(10, "prime orbit harness", pot_harness);
    report(11, "CLI determinism", cli_determinism);
    return failures == 0 ? 0 : 1;
}
