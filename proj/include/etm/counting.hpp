#pragma once

#include "fixed_points.hpp"
#include "integrability.hpp"
#include "thermo.hpp"

#include <boost/math/special_functions/expint.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace etm {

struct OrbitRecord {
    int period = 0;
    std::string representative;  // key of the least rotation
    Rational length;             // S_p phi at the representative
    BigInt degree_weight = 1;    // product of deg_f along the orbit
    PointClass cls = PointClass::tile_interior;

    bool operator==(const OrbitRecord& o) const {
        return period == o.period && representative == o.representative && length == o.length &&
               degree_weight == o.degree_weight && cls == o.cls;
    }
    bool operator<(const OrbitRecord& o) const {
        return period != o.period ? period < o.period : representative < o.representative;
    }
};

class HorizonError : public std::runtime_error {
public:
    HorizonError(const std::string& what, double horizon) : std::runtime_error(what), horizon_(horizon) {}
    double horizon() const { return horizon_; }

private:
    double horizon_;
};

struct OrbitLedger {
    int p_max = 0;
    double horizon = 0;  // every orbit with l <= horizon is present
    std::vector<OrbitRecord> orbits;  // sorted by (period, representative)
};

// l(tau) >= rate * period on every periodic orbit: min phi when positive, otherwise the best
// c_n / n from the min-plus Birkhoff minima; nullopt when neither certifies positivity
inline std::optional<double> length_rate(const Potential& phi, int cap = 64) {
    if (phi.min_value() > 0) return to_double(phi.min_value());
    auto c = birkhoff_minima(phi, cap);
    std::optional<double> best;
    for (int n = 1; n <= cap; ++n)
        if (c[n - 1] > 0) {
            double r = to_double(c[n - 1]) / n;
            if (!best || r > *best) best = r;
        }
    return best;
}

// Primitive periodic orbits of f with period <= p_max. Interior orbits come from least-rotation
// primitive tile cycles, orbits on the curve from edge words and the periodic post points.
inline OrbitLedger primitive_orbits(const Potential& phi, int p_max, std::uint64_t cap = 50'000'000) {
    const Model& M = phi.model();
    if (p_max < 1) throw std::invalid_argument("p_max must be at least 1");
    OrbitLedger L;
    L.p_max = p_max;
    auto rate = length_rate(phi);
    L.horizon = rate ? p_max * *rate : 0.0;
    auto T = tile_shift(M);
    auto E = edge_shift(M);
    for (int p = 1; p <= p_max; ++p) {
        if (trace_power(T, p) > cap) throw std::runtime_error("orbit enumeration exceeds cap at period " + std::to_string(p));
        for_each_tile_cycle(M, p, [&](const Word& w, Loc l) {
            if (l != kOff || primitive_period(w) != p || !is_least_rotation(w)) return;
            L.orbits.push_back({p, "T:" + M.word_string(w), phi.periodic_sum(w), 1, PointClass::tile_interior});
        });
        for_each_periodic_word(E, p, [&](const Word& s) {
            Word ew(s.size());
            for (std::size_t i = 0; i < s.size(); ++i) ew[i] = E.states[s[i]].edge;
            auto k = classify_edge_word(M, ew);
            if (k.cls != PointClass::edge_interior || primitive_period(ew) != p || !is_least_rotation(ew)) return;
            Rational S = birkhoff_sum(phi, representative_code(M, k, p), p);
            L.orbits.push_back({p, key_string(M, k), S, 1, PointClass::edge_interior});
        });
        for (int j = 0; j < M.m; ++j) {
            if (post_period(M, j) != p) continue;
            bool least = true;
            for (int q = M.post_image[j]; q != j; q = M.post_image[q]) least = least && j < q;
            if (!least) continue;
            PointKey k{PointClass::postcritical, {}, j};
            Rational S = birkhoff_sum(phi, representative_code(M, k, p), p);
            L.orbits.push_back({p, key_string(M, k), S, BigInt(post_degree_product(M, j, p)), PointClass::postcritical});
        }
    }
    std::sort(L.orbits.begin(), L.orbits.end());
    return L;
}

struct HorizonCheck {
    int period = 0;        // p_max + 1
    std::size_t scanned = 0;
    std::size_t below = 0;  // orbits of that period with length <= horizon; must be 0
    bool ok() const { return below == 0; }
};

// enumerates one period beyond the ledger and counts orbits falling under its horizon
inline HorizonCheck horizon_check(const Potential& phi, const OrbitLedger& L) {
    HorizonCheck h;
    h.period = L.p_max + 1;
    auto next = primitive_orbits(phi, h.period);
    for (const auto& o : next.orbits) {
        if (o.period != h.period) continue;
        ++h.scanned;
        if (to_double(o.length) <= L.horizon) ++h.below;
    }
    return h;
}

// li(y) = int_2^y du / log u = Ei(log y) - Ei(log 2); diverges at y = 1, so y must exceed 1
inline double li(double y) {
    if (!(y > 1.0)) throw std::domain_error("li(y) needs y > 1 (the integrand is not integrable at u = 1)");
    if (y == 2.0) return 0.0;
    return boost::math::expint(std::log(y)) - boost::math::expint(std::log(2.0));
}

inline long long pi_count(const OrbitLedger& L, double T) {
    if (T > L.horizon)
        throw HorizonError("T = " + std::to_string(T) + " exceeds the completeness horizon " + std::to_string(L.horizon),
                           L.horizon);
    // exact comparison; the double pre-filter skips the rational test away from T
    long long c = 0;
    const Rational RT = Rational(T);
    for (const auto& o : L.orbits) {
        double d = to_double(o.length);
        if (d < T - 1e-9 * (1 + T)) ++c;
        else if (d <= T + 1e-9 * (1 + T) && o.length <= RT) ++c;
    }
    return c;
}

struct PotRow {
    double T = 0;
    long long pi = 0;
    std::optional<double> Li;  // absent when e^{s0 T} <= 1
    std::optional<double> ratio;
};

struct PotReport {
    double s0 = 0;
    double horizon = 0;
    std::vector<PotRow> rows;
    std::optional<double> trend_slope;  // d log(ratio) / dT over the largest decade of T
    std::optional<double> trend_residual;
    bool lattice = false;  // cohomologous to a constant K: lengths are K * period
    std::optional<Rational> K;
    std::size_t distinct_lengths = 0;
};

inline PotReport pot_report(const Potential& phi, const OrbitLedger& L, const std::vector<double>& grid,
                            int cohomology_n = 3) {
    PotReport r;
    r.s0 = s0(phi);
    r.horizon = L.horizon;
    for (double T : grid) {
        PotRow row;
        row.T = T;
        row.pi = pi_count(L, T);
        double y = std::exp(r.s0 * T);
        if (y > 1.0) {
            row.Li = li(y);
            if (*row.Li > 0 && row.pi > 0) row.ratio = row.pi / *row.Li;
        }
        r.rows.push_back(row);
    }
    // trend of log ratio over the T within a factor 10 of the largest T with a ratio
    std::vector<std::pair<double, double>> pts;
    double tmax = 0;
    for (const auto& row : r.rows)
        if (row.ratio) tmax = std::max(tmax, row.T);
    for (const auto& row : r.rows)
        if (row.ratio && row.T >= tmax / 10) pts.emplace_back(row.T, std::log(*row.ratio));
    if (pts.size() >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double n = static_cast<double>(pts.size());
        for (auto [x, y] : pts) sx += x, sy += y, sxx += x * x, sxy += x * y;
        double den = n * sxx - sx * sx;
        if (den > 0) {
            double slope = (n * sxy - sx * sy) / den, icpt = (sy - slope * sx) / n;
            double ss = 0;
            for (auto [x, y] : pts) ss += (y - icpt - slope * x) * (y - icpt - slope * x);
            r.trend_slope = slope;
            r.trend_residual = std::sqrt(ss / n);
        }
    }
    auto c = cohomology_test(phi, cohomology_n);
    r.lattice = c.K.has_value();
    r.K = c.K;
    std::vector<Rational> lens;
    for (const auto& o : L.orbits) lens.push_back(o.length);
    std::sort(lens.begin(), lens.end());
    r.distinct_lengths = static_cast<std::size_t>(std::unique(lens.begin(), lens.end()) - lens.begin());
    return r;
}

inline const char* kLedgerVersion = "# etm-ledger v1";
inline const char* kLedgerHeader = "period,representative,length,degree_weight,class";

inline std::string export_ledger(const OrbitLedger& L) {
    std::ostringstream o;
    o.precision(17);
    o << kLedgerVersion << "\n# p_max=" << L.p_max << " horizon=" << L.horizon << "\n"
      << kLedgerHeader << "\n";
    for (const auto& r : L.orbits)
        o << r.period << "," << r.representative << "," << to_string(r.length) << "," << r.degree_weight << ","
          << class_name(r.cls) << "\n";
    return o.str();
}
inline void export_ledger(const OrbitLedger& L, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << export_ledger(L);
}

inline OrbitLedger parse_ledger(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kLedgerVersion)
        throw std::invalid_argument("ledger version mismatch: expected '" + std::string(kLedgerVersion) + "'");
    OrbitLedger L;
    if (!std::getline(in, line) || line.rfind("# p_max=", 0) != 0) throw std::invalid_argument("ledger: missing p_max line");
    {
        std::istringstream h(line.substr(2));
        std::string a, b;
        h >> a >> b;
        L.p_max = std::stoi(a.substr(6));
        L.horizon = std::stod(b.substr(8));
    }
    if (!std::getline(in, line) || line != kLedgerHeader) throw std::invalid_argument("ledger: bad column header");
    int ln = 3;
    while (std::getline(in, line)) {
        ++ln;
        if (line.empty()) continue;
        auto f = detail::split_fields(line);
        if (f.size() != 5) throw std::invalid_argument("ledger row " + std::to_string(ln) + ": expected 5 fields");
        OrbitRecord r;
        try {
            r.period = std::stoi(f[0]);
            r.representative = f[1];
            r.length = parse_rational(f[2]);
            r.degree_weight = BigInt(f[3]);
        } catch (const std::exception& e) {
            throw std::invalid_argument("ledger row " + std::to_string(ln) + ": " + e.what());
        }
        if (f[4] == class_name(PointClass::tile_interior)) r.cls = PointClass::tile_interior;
        else if (f[4] == class_name(PointClass::edge_interior)) r.cls = PointClass::edge_interior;
        else if (f[4] == class_name(PointClass::postcritical)) r.cls = PointClass::postcritical;
        else throw std::invalid_argument("ledger row " + std::to_string(ln) + ": unknown class " + f[4]);
        L.orbits.push_back(r);
    }
    return L;
}
inline OrbitLedger import_ledger(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_ledger(ss.str());
}

}  // namespace etm
