#pragma once

#include "fixed_points.hpp"
#include "thermo.hpp"

#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace etm {

using cplx = std::complex<double>;

enum class ZSystem { f_points, tile, edge, edge_color, post };
enum class ZWeight { one, deg };

inline const char* system_name(ZSystem s) {
    switch (s) {
        case ZSystem::f_points: return "f";
        case ZSystem::tile: return "tile";
        case ZSystem::edge: return "edge";
        case ZSystem::edge_color: return "edge-color";
        default: return "V0";
    }
}
inline ZSystem parse_system(const std::string& s) {
    for (ZSystem z : {ZSystem::f_points, ZSystem::tile, ZSystem::edge, ZSystem::edge_color, ZSystem::post})
        if (s == system_name(z)) return z;
    throw std::invalid_argument("unknown system '" + s + "' (f, tile, edge, edge-color, V0)");
}

// One periodic element of a system at period n: the point it projects to and its own
// primitive period under the system's map.
struct SystemWord {
    PointKey key;
    int period = 0;
    bool least_rotation = true;
};

// a periodic post point represents its orbit when it has the smallest index on it
inline bool least_post(const Model& M, int j) {
    for (int k = M.post_image[j]; k != j; k = M.post_image[k])
        if (k < j) return false;
    return true;
}

// Visits the periodic elements of length n of a system, each mapped to its fixed point of f^n.
inline void for_each_system_word(const Model& M, ZSystem sys, int n, const std::function<void(const SystemWord&)>& visit) {
    switch (sys) {
        case ZSystem::f_points: {
            FixedPointLedger L(M, n, false);
            for (const auto& x : L.points())
                visit({x.key, x.period, x.key.cls == PointClass::postcritical ? least_post(M, x.key.post)
                                                                              : is_least_rotation(x.key.word)});
            return;
        }
        case ZSystem::tile:
            for_each_tile_cycle(M, n, [&](const Word& w, Loc l) {
                visit({classify_tile_word(M, w, l), primitive_period(w), is_least_rotation(w)});
            });
            return;
        case ZSystem::edge:
        case ZSystem::edge_color: {
            auto S = sys == ZSystem::edge ? edge_shift(M) : edge_color_shift(M);
            for_each_periodic_word(S, n, [&](const Word& s) {
                Word ew(s.size());
                for (std::size_t i = 0; i < s.size(); ++i) ew[i] = S.states[s[i]].edge;
                visit({classify_edge_word(M, ew), primitive_period(s), is_least_rotation(s)});
            });
            return;
        }
        case ZSystem::post:
            for (int j = 0; j < M.m; ++j) {
                int p = post_period(M, j);
                if (p > 0 && n % p == 0) visit({{PointClass::postcritical, {}, j}, p, least_post(M, j)});
            }
            return;
    }
}

// Per-period data shared by every system: S_n phi and deg_{f^n} at each fixed point of f^n.
class ZetaData {
public:
    struct PointData {
        Rational S;
        double Sd = 0;
        long long deg = 1;
    };

    explicit ZetaData(const Potential& phi) : phi_(phi) {}

    const Potential& potential() const { return phi_; }
    const Model& model() const { return phi_.model(); }

    const PointData& at(const PointKey& k, int n) {
        auto& tab = table(n);
        auto it = tab.find(k);
        if (it == tab.end()) throw std::logic_error("system word codes no fixed point of f^" + std::to_string(n));
        return it->second;
    }

    // cached list of system words by (system, n)
    const std::vector<SystemWord>& words(ZSystem sys, int n) {
        auto key = std::make_pair(static_cast<int>(sys), n);
        auto it = words_.find(key);
        if (it != words_.end()) return it->second;
        std::vector<SystemWord> v;
        for_each_system_word(model(), sys, n, [&](const SystemWord& w) { v.push_back(w); });
        return words_.emplace(key, std::move(v)).first->second;
    }

private:
    std::map<PointKey, PointData>& table(int n) {
        auto it = tables_.find(n);
        if (it != tables_.end()) return it->second;
        FixedPointLedger L(model(), n, false);
        std::map<PointKey, PointData> tab;
        for (const auto& x : L.points()) {
            Rational S = fixed_point_birkhoff(phi_, x, n);
            tab.emplace(x.key, PointData{S, to_double(S), x.deg});
        }
        return tables_.emplace(n, std::move(tab)).first->second;
    }

    Potential phi_;
    std::map<int, std::map<PointKey, PointData>> tables_;
    std::map<std::pair<int, int>, std::vector<SystemWord>> words_;
};

// Z^(n)(s) = sum over periodic elements x of the system of w(x) e^{-s S_n phi(x)}
inline cplx Zn(ZetaData& Z, ZSystem sys, cplx s, int n, ZWeight weight = ZWeight::one) {
    if (n < 1) throw std::invalid_argument("n must be at least 1");
    cplx sum = 0;
    for (const auto& w : Z.words(sys, n)) {
        const auto& p = Z.at(w.key, n);
        double wt = weight == ZWeight::deg ? static_cast<double>(p.deg) : 1.0;
        sum += wt * std::exp(-s * p.Sd);
    }
    return sum;
}
inline cplx Zn(const Potential& phi, ZSystem sys, cplx s, int n, ZWeight weight = ZWeight::one) {
    ZetaData Z(phi);
    return Zn(Z, sys, s, n, weight);
}

struct SeriesTerm {
    int n = 0;
    cplx Z;
    double abs_over_n = 0;
};

// Truncated log-zeta: sum_{n <= N} Z^(n)/n with a growth diagnostic on |Z^(n)|/n.
class SeriesAccumulator {
public:
    SeriesAccumulator(ZetaData& Z, ZSystem sys, cplx s, ZWeight w = ZWeight::one) : Z_(&Z), sys_(sys), s_(s), w_(w) {}

    void extend(int N) {
        for (int n = static_cast<int>(terms_.size()) + 1; n <= N; ++n) {
            cplx z = Zn(*Z_, sys_, s_, n, w_);
            terms_.push_back({n, z, std::abs(z) / n});
            log_sum_ += z / static_cast<double>(n);
        }
    }
    cplx s() const { return s_; }
    int N() const { return static_cast<int>(terms_.size()); }
    const std::vector<SeriesTerm>& terms() const { return terms_; }
    cplx log_sum() const { return log_sum_; }
    cplx zeta() const { return std::exp(log_sum_); }

    // geometric ratio of |Z^(n)|/n fitted over the last third of the terms; nullopt below 3 terms
    std::optional<double> tail_ratio() const {
        const int N = this->N();
        if (N < 3) return std::nullopt;
        int lo = N - std::max(2, N / 3);
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int c = 0;
        for (int i = lo; i < N; ++i) {
            double a = terms_[i].abs_over_n;
            if (!(a > 0)) return 0.0;
            double x = terms_[i].n, y = std::log(a);
            sx += x, sy += y, sxx += x * x, sxy += x * y, ++c;
        }
        double slope = (c * sxy - sx * sy) / (c * sxx - sx * sx);
        return std::exp(slope);
    }
    bool diverging() const {
        auto r = tail_ratio();
        return r && *r >= 1.0;
    }

private:
    ZetaData* Z_;
    ZSystem sys_;
    cplx s_;
    ZWeight w_;
    std::vector<SeriesTerm> terms_;
    cplx log_sum_ = 0;
};

struct LogZeta {
    cplx log_sum;
    cplx zeta;
    std::vector<SeriesTerm> terms;
    std::optional<double> tail_ratio;
    bool diverging = false;
};

inline LogZeta zeta_log_truncated(ZetaData& Z, ZSystem sys, cplx s, int N, ZWeight w = ZWeight::one) {
    if (N < 0) throw std::invalid_argument("N must be non-negative");
    SeriesAccumulator acc(Z, sys, s, w);
    acc.extend(N);
    return {acc.log_sum(), acc.zeta(), acc.terms(), acc.tail_ratio(), acc.diverging()};
}

struct OrbitRow {
    int n = 0;
    cplx direct, from_orbits;
    double error = 0;
    bool pass = false;
};
struct OrbitReport {
    std::vector<OrbitRow> rows;
    bool all_pass = true;
};

// Z^(n) against sum_{d|n} d sum over primitive orbits tau of period d of w(tau)^{n/d} e^{-s (n/d) l(tau)}
inline OrbitReport verify_Zn_orbit_decomposition(ZetaData& Z, ZSystem sys, cplx s, int N, ZWeight w = ZWeight::one,
                                                 double tol = 1e-12) {
    OrbitReport rep;
    for (int n = 1; n <= N; ++n) {
        OrbitRow row;
        row.n = n;
        row.direct = Zn(Z, sys, s, n, w);
        double scale = 0;
        for (int d = 1; d <= n; ++d) {
            if (n % d) continue;
            for (const auto& sw : Z.words(sys, d)) {
                if (sw.period != d || !sw.least_rotation) continue;
                const auto& p = Z.at(sw.key, d);
                const int r = n / d;
                double wt = w == ZWeight::deg ? std::pow(static_cast<double>(p.deg), r) : 1.0;
                cplx term = static_cast<double>(d) * wt * std::exp(-s * (r * p.Sd));
                row.from_orbits += term;
                scale += std::abs(term);
            }
        }
        row.error = std::abs(row.direct - row.from_orbits) / std::max(1.0, scale);
        row.pass = row.error <= tol;
        rep.all_pass = rep.all_pass && row.pass;
        rep.rows.push_back(row);
    }
    return rep;
}

struct FactorRow {
    int n = 0;
    cplx s;
    cplx lhs, tile, edge_color, edge, post;
    double error = 0;
    bool pass = false;
};
struct FactorReport {
    std::vector<FactorRow> rows;
    bool all_pass = true;
};

// Z_deg,f = Z_tile - Z_edge-color + Z_edge + Z_V0 for every n <= N and s in the grid
inline FactorReport verify_factorization(ZetaData& Z, const std::vector<cplx>& grid, int N, double tol = 1e-10) {
    FactorReport rep;
    for (cplx s : grid)
        for (int n = 1; n <= N; ++n) {
            FactorRow r;
            r.n = n;
            r.s = s;
            r.lhs = Zn(Z, ZSystem::f_points, s, n, ZWeight::deg);
            r.tile = Zn(Z, ZSystem::tile, s, n);
            r.edge_color = Zn(Z, ZSystem::edge_color, s, n);
            r.edge = Zn(Z, ZSystem::edge, s, n);
            r.post = Zn(Z, ZSystem::post, s, n);
            cplx rhs = r.tile - r.edge_color + r.edge + r.post;
            double scale = std::max({1.0, std::abs(r.lhs), std::abs(r.tile), std::abs(r.edge_color)});
            r.error = std::abs(r.lhs - rhs) / scale;
            r.pass = r.error <= tol;
            rep.all_pass = rep.all_pass && r.pass;
            rep.rows.push_back(r);
        }
    return rep;
}

// The potential on the curve: each edge k-word carries the mean of phi over its admissible
// tile lifts (one tile on each side per edge).
struct CurvePotential {
    std::vector<Word> words;  // edge-shift state words of length k
    std::vector<double> value;
};

inline CurvePotential curve_potential(const Potential& phi) {
    const Model& M = phi.model();
    const int k = phi.depth();
    auto E = edge_shift(M);
    auto EC = edge_color_shift(M);
    CurvePotential cp;
    std::vector<int> w(k);
    std::function<void(int)> rec = [&](int i) {
        if (i == k) {
            // lifts: edge-color words over w with admissible tile words
            double sum = 0;
            long cnt = 0;
            std::vector<int> lift(k);
            std::function<void(int)> lr = [&](int j) {
                if (j == k) {
                    Word tw(k);
                    for (int q = 0; q < k; ++q) tw[q] = EC.states[lift[q]].tile;
                    if (!M.admissible_word(tw)) return;
                    sum += phi.dat(phi.codec().encode(tw));
                    ++cnt;
                    return;
                }
                for (int st = 0; st < EC.size(); ++st) {
                    if (EC.states[st].edge != E.states[w[j]].edge) continue;
                    if (j > 0 && !EC.A[lift[j - 1]][st]) continue;
                    lift[j] = st;
                    lr(j + 1);
                }
            };
            lr(0);
            if (cnt == 0) throw std::logic_error("edge word without a tile lift");
            cp.words.push_back(Word(w.begin(), w.end()));
            cp.value.push_back(sum / cnt);
            return;
        }
        for (int j = 0; j < E.size(); ++j) {
            if (i > 0 && !E.A[w[i - 1]][j]) continue;
            w[i] = j;
            rec(i + 1);
        }
    };
    rec(0);
    return cp;
}

// spectral radius of a nonnegative matrix by iterating B + I from the all-ones vector
inline double spectral_radius_nonneg(const std::vector<std::vector<double>>& B, double tol = 1e-13,
                                     long max_iters = 200000) {
    const std::size_t N = B.size();
    std::vector<double> u(N, 1.0), v(N);
    double prev = -1;
    for (long it = 0; it < max_iters; ++it) {
        for (std::size_t i = 0; i < N; ++i) {
            double s = u[i];
            for (std::size_t j = 0; j < N; ++j) s += B[i][j] * u[j];
            v[i] = s;
        }
        double mx = *std::max_element(v.begin(), v.end());
        double lam = mx / *std::max_element(u.begin(), u.end());
        for (std::size_t i = 0; i < N; ++i) u[i] = v[i] / mx;
        if (std::abs(lam - prev) <= tol * lam) return lam - 1.0;
        prev = lam;
    }
    throw NoConvergence("spectral radius iteration did not converge");
}

struct CurvePressure {
    double P_curve = 0;
    double P = 0;
    double gap = 0;
};

// Perron log of the t-weighted edge-shift matrix on edge k-words; gap = P(f) - P(f|C)
inline CurvePressure pressure_on_curve(const Potential& phi, double t = 1.0) {
    const Model& M = phi.model();
    auto cp = curve_potential(phi);
    auto E = edge_shift(M);
    const std::size_t N = cp.words.size();
    std::map<Word, std::size_t> index;
    for (std::size_t i = 0; i < N; ++i) index[cp.words[i]] = i;
    std::vector<std::vector<double>> B(N, std::vector<double>(N, 0.0));
    for (std::size_t i = 0; i < N; ++i) {
        const Word& w = cp.words[i];
        for (int j = 0; j < E.size(); ++j) {
            if (!E.A[w.back()][j]) continue;
            Word nx(w.begin() + 1, w.end());
            nx.push_back(j);
            B[i][index.at(nx)] = std::exp(t * cp.value[i]);
        }
    }
    CurvePressure r;
    r.P_curve = std::log(spectral_radius_nonneg(B));
    r.P = pressure(phi, t);
    r.gap = r.P - r.P_curve;
    return r;
}

// (1/n) log sum over fixed points x of f^n of e^{t S_n phi(x)}, streamed; interior points come
// from tile cycles, the points on the curve from edge words and V0.
inline double periodic_pressure(const Potential& phi, int n, double t = 1.0) {
    const Model& M = phi.model();
    // log-sum-exp in two passes would double the enumeration; shift by n * t * max instead
    double shift = n * std::max(t * to_double(phi.max_value()), t * to_double(phi.min_value()));
    long double sum = 0;
    for_each_tile_cycle(M, n, [&](const Word& w, Loc l) {
        if (l == kOff) sum += std::exp(static_cast<long double>(t * phi.periodic_sum_double(w) - shift));
    });
    std::set<PointKey> on_curve;
    auto E = edge_shift(M);
    for_each_periodic_word(E, n, [&](const Word& s) {
        Word ew(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) ew[i] = E.states[s[i]].edge;
        on_curve.insert(classify_edge_word(M, ew));
    });
    for (int j = 0; j < M.m; ++j) {
        int p = post_period(M, j);
        if (p > 0 && n % p == 0) on_curve.insert({PointClass::postcritical, {}, j});
    }
    for (const auto& k : on_curve) {
        double S = to_double(birkhoff_sum(phi, representative_code(M, k, n), n));
        sum += std::exp(static_cast<long double>(t * S - shift));
    }
    return static_cast<double>((std::log(sum) + shift) / n);
}

}  // namespace etm
