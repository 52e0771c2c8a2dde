#pragma once

#include "fixed_points.hpp"
#include "metric.hpp"
#include "potential.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace etm {

// An inverse branch of f^L as its itinerary xi_{-L+1} ... xi_0 (the word prepended to the
// coding of the point it is applied to).
using Branch = Word;

struct DeltaSeries {
    Rational value = 0;
    int terms = 0;  // number of nonzero-capable terms summed
    Branch used;    // the branch after deterministic extension
};

// Point values of one potential, memoised by coding.
class PointValueCache {
public:
    explicit PointValueCache(const Potential& phi) : phi_(&phi) {}
    const Potential& potential() const { return *phi_; }
    const Rational& operator()(const CodedPoint& x) {
        auto it = memo_.find(x);
        if (it != memo_.end()) return it->second;
        PointValues pv(*phi_, ResolvedPoint(phi_->model(), x));
        return memo_.emplace(x, pv.at(0)).first->second;
    }

private:
    const Potential* phi_;
    std::map<CodedPoint, Rational> memo_;
};

namespace detail {

inline Loc loc0(const Model& M, const CodedPoint& x) { return locations(M, x)[0]; }

// Delta_{phi,xi}(x,y), summed until the terms vanish identically. Past the supplied letters
// the branch is extended by the smallest admissible tile that takes both preimages off C.
inline std::optional<DeltaSeries> delta(PointValueCache& pv, const Branch& xi, const CodedPoint& x,
                                        const CodedPoint& y, int max_len) {
    const Potential& phi = pv.potential();
    const Model& M = phi.model();
    const int k = phi.depth();
    std::vector<int> back(xi.rbegin(), xi.rend());  // xi_0, xi_-1, ...
    Loc lx = loc0(M, x), ly = loc0(M, y);
    int i0 = -1;
    DeltaSeries out;
    for (int i = 0;; ++i) {
        if (i >= max_len) return std::nullopt;
        if (i >= static_cast<int>(back.size())) {
            int prev = back.back();
            int pick = -1, fallback = -1;
            for (int Y = 0; Y < M.T; ++Y) {
                if (!M.admissible(Y, prev)) continue;
                if (fallback < 0) fallback = Y;
                if (M.Phi(Y, lx) == kOff && M.Phi(Y, ly) == kOff) {
                    pick = Y;
                    break;
                }
            }
            back.push_back(pick >= 0 ? pick : fallback);
        }
        lx = M.Phi(back[i], lx);
        ly = M.Phi(back[i], ly);
        if (i0 < 0 && lx == kOff && ly == kOff) i0 = i;

        Word pre(back.rbegin() + (back.size() - i - 1), back.rend());
        out.value += pv(x.prepended(pre)) - pv(y.prepended(pre));
        out.terms = i + 1;
        if (i0 >= 0 && i + 1 >= std::max(i0 + k, k - 1) && i + 1 >= static_cast<int>(xi.size())) break;
    }
    out.used = Branch(back.rbegin(), back.rend());
    return out;
}

inline bool common_tile(const Model& M, const CodedPoint& x, const CodedPoint& y, int& tile) {
    auto a = tiles_at(M, ResolvedPoint(M, x).cell(0));
    auto b = tiles_at(M, ResolvedPoint(M, y).cell(0));
    for (int t : a)
        if (std::find(b.begin(), b.end(), t) != b.end()) {
            tile = t;
            return true;
        }
    return false;
}

}  // namespace detail

// Delta_{phi,xi}(x,y) - Delta_{phi,eta}(x,y); nullopt when a branch cannot be extended off C
// within max_len letters.
inline std::optional<Rational> temporal_distance(PointValueCache& pv, const Branch& xi, const Branch& eta,
                                                 const CodedPoint& x, const CodedPoint& y, int max_len = 64) {
    const Model& M = pv.potential().model();
    if (xi.empty() || eta.empty()) throw std::invalid_argument("inadmissible branch data: empty branch");
    if (!M.admissible_word(xi) || !M.admissible_word(eta))
        throw std::invalid_argument("inadmissible branch data: branch word not admissible");
    if (M.color[xi.back()] != M.color[eta.back()])
        throw std::invalid_argument("inadmissible branch data: f(xi_0) and f(eta_0) differ");
    check_coding(M, x);
    check_coding(M, y);
    int t = -1;
    if (!detail::common_tile(M, x, y, t)) throw std::invalid_argument("inadmissible branch data: no common 1-tile");
    if (M.face[x.tile(0)] != M.color[xi.back()] || M.face[y.tile(0)] != M.color[xi.back()])
        throw std::invalid_argument("inadmissible branch data: points outside f(xi_0)");
    auto a = detail::delta(pv, xi, x, y, max_len);
    if (!a) return std::nullopt;
    auto b = detail::delta(pv, eta, x, y, max_len);
    if (!b) return std::nullopt;
    return a->value - b->value;
}
inline std::optional<Rational> temporal_distance(const Potential& phi, const Branch& xi, const Branch& eta,
                                                 const CodedPoint& x, const CodedPoint& y, int max_len = 64) {
    PointValueCache pv(phi);
    return temporal_distance(pv, xi, eta, x, y, max_len);
}

struct NliWitness {
    Branch xi, eta;
    CodedPoint x, y;
    Rational value;
};

struct NliVerdict {
    bool integrable_on_samples = true;
    long samples = 0;
    long skipped = 0;
    std::optional<NliWitness> witness;
};

// Points of the 1-tile X: X followed by periodic tails of length 1 and 2 (corners and edge
// points included).
inline std::vector<CodedPoint> sample_points(const Model& M, int X) {
    std::vector<CodedPoint> pts;
    for (int a = 0; a < M.T; ++a) {
        if (!M.admissible(X, a)) continue;
        if (M.admissible(a, a)) pts.push_back({{X}, {a}});
        for (int b = 0; b < M.T; ++b)
            if (M.admissible(a, b) && M.admissible(b, a) && a != b) pts.push_back({{X}, {a, b}});
    }
    return pts;
}

// Deterministic sweep: for each 1-tile and each pair of its sample points, every pair of
// inverse branches of length 1 and then 2 over the 0-tile containing them.
inline NliVerdict nli_test(const Potential& phi, long budget = 2000) {
    const Model& M = phi.model();
    NliVerdict v;
    PointValueCache pv(phi);
    auto branches_over = [&](Color c, int len) {
        std::vector<Branch> out;
        WordCodec codec(M);
        for (std::uint64_t r = 0; r < codec.total(len); ++r) {
            Word w = codec.decode(r, len);
            if (M.color[w.back()] == c) out.push_back(w);
        }
        return out;
    };
    for (int len = 1; len <= 2; ++len)
        for (int X = 0; X < M.T; ++X) {
            auto pts = sample_points(M, X);
            auto br = branches_over(M.face[X], len);
            for (std::size_t i = 0; i < pts.size(); ++i)
                for (std::size_t j = i + 1; j < pts.size(); ++j)
                    for (std::size_t a = 0; a < br.size(); ++a)
                        for (std::size_t b = a + 1; b < br.size(); ++b) {
                            if (v.samples >= budget) return v;
                            ++v.samples;
                            auto t = temporal_distance(pv, br[a], br[b], pts[i], pts[j]);
                            if (!t) {
                                ++v.skipped;
                                continue;
                            }
                            if (*t != 0) {
                                v.integrable_on_samples = false;
                                v.witness = NliWitness{br[a], br[b], pts[i], pts[j], *t};
                                return v;
                            }
                        }
        }
    return v;
}

struct CohomologyResult {
    std::optional<Rational> K;
    std::string witness_a, witness_b;  // fixed points with different averages
    Rational avg_a = 0, avg_b = 0;
};

// S_n phi(x)/n over every fixed point of f^n, n <= n_max; K when all agree.
inline CohomologyResult cohomology_test(const Potential& phi, int n_max) {
    const Model& M = phi.model();
    CohomologyResult r;
    std::optional<Rational> first;
    std::string first_key;
    for (int n = 1; n <= n_max; ++n) {
        FixedPointLedger L(M, n, false);
        for (const auto& x : L.points()) {
            Rational a = fixed_point_birkhoff(phi, x, n) / n;
            if (!first) {
                first = a;
                first_key = key_string(M, x.key) + "@" + std::to_string(n);
            } else if (a != *first) {
                r.witness_a = first_key;
                r.avg_a = *first;
                r.witness_b = key_string(M, x.key) + "@" + std::to_string(n);
                r.avg_b = a;
                return r;
            }
        }
    }
    r.K = first;
    return r;
}

struct SniRow {
    std::string candidate;  // the M0-tile
    int M = 0, N = 0;
    std::string tile;       // the M-tile X
    std::string branch1, branch2;
    double ratio = 0;
};

struct SniReport {
    std::vector<SniRow> rows;
    double floor = 0;  // min over rows of the best ratio
    double epsilon = 0;
    bool clears = false;
    bool lambda_warning = false;
};

struct SniParams {
    int N0 = 1, span = 2, M0 = 1, M_max = 1;
    double epsilon = 1e-3;
    VisualMetricParams metric;
    double lambda0 = 0;  // estimate from Dn_and_lambda0, 0 to skip the warning
};

namespace detail {
// two distinct interior fixed-point codings starting in the 0-tile c
inline std::pair<Word, Word> interior_tails(const Model& M, Color c) {
    std::vector<Word> found;
    for (int n = 1; n <= 4 && found.size() < 2; ++n) {
        FixedPointLedger L(M, n, false);
        for (const auto& x : L.points())
            if (x.key.cls == PointClass::tile_interior && x.period == n && M.face[x.key.word[0]] == c) {
                found.push_back(x.key.word);
                if (found.size() == 2) break;
            }
    }
    if (found.size() < 2) throw std::runtime_error("no pair of interior periodic points in a 0-tile");
    return {found[0], found[1]};
}
}  // namespace detail

// For each M-tile X below a candidate M0-tile and each N, the points x1, x2 = X.a1, X.a2 and
// the inverse branches v of f^N over the candidate: ratio = (max_v F - min_v F) / d(x1,x2)^alpha
// with F(v) = S_N phi(v x1) - S_N phi(v x2).
inline SniReport sni_probe(Hierarchy& H, const Potential& phi, const SniParams& p, const std::vector<Word>& candidates) {
    const Model& M = phi.model();
    p.metric.check();
    if (p.M_max < p.M0 || p.M0 < 1) throw std::invalid_argument("need 1 <= M0 <= M_max");
    SniReport rep;
    rep.epsilon = p.epsilon;
    rep.lambda_warning = p.lambda0 > 0 && std::pow(p.metric.Lambda, p.metric.alpha) > p.lambda0;
    WordCodec codec(M);
    double floor = std::numeric_limits<double>::infinity();
    for (const auto& Y : candidates) {
        if (static_cast<int>(Y.size()) != p.M0 || !M.admissible_word(Y))
            throw std::invalid_argument("candidate is not an admissible M0-word");
        for (int Mlev = p.M0; Mlev <= p.M_max; ++Mlev) {
            std::vector<Word> tiles;
            for (std::uint64_t r = 0; r < codec.total(Mlev); ++r) {
                Word w = codec.decode(r, Mlev);
                if (std::equal(Y.begin(), Y.end(), w.begin())) tiles.push_back(w);
            }
            for (const auto& X : tiles) {
                auto [a1, a2] = detail::interior_tails(M, M.color[X.back()]);
                CodedPoint x1{X, a1}, x2{X, a2};
                double d = visual_distance(H, x1, x2, p.metric);
                for (int N = p.N0; N <= p.N0 + p.span; ++N) {
                    std::vector<Word> br;
                    for (std::uint64_t r = 0; r < codec.total(N); ++r) {
                        Word v = codec.decode(r, N);
                        if (M.admissible(v.back(), Y[0])) br.push_back(v);
                    }
                    if (br.size() < 2) throw std::runtime_error("no admissible branch pair");
                    Rational best_hi, best_lo;
                    std::size_t ihi = 0, ilo = 0;
                    for (std::size_t i = 0; i < br.size(); ++i) {
                        Rational F = birkhoff_sum(phi, x1.prepended(br[i]), N) - birkhoff_sum(phi, x2.prepended(br[i]), N);
                        if (i == 0 || F > best_hi) best_hi = F, ihi = i;
                        if (i == 0 || F < best_lo) best_lo = F, ilo = i;
                    }
                    if (ihi == ilo) ilo = ihi == 0 ? 1 : 0;
                    double ratio = to_double(best_hi - best_lo) / std::pow(d, p.metric.alpha);
                    rep.rows.push_back({M.word_string(Y), Mlev, N, M.word_string(X), M.word_string(br[ihi]),
                                        M.word_string(br[ilo]), ratio});
                    floor = std::min(floor, ratio);
                }
            }
        }
    }
    rep.floor = rep.rows.empty() ? 0.0 : floor;
    rep.clears = !rep.rows.empty() && rep.floor >= p.epsilon;
    return rep;
}

}  // namespace etm
