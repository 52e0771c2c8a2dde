#pragma once

#include "potential.hpp"
#include "shift.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

namespace etm {

class NonMixing : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class NoConvergence : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class FitDegenerate : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class NotEventuallyPositive : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ThermoConfig {
    double tolerance = 1e-12;
    long max_iters = 100000;
};

// A real locally constant function of depth k, one value per admissible k-word (by rank).
struct RealPotential {
    int k = 1;
    std::vector<double> v;
};

inline RealPotential real_potential(const Potential& phi, double t = 1.0) {
    RealPotential r{phi.depth(), phi.dvalues()};
    for (auto& x : r.v) x *= t;
    return r;
}

// The transfer operator (L u)(w) = sum_X e^{psi(Xw)} u(Xw) on functions of admissible
// d-words, with psi of depth at most d+1. Entries may be complex (psi = a + ib).
template <class T>
class TransferOperatorT {
public:
    struct Pred {
        std::uint32_t from;    // rank of (X w)[:d]
        std::uint32_t weight;  // rank of (X w)[:k]
    };

    TransferOperatorT(const Model& M, int d, int k, std::vector<T> weights)
        : M_(&M), d_(d), k_(k), codec_(M), weights_(std::move(weights)) {
        if (d < 1) throw std::invalid_argument("depth must be at least 1");
        if (k > d + 1) throw std::invalid_argument("depth mismatch: potential deeper than d+1");
        if (weights_.size() != codec_.total(k)) throw std::invalid_argument("depth mismatch: weight table size");
        const std::uint64_t N = codec_.total(d);
        if (N > (1u << 26)) throw std::runtime_error("word space too large");
        start_.assign(N + 1, 0);
        face_.resize(N);
        for (std::uint64_t r = 0; r < N; ++r) {
            Word w = codec_.decode(r, d);
            face_[r] = M.face[w[0]];
            start_[r] = preds_.size();
            for (int X = 0; X < M.T; ++X) {
                if (!M.admissible(X, w[0])) continue;
                Word xw{X};
                xw.insert(xw.end(), w.begin(), w.end());
                Word head(xw.begin(), xw.begin() + d);
                Word win(xw.begin(), xw.begin() + k);
                preds_.push_back({static_cast<std::uint32_t>(codec_.encode(head)),
                                  static_cast<std::uint32_t>(codec_.encode(win))});
            }
        }
        start_[N] = preds_.size();
    }

    const Model& model() const { return *M_; }
    int depth() const { return d_; }
    int potential_depth() const { return k_; }
    std::size_t size() const { return face_.size(); }
    Color face(std::size_t r) const { return face_[r]; }
    const WordCodec& codec() const { return codec_; }
    const std::vector<T>& weights() const { return weights_; }

    template <class U>
    std::vector<U> apply(const std::vector<U>& u) const {
        check(u);
        std::vector<U> out(size(), U(0));
        for (std::size_t r = 0; r < size(); ++r) {
            U s(0);
            for (std::size_t j = start_[r]; j < start_[r + 1]; ++j) s += U(weights_[preds_[j].weight]) * u[preds_[j].from];
            out[r] = s;
        }
        return out;
    }
    // (m L)(v) = sum over w with v a predecessor of w
    template <class U>
    std::vector<U> apply_transpose(const std::vector<U>& m) const {
        check(m);
        std::vector<U> out(size(), U(0));
        for (std::size_t r = 0; r < size(); ++r)
            for (std::size_t j = start_[r]; j < start_[r + 1]; ++j)
                out[preds_[j].from] += U(weights_[preds_[j].weight]) * m[r];
        return out;
    }

private:
    template <class U>
    void check(const std::vector<U>& u) const {
        if (u.size() != size()) throw std::invalid_argument("depth mismatch: function has the wrong size");
    }
    const Model* M_;
    int d_, k_;
    WordCodec codec_;
    std::vector<T> weights_;
    std::vector<std::size_t> start_;
    std::vector<Pred> preds_;
    std::vector<Color> face_;
};

using RuelleOperator = TransferOperatorT<double>;
using ComplexRuelleOperator = TransferOperatorT<std::complex<double>>;

inline RuelleOperator ruelle_operator(const Model& M, const RealPotential& psi, int d) {
    std::vector<double> w(psi.v.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(psi.v[i]);
    return RuelleOperator(M, d, psi.k, w);
}
// weights e^{a + i b}
inline ComplexRuelleOperator complex_ruelle_operator(const Model& M, const RealPotential& re, const RealPotential& im,
                                                     int d) {
    if (re.k != im.k || re.v.size() != im.v.size()) throw std::invalid_argument("depth mismatch: real and imaginary parts");
    std::vector<std::complex<double>> w(re.v.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(std::complex<double>(re.v[i], im.v[i]));
    return ComplexRuelleOperator(M, d, re.k, w);
}

template <class T, class U>
std::vector<U> ruelle_apply(const TransferOperatorT<T>& L, std::vector<U> u, int n) {
    for (int i = 0; i < n; ++i) u = L.apply(u);
    return u;
}

struct PerronData {
    double lambda = 0;
    std::vector<double> vec;  // sup-normalised, positive
    double residual = 0;      // ||L v - lambda v||_inf / ||v||_inf
    long iterations = 0;
};

namespace detail {
template <class Step>
PerronData power_iteration(std::size_t N, Step step, const ThermoConfig& cfg) {
    std::vector<double> u(N, 1.0);
    PerronData out;
    auto run = [&](double shift, long budget) {
        for (long it = 0; it < budget; ++it) {
            auto v = step(u);
            for (std::size_t i = 0; i < N; ++i) v[i] += shift * u[i];
            double lo = std::numeric_limits<double>::infinity(), hi = 0;
            for (std::size_t i = 0; i < N; ++i) {
                if (!(u[i] > 0)) throw NonMixing("Perron iteration lost positivity");
                double q = v[i] / u[i];
                lo = std::min(lo, q);
                hi = std::max(hi, q);
            }
            double mx = *std::max_element(v.begin(), v.end());
            for (auto& x : v) x /= mx;
            u = std::move(v);
            ++out.iterations;
            if (hi - lo <= cfg.tolerance * hi) {
                out.lambda = 0.5 * (lo + hi) - shift;
                return true;
            }
        }
        return false;
    };
    bool ok = run(0.0, cfg.max_iters / 2);
    if (!ok) {
        // periodic behaviour: iterate L + I, which has the same Perron vector
        std::fill(u.begin(), u.end(), 1.0);
        ok = run(1.0, cfg.max_iters - cfg.max_iters / 2);
    }
    if (!ok) throw NoConvergence("eigen-iteration did not converge within max_iters");
    out.vec = u;
    auto Lu = step(u);
    double r = 0;
    for (std::size_t i = 0; i < N; ++i) r = std::max(r, std::abs(Lu[i] - out.lambda * u[i]));
    out.residual = r;
    return out;
}
}  // namespace detail

inline PerronData perron_right(const RuelleOperator& L, const ThermoConfig& cfg = {}) {
    return detail::power_iteration(L.size(), [&](const std::vector<double>& u) { return L.apply(u); }, cfg);
}
inline PerronData perron_left(const RuelleOperator& L, const ThermoConfig& cfg = {}) {
    return detail::power_iteration(L.size(), [&](const std::vector<double>& u) { return L.apply_transpose(u); }, cfg);
}

inline void require_mixing(const Model& M) {
    if (!is_topologically_mixing(tile_shift(M))) throw NonMixing("tile shift is not topologically mixing");
}

struct PressureResult {
    double P = 0;
    double residual = 0;
};

// log of the Perron root of the t*phi weighted operator on depth-k words
inline PressureResult pressure_ex(const Potential& phi, double t, const ThermoConfig& cfg = {}) {
    require_mixing(phi.model());
    auto L = ruelle_operator(phi.model(), real_potential(phi, t), phi.depth());
    auto pd = perron_right(L, cfg);
    return {std::log(pd.lambda), pd.residual};
}
inline double pressure(const Potential& phi, double t, const ThermoConfig& cfg = {}) { return pressure_ex(phi, t, cfg).P; }

// c_n = min over admissible (n+k-1)-words of S_n phi, by min-plus iteration over k-words
inline std::vector<Rational> birkhoff_minima(const Potential& phi, int n_max) {
    const Model& M = phi.model();
    const int k = phi.depth();
    const WordCodec& codec = phi.codec();
    const std::size_t N = phi.size();
    std::vector<std::vector<std::uint64_t>> next(N);
    for (std::uint64_t r = 0; r < N; ++r) {
        Word w = codec.decode(r, k);
        for (int Y = 0; Y < M.T; ++Y) {
            if (!M.admissible(w.back(), Y)) continue;
            Word v(w.begin() + 1, w.end());
            v.push_back(Y);
            next[r].push_back(codec.encode(v));
        }
    }
    std::vector<Rational> f(phi.values()), out;
    for (int n = 1; n <= n_max; ++n) {
        out.push_back(*std::min_element(f.begin(), f.end()));
        if (n == n_max) break;
        std::vector<std::optional<Rational>> g(N);
        for (std::uint64_t r = 0; r < N; ++r)
            for (auto s : next[r]) {
                Rational c = f[r] + phi.at(s);
                if (!g[s] || c < *g[s]) g[s] = c;
            }
        for (std::uint64_t r = 0; r < N; ++r) f[r] = g[r] ? *g[r] : Rational(0);
    }
    return out;
}

struct Positivity {
    int n = 0;
    Rational c;  // c_n > 0
};
inline std::optional<Positivity> eventual_positivity(const Potential& phi, int cap = 64) {
    auto c = birkhoff_minima(phi, cap);
    for (int n = 1; n <= cap; ++n)
        if (c[n - 1] > 0) return Positivity{n, c[n - 1]};
    return std::nullopt;
}

struct S0Result {
    double s0 = 0;
    std::vector<std::pair<double, double>> samples;  // (t, P(-t phi)) in increasing t
};

// the zero of t -> P(-t phi) by bracketing and bisection
inline S0Result s0_ex(const Potential& phi, double tol = 1e-12, const ThermoConfig& cfg = {}) {
    if (!eventual_positivity(phi)) throw NotEventuallyPositive("eventual positivity not certified within cap");
    S0Result r;
    auto P = [&](double t) {
        double p = pressure(phi, -t, cfg);
        r.samples.emplace_back(t, p);
        return p;
    };
    double lo = 0, hi = 1;
    P(lo);
    while (P(hi) > 0) {
        lo = hi;
        hi *= 2;
        if (hi > 1e12) throw std::runtime_error("s0 bracketing failed");
    }
    for (int i = 0; i < 400 && hi - lo > tol * std::max(1.0, hi); ++i) {
        double mid = 0.5 * (lo + hi);
        (P(mid) > 0 ? lo : hi) = mid;
    }
    r.s0 = 0.5 * (lo + hi);
    std::sort(r.samples.begin(), r.samples.end());
    for (std::size_t i = 1; i < r.samples.size(); ++i)
        if (r.samples[i].first > r.samples[i - 1].first && !(r.samples[i].second < r.samples[i - 1].second))
            throw std::logic_error("sampled pressure not strictly decreasing");
    return r;
}
inline double s0(const Potential& phi) { return s0_ex(phi).s0; }

// P(-t phi) on a grid, asserted strictly decreasing
inline std::vector<std::pair<double, double>> pressure_curve(const Potential& phi, const std::vector<double>& ts) {
    std::vector<std::pair<double, double>> out;
    for (double t : ts) out.emplace_back(t, pressure(phi, -t));
    return out;
}
inline bool strictly_decreasing(const std::vector<std::pair<double, double>>& curve) {
    for (std::size_t i = 1; i < curve.size(); ++i)
        if (!(curve[i].second < curve[i - 1].second)) return false;
    return true;
}

struct NormalizedPotentialData {
    int d = 1;
    double P = 0;
    std::vector<double> u, m, gibbs;
    double right_residual = 0, left_residual = 0;
    RealPotential tilde;  // t phi - P + log u - log u o sigma, of depth d+1
};

inline NormalizedPotentialData normalize(const Potential& phi, double t, int d = 0, const ThermoConfig& cfg = {}) {
    const Model& M = phi.model();
    require_mixing(M);
    if (d == 0) d = phi.depth();
    if (d < phi.depth()) throw std::invalid_argument("depth mismatch: d below the potential depth");
    auto psi = real_potential(phi, t);
    auto L = ruelle_operator(M, psi, d);
    auto right = perron_right(L, cfg);
    auto left = perron_left(L, cfg);
    NormalizedPotentialData out;
    out.d = d;
    out.P = std::log(right.lambda);
    out.u = right.vec;
    out.m = left.vec;
    double sm = 0;
    for (double x : out.m) sm += x;
    for (auto& x : out.m) x /= sm;
    double dot = 0;
    for (std::size_t i = 0; i < out.u.size(); ++i) dot += out.m[i] * out.u[i];
    for (auto& x : out.u) x /= dot;
    out.gibbs.resize(out.u.size());
    for (std::size_t i = 0; i < out.u.size(); ++i) out.gibbs[i] = out.m[i] * out.u[i];
    out.right_residual = right.residual / right.lambda;
    out.left_residual = left.residual / left.lambda;

    WordCodec codec(M);
    const int k = phi.depth();
    out.tilde.k = d + 1;
    out.tilde.v.resize(codec.total(d + 1));
    for (std::uint64_t r = 0; r < out.tilde.v.size(); ++r) {
        Word v = codec.decode(r, d + 1);
        Word head(v.begin(), v.begin() + d), tail(v.begin() + 1, v.end()), win(v.begin(), v.begin() + k);
        out.tilde.v[r] = psi.v[codec.encode(win)] - out.P + std::log(out.u[codec.encode(head)]) -
                         std::log(out.u[codec.encode(tail)]);
    }
    return out;
}

// the normalized operator on depth-d functions
inline RuelleOperator tilde_operator(const Model& M, const NormalizedPotentialData& nd) {
    return ruelle_operator(M, nd.tilde, nd.d);
}

// Functions on the two 0-tiles: u_c lives on the d-words whose first tile lies in X^0_c.
template <class U>
struct SplitPair {
    std::vector<U> black, white;
};

template <class T, class U>
SplitPair<U> split(const TransferOperatorT<T>& L, const std::vector<U>& u) {
    SplitPair<U> p;
    for (std::size_t r = 0; r < L.size(); ++r) (L.face(r) == Color::black ? p.black : p.white).push_back(u[r]);
    return p;
}
template <class T, class U>
std::vector<U> join(const TransferOperatorT<T>& L, const SplitPair<U>& p) {
    std::size_t nb = 0, nw = 0;
    for (std::size_t r = 0; r < L.size(); ++r) (L.face(r) == Color::black ? nb : nw)++;
    if (p.black.size() != nb || p.white.size() != nw) throw std::invalid_argument("depth mismatch: split pair sizes");
    std::vector<U> u(L.size());
    std::size_t ib = 0, iw = 0;
    for (std::size_t r = 0; r < L.size(); ++r) u[r] = L.face(r) == Color::black ? p.black[ib++] : p.white[iw++];
    return u;
}

// the split operator: v_c = sum_{c'} L^{(n)}_{psi, X^0_c, X^0_c'} (u_c')
template <class T, class U>
SplitPair<U> split_ruelle_apply(const TransferOperatorT<T>& L, const SplitPair<U>& p, int n) {
    return split(L, ruelle_apply(L, join(L, p), n));
}

// L^{(n)}_{psi, X^0_c, E}(u) on the d-words of X^0_c: the sum over the n-tiles in E that f^n
// maps onto X^0_c. E is a set of admissible n-words; an empty sum gives 0.
template <class T, class U>
std::vector<U> split_ruelle_piece(const TransferOperatorT<T>& L, Color c, const std::set<Word>& E, int n,
                                  const std::vector<U>& u) {
    const Model& M = L.model();
    const int d = L.depth(), k = L.potential_depth();
    const WordCodec& codec = L.codec();
    if (u.size() != L.size()) throw std::invalid_argument("depth mismatch: function has the wrong size");
    for (const auto& W : E)
        if (static_cast<int>(W.size()) != n || !M.admissible_word(W))
            throw std::invalid_argument("E is not a union of admissible n-tiles");
    std::vector<U> out;
    for (std::size_t r = 0; r < L.size(); ++r) {
        if (L.face(r) != c) continue;
        Word y = codec.decode(r, d);
        U s(0);
        if (n == 0) {
            // E is then a set containing the empty word or nothing: identity on X^0_c
            if (E.count(Word{})) s = u[r];
        } else {
            for (const auto& W : E) {
                if (M.color[W.back()] != c) continue;
                Word z = W;
                z.insert(z.end(), y.begin(), y.end());
                T wt(1);
                for (int j = 0; j < n; ++j) wt *= L.weights()[codec.encode(Word(z.begin() + j, z.begin() + j + k))];
                s += U(wt) * u[codec.encode(Word(z.begin(), z.begin() + d))];
            }
        }
        out.push_back(s);
    }
    return out;
}

// all admissible n-words inside the 0-tile c (E = X^0_c)
inline std::set<Word> words_in_zero_tile(const Model& M, Color c, int n) {
    std::set<Word> E;
    if (n == 0) {
        E.insert(Word{});
        return E;
    }
    WordCodec codec(M);
    for (std::uint64_t r = 0; r < codec.total(n); ++r) {
        Word w = codec.decode(r, n);
        if (M.face[w[0]] == c) E.insert(w);
    }
    return E;
}

struct GapEstimate {
    double ratio = 0;     // fitted geometric decay
    double residual = 0;  // RMS of the log fit
    std::vector<std::vector<double>> norms;  // per sample, per n in range
};

// Mean-zero inputs under the normalized split operator: sup norms over n in [n_lo, n_hi],
// least-squares fit of their logarithms.
inline GapEstimate spectral_gap_estimate(const Potential& phi, double t, int n_lo, int n_hi, int samples = 4,
                                         unsigned seed = 1, int d = 0) {
    if (n_lo < 0 || n_hi <= n_lo) throw std::invalid_argument("bad n range");
    const Model& M = phi.model();
    auto nd = normalize(phi, t, d);
    auto L = tilde_operator(M, nd);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    GapEstimate g;
    std::vector<double> xs, ys;
    bool any = false;
    for (int s = 0; s < samples; ++s) {
        std::vector<double> u(L.size());
        for (auto& x : u) x = U(rng);
        double mean = 0;
        for (std::size_t i = 0; i < u.size(); ++i) mean += nd.gibbs[i] * u[i];
        for (auto& x : u) x -= mean;
        u = ruelle_apply(L, u, n_lo);
        std::vector<double> row;
        for (int n = n_lo; n <= n_hi; ++n) {
            double mx = 0;
            for (double x : u) mx = std::max(mx, std::abs(x));
            row.push_back(mx);
            if (mx >= 1e-14) {
                any = true;
                xs.push_back(n);
                ys.push_back(std::log(mx));
            }
            u = L.apply(u);
        }
        g.norms.push_back(row);
    }
    if (!any || xs.size() < 2) throw FitDegenerate("fit degenerate: all norms below 1e-14");
    // one slope shared by all samples, one intercept per sample
    const std::size_t per = static_cast<std::size_t>(n_hi - n_lo + 1);
    double sxx = 0, sxy = 0;
    std::vector<std::pair<double, double>> means;
    for (int s = 0; s < samples; ++s) {
        double mx = 0, my = 0;
        std::size_t cnt = 0;
        for (std::size_t j = 0; j < per; ++j)
            if (g.norms[s][j] >= 1e-14) {
                mx += n_lo + static_cast<double>(j);
                my += std::log(g.norms[s][j]);
                ++cnt;
            }
        if (cnt == 0) {
            means.emplace_back(0, 0);
            continue;
        }
        mx /= cnt;
        my /= cnt;
        means.emplace_back(mx, my);
        for (std::size_t j = 0; j < per; ++j)
            if (g.norms[s][j] >= 1e-14) {
                double x = n_lo + static_cast<double>(j) - mx, y = std::log(g.norms[s][j]) - my;
                sxx += x * x;
                sxy += x * y;
            }
    }
    if (sxx == 0) throw FitDegenerate("fit degenerate: single point");
    double slope = sxy / sxx;
    double ss = 0;
    std::size_t cnt = 0;
    for (int s = 0; s < samples; ++s)
        for (std::size_t j = 0; j < per; ++j)
            if (g.norms[s][j] >= 1e-14) {
                double x = n_lo + static_cast<double>(j) - means[s].first;
                double y = std::log(g.norms[s][j]) - means[s].second;
                ss += (y - slope * x) * (y - slope * x);
                ++cnt;
            }
    g.ratio = std::exp(slope);
    g.residual = std::sqrt(ss / cnt);
    return g;
}

}  // namespace etm
