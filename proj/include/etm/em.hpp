#pragma once

#include "model.hpp"
#include "rational.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

namespace etm {

// The curve C as the circle [0, m): the 0-edge E_j is [j, j+1] and the i-th 1-edge of its
// chain is [j + i/L, j + (i+1)/L]. f|C maps each 1-edge affinely onto its image 0-edge.
class CurveCircle {
public:
    struct Piece {
        Rational a, b;  // a < b, b may equal m
        int image = 0;
        bool reversed = false;
        int edge = 0;
    };

    explicit CurveCircle(const Model& M) : m_(M.m) {
        const auto& r = M.rule;
        for (int j = 0; j < m_; ++j) {
            const auto& chain = r.curve_cycle[j].edges;
            const int L = static_cast<int>(chain.size());
            for (int i = 0; i < L; ++i) {
                int e = chain[i];
                const auto& ed = r.one_edges[e];
                int start = M.an.edge_start[e];
                bool rev = r.one_vertices[start].image != ed.image;
                pieces_.push_back({Rational(j) + Rational(i, L), Rational(j) + Rational(i + 1, L), ed.image, rev, e});
            }
        }
    }

    int m() const { return m_; }
    const std::vector<Piece>& pieces() const { return pieces_; }

    Rational wrap(Rational x) const {
        while (x < 0) x += m_;
        while (x >= m_) x -= m_;
        return x;
    }

    Rational apply(const Piece& P, const Rational& p) const {
        Rational tau = (p - P.a) / (P.b - P.a);
        if (P.reversed) tau = 1 - tau;
        return wrap(Rational(P.image) + tau);
    }
    // the point of P over y in its image 0-edge
    Rational pull(const Piece& P, const Rational& y) const {
        Rational tau = y - P.image;
        if (tau < 0) tau += m_;
        if (tau < 0 || tau > 1) throw std::logic_error("point outside the image 0-edge");
        if (P.reversed) tau = 1 - tau;
        return wrap(P.a + tau * (P.b - P.a));
    }

    Rational f(const Rational& p) const { return apply(piece_containing(p, true), p); }

    std::vector<Rational> preimages(const Rational& q) const {
        Rational y = wrap(q);
        std::vector<Rational> out;
        for (const auto& P : pieces_) {
            Rational tau = y - P.image;
            if (tau < 0) tau += m_;
            if (tau <= 1) out.push_back(pull(P, y));
            if (y == 0 && P.image == m_ - 1) out.push_back(pull(P, Rational(m_)));
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    bool is_vertex(Rational p, int level) const {
        p = wrap(p);
        for (int i = 0; i < level; ++i) {
            if (is_integer(p)) return true;
            p = f(p);
        }
        return is_integer(p);
    }

    // largest level-k vertex strictly before p, and smallest strictly after, cyclically
    Rational left(const Rational& p, int k) const { return side(wrap(p), k, true); }
    Rational right(const Rational& p, int k) const { return side(wrap(p), k, false); }

    // x in the closed union of the two level-k edges at the vertex p
    bool in_pair(const Rational& x, const Rational& p, int k) const {
        Rational L = left(p, k), R = right(p, k);
        return offset(x, L) <= offset(R, L);
    }

private:
    static bool is_integer(const Rational& x) { return denominator(x) == 1; }

    Rational offset(const Rational& x, const Rational& base) const { return wrap(x - base); }

    // the 1-edge (a, b] containing p when open_left, else [a, b)
    const Piece& piece_containing(const Rational& p, bool open_left) const {
        Rational q = (open_left && p == 0) ? Rational(m_) : p;
        for (const auto& P : pieces_)
            if (open_left ? (P.a < q && q <= P.b) : (P.a <= q && q < P.b)) return P;
        throw std::logic_error("point outside the curve circle");
    }

    Rational side(const Rational& p, int k, bool is_left) const {
        if (k == 0) {
            Rational fl = floor_rat(p);
            if (is_left) return wrap(fl == p ? fl - 1 : fl);
            return wrap(fl + 1);
        }
        const Piece& P = piece_containing(p, is_left);
        Rational y = apply(P, p);
        // moving left on P moves left on the image unless P is reversed
        return pull(P, side(y, k - 1, is_left != P.reversed));
    }

    static Rational floor_rat(const Rational& x) {
        BigInt n = numerator(x), d = denominator(x);
        BigInt q = n / d;
        if (n < 0 && q * d != n) q -= 1;
        return Rational(q);
    }

    int m_;
    std::vector<Piece> pieces_;
};

struct EmResult {
    std::vector<Rational> points;  // E_m(p_n, ..., p_1; q), sorted
    std::vector<std::size_t> cards;  // card E_m(p_i, ..., p_1; q) for i = 1..n
};

// E_m by the recursion S_1 = f^-1(q) in pair(p_1), S_{i+1} = f^-1(S_i) in pair(p_{i+1}).
// seq holds p_1, ..., p_n (nearest to q first).
inline EmResult enumerate_Em(const CurveCircle& C, int m, const std::vector<Rational>& seq, const Rational& q) {
    for (const auto& p : seq)
        if (!C.is_vertex(p, m)) throw std::invalid_argument("sequence point is not a level-m vertex on the curve");
    if (q < 0 || q >= C.m()) throw std::invalid_argument("target outside the curve circle");
    EmResult r;
    std::vector<Rational> S{q};
    for (const auto& p : seq) {
        std::vector<Rational> next;
        for (const auto& x : S)
            for (const auto& y : C.preimages(x))
                if (C.in_pair(y, p, m)) next.push_back(y);
        std::sort(next.begin(), next.end());
        next.erase(std::unique(next.begin(), next.end()), next.end());
        S = std::move(next);
        r.cards.push_back(S.size());
    }
    r.points = S;
    return r;
}

struct EmCheck {
    std::size_t max_card = 0;
    double bound = 0;
    bool first_le_2 = true;
    bool doubling = true;
    bool within_bound = true;
};

// One random run: q is a level-m vertex; p_{i+1} is a level-m neighbour (or the point itself) of
// a random preimage of the current set, preferring preimages that have preimages in turn, so
// the sets stay non-empty where f|C allows it. The greedy variant takes the neighbour that
// keeps the most points.
inline EmCheck random_Em_run(const CurveCircle& C, int m, int n, std::mt19937_64& rng, bool greedy = false,
                             EmResult* out = nullptr) {
    std::uniform_int_distribution<long long> U(0, (1LL << 30) - 1);
    auto pick = [&](std::size_t k) { return static_cast<std::size_t>(U(rng)) % k; };
    Rational u = Rational(static_cast<long long>(pick(C.m()))) + Rational(U(rng), 1LL << 30);
    Rational q = C.left(u, m);
    std::vector<Rational> seq;
    std::vector<Rational> S{q};
    for (int i = 0; i < n; ++i) {
        std::vector<Rational> pre, good;
        for (const auto& x : S)
            for (const auto& y : C.preimages(x)) {
                pre.push_back(y);
                if (!C.preimages(y).empty()) good.push_back(y);
            }
        if (pre.empty()) {
            seq.push_back(C.left(q, m));
            S.clear();
            continue;
        }
        const auto& from = good.empty() ? pre : good;
        auto keep = [&](const Rational& p) {
            std::vector<Rational> T;
            for (const auto& x : pre)
                if (C.in_pair(x, p, m)) T.push_back(x);
            std::sort(T.begin(), T.end());
            T.erase(std::unique(T.begin(), T.end()), T.end());
            return T;
        };
        std::vector<Rational> opts;
        if (greedy) {
            // every neighbour of every preimage; keep the one retaining the most points
            for (const auto& y : from) {
                opts.push_back(C.left(y, m));
                opts.push_back(C.right(y, m));
                if (C.is_vertex(y, m)) opts.push_back(y);
            }
            std::size_t best = 0;
            std::vector<Rational> bestS;
            Rational bp = opts[0];
            for (const auto& p : opts) {
                auto T = keep(p);
                if (T.size() > best) best = T.size(), bestS = T, bp = p;
            }
            seq.push_back(bp);
            S = bestS;
        } else {
            const Rational y = from[pick(from.size())];
            opts = {C.left(y, m), C.right(y, m)};
            if (C.is_vertex(y, m)) opts.push_back(y);
            seq.push_back(opts[pick(opts.size())]);
            S = keep(seq.back());
        }
    }
    auto r = enumerate_Em(C, m, seq, q);
    EmCheck c;
    c.bound = m * std::pow(2.0, static_cast<double>(seq.size()) / m);
    for (std::size_t i = 0; i < r.cards.size(); ++i) {
        c.max_card = std::max(c.max_card, r.cards[i]);
        if (i == 0 && r.cards[0] > 2) c.first_le_2 = false;
        if (i > 0 && r.cards[i] > 2 * r.cards[i - 1]) c.doubling = false;
        if (static_cast<double>(r.cards[i]) > m * std::pow(2.0, static_cast<double>(i + 1) / m)) c.within_bound = false;
    }
    if (out) *out = r;
    return c;
}

}  // namespace etm
