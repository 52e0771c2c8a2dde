#pragma once

#include "model.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace etm {

// The point coded by the eventually periodic tile itinerary pre . per^infinity.
struct CodedPoint {
    Word pre, per;

    int q() const { return static_cast<int>(pre.size()); }
    int p() const { return static_cast<int>(per.size()); }
    int pos(long i) const {  // normalised position in [0, q+p)
        if (i < q()) return static_cast<int>(i);
        return q() + static_cast<int>((i - q()) % p());
    }
    int tile(long i) const {
        int j = pos(i);
        return j < q() ? pre[j] : per[j - q()];
    }
    Word prefix(int L) const {
        Word w;
        for (int i = 0; i < L; ++i) w.push_back(tile(i));
        return w;
    }
    CodedPoint shifted(long k) const {
        if (k <= q()) return {Word(pre.begin() + k, pre.end()), per};
        int r = static_cast<int>((k - q()) % p());
        Word np(per.begin() + r, per.end());
        np.insert(np.end(), per.begin(), per.begin() + r);
        return {{}, np};
    }
    CodedPoint prepended(const Word& w) const {
        CodedPoint c = *this;
        c.pre.insert(c.pre.begin(), w.begin(), w.end());
        return c;
    }
    bool operator==(const CodedPoint& o) const { return pre == o.pre && per == o.per; }
    bool operator<(const CodedPoint& o) const { return pre != o.pre ? pre < o.pre : per < o.per; }
};

inline void check_coding(const Model& M, const CodedPoint& x) {
    if (x.per.empty()) throw std::invalid_argument("inadmissible coding: empty period");
    Word w = x.pre;
    w.insert(w.end(), x.per.begin(), x.per.end());
    w.insert(w.end(), x.per.begin(), x.per.end());
    if (!M.admissible_word(w)) throw std::invalid_argument("inadmissible coding");
}

// Location of the fixed point of f^p in the p-tile coded by per, from the composed map
// G = Phi_{v0} o ... o Phi_{v(p-1)}: a fixed post point wins, then a fixed edge, else off C.
inline Loc cycle_location(const Model& M, const Word& per) {
    const int m = M.m;
    Loc fixed_edge = kOff;
    for (Loc l = 0; l < 2 * m; ++l) {
        Loc g = l;
        for (int i = static_cast<int>(per.size()) - 1; i >= 0 && g != kOff; --i) g = M.Phi(per[i], g);
        if (g != l) continue;
        if (is_post(l)) return l;
        if (fixed_edge == kOff) fixed_edge = l;
    }
    return fixed_edge;
}

// l[i] for i in [0, q+p]; l[q+p] == l[q]
inline std::vector<Loc> locations(const Model& M, const CodedPoint& x) {
    const int q = x.q(), p = x.p();
    std::vector<Loc> l(q + p + 1, kOff);
    l[q] = l[q + p] = cycle_location(M, x.per);
    for (int i = q + p - 1; i > q; --i) l[i] = M.Phi(x.tile(i), l[i + 1]);
    for (int i = q - 1; i >= 0; --i) l[i] = M.Phi(x.tile(i), l[i + 1]);
    return l;
}

// The 1-cell carrying f^i(x): dim 2 a tile, 1 an edge, 0 a vertex.
struct Cell {
    int dim, id;
    bool operator==(const Cell& o) const { return dim == o.dim && id == o.id; }
};

inline Cell cell_of(const Model& M, int tile, Loc next) {
    if (next == kOff) return {2, tile};
    if (is_post(next)) return {0, M.an.tile_vert_at[tile][next / 2]};
    return {1, M.an.tile_edge_at[tile][next / 2]};
}

inline std::vector<int> tiles_at(const Model& M, const Cell& c) {
    if (c.dim == 2) return {c.id};
    if (c.dim == 1) {
        std::vector<int> t{M.an.edge_tiles[c.id][0], M.an.edge_tiles[c.id][1]};
        std::sort(t.begin(), t.end());
        return t;
    }
    auto t = M.an.flower[c.id];
    std::sort(t.begin(), t.end());
    return t;
}

struct ResolvedPoint {
    CodedPoint code;
    std::vector<Loc> loc;
    std::vector<Cell> cells;  // for positions [0, q+p)

    ResolvedPoint(const Model& M, CodedPoint c) : code(std::move(c)) {
        check_coding(M, code);
        loc = locations(M, code);
        for (int i = 0; i < code.q() + code.p(); ++i) cells.push_back(cell_of(M, code.tile(i), loc[i + 1]));
    }
    const Cell& cell(long i) const { return cells[code.pos(i)]; }
    Loc location(long i) const { return loc[code.pos(i)]; }
    bool off_curve_from(long i) const {  // f^j(x) off C for all j >= i
        for (int j = code.pos(i); j < code.q() + code.p(); ++j)
            if (loc[j] != kOff) return false;
        for (int j = code.q(); j < code.q() + code.p(); ++j)
            if (loc[j] != kOff) return false;
        return true;
    }
};

inline ResolvedPoint point_of_word(const Model& M, const CodedPoint& c) { return ResolvedPoint(M, c); }

// Two codings give the same point iff the level-1 cells along the orbits agree; both cell
// sequences are periodic past max(q) with period dividing lcm(p), so a finite window decides.
inline bool same_point(const ResolvedPoint& a, const ResolvedPoint& b) {
    long bound = std::max(a.code.q(), b.code.q()) + std::lcm<long>(a.code.p(), b.code.p());
    for (long i = 0; i < bound; ++i)
        if (!(a.cell(i) == b.cell(i))) return false;
    return true;
}
inline bool same_point(const Model& M, const CodedPoint& a, const CodedPoint& b) {
    return same_point(ResolvedPoint(M, a), ResolvedPoint(M, b));
}

// All n-tile words whose tile contains the point.
inline std::vector<Word> tiles_containing(const Model& M, const ResolvedPoint& x, int n) {
    std::vector<Word> cur{Word{}};
    for (int i = n - 1; i >= 0; --i) {
        std::vector<Word> next;
        for (int X : tiles_at(M, x.cell(i)))
            for (const auto& w : cur)
                if (w.empty() || M.admissible(X, w[0])) {
                    Word v{X};
                    v.insert(v.end(), w.begin(), w.end());
                    next.push_back(std::move(v));
                }
        cur = std::move(next);
    }
    std::sort(cur.begin(), cur.end());
    return cur;
}

}  // namespace etm
