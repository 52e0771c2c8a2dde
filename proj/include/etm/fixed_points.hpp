#pragma once

#include "location.hpp"
#include "potential.hpp"
#include "shift.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace etm {

enum class PointClass { tile_interior = 0, edge_interior = 1, postcritical = 2 };

inline const char* class_name(PointClass c) {
    switch (c) {
        case PointClass::tile_interior: return "tile-interior";
        case PointClass::edge_interior: return "edge-interior";
        default: return "postcritical";
    }
}

// Identifies a fixed point of f^n: its periodic tile word (interior), its periodic word of
// on-curve 1-edges (edge interior), or the index of the post point.
struct PointKey {
    PointClass cls = PointClass::tile_interior;
    Word word;
    int post = -1;

    bool operator==(const PointKey& o) const { return cls == o.cls && word == o.word && post == o.post; }
    bool operator<(const PointKey& o) const {
        if (cls != o.cls) return cls < o.cls;
        if (post != o.post) return post < o.post;
        return word < o.word;
    }
};

inline std::string key_string(const Model& M, const PointKey& k) {
    switch (k.cls) {
        case PointClass::tile_interior: return "T:" + M.word_string(k.word);
        case PointClass::edge_interior: {
            std::string s = "E:";
            for (std::size_t i = 0; i < k.word.size(); ++i) s += (i ? "." : "") + M.rule.one_edges[k.word[i]].id;
            return s;
        }
        default: return "P:" + M.rule.post[k.post];
    }
}

// the key of f(x)
inline PointKey rotate_key(const Model& M, const PointKey& k) {
    PointKey r = k;
    if (k.cls == PointClass::postcritical)
        r.post = M.post_image[k.post];
    else
        std::rotate(r.word.begin(), r.word.begin() + 1, r.word.end());
    return r;
}

inline int primitive_period(const Word& w) {
    const int n = static_cast<int>(w.size());
    for (int p = 1; p < n; ++p) {
        if (n % p) continue;
        bool ok = true;
        for (int i = p; i < n && ok; ++i) ok = w[i] == w[i - p];
        if (ok) return p;
    }
    return n;
}

inline bool is_least_rotation(const Word& w) {
    const std::size_t n = w.size();
    for (std::size_t r = 1; r < n; ++r)
        for (std::size_t i = 0; i < n; ++i) {
            int a = w[(i + r) % n], b = w[i];
            if (a < b) return false;
            if (a > b) break;
        }
    return true;
}

inline int post_period(const Model& M, int j) {
    int p = 1;
    for (int k = M.post_image[j]; k != j; k = M.post_image[k]) {
        if (++p > M.m) return 0;  // j is not periodic
    }
    return p;
}

// deg_{f^n} at the post point P_j
inline long long post_degree_product(const Model& M, int j, int n) {
    long long d = 1;
    for (int i = 0; i < n; ++i) {
        d *= M.post_deg[j];
        j = M.post_image[j];
    }
    return d;
}

// Locations l_0..l_{n-1} of the fixed point along a periodic tile word (l_n = l_0).
inline std::vector<Loc> cycle_locations(const Model& M, const Word& w) {
    const int n = static_cast<int>(w.size());
    std::vector<Loc> l(n + 1);
    l[0] = l[n] = cycle_location(M, w);
    for (int i = n - 1; i > 0; --i) l[i] = M.Phi(w[i], l[i + 1]);
    return l;
}

// Fixed point of the edge word (1-edge ids): an endpoint fixed by the composed Psi maps makes
// it postcritical, otherwise it lies inside the n-edge.
inline PointKey classify_edge_word(const Model& M, const Word& ew) {
    const int m = M.m;
    const int z = M.edge_zero(ew[0]);
    for (Loc l : {2 * z, 2 * ((z + 1) % m)}) {
        Loc g = l;
        for (int i = static_cast<int>(ew.size()) - 1; i >= 0 && g >= 0; --i) g = M.Psi(M.curve_index[ew[i]], g);
        if (g == l) return {PointClass::postcritical, {}, l / 2};
    }
    return {PointClass::edge_interior, ew, -1};
}

inline PointKey classify_tile_word(const Model& M, const Word& w, Loc l0) {
    if (l0 == kOff) return {PointClass::tile_interior, w, -1};
    if (is_post(l0)) return {PointClass::postcritical, {}, l0 / 2};
    auto l = cycle_locations(M, w);
    Word ew(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) ew[i] = M.an.tile_edge_at[w[i]][l[i + 1] / 2];
    return classify_edge_word(M, ew);
}
inline PointKey classify_tile_word(const Model& M, const Word& w) {
    return classify_tile_word(M, w, cycle_location(M, w));
}

// Visits every periodic tile word of length n with the location of its fixed point, in
// lexicographic order. The composed map Phi_{w0} o ... o Phi_{wi} is carried along the DFS.
inline std::uint64_t for_each_tile_cycle(const Model& M, int n, const std::function<void(const Word&, Loc)>& visit) {
    if (n < 1) throw std::invalid_argument("period must be at least 1");
    const int L = 2 * M.m + 1;
    std::vector<std::vector<Loc>> G(n + 1, std::vector<Loc>(L));
    for (int s = 0; s < L; ++s) G[0][s] = s - 1;
    Word w(n);
    std::uint64_t count = 0;
    std::function<void(int)> rec = [&](int i) {
        if (i == n) {
            if (!M.admissible(w[n - 1], w[0])) return;
            Loc found = kOff;
            for (Loc l = 0; l < 2 * M.m; ++l) {
                if (G[n][l + 1] != l) continue;
                if (is_post(l)) {
                    found = l;
                    break;
                }
                if (found == kOff) found = l;
            }
            ++count;
            visit(w, found);
            return;
        }
        auto candidates = [&](auto&& body) {
            if (i == 0)
                for (int Y = 0; Y < M.T; ++Y) body(Y);
            else
                for (int Y : M.by_face[idx(M.color[w[i - 1]])]) body(Y);
        };
        candidates([&](int Y) {
            w[i] = Y;
            for (int s = 0; s < L; ++s) {
                Loc a = M.phi[Y][s];
                G[i + 1][s] = G[i][a + 1];
            }
            rec(i + 1);
        });
    };
    rec(0);
    return count;
}

// Level-1 cells carrying f^i(x), i < n, for a fixed point of f^n.
inline std::vector<Cell> key_cells(const Model& M, const PointKey& k, int n) {
    std::vector<Cell> c(n);
    if (k.cls == PointClass::tile_interior) {
        for (int i = 0; i < n; ++i) c[i] = {2, k.word[i]};
    } else if (k.cls == PointClass::edge_interior) {
        for (int i = 0; i < n; ++i) c[i] = {1, k.word[i]};
    } else {
        int j = k.post;
        for (int i = 0; i < n; ++i) {
            c[i] = {0, M.an.post_vertex[j]};
            j = M.post_image[j];
        }
    }
    return c;
}

// A tile coding of the point: at each step the smallest tile carrying f^i(x) that may follow
// the previous one. The state (i mod n, tile) eventually repeats, closing the lasso.
inline CodedPoint representative_code(const Model& M, const PointKey& k, int n) {
    if (k.cls == PointClass::tile_interior) return {{}, k.word};
    auto cells = key_cells(M, k, n);
    std::map<std::pair<int, int>, int> seen;
    Word seq;
    int prev = -1;
    for (long i = 0;; ++i) {
        int pos = static_cast<int>(i % n);
        int pick = -1;
        for (int X : tiles_at(M, cells[pos]))
            if (prev < 0 || M.admissible(prev, X)) {
                pick = X;
                break;
            }
        if (pick < 0) throw std::logic_error("no tile continues the coding of " + key_string(M, k));
        auto [it, fresh] = seen.emplace(std::make_pair(pos, pick), static_cast<int>(seq.size()));
        if (!fresh) {
            int r = it->second;
            return {Word(seq.begin(), seq.begin() + r), Word(seq.begin() + r, seq.end())};
        }
        seq.push_back(pick);
        prev = pick;
    }
}

struct FixedPoint {
    PointKey key;
    CodedPoint code;
    long long deg = 1;
    int period = 1;  // primitive period under f
    long long m_tile = 0, m_edge_color = 0, m_edge = 0, m_post = 0;

    long long identity_lhs() const { return m_tile - m_edge_color + m_edge + m_post; }
};

// All fixed points of f^n, each once, sorted by key. On-curve points come from the edge shift
// and V^0; interior points from tile words whose fixed point lies off C. With
// multiplicities on, every word of the tile and edge-color shifts is classified too.
class FixedPointLedger {
public:
    FixedPointLedger(const Model& M, int n, bool multiplicities = true) : M_(&M), n_(n) {
        if (n < 1) throw std::invalid_argument("period must be at least 1");
        auto E = edge_shift(M);
        for_each_periodic_word(E, n, [&](const Word& s) {
            Word ew(s.size());
            for (std::size_t i = 0; i < s.size(); ++i) ew[i] = M.curve_edges[s[i]];
            ++slot(classify_edge_word(M, ew)).m_edge;
        });
        for (int j = 0; j < M.m; ++j) {
            int p = post_period(M, j);
            if (p > 0 && n % p == 0) ++slot({PointClass::postcritical, {}, j}).m_post;
        }
        for_each_tile_cycle(M, n, [&](const Word& w, Loc l) {
            if (l == kOff) {
                ++slot({PointClass::tile_interior, w, -1}).m_tile;
            } else if (multiplicities) {
                auto k = classify_tile_word(M, w, l);
                auto it = index_.find(k);
                if (it == index_.end())
                    throw std::logic_error("tile word " + M.word_string(w) + " codes an on-curve point " +
                                           key_string(M, k) + " missing from the edge shift and V0");
                ++points_[it->second].m_tile;
            }
        });
        if (multiplicities) {
            auto EC = edge_color_shift(M);
            for_each_periodic_word(EC, n, [&](const Word& s) {
                Word ew(s.size());
                for (std::size_t i = 0; i < s.size(); ++i) ew[i] = EC.states[s[i]].edge;
                auto k = classify_edge_word(M, ew);
                auto it = index_.find(k);
                if (it == index_.end()) throw std::logic_error("edge-color word codes an unknown point");
                ++points_[it->second].m_edge_color;
            });
        }
        // sort by key and finish the records
        std::vector<FixedPoint> sorted;
        for (auto& [k, i] : index_) sorted.push_back(std::move(points_[i]));
        points_ = std::move(sorted);
        index_.clear();
        for (std::size_t i = 0; i < points_.size(); ++i) {
            auto& x = points_[i];
            index_.emplace(x.key, static_cast<int>(i));
            x.code = representative_code(M, x.key, n);
            if (x.key.cls == PointClass::postcritical) {
                x.deg = post_degree_product(M, x.key.post, n);
                x.period = post_period(M, x.key.post);
            } else {
                x.deg = 1;
                x.period = primitive_period(x.key.word);
            }
        }
        has_mult_ = multiplicities;
    }

    const Model& model() const { return *M_; }
    int n() const { return n_; }
    bool has_multiplicities() const { return has_mult_; }
    const std::vector<FixedPoint>& points() const { return points_; }
    const FixedPoint* find(const PointKey& k) const {
        auto it = index_.find(k);
        return it == index_.end() ? nullptr : &points_[it->second];
    }
    long long weighted_count() const {
        long long s = 0;
        for (const auto& x : points_) s += x.deg;
        return s;
    }

private:
    FixedPoint& slot(const PointKey& k) {
        auto it = index_.find(k);
        if (it != index_.end()) return points_[it->second];
        index_.emplace(k, static_cast<int>(points_.size()));
        points_.push_back({});
        points_.back().key = k;
        return points_.back();
    }

    const Model* M_;
    int n_;
    bool has_mult_ = false;
    std::vector<FixedPoint> points_;
    std::map<PointKey, int> index_;
};

// S_n phi at a fixed point of f^n, with the point evaluation of the potential
inline Rational fixed_point_birkhoff(const Potential& phi, const FixedPoint& x, int n) {
    if (x.key.cls == PointClass::tile_interior) return phi.periodic_sum(x.key.word);
    PointValues pv(phi, ResolvedPoint(phi.model(), x.code));
    return pv.birkhoff(n);
}

struct CountingRow {
    std::string key;
    PointClass cls;
    long long m_tile, m_edge_color, m_edge, m_post, deg;
    bool pass;
};
struct CountingReport {
    int n = 0;
    std::vector<CountingRow> rows;
    bool all_pass = true;
    std::vector<std::string> failures;
};

inline CountingReport verify_counting_identity(const FixedPointLedger& L) {
    if (!L.has_multiplicities()) throw std::invalid_argument("ledger built without multiplicities");
    CountingReport r;
    r.n = L.n();
    for (const auto& x : L.points()) {
        bool ok = x.identity_lhs() == x.deg;
        std::string k = key_string(L.model(), x.key);
        r.rows.push_back({k, x.key.cls, x.m_tile, x.m_edge_color, x.m_edge, x.m_post, x.deg, ok});
        if (!ok) {
            r.all_pass = false;
            r.failures.push_back(k);
        }
    }
    return r;
}
inline CountingReport verify_counting_identity(const Model& M, int n) {
    return verify_counting_identity(FixedPointLedger(M, n, true));
}

// fixed points of f^n with class and deg_{f^n}
inline const std::vector<FixedPoint>& fixed_points(const FixedPointLedger& L) { return L.points(); }

// (M_tile, M_edge_color, M_edge, M_post) at a fixed point given by a coding
inline std::array<long long, 4> multiplicities(const FixedPointLedger& L, const CodedPoint& x) {
    const Model& M = L.model();
    ResolvedPoint rx(M, x);
    for (const auto& p : L.points()) {
        if (same_point(rx, ResolvedPoint(M, p.code)))
            return {p.m_tile, p.m_edge_color, p.m_edge, p.m_post};
    }
    throw std::invalid_argument("point is not fixed by f^" + std::to_string(L.n()));
}

}  // namespace etm
