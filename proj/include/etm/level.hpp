#pragma once

#include "model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <memory>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace etm {

class ResourceCap : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The cell complex D^n. Tiles are numbered by the lexicographic rank of their words, vertex
// ids persist from level to level (the m post points are 0..m-1).
struct CellLevel {
    int n = 0;
    int m = 0;
    // tiles
    std::vector<int> parent, letter, shift;
    std::vector<Color> tile_color, tile_face;
    std::vector<int> tile_verts, tile_edges;  // m per tile
    std::vector<int> first_child;             // filled when level n+1 is built
    // edges
    std::vector<std::array<int, 2>> edge_ends;
    std::vector<int> edge_image;  // 0-edge f^n(e)
    std::vector<int> edge_zero;   // 0-edge containing e when e lies on C, else -1
    // vertices
    std::vector<int> vertex_image;  // f(v), a vertex id of level n-1 (post index at level 0)
    std::vector<Loc> vertex_loc;
    std::vector<std::vector<int>> flower;
    // C as a cycle of n-edges, each with its first vertex and whether f^n preserves direction
    struct CurveStep {
        int edge, start;
        bool preserving;
    };
    std::vector<CurveStep> curve;
    std::unordered_map<std::uint64_t, int> vkey, ekey;

    int tiles() const { return static_cast<int>(tile_color.size()); }
    int edges() const { return static_cast<int>(edge_ends.size()); }
    int vertices() const { return static_cast<int>(vertex_loc.size()); }
    int vert(int t, int j) const { return tile_verts[static_cast<std::size_t>(t) * m + j]; }
    int edge(int t, int j) const { return tile_edges[static_cast<std::size_t>(t) * m + j]; }

    int local_degree(int v) const {
        if (v < 0 || v >= vertices()) throw std::out_of_range("no such vertex");
        auto k = flower[v].size();
        if (k % 2) throw std::runtime_error("odd incident-tile count at vertex " + std::to_string(v));
        return static_cast<int>(k / 2);
    }
    bool intersect(int a, int b) const {
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                if (vert(a, i) == vert(b, j)) return true;
        return false;
    }
    // tiles sharing at least one vertex with t (t included)
    std::vector<int> neighbours(int t) const {
        std::vector<int> out;
        for (int j = 0; j < m; ++j)
            for (int u : flower[vert(t, j)]) out.push_back(u);
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }
    // does the closed tile meet the closed 0-edge E_j
    bool meets_zero_edge(int t, int j) const {
        for (int i = 0; i < m; ++i) {
            Loc l = vertex_loc[vert(t, i)];
            if (l == 2 * j + 1 || l == 2 * j || l == 2 * ((j + 1) % m)) return true;
        }
        return false;
    }
};

class Hierarchy {
public:
    explicit Hierarchy(const Model& M, std::size_t max_cells = 2'000'000) : M_(&M), cap_(max_cells) {
        levels_.push_back(std::make_unique<CellLevel>(level0()));
    }

    const Model& model() const { return *M_; }
    std::size_t cap() const { return cap_; }
    int built() const { return static_cast<int>(levels_.size()) - 1; }

    const CellLevel& level(int n) {
        if (n < 0) throw std::invalid_argument("negative level");
        while (built() < n) {
            const CellLevel& top = *levels_.back();
            double next = static_cast<double>(top.tiles()) * M_->deg * (2.0 * M_->m + 1) / 2.0;
            if (next > static_cast<double>(cap_))
                throw ResourceCap("level " + std::to_string(top.n + 1) + " needs about " +
                                  std::to_string(static_cast<long long>(next)) + " cells, cap is " +
                                  std::to_string(cap_));
            levels_.push_back(std::make_unique<CellLevel>(refine(*levels_.back())));
        }
        return *levels_[n];
    }

    // child of the level-L tile X with next letter Y (Y must satisfy face(Y) = color(X))
    int child(int L, int X, int Y) {
        if (L == 0) return Y;
        return level(L).first_child[X] + M_->pos_in_face[Y];
    }

    // id of the level-n tile with the given word
    int tile_of(const Word& w) {
        int t = w.empty() ? -1 : w[0];
        for (std::size_t i = 1; i < w.size(); ++i) t = child(static_cast<int>(i), t, w[i]);
        return t;
    }
    Word word_of(int n, int t) {
        Word w(n);
        for (int L = n; L >= 1; --L) {
            const auto& lv = level(L);
            w[L - 1] = lv.letter[t];
            t = lv.parent[t];
        }
        return w;
    }
    // prefix tile at level L <= n
    int ancestor(int n, int t, int L) {
        for (int k = n; k > L; --k) t = level(k).parent[t];
        return t;
    }

private:
    static std::uint64_t key(int kind, std::uint64_t parent, int cell) {
        return (static_cast<std::uint64_t>(kind) << 62) | (parent << 24) | static_cast<std::uint64_t>(cell);
    }

    CellLevel level0() const {
        const int m = M_->m;
        CellLevel L;
        L.n = 0;
        L.m = m;
        for (int c = 0; c < 2; ++c) {
            L.parent.push_back(-1);
            L.letter.push_back(-1);
            L.shift.push_back(-1);
            L.tile_color.push_back(static_cast<Color>(c));
            L.tile_face.push_back(static_cast<Color>(c));
            for (int j = 0; j < m; ++j) {
                L.tile_verts.push_back(j);
                L.tile_edges.push_back(j);
            }
        }
        for (int j = 0; j < m; ++j) {
            L.edge_ends.push_back({j, (j + 1) % m});
            L.edge_image.push_back(j);
            L.edge_zero.push_back(j);
            L.vertex_image.push_back(M_->post_image[j]);
            L.vertex_loc.push_back(2 * j);
            L.flower.push_back({0, 1});
            L.curve.push_back({j, j, true});
        }
        return L;
    }

    CellLevel refine(CellLevel& P) {
        const Model& M = *M_;
        const auto& an = M.an;
        const int m = M.m;
        CellLevel L;
        L.n = P.n + 1;
        L.m = m;
        L.vertex_image = P.vertex_image;
        L.vertex_loc = P.vertex_loc;

        // resolve a 1-cell of the pattern stamped into the parent tile X of level P.n
        auto vertex_key_in = [&](const CellLevel& lv, int X, int c1, bool& old, int& old_id) {
            Loc l = an.vert_loc[c1];
            old = false;
            if (is_post(l)) {
                old = true;
                old_id = lv.vert(X, l / 2);
                return std::uint64_t{0};
            }
            if (is_edge(l)) return key(1, lv.edge(X, l / 2), c1);
            return key(0, X, c1);
        };
        auto edge_key_in = [&](const CellLevel& lv, int X, int c1) {
            int z = an.edge_zero[c1];
            if (z >= 0) return key(3, lv.edge(X, z), c1);
            return key(2, X, c1);
        };

        auto resolve_vertex = [&](int X, int c1) {
            bool old;
            int id = -1;
            auto k = vertex_key_in(P, X, c1, old, id);
            if (old) return id;
            auto it = L.vkey.find(k);
            if (it != L.vkey.end()) return it->second;
            id = static_cast<int>(L.vertex_loc.size());
            L.vkey.emplace(k, id);
            Loc l = an.vert_loc[c1];
            Loc loc = kOff;
            if (is_edge(l)) {
                int pe = P.edge(X, l / 2);
                if (P.edge_zero[pe] >= 0) loc = 2 * P.edge_zero[pe] + 1;
            }
            L.vertex_loc.push_back(loc);
            int img;
            if (P.n == 0) {
                img = M.rule.one_vertices[c1].image;
            } else {
                const CellLevel& Q = *levels_[P.n - 1];
                bool o2;
                int unused = -1;
                auto k2 = vertex_key_in(Q, P.shift[X], c1, o2, unused);
                auto jt = P.vkey.find(k2);
                if (o2 || jt == P.vkey.end()) throw std::logic_error("gluing inconsistency at a vertex image");
                img = jt->second;
            }
            L.vertex_image.push_back(img);
            return id;
        };
        auto resolve_edge = [&](int X, int c1) {
            auto k = edge_key_in(P, X, c1);
            auto it = L.ekey.find(k);
            if (it != L.ekey.end()) return it->second;
            int id = static_cast<int>(L.edge_ends.size());
            L.ekey.emplace(k, id);
            const auto& ed = M.rule.one_edges[c1];
            L.edge_ends.push_back({resolve_vertex(X, ed.a), resolve_vertex(X, ed.b)});
            L.edge_image.push_back(ed.image);
            int z = an.edge_zero[c1];
            L.edge_zero.push_back(z >= 0 ? P.edge_zero[P.edge(X, z)] : -1);
            return id;
        };

        auto stamp = [&](int X, int Y) {
            L.parent.push_back(X);
            L.letter.push_back(Y);
            L.tile_color.push_back(M.color[Y]);
            L.tile_face.push_back(P.n == 0 ? M.face[Y] : P.tile_face[X]);
            L.shift.push_back(P.n == 0 ? idx(M.color[Y]) : child(P.n - 1, P.shift[X], Y));
            for (int j = 0; j < m; ++j) L.tile_verts.push_back(resolve_vertex(X, an.tile_vert_at[Y][j]));
            for (int j = 0; j < m; ++j) L.tile_edges.push_back(resolve_edge(X, an.tile_edge_at[Y][j]));
        };

        if (P.n == 0) {
            for (int Y = 0; Y < M.T; ++Y) stamp(idx(M.face[Y]), Y);
        } else {
            P.first_child.assign(P.tiles(), 0);
            int next = 0;
            for (int X = 0; X < P.tiles(); ++X) {
                P.first_child[X] = next;
                for (int Y : M.by_face[idx(P.tile_color[X])]) {
                    stamp(X, Y);
                    ++next;
                }
            }
        }

        L.flower.assign(L.vertex_loc.size(), {});
        for (int t = 0; t < L.tiles(); ++t)
            for (int j = 0; j < m; ++j) L.flower[L.vert(t, j)].push_back(t);

        for (const auto& st : P.curve) {
            int k = P.edge_image[st.edge];
            const auto& chain = M.rule.curve_cycle[k].edges;
            // any tile on this edge carries the same pull-back of E_k
            int X = -1;
            for (int t : P.flower[st.start])
                for (int j = 0; j < m; ++j)
                    if (P.edge(t, j) == st.edge) X = t;
            if (X < 0) throw std::logic_error("curve edge without a tile");
            std::vector<int> order(chain.begin(), chain.end());
            if (!st.preserving) std::reverse(order.begin(), order.end());
            int cur = st.start;
            for (int c1 : order) {
                int e = resolve_edge(X, c1);
                bool pres = st.preserving == M.rule.one_edges[c1].orientation_preserving;
                L.curve.push_back({e, cur, pres});
                cur = L.edge_ends[e][0] == cur ? L.edge_ends[e][1] : L.edge_ends[e][0];
            }
        }
        return L;
    }

    const Model* M_;
    std::size_t cap_;
    std::vector<std::unique_ptr<CellLevel>> levels_;
};

// deg_{f^n}(v) recomputed as a product of level-1 local degrees along the forward orbit
inline int local_degree_product(Hierarchy& H, int n, int v) {
    const CellLevel& L1 = H.level(1);
    const CellLevel& Ln = H.level(n);
    int d = 1;
    for (int i = 0; i < n; ++i) {
        if (v < L1.vertices()) d *= L1.local_degree(v);
        v = Ln.vertex_image[v];
    }
    return d;
}

inline bool joins_opposite_sides(Hierarchy& H, int n) {
    const CellLevel& L = H.level(n);
    const int m = L.m;
    for (int t = 0; t < L.tiles(); ++t) {
        std::vector<char> meets(m);
        for (int j = 0; j < m; ++j) meets[j] = L.meets_zero_edge(t, j);
        if (m == 3) {
            if (meets[0] && meets[1] && meets[2]) return true;
            continue;
        }
        for (int a = 0; a < m; ++a)
            for (int b = a + 2; b < m; ++b)
                if ((a != 0 || b != m - 1) && meets[a] && meets[b]) return true;
    }
    return false;
}

struct DnRow {
    int n;
    int Dn;
};
struct DnResult {
    std::vector<DnRow> rows;
    double lambda0 = 0;
};

// minimal number of n-tiles in a connected chain joining opposite sides of C
inline int compute_Dn(Hierarchy& H, int n) {
    const CellLevel& L = H.level(n);
    const int m = L.m, T = L.tiles();
    std::vector<std::vector<int>> nb(T);
    for (int t = 0; t < T; ++t) nb[t] = L.neighbours(t);
    auto bfs = [&](int j) {
        std::vector<int> d(T, std::numeric_limits<int>::max());
        std::deque<int> q;
        for (int t = 0; t < T; ++t)
            if (L.meets_zero_edge(t, j)) {
                d[t] = 1;
                q.push_back(t);
            }
        while (!q.empty()) {
            int t = q.front();
            q.pop_front();
            for (int u : nb[t])
                if (d[u] > d[t] + 1) {
                    d[u] = d[t] + 1;
                    q.push_back(u);
                }
        }
        return d;
    };
    std::vector<std::vector<int>> dist(m);
    for (int j = 0; j < m; ++j) dist[j] = bfs(j);
    int best = std::numeric_limits<int>::max();
    if (m == 3) {
        for (int t = 0; t < T; ++t) best = std::min(best, dist[0][t] + dist[1][t] + dist[2][t] - 2);
    } else {
        for (int a = 0; a < m; ++a)
            for (int b = a + 2; b < m; ++b) {
                if (a == 0 && b == m - 1) continue;
                for (int t = 0; t < T; ++t)
                    if (L.meets_zero_edge(t, b)) best = std::min(best, dist[a][t]);
            }
    }
    return best;
}

inline DnResult Dn_and_lambda0(Hierarchy& H, int n_max) {
    DnResult r;
    for (int n = 1; n <= n_max; ++n) {
        int d = compute_Dn(H, n);
        if (!r.rows.empty() && d < r.rows.back().Dn)
            throw std::logic_error("D_n not monotone at n = " + std::to_string(n));
        r.rows.push_back({n, d});
    }
    if (!r.rows.empty()) r.lambda0 = std::pow(static_cast<double>(r.rows.back().Dn), 1.0 / n_max);
    return r;
}

}  // namespace etm
