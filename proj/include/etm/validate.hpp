#pragma once

#include "rule.hpp"

#include <array>
#include <numeric>
#include <stdexcept>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace etm {

// Location of a point relative to the curve: -1 off the curve, 2j the post point P_j,
// 2j+1 the interior of the 0-edge E_j.
using Loc = int;
constexpr Loc kOff = -1;
inline bool is_post(Loc l) { return l >= 0 && l % 2 == 0; }
inline bool is_edge(Loc l) { return l >= 0 && l % 2 == 1; }

struct Check {
    std::string name;
    bool pass = true;
    std::string witness;
};

struct ValidationReport {
    std::vector<Check> checks;
    bool ok() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
    const Check* find(const std::string& name) const {
        for (const auto& c : checks)
            if (c.name == name) return &c;
        return nullptr;
    }
    std::string summary() const {
        std::ostringstream o;
        for (const auto& c : checks)
            o << (c.pass ? "PASS " : "FAIL ") << c.name << (c.witness.empty() ? "" : ": " + c.witness)
              << "\n";
        return o.str();
    }
};

// Everything the later modules read off a rule. Only meaningful when report.ok().
struct RuleAnalysis {
    ValidationReport report;
    int m = 0;
    int deg = 0;
    std::vector<std::vector<int>> tile_edge_at;  // [tile][j]: 1-edge mapping to E_j
    std::vector<std::vector<int>> tile_vert_at;  // [tile][j]: 1-vertex mapping to P_j
    std::vector<Color> face;                     // 0-tile containing each 1-tile
    std::vector<Loc> vert_loc;
    std::vector<int> edge_zero;   // 0-edge containing an on-curve 1-edge, else -1
    std::vector<int> edge_start;  // endpoint met first when walking C in its direction
    std::vector<int> post_vertex;  // 1-vertex sitting at P_j
    std::vector<std::vector<int>> flower;  // tiles incident to each 1-vertex
    std::vector<std::array<int, 2>> edge_tiles;  // [edge][color]
};

inline int degree(const SubdivisionRule& r) {
    int w = 0, b = 0;
    for (const auto& t : r.one_tiles) (t.color == Color::white ? w : b)++;
    if (w != b)
        throw std::runtime_error("inconsistent rule: " + std::to_string(w) + " white vs " +
                                 std::to_string(b) + " black 1-tiles");
    return w;
}

inline RuleAnalysis analyze_rule(const SubdivisionRule& r) {
    RuleAnalysis A;
    auto& rep = A.report;
    auto add = [&](const std::string& name, bool pass, const std::string& w = "") {
        rep.checks.push_back({name, pass, pass ? "" : w});
        return pass;
    };
    const int m = r.post_count();
    const int T = static_cast<int>(r.one_tiles.size());
    const int E = static_cast<int>(r.one_edges.size());
    const int V = static_cast<int>(r.one_vertices.size());
    A.m = m;

    if (!add("post count at least 3", m >= 3, "m = " + std::to_string(m))) return A;

    {
        bool ok = static_cast<int>(r.zero_edges.size()) == m;
        std::string w = ok ? "" : "expected " + std::to_string(m) + " 0-edges";
        for (int j = 0; ok && j < m; ++j)
            if (r.zero_edges[j].from != j || r.zero_edges[j].to != (j + 1) % m) {
                ok = false;
                w = r.zero_edges[j].id + " does not join P_j to P_{j+1}";
            }
        if (!add("zero edges form the curve in cyclic order", ok, w)) return A;
    }

    int white = 0, black = 0;
    for (const auto& t : r.one_tiles) (t.color == Color::white ? white : black)++;
    A.deg = white;
    add("tile colors balanced", white == black,
        std::to_string(white) + " white, " + std::to_string(black) + " black");
    add("degree at least 2", white >= 2, "deg = " + std::to_string(white));
    add("edge count is m*deg", E == m * white,
        std::to_string(E) + " edges, expected " + std::to_string(m * white));

    {
        bool ok = true;
        std::string w;
        for (const auto& e : r.one_edges) {
            int ia = r.one_vertices[e.a].image, ib = r.one_vertices[e.b].image;
            int s = r.zero_edges[e.image].from, t = r.zero_edges[e.image].to;
            if (!((ia == s && ib == t) || (ia == t && ib == s)) || e.a == e.b) {
                ok = false;
                w = e.id;
                break;
            }
        }
        add("edge endpoints map to the ends of its image", ok, w);
    }

    A.edge_tiles.assign(E, {-1, -1});
    {
        bool ok = true;
        std::string w;
        std::vector<int> uses(E, 0);
        for (int t = 0; t < T; ++t)
            for (int e : r.one_tiles[t].boundary) {
                ++uses[e];
                auto& slot = A.edge_tiles[e][idx(r.one_tiles[t].color)];
                if (slot >= 0) {
                    ok = false;
                    w = r.one_edges[e].id;
                }
                slot = t;
            }
        for (int e = 0; e < E && ok; ++e)
            if (uses[e] != 2 || A.edge_tiles[e][0] < 0 || A.edge_tiles[e][1] < 0) {
                ok = false;
                w = r.one_edges[e].id;
            }
        if (!add("edge bounds one black and one white", ok, w)) return A;
    }

    // tile boundaries
    A.tile_edge_at.assign(T, std::vector<int>(m, -1));
    A.tile_vert_at.assign(T, std::vector<int>(m, -1));
    bool gons = true;
    std::string gw;
    for (int t = 0; t < T && gons; ++t) {
        const auto& tile = r.one_tiles[t];
        if (static_cast<int>(tile.boundary.size()) != m) {
            gons = false;
            gw = tile.id + " has " + std::to_string(tile.boundary.size()) + " edges";
            break;
        }
        int step = tile.color == Color::white ? 1 : m - 1;
        int j0 = r.one_edges[tile.boundary[0]].image;
        for (int i = 0; i < m; ++i) {
            int img = r.one_edges[tile.boundary[i]].image;
            if (img != (j0 + i * step) % m) {
                gons = false;
                gw = tile.id + " boundary images out of counterclockwise order";
                break;
            }
            A.tile_edge_at[t][img] = tile.boundary[i];
        }
    }
    if (!add("tiles are m-gons", gons, gw)) return A;

    bool vok = true;
    std::string vw;
    for (int t = 0; t < T && vok; ++t)
        for (int j = 0; j < m; ++j) {
            const auto& e1 = r.one_edges[A.tile_edge_at[t][(j + m - 1) % m]];
            const auto& e2 = r.one_edges[A.tile_edge_at[t][j]];
            std::vector<int> common;
            for (int a : {e1.a, e1.b})
                if (a == e2.a || a == e2.b) common.push_back(a);
            if (common.size() != 1 || r.one_vertices[common[0]].image != j) {
                vok = false;
                vw = r.one_tiles[t].id + " corner " + std::to_string(j);
                break;
            }
            A.tile_vert_at[t][j] = common[0];
        }
    if (!add("tile corners consistent", vok, vw)) return A;

    A.flower.assign(V, {});
    for (int t = 0; t < T; ++t)
        for (int j = 0; j < m; ++j) A.flower[A.tile_vert_at[t][j]].push_back(t);
    {
        bool ok = true;
        std::string w;
        for (int v = 0; v < V && ok; ++v) {
            int n = static_cast<int>(A.flower[v].size());
            int nw = 0;
            for (int t : A.flower[v]) nw += r.one_tiles[t].color == Color::white;
            if (n == 0 || n % 2 != 0 || 2 * nw != n) {
                ok = false;
                w = r.one_vertices[v].id + " has " + std::to_string(n) + " incident tiles";
            } else if (r.one_vertices[v].incident_tile_count >= 0 &&
                       r.one_vertices[v].incident_tile_count != n) {
                ok = false;
                w = r.one_vertices[v].id + " declares " +
                    std::to_string(r.one_vertices[v].incident_tile_count) + " incident tiles, found " +
                    std::to_string(n);
            }
        }
        if (!add("incident tile counts even and consistent", ok, w)) return A;
    }

    // the curve
    A.edge_zero.assign(E, -1);
    A.edge_start.assign(E, -1);
    A.vert_loc.assign(V, kOff);
    A.post_vertex.assign(m, -1);
    {
        bool ok = static_cast<int>(r.curve_cycle.size()) == m;
        std::string w = ok ? "" : "expected one curve record per 0-edge";
        for (int j = 0; ok && j < m; ++j)
            if (r.curve_cycle[j].zero_edge != j || r.curve_cycle[j].edges.empty()) {
                ok = false;
                w = "record " + std::to_string(j) + " out of order or empty";
            }
        for (int j = 0; ok && j < m; ++j) {
            const auto& prev = r.one_edges[r.curve_cycle[(j + m - 1) % m].edges.back()];
            const auto& next = r.one_edges[r.curve_cycle[j].edges.front()];
            std::vector<int> common;
            for (int a : {prev.a, prev.b})
                if (a == next.a || a == next.b) common.push_back(a);
            if (common.size() != 1) {
                ok = false;
                w = "chains do not meet at P" + std::to_string(j);
            } else {
                A.post_vertex[j] = common[0];
            }
        }
        std::set<int> seen_v, seen_e;
        for (int j = 0; ok && j < m; ++j) {
            int cur = A.post_vertex[j];
            if (!seen_v.insert(cur).second) {
                ok = false;
                w = "curve revisits a vertex";
            }
            const auto& chain = r.curve_cycle[j].edges;
            for (std::size_t i = 0; ok && i < chain.size(); ++i) {
                int e = chain[i];
                const auto& ed = r.one_edges[e];
                if (!seen_e.insert(e).second || (ed.a != cur && ed.b != cur)) {
                    ok = false;
                    w = "chain " + r.zero_edges[j].id + " broken at " + ed.id;
                    break;
                }
                A.edge_zero[e] = j;
                A.edge_start[e] = cur;
                cur = ed.a == cur ? ed.b : ed.a;
                if (i + 1 < chain.size()) {
                    if (!seen_v.insert(cur).second) {
                        ok = false;
                        w = "curve revisits a vertex";
                    }
                    A.vert_loc[cur] = 2 * j + 1;
                }
            }
            if (ok && cur != A.post_vertex[(j + 1) % m]) {
                ok = false;
                w = "chain " + r.zero_edges[j].id + " does not end at the next post point";
            }
        }
        if (!add("curve chains form a simple closed curve", ok, w)) return A;
        for (int j = 0; j < m; ++j) A.vert_loc[A.post_vertex[j]] = 2 * j;
    }
    {
        bool ok = true;
        std::string w;
        for (int e = 0; e < E; ++e)
            if (r.one_edges[e].on_curve != (A.edge_zero[e] >= 0)) {
                ok = false;
                w = r.one_edges[e].id;
            }
        for (int v = 0; v < V; ++v)
            if (r.one_vertices[v].on_curve != (A.vert_loc[v] != kOff)) {
                ok = false;
                w = r.one_vertices[v].id;
            }
        add("on-curve flags match the curve", ok, w);
    }
    {
        bool ok = true;
        std::string w;
        for (int e = 0; e < E; ++e) {
            if (A.edge_zero[e] < 0) continue;
            bool pres = r.one_vertices[A.edge_start[e]].image == r.zero_edges[r.one_edges[e].image].from;
            if (pres != r.one_edges[e].orientation_preserving) {
                ok = false;
                w = r.one_edges[e].id;
            }
        }
        if (!add("orientation flags consistent", ok, w)) return A;
    }

    // faces: across an on-curve edge the orientation flag decides, off-curve edges keep the face
    A.face.assign(T, Color::white);
    {
        std::vector<int> f(T, -1);
        std::vector<int> queue;
        bool ok = true;
        std::string w;
        for (int e = 0; e < E && ok; ++e) {
            if (A.edge_zero[e] < 0) continue;
            for (int c = 0; c < 2; ++c) {
                int t = A.edge_tiles[e][c];
                int fc = r.one_edges[e].orientation_preserving ? c : 1 - c;
                if (f[t] >= 0 && f[t] != fc) {
                    ok = false;
                    w = r.one_tiles[t].id;
                }
                if (f[t] < 0) queue.push_back(t);
                f[t] = fc;
            }
        }
        for (std::size_t q = 0; q < queue.size() && ok; ++q) {
            int t = queue[q];
            for (int e : r.one_tiles[t].boundary) {
                if (A.edge_zero[e] >= 0) continue;
                int u = A.edge_tiles[e][0] == t ? A.edge_tiles[e][1] : A.edge_tiles[e][0];
                if (f[u] < 0) {
                    f[u] = f[t];
                    queue.push_back(u);
                } else if (f[u] != f[t]) {
                    ok = false;
                    w = r.one_tiles[u].id;
                }
            }
        }
        for (int t = 0; t < T && ok; ++t)
            if (f[t] < 0) {
                ok = false;
                w = r.one_tiles[t].id + " not connected to the curve";
            }
        if (!add("faces consistent", ok, w)) return A;
        for (int t = 0; t < T; ++t) A.face[t] = static_cast<Color>(f[t]);
    }
    {
        bool ok = true;
        std::string w;
        for (int c = 0; c < 2; ++c) {
            std::set<int> vs, es;
            int F = 0;
            for (int t = 0; t < T; ++t) {
                if (idx(A.face[t]) != c) continue;
                ++F;
                for (int j = 0; j < m; ++j) {
                    vs.insert(A.tile_vert_at[t][j]);
                    es.insert(A.tile_edge_at[t][j]);
                }
            }
            long chi = static_cast<long>(vs.size()) - static_cast<long>(es.size()) + F;
            if (chi != 1) {
                ok = false;
                w = std::string(color_name(static_cast<Color>(c))) + " 0-tile has Euler characteristic " +
                    std::to_string(chi);
            }
        }
        if (V - E + T != 2) {
            ok = false;
            w = "sphere Euler characteristic " + std::to_string(V - E + T);
        }
        add("each 0-tile subdivision is a disk", ok, w);
    }
    {
        bool ok = true;
        std::string w;
        std::vector<int> per_edge(m, 0), per_vertex(m, 0);
        for (const auto& e : r.one_edges) ++per_edge[e.image];
        for (int v = 0; v < V; ++v)
            per_vertex[r.one_vertices[v].image] += static_cast<int>(A.flower[v].size()) / 2;
        for (int j = 0; j < m; ++j)
            if (per_edge[j] != A.deg || per_vertex[j] != A.deg) {
                ok = false;
                w = "0-cell " + std::to_string(j) + " has preimage count " + std::to_string(per_edge[j]) +
                    "/" + std::to_string(per_vertex[j]);
            }
        add("preimages of 0-cells counted with local degree", ok, w);
    }
    {
        long rh = 0;
        for (int v = 0; v < V; ++v) rh += static_cast<long>(A.flower[v].size()) / 2 - 1;
        add("Riemann-Hurwitz", rh == 2L * A.deg - 2,
            "sum (deg_f - 1) = " + std::to_string(rh) + ", expected " + std::to_string(2 * A.deg - 2));
    }
    return A;
}

inline ValidationReport validate_rule(const SubdivisionRule& r) { return analyze_rule(r).report; }

}  // namespace etm
