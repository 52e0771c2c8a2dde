#pragma once

#include "rule.hpp"

#include <climits>
#include <map>
#include <stdexcept>
#include <utility>

namespace etm {

// Combinatorial pillow rule for the Lattes map induced by z -> kz.
//
// Points are written in doubled coordinates on the plane, modulo translations by 4k and
// z -> -z. A fundamental domain is [0,4k) x [0,2k]; the front face (x <= 2k) is the white
// 0-tile and the back face the black one. Unit squares of the k x k grids are the 1-tiles.
inline SubdivisionRule lattes_rule(int k) {
    if (k < 2) throw std::invalid_argument("lattes_rule needs k >= 2");
    const int W = 4 * k, H = 2 * k;
    using Pt = std::pair<int, int>;
    auto mod = [](int a, int n) { return ((a % n) + n) % n; };
    auto canon = [&](int x, int y) {
        Pt best{INT_MAX, INT_MAX};
        for (int s : {1, -1}) {
            Pt c{mod(s * x, W), mod(s * y, W)};
            if (c.second <= H && c < best) best = c;
        }
        return best;
    };
    auto on_curve = [&](Pt p) { return p.first == 0 || p.first == H || p.second == 0 || p.second == H; };

    std::map<Pt, int> vid, eid;
    for (int a = 0; a < 2 * k; ++a)
        for (int b = 0; b <= k; ++b) vid.emplace(canon(2 * a, 2 * b), 0);
    for (int a = 0; a < 2 * k; ++a) {
        for (int b = 0; b <= k; ++b) eid.emplace(canon(2 * a + 1, 2 * b), 0);
        for (int b = 0; b < k; ++b) eid.emplace(canon(2 * a, 2 * b + 1), 0);
    }
    int n = 0;
    for (auto& [p, i] : vid) i = n++;
    n = 0;
    for (auto& [p, i] : eid) i = n++;

    SubdivisionRule r;
    r.post = {"P0", "P1", "P2", "P3"};
    for (int j = 0; j < 4; ++j) r.zero_edges.push_back({"E" + std::to_string(j), j, (j + 1) % 4});

    auto vertex_image = [](Pt p) {
        int a = (p.first / 2) % 2, b = (p.second / 2) % 2;
        return a == 0 ? (b == 0 ? 0 : 3) : (b == 0 ? 1 : 2);
    };
    auto edge_image = [](Pt p) {
        if (p.first % 2 == 1) return p.second % 4 == 0 ? 0 : 2;
        return p.first % 4 == 0 ? 3 : 1;
    };

    std::map<Pt, int> incident;
    struct Square {
        Pt centre;
        Color color;
        std::vector<Pt> edges;
    };
    std::vector<Square> squares;
    for (int a = 0; a < 2 * k; ++a)
        for (int b = 0; b < k; ++b) {
            int X = 2 * a + 1, Y = 2 * b + 1;
            Square s{{X, Y}, (a + b) % 2 == 0 ? Color::white : Color::black, {}};
            s.edges = {canon(X, Y - 1), canon(X + 1, Y), canon(X, Y + 1), canon(X - 1, Y)};
            for (auto [dx, dy] : {Pt{-1, -1}, Pt{1, -1}, Pt{1, 1}, Pt{-1, 1}}) ++incident[canon(X + dx, Y + dy)];
            squares.push_back(s);
        }

    for (const auto& [p, i] : vid)
        r.one_vertices.push_back({"v" + std::to_string(i), vertex_image(p), on_curve(p), incident[p]});

    // endpoints of an edge from its midpoint
    auto ends = [&](Pt p) {
        auto [x, y] = p;
        if (x % 2 == 1) return std::pair<Pt, Pt>{canon(x - 1, y), canon(x + 1, y)};
        return std::pair<Pt, Pt>{canon(x, y - 1), canon(x, y + 1)};
    };
    std::vector<Pt> edge_pts(eid.size());
    for (const auto& [p, i] : eid) edge_pts[i] = p;
    for (const auto& p : edge_pts) {
        auto [u, v] = ends(p);
        OneEdge e;
        e.id = "e" + std::to_string(eid[p]);
        e.image = edge_image(p);
        e.a = vid.at(u);
        e.b = vid.at(v);
        e.on_curve = on_curve(p);
        e.orientation_preserving = true;  // fixed below for curve edges
        r.one_edges.push_back(e);
    }

    for (std::size_t t = 0; t < squares.size(); ++t) {
        OneTile tile{"t" + std::to_string(t), squares[t].color, {}};
        for (const auto& p : squares[t].edges) tile.boundary.push_back(eid.at(p));
        r.one_tiles.push_back(tile);
    }

    // curve chains, walked from P_j to P_{j+1}
    const Pt corner[4] = {{0, 0}, {H, 0}, {H, H}, {0, H}};
    for (int j = 0; j < 4; ++j) {
        CurveChain c{j, {}};
        Pt s = corner[j], t = corner[(j + 1) % 4];
        int dx = (t.first - s.first) / (2 * k), dy = (t.second - s.second) / (2 * k);
        for (int i = 0; i < k; ++i) {
            Pt start{s.first + 2 * i * dx, s.second + 2 * i * dy};
            Pt mid = canon(start.first + dx, start.second + dy);
            int e = eid.at(mid);
            c.edges.push_back(e);
            auto& ed = r.one_edges[e];
            int first = vid.at(canon(start.first, start.second));
            ed.orientation_preserving = r.one_vertices[first].image == r.zero_edges[ed.image].from;
        }
        r.curve_cycle.push_back(c);
    }
    return r;
}

}  // namespace etm
