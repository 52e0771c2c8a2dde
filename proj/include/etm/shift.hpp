#pragma once

#include "model.hpp"

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace etm {

enum class ShiftKind { tile, edge, edge_color };

struct ShiftState {
    std::string id;
    Color color = Color::white;  // tile color, or the color c of a pair (e, c)
    bool on_curve = false;
    int tile = -1;  // the tile itself, or X^1(e, c)
    int edge = -1;  // curve 1-edge for edge and edge-color states
};

struct ShiftSystem {
    ShiftKind kind = ShiftKind::tile;
    std::vector<ShiftState> states;
    std::vector<std::vector<char>> A;
    std::vector<std::vector<int>> succ;

    int size() const { return static_cast<int>(states.size()); }
    void finish() {
        succ.assign(states.size(), {});
        for (int i = 0; i < size(); ++i)
            for (int j = 0; j < size(); ++j)
                if (A[i][j]) succ[i].push_back(j);
    }
};

inline ShiftSystem tile_shift(const Model& M) {
    ShiftSystem S;
    S.kind = ShiftKind::tile;
    for (int t = 0; t < M.T; ++t) {
        bool on = false;
        for (int j = 0; j < M.m; ++j) on = on || M.Phi(t, 2 * j + 1) != kOff;
        S.states.push_back({M.tile_id(t), M.color[t], on, t, -1});
    }
    S.A.assign(M.T, std::vector<char>(M.T, 0));
    for (int a = 0; a < M.T; ++a)
        for (int b = 0; b < M.T; ++b) S.A[a][b] = M.admissible(a, b);
    S.finish();
    return S;
}

inline ShiftSystem edge_shift(const Model& M) {
    ShiftSystem S;
    S.kind = ShiftKind::edge;
    for (int e : M.curve_edges) S.states.push_back({M.rule.one_edges[e].id, Color::white, true, -1, e});
    const int n = S.size();
    S.A.assign(n, std::vector<char>(n, 0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            S.A[i][j] = M.edge_zero(M.curve_edges[j]) == M.edge_image(M.curve_edges[i]);
    S.finish();
    return S;
}

// states (e, c) at index 2*state(e) + c
inline ShiftSystem edge_color_shift(const Model& M) {
    ShiftSystem S;
    S.kind = ShiftKind::edge_color;
    for (int e : M.curve_edges)
        for (int c = 0; c < 2; ++c) {
            int X = M.edge_tile(e, static_cast<Color>(c));
            if (X < 0) throw std::runtime_error("no tile X^1(e,c) for edge " + M.rule.one_edges[e].id);
            S.states.push_back({M.rule.one_edges[e].id + ":" + color_name(static_cast<Color>(c)),
                                static_cast<Color>(c), true, X, e});
        }
    const int n = S.size();
    S.A.assign(n, std::vector<char>(n, 0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const auto &s1 = S.states[i], &s2 = S.states[j];
            S.A[i][j] = M.edge_zero(s2.edge) == M.edge_image(s1.edge) && M.face[s2.tile] == s1.color;
        }
    S.finish();
    return S;
}

namespace detail {
inline std::vector<std::vector<char>> bool_mul(const std::vector<std::vector<char>>& a,
                                               const std::vector<std::vector<char>>& b) {
    const std::size_t n = a.size();
    std::vector<std::vector<char>> c(n, std::vector<char>(n, 0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k)
            if (a[i][k])
                for (std::size_t j = 0; j < n; ++j) c[i][j] |= b[k][j];
    return c;
}
}  // namespace detail

// A primitive 0/1 matrix has a positive power at exponent (n-1)^2 + 1 at the latest.
inline bool is_topologically_mixing(const ShiftSystem& S) {
    const int n = S.size();
    if (n == 0) return false;
    auto P = S.A;
    const long bound = static_cast<long>(n - 1) * (n - 1) + 1;
    for (long k = 1; k <= bound; ++k) {
        bool pos = true;
        for (const auto& row : P)
            for (char x : row) pos = pos && x;
        if (pos) return true;
        P = detail::bool_mul(P, S.A);
    }
    return false;
}

inline std::uint64_t trace_power(const ShiftSystem& S, int n) {
    const int N = S.size();
    std::vector<std::vector<std::uint64_t>> P(N, std::vector<std::uint64_t>(N, 0));
    for (int i = 0; i < N; ++i) P[i][i] = 1;
    for (int k = 0; k < n; ++k) {
        std::vector<std::vector<std::uint64_t>> Q(N, std::vector<std::uint64_t>(N, 0));
        for (int i = 0; i < N; ++i)
            for (int l = 0; l < N; ++l)
                if (P[i][l])
                    for (int j : S.succ[l]) Q[i][j] += P[i][l];
        P = std::move(Q);
    }
    std::uint64_t t = 0;
    for (int i = 0; i < N; ++i) t += P[i][i];
    return t;
}

// Calls visit(word) for every length-n word w with w.w admissible, in lexicographic order.
inline std::uint64_t for_each_periodic_word(const ShiftSystem& S, int n,
                                           const std::function<void(const std::vector<int>&)>& visit) {
    if (n < 1) throw std::invalid_argument("period must be at least 1");
    std::vector<int> w(n);
    std::uint64_t count = 0;
    std::function<void(int)> rec = [&](int i) {
        if (i == n) {
            if (S.A[w[n - 1]][w[0]]) {
                ++count;
                visit(w);
            }
            return;
        }
        for (int j : S.succ[w[i - 1]]) {
            w[i] = j;
            rec(i + 1);
        }
    };
    for (int s = 0; s < S.size(); ++s) {
        w[0] = s;
        rec(1);
    }
    return count;
}

inline std::vector<std::vector<int>> periodic_words(const ShiftSystem& S, int n,
                                                    std::uint64_t cap = 50'000'000) {
    std::uint64_t expected = trace_power(S, n);
    if (expected > cap) throw std::runtime_error("periodic word count " + std::to_string(expected) + " exceeds cap");
    std::vector<std::vector<int>> out;
    for_each_periodic_word(S, n, [&](const std::vector<int>& w) { out.push_back(w); });
    if (out.size() != expected) throw std::logic_error("periodic word enumeration disagrees with trace(A^n)");
    return out;
}

}  // namespace etm
