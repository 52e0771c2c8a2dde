#pragma once

#include "rule.hpp"
#include "validate.hpp"

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace etm {

class InvalidRule : public std::runtime_error {
public:
    explicit InvalidRule(ValidationReport rep)
        : std::runtime_error("invalid rule:\n" + rep.summary()), report_(std::move(rep)) {}
    const ValidationReport& report() const { return report_; }

private:
    ValidationReport report_;
};

using Word = std::vector<int>;

// A validated rule with the lookup tables used by every later module.
//
// Locations are indexed by l+1 so that kOff sits at slot 0. phi[X][l+1] is the location of
// the cell of the 1-tile X sitting over location l of the 0-tile color(X).
struct Model {
    SubdivisionRule rule;
    RuleAnalysis an;
    int m = 0, deg = 0, T = 0, E = 0, V = 0;
    std::vector<Color> color, face;
    std::array<std::vector<int>, 2> by_face;
    std::vector<int> pos_in_face;
    std::vector<std::vector<Loc>> phi;
    std::vector<int> curve_edges;  // edge-shift states, ascending 1-edge id
    std::vector<int> curve_index;  // 1-edge -> state or -1
    std::vector<std::vector<Loc>> psi;  // [state][l+1], -2 outside the image edge
    std::vector<int> post_image, post_deg, vertex_deg;

    explicit Model(SubdivisionRule r) : rule(std::move(r)) {
        an = analyze_rule(rule);
        if (!an.report.ok()) throw InvalidRule(an.report);
        m = an.m;
        deg = an.deg;
        T = static_cast<int>(rule.one_tiles.size());
        E = static_cast<int>(rule.one_edges.size());
        V = static_cast<int>(rule.one_vertices.size());
        face = an.face;
        for (const auto& t : rule.one_tiles) color.push_back(t.color);
        pos_in_face.assign(T, 0);
        for (int t = 0; t < T; ++t) {
            auto& bucket = by_face[idx(face[t])];
            pos_in_face[t] = static_cast<int>(bucket.size());
            bucket.push_back(t);
        }
        vertex_deg.resize(V);
        for (int v = 0; v < V; ++v) vertex_deg[v] = static_cast<int>(an.flower[v].size()) / 2;
        for (int j = 0; j < m; ++j) {
            post_image.push_back(rule.one_vertices[an.post_vertex[j]].image);
            post_deg.push_back(vertex_deg[an.post_vertex[j]]);
        }
        phi.assign(T, std::vector<Loc>(2 * m + 1, kOff));
        for (int t = 0; t < T; ++t)
            for (int j = 0; j < m; ++j) {
                phi[t][2 * j + 1] = an.vert_loc[an.tile_vert_at[t][j]];
                int e = an.tile_edge_at[t][j];
                phi[t][2 * j + 2] = an.edge_zero[e] >= 0 ? 2 * an.edge_zero[e] + 1 : kOff;
            }
        curve_index.assign(E, -1);
        for (int e = 0; e < E; ++e)
            if (an.edge_zero[e] >= 0) {
                curve_index[e] = static_cast<int>(curve_edges.size());
                curve_edges.push_back(e);
            }
        for (int e : curve_edges) {
            std::vector<Loc> row(2 * m + 1, -2);
            const auto& ed = rule.one_edges[e];
            int img = ed.image;
            row[2 * img + 2] = 2 * an.edge_zero[e] + 1;
            for (int v : {ed.a, ed.b}) row[2 * rule.one_vertices[v].image + 1] = an.vert_loc[v];
            psi.push_back(row);
        }
    }

    Loc Phi(int tile, Loc l) const { return phi[tile][l + 1]; }
    Loc Psi(int state, Loc l) const { return psi[state][l + 1]; }
    bool admissible(int a, int b) const { return face[b] == color[a]; }
    int edge_image(int e) const { return rule.one_edges[e].image; }
    int edge_zero(int e) const { return an.edge_zero[e]; }
    // the 1-tile of color c incident to the 1-edge e
    int edge_tile(int e, Color c) const { return an.edge_tiles[e][idx(c)]; }

    const std::string& tile_id(int t) const { return rule.one_tiles[t].id; }
    int tile_index(const std::string& id) const {
        for (int t = 0; t < T; ++t)
            if (rule.one_tiles[t].id == id) return t;
        throw std::invalid_argument("unknown tile '" + id + "'");
    }

    bool admissible_word(const Word& w) const {
        for (int x : w)
            if (x < 0 || x >= T) return false;
        for (std::size_t i = 0; i + 1 < w.size(); ++i)
            if (!admissible(w[i], w[i + 1])) return false;
        return true;
    }
    bool periodic_word(const Word& w) const {
        return !w.empty() && admissible_word(w) && admissible(w.back(), w.front());
    }

    std::string word_string(const Word& w, const char* sep = ".") const {
        std::string s;
        for (std::size_t i = 0; i < w.size(); ++i) s += (i ? sep : "") + tile_id(w[i]);
        return s;
    }
    Word parse_word(const std::string& s) const {
        Word w;
        std::size_t start = 0;
        while (start <= s.size()) {
            auto dot = s.find('.', start);
            std::string tok = s.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
            if (!tok.empty()) w.push_back(tile_index(tok));
            if (dot == std::string::npos) break;
            start = dot + 1;
        }
        return w;
    }
};

// Ranks admissible tile words of a fixed length in lexicographic order. The rank of a word
// of length n is the id of its n-tile in the explicit levels.
class WordCodec {
public:
    explicit WordCodec(const Model& M) : M_(&M) {}

    // admissible words of length L whose first letter lies in the 0-tile c
    std::uint64_t count(Color c, int L) const {
        grow(L);
        return table_[L][idx(c)];
    }
    std::uint64_t total(int L) const { return L == 0 ? 1 : count(Color::black, L) + count(Color::white, L); }
    std::uint64_t from_tile(int X, int L) const { return L <= 1 ? 1 : count(M_->color[X], L - 1); }

    std::uint64_t encode(const Word& w) const {
        const int L = static_cast<int>(w.size());
        std::uint64_t r = 0;
        for (int i = 0; i < L; ++i) {
            if (i == 0) {
                for (int Y = 0; Y < w[0]; ++Y) r += from_tile(Y, L);
            } else {
                for (int Y : M_->by_face[idx(M_->color[w[i - 1]])]) {
                    if (Y == w[i]) break;
                    r += from_tile(Y, L - i);
                }
            }
        }
        return r;
    }
    Word decode(std::uint64_t r, int L) const {
        Word w;
        for (int i = 0; i < L; ++i) {
            auto pick = [&](int Y) {
                std::uint64_t c = from_tile(Y, L - i);
                if (r < c) return true;
                r -= c;
                return false;
            };
            int chosen = -1;
            if (i == 0) {
                for (int Y = 0; Y < M_->T && chosen < 0; ++Y)
                    if (pick(Y)) chosen = Y;
            } else {
                for (int Y : M_->by_face[idx(M_->color[w.back()])])
                    if (pick(Y)) {
                        chosen = Y;
                        break;
                    }
            }
            if (chosen < 0) throw std::out_of_range("word rank out of range");
            w.push_back(chosen);
        }
        return w;
    }

private:
    void grow(int L) const {
        if (table_.empty()) table_.push_back({1, 1});
        while (static_cast<int>(table_.size()) <= L) {
            const auto& prev = table_.back();
            std::array<std::uint64_t, 2> next{0, 0};
            for (int c = 0; c < 2; ++c)
                for (int Y : M_->by_face[c]) next[c] += prev[idx(M_->color[Y])];
            table_.push_back(next);
        }
    }
    const Model* M_;
    mutable std::vector<std::array<std::uint64_t, 2>> table_;
};

}  // namespace etm
