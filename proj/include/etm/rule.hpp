#pragma once

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace etm {

enum class Color : int { black = 0, white = 1 };

inline int idx(Color c) { return static_cast<int>(c); }
inline Color other(Color c) { return c == Color::black ? Color::white : Color::black; }
inline const char* color_name(Color c) { return c == Color::black ? "black" : "white"; }

struct ZeroEdge {
    std::string id;
    int from = 0;  // index into post
    int to = 0;
};

struct OneVertex {
    std::string id;
    int image = 0;  // 0-vertex
    bool on_curve = false;
    int incident_tile_count = -1;  // -1: not supplied, recomputed from tiles
};

struct OneEdge {
    std::string id;
    int image = 0;  // 0-edge
    int a = 0, b = 0;
    bool on_curve = false;
    bool orientation_preserving = true;
};

struct OneTile {
    std::string id;
    Color color = Color::white;
    std::vector<int> boundary;  // counterclockwise, 1-edge indices
};

// The 1-edges lying on one 0-edge, listed from its start vertex to its end vertex.
struct CurveChain {
    int zero_edge = 0;
    std::vector<int> edges;
};

struct SubdivisionRule {
    std::vector<std::string> post;
    std::vector<ZeroEdge> zero_edges;
    std::vector<OneVertex> one_vertices;
    std::vector<OneEdge> one_edges;
    std::vector<OneTile> one_tiles;
    std::vector<CurveChain> curve_cycle;

    int post_count() const { return static_cast<int>(post.size()); }
    bool operator==(const SubdivisionRule& o) const { return serialize() == o.serialize(); }

    std::string serialize() const;
};

class RuleParseError : public std::runtime_error {
public:
    RuleParseError(int line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

namespace detail {

inline std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_fields(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, ',')) out.push_back(trim(cur));
    if (!s.empty() && s.back() == ',') out.push_back("");
    return out;
}

inline bool valid_token(const std::string& t) {
    if (t.empty()) return false;
    return std::all_of(t.begin(), t.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
               c == '_' || c == '-' || c == '.';
    });
}

inline bool parse_flag(const std::string& t, int line) {
    if (t == "1" || t == "true") return true;
    if (t == "0" || t == "false") return false;
    throw RuleParseError(line, "expected flag 0/1, got '" + t + "'");
}

struct IdTable {
    std::string what;
    std::map<std::string, int> index;
    void add(const std::string& id, int line) {
        if (!valid_token(id)) throw RuleParseError(line, "invalid identifier '" + id + "'");
        if (!index.emplace(id, static_cast<int>(index.size())).second)
            throw RuleParseError(line, "duplicate id '" + id + "'");
    }
    int at(const std::string& id, int line) const {
        auto it = index.find(id);
        if (it == index.end())
            throw RuleParseError(line, "dangling identifier '" + id + "' (no such " + what + ")");
        return it->second;
    }
};

}  // namespace detail

// Grammar: sections [post] [zero_edges] [one_vertices] [one_edges] [one_tiles] [curve_cycle];
// one comma-separated record per line; '#' starts a comment.
inline SubdivisionRule parse_rule(const std::string& text) {
    using namespace detail;
    struct Raw {
        int line;
        std::vector<std::string> f;
    };
    std::map<std::string, std::vector<Raw>> sections;
    const std::vector<std::string> known = {"post",     "zero_edges", "one_vertices",
                                            "one_edges", "one_tiles", "curve_cycle"};
    std::string current;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        auto hash = raw.find('#');
        std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw RuleParseError(line, "malformed section header");
            current = s.substr(1, s.size() - 2);
            if (std::find(known.begin(), known.end(), current) == known.end())
                throw RuleParseError(line, "unknown section [" + current + "]");
            if (sections.count(current)) throw RuleParseError(line, "repeated section [" + current + "]");
            sections[current];
            continue;
        }
        if (current.empty()) throw RuleParseError(line, "record outside of any section");
        sections[current].push_back({line, split_fields(s)});
    }
    for (const auto& k : known)
        if (!sections.count(k)) throw RuleParseError(line, "missing section [" + k + "]");

    SubdivisionRule r;
    IdTable post{"0-vertex", {}}, zedges{"0-edge", {}}, verts{"1-vertex", {}}, edges{"1-edge", {}},
        tiles{"1-tile", {}};
    auto arity = [](const Raw& x, std::size_t lo, std::size_t hi) {
        if (x.f.size() < lo || x.f.size() > hi)
            throw RuleParseError(x.line, "wrong number of fields (" + std::to_string(x.f.size()) + ")");
    };

    for (const auto& x : sections["post"]) {
        arity(x, 1, 1);
        post.add(x.f[0], x.line);
        r.post.push_back(x.f[0]);
    }
    for (const auto& x : sections["zero_edges"]) {
        arity(x, 3, 3);
        zedges.add(x.f[0], x.line);
        r.zero_edges.push_back({x.f[0], post.at(x.f[1], x.line), post.at(x.f[2], x.line)});
    }
    for (const auto& x : sections["one_vertices"]) {
        arity(x, 3, 4);
        verts.add(x.f[0], x.line);
        OneVertex v;
        v.id = x.f[0];
        v.image = post.at(x.f[1], x.line);
        v.on_curve = parse_flag(x.f[2], x.line);
        if (x.f.size() == 4 && !x.f[3].empty()) {
            try {
                v.incident_tile_count = std::stoi(x.f[3]);
            } catch (const std::exception&) {
                throw RuleParseError(x.line, "bad incident_tile_count '" + x.f[3] + "'");
            }
        }
        r.one_vertices.push_back(v);
    }
    for (const auto& x : sections["one_edges"]) {
        arity(x, 6, 6);
        edges.add(x.f[0], x.line);
        OneEdge e;
        e.id = x.f[0];
        e.image = zedges.at(x.f[1], x.line);
        e.a = verts.at(x.f[2], x.line);
        e.b = verts.at(x.f[3], x.line);
        e.on_curve = parse_flag(x.f[4], x.line);
        e.orientation_preserving = parse_flag(x.f[5], x.line);
        r.one_edges.push_back(e);
    }
    for (const auto& x : sections["one_tiles"]) {
        if (x.f.size() < 3) throw RuleParseError(x.line, "tile needs an id, a color and edges");
        tiles.add(x.f[0], x.line);
        OneTile t;
        t.id = x.f[0];
        if (x.f[1] == "white")
            t.color = Color::white;
        else if (x.f[1] == "black")
            t.color = Color::black;
        else
            throw RuleParseError(x.line, "color must be black or white");
        for (std::size_t i = 2; i < x.f.size(); ++i) t.boundary.push_back(edges.at(x.f[i], x.line));
        r.one_tiles.push_back(t);
    }
    for (const auto& x : sections["curve_cycle"]) {
        if (x.f.size() < 2) throw RuleParseError(x.line, "curve record needs a 0-edge and 1-edges");
        CurveChain c;
        c.zero_edge = zedges.at(x.f[0], x.line);
        for (std::size_t i = 1; i < x.f.size(); ++i) c.edges.push_back(edges.at(x.f[i], x.line));
        r.curve_cycle.push_back(c);
    }
    return r;
}

inline std::string SubdivisionRule::serialize() const {
    std::ostringstream o;
    o << "[post]\n";
    for (const auto& p : post) o << p << "\n";
    o << "[zero_edges]\n";
    for (const auto& e : zero_edges) o << e.id << "," << post[e.from] << "," << post[e.to] << "\n";
    o << "[one_vertices]\n";
    for (const auto& v : one_vertices) {
        o << v.id << "," << post[v.image] << "," << (v.on_curve ? 1 : 0);
        if (v.incident_tile_count >= 0) o << "," << v.incident_tile_count;
        o << "\n";
    }
    o << "[one_edges]\n";
    for (const auto& e : one_edges)
        o << e.id << "," << zero_edges[e.image].id << "," << one_vertices[e.a].id << ","
          << one_vertices[e.b].id << "," << (e.on_curve ? 1 : 0) << ","
          << (e.orientation_preserving ? 1 : 0) << "\n";
    o << "[one_tiles]\n";
    for (const auto& t : one_tiles) {
        o << t.id << "," << color_name(t.color);
        for (int e : t.boundary) o << "," << one_edges[e].id;
        o << "\n";
    }
    o << "[curve_cycle]\n";
    for (const auto& c : curve_cycle) {
        o << zero_edges[c.zero_edge].id;
        for (int e : c.edges) o << "," << one_edges[e].id;
        o << "\n";
    }
    return o.str();
}

}  // namespace etm
