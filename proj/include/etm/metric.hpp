#pragma once

#include "level.hpp"
#include "location.hpp"
#include "potential.hpp"

#include <cmath>
#include <stdexcept>

namespace etm {

struct VisualMetricParams {
    double Lambda = 2.0;
    double alpha = 1.0;

    void check() const {
        if (!(Lambda > 1.0)) throw std::invalid_argument("Lambda must exceed 1");
        if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0, 1]");
    }
};

// Combinatorial separation of two points: m is the deepest level at which an n-tile
// containing x meets an n-tile containing y (shared vertices count). The distance is
// Lambda^-(m+1), so points first separated at level s sit at distance Lambda^-s.
struct Separation {
    bool equal = false;
    int m = 0;
    int level() const { return m + 1; }
};

inline Separation separation(Hierarchy& H, const ResolvedPoint& x, const ResolvedPoint& y) {
    if (same_point(x, y)) return {true, 0};
    const Model& M = H.model();
    for (int n = 1;; ++n) {
        const CellLevel* L;
        try {
            L = &H.level(n);
        } catch (const ResourceCap& e) {
            throw ResourceCap(std::string("points not separated before the level cap: ") + e.what());
        }
        std::vector<int> tx, ty;
        for (const auto& w : tiles_containing(M, x, n)) tx.push_back(H.tile_of(w));
        for (const auto& w : tiles_containing(M, y, n)) ty.push_back(H.tile_of(w));
        bool meet = false;
        for (int a : tx)
            for (int b : ty) meet = meet || L->intersect(a, b);
        if (!meet) return {false, n - 1};
    }
}

inline double visual_distance(Hierarchy& H, const CodedPoint& x, const CodedPoint& y, const VisualMetricParams& p) {
    p.check();
    const Model& M = H.model();
    auto s = separation(H, ResolvedPoint(M, x), ResolvedPoint(M, y));
    if (s.equal) return 0.0;
    return std::pow(p.Lambda, -static_cast<double>(s.level()));
}

// Separation class of two k-tiles: the first level at which their prefixes are disjoint,
// or k+1 when the k-tiles themselves meet.
inline int tile_pair_class(Hierarchy& H, int k, int a, int b) {
    for (int n = 1; n <= k; ++n) {
        int pa = H.ancestor(k, a, n), pb = H.ancestor(k, b, n);
        if (!H.level(n).intersect(pa, pb)) return n;
    }
    return k + 1;
}

// max |phi(w) - phi(w')| Lambda^(alpha * class(w, w')) over pairs of k-tiles
inline double holder_seminorm(Hierarchy& H, const Potential& phi, const VisualMetricParams& p) {
    p.check();
    const int k = phi.depth();
    H.level(k);
    const std::size_t N = phi.size();
    double best = 0;
    for (std::size_t a = 0; a < N; ++a)
        for (std::size_t b = a + 1; b < N; ++b) {
            if (phi.at(a) == phi.at(b)) continue;
            double diff = std::abs(to_double(phi.at(a) - phi.at(b)));
            int c = tile_pair_class(H, k, static_cast<int>(a), static_cast<int>(b));
            best = std::max(best, diff * std::pow(p.Lambda, p.alpha * c));
        }
    return best;
}

}  // namespace etm
