#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "fsl/common.hpp"
#include "fsl/geometry.hpp"

namespace fsl {

/// Dyadic cube of the decomposition grid: side = base * 2^-level, corner at
/// origin + (ix,iy) * side.
struct DyadicCube {
    int level = 0;
    long ix = 0;
    long iy = 0;
};

struct Chain {
    std::vector<int> cubes;   // indices into the decomposition
    int central_index = 0;    // position i0 of the central cube within `cubes`
};

/// Whitney decomposition with C(W) = 1: every accepted cube Q satisfies
/// diam Q <= dist(Q, boundary) <= 4 diam Q and lies inside Omega. Cubes are
/// sorted by (level, ix, iy); the structure is immutable after construction
/// and safe for concurrent read-only traversal.
class WhitneyDecomposition {
public:
    const Domain& domain() const { return *domain_; }
    double origin_x() const { return ox_; }
    double origin_y() const { return oy_; }
    double base() const { return base_; }
    int max_depth() const { return max_depth_; }
    double covered_volume() const { return covered_; }
    double max_neighbor_ratio() const { return max_neighbor_ratio_; }

    std::size_t size() const { return cubes_.size(); }
    const std::vector<DyadicCube>& cubes() const { return cubes_; }
    const DyadicCube& cube(std::size_t i) const { return cubes_[i]; }
    const std::vector<std::vector<int>>& neighbor_graph() const { return neighbors_; }
    const std::vector<int>& neighbors(std::size_t i) const { return neighbors_[i]; }
    /// Frontier cells at max_depth that were neither accepted nor discarded
    /// as exterior; they carry the uncovered part of Omega.
    const std::vector<DyadicCube>& residual_cells() const { return residual_; }

    double side(const DyadicCube& c) const { return std::ldexp(base_, -c.level); }
    double side(std::size_t i) const { return side(cubes_[i]); }
    Point corner(const DyadicCube& c) const {
        double s = side(c);
        return Point{ox_ + c.ix * s, oy_ + c.iy * s};
    }
    Point center(const DyadicCube& c) const {
        double s = side(c);
        Point o = corner(c);
        return Point{o.x + 0.5 * s, o.y + 0.5 * s};
    }
    Point center(std::size_t i) const { return center(cubes_[i]); }
    /// Cached exact distance from the closed cube to the boundary.
    double dist_boundary(std::size_t i) const { return dist_bd_[i]; }

    /// Closed cubes touch (exact integer test on the dyadic grid).
    bool cubes_touch(const DyadicCube& a, const DyadicCube& b) const {
        int L = std::max(a.level, b.level);
        long fa = 1L << (L - a.level), fb = 1L << (L - b.level);
        long ax0 = a.ix * fa, ax1 = (a.ix + 1) * fa;
        long bx0 = b.ix * fb, bx1 = (b.ix + 1) * fb;
        if (ax1 < bx0 || bx1 < ax0) return false;
        long ay0 = a.iy * fa, ay1 = (a.iy + 1) * fa;
        long by0 = b.iy * fb, by1 = (b.iy + 1) * fb;
        return !(ay1 < by0 || by1 < ay0);
    }

    int min_level() const { return min_level_; }

    static WhitneyDecomposition decompose(const Domain& domain, int max_depth);

    /// Test/scaffolding entry: wraps an explicit cube list (no Whitney
    /// validation) in the given grid frame.
    static WhitneyDecomposition from_cubes(const Domain& domain, std::vector<DyadicCube> cubes,
                                           double origin_x, double origin_y, double base);

private:
    WhitneyDecomposition() = default;
    void build_neighbors_and_validate(bool enforce_whitney);

    const Domain* domain_ = nullptr;
    double ox_ = 0.0, oy_ = 0.0, base_ = 1.0;
    int max_depth_ = 0;
    int min_level_ = 0;
    double covered_ = 0.0;
    double max_neighbor_ratio_ = 1.0;
    std::vector<DyadicCube> cubes_;
    std::vector<double> dist_bd_;
    std::vector<std::vector<int>> neighbors_;
    std::vector<DyadicCube> residual_;
};

inline WhitneyDecomposition WhitneyDecomposition::decompose(const Domain& domain, int max_depth) {
    if (max_depth < 2) throw ParameterError("decompose: max_depth must be >= 2");
    WhitneyDecomposition W;
    W.domain_ = &domain;
    W.max_depth_ = max_depth;
    const BBox& bb = domain.bounding_box();
    double d = domain.diam();
    // root cube padded by diam on each side so it strictly contains the closure
    W.ox_ = bb.xmin - d;
    W.oy_ = bb.ymin - d;
    W.base_ = std::max(bb.width(), bb.height()) + 2.0 * d;

    const double rt2 = std::sqrt(2.0);
    std::vector<DyadicCube> stack{{0, 0, 0}};
    while (!stack.empty()) {
        DyadicCube c = stack.back();
        stack.pop_back();
        double s = W.side(c);
        Point o = W.corner(c);
        double db = domain.dist_rect_to_boundary(o.x, o.y, o.x + s, o.y + s);
        bool clear = db > 0.0;  // no boundary touches the closed cube
        bool center_in = clear && domain.contains(Point{o.x + 0.5 * s, o.y + 0.5 * s});
        if (clear && !center_in) continue;  // entirely outside
        double diamQ = s * rt2;
        if (clear && center_in && diamQ <= db && db <= 4.0 * diamQ) {
            W.cubes_.push_back(c);
            continue;
        }
        if (c.level < max_depth) {
            stack.push_back({c.level + 1, 2 * c.ix, 2 * c.iy});
            stack.push_back({c.level + 1, 2 * c.ix + 1, 2 * c.iy});
            stack.push_back({c.level + 1, 2 * c.ix, 2 * c.iy + 1});
            stack.push_back({c.level + 1, 2 * c.ix + 1, 2 * c.iy + 1});
        } else {
            W.residual_.push_back(c);
        }
    }
    if (W.cubes_.empty()) throw NumericError("decompose: no cube accepted by max_depth (empty decomposition)");
    auto key = [](const DyadicCube& a, const DyadicCube& b) {
        if (a.level != b.level) return a.level < b.level;
        if (a.ix != b.ix) return a.ix < b.ix;
        return a.iy < b.iy;
    };
    std::sort(W.cubes_.begin(), W.cubes_.end(), key);
    std::sort(W.residual_.begin(), W.residual_.end(), key);
    W.build_neighbors_and_validate(/*enforce_whitney=*/true);
    return W;
}

inline WhitneyDecomposition WhitneyDecomposition::from_cubes(const Domain& domain,
                                                             std::vector<DyadicCube> cubes,
                                                             double origin_x, double origin_y,
                                                             double base) {
    WhitneyDecomposition W;
    W.domain_ = &domain;
    W.ox_ = origin_x;
    W.oy_ = origin_y;
    W.base_ = base;
    W.cubes_ = std::move(cubes);
    for (const DyadicCube& c : W.cubes_) W.max_depth_ = std::max(W.max_depth_, c.level);
    W.build_neighbors_and_validate(/*enforce_whitney=*/false);
    return W;
}

inline void WhitneyDecomposition::build_neighbors_and_validate(bool enforce_whitney) {
    const double rt2 = std::sqrt(2.0);
    std::size_t n = cubes_.size();
    dist_bd_.resize(n);
    covered_ = 0.0;
    min_level_ = cubes_.empty() ? 0 : cubes_.front().level;
    for (std::size_t i = 0; i < n; ++i) {
        const DyadicCube& c = cubes_[i];
        min_level_ = std::min(min_level_, c.level);
        double s = side(c);
        Point o = corner(c);
        covered_ += s * s;
        dist_bd_[i] = domain_->dist_rect_to_boundary(o.x, o.y, o.x + s, o.y + s);
        if (enforce_whitney) {
            double diamQ = s * rt2;
            if (!(diamQ <= dist_bd_[i] && dist_bd_[i] <= 4.0 * diamQ))
                throw NumericError("whitney invariant violated during construction");
        }
    }
    neighbors_.assign(n, {});
    max_neighbor_ratio_ = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (!cubes_touch(cubes_[i], cubes_[j])) continue;
            neighbors_[i].push_back(static_cast<int>(j));
            neighbors_[j].push_back(static_cast<int>(i));
            double r = std::ldexp(1.0, std::abs(cubes_[i].level - cubes_[j].level));
            max_neighbor_ratio_ = std::max(max_neighbor_ratio_, r);
        }
    }
}

/// Long distance D(Q,S) = l(Q) + dist(Q,S) + l(S) with dist between closed cubes.
inline double long_distance(const WhitneyDecomposition& W, const DyadicCube& Q, const DyadicCube& S) {
    double lq = W.side(Q), ls = W.side(S);
    Point oq = W.corner(Q), os = W.corner(S);
    double dx = std::max({os.x - (oq.x + lq), oq.x - (os.x + ls), 0.0});
    double dy = std::max({os.y - (oq.y + lq), oq.y - (os.y + ls), 0.0});
    return lq + std::hypot(dx, dy) + ls;
}

inline double long_distance(const WhitneyDecomposition& W, std::size_t qi, std::size_t si) {
    return long_distance(W, W.cube(qi), W.cube(si));
}

/// Sh_rho(Q): indices of cubes entirely inside the open ball B(x_Q, rho*l(Q)).
inline std::vector<int> shadow(const WhitneyDecomposition& W, std::size_t qi, double rho) {
    if (!(rho > 0.0)) throw ParameterError("shadow: rho must be > 0");
    Point c = W.center(qi);
    double rad = rho * W.side(qi);
    double rad2 = rad * rad;
    std::vector<int> out;
    for (std::size_t j = 0; j < W.size(); ++j) {
        double s = W.side(j);
        Point o = W.corner(W.cube(j));
        // farthest corner of an axis-aligned square from c
        double fx = std::max(std::abs(o.x - c.x), std::abs(o.x + s - c.x));
        double fy = std::max(std::abs(o.y - c.y), std::abs(o.y + s - c.y));
        if (fx * fx + fy * fy < rad2) out.push_back(static_cast<int>(j));
    }
    return out;
}

/// Shortest weighted path in the neighbor graph (edge weight = side of the
/// destination cube), with the central cube at the argmax of l over the path.
inline Chain chain(const WhitneyDecomposition& W, std::size_t qi, std::size_t si) {
    if (qi >= W.size() || si >= W.size()) throw ParameterError("chain: cube index out of range");
    if (qi == si) return Chain{{static_cast<int>(qi)}, 0};
    std::size_t n = W.size();
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    std::vector<int> prev(n, -1);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
    dist[qi] = 0.0;
    pq.push({0.0, static_cast<int>(qi)});
    while (!pq.empty()) {
        auto [d0, u] = pq.top();
        pq.pop();
        if (d0 > dist[u]) continue;
        if (static_cast<std::size_t>(u) == si) break;
        for (int v : W.neighbors(u)) {
            double nd = d0 + W.side(v);
            if (nd < dist[v]) {
                dist[v] = nd;
                prev[v] = u;
                pq.push({nd, v});
            }
        }
    }
    if (!std::isfinite(dist[si]))
        throw NumericError("chain: cubes are not connected in the neighbor graph");
    Chain ch;
    for (int at = static_cast<int>(si); at != -1; at = prev[at]) ch.cubes.push_back(at);
    std::reverse(ch.cubes.begin(), ch.cubes.end());
    ch.central_index = 0;
    double best = 0.0;
    for (std::size_t i = 0; i < ch.cubes.size(); ++i) {
        double l = W.side(ch.cubes[i]);
        if (l > best) {
            best = l;
            ch.central_index = static_cast<int>(i);
        }
    }
    return ch;
}

/// Largest constant a > 0 satisfied by the chains of sampled cube pairs:
/// sum l(Q_i) <= D(Q,S)/a and l(Q_i) >= a D(Q,Q_i) up to the central cube,
/// l(Q_i) >= a D(Q_i,S) after it. Returns the min over samples.
inline double admissibility_constant(const WhitneyDecomposition& W, std::size_t sample_pairs,
                                     std::uint64_t seed) {
    if (W.size() == 0) throw ParameterError("admissibility_constant: empty decomposition");
    Rng rng = Rng::derive(seed, 0xADA);
    double overall = std::numeric_limits<double>::infinity();
    auto eval_pair = [&](std::size_t qi, std::size_t si) {
        Chain ch = chain(W, qi, si);
        double total = 0.0;
        for (int idx : ch.cubes) total += W.side(idx);
        double D = long_distance(W, qi, si);
        double a = D / total;
        for (int i = 0; i <= ch.central_index; ++i)
            a = std::min(a, W.side(ch.cubes[i]) / long_distance(W, qi, ch.cubes[i]));
        for (std::size_t i = ch.central_index; i < ch.cubes.size(); ++i)
            a = std::min(a, W.side(ch.cubes[i]) / long_distance(W, ch.cubes[i], si));
        overall = std::min(overall, a);
    };
    if (W.size() == 1) {
        eval_pair(0, 0);  // degenerate: only the Q = S chain exists
        return overall;
    }
    for (std::size_t k = 0; k < sample_pairs; ++k) {
        std::size_t qi = rng.index(W.size());
        std::size_t si = rng.index(W.size());
        try {
            eval_pair(qi, si);
        } catch (const NumericError&) {
            // disconnected pair under truncation: skip
        }
    }
    if (!std::isfinite(overall)) throw NumericError("admissibility_constant: no connected pair sampled");
    return overall;
}

/// Smallest rho such that every cube S touching 5Q lies in Sh_rho(Q), over a
/// deterministic sample of cubes. This is the decomposition's working shadow
/// radius for the chain arguments.
inline double measure_shadow_rho(const WhitneyDecomposition& W, std::size_t sample_cubes,
                                 std::uint64_t seed) {
    Rng rng = Rng::derive(seed, 0x54AD);
    double rho = 1.0;
    std::size_t n = W.size();
    std::size_t m = std::min(sample_cubes, n);
    for (std::size_t k = 0; k < m; ++k) {
        std::size_t qi = (m == n) ? k : rng.index(n);
        double lq = W.side(qi);
        Point cq = W.center(qi);
        double hx0 = cq.x - 2.5 * lq, hx1 = cq.x + 2.5 * lq;
        double hy0 = cq.y - 2.5 * lq, hy1 = cq.y + 2.5 * lq;
        for (std::size_t j = 0; j < n; ++j) {
            double s = W.side(j);
            Point o = W.corner(W.cube(j));
            if (o.x + s < hx0 || o.x > hx1 || o.y + s < hy0 || o.y > hy1) continue;
            double fx = std::max(std::abs(o.x - cq.x), std::abs(o.x + s - cq.x));
            double fy = std::max(std::abs(o.y - cq.y), std::abs(o.y + s - cq.y));
            rho = std::max(rho, std::hypot(fx, fy) / lq * (1.0 + 1e-12));
        }
    }
    return rho;
}

/// JSON export of the cube list: [{"level":k,"ix":i,"iy":j},...]
inline std::string cubes_to_json(const WhitneyDecomposition& W) {
    std::string s = "[";
    for (std::size_t i = 0; i < W.size(); ++i) {
        const DyadicCube& c = W.cube(i);
        if (i) s += ",";
        s += "{\"level\":" + std::to_string(c.level) + ",\"ix\":" + std::to_string(c.ix) +
             ",\"iy\":" + std::to_string(c.iy) + "}";
    }
    s += "]";
    return s;
}

/// SVG rendering: cubes colored by level, optional shadow set and chain overlay.
inline std::string render_svg(const WhitneyDecomposition& W, const std::vector<int>* shadow_set = nullptr,
                              const Chain* chain_overlay = nullptr) {
    const Domain& dom = W.domain();
    const BBox& bb = dom.bounding_box();
    double pad = 0.05 * std::max(bb.width(), bb.height());
    double w = bb.width() + 2 * pad, h = bb.height() + 2 * pad;
    double scale = 800.0 / std::max(w, h);
    auto X = [&](double x) { return (x - bb.xmin + pad) * scale; };
    auto Y = [&](double y) { return (bb.ymax + pad - y) * scale; };
    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(int(w * scale)) +
                      "\" height=\"" + std::to_string(int(h * scale)) + "\">\n";
    int lmax = 1;
    for (const auto& c : W.cubes()) lmax = std::max(lmax, c.level);
    for (std::size_t i = 0; i < W.size(); ++i) {
        const DyadicCube& c = W.cube(i);
        double s = W.side(c);
        Point o = W.corner(c);
        int hue = (c.level * 310 / std::max(1, lmax)) % 360;
        svg += "<rect x=\"" + std::to_string(X(o.x)) + "\" y=\"" + std::to_string(Y(o.y + s)) +
               "\" width=\"" + std::to_string(s * scale) + "\" height=\"" + std::to_string(s * scale) +
               "\" fill=\"hsl(" + std::to_string(hue) + ",70%,60%)\" stroke=\"#333\" stroke-width=\"0.4\"/>\n";
    }
    if (shadow_set) {
        for (int i : *shadow_set) {
            const DyadicCube& c = W.cube(i);
            double s = W.side(c);
            Point o = W.corner(c);
            svg += "<rect x=\"" + std::to_string(X(o.x)) + "\" y=\"" + std::to_string(Y(o.y + s)) +
                   "\" width=\"" + std::to_string(s * scale) + "\" height=\"" + std::to_string(s * scale) +
                   "\" fill=\"none\" stroke=\"#000\" stroke-width=\"2\"/>\n";
        }
    }
    if (chain_overlay && chain_overlay->cubes.size() > 1) {
        svg += "<polyline fill=\"none\" stroke=\"#d00\" stroke-width=\"2\" points=\"";
        for (int i : chain_overlay->cubes) {
            Point c = W.center(i);
            svg += std::to_string(X(c.x)) + "," + std::to_string(Y(c.y)) + " ";
        }
        svg += "\"/>\n";
    }
    // domain outline
    svg += "<polygon fill=\"none\" stroke=\"#000\" stroke-width=\"1.2\" points=\"";
    for (const Point& p : dom.vertices()) svg += std::to_string(X(p.x)) + "," + std::to_string(Y(p.y)) + " ";
    svg += "\"/>\n</svg>\n";
    return svg;
}

}  // namespace fsl
