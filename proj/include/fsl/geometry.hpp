#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <utility>
#include <vector>

#include "fsl/common.hpp"
#include "fsl/estimate.hpp"

namespace fsl {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline double dist2(Point a, Point b) { return sqr(a.x - b.x) + sqr(a.y - b.y); }
inline double dist(Point a, Point b) { return std::sqrt(dist2(a, b)); }

struct BBox {
    double xmin = 0.0, ymin = 0.0, xmax = 0.0, ymax = 0.0;
    double width() const { return xmax - xmin; }
    double height() const { return ymax - ymin; }
    bool contains(Point p) const {
        return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
    }
};

struct Segment {
    Point a, b;
    double length() const { return dist(a, b); }
};

namespace geo {

inline double cross(Point o, Point a, Point b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

inline double point_segment_dist2(Point p, Point a, Point b) {
    double vx = b.x - a.x, vy = b.y - a.y;
    double wx = p.x - a.x, wy = p.y - a.y;
    double vv = vx * vx + vy * vy;
    double t = vv > 0.0 ? std::clamp((wx * vx + wy * vy) / vv, 0.0, 1.0) : 0.0;
    return sqr(wx - t * vx) + sqr(wy - t * vy);
}

inline double point_segment_dist(Point p, Point a, Point b) {
    return std::sqrt(point_segment_dist2(p, a, b));
}

/// Proper or touching intersection of closed segments.
inline bool segments_intersect(Point p1, Point p2, Point p3, Point p4) {
    double d1 = cross(p3, p4, p1);
    double d2 = cross(p3, p4, p2);
    double d3 = cross(p1, p2, p3);
    double d4 = cross(p1, p2, p4);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
        ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
        return true;
    auto on = [](Point a, Point b, Point q) {
        return std::min(a.x, b.x) <= q.x && q.x <= std::max(a.x, b.x) &&
               std::min(a.y, b.y) <= q.y && q.y <= std::max(a.y, b.y);
    };
    if (d1 == 0 && on(p3, p4, p1)) return true;
    if (d2 == 0 && on(p3, p4, p2)) return true;
    if (d3 == 0 && on(p1, p2, p3)) return true;
    if (d4 == 0 && on(p1, p2, p4)) return true;
    return false;
}

inline double segment_segment_dist(Point p1, Point p2, Point p3, Point p4) {
    if (segments_intersect(p1, p2, p3, p4)) return 0.0;
    double d = point_segment_dist2(p1, p3, p4);
    d = std::min(d, point_segment_dist2(p2, p3, p4));
    d = std::min(d, point_segment_dist2(p3, p1, p2));
    d = std::min(d, point_segment_dist2(p4, p1, p2));
    return std::sqrt(d);
}

/// Exact distance from a closed axis-aligned rect to a segment (0 if they touch).
inline double rect_segment_dist(double x0, double y0, double x1, double y1, Point a, Point b) {
    auto inside = [&](Point q) { return q.x >= x0 && q.x <= x1 && q.y >= y0 && q.y <= y1; };
    if (inside(a) || inside(b)) return 0.0;
    Point c00{x0, y0}, c10{x1, y0}, c11{x1, y1}, c01{x0, y1};
    double d = segment_segment_dist(a, b, c00, c10);
    d = std::min(d, segment_segment_dist(a, b, c10, c11));
    d = std::min(d, segment_segment_dist(a, b, c11, c01));
    d = std::min(d, segment_segment_dist(a, b, c01, c00));
    return d;
}

inline double shoelace_area(const std::vector<Point>& v) {
    double s = 0.0;
    for (std::size_t i = 0, n = v.size(); i < n; ++i) {
        Point a = v[i], b = v[(i + 1) % n];
        s += a.x * b.y - b.x * a.y;
    }
    return 0.5 * s;
}

inline std::vector<Point> convex_hull(std::vector<Point> pts) {
    std::sort(pts.begin(), pts.end(), [](Point a, Point b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](Point a, Point b) { return a.x == b.x && a.y == b.y; }),
              pts.end());
    std::size_t n = pts.size();
    if (n <= 2) return pts;
    std::vector<Point> h(2 * n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
        h[k++] = pts[i];
    }
    for (std::size_t i = n - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
        h[k++] = pts[i];
    }
    h.resize(k - 1);
    return h;
}

/// Max pairwise distance via rotating calipers on the convex hull.
inline double point_set_diameter(const std::vector<Point>& pts) {
    std::vector<Point> h = convex_hull(pts);
    std::size_t m = h.size();
    if (m == 1) return 0.0;
    if (m == 2) return dist(h[0], h[1]);
    double best = 0.0;
    std::size_t j = 1;
    for (std::size_t i = 0; i < m; ++i) {
        Point a = h[i], b = h[(i + 1) % m];
        for (;;) {
            std::size_t jn = (j + 1) % m;
            double cur = std::abs(cross(a, b, h[j]));
            double nxt = std::abs(cross(a, b, h[jn]));
            if (nxt > cur) j = jn;
            else break;
        }
        best = std::max(best, dist2(a, h[j]));
        best = std::max(best, dist2(b, h[j]));
    }
    return std::sqrt(best);
}

}  // namespace geo

/// Uniform-grid acceleration structure over a segment set. Serves exact
/// nearest-boundary-distance queries (points and rects) and ray-crossing
/// parity, all read-only after construction.
class SegmentIndex {
public:
    SegmentIndex() = default;

    explicit SegmentIndex(std::vector<Segment> segs) : segs_(std::move(segs)) {
        double xmin = std::numeric_limits<double>::infinity(), ymin = xmin;
        double xmax = -xmin, ymax = -xmin;
        for (const Segment& s : segs_) {
            xmin = std::min({xmin, s.a.x, s.b.x});
            xmax = std::max({xmax, s.a.x, s.b.x});
            ymin = std::min({ymin, s.a.y, s.b.y});
            ymax = std::max({ymax, s.a.y, s.b.y});
        }
        double w = std::max(xmax - xmin, 1e-12), h = std::max(ymax - ymin, 1e-12);
        double pad = 1e-9 * std::max(w, h);
        box_ = BBox{xmin - pad, ymin - pad, xmax + pad, ymax + pad};
        std::size_t target = std::max<std::size_t>(8, static_cast<std::size_t>(std::sqrt(double(segs_.size()))) * 2);
        nx_ = ny_ = static_cast<int>(std::min<std::size_t>(target, 512));
        cw_ = box_.width() / nx_;
        ch_ = box_.height() / ny_;
        cells_.assign(static_cast<std::size_t>(nx_) * ny_, {});
        for (std::size_t i = 0; i < segs_.size(); ++i) {
            const Segment& s = segs_[i];
            int ix0 = cell_x(std::min(s.a.x, s.b.x)), ix1 = cell_x(std::max(s.a.x, s.b.x));
            int iy0 = cell_y(std::min(s.a.y, s.b.y)), iy1 = cell_y(std::max(s.a.y, s.b.y));
            for (int ix = ix0; ix <= ix1; ++ix)
                for (int iy = iy0; iy <= iy1; ++iy) {
                    double cx0 = box_.xmin + ix * cw_, cy0 = box_.ymin + iy * ch_;
                    if (geo::rect_segment_dist(cx0, cy0, cx0 + cw_, cy0 + ch_, s.a, s.b) == 0.0)
                        cells_[idx(ix, iy)].push_back(static_cast<int>(i));
                }
        }
    }

    std::size_t size() const { return segs_.size(); }
    const std::vector<Segment>& segments() const { return segs_; }

    double dist_point(Point p) const { return dist_rect(p.x, p.y, p.x, p.y); }

    /// Exact min distance from the closed rect [x0,x1]x[y0,y1] to the segments.
    double dist_rect(double x0, double y0, double x1, double y1) const {
        if (segs_.empty()) return std::numeric_limits<double>::infinity();
        int ix0 = cell_x(x0), ix1 = cell_x(x1), iy0 = cell_y(y0), iy1 = cell_y(y1);
        double best = std::numeric_limits<double>::infinity();
        auto visit = [&](int ix, int iy) -> bool {
            if (ix < 0 || iy < 0 || ix >= nx_ || iy >= ny_) return false;
            for (int si : cells_[idx(ix, iy)]) {
                const Segment& s = segs_[si];
                best = std::min(best, geo::rect_segment_dist(x0, y0, x1, y1, s.a, s.b));
            }
            return true;
        };
        int max_ring = nx_ + ny_ + 2;
        for (int ring = 0; ring <= max_ring; ++ring) {
            // every cell at ring r >= 1 is at least (r-1) cell sizes from the
            // query cells, so once best undercuts that we are done
            if (ring > 1 && best <= (ring - 1) * std::min(cw_, ch_)) break;
            bool any = false;
            if (ring == 0) {
                for (int ix = ix0; ix <= ix1; ++ix)
                    for (int iy = iy0; iy <= iy1; ++iy) any |= visit(ix, iy);
            } else {
                for (int ix = ix0 - ring; ix <= ix1 + ring; ++ix) {
                    any |= visit(ix, iy0 - ring);
                    any |= visit(ix, iy1 + ring);
                }
                for (int iy = iy0 - ring + 1; iy <= iy1 + ring - 1; ++iy) {
                    any |= visit(ix0 - ring, iy);
                    any |= visit(ix1 + ring, iy);
                }
                // ring entirely outside the grid: nothing further out either
                if (!any) break;
            }
        }
        return best;
    }

    /// Parity of crossings of the ray p + t*(ux,uy), t > 0, with the segments.
    /// Each crossing is counted in the unique grid cell containing the hit
    /// point (half-open cells), so no per-query state is needed.
    bool ray_parity_odd(Point p, double ux, double uy) const {
        long cnt = 0;
        // walk cells along the ray (simple DDA)
        double px = p.x, py = p.y;
        int ix = cell_x_unclamped(px), iy = cell_y_unclamped(py);
        int sx = ux > 0 ? 1 : -1, sy = uy > 0 ? 1 : -1;
        double tx = next_boundary_t(px, box_.xmin, cw_, ux);
        double ty = next_boundary_t(py, box_.ymin, ch_, uy);
        double dtx = std::abs(cw_ / ux), dty = std::abs(ch_ / uy);
        auto process = [&](int cx, int cy) {
            if (cx < 0 || cy < 0 || cx >= nx_ || cy >= ny_) return;
            double cx0 = box_.xmin + cx * cw_, cy0 = box_.ymin + cy * ch_;
            double cx1 = cx0 + cw_, cy1 = cy0 + ch_;
            for (int si : cells_[idx(cx, cy)]) {
                const Segment& s = segs_[si];
                double ex = s.b.x - s.a.x, ey = s.b.y - s.a.y;
                double det = ux * (-ey) + uy * ex;
                if (det == 0.0) continue;
                double rx = s.a.x - px, ry = s.a.y - py;
                double t = (rx * (-ey) + ex * ry) / det;
                double u = (ux * ry - uy * rx) / det;
                if (t > 0.0 && u >= 0.0 && u < 1.0) {
                    double hx = px + t * ux, hy = py + t * uy;
                    if (hx >= cx0 && hx < cx1 && hy >= cy0 && hy < cy1) ++cnt;
                }
            }
        };
        // cell indices move monotonically along the ray; once an axis exits
        // the grid in its travel direction the ray never re-enters
        for (int guard = 0; guard < 4 * (nx_ + ny_ + 2); ++guard) {
            if ((sx > 0 && ix >= nx_) || (sx < 0 && ix < 0) ||
                (sy > 0 && iy >= ny_) || (sy < 0 && iy < 0))
                break;
            process(ix, iy);
            if (tx < ty) {
                ix += sx;
                tx += dtx;
            } else {
                iy += sy;
                ty += dty;
            }
        }
        return (cnt % 2) == 1;
    }

    const BBox& grid_box() const { return box_; }

private:
    static double next_boundary_t(double v, double origin, double cell, double dir) {
        if (dir == 0.0) return std::numeric_limits<double>::infinity();
        double rel = (v - origin) / cell;
        double k = dir > 0 ? std::floor(rel) + 1 : std::ceil(rel) - 1;
        return (origin + k * cell - v) / dir;
    }
    int cell_x(double x) const { return std::clamp(cell_x_unclamped(x), 0, nx_ - 1); }
    int cell_y(double y) const { return std::clamp(cell_y_unclamped(y), 0, ny_ - 1); }
    int cell_x_unclamped(double x) const { return static_cast<int>(std::floor((x - box_.xmin) / cw_)); }
    int cell_y_unclamped(double y) const { return static_cast<int>(std::floor((y - box_.ymin) / ch_)); }
    std::size_t idx(int ix, int iy) const { return static_cast<std::size_t>(iy) * nx_ + ix; }

    std::vector<Segment> segs_;
    BBox box_;
    int nx_ = 0, ny_ = 0;
    double cw_ = 1.0, ch_ = 1.0;
    std::vector<std::vector<int>> cells_;
};

enum class DomainKind { polygon, koch_prefractal };

/// Bounded open planar region with polygonal boundary (possibly a Koch
/// prefractal, stored expanded). Immutable after construction; all queries
/// are safe to call concurrently.
class Domain {
public:
    DomainKind kind() const { return kind_; }
    const std::vector<Point>& vertices() const { return verts_; }
    const std::vector<Segment>& segments() const { return index_->segments(); }
    const BBox& bounding_box() const { return bbox_; }
    double diam() const { return diam_; }
    double area() const { return area_; }
    double perimeter() const { return perimeter_; }
    const SegmentIndex& boundary_index() const { return *index_; }

    /// d_Omega: exact distance to the boundary as a set (defined everywhere).
    double dist_to_boundary(Point p) const { return index_->dist_point(p); }

    /// Exact distance from the closed rect to the boundary.
    double dist_rect_to_boundary(double x0, double y0, double x1, double y1) const {
        return index_->dist_rect(x0, y0, x1, y1);
    }

    /// Open-set membership: boundary points are not contained. Vertex ties of
    /// the crossing ray are avoided by a fixed irrational ray direction.
    bool contains(Point p) const {
        if (!bbox_.contains(p)) return false;
        if (index_->dist_point(p) == 0.0) return false;
        return index_->ray_parity_odd(p, ray_ux_, ray_uy_);
    }

    static Domain make_polygon(std::vector<Point> vertices, bool check_simple = true);
    static Domain koch_snowflake(int level, double side);

private:
    Domain() = default;
    void finish(DomainKind kind, std::vector<Point> verts, bool check_simple);

    DomainKind kind_ = DomainKind::polygon;
    std::vector<Point> verts_;
    BBox bbox_;
    double diam_ = 0.0;
    double area_ = 0.0;
    double perimeter_ = 0.0;
    std::shared_ptr<const SegmentIndex> index_;
    double ray_ux_ = 0.0, ray_uy_ = 0.0;
};

inline void Domain::finish(DomainKind kind, std::vector<Point> verts, bool check_simple) {
    if (verts.size() < 3) throw ParameterError("polygon needs at least 3 vertices");
    for (const Point& p : verts)
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw ParameterError("polygon vertex coordinates must be finite");
    double area = geo::shoelace_area(verts);
    if (area <= 0.0) {
        if (area == 0.0) throw ParameterError("degenerate polygon: zero area");
        throw ParameterError("polygon must be counterclockwise");
    }
    kind_ = kind;
    verts_ = std::move(verts);
    area_ = area;
    std::size_t n = verts_.size();
    std::vector<Segment> segs(n);
    perimeter_ = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        segs[i] = Segment{verts_[i], verts_[(i + 1) % n]};
        if (segs[i].length() == 0.0) throw ParameterError("degenerate polygon edge of zero length");
        perimeter_ += segs[i].length();
    }
    index_ = std::make_shared<SegmentIndex>(std::move(segs));
    if (check_simple) {
        // non-adjacent edges must not intersect; adjacent ones only at the shared vertex
        const auto& ss = index_->segments();
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
                if (adjacent) continue;
                if (geo::segments_intersect(ss[i].a, ss[i].b, ss[j].a, ss[j].b))
                    throw ParameterError("polygon is self-intersecting");
            }
        }
    }
    double xmin = verts_[0].x, xmax = xmin, ymin = verts_[0].y, ymax = ymin;
    for (const Point& p : verts_) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    bbox_ = BBox{xmin, ymin, xmax, ymax};
    diam_ = geo::point_set_diameter(verts_);
    // fixed irrational multiple of pi keeps the crossing ray off vertices
    double ang = 0.5 * (std::sqrt(5.0) - 1.0) * 3.14159265358979323846 * 0.25;
    ray_ux_ = std::cos(ang);
    ray_uy_ = std::sin(ang);
}

inline Domain Domain::make_polygon(std::vector<Point> vertices, bool check_simple) {
    Domain d;
    d.finish(DomainKind::polygon, std::move(vertices), check_simple);
    return d;
}

inline Domain Domain::koch_snowflake(int level, double side) {
    if (level < 0) throw ParameterError("koch_snowflake: level must be >= 0");
    if (level > 8) throw ParameterError("koch_snowflake: level > 8 exceeds supported size");
    if (!(side > 0.0)) throw ParameterError("koch_snowflake: side must be > 0");
    double h = side * std::sqrt(3.0) / 2.0;
    std::vector<Point> pts{{0.0, 0.0}, {side, 0.0}, {side / 2.0, h}};  // CCW
    const double c = std::cos(-3.14159265358979323846 / 3.0);
    const double sn = std::sin(-3.14159265358979323846 / 3.0);
    for (int l = 0; l < level; ++l) {
        std::vector<Point> nxt;
        nxt.reserve(pts.size() * 4);
        std::size_t n = pts.size();
        for (std::size_t i = 0; i < n; ++i) {
            Point a = pts[i], b = pts[(i + 1) % n];
            double dx = (b.x - a.x) / 3.0, dy = (b.y - a.y) / 3.0;
            Point t1{a.x + dx, a.y + dy};
            Point t2{a.x + 2 * dx, a.y + 2 * dy};
            // rotating the middle third by -60 deg pushes the peak outward (CCW chain)
            Point peak{t1.x + c * dx - sn * dy, t1.y + sn * dx + c * dy};
            nxt.push_back(a);
            nxt.push_back(t1);
            nxt.push_back(peak);
            nxt.push_back(t2);
        }
        pts = std::move(nxt);
    }
    Domain d;
    d.finish(DomainKind::koch_prefractal, std::move(pts), /*check_simple=*/false);
    return d;
}

// spec-level free operations
inline Domain make_polygon(std::vector<Point> vertices) { return Domain::make_polygon(std::move(vertices)); }
inline Domain koch_snowflake(int level, double side) { return Domain::koch_snowflake(level, side); }
inline double dist_to_boundary(const Domain& d, Point p) { return d.dist_to_boundary(p); }
inline bool contains(const Domain& d, Point p) { return d.contains(p); }

/// Discretized closed boundary chain of a Domain, with arclength sampling
/// and its own distance index (the dimension estimators work on this).
class BoundarySampler {
public:
    explicit BoundarySampler(const Domain& d) : BoundarySampler(d.segments()) {}

    explicit BoundarySampler(std::vector<Segment> segs)
        : index_(std::make_shared<SegmentIndex>(std::move(segs))) {
        const auto& ss = index_->segments();
        cum_.reserve(ss.size() + 1);
        cum_.push_back(0.0);
        for (const Segment& s : ss) cum_.push_back(cum_.back() + s.length());
        total_length_ = cum_.back();
        std::vector<Point> pts;
        pts.reserve(ss.size() * 2);
        for (const Segment& s : ss) {
            pts.push_back(s.a);
            pts.push_back(s.b);
        }
        diam_ = geo::point_set_diameter(pts);
    }

    const std::vector<Segment>& segments() const { return index_->segments(); }
    double total_length() const { return total_length_; }
    double diam() const { return diam_; }
    double dist_point(Point p) const { return index_->dist_point(p); }

    Point point_at_arclength(double t) const {
        const auto& ss = index_->segments();
        if (ss.empty()) throw ParameterError("BoundarySampler: no segments");
        t = std::clamp(t, 0.0, total_length_);
        auto it = std::upper_bound(cum_.begin(), cum_.end(), t);
        std::size_t i = std::min<std::size_t>(ss.size() - 1, static_cast<std::size_t>(it - cum_.begin()) - 1);
        double local = t - cum_[i];
        double len = ss[i].length();
        double u = len > 0 ? local / len : 0.0;
        return Point{ss[i].a.x + u * (ss[i].b.x - ss[i].a.x), ss[i].a.y + u * (ss[i].b.y - ss[i].a.y)};
    }

    /// n points equally spaced by arclength along the chain.
    std::vector<Point> sample_uniform(std::size_t n) const {
        std::vector<Point> out;
        out.reserve(n);
        for (std::size_t i = 0; i < n; ++i)
            out.push_back(point_at_arclength(total_length_ * (double(i) + 0.5) / double(n)));
        return out;
    }

private:
    std::shared_ptr<const SegmentIndex> index_;
    std::vector<double> cum_;
    double total_length_ = 0.0;
    double diam_ = 0.0;
};

inline BoundarySampler boundary_sampler(const Domain& d) { return BoundarySampler(d); }

/// Monte Carlo area of {y : dist(y, boundary) <= r} ∩ B(center, R).
/// Same seed gives the identical estimate.
inline Estimate tubular_volume(const BoundarySampler& boundary, Point center, double r, double R,
                               std::size_t mc_samples, std::uint64_t seed) {
    if (!(r > 0.0) || !(r < R)) throw ParameterError("tubular_volume: need 0 < r < R");
    if (!(R < boundary.diam())) throw ParameterError("tubular_volume: need R < diam of the boundary set");
    if (mc_samples == 0) throw ParameterError("tubular_volume: mc_samples must be > 0");
    if (boundary.dist_point(center) > 1e-9 * boundary.diam())
        throw ParameterError("tubular_volume: center must lie on the boundary");
    Rng rng = Rng::derive(seed, 0xB0B);
    std::size_t hit = 0;
    for (std::size_t i = 0; i < mc_samples; ++i) {
        // uniform in the disk by rejection from the bounding square
        double px, py;
        do {
            px = rng.uniform(-R, R);
            py = rng.uniform(-R, R);
        } while (px * px + py * py > R * R);
        Point q{center.x + px, center.y + py};
        if (boundary.dist_point(q) <= r) ++hit;
    }
    double ball = 3.14159265358979323846 * R * R;
    double p = double(hit) / double(mc_samples);
    Estimate e;
    e.value = ball * p;
    e.std_error = ball * std::sqrt(std::max(0.0, p * (1.0 - p) / double(mc_samples)));
    e.refinement_trace = {e.value};
    return e;
}

/// Empirical lower bound for the plumpness constant kappa: for sampled
/// x in the closure and each radius r, grid-searches z in B(x,r) maximizing
/// the inscribed ball B(z, d_Omega(z)); returns the min over samples of
/// max_z min(d(z), r)/r, clamped to (0,1].
inline double plumpness_estimate(const Domain& domain, const std::vector<double>& radii,
                                 std::size_t trial_centers, std::uint64_t seed) {
    for (double r : radii)
        if (!(r > 0.0 && r < domain.diam()))
            throw ParameterError("plumpness_estimate: radii must lie in (0, diam)");
    if (radii.empty()) throw ParameterError("plumpness_estimate: radii must be nonempty");
    Rng rng = Rng::derive(seed, 0x9117);
    const BBox& bb = domain.bounding_box();
    BoundarySampler bs(domain);
    std::vector<Point> centers;
    centers.reserve(trial_centers);
    // mix of interior points and boundary points: closure samples
    while (centers.size() < trial_centers / 2) {
        Point p{rng.uniform(bb.xmin, bb.xmax), rng.uniform(bb.ymin, bb.ymax)};
        if (domain.contains(p)) centers.push_back(p);
    }
    while (centers.size() < trial_centers)
        centers.push_back(bs.point_at_arclength(rng.uniform(0.0, bs.total_length())));

    double overall = 1.0;
    for (Point x : centers) {
        for (double r : radii) {
            double best = 0.0;
            // three zoom rounds of grid search over z in B(x,r)
            Point c = x;
            double half = r;
            const int g = 11;
            for (int round = 0; round < 3; ++round) {
                Point arg = c;
                for (int i = 0; i < g; ++i) {
                    for (int j = 0; j < g; ++j) {
                        Point z{c.x - half + 2 * half * i / (g - 1.0), c.y - half + 2 * half * j / (g - 1.0)};
                        if (dist2(z, x) > r * r) continue;
                        if (!domain.contains(z)) continue;
                        double kr = std::min(domain.dist_to_boundary(z), r);
                        if (kr > best) {
                            best = kr;
                            arg = z;
                        }
                    }
                }
                c = arg;
                half /= double(g - 1);
            }
            overall = std::min(overall, std::min(1.0, best / r));
        }
    }
    return std::max(overall, 1e-12);
}

}  // namespace fsl
