#pragma once

#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <vector>

#include "fsl/common.hpp"
#include "fsl/geometry.hpp"

namespace fsl {

/// Gauss-Legendre rule mapped to [0,1].
struct GLRule {
    std::vector<double> x, w;
};

inline const GLRule& gl_rule(int n) {
    if (n < 1 || n > 32) throw ParameterError("gl_rule: order must be in [1,32]");
    static std::map<int, GLRule> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    GLRule r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(3.14159265358979323846 * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        double w = 2.0 / ((1.0 - x * x) * pp * pp);
        r.x[i] = 0.5 * (1.0 - x);
        r.w[i] = 0.5 * w;
        r.x[n - 1 - i] = 0.5 * (1.0 + x);
        r.w[n - 1 - i] = 0.5 * w;
    }
    return cache.emplace(n, std::move(r)).first->second;
}

struct Rect {
    double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    double area() const { return width() * height(); }
    bool empty() const { return !(x1 > x0) || !(y1 > y0); }
    Rect clipped(const Rect& o) const {
        return Rect{std::max(x0, o.x0), std::max(y0, o.y0), std::min(x1, o.x1), std::min(y1, o.y1)};
    }
};

namespace detail {

inline void split_rect_at(std::vector<Rect>& rects, bool vertical, double v) {
    std::size_t n = rects.size();
    for (std::size_t i = 0; i < n; ++i) {
        Rect r = rects[i];
        if (vertical && r.x0 < v && v < r.x1) {
            rects[i] = Rect{r.x0, r.y0, v, r.y1};
            rects.push_back(Rect{v, r.y0, r.x1, r.y1});
        } else if (!vertical && r.y0 < v && v < r.y1) {
            rects[i] = Rect{r.x0, r.y0, r.x1, v};
            rects.push_back(Rect{r.x0, v, r.x1, r.y1});
        }
    }
}

/// The L-inf annulus {a <= |z|_inf <= b} intersected with `box`, cut further
/// at the given axis values (integrand kink lines), emitted as rectangles.
inline void annulus_rects(double a, double b, const Rect& box, const std::vector<double>& cuts_x,
                          const std::vector<double>& cuts_y, std::vector<Rect>& out) {
    std::array<Rect, 4> slabs{{
        {-b, a, b, b},     // top
        {-b, -b, b, -a},   // bottom
        {-b, -a, -a, a},   // left
        {a, -a, b, a},     // right
    }};
    std::vector<Rect> work;
    for (const Rect& s : slabs) {
        Rect r = s.clipped(box);
        if (r.empty()) continue;
        work.assign(1, r);
        for (double v : cuts_x) split_rect_at(work, true, v);
        for (double v : cuts_y) split_rect_at(work, false, v);
        for (const Rect& piece : work)
            if (!piece.empty()) out.push_back(piece);
    }
}

}  // namespace detail

/// Integrates f(p, d_Omega(p)) over cell ∩ Omega. Interior cells use a tensor
/// Gauss-Legendre rule; boundary-straddling cells are refined max_subdiv
/// levels and finally estimated by a deterministic 4x4 subsample (inside
/// fraction times the mean over inside points).
template <class F>
double integrate_clipped(const Domain& dom, const Rect& cell, const F& f, int order, int max_subdiv) {
    double db = dom.dist_rect_to_boundary(cell.x0, cell.y0, cell.x1, cell.y1);
    if (db > 0.0) {
        Point c{0.5 * (cell.x0 + cell.x1), 0.5 * (cell.y0 + cell.y1)};
        if (!dom.contains(c)) return 0.0;  // entirely outside
        const GLRule& g = gl_rule(order);
        double sum = 0.0;
        for (int i = 0; i < order; ++i) {
            double px = cell.x0 + g.x[i] * cell.width();
            for (int j = 0; j < order; ++j) {
                Point p{px, cell.y0 + g.x[j] * cell.height()};
                sum += g.w[i] * g.w[j] * f(p, dom.dist_to_boundary(p));
            }
        }
        return sum * cell.area();
    }
    if (max_subdiv > 0) {
        double mx = 0.5 * (cell.x0 + cell.x1), my = 0.5 * (cell.y0 + cell.y1);
        return integrate_clipped(dom, Rect{cell.x0, cell.y0, mx, my}, f, order, max_subdiv - 1) +
               integrate_clipped(dom, Rect{mx, cell.y0, cell.x1, my}, f, order, max_subdiv - 1) +
               integrate_clipped(dom, Rect{cell.x0, my, mx, cell.y1}, f, order, max_subdiv - 1) +
               integrate_clipped(dom, Rect{mx, my, cell.x1, cell.y1}, f, order, max_subdiv - 1);
    }
    // terminal sliver: inside-fraction subsample
    const int k = 4;
    double sum = 0.0;
    int inside = 0;
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            Point p{cell.x0 + (i + 0.5) / k * cell.width(), cell.y0 + (j + 0.5) / k * cell.height()};
            if (dom.contains(p)) {
                ++inside;
                sum += f(p, dom.dist_to_boundary(p));
            }
        }
    if (inside == 0) return 0.0;
    return cell.area() * (double(inside) / (k * k)) * (sum / inside);
}

/// Area of cell ∩ Omega by the same refinement scheme.
inline double clipped_area(const Domain& dom, const Rect& cell, int max_subdiv) {
    return integrate_clipped(dom, cell, [](Point, double) { return 1.0; }, 1, max_subdiv);
}

}  // namespace fsl
