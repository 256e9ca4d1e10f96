#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "fsl/common.hpp"
#include "fsl/estimate.hpp"
#include "fsl/field.hpp"
#include "fsl/quadrature.hpp"
#include "fsl/whitney.hpp"

namespace fsl {

/// Knobs of the cube-pair quadrature. Defaults: order 3 per axis for
/// separated pairs; near pairs via dyadic |z|-ring subdivision down to
/// extent * 2^-ring_levels, remainder bounded analytically.
struct QuadratureProfile {
    int order_far = 3;
    int order_near_z = 3;
    int order_near_x = 3;
    int ring_levels = 14;
    int completion_subdiv = 12;
    int threads = 0;
};

namespace detail {

struct NodeCache {
    int order = 0;
    std::size_t per_cube = 0;
    std::vector<double> px, py, gw, d;
};

inline NodeCache build_node_cache(const WhitneyDecomposition& W, int order) {
    const GLRule& g = gl_rule(order);
    NodeCache c;
    c.order = order;
    c.per_cube = static_cast<std::size_t>(order) * order;
    std::size_t n = W.size();
    c.px.resize(n * c.per_cube);
    c.py.resize(n * c.per_cube);
    c.gw.resize(n * c.per_cube);
    c.d.resize(n * c.per_cube);
    for (std::size_t i = 0; i < n; ++i) {
        double s = W.side(i);
        Point o = W.corner(W.cube(i));
        double area = s * s;
        std::size_t base = i * c.per_cube;
        for (int a = 0; a < order; ++a)
            for (int b = 0; b < order; ++b) {
                std::size_t k = base + a * order + b;
                c.px[k] = o.x + g.x[a] * s;
                c.py[k] = o.y + g.x[b] * s;
                c.gw[k] = g.w[a] * g.w[b] * area;
                c.d[k] = W.domain().dist_to_boundary(Point{c.px[k], c.py[k]});
            }
    }
    return c;
}

struct PowOp {
    double p;
    bool is1, is2;
    explicit PowOp(double p_) : p(p_), is1(p_ == 1.0), is2(p_ == 2.0) {}
    double operator()(double df) const {
        if (is2) return df * df;
        double a = std::abs(df);
        if (is1) return a;
        return std::pow(a, p);
    }
};

struct PassRequest {
    const ScalarField* f = nullptr;
    const Domain* domain = nullptr;
    double s = 0.5, p = 2.0;
    const WeightField* w = nullptr;  // weight at the inner variable y
    const WeightField* v = nullptr;  // weight at the outer variable x
    const WhitneyDecomposition* W = nullptr;
    std::vector<double> radii;  // truncation factors (theta or Hardy's R); may be empty
    bool symmetric = false;     // truncated kernel (w(x)v(y)+w(y)v(x))
    bool need_full = true;
    QuadratureProfile prof;
};

struct PassResult {
    std::vector<double> full_by_level;
    std::vector<std::vector<double>> trunc_by_level;  // [radius][level]
    double band = 0.0;
};

/// One accumulator set: full + one slot per truncation radius.
struct Acc {
    std::vector<double> slots;  // [1 + n_radii] per level, flattened level-major
    double band = 0.0;
    Acc() = default;
    Acc(std::size_t levels, std::size_t nr) : slots(levels * (1 + nr), 0.0) {}
    void add(std::size_t level, std::size_t slot, double val, std::size_t nr) {
        slots[level * (1 + nr) + slot] += val;
    }
};

inline FieldRegion cube_region(const WhitneyDecomposition& W, std::size_t i) {
    double s = W.side(i);
    Point o = W.corner(W.cube(i));
    FieldRegion r;
    r.dmin = W.dist_boundary(i);
    r.dmax = r.dmin + s * std::sqrt(2.0);
    r.box = BBox{o.x, o.y, o.x + s, o.y + s};
    return r;
}

inline FieldRegion pair_region(const WhitneyDecomposition& W, std::size_t i, std::size_t j) {
    FieldRegion a = cube_region(W, i), b = cube_region(W, j);
    FieldRegion r;
    r.dmin = std::min(a.dmin, b.dmin);
    r.dmax = std::max(a.dmax, b.dmax);
    r.box = BBox{std::min(a.box.xmin, b.box.xmin), std::min(a.box.ymin, b.box.ymin),
                 std::max(a.box.xmax, b.box.xmax), std::max(a.box.ymax, b.box.ymax)};
    return r;
}

/// Analytic bound on the skipped diagonal band {|z|_inf <= h} of a near pair:
/// integrand <= L^p |z|^{p-d-sp} (w v)_max, integrated in polar form.
inline double near_band_bound(const PassRequest& rq, std::size_t i, std::size_t j, double h) {
    const WhitneyDecomposition& W = *rq.W;
    FieldRegion reg = pair_region(W, i, j);
    double L = rq.f->lipschitz(reg);
    if (L == 0.0 || h <= 0.0) return 0.0;
    double pw = rq.p * (1.0 - rq.s);
    double ringint = 2.0 * 3.14159265358979323846 * std::pow(std::sqrt(2.0) * h, pw) / pw;
    double area = std::min(sqr(W.side(i)), sqr(W.side(j)));
    double wv = rq.w->sup(reg) * rq.v->sup(reg);
    double bound = std::pow(L, rq.p) * ringint * area * wv;
    if (i != j) bound *= 2.0;  // both orientations
    return bound;
}

/// Separated pair: tensor Gauss-Legendre on cached nodes, both orientations
/// accumulated at the same node set.
inline void far_pair(const PassRequest& rq, const NodeCache& nc, const std::vector<double>& fv,
                     const std::vector<double>& wv, const std::vector<double>& vv, std::size_t i,
                     std::size_t j, std::size_t level, Acc& acc) {
    const double expn = -(2.0 + rq.s * rq.p) / 2.0;
    const PowOp powp(rq.p);
    const std::size_t m = nc.per_cube;
    const std::size_t ia = i * m, jb = j * m;
    const std::size_t nr = rq.radii.size();
    double full = 0.0;
    double tr[8] = {0, 0, 0, 0, 0, 0, 0, 0};
    for (std::size_t a = 0; a < m; ++a) {
        const double xa = nc.px[ia + a], ya = nc.py[ia + a];
        const double fa = fv[ia + a], ga = nc.gw[ia + a];
        const double da = nc.d[ia + a];
        const double wa = wv[ia + a], va = vv[ia + a];
        for (std::size_t b = 0; b < m; ++b) {
            const double dx = xa - nc.px[jb + b], dy = ya - nc.py[jb + b];
            const double r2 = dx * dx + dy * dy;
            const double df = fa - fv[jb + b];
            if (df == 0.0) continue;
            const double kern = powp(df) * std::pow(r2, expn) * ga * nc.gw[jb + b];
            const double db = nc.d[jb + b];
            const double wb = wv[jb + b], vb = vv[jb + b];
            const double oa = kern * wb * va;  // outer x at node a
            const double ob = kern * wa * vb;  // outer x at node b
            full += oa + ob;
            for (std::size_t t = 0; t < nr; ++t) {
                const double rad = rq.radii[t];
                double add = 0.0;
                if (!rq.symmetric) {
                    if (r2 < sqr(rad * da)) add += oa;
                    if (r2 < sqr(rad * db)) add += ob;
                } else {
                    const double sym = kern * (wa * vb + wb * va);
                    if (r2 < sqr(rad * da)) add += sym;
                    if (r2 < sqr(rad * db)) add += sym;
                }
                tr[t] += add;
            }
        }
    }
    if (rq.need_full) acc.add(level, 0, full, nr);
    for (std::size_t t = 0; t < nr; ++t) acc.add(level, 1 + t, tr[t], nr);
}

/// Near pair (identical or touching cubes): substitute z = y - x, integrate
/// over dyadic L-inf rings of z with the inner x-rectangle Q ∩ (S - z)
/// handled by Gauss-Legendre. The skipped center goes into the band bound.
inline void near_pair(const PassRequest& rq, std::size_t i, std::size_t j, std::size_t level, Acc& acc) {
    const WhitneyDecomposition& W = *rq.W;
    const Domain& dom = *rq.domain;
    const double expn = -(2.0 + rq.s * rq.p) / 2.0;
    const PowOp powp(rq.p);
    const std::size_t nr = rq.radii.size();
    const bool self = (i == j);

    const double lq = W.side(i), ls = W.side(j);
    const Point oq = W.corner(W.cube(i)), os = W.corner(W.cube(j));
    const Rect zbox{os.x - (oq.x + lq), os.y - (oq.y + lq), os.x + ls - oq.x, os.y + ls - oq.y};
    const double extent = std::max(std::max(std::abs(zbox.x0), std::abs(zbox.x1)),
                                   std::max(std::abs(zbox.y0), std::abs(zbox.y1)));
    const std::vector<double> cuts_x{os.x - oq.x, (os.x + ls) - (oq.x + lq)};
    const std::vector<double> cuts_y{os.y - oq.y, (os.y + ls) - (oq.y + lq)};

    const GLRule& gz = gl_rule(rq.prof.order_near_z);
    const GLRule& gx = gl_rule(rq.prof.order_near_x);
    const bool need_d = !(rq.w->is_unit() && rq.v->is_unit() && nr == 0);

    double full = 0.0;
    double tr[8] = {0, 0, 0, 0, 0, 0, 0, 0};
    std::vector<Rect> rects;
    for (int m = 0; m < rq.prof.ring_levels; ++m) {
        const double b = std::ldexp(extent, -m), a = std::ldexp(extent, -m - 1);
        rects.clear();
        detail::annulus_rects(a, b, zbox, cuts_x, cuts_y, rects);
        for (const Rect& r : rects) {
            for (int az = 0; az < rq.prof.order_near_z; ++az) {
                const double zx = r.x0 + gz.x[az] * r.width();
                for (int bz = 0; bz < rq.prof.order_near_z; ++bz) {
                    const double zy = r.y0 + gz.x[bz] * r.height();
                    const double xl = std::max(oq.x, os.x - zx), xh = std::min(oq.x + lq, os.x + ls - zx);
                    if (!(xh > xl)) continue;
                    const double yl = std::max(oq.y, os.y - zy), yh = std::min(oq.y + lq, os.y + ls - zy);
                    if (!(yh > yl)) continue;
                    const double r2 = zx * zx + zy * zy;
                    const double kern_base =
                        std::pow(r2, expn) * gz.w[az] * gz.w[bz] * r.area() * (xh - xl) * (yh - yl);
                    for (int ax = 0; ax < rq.prof.order_near_x; ++ax) {
                        const double px = xl + gx.x[ax] * (xh - xl);
                        for (int bx = 0; bx < rq.prof.order_near_x; ++bx) {
                            const Point X{px, yl + gx.x[bx] * (yh - yl)};
                            const Point Y{X.x + zx, X.y + zy};
                            double dX = std::numeric_limits<double>::quiet_NaN();
                            double dY = dX;
                            if (need_d) {
                                dX = dom.dist_to_boundary(X);
                                dY = dom.dist_to_boundary(Y);
                            }
                            const double df = rq.f->eval(X, dX) - rq.f->eval(Y, dY);
                            if (df == 0.0) continue;
                            const double kern = powp(df) * kern_base * gx.w[ax] * gx.w[bx];
                            const double wX = rq.w->eval(X, dX), wY = rq.w->eval(Y, dY);
                            const double vX = rq.v->eval(X, dX), vY = rq.v->eval(Y, dY);
                            const double oA = kern * wY * vX;  // outer x = X
                            const double oB = kern * wX * vY;  // outer x = Y
                            full += self ? oA : (oA + oB);
                            for (std::size_t t = 0; t < nr; ++t) {
                                const double rad = rq.radii[t];
                                double add = 0.0;
                                if (!rq.symmetric) {
                                    if (r2 < sqr(rad * dX)) add += oA;
                                    if (!self && r2 < sqr(rad * dY)) add += oB;
                                } else {
                                    const double sym = kern * (wX * vY + wY * vX);
                                    if (r2 < sqr(rad * dX)) add += sym;
                                    if (!self && r2 < sqr(rad * dY)) add += sym;
                                }
                                tr[t] += add;
                            }
                        }
                    }
                }
            }
        }
    }
    if (rq.need_full) acc.add(level, 0, full, nr);
    for (std::size_t t = 0; t < nr; ++t) acc.add(level, 1 + t, tr[t], nr);
    acc.band += near_band_bound(rq, i, j, std::ldexp(extent, -rq.prof.ring_levels));
}

inline PassResult run_pair_pass(const PassRequest& rq) {
    const WhitneyDecomposition& W = *rq.W;
    const std::size_t n = W.size();
    const std::size_t levels = static_cast<std::size_t>(W.max_depth()) + 1;
    const std::size_t nr = rq.radii.size();
    if (nr > 8) throw ParameterError("pair pass: at most 8 truncation radii");

    NodeCache nc = build_node_cache(W, rq.prof.order_far);
    std::vector<double> fv(nc.px.size()), wv(nc.px.size()), vv(nc.px.size());
    std::vector<char> cube_zero(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = i * nc.per_cube; k < (i + 1) * nc.per_cube; ++k) {
            Point p{nc.px[k], nc.py[k]};
            fv[k] = rq.f->eval(p, nc.d[k]);
            wv[k] = rq.w->eval(p, nc.d[k]);
            vv[k] = rq.v->eval(p, nc.d[k]);
            if (fv[k] != 0.0) cube_zero[i] = 0;
        }
    }
    // a cube on which f vanishes identically (by its conservative sup bound)
    // can still pair with nonzero cubes; only zero-zero pairs drop out
    std::vector<char> cube_zero_sup(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        FieldRegion reg = cube_region(W, i);
        cube_zero_sup[i] = (rq.f->sup_abs(reg) == 0.0) ? 1 : 0;
    }

    std::vector<char> is_near(n, 0);  // scratch per row, rebuilt in each block

    // rows blocked so every thread writes only its own slot
    const std::size_t rows_per_block = std::max<std::size_t>(1, n / (8 * std::max(1, resolve_threads(rq.prof.threads))) + 1);
    const std::size_t n_blocks = (n + rows_per_block - 1) / rows_per_block;
    std::vector<Acc> block_acc(n_blocks);

    parallel_blocks(n_blocks, rq.prof.threads, [&](std::size_t blk) {
        Acc acc(levels, nr);
        std::vector<char> near_mark(n, 0);
        const std::size_t i0 = blk * rows_per_block, i1 = std::min(n, i0 + rows_per_block);
        for (std::size_t i = i0; i < i1; ++i) {
            for (int nb : W.neighbors(i)) near_mark[nb] = 1;
            const bool zi = cube_zero[i] && cube_zero_sup[i];
            for (std::size_t j = i; j < n; ++j) {
                const bool zj = cube_zero[j] && cube_zero_sup[j];
                if (zi && zj) continue;
                const std::size_t level =
                    static_cast<std::size_t>(std::max(W.cube(i).level, W.cube(j).level));
                if (j == i || near_mark[j])
                    near_pair(rq, i, j, level, acc);
                else
                    far_pair(rq, nc, fv, wv, vv, i, j, level, acc);
            }
            for (int nb : W.neighbors(i)) near_mark[nb] = 0;
        }
        block_acc[blk] = std::move(acc);
    });

    PassResult out;
    out.full_by_level.assign(levels, 0.0);
    out.trunc_by_level.assign(nr, std::vector<double>(levels, 0.0));
    for (std::size_t blk = 0; blk < n_blocks; ++blk) {
        const Acc& a = block_acc[blk];
        if (a.slots.empty()) continue;
        for (std::size_t l = 0; l < levels; ++l) {
            out.full_by_level[l] += a.slots[l * (1 + nr)];
            for (std::size_t t = 0; t < nr; ++t)
                out.trunc_by_level[t][l] += a.slots[l * (1 + nr) + 1 + t];
        }
        out.band += a.band;
    }
    return out;
}

inline Estimate estimate_from_levels(const std::vector<double>& by_level, double p, double band) {
    Estimate e;
    std::vector<double> prefix(by_level.size());
    double run = 0.0;
    for (std::size_t l = 0; l < by_level.size(); ++l) {
        run += by_level[l];
        prefix[l] = run;
    }
    e.divergent = divergent_growth(prefix);
    e.refinement_trace.resize(prefix.size());
    for (std::size_t l = 0; l < prefix.size(); ++l)
        e.refinement_trace[l] = std::pow(std::max(prefix[l], 0.0), 1.0 / p);
    e.value = e.refinement_trace.empty() ? 0.0 : e.refinement_trace.back();
    e.error_bound = band;
    return e;
}

}  // namespace detail

/// Full weighted Gagliardo seminorm
///   ( ∫∫ |f(x)-f(y)|^p / |x-y|^{d+sp} · w(y) v(x) dy dx )^{1/p}
/// over the region covered by the decomposition. The refinement_trace entry
/// at depth k uses only cubes of level <= k; error_bound carries the analytic
/// diagonal-band estimate (integral scale), never added to the value.
inline Estimate full_seminorm(const ScalarField& f, const Domain& domain, const SpaceParams& params,
                              const WeightField& w, const WeightField& v,
                              const WhitneyDecomposition& W, int quad_order = 3,
                              const QuadratureProfile* prof_in = nullptr) {
    params.validate();
    detail::PassRequest rq;
    QuadratureProfile prof = prof_in ? *prof_in : QuadratureProfile{};
    prof.order_far = quad_order;
    rq.f = &f;
    rq.domain = &domain;
    rq.s = params.s;
    rq.p = params.p;
    rq.w = &w;
    rq.v = &v;
    rq.W = &W;
    rq.prof = prof;
    detail::PassResult res = detail::run_pair_pass(rq);
    return detail::estimate_from_levels(res.full_by_level, params.p, res.band);
}

/// Truncated seminorm: the same integral restricted to |x-y| < theta·d(x);
/// symmetric=true uses the kernel (w(x)v(y)+w(y)v(x)) instead.
inline Estimate truncated_seminorm(const ScalarField& f, const Domain& domain,
                                   const SpaceParams& params, const WeightField& w,
                                   const WeightField& v, const WhitneyDecomposition& W,
                                   int quad_order = 3, bool symmetric = false,
                                   const QuadratureProfile* prof_in = nullptr) {
    params.validate();
    detail::PassRequest rq;
    QuadratureProfile prof = prof_in ? *prof_in : QuadratureProfile{};
    prof.order_far = quad_order;
    rq.f = &f;
    rq.domain = &domain;
    rq.s = params.s;
    rq.p = params.p;
    rq.w = &w;
    rq.v = &v;
    rq.W = &W;
    rq.radii = {params.theta};
    rq.symmetric = symmetric;
    rq.need_full = false;
    rq.prof = prof;
    detail::PassResult res = detail::run_pair_pass(rq);
    return detail::estimate_from_levels(res.trunc_by_level[0], params.p, res.band);
}

/// Full and truncated seminorms (several truncation radii) from one pass over
/// the cube pairs; used by the comparability and Hardy experiments.
struct SeminormPair {
    Estimate full;
    std::vector<Estimate> truncated;
    double band = 0.0;
};

inline SeminormPair seminorm_with_truncations(const ScalarField& f, const Domain& domain,
                                              const SpaceParams& params, const WeightField& w,
                                              const WeightField& v, const WhitneyDecomposition& W,
                                              const std::vector<double>& radii, int quad_order = 3,
                                              const QuadratureProfile* prof_in = nullptr) {
    params.validate();
    detail::PassRequest rq;
    QuadratureProfile prof = prof_in ? *prof_in : QuadratureProfile{};
    prof.order_far = quad_order;
    rq.f = &f;
    rq.domain = &domain;
    rq.s = params.s;
    rq.p = params.p;
    rq.w = &w;
    rq.v = &v;
    rq.W = &W;
    rq.radii = radii;
    rq.prof = prof;
    detail::PassResult res = detail::run_pair_pass(rq);
    SeminormPair out;
    out.full = detail::estimate_from_levels(res.full_by_level, params.p, res.band);
    for (std::size_t t = 0; t < radii.size(); ++t)
        out.truncated.push_back(detail::estimate_from_levels(res.trunc_by_level[t], params.p, res.band));
    out.band = res.band;
    return out;
}

/// ∫ |f|^p d_Omega^-gamma over Omega (optionally restricted to the inner
/// layer d <= layer_max), to the power 1/p. Cube sums by level feed the
/// trace; the uncovered boundary layer is completed by clipped adaptive
/// quadrature over the decomposition's residual cells, so convergent values
/// are accurate even at modest depths. Divergence is flagged by the shared
/// growth rule (and makes the value unreliable, as recorded).
inline Estimate lp_norm(const ScalarField& f, const Domain& domain, double p, double gamma,
                        const WhitneyDecomposition& W, int quad_order = 3,
                        double layer_max = std::numeric_limits<double>::infinity(),
                        const QuadratureProfile* prof_in = nullptr) {
    if (!(p >= 1.0)) throw ParameterError("lp_norm: p must be >= 1");
    QuadratureProfile prof = prof_in ? *prof_in : QuadratureProfile{};
    detail::NodeCache nc = detail::build_node_cache(W, quad_order);
    detail::PowOp powp(p);
    std::size_t levels = static_cast<std::size_t>(W.max_depth()) + 1;
    std::vector<double> by_level(levels, 0.0);
    for (std::size_t i = 0; i < W.size(); ++i) {
        double sum = 0.0;
        for (std::size_t k = i * nc.per_cube; k < (i + 1) * nc.per_cube; ++k) {
            double d = nc.d[k];
            if (!(d <= layer_max)) continue;
            double val = powp(f.eval(Point{nc.px[k], nc.py[k]}, d));
            if (gamma != 0.0) val *= std::pow(d, -gamma);
            sum += val * nc.gw[k];
        }
        by_level[static_cast<std::size_t>(W.cube(i).level)] += sum;
    }
    std::vector<double> prefix(levels);
    double run = 0.0;
    for (std::size_t l = 0; l < levels; ++l) {
        run += by_level[l];
        prefix[l] = run;
    }
    // boundary-layer completion over the residual frontier cells
    double completion = 0.0;
    for (const DyadicCube& c : W.residual_cells()) {
        double s = std::ldexp(W.base(), -c.level);
        Rect cell{W.origin_x() + c.ix * s, W.origin_y() + c.iy * s, 0, 0};
        cell.x1 = cell.x0 + s;
        cell.y1 = cell.y0 + s;
        completion += integrate_clipped(
            domain, cell,
            [&](Point q, double d) {
                if (!(d <= layer_max)) return 0.0;
                double val = powp(f.eval(q, d));
                if (gamma != 0.0) val *= std::pow(d, -gamma);
                return val;
            },
            quad_order, prof.completion_subdiv);
    }
    Estimate e;
    e.divergent = divergent_growth(prefix);
    e.refinement_trace.resize(levels);
    for (std::size_t l = 0; l < levels; ++l)
        e.refinement_trace[l] = std::pow(std::max(prefix[l], 0.0), 1.0 / p);
    e.value = std::pow(std::max(prefix.back() + completion, 0.0), 1.0 / p);
    return e;
}

/// Stratified Monte Carlo verification path for the (optionally truncated)
/// weighted seminorm over the same covered region: per cube pair, samples
/// allocated by an importance bound, diagonal band |x-y| < 1e-4 diam excluded
/// and bounded analytically into error_bound. Independent of the
/// deterministic Gauss-Legendre/ring quadrature path.
inline Estimate mc_seminorm_oracle(const ScalarField& f, const Domain& domain,
                                   const SpaceParams& params, const WeightField& w,
                                   const WeightField& v, const WhitneyDecomposition& W,
                                   std::size_t total_pairs, std::uint64_t seed,
                                   double truncation_radius = 0.0, int threads = 0) {
    params.validate();
    const std::size_t n = W.size();
    const double s = params.s, p = params.p;
    const double expn = -(2.0 + s * p) / 2.0;
    const double excl = 1e-4 * domain.diam();
    detail::PowOp powp(p);

    struct PairInfo {
        std::uint32_t i, j;
        std::uint32_t samples;
    };
    std::vector<PairInfo> pairs;
    pairs.reserve(n * (n + 1) / 2);
    std::vector<double> imp;
    imp.reserve(n * (n + 1) / 2);
    double imp_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        FieldRegion ri = detail::cube_region(W, i);
        for (std::size_t j = i; j < n; ++j) {
            FieldRegion reg = detail::pair_region(W, i, j);
            if (f.sup_abs(reg) == 0.0) continue;
            double D = long_distance(W, i, j);
            double weight_bound = w.sup(reg) * v.sup(reg);
            double e = sqr(W.side(i)) * sqr(W.side(j)) * std::pow(D, 2.0 * expn) * weight_bound;
            pairs.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), 0});
            imp.push_back(e);
            imp_sum += e;
        }
        (void)ri;
    }
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        double want = imp_sum > 0 ? double(total_pairs) * imp[k] / imp_sum : 2.0;
        pairs[k].samples = static_cast<std::uint32_t>(std::clamp(want, 2.0, 65536.0));
    }

    const std::size_t block = 4096;
    const std::size_t n_blocks = (pairs.size() + block - 1) / block;
    std::vector<double> blk_sum(n_blocks, 0.0), blk_var(n_blocks, 0.0), blk_band(n_blocks, 0.0);
    parallel_blocks(n_blocks, threads, [&](std::size_t bidx) {
        double total = 0.0, var = 0.0, band = 0.0;
        for (std::size_t k = bidx * block; k < std::min(pairs.size(), (bidx + 1) * block); ++k) {
            const PairInfo& pi = pairs[k];
            const std::size_t i = pi.i, j = pi.j;
            const bool self = (i == j);
            double li = W.side(i), lj = W.side(j);
            Point oi = W.corner(W.cube(i)), oj = W.corner(W.cube(j));
            double vol = sqr(li) * sqr(lj);
            Rng rng = Rng::derive(seed, 0xF00D + k);
            double acc = 0.0, acc2 = 0.0;
            const std::uint32_t ns = pi.samples;
            for (std::uint32_t t = 0; t < ns; ++t) {
                Point X{oi.x + li * rng.uniform(), oi.y + li * rng.uniform()};
                Point Y{oj.x + lj * rng.uniform(), oj.y + lj * rng.uniform()};
                double dx = X.x - Y.x, dy = X.y - Y.y;
                double r2 = dx * dx + dy * dy;
                double F = 0.0;
                if (r2 >= excl * excl) {
                    double dX = domain.dist_to_boundary(X);
                    double dY = domain.dist_to_boundary(Y);
                    double df = f.eval(X, dX) - f.eval(Y, dY);
                    if (df != 0.0) {
                        double kern = powp(df) * std::pow(r2, expn);
                        double oA = kern * w.eval(Y, dY) * v.eval(X, dX);
                        double oB = kern * w.eval(X, dX) * v.eval(Y, dY);
                        if (truncation_radius > 0.0) {
                            F = (r2 < sqr(truncation_radius * dX) ? oA : 0.0) +
                                (r2 < sqr(truncation_radius * dY) ? oB : 0.0);
                            if (self) F *= 0.5;  // ordered pairs already covered twice
                        } else {
                            F = self ? oA : oA + oB;
                        }
                    }
                }
                acc += F;
                acc2 += F * F;
            }
            double mean = acc / ns;
            double m2 = acc2 / ns - mean * mean;
            total += vol * mean * (self && truncation_radius > 0.0 ? 2.0 : 1.0);
            var += sqr(vol) * std::max(0.0, m2) / ns;
            if (long_distance(W, i, j) - li - lj < excl) {
                FieldRegion reg = detail::pair_region(W, i, j);
                double L = f.lipschitz(reg);
                double pw = p * (1.0 - s);
                band += std::pow(L, p) * 2.0 * 3.14159265358979323846 * std::pow(std::sqrt(2.0) * excl, pw) /
                        pw * std::min(sqr(li), sqr(lj)) * w.sup(reg) * v.sup(reg) * (self ? 1.0 : 2.0);
            }
        }
        blk_sum[bidx] = total;
        blk_var[bidx] = var;
        blk_band[bidx] = band;
    });
    double total = 0.0, var = 0.0, band = 0.0;
    for (std::size_t b = 0; b < n_blocks; ++b) {
        total += blk_sum[b];
        var += blk_var[b];
        band += blk_band[b];
    }
    Estimate e;
    e.value = std::pow(std::max(total, 0.0), 1.0 / p);
    // delta method for the std error of the p-th root
    double se_int = std::sqrt(var);
    e.std_error = total > 0 ? e.value * se_int / (p * total) : se_int;
    e.error_bound = band;
    e.refinement_trace = {e.value};
    return e;
}

/// full/truncated(theta) ratio with weights d^-alpha (outer), d^-beta (inner).
/// NaN when both vanish, +inf when only the truncated part vanishes.
inline double comparability_ratio(const ScalarField& f, const Domain& domain,
                                  const SpaceParams& params, const WhitneyDecomposition& W,
                                  int quad_order = 3, const QuadratureProfile* prof = nullptr) {
    WeightField w = WeightField::distance_power(params.beta);
    WeightField v = WeightField::distance_power(params.alpha);
    SeminormPair pr =
        seminorm_with_truncations(f, domain, params, w, v, W, {params.theta}, quad_order, prof);
    double full = pr.full.value, trunc = pr.truncated[0].value;
    double scale = std::max(full, trunc);
    if (scale <= 1e-14) return std::numeric_limits<double>::quiet_NaN();  // both zero
    if (trunc <= 0.0) return std::numeric_limits<double>::infinity();
    return full / trunc;
}

/// Left side over right side of the weighted fractional Hardy inequality:
///   ∫ |u|^p d^-(sp+a+b)  /  ( truncated-over-B(x, R d(x)) seminorm^p + xi ||u||_p^p ).
/// Throws NumericError when the left side is flagged divergent.
inline double hardy_ratio(const ScalarField& u, const Domain& domain, const SpaceParams& params,
                          double R, int xi, const WhitneyDecomposition& W, int quad_order = 3,
                          const QuadratureProfile* prof = nullptr) {
    if (xi != 0 && xi != 1) throw ParameterError("hardy_ratio: xi must be 0 or 1");
    if (!(R > 0.0)) throw ParameterError("hardy_ratio: R must be > 0");
    double gamma = params.s * params.p + params.alpha + params.beta;
    Estimate lhs = lp_norm(u, domain, params.p, gamma, W, quad_order, std::numeric_limits<double>::infinity(), prof);
    if (lhs.divergent) throw NumericError("hardy_ratio: hypothesis violated: left-hand side infinite");
    WeightField w = WeightField::distance_power(params.beta);
    WeightField v = WeightField::distance_power(params.alpha);
    detail::PassRequest rq;
    QuadratureProfile pf = prof ? *prof : QuadratureProfile{};
    pf.order_far = quad_order;
    rq.f = &u;
    rq.domain = &domain;
    rq.s = params.s;
    rq.p = params.p;
    rq.w = &w;
    rq.v = &v;
    rq.W = &W;
    rq.radii = {R};
    rq.need_full = false;
    rq.prof = pf;
    detail::PassResult res = detail::run_pair_pass(rq);
    double trunc_pow = 0.0;
    for (double x : res.trunc_by_level[0]) trunc_pow += x;
    double rhs = trunc_pow;
    if (xi == 1) {
        Estimate ln = lp_norm(u, domain, params.p, 0.0, W, quad_order, std::numeric_limits<double>::infinity(), prof);
        rhs += std::pow(ln.value, params.p);
    }
    double lhs_pow = std::pow(lhs.value, params.p);
    if (lhs_pow <= 1e-300 && rhs <= 1e-300) return std::numeric_limits<double>::quiet_NaN();
    return lhs_pow / rhs;
}

}  // namespace fsl
