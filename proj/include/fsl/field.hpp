#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <utility>

#include "fsl/geometry.hpp"

namespace fsl {

/// Spatial context for conservative field bounds: distance-to-boundary range
/// and bounding box of the region of interest.
struct FieldRegion {
    double dmin = 0.0;
    double dmax = std::numeric_limits<double>::infinity();
    BBox box;
};

namespace detail {

class FieldNode {
public:
    virtual ~FieldNode() = default;
    /// d is d_Omega(p) when the caller already knows it, else NaN.
    virtual double eval(Point p, double d) const = 0;
    virtual double sup_abs(const FieldRegion& r) const = 0;
    virtual double lipschitz(const FieldRegion& r) const = 0;
    virtual std::string describe() const = 0;
};

using NodePtr = std::shared_ptr<const FieldNode>;

inline double bump_profile(double t2) {
    // exp(1 - 1/(1-t^2)) for t^2 < 1, peak value 1 at the center
    if (t2 >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - t2));
}

inline double bump_profile_max_slope() {
    // max_t |d/dt exp(1 - 1/(1-t^2))| computed once by scanning
    static const double m = [] {
        double best = 0.0;
        int n = 20000;
        double prev = bump_profile(0.0);
        for (int i = 1; i <= n; ++i) {
            double t = double(i) / n;
            double cur = bump_profile(t * t);
            best = std::max(best, std::abs(cur - prev) * n);
            prev = cur;
        }
        return best * 1.05;
    }();
    return m;
}

}  // namespace detail

/// Evaluable real-valued test function on Omega, from the catalog grammar
/// (constants, coordinates, bumps, distance powers, the indicator, cutoff
/// v_n, sums/products/scalar multiples). Carries conservative sup/Lipschitz
/// bounds used by the quadrature's analytic diagonal-band estimates.
class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(detail::NodePtr n) : node_(std::move(n)) {}

    bool valid() const { return node_ != nullptr; }
    double operator()(Point p) const { return node_->eval(p, std::numeric_limits<double>::quiet_NaN()); }
    double eval(Point p, double d) const { return node_->eval(p, d); }
    double sup_abs(const FieldRegion& r) const { return node_->sup_abs(r); }
    double lipschitz(const FieldRegion& r) const { return node_->lipschitz(r); }
    std::string describe() const { return node_->describe(); }
    const detail::NodePtr& node() const { return node_; }

private:
    detail::NodePtr node_;
};

namespace fields {

namespace fd = ::fsl::detail;

class ConstantNode final : public fd::FieldNode {
public:
    explicit ConstantNode(double c) : c_(c) {}
    double eval(Point, double) const override { return c_; }
    double sup_abs(const FieldRegion&) const override { return std::abs(c_); }
    double lipschitz(const FieldRegion&) const override { return 0.0; }
    std::string describe() const override { return std::to_string(c_); }

private:
    double c_;
};

class CoordinateNode final : public fd::FieldNode {
public:
    explicit CoordinateNode(int axis) : axis_(axis) {
        if (axis != 0 && axis != 1) throw ParameterError("coordinate: axis must be 0 or 1");
    }
    double eval(Point p, double) const override { return axis_ == 0 ? p.x : p.y; }
    double sup_abs(const FieldRegion& r) const override {
        return axis_ == 0 ? std::max(std::abs(r.box.xmin), std::abs(r.box.xmax))
                          : std::max(std::abs(r.box.ymin), std::abs(r.box.ymax));
    }
    double lipschitz(const FieldRegion&) const override { return 1.0; }
    std::string describe() const override { return axis_ == 0 ? "x" : "y"; }

private:
    int axis_;
};

class BumpNode final : public fd::FieldNode {
public:
    BumpNode(Point c, double r) : c_(c), r_(r) {
        if (!(r > 0.0)) throw ParameterError("bump: radius must be > 0");
    }
    double eval(Point p, double) const override { return fd::bump_profile(dist2(p, c_) / (r_ * r_)); }
    double sup_abs(const FieldRegion&) const override { return 1.0; }
    double lipschitz(const FieldRegion&) const override { return fd::bump_profile_max_slope() / r_; }
    std::string describe() const override {
        return "bump(" + std::to_string(c_.x) + "," + std::to_string(c_.y) + "," + std::to_string(r_) + ")";
    }

private:
    Point c_;
    double r_;
};

class DistPowerNode final : public fd::FieldNode {
public:
    DistPowerNode(const Domain& dom, double gamma) : dom_(&dom), gamma_(gamma) {}
    double eval(Point p, double d) const override {
        if (std::isnan(d)) d = dom_->dist_to_boundary(p);
        if (gamma_ == 0.0) return 1.0;
        if (gamma_ == 1.0) return d;
        return std::pow(d, gamma_);
    }
    double sup_abs(const FieldRegion& r) const override {
        double lo = std::max(r.dmin, 1e-300), hi = std::max(r.dmax, lo);
        return std::max(std::pow(lo, gamma_), std::pow(hi, gamma_));
    }
    double lipschitz(const FieldRegion& r) const override {
        if (gamma_ == 0.0) return 0.0;
        double lo = std::max(r.dmin, 1e-300), hi = std::max(r.dmax, lo);
        // |grad d^g| = |g| d^{g-1}; d is 1-Lipschitz
        return std::abs(gamma_) * std::max(std::pow(lo, gamma_ - 1.0), std::pow(hi, gamma_ - 1.0));
    }
    std::string describe() const override { return "dist^" + std::to_string(gamma_); }

private:
    const Domain* dom_;
    double gamma_;
};

class IndicatorNode final : public fd::FieldNode {
public:
    // indicator of Omega, seen from inside: identically 1 at interior points
    double eval(Point, double) const override { return 1.0; }
    double sup_abs(const FieldRegion&) const override { return 1.0; }
    double lipschitz(const FieldRegion&) const override { return 0.0; }
    std::string describe() const override { return "indicator"; }
};

class CutoffVnNode final : public fd::FieldNode {
public:
    CutoffVnNode(const Domain& dom, int n) : dom_(&dom), n_(n) {
        if (n < 1) throw ParameterError("vn: n must be a positive integer");
    }
    double eval(Point p, double d) const override {
        if (std::isnan(d)) d = dom_->dist_to_boundary(p);
        return std::max(std::min(2.0 - n_ * d, 1.0), 0.0);
    }
    double sup_abs(const FieldRegion&) const override { return 1.0; }
    double lipschitz(const FieldRegion&) const override { return double(n_); }
    std::string describe() const override { return "vn(" + std::to_string(n_) + ")"; }

private:
    const Domain* dom_;
    int n_;
};

enum class BinOp { add, sub, mul, min, max };

class BinaryNode final : public fd::FieldNode {
public:
    BinaryNode(BinOp op, fd::NodePtr a, fd::NodePtr b) : op_(op), a_(std::move(a)), b_(std::move(b)) {}
    double eval(Point p, double d) const override {
        double x = a_->eval(p, d), y = b_->eval(p, d);
        switch (op_) {
            case BinOp::add: return x + y;
            case BinOp::sub: return x - y;
            case BinOp::mul: return x * y;
            case BinOp::min: return std::min(x, y);
            case BinOp::max: return std::max(x, y);
        }
        return 0.0;
    }
    double sup_abs(const FieldRegion& r) const override {
        double sa = a_->sup_abs(r), sb = b_->sup_abs(r);
        switch (op_) {
            case BinOp::add:
            case BinOp::sub: return sa + sb;
            case BinOp::mul: return sa * sb;
            case BinOp::min:
            case BinOp::max: return std::max(sa, sb);
        }
        return 0.0;
    }
    double lipschitz(const FieldRegion& r) const override {
        double la = a_->lipschitz(r), lb = b_->lipschitz(r);
        switch (op_) {
            case BinOp::add:
            case BinOp::sub: return la + lb;
            case BinOp::mul: return la * b_->sup_abs(r) + a_->sup_abs(r) * lb;
            case BinOp::min:
            case BinOp::max: return std::max(la, lb);
        }
        return 0.0;
    }
    std::string describe() const override {
        const char* s = op_ == BinOp::add ? "+" : op_ == BinOp::sub ? "-" : op_ == BinOp::mul ? "*" : op_ == BinOp::min ? " min " : " max ";
        return "(" + a_->describe() + s + b_->describe() + ")";
    }

private:
    BinOp op_;
    fd::NodePtr a_, b_;
};

class PowerNode final : public fd::FieldNode {
public:
    PowerNode(fd::NodePtr a, double expo) : a_(std::move(a)), expo_(expo) {}
    double eval(Point p, double d) const override {
        double x = a_->eval(p, d);
        return std::pow(x, expo_);
    }
    double sup_abs(const FieldRegion& r) const override { return std::pow(a_->sup_abs(r), expo_); }
    double lipschitz(const FieldRegion& r) const override {
        double s = a_->sup_abs(r);
        if (s == 0.0) return 0.0;
        return std::abs(expo_) * std::pow(s, expo_ - 1.0) * a_->lipschitz(r);
    }
    std::string describe() const override { return a_->describe() + "^" + std::to_string(expo_); }

private:
    fd::NodePtr a_;
    double expo_;
};

/// Escape hatch for wrapping arbitrary evaluators (e.g. smoothed fields);
/// the caller supplies its own conservative bounds.
class LambdaNode final : public fd::FieldNode {
public:
    LambdaNode(std::function<double(Point, double)> f, double sup, double lip, std::string name)
        : f_(std::move(f)), sup_(sup), lip_(lip), name_(std::move(name)) {}
    double eval(Point p, double d) const override { return f_(p, d); }
    double sup_abs(const FieldRegion&) const override { return sup_; }
    double lipschitz(const FieldRegion&) const override { return lip_; }
    std::string describe() const override { return name_; }

private:
    std::function<double(Point, double)> f_;
    double sup_, lip_;
    std::string name_;
};

inline ScalarField constant(double c) { return ScalarField(std::make_shared<ConstantNode>(c)); }
inline ScalarField coordinate(int axis) { return ScalarField(std::make_shared<CoordinateNode>(axis)); }
inline ScalarField bump(Point c, double r) { return ScalarField(std::make_shared<BumpNode>(c, r)); }
inline ScalarField dist_power(const Domain& d, double gamma) {
    return ScalarField(std::make_shared<DistPowerNode>(d, gamma));
}
inline ScalarField indicator_omega() { return ScalarField(std::make_shared<IndicatorNode>()); }
inline ScalarField cutoff_vn(const Domain& d, int n) {
    return ScalarField(std::make_shared<CutoffVnNode>(d, n));
}
inline ScalarField lambda(std::function<double(Point, double)> f, double sup, double lip,
                          std::string name) {
    return ScalarField(std::make_shared<LambdaNode>(std::move(f), sup, lip, std::move(name)));
}

}  // namespace fields

inline ScalarField operator+(const ScalarField& a, const ScalarField& b) {
    return ScalarField(std::make_shared<fields::BinaryNode>(fields::BinOp::add, a.node(), b.node()));
}
inline ScalarField operator-(const ScalarField& a, const ScalarField& b) {
    return ScalarField(std::make_shared<fields::BinaryNode>(fields::BinOp::sub, a.node(), b.node()));
}
inline ScalarField operator*(const ScalarField& a, const ScalarField& b) {
    return ScalarField(std::make_shared<fields::BinaryNode>(fields::BinOp::mul, a.node(), b.node()));
}
inline ScalarField operator*(double c, const ScalarField& a) { return fields::constant(c) * a; }
inline ScalarField field_min(const ScalarField& a, const ScalarField& b) {
    return ScalarField(std::make_shared<fields::BinaryNode>(fields::BinOp::min, a.node(), b.node()));
}
inline ScalarField field_max(const ScalarField& a, const ScalarField& b) {
    return ScalarField(std::make_shared<fields::BinaryNode>(fields::BinOp::max, a.node(), b.node()));
}
inline ScalarField field_pow(const ScalarField& a, double expo) {
    return ScalarField(std::make_shared<fields::PowerNode>(a.node(), expo));
}

/// Weight factor of the seminorm integrand: either a distance power
/// d_Omega^-exponent or a general nonnegative field (Muckenhoupt-style).
class WeightField {
public:
    static WeightField distance_power(double exponent) {
        WeightField w;
        w.expo_ = exponent;
        return w;
    }
    static WeightField unit() { return distance_power(0.0); }
    static WeightField general(ScalarField f) {
        WeightField w;
        w.field_ = std::move(f);
        return w;
    }

    bool is_unit() const { return !field_.valid() && expo_ == 0.0; }
    bool is_distance_power() const { return !field_.valid(); }
    double exponent() const { return expo_; }

    double eval(Point p, double d) const {
        if (field_.valid()) return field_.eval(p, d);
        if (expo_ == 0.0) return 1.0;
        return std::pow(d, -expo_);
    }

    /// Upper bound over a region with distance range [dmin, dmax].
    double sup(const FieldRegion& r) const {
        if (field_.valid()) return field_.sup_abs(r);
        if (expo_ == 0.0) return 1.0;
        double lo = std::max(r.dmin, 1e-300);
        return expo_ > 0 ? std::pow(lo, -expo_) : std::pow(std::max(r.dmax, lo), -expo_);
    }

    std::string describe() const {
        if (field_.valid()) return field_.describe();
        return "dist^-" + std::to_string(expo_);
    }

private:
    double expo_ = 0.0;
    ScalarField field_;
};

}  // namespace fsl
