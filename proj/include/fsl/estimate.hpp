#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "fsl/common.hpp"

namespace fsl {

/// Universal result of the integral operations: a value, the per-depth
/// refinement trace, a divergence flag, a Monte Carlo standard error
/// (sampling paths only) and an analytic bound on the mass excluded near
/// the singular diagonal / boundary (error indicator, never folded into
/// the value).
struct Estimate {
    double value = 0.0;
    std::vector<double> refinement_trace;
    bool divergent = false;
    double std_error = 0.0;
    double error_bound = 0.0;
};

/// Parameters (s, p, alpha, beta, theta) of the weighted seminorm and its
/// truncation. theta defaults to 1/2.
struct SpaceParams {
    double s = 0.5;
    double p = 2.0;
    double alpha = 0.0;
    double beta = 0.0;
    double theta = 0.5;

    SpaceParams() = default;
    SpaceParams(double s_, double p_, double alpha_, double beta_, double theta_ = 0.5)
        : s(s_), p(p_), alpha(alpha_), beta(beta_), theta(theta_) {
        validate();
    }

    void validate() const {
        if (!(s > 0.0 && s < 1.0)) throw ParameterError("SpaceParams: s must be in (0,1)");
        if (!(p >= 1.0) || !std::isfinite(p)) throw ParameterError("SpaceParams: p must be in [1,inf)");
        if (!(alpha >= 0.0)) throw ParameterError("SpaceParams: alpha must be >= 0");
        if (!(beta >= 0.0)) throw ParameterError("SpaceParams: beta must be >= 0");
        if (!(theta > 0.0 && theta <= 1.0)) throw ParameterError("SpaceParams: theta must be in (0,1]");
    }
};

/// Divergence rule shared by the zeta function, L^p norms and seminorms:
/// flagged when the last three depth increments each grow the partial value
/// by a factor >= growth_threshold. Applied to the positive tail of the
/// partial sums; needs at least four positive entries.
inline bool divergent_growth(const std::vector<double>& partials, double growth_threshold = 1.2) {
    std::vector<double> pos;
    pos.reserve(partials.size());
    for (double v : partials)
        if (v > 0.0) pos.push_back(v);
    if (pos.size() < 4) return false;
    std::size_t n = pos.size();
    for (std::size_t i = n - 3; i < n; ++i) {
        if (!(pos[i] >= growth_threshold * pos[i - 1])) return false;
    }
    return true;
}

}  // namespace fsl
