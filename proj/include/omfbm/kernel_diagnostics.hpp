#pragma once

#include "omfbm/cameron_martin.hpp"
#include "omfbm/fractional.hpp"

#include <string>
#include <vector>

namespace omfbm {

// k(t,u) = B_H t^(H-1/2) int_u^t s^(1/2-H) (t-s)^(-H-1/2) K(s,u) g(s) ds for u < t, else 0.
// g is interpolated linearly between nodes.
double du_kernel(double t, double u, const HurstConfig& cfg, const SampledFn& g);

// (k(t,u) + k(u,t))/2 on the nodes. The diagonal holds the limit g/2; column 0 holds the
// value whose first-cell trapezoid reproduces the u^(H-1/2) moment.
KernelMatrix symmetrized_du_kernel(const SampledFn& g, const HurstConfig& cfg);

double hs_norm(const SampledFn& g, const HurstConfig& cfg);

// Mean over v of the box average of k over [v-r,v+r]^2, boxes clipped to the unit square.
// r is rounded to the nearest multiple of dt and must be at least 2 dt.
double trace_box_average(const KernelMatrix& khat, double r);

struct TraceReport {
    double trace_numeric = 0.0;  // extrapolated
    double trace_identity = 0.0;
    std::vector<double> r_schedule;
    std::vector<double> per_r;
    double extrapolated = 0.0;
    double abs_error = 0.0;
};

/// Lipschitz scalar functions applied to the first coordinate of h.
struct ScalarFn {
    std::string name;  // constant [c] | cos | tanh | affine_clamped [a, b, lo, hi]
    std::vector<double> params;
    double operator()(double x) const;
    double derivative(double x) const;
};
ScalarFn make_scalar_fn(const std::string& name, const std::vector<double>& params);

// Runs the box averages over r_schedule (empty: 8dt, 4dt, 2dt) and extrapolates linearly in r
// from the two smallest radii.
TraceReport trace_identity_check(const ScalarFn& G, const CmElement& h, const HurstConfig& cfg,
                                 std::vector<double> r_schedule = {});

}  // namespace omfbm
