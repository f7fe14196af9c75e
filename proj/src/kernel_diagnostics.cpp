#include "omfbm/kernel_diagnostics.hpp"

#include "omfbm/parallel.hpp"
#include "omfbm/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace omfbm {

namespace {

double interp(const SampledFn& g, double s) {
    const int n = g.grid.n();
    double x = s * n;
    int j = std::clamp(static_cast<int>(x), 0, n - 1);
    double w = x - j;
    return (1.0 - w) * g.values[j] + w * g.values[j + 1];
}

}  // namespace

/*
 * With s = u + (t-u)x the factors (s-u)^(H-1/2) (t-s)^(-H-1/2) become the Jacobi weight
 * x^(H-1/2) (1-x)^(-H-1/2) and all powers of (t-u) cancel:
 *   k = c_H B_H t^(H-1/2) u^(H-1/2) int_0^1 w(x) s^(1-2H) phi(u/s) g(s) dx,
 * phi(r) = F(H-1/2, 2H; H+1/2; 1-r). The regular part is analytic except near s = 0,
 * i.e. x = -u/(t-u). As t -> u the integral tends to Beta(1/2+H, 1/2-H) u^(1-2H) g(u),
 * so k(u+, u) = g(u).
 */
double du_kernel(double t, double u, const HurstConfig& cfg, const SampledFn& g) {
    if (!(u > 0.0)) throw std::invalid_argument("du_kernel: u must be > 0");
    if (t <= u) return 0.0;
    const double H = cfg.H;
    const double d = t - u;
    auto psi = [&](double x) {
        const double s = u + d * x;
        // K(s,u) = c_H s^(1/2-H) u^(H-1/2) (s-u)^(H-1/2) phi(u/s); phi = K / (...) at unit scale
        const double phi = kernel_K(1.0, u / s, cfg) /
                           (cfg.c_H * std::pow(u / s, H - 0.5) * std::pow(1.0 - u / s, H - 0.5));
        return std::pow(s, 1.0 - 2.0 * H) * phi * interp(g, s);
    };
    const double I = integrate_graded(psi, H - 0.5, -H - 0.5, u / d, 16);
    return cfg.c_H * cfg.B_H * std::pow(t, H - 0.5) * std::pow(u, H - 0.5) * I;
}

KernelMatrix symmetrized_du_kernel(const SampledFn& g, const HurstConfig& cfg) {
    const Grid& G = g.grid;
    const int n = G.n();
    const double H = cfg.H;
    Eigen::MatrixXd E = Eigen::MatrixXd::Zero(n + 1, n + 1);
    parallel_chunks(n, 4, [&](std::int64_t b, std::int64_t e) {
        for (std::int64_t r = b; r < e; ++r) {
            const int i = static_cast<int>(r) + 1;
            for (int j = 1; j < i; ++j) E(i, j) = 0.5 * du_kernel(G.node(i), G.node(j), cfg, g);
        }
    });
    for (int i = 0; i <= n; ++i) E(i, i) = 0.5 * g.values[i];
    // k(t,u) ~ kappa u^(H-1/2) on the first cell
    const double eff = 2.0 / (H + 0.5) - 1.0;
    for (int i = 2; i <= n; ++i) E(i, 0) = eff * E(i, 1);
    E(1, 0) = eff * E(1, 1);
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j < i; ++j) E(j, i) = E(i, j);
    return {G, std::move(E)};
}

double hs_norm(const SampledFn& g, const HurstConfig& cfg) {
    if (g.values.cwiseAbs().maxCoeff() == 0.0) return 0.0;
    const Grid& G = g.grid;
    const int n = G.n();
    const double dt = G.dt(), H = cfg.H;
    Eigen::VectorXd row(n + 1);
    parallel_chunks(n, 4, [&](std::int64_t b, std::int64_t e) {
        for (std::int64_t r = b; r < e; ++r) {
            const int i = static_cast<int>(r) + 1;
            // k(t_i, u) on u = t_1..t_i, the last entry being the diagonal limit g_i
            std::vector<double> k(i + 1);
            for (int j = 1; j < i; ++j) k[j] = du_kernel(G.node(i), G.node(j), cfg, g);
            k[i] = g.values[i];
            // first cell: k ~ kappa u^(H-1/2), int_0^dt k^2 = k_1^2 dt / (2H)
            double s = k[1] * k[1] * dt / (2.0 * H);
            for (int j = 1; j < i; ++j) s += 0.5 * dt * (k[j] * k[j] + k[j + 1] * k[j + 1]);
            row[i] = s;
        }
    });
    row[0] = 0.0;
    double total = (row.sum() - 0.5 * row[n]) * dt;
    return std::sqrt(std::max(0.0, total));
}

double trace_box_average(const KernelMatrix& khat, double r) {
    const Grid& G = khat.grid;
    const int n = G.n();
    const double dt = G.dt();
    const auto& K = khat.entries;
    if (K.rows() != n + 1 || K.cols() != n + 1) throw std::invalid_argument("trace_box_average: kernel shape mismatch");
    const int m = static_cast<int>(std::lround(r / dt));
    if (!(r >= 2.0 * dt * (1.0 - 1e-12)) || m < 2) throw std::invalid_argument("trace_box_average: need r >= 2 dt");
    const double scale = std::max(1.0, K.cwiseAbs().maxCoeff());
    if ((K - K.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw std::invalid_argument("trace_box_average: kernel is not symmetric");
    // S(a,b) = trapezoid integral of khat over [0,t_a] x [0,t_b]
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n + 1, n + 1);
    for (int a = 1; a <= n; ++a)
        for (int b = 1; b <= n; ++b) {
            double cell = 0.25 * dt * dt * (K(a - 1, b - 1) + K(a, b - 1) + K(a - 1, b) + K(a, b));
            S(a, b) = cell + S(a - 1, b) + S(a, b - 1) - S(a - 1, b - 1);
        }
    Eigen::VectorXd avg(n + 1);
    for (int i = 0; i <= n; ++i) {
        const int lo = std::max(0, i - m), hi = std::min(n, i + m);
        const double side = (hi - lo) * dt;
        const double box = S(hi, hi) - S(lo, hi) - S(hi, lo) + S(lo, lo);
        avg[i] = box / (side * side);
    }
    return (avg.sum() - 0.5 * (avg[0] + avg[n])) * dt;
}

double ScalarFn::operator()(double x) const {
    if (name == "constant") return params[0];
    if (name == "cos") return std::cos(x);
    if (name == "tanh") return std::tanh(x);
    if (name == "affine_clamped") return std::clamp(params[0] + params[1] * x, params[2], params[3]);
    throw std::invalid_argument("unknown scalar function '" + name + "'");
}

double ScalarFn::derivative(double x) const {
    if (name == "constant") return 0.0;
    if (name == "cos") return -std::sin(x);
    if (name == "tanh") {
        double c = std::cosh(x);
        return 1.0 / (c * c);
    }
    if (name == "affine_clamped") {
        double y = params[0] + params[1] * x;
        return (y > params[2] && y < params[3]) ? params[1] : 0.0;
    }
    throw std::invalid_argument("unknown scalar function '" + name + "'");
}

ScalarFn make_scalar_fn(const std::string& name, const std::vector<double>& params) {
    size_t need;
    if (name == "constant")
        need = 1;
    else if (name == "cos" || name == "tanh")
        need = 0;
    else if (name == "affine_clamped")
        need = 4;
    else
        throw std::invalid_argument("unknown scalar function '" + name + "' (constant, cos, tanh, affine_clamped)");
    if (params.size() != need)
        throw std::invalid_argument("function '" + name + "' takes " + std::to_string(need) + " parameters");
    for (double p : params)
        if (!std::isfinite(p)) throw std::invalid_argument("function '" + name + "': non-finite parameter");
    if (name == "affine_clamped" && !(params[2] <= params[3]))
        throw std::invalid_argument("affine_clamped: need lo <= hi");
    return {name, params};
}

TraceReport trace_identity_check(const ScalarFn& G, const CmElement& h, const HurstConfig& cfg,
                                 std::vector<double> r_schedule) {
    const Path& p = h.h;
    if (!p.is_pinned()) throw std::invalid_argument("trace_identity_check: h must be pinned");
    const Grid& grid = p.grid();
    const double dt = grid.dt();
    if (r_schedule.empty()) r_schedule = {8.0 * dt, 4.0 * dt, 2.0 * dt};
    if (r_schedule.size() < 2) throw std::invalid_argument("trace_identity_check: need at least two radii");
    std::sort(r_schedule.begin(), r_schedule.end(), std::greater<double>());

    Eigen::VectorXd gv(grid.size());
    for (int j = 0; j < grid.size(); ++j) gv[j] = G(p.samples()(0, j));
    SampledFn g(grid, gv);

    TraceReport rep;
    rep.r_schedule = r_schedule;
    rep.trace_identity = 0.5 * (gv.sum() - 0.5 * (gv[0] + gv[grid.n()])) * dt;
    if (gv.cwiseAbs().maxCoeff() == 0.0) {
        rep.per_r.assign(r_schedule.size(), 0.0);
    } else {
        KernelMatrix khat = symmetrized_du_kernel(g, cfg);
        for (double r : r_schedule) rep.per_r.push_back(trace_box_average(khat, r));
    }
    const size_t m = r_schedule.size();
    const double r1 = r_schedule[m - 1], r2 = r_schedule[m - 2];
    const double T1 = rep.per_r[m - 1], T2 = rep.per_r[m - 2];
    // linear model T(r) = T0 + c r through the two smallest radii
    rep.extrapolated = T1 - r1 * (T2 - T1) / (r2 - r1);
    rep.trace_numeric = rep.extrapolated;
    rep.abs_error = std::abs(rep.trace_numeric - rep.trace_identity);
    return rep;
}

}  // namespace omfbm
