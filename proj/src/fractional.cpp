#include "omfbm/fractional.hpp"

#include "omfbm/quadrature.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace omfbm {

SampledFn::SampledFn(Grid g, Eigen::VectorXd v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.size())
        throw std::invalid_argument("sampled fn: expected " + std::to_string(grid.size()) + " values");
    if (!values.allFinite()) throw std::invalid_argument("sampled fn: non-finite value");
}

namespace {

constexpr int kCellPoints = 12;

/*
 * Unit-scale product integration weights, independent of n:
 *   W(i, col) = int over cells of (k+x)^v (i-k-x)^(alpha-1) phi_col(x) dx
 * with phi the hat (Nodal) or box (Cellwise) basis. Scaled later by dt^(v+alpha)/Gamma(alpha).
 */
Eigen::MatrixXd unit_integral_weights(int n, double alpha, double v, Basis basis) {
    const int cols = basis == Basis::Nodal ? n + 1 : n;
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n + 1, cols);
    if (v == 0.0) {
        // closed forms: Diethelm weights (hat) and exact box moments
        for (int i = 1; i <= n; ++i) {
            if (basis == Basis::Nodal) {
                const double s = 1.0 / (alpha * (alpha + 1.0));
                W(i, 0) = s * (std::pow(i - 1.0, alpha + 1.0) - (i - 1.0 - alpha) * std::pow(double(i), alpha));
                for (int j = 1; j < i; ++j) {
                    double m = i - j;
                    W(i, j) = s * (std::pow(m + 1.0, alpha + 1.0) - 2.0 * std::pow(m, alpha + 1.0) +
                                   std::pow(m - 1.0, alpha + 1.0));
                }
                W(i, i) = s;
            } else {
                for (int k = 0; k < i; ++k)
                    W(i, k) = (std::pow(double(i - k), alpha) - std::pow(double(i - k - 1), alpha)) / alpha;
            }
        }
        return W;
    }
    const QuadRule& gl = gauss_legendre01(kCellPoints);
    for (int i = 1; i <= n; ++i) {
        for (int k = 0; k < i; ++k) {
            const bool left = k == 0, right = k == i - 1;
            const QuadRule& r = (left || right)
                                    ? gauss_jacobi01(left ? v : 0.0, right ? alpha - 1.0 : 0.0, kCellPoints)
                                    : gl;
            double s0 = 0.0, s1 = 0.0;
            for (int q = 0; q < r.size(); ++q) {
                const double x = r.x[q];
                double f = r.w[q];
                if (!left) f *= std::pow(k + x, v);
                if (!right) f *= std::pow(i - k - x, alpha - 1.0);
                s0 += f * (1.0 - x);
                s1 += f * x;
            }
            if (basis == Basis::Nodal) {
                W(i, k) += s0;
                W(i, k + 1) += s1;
            } else {
                W(i, k) += s0 + s1;
            }
        }
    }
    return W;
}

struct UnitCache {
    std::mutex mu;
    std::map<std::tuple<double, double, int>, std::shared_ptr<const Eigen::MatrixXd>> m;
};

std::shared_ptr<const Eigen::MatrixXd> cached_unit_weights(int n, double alpha, double v, Basis basis) {
    static UnitCache cache;
    auto key = std::make_tuple(alpha, v, static_cast<int>(basis));
    {
        std::lock_guard<std::mutex> lk(cache.mu);
        auto it = cache.m.find(key);
        if (it != cache.m.end() && it->second->rows() >= n + 1) return it->second;
    }
    auto w = std::make_shared<const Eigen::MatrixXd>(unit_integral_weights(n, alpha, v, basis));
    std::lock_guard<std::mutex> lk(cache.mu);
    if (cache.m.size() > 32) cache.m.clear();
    cache.m[key] = w;
    return w;
}

void check_alpha_integral(double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("fractional integral: alpha must be in (0,1]");
}
void check_alpha_derivative(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("fractional derivative: alpha must be in (0,1)");
}

}  // namespace

Eigen::MatrixXd integral_matrix(const Grid& g, double alpha, double inner, double outer, Basis basis) {
    check_alpha_integral(alpha);
    if (!(inner > -1.0)) throw std::invalid_argument("integral_matrix: inner weight exponent must exceed -1");
    const int n = g.n();
    auto unit = cached_unit_weights(n, alpha, inner, basis);
    const int cols = basis == Basis::Nodal ? n + 1 : n;
    Eigen::MatrixXd W = unit->topLeftCorner(n + 1, cols) * (std::pow(g.dt(), inner + alpha) / std::tgamma(alpha));
    if (outer != 0.0)
        for (int i = 1; i <= n; ++i) W.row(i) *= std::pow(g.node(i), outer);
    const double e = outer + inner + alpha;
    if (basis == Basis::Nodal && std::abs(e) < 1e-14)
        W(0, 0) = std::tgamma(inner + 1.0) / std::tgamma(inner + alpha + 1.0);
    return W;
}

Eigen::MatrixXd marchaud_matrix(const Grid& g, double alpha) {
    check_alpha_derivative(alpha);
    const int n = g.n();
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n + 1, n + 1);
    const double sc = std::pow(g.dt(), -alpha) / std::tgamma(1.0 - alpha);
    // per-cell moments of y^(-alpha-1) and y^(-alpha) on [m-1, m]
    Eigen::VectorXd P0(n + 1), P1(n + 1);
    for (int m = 2; m <= n; ++m) {
        P0[m] = (std::pow(m - 1.0, -alpha) - std::pow(double(m), -alpha)) / alpha;
        P1[m] = (std::pow(double(m), 1.0 - alpha) - std::pow(m - 1.0, 1.0 - alpha)) / (1.0 - alpha);
    }
    for (int i = 1; i <= n; ++i) {
        // the g_i coefficient telescopes to 1/(1-alpha)
        M(i, i) = 1.0 / (1.0 - alpha);
        M(i, i - 1) -= alpha / (1.0 - alpha);
        for (int m = 2; m <= i; ++m) {
            const int k = i - m;
            M(i, k) -= alpha * (P1[m] - (m - 1.0) * P0[m]);
            M(i, k + 1) -= alpha * (m * P0[m] - P1[m]);
        }
    }
    M *= sc;
    return M;
}

SampledFn frac_integral(const SampledFn& f, double alpha) {
    check_alpha_integral(alpha);
    Eigen::MatrixXd W = integral_matrix(f.grid, alpha);
    return SampledFn(f.grid, W * f.values);
}

SampledFn frac_derivative(const SampledFn& g, double alpha) {
    check_alpha_derivative(alpha);
    if (g.values[0] != 0.0) throw std::invalid_argument("frac_derivative: input must be pinned (g_0 = 0)");
    Eigen::MatrixXd M = marchaud_matrix(g.grid, alpha);
    return SampledFn(g.grid, M * g.values);
}

SampledFn weighted_op(const SampledFn& f, double alpha, double outer, FracOp which, double inner) {
    const Grid& g = f.grid;
    const double f0 = f.values[0];
    if (which == FracOp::Integral) {
        check_alpha_integral(alpha);
        Eigen::VectorXd out = integral_matrix(g, alpha, inner, outer) * f.values;
        const double e = outer + inner + alpha;
        if (e < -1e-14) {
            if (f0 != 0.0 || e + 1.0 <= 0.0)
                throw std::domain_error("weighted_op: power weight has no finite limit at t = 0");
            out[0] = 0.0;
        }
        return SampledFn(g, out);
    }
    check_alpha_derivative(alpha);
    Eigen::VectorXd psi(g.size());
    for (int j = 1; j < g.size(); ++j) psi[j] = std::pow(g.node(j), inner) * f.values[j];
    if (inner > 0.0) {
        psi[0] = 0.0;
    } else if (inner == 0.0) {
        psi[0] = f0;
    } else {
        if (f0 != 0.0) throw std::domain_error("weighted_op: s^inner f is unbounded at t = 0");
        psi[0] = 0.0;
    }
    if (psi[0] != 0.0) throw std::invalid_argument("weighted_op: derivative input must be pinned");
    Eigen::VectorXd out = marchaud_matrix(g, alpha) * psi;
    for (int j = 1; j < g.size(); ++j) out[j] *= std::pow(g.node(j), outer);
    // leading power of psi at 0 decides the node-0 limit
    const double p = f0 != 0.0 ? inner : inner + 1.0;
    const double e = outer + p - alpha;
    if (e > 1e-14) {
        out[0] = 0.0;
    } else if (e > -1e-14) {
        const double C = psi[1] / std::pow(g.dt(), p);
        out[0] = C * std::tgamma(p + 1.0) / std::tgamma(p + 1.0 - alpha);
    } else {
        throw std::domain_error("weighted_op: power weight has no finite limit at t = 0");
    }
    return SampledFn(g, out);
}

}  // namespace omfbm
