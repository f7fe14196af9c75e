#include "omfbm/special.hpp"

#include "omfbm/quadrature.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace omfbm {

double gamma_fn(double x) { return std::tgamma(x); }

double log_gamma(double x) { return std::lgamma(x); }

double beta(double a, double b) {
    if (!(a > 0.0 && b > 0.0)) throw std::invalid_argument("beta: arguments must be positive");
    if (a + b < 150.0) return std::tgamma(a) * std::tgamma(b) / std::tgamma(a + b);
    return std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
}

double gauss_2f1(double a, double b, double c, double x) {
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c) || !std::isfinite(x))
        throw std::invalid_argument("gauss_2f1: non-finite argument");
    if (!(b > 0.0)) throw std::invalid_argument("gauss_2f1: need b > 0");
    if (!(c > b)) throw std::invalid_argument("gauss_2f1: need c > b");
    if (!(x < 1.0)) throw std::invalid_argument("gauss_2f1: need x < 1");
    if (x == 0.0 || a == 0.0) return 1.0;

    // Pfaff: F(a,b;c;x) = (1-x)^-a F(a,c-b;c;x/(x-1)) sends x < 0 into (0,1).
    double pref = 1.0, bb = b, z = x;
    if (x < 0.0) {
        pref = std::pow(1.0 - x, -a);
        bb = c - b;
        z = x / (x - 1.0);
    }
    // With s = 1-t the Euler integrand becomes s^(c-bb-1) (1-s)^(bb-1) (1-z+sz)^-a,
    // singular at s = -(1-z)/z.
    const double sigma = (1.0 - z) / z;
    auto f = [&](double s) { return std::pow((1.0 - z) + s * z, -a); };
    double I = integrate_graded(f, c - bb - 1.0, bb - 1.0, sigma, 20);
    return pref * I / beta(bb, c - bb);
}

HurstConfig hurst_config(double H) {
    if (!std::isfinite(H)) throw std::invalid_argument("hurst_config: H must be finite");
    if (H == 0.5)
        throw std::invalid_argument("hurst_config: H = 1/2 is the Brownian case, which is out of scope (need 0 < H < 1/2)");
    if (!(H > 0.0 && H < 0.5)) throw std::invalid_argument("hurst_config: need 0 < H < 1/2, got " + std::to_string(H));
    HurstConfig c;
    c.H = H;
    c.c_H = std::sqrt(2.0 * H / ((1.0 - 2.0 * H) * beta(1.0 - 2.0 * H, H + 0.5)));
    c.B_H = 1.0 / (c.c_H * std::tgamma(H + 0.5) * std::tgamma(0.5 - H));
    c.A_H = c.B_H / std::tgamma(1.0 - 2.0 * H);
    return c;
}

}  // namespace omfbm
