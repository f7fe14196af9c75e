#pragma once

#include <cmath>
#include <vector>

namespace omfbm {

/// Nodes/weights on [0,1].
struct QuadRule {
    std::vector<double> x;
    std::vector<double> w;
    int size() const { return static_cast<int>(x.size()); }
};

// Gauss-Jacobi rule for the weight x^a (1-x)^b on [0,1], a,b > -1 (Golub-Welsch).
// Rules are cached per thread; the reference stays valid for the thread's lifetime.
const QuadRule& gauss_jacobi01(double a, double b, int q);
inline const QuadRule& gauss_legendre01(int q) { return gauss_jacobi01(0.0, 0.0, q); }

/*
 * int_0^1 x^a (1-x)^b f(x) dx for f analytic on [0,1] whose nearest singularity sits
 * near x = -sigma (sigma > 0, pass +inf for none). For small sigma the left half is
 * covered by geometrically graded panels starting at 2*sigma so that each panel
 * sees the singularity at a fixed relative distance.
 */
template <class F>
double integrate_graded(F&& f, double a, double b, double sigma, int q = 16) {
    const QuadRule& left = gauss_jacobi01(a, 0.0, q);
    const QuadRule& right = gauss_jacobi01(b, 0.0, q);
    double total = 0.0;
    // right half: x = 1 - y/2, y in [0,1], (1-x)^b = (y/2)^b, so the rule carries y^b
    {
        double s = 0.0;
        for (int k = 0; k < q; ++k) {
            double x = 1.0 - 0.5 * right.x[k];
            s += right.w[k] * std::pow(x, a) * f(x);
        }
        total += s * std::pow(0.5, b + 1.0);
    }
    double L0 = 0.5;
    if (sigma < 0.25) L0 = 2.0 * sigma;
    {
        double s = 0.0;
        for (int k = 0; k < q; ++k) {
            double x = L0 * left.x[k];
            s += left.w[k] * std::pow(1.0 - x, b) * f(x);
        }
        total += s * std::pow(L0, a + 1.0);
    }
    if (L0 < 0.5) {
        const QuadRule& gl = gauss_legendre01(q);
        double lo = L0;
        while (lo < 0.5) {
            double hi = std::min(0.5, 2.0 * lo);
            double len = hi - lo, s = 0.0;
            for (int k = 0; k < q; ++k) {
                double x = lo + len * gl.x[k];
                s += gl.w[k] * std::pow(x, a) * std::pow(1.0 - x, b) * f(x);
            }
            total += s * len;
            lo = hi;
        }
    }
    return total;
}

}  // namespace omfbm
