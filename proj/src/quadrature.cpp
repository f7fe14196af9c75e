#include "omfbm/quadrature.hpp"

#include "omfbm/special.hpp"

#include <Eigen/Eigenvalues>

#include <map>
#include <stdexcept>
#include <tuple>

namespace omfbm {

namespace {

// Golub-Welsch on the Jacobi matrix for (1-y)^al (1+y)^be on [-1,1], mapped to [0,1].
QuadRule build_rule(double a, double b, int q) {
    const double al = b, be = a;
    Eigen::VectorXd diag(q), sub(std::max(q - 1, 0));
    const double s = al + be;
    diag[0] = (be - al) / (s + 2.0);
    for (int k = 1; k < q; ++k) {
        double t = 2.0 * k + s;
        diag[k] = (be * be - al * al) / (t * (t + 2.0));
    }
    for (int k = 1; k < q; ++k) {
        double t = 2.0 * k + s, bk;
        if (k == 1)
            bk = 4.0 * (1.0 + al) * (1.0 + be) / ((2.0 + s) * (2.0 + s) * (3.0 + s));
        else
            bk = 4.0 * k * (k + al) * (k + be) * (k + s) / (t * t * (t + 1.0) * (t - 1.0));
        sub[k - 1] = std::sqrt(bk);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    if (es.info() != Eigen::Success) throw std::runtime_error("gauss_jacobi: eigensolver failed");
    const double mu0 = beta(a + 1.0, b + 1.0);
    QuadRule r;
    r.x.resize(q);
    r.w.resize(q);
    for (int k = 0; k < q; ++k) {
        r.x[k] = 0.5 * (1.0 + es.eigenvalues()[k]);
        double v = es.eigenvectors()(0, k);
        r.w[k] = mu0 * v * v;
    }
    return r;
}

}  // namespace

const QuadRule& gauss_jacobi01(double a, double b, int q) {
    if (!(a > -1.0 && b > -1.0) || q < 1) throw std::invalid_argument("gauss_jacobi01: need a,b > -1, q >= 1");
    thread_local std::map<std::tuple<double, double, int>, QuadRule> cache;
    auto key = std::make_tuple(a, b, q);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    return cache.emplace(key, build_rule(a, b, q)).first->second;
}

}  // namespace omfbm
