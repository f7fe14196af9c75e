#include "doctest.h"
#include "oracles.hpp"

#include "omfbm/kernel_diagnostics.hpp"

using namespace omfbm;

namespace {

// k(t,u) straight from its defining integral; both endpoint singularities are left to tanh-sinh
double du_kernel_oracle(double t, double u, double H, double (*g)(double)) {
    boost::math::quadrature::tanh_sinh<double> ts;
    const double BH = 1.0 / (oracle::c_H(H) * std::tgamma(H + 0.5) * std::tgamma(0.5 - H));
    auto f = [&](double s, double sc) {
        const double ts_ = sc > 0 ? sc : t - s;  // right half: sc = t - s
        if (s <= u || ts_ <= 0) return 0.0;
        return std::pow(s, 0.5 - H) * std::pow(ts_, -H - 0.5) * oracle::volterra_K(s, u, H) * g(s);
    };
    return BH * std::pow(t, H - 0.5) * ts.integrate(f, u, t);
}

double one(double) { return 1.0; }
double cos3(double s) { return std::cos(3 * s); }

}  // namespace

TEST_CASE("du kernel against its defining integral") {
    const double H = 0.3;
    const auto c = hurst_config(H);
    const Grid g(1024);
    const auto g1 = SampledFn::from_function(g, one);
    const auto gc = SampledFn::from_function(g, cos3);
    for (auto [t, u] : {std::pair{0.9, 0.3}, {0.5, 0.05}, {1.0, 0.7}}) {
        CHECK(du_kernel(t, u, c, g1) == doctest::Approx(du_kernel_oracle(t, u, H, one)).epsilon(1e-5));
        CHECK(du_kernel(t, u, c, gc) == doctest::Approx(du_kernel_oracle(t, u, H, cos3)).epsilon(1e-4));
    }
    CHECK(du_kernel(0.3, 0.5, c, g1) == 0.0);
    CHECK(du_kernel(0.5, 0.5, c, g1) == 0.0);
    CHECK_THROWS_AS(du_kernel(0.5, 0.0, c, g1), std::invalid_argument);
}

TEST_CASE("du kernel near the diagonal follows the Beta identity") {
    // as t -> u+ the kernel tends to c_H B_H Beta(1/2+H, 1/2-H) g(u) = g(u)
    for (double H : {0.1, 0.25, 0.4}) {
        const auto c = hurst_config(H);
        CHECK(c.c_H * c.B_H * beta(0.5 + H, 0.5 - H) == doctest::Approx(1.0).epsilon(1e-12));
        const Grid g(512);
        const auto g1 = SampledFn::from_function(g, one);
        CHECK(du_kernel(0.5 + 1e-7, 0.5, c, g1) == doctest::Approx(1.0).epsilon(1e-3));
        CHECK(oracle::beta_identity_quadrature(H) == doctest::Approx(beta(0.5 + H, 0.5 - H)).epsilon(1e-6));
    }
}

TEST_CASE("du kernel bound with a stable constant") {
    const auto c = hurst_config(0.3);
    const Grid g(512);
    const auto gc = SampledFn::from_function(g, cos3);
    auto observed = [&](int m) {
        double E = 0.0;
        for (int i = 1; i <= m; ++i)
            for (int j = 1; j < i; ++j) {
                const double t = double(i) / m, u = double(j) / m;
                E = std::max(E, std::abs(du_kernel(t, u, c, gc)) / std::pow(u, -0.2));
            }
        return E;
    };
    const double e25 = observed(25), e50 = observed(50);
    CHECK(std::isfinite(e50));
    CHECK(e50 == doctest::Approx(e25).epsilon(0.1));
}

TEST_CASE("Hilbert-Schmidt norm") {
    const auto c = hurst_config(0.3);
    auto hs = [&](int n, double a) {
        return hs_norm(SampledFn::from_function(Grid(n), [a](double) { return a; }), c);
    };
    CHECK(hs(64, 0.0) == 0.0);
    CHECK(hs(64, 2.0) == doctest::Approx(2.0 * hs(64, 1.0)).epsilon(1e-13));
    const double a = hs(256, 1.0), b = hs(512, 1.0);
    CHECK(std::isfinite(b));
    CHECK(b == doctest::Approx(a).epsilon(2e-2));
}

TEST_CASE("symmetrized kernel layout") {
    const auto c = hurst_config(0.3);
    const Grid g(64);
    const auto gc = SampledFn::from_function(g, cos3);
    const auto K = symmetrized_du_kernel(gc, c);
    CHECK((K.entries - K.entries.transpose()).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK(K.entries(10, 10) == doctest::Approx(0.5 * gc.values[10]));
    CHECK(K.entries(40, 20) == doctest::Approx(0.5 * du_kernel(g.node(40), g.node(20), c, gc)).epsilon(1e-12));
    CHECK(K.entries.allFinite());
}

TEST_CASE("box averages") {
    const Grid g(128);
    KernelMatrix k{g, Eigen::MatrixXd::Constant(129, 129, 0.7)};
    for (double r : {2.0 / 128, 0.1, 0.25}) CHECK(trace_box_average(k, r) == doctest::Approx(0.7).epsilon(1e-13));

    // k = t u: diagonal average v^2 plus O(r^2)
    KernelMatrix tu{g, g.nodes() * g.nodes().transpose()};
    double prev = INFINITY;
    for (double r : {16.0 / 128, 8.0 / 128, 4.0 / 128}) {
        const double e = std::abs(trace_box_average(tu, r) - 1.0 / 3.0);
        CHECK(e < 0.5 * r);
        CHECK(e < prev);
        prev = e;
    }

    // antisymmetric part drops out after symmetrization
    Eigen::MatrixXd A(129, 129);
    for (int i = 0; i <= 128; ++i)
        for (int j = 0; j <= 128; ++j) A(i, j) = std::sin(g.node(i) - 2 * g.node(j));
    KernelMatrix sym{g, 0.5 * (A + A.transpose())};
    KernelMatrix with{g, 0.5 * ((tu.entries + A) + (tu.entries + A).transpose())};
    KernelMatrix plain{g, tu.entries};
    for (double r : {0.05, 0.1}) {
        const double lhs = trace_box_average(with, r), rhs = trace_box_average(plain, r) + trace_box_average(sym, r);
        CHECK(std::abs(lhs - rhs) <= 1e-10);
    }

    CHECK_THROWS_AS(trace_box_average(k, 1.0 / 128), std::invalid_argument);
    KernelMatrix bad{g, A};
    CHECK_THROWS_AS(trace_box_average(bad, 0.1), std::invalid_argument);
}

TEST_CASE("scalar functions") {
    CHECK(make_scalar_fn("constant", {2.5})(7.0) == 2.5);
    CHECK(make_scalar_fn("cos", {})(0.3) == std::cos(0.3));
    CHECK(make_scalar_fn("tanh", {}).derivative(0.0) == 1.0);
    const auto ac = make_scalar_fn("affine_clamped", {1.0, 2.0, -1.0, 2.0});  // intercept, slope, lo, hi
    CHECK(ac(0.25) == 1.5);
    CHECK(ac(5.0) == 2.0);
    CHECK(ac(-5.0) == -1.0);
    CHECK(ac.derivative(5.0) == 0.0);
    CHECK(ac.derivative(0.0) == 2.0);
    CHECK_THROWS_AS(make_scalar_fn("cos", {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(make_scalar_fn("exp", {}), std::invalid_argument);
    CHECK_THROWS_AS(make_scalar_fn("affine_clamped", {1, 0, 2, 1}), std::invalid_argument);
}

TEST_CASE("trace identity on a coarse grid") {
    const auto c = hurst_config(0.3);
    const Grid g(128);
    const CmElement id(Path::from_function(g, [](double t) { return t; }));

    const auto z = trace_identity_check(make_scalar_fn("constant", {0.0}), id, c);
    CHECK(z.trace_identity == 0.0);
    CHECK(z.extrapolated == 0.0);
    CHECK(z.abs_error == 0.0);

    const auto r = trace_identity_check(make_scalar_fn("constant", {1.0}), id, c);
    CHECK(r.trace_identity == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(r.r_schedule.size() == 3);
    CHECK(r.r_schedule.front() > r.r_schedule.back());
    // the extrapolant stays within the spread of the two smallest radii
    const double v1 = r.per_r[r.per_r.size() - 2], v2 = r.per_r.back();
    CHECK(std::abs(r.extrapolated - v2) <= std::abs(v1 - v2) * (1 + 1e-12));
    CHECK(r.abs_error < 0.1);

    const auto cs = trace_identity_check(make_scalar_fn("cos", {}), id, c, {0.1, 0.05});
    CHECK(cs.trace_identity == doctest::Approx(0.5 * std::sin(1.0)).epsilon(1e-4));
    CHECK(cs.abs_error < 0.1);
    CHECK_THROWS_AS(trace_identity_check(make_scalar_fn("cos", {}), id, c, {0.1}), std::invalid_argument);
}
