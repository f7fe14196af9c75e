#include "doctest.h"
#include "oracles.hpp"

#include "omfbm/cameron_martin.hpp"
#include "omfbm/fbm.hpp"

#include <random>
#include <stdexcept>

using namespace omfbm;

namespace {

double l2(const Eigen::VectorXd& v, double dt) { return std::sqrt(l2_inner(v, v, dt)); }

// K^{-1}(t) for h(t) = t
double kinv_identity(double s, const HurstConfig& c) {
    const double H = c.H;
    return std::tgamma(1.5 - H) / (c.c_H * std::tgamma(H + 0.5) * std::tgamma(2 - 2 * H)) * std::pow(s, 0.5 - H);
}

double cm_norm_identity(const HurstConfig& c) {
    const double H = c.H;
    return std::tgamma(1.5 - H) / (c.c_H * std::tgamma(H + 0.5) * std::tgamma(2 - 2 * H)) / std::sqrt(2 - 2 * H);
}

}  // namespace

TEST_CASE("covariance") {
    for (double H : {0.1, 0.3, 0.45}) {
        CHECK(covariance(0.7, 0.7, H) == doctest::Approx(std::pow(0.7, 2 * H)));
        CHECK(covariance(0.0, 0.4, H) == 0.0);
        CHECK(covariance(0.2, 0.9, H) == doctest::Approx(oracle::fbm_cov(0.2, 0.9, H)).epsilon(1e-15));
    }
    CHECK(covariance(0.3, 0.8, 0.5) == doctest::Approx(0.3).epsilon(1e-15));
    for (double H : {0.1, 0.2, 0.3, 0.4}) {
        const auto R = covariance_matrix(Grid(512), H);
        CHECK((R.entries - R.entries.transpose()).cwiseAbs().maxCoeff() == 0.0);
        Eigen::LLT<Eigen::MatrixXd> llt(R.entries.bottomRightCorner(512, 512));
        CHECK(llt.info() == Eigen::Success);
    }
}

TEST_CASE("kernel K against the integral form") {
    for (double H : {0.1, 0.3, 0.4}) {
        const auto c = hurst_config(H);
        for (auto [t, u] : {std::pair{0.8, 0.4}, {1.0, 0.01}, {0.5, 0.499}, {1.0, 1e-5}, {0.3, 0.05}})
            CHECK(kernel_K(t, u, c) == doctest::Approx(oracle::volterra_K(t, u, H)).epsilon(1e-9));
    }
    const auto c = hurst_config(0.3);
    CHECK(kernel_K(0.4, 0.8, c) == 0.0);
    CHECK(kernel_K(0.5, 0.5, c) == 0.0);
    CHECK_THROWS_AS(kernel_K(0.5, 0.0, c), std::invalid_argument);
}

TEST_CASE("kernel reproduces the covariance") {
    // R(s,t) = int_0^s K(s,u) K(t,u) du, checked with tanh-sinh on the oracle kernel side
    const double H = 0.3;
    const auto c = hurst_config(H);
    boost::math::quadrature::tanh_sinh<double> ts;
    for (auto [s, t] : {std::pair{0.5, 0.5}, {0.3, 0.9}, {1.0, 1.0}}) {
        auto f = [&](double u) { return kernel_K(s, u, c) * kernel_K(t, u, c); };
        CHECK(ts.integrate(f, 0.0, s) == doctest::Approx(oracle::fbm_cov(s, t, H)).epsilon(1e-7));
    }
}

TEST_CASE("kernel bound with a stable constant") {
    auto observed = [](int m) {
        const auto c = hurst_config(0.3);
        double best = 0.0;
        for (int i = 1; i <= m; ++i)
            for (int j = 1; j < i; ++j) {
                const double s = double(i) / m, u = double(j) / m;
                best = std::max(best, std::abs(kernel_K(s, u, c)) / (std::pow(u, -0.2) * std::pow(s - u, -0.2)));
            }
        return best;
    };
    const double c100 = observed(100), c200 = observed(200);
    CHECK(std::isfinite(c100));
    CHECK(c200 == doctest::Approx(c100).epsilon(0.05));
}

TEST_CASE("K matrix layout") {
    const auto c = hurst_config(0.3);
    const Grid g(64);
    const auto K = kernel_matrix_K(g, c);
    CHECK(K.entries(40, 20) == doctest::Approx(kernel_K(g.node(40), g.node(20), c)).epsilon(1e-14));
    CHECK(K.entries(20, 40) == 0.0);
    CHECK(K.entries(20, 20) == 0.0);
    CHECK(std::isfinite(K.entries(64, 0)));
    CHECK(K.entries.allFinite());
}

TEST_CASE("apply_K: both representations and the isometry") {
    const auto c = hurst_config(0.3);
    const Grid g(1024);
    const auto one = SampledFn::from_function(g, [](double) { return 1.0; });
    const auto k1 = apply_K(one, c), k2 = apply_K_composed(one, c);
    CHECK(k1.values[0] == 0.0);
    CHECK(k1.values[g.n()] == doctest::Approx(k2.values[g.n()]).epsilon(2e-2));
    // exact value: int_0^1 K(1,u) du by tanh-sinh on the oracle
    boost::math::quadrature::tanh_sinh<double> ts;
    const double exact = ts.integrate([](double u) { return oracle::volterra_K(1.0, u, 0.3); }, 1e-14, 1.0 - 1e-9);  // dropped ends ~1e-7
    CHECK(k1.values[g.n()] == doctest::Approx(exact).epsilon(1e-4));
    CHECK(cm_norm(CmElement(Path(g, k1.values.transpose())), c) == doctest::Approx(1.0).epsilon(2e-2));

    std::mt19937_64 rng(31);
    for (int k = 0; k < 6; ++k) {
        const oracle::SmoothFn F(rng);
        const auto f = SampledFn::from_function(g, [&](double t) { return F.deriv(t); });
        const auto h = apply_K(f, c);
        const double fl2 = l2(f.values, g.dt());
        CHECK(std::abs(cm_norm(CmElement(Path(g, h.values.transpose())), c) - fl2) <= 2e-2 * fl2);
        const double diff = (h.values - apply_K_composed(f, c).values).cwiseAbs().maxCoeff();
        CHECK(diff <= 2e-2 * f.values.cwiseAbs().maxCoeff());
    }
    // linearity
    const SampledFn two(g, 2.0 * one.values);
    CHECK((apply_K(two, c).values - 2.0 * k1.values).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(apply_K(SampledFn(g, Eigen::VectorXd::Zero(g.size())), c).values.isZero(0));
}

TEST_CASE("K at a point from a narrow bump") {
    // (K f)(t) with f a normalized bump at u approximates K(t,u)
    const auto c = hurst_config(0.3);
    const Grid g(1024);
    const double t = 0.8, u = 0.4, w = 0.01;
    const auto bump = SampledFn::from_function(g, [&](double s) { return std::abs(s - u) < w ? 1.0 / (2 * w) : 0.0; });
    const int it = static_cast<int>(std::lround(t * g.n()));
    CHECK(apply_K_composed(bump, c).values[it] == doctest::Approx(kernel_K(t, u, c)).epsilon(2e-2));
    CHECK(apply_K(bump, c).values[it] == doctest::Approx(kernel_K(t, u, c)).epsilon(2e-2));
}

TEST_CASE("pinned continuous output across H") {
    for (double H : {0.1, 0.25, 0.4}) {
        const auto c = hurst_config(H);
        double prev = INFINITY;
        for (int n : {128, 512}) {
            const Grid g(n);
            const auto y = apply_K_composed(SampledFn::from_function(g, [](double t) { return std::cos(t); }), c);
            CHECK(y.values[0] == 0.0);
            double jump = 0.0;
            for (int j = 1; j <= n; ++j) jump = std::max(jump, std::abs(y.values[j] - y.values[j - 1]));
            CHECK(jump < prev);
            prev = jump;
        }
    }
}

TEST_CASE("inverse for C1 paths") {
    const auto c = hurst_config(0.3);
    const Grid g(1024);
    const auto ones = SampledFn::from_function(g, [](double) { return 1.0; });
    const auto inv = apply_K_inverse_c1(ones, c);
    for (int j = 16; j <= g.n(); j += 16)
        CHECK(inv.values[j] == doctest::Approx(kinv_identity(g.node(j), c)).epsilon(1e-2));
    CHECK(apply_K_inverse_c1(SampledFn(g, Eigen::VectorXd::Zero(g.size())), c).values.isZero(0));

    std::mt19937_64 rng(32);
    for (int k = 0; k < 5; ++k) {
        const oracle::SmoothFn F(rng);
        const auto hp = SampledFn::from_function(g, [&](double t) { return F.deriv(t); });
        const auto back = apply_K(apply_K_inverse_c1(hp, c), c);
        Eigen::VectorXd h(g.size());
        for (int j = 0; j <= g.n(); ++j) h[j] = F(g.node(j));
        CHECK((back.values - h).cwiseAbs().maxCoeff() <= 2e-2 * h.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("Cameron-Martin norm closed form and the C1 bound") {
    for (double H : {0.2, 0.3, 0.4}) {
        const auto c = hurst_config(H);
        const Grid g(1024);
        const CmElement id(Path::from_function(g, [](double t) { return t; }));
        CHECK(cm_norm(id, c) == doctest::Approx(cm_norm_identity(c)).epsilon(1e-2));
        CHECK(cm_norm(id, c, CmMethod::FourFactor) == doctest::Approx(cm_norm_identity(c)).epsilon(2e-2));
    }
    const auto c = hurst_config(0.3);
    std::mt19937_64 rng(33);
    std::vector<double> worst;
    for (int n : {256, 1024}) {
        const Grid g(n);
        double w = 0.0;
        std::mt19937_64 local(33);
        for (int k = 0; k < 20; ++k) {
            const oracle::SmoothFn F(local);
            double dmax = 0.0;
            for (int j = 0; j <= 1000; ++j) dmax = std::max(dmax, std::abs(F.deriv(j / 1000.0)));
            w = std::max(w, cm_norm(CmElement(Path::from_function(g, F)), c) / dmax);
        }
        worst.push_back(w);
    }
    CHECK(worst[1] == doctest::Approx(worst[0]).epsilon(0.05));
    CHECK_THROWS_AS(cm_norm(CmElement(Path::from_function(Grid(16), [](double t) { return 1 + t; })), c),
                    std::invalid_argument);
}

TEST_CASE("d-dimensional norm is root sum of squares") {
    const auto c = hurst_config(0.3);
    const Grid g(256);
    Eigen::MatrixXd s(2, g.size());
    for (int j = 0; j <= g.n(); ++j) s.col(j) << g.node(j), std::sin(g.node(j));
    const double n1 = cm_norm(CmElement(Path::from_function(g, [](double t) { return t; })), c);
    const double n2 = cm_norm(CmElement(Path::from_function(g, [](double t) { return std::sin(t); })), c);
    CHECK(cm_norm(CmElement(Path(g, s)), c) == doctest::Approx(std::hypot(n1, n2)).epsilon(1e-12));
}

TEST_CASE("inner product") {
    const auto c = hurst_config(0.3);
    const Grid g(1024);
    const CmElement h(Path::from_function(g, [](double t) { return t * t - 0.3 * t; }));
    const double nh = cm_norm(h, c);
    CHECK(cm_inner(h, h, c) == doctest::Approx(nh * nh).epsilon(1e-10));
    CHECK(cm_inner(h, CmElement(Path::zeros(g, 1)), c) == 0.0);
    // disjoint bumps: L2-orthogonal preimages
    Eigen::MatrixXd f1(1, g.size()), f2(1, g.size());
    for (int j = 0; j <= g.n(); ++j) {
        const double t = g.node(j);
        f1(0, j) = t > 0.1 && t < 0.4 ? std::sin(M_PI * (t - 0.1) / 0.3) : 0.0;
        f2(0, j) = t > 0.5 && t < 0.9 ? std::sin(M_PI * (t - 0.5) / 0.4) : 0.0;
    }
    const auto e1 = CmElement::from_preimage(g, f1, c), e2 = CmElement::from_preimage(g, f2, c);
    const double l1 = l2(f1.row(0).transpose(), g.dt()), l2v = l2(f2.row(0).transpose(), g.dt());
    CHECK(std::abs(cm_inner(e1, e2, c)) <= 2e-2 * l1 * l2v);
    // without stored preimages, through the inverse
    CHECK(std::abs(cm_inner(CmElement(e1.h), CmElement(e2.h), c)) <= 2e-2 * l1 * l2v);
}

TEST_CASE("reproducing property") {
    const auto c = hurst_config(0.3);
    const Grid g(1024);
    const CmElement h(Path::from_function(g, [](double t) { return std::sin(2 * t) + t * t; }));
    const double nh = cm_norm(h, c);
    std::mt19937_64 rng(34);
    std::uniform_int_distribution<int> J(50, g.n());
    for (int k = 0; k < 10; ++k) {
        const int j = J(rng);
        const double t = g.node(j);
        const CmElement R(Path::from_function(g, [&](double s) { return oracle::fbm_cov(t, s, 0.3); }));
        CHECK(std::abs(cm_inner(R, h, c, CmMethod::FourFactor) - h.h.samples()(0, j)) <= 3e-2 * nh);
    }
}

TEST_CASE("Skorokhod integral") {
    CHECK(skorokhod_integral(Eigen::MatrixXd::Zero(1, 9), Eigen::MatrixXd::Ones(1, 8)) == 0.0);
    CHECK_THROWS_AS(skorokhod_integral(Eigen::MatrixXd::Zero(1, 9), Eigen::MatrixXd::Ones(1, 9)), std::invalid_argument);
    CHECK_THROWS_AS(skorokhod_integral(Eigen::MatrixXd::Zero(2, 9), Eigen::MatrixXd::Ones(1, 8)), std::invalid_argument);

    // a constant preimage integrates to the sum of the increments
    const Grid g(64);
    Eigen::MatrixXd dW(1, 64);
    for (int j = 0; j < 64; ++j) dW(0, j) = std::sin(1.0 + j);
    CHECK(skorokhod_integral(Eigen::MatrixXd::Ones(1, 65), dW) == doctest::Approx(dW.sum()).epsilon(1e-14));

    // Ito isometry over Volterra increments: Var delta(f) = |f|_L2^2, mean 0
    const auto c = hurst_config(0.3);
    const Grid g2(256);
    const VolterraSampler S(g2, c);
    Eigen::MatrixXd f(1, g2.size());
    for (int j = 0; j <= g2.n(); ++j) f(0, j) = std::cos(3 * g2.node(j)) + g2.node(j);
    const int N = 4000;
    double m1 = 0.0, m2 = 0.0;
    for (int i = 0; i < N; ++i) {
        const double v = skorokhod_integral(f, *S.sample(1, 78, i).dW);
        m1 += v;
        m2 += v * v;
    }
    m1 /= N;
    const double var = m2 / N - m1 * m1, target = l2_inner(f.row(0).transpose(), f.row(0).transpose(), g2.dt());
    CHECK(std::abs(m1) <= 4.0 * std::sqrt(target / N));
    CHECK(var == doctest::Approx(target).epsilon(4.0 * std::sqrt(2.0 / N)));
}
