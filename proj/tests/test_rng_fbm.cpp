#include "doctest.h"
#include "oracles.hpp"

#include "omfbm/fbm.hpp"
#include "omfbm/rng.hpp"

#include <vector>

using namespace omfbm;

TEST_CASE("Philox4x32-10 known answers") {
    using A = std::array<std::uint32_t, 4>;
    CHECK(philox4x32(A{0, 0, 0, 0}, 0) == A{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(philox4x32(A{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, 0xffffffffffffffffull) ==
          A{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(philox4x32(A{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, 0x299f31d0a4093822ull) ==
          A{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("normal quantile") {
    CHECK(normal_quantile(0.5) == 0.0);
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-14));
    CHECK(normal_quantile(0.8413447460685429) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(normal_quantile(1e-10) == doctest::Approx(-6.361340902404056).epsilon(1e-13));
    CHECK(normal_quantile(1e-300) == doctest::Approx(-37.0470962993612).epsilon(1e-12));
    for (double p : {0.01, 0.2, 0.37, 0.49}) CHECK(normal_quantile(p) == doctest::Approx(-normal_quantile(1.0 - p)).epsilon(1e-14));
    double prev = -INFINITY;
    for (int k = 1; k < 1000; ++k) {
        const double z = normal_quantile(k / 1000.0);
        CHECK(z > prev);
        prev = z;
    }
}

TEST_CASE("streams are addressable and reproducible") {
    std::vector<double> a(1000), b(1000), c(1000);
    normal_fill(42, 7, 3, a.data(), 1000);
    normal_fill(42, 7, 3, b.data(), 1000);
    CHECK(a == b);
    normal_fill(42, 8, 3, c.data(), 1000);
    CHECK(a != c);
    normal_fill(43, 7, 3, c.data(), 1000);
    CHECK(a != c);
    normal_fill(42, 7, 4, c.data(), 1000);
    CHECK(a != c);
    // a prefix of a stream does not depend on how many values were requested
    std::vector<double> p(13);
    normal_fill(42, 7, 3, p.data(), 13);
    CHECK(std::equal(p.begin(), p.end(), a.begin()));

    std::vector<double> u(200000);
    uniform_fill(9, 0, 0, u.data(), 200000);
    double m = 0.0;
    for (double x : u) {
        CHECK_FALSE((x <= 0.0 || x >= 1.0));
        m += x;
    }
    CHECK(m / u.size() == doctest::Approx(0.5).epsilon(0.01));

    std::vector<double> z(200000);
    normal_fill(9, 0, 0, z.data(), 200000);
    double s1 = 0.0, s2 = 0.0, s4 = 0.0;
    for (double x : z) {
        s1 += x;
        s2 += x * x;
        s4 += x * x * x * x;
    }
    const double N = z.size();
    CHECK(std::abs(s1 / N) < 0.01);
    CHECK(s2 / N == doctest::Approx(1.0).epsilon(0.015));
    CHECK(s4 / N == doctest::Approx(3.0).epsilon(0.05));
}

TEST_CASE("fBm samplers: determinism, pinning, dimension extension") {
    const auto c = hurst_config(0.3);
    const Grid g(128);
    for (auto method : {FbmMethod::Cholesky, FbmMethod::Volterra}) {
        auto draw = [&](int d, std::uint64_t seed, std::uint64_t i) {
            return method == FbmMethod::Cholesky ? sample_cholesky(g, c, d, seed, i) : sample_volterra(g, c, d, seed, i);
        };
        const auto a = draw(3, 5, 11), b = draw(3, 5, 11), other = draw(3, 6, 11);
        CHECK(a.path.samples() == b.path.samples());
        CHECK(a.path.samples() != other.path.samples());
        CHECK(a.path.is_pinned());
        CHECK(a.path.dim() == 3);
        CHECK(a.method == method);
        CHECK(a.dW.has_value() == (method == FbmMethod::Volterra));
        // component 0 of a 3-d draw is the 1-d draw
        CHECK(draw(1, 5, 11).path.samples().row(0) == a.path.samples().row(0));
        CHECK(a.path.samples().row(0) != a.path.samples().row(1));
    }
    CHECK(parse_fbm_method("volterra") == FbmMethod::Volterra);
    CHECK(to_string(FbmMethod::Cholesky) == "cholesky");
    CHECK_THROWS_AS(parse_fbm_method("fft"), std::invalid_argument);
    CHECK_THROWS_AS(sample_cholesky(g, c, 0, 1), std::invalid_argument);
}

TEST_CASE("batch fill agrees with single draws") {
    const auto c = hurst_config(0.25);
    const Grid g(64);
    const CholeskySampler C(g, c);
    Eigen::MatrixXd out;
    C.fill(3, 10, 5, 0, out);
    CHECK(out.cols() == 5);
    for (int k = 0; k < 5; ++k) CHECK(out.col(k).transpose() == C.sample(1, 3, 10 + k).path.samples().row(0));
    const VolterraSampler V(g, c);
    Eigen::MatrixXd B, dW;
    V.fill(3, 10, 5, 0, B, dW);
    for (int k = 0; k < 5; ++k) {
        const auto s = V.sample(1, 3, 10 + k);
        CHECK(B.col(k).transpose() == s.path.samples().row(0));
        CHECK(dW.col(k).transpose() == s.dW->row(0));
    }
}

TEST_CASE("Volterra hook") {
    const auto c = hurst_config(0.3);
    const Grid g(64);
    const VolterraSampler V(g, c);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(64);
    CHECK(V.path_from(zero, zero).isZero(0));
    // aux-free part is the cell-average kernel against the increments
    Eigen::VectorXd e = zero;
    e[10] = 1.0;
    const Eigen::VectorXd B = V.path_from(e, zero);
    for (int i = 1; i <= 10; ++i) CHECK(B[i] == 0.0);
    for (int i = 12; i <= 64; i += 13) CHECK(B[i] > 0.0);  // K > 0 for H < 1/2
    // second moments reproduce t^2H
    for (int i : {1, 7, 32, 64}) {
        const double v = V.weights().row(i - 1).head(i).squaredNorm() * g.dt() +
                         V.aux_scale()[i - 1] * V.aux_scale()[i - 1];
        CHECK(v == doctest::Approx(std::pow(g.node(i), 0.6)).epsilon(2e-2));
    }
    CHECK_THROWS_AS(V.path_from(Eigen::VectorXd::Zero(3), zero), std::invalid_argument);
}

TEST_CASE("empirical covariance reproduces R") {
    const double H = 0.3;
    const auto c = hurst_config(H);
    const Grid g(64);
    const std::vector<int> nodes{8, 16, 32, 64};
    const int N = 20000;
    for (auto method : {FbmMethod::Cholesky, FbmMethod::Volterra}) {
        Eigen::MatrixXd vals(4, N);
        for (int k = 0; k < N; ++k) {
            const auto s = method == FbmMethod::Cholesky ? sample_cholesky(g, c, 1, 17, k) : sample_volterra(g, c, 1, 17, k);
            for (int a = 0; a < 4; ++a) vals(a, k) = s.path.samples()(0, nodes[a]);
        }
        const auto E = empirical_covariance(vals);
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) {
                const double R = oracle::fbm_cov(g.node(nodes[a]), g.node(nodes[b]), H);
                CHECK(std::abs(E(a, b) - R) <= 0.03);
            }
    }
    // trivial cases
    Eigen::MatrixXd same = Eigen::MatrixXd::Ones(3, 10);
    CHECK(empirical_covariance(same).isZero(0));
    Eigen::MatrixXd two(1, 2);
    two << 1.0, 3.0;
    CHECK(empirical_covariance(two)(0, 0) == 2.0);
    CHECK_THROWS_AS(empirical_covariance(Eigen::MatrixXd::Ones(2, 1)), std::invalid_argument);
    std::vector<FbmSample> ss{sample_cholesky(g, c, 2, 1, 0), sample_cholesky(g, c, 2, 1, 1)};
    CHECK_THROWS_AS(empirical_covariance(ss, {65}), std::invalid_argument);
    CHECK(empirical_covariance(ss, {0})(0, 0) == 0.0);
}
