#include "doctest.h"

#include "omfbm/grid.hpp"

#include <random>
#include <sstream>
#include <stdexcept>

using namespace omfbm;

namespace {

Path identity(int n) { return Path::from_function(Grid(n), [](double t) { return t; }); }

Path random_walk(const Grid& g, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> N(0.0, scale * std::sqrt(g.dt()));
    Eigen::MatrixXd s(1, g.size());
    s(0, 0) = 0.0;
    for (int j = 1; j < g.size(); ++j) s(0, j) = s(0, j - 1) + N(rng);
    return Path(g, s);
}

}  // namespace

TEST_CASE("grid nodes") {
    const Grid g2 = make_grid(2);
    CHECK(g2.node(0) == 0.0);
    CHECK(g2.node(1) == 0.5);
    CHECK(g2.node(2) == 1.0);
    CHECK(make_grid(4).dt() == 0.25);
    CHECK(make_grid(1024).node(512) == 0.5);
    CHECK(make_grid(1000).node(1000) == 1.0);
    CHECK_THROWS_AS(make_grid(1), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(0), std::invalid_argument);
}

TEST_CASE("path validation") {
    const Grid g(4);
    CHECK_THROWS_AS(Path(g, Eigen::MatrixXd::Zero(1, 4)), std::invalid_argument);
    Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(1, 5);
    bad(0, 2) = std::nan("");
    CHECK_THROWS_AS(Path(g, bad), std::invalid_argument);
    CHECK(Path::zeros(g, 3).is_pinned());
    CHECK(!Path::from_function(g, [](double t) { return 1 + t; }).is_pinned());
}

TEST_CASE("sup norm") {
    const Grid g(8);
    CHECK(sup_norm(Path::zeros(g, 1)) == 0.0);
    CHECK(sup_norm(identity(8)) == 1.0);
    Eigen::MatrixXd s(2, g.size());
    for (int j = 0; j < g.size(); ++j) {
        s(0, j) = g.node(j);
        s(1, j) = -g.node(j);
    }
    CHECK(sup_norm(Path(g, s)) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("hoelder norm") {
    CHECK(holder_norm(Path::zeros(Grid(16), 1), 0.3) == 0.0);
    CHECK(holder_norm(identity(2), 0.5) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(holder_norm(identity(2), 0.0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK_THROWS_AS(holder_norm(identity(4), 1.0), std::invalid_argument);
    // d = 2 uses Euclidean increments
    const Grid g(4);
    Eigen::MatrixXd s(2, 5);
    for (int j = 0; j < 5; ++j) s.col(j) << g.node(j), g.node(j);
    CHECK(holder_norm(Path(g, s), 0.0) == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("norm properties on random paths") {
    std::mt19937_64 rng(7);
    const Grid g(128);
    for (int k = 0; k < 10; ++k) {
        const Path p = random_walk(g, rng), q = random_walk(g, rng);
        for (const NormKind nk : {NormKind::sup(), NormKind::holder(0.2), NormKind::holder(0.4), NormKind::sobolev(0.7)}) {
            const double np = path_norm(p, nk);
            CHECK(path_norm(p * -2.5, nk) == doctest::Approx(2.5 * np).epsilon(1e-12));
            CHECK(path_norm(p + q, nk) <= np + path_norm(q, nk) + 1e-12 * (1 + np));
        }
        double prev = 0.0;
        for (double a : {0.0, 0.1, 0.2, 0.3, 0.45}) {
            const double v = holder_norm(p, a);
            CHECK(v >= prev - 1e-14);
            prev = v;
        }
    }
}

TEST_CASE("fractional Sobolev norm") {
    CHECK(frac_sobolev_norm(Path::zeros(Grid(32), 1), 0.7) == 0.0);
    const Path p = identity(256);
    CHECK(frac_sobolev_norm(p * 2.0, 0.8) == doctest::Approx(2 * frac_sobolev_norm(p, 0.8)).epsilon(1e-13));
    // refinement oracle: 10x finer grid
    const double coarse = frac_sobolev_norm(p, 0.8), fine = frac_sobolev_norm(identity(2560), 0.8);
    CHECK(std::abs(coarse - fine) <= 0.02 * fine);
    // closed form for the identity path with denominator |t-s|^(1+2a): 2 int_0^1 (1-x) x^(1-2a) dx
    const double a = 0.8, exact = std::sqrt(2.0 / ((2 - 2 * a) * (3 - 2 * a)));
    CHECK(fine == doctest::Approx(exact).epsilon(1e-2));
    CHECK_THROWS_AS(frac_sobolev_norm(p, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(frac_sobolev_norm(p, 1.0), std::invalid_argument);
}

TEST_CASE("Sobolev norm with a steeper denominator grows under refinement") {
    // beta = 2 + 2 alpha diverges for smooth paths; the discrete sum must keep growing
    const double a = 0.8, beta = 2 + 2 * a;
    const double v1 = frac_sobolev_norm(identity(64), a, beta);
    const double v2 = frac_sobolev_norm(identity(128), a, beta);
    const double v3 = frac_sobolev_norm(identity(256), a, beta);
    CHECK(std::isfinite(v3));
    CHECK(v2 > v1);
    CHECK(v3 > v2);
}

TEST_CASE("norm refinement consistency") {
    auto f = [](double t) { return std::pow(t, 0.3) - t; };
    for (const NormKind nk : {NormKind::sup(), NormKind::holder(0.2)}) {
        const double a = path_norm(Path::from_function(Grid(512), f), nk);
        const double b = path_norm(Path::from_function(Grid(1024), f), nk);
        CHECK(std::abs(a - b) < 0.02 * b);
    }
}

TEST_CASE("norm parsing") {
    CHECK(parse_norm("sup").kind == NormKind::Kind::Sup);
    const NormKind h = parse_norm("holder:0.25");
    CHECK(h.kind == NormKind::Kind::Holder);
    CHECK(h.alpha == 0.25);
    CHECK(parse_norm("sobolev:0.8").kind == NormKind::Kind::FracSobolev);
    CHECK(parse_norm(to_string(h)).alpha == 0.25);
    CHECK_THROWS_AS(parse_norm("l2"), std::invalid_argument);
    CHECK_THROWS_AS(parse_norm("holder:1.5"), std::invalid_argument);
    CHECK_THROWS_AS(parse_norm("holder:x"), std::invalid_argument);
    CHECK(NormKind::sup().smallball_exponent(0.35) == doctest::Approx(1 / 0.35));
    CHECK(NormKind::holder(0.1).smallball_exponent(0.35) == doctest::Approx(4.0));
}

TEST_CASE("path CSV roundtrip is exact") {
    std::mt19937_64 rng(9);
    const Grid g(37);
    Eigen::MatrixXd s = Eigen::MatrixXd::Random(3, g.size());
    s.col(0).setZero();
    const Path p(g, s);
    std::stringstream ss;
    write_path_csv(ss, p);
    const std::string text = ss.str();
    CHECK(text.rfind("t,x1,x2,x3\n", 0) == 0);
    const Path q = read_path_csv(ss);
    CHECK(q.grid() == g);
    CHECK(q.samples() == p.samples());

    std::stringstream broken("t,x1\n0,0\n0.3,1\n1,2\n");
    CHECK_THROWS_AS(read_path_csv(broken), std::invalid_argument);
}
