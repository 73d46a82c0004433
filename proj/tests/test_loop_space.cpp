#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nsq/loop_space.hpp"
#include "nsq/verify.hpp"

using namespace nsq;
constexpr double kPi = std::numbers::pi;

TEST_CASE("J and rotations") {
    const SymplecticSpace S(2);
    const Mat J = S.J();
    CHECK((J * J + Mat::Identity(4, 4)).norm() < 1e-15);
    Vec e = Vec::Zero(4);
    e[0] = 1.0;
    const Vec f = apply_J(e);
    CHECK(f[1] == 1.0);
    CHECK((J * e - f).norm() == 0.0);
    CHECK((rotation_matrix(2, 0.3) * e - rotate(e, 0.3)).norm() < 1e-15);
    CHECK((rotation_matrix(2, kPi / 2) * e - f).norm() < 1e-15);
}

TEST_CASE("hs norms of basic loops") {
    FourierLoop x(1, 4);
    x.coeff(1)[0] = 1.0;
    CHECK(hs_norm(x, 0.5) * hs_norm(x, 0.5) == doctest::Approx(2 * kPi).epsilon(1e-14));
    const FourierLoop ep = e_plus(1, 4);
    CHECK(hs_norm(ep, 0.5) * hs_norm(ep, 0.5) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(l2_norm(ep) * l2_norm(ep) == doctest::Approx(1.0 / (2 * kPi)).epsilon(1e-14));
    Vec v(2);
    v << 0.3, -1.2;
    const FourierLoop c = FourierLoop::constant(v, 5);
    for (double s : {0.0, 0.5, 1.0, 2.0}) CHECK(hs_norm(c, s) == doctest::Approx(v.norm()).epsilon(1e-15));
    CHECK(l2_norm(c) == doctest::Approx(v.norm()).epsilon(1e-15));
}

TEST_CASE("dimension mismatch is rejected") {
    CHECK_THROWS_AS(hs_inner(FourierLoop(1, 3), FourierLoop(2, 3), 0.5), DimensionError);
    CHECK_THROWS_AS(l2_inner(FourierLoop(1, 3), FourierLoop(2, 3)), DimensionError);
}

TEST_CASE("mismatched K is zero-padded") {
    std::mt19937_64 rng(3);
    const FourierLoop x = random_loop(rng, 2, 4, 1.0, 1.0);
    const FourierLoop y = random_loop(rng, 2, 7, 1.0, 1.0);
    CHECK(hs_inner(x, y, 0.5) == doctest::Approx(hs_inner(x.with_order(7), y, 0.5)).epsilon(1e-14));
}

TEST_CASE("l2 inner product against trapezoid quadrature") {
    std::mt19937_64 rng(5);
    const FourierLoop x = random_loop(rng, 2, 8, 1.0, 0.5);
    const FourierLoop y = random_loop(rng, 2, 8, 1.0, 0.5);
    const int M = 64;
    double q = 0.0;
    for (int j = 0; j < M; ++j) q += x.eval(double(j) / M).dot(y.eval(double(j) / M)) / M;
    CHECK(std::abs(q - l2_inner(x, y)) <= 1e-12);
}

TEST_CASE("slobodeckij seminorm") {
    Vec v(2);
    v << 1.0, 2.0;
    CHECK(slobodeckij_seminorm(FourierLoop::constant(v, 4), 0.5, 64) == doctest::Approx(0.0).epsilon(1e-15));
    const FourierLoop ep = e_plus(1, 4);
    const double a = slobodeckij_seminorm(ep, 0.5, 128);
    CHECK(std::isfinite(a));
    CHECK(a > 0.0);
    CHECK(slobodeckij_seminorm(2.0 * ep, 0.5, 128) == doctest::Approx(2 * a).epsilon(1e-12));
    CHECK_THROWS_AS(slobodeckij_seminorm(ep, 0.0, 64), DomainError);
    CHECK_THROWS_AS(slobodeckij_seminorm(ep, 1.0, 64), DomainError);

    // equivalence with the Fourier norm over a loop family: the ratio stays in a fixed band
    std::mt19937_64 rng(11);
    double lo = 1e300, hi = 0.0;
    for (int i = 0; i < 20; ++i) {
        const FourierLoop x = random_loop(rng, 1, 8, 1.0, 1.5);
        const double ratio = hs_norm(x, 0.5) / (l2_norm(x) + slobodeckij_seminorm(x, 0.5, 128));
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
    }
    const double re = hs_norm(ep, 0.5) / (l2_norm(ep) + a);
    CHECK(lo > 0.0);
    CHECK(hi / lo < 10.0);
    CHECK(re > 0.0);
}

TEST_CASE("projections") {
    Vec v(2);
    v << 1.0, 2.0;
    const FourierLoop c = FourierLoop::constant(v, 3);
    CHECK(hs_norm(project(c, Part::Plus), 0.5) == 0.0);
    const FourierLoop ep = e_plus(1, 3);
    CHECK((project(ep, Part::Plus) - ep).coeffs().norm() == 0.0);
    std::mt19937_64 rng(7);
    const FourierLoop x = random_loop(rng, 3, 6, 1.0, 0.0);
    const FourierLoop sum = project(x, Part::Plus) + project(x, Part::Zero) + project(x, Part::Minus);
    CHECK((sum - x).coeffs().cwiseAbs().maxCoeff() == 0.0);
    CHECK(project_mode(x, 9).coeffs().norm() == 0.0);
    CHECK((project_mode(x, -2).coeff(-2) - x.coeff(-2)).norm() == 0.0);
    const FourierLoop p1 = project_ambient(x, 1);
    CHECK(p1.coeffs().bottomRows(4).norm() == 0.0);
    CHECK((p1.coeffs().topRows(2) - x.coeffs().topRows(2)).norm() == 0.0);
}

TEST_CASE("t_star") {
    FourierLoop y(1, 4);
    Vec v(2);
    v << 0.7, -0.2;
    y.coeff(3) = v;
    const FourierLoop t = t_star(y, 0.5);
    CHECK((t.coeff(3) - v / (6 * kPi)).norm() <= 1e-16);
    const FourierLoop c = FourierLoop::constant(v, 4);
    CHECK((t_star(c, 0.5) - c).coeffs().norm() == 0.0);
    std::mt19937_64 rng(1);
    for (int i = 0; i < 50; ++i) {
        const FourierLoop a = random_loop(rng, 2, 16, 1.0, 0.0), b = random_loop(rng, 2, 16, 1.0, 0.0);
        CHECK(std::abs(hs_inner(t_star(b, 0.5), a, 0.5) - l2_inner(b, a)) <= 1e-10);
    }
}

TEST_CASE("sample / analyze") {
    std::mt19937_64 rng(2);
    const FourierLoop x = random_loop(rng, 2, 8, 1.0, 0.0);
    const FourierLoop back = analyze(sample(x, 32), 8);
    CHECK((back - x).coeffs().cwiseAbs().maxCoeff() <= 1e-12);
    CHECK_THROWS_AS(analyze(sample(x, 16), 8), AliasingError);

    Vec v(2);
    v << 0.5, 1.5;
    const GridSamples g = sample(FourierLoop::constant(v, 3), 10);
    for (int j = 0; j < 10; ++j) CHECK((g.values.col(j) - v).norm() <= 1e-15);

    const GridSamples q = sample(e_plus(1, 2), 4);
    const double s = 1.0 / std::sqrt(2 * kPi);
    Mat expect(2, 4);
    expect << s, 0, -s, 0, 0, s, 0, -s;
    CHECK((q.values - expect).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("derivative of e_plus") {
    const FourierLoop ep = e_plus(1, 3);
    const FourierLoop dx = derivative(ep);
    const double t = 0.137;
    const double h = 1e-6;
    const Vec fd = (ep.eval(t + h) - ep.eval(t - h)) / (2 * h);
    CHECK((dx.eval(t) - fd).norm() < 1e-8);
}
