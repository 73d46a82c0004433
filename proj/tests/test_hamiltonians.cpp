#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nsq/hamiltonians.hpp"
#include "nsq/verify.hpp"

using namespace nsq;
constexpr double kPi = std::numbers::pi;

namespace {

Vec random_point(std::mt19937_64& rng, int dim, double scale) {
    std::normal_distribution<double> nd(0.0, 1.0);
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v[i] = scale * nd(rng);
    return v;
}

double fd_rel_error(const Hamiltonian& H, const Vec& x, std::mt19937_64& rng) {
    const Vec u = random_point(rng, int(x.size()), 1.0).normalized();
    const double eps = 1e-6;
    const double fd = (H.value(x + eps * u) - H.value(x - eps * u)) / (2 * eps);
    const double an = H.gradient(x).dot(u);
    return std::abs(fd - an) / std::max(1e-6, std::abs(an));
}

}  // namespace

TEST_CASE("build_g clamps and slope") {
    // (0.1, 2, 3.2) is above the quintic slope cap: 15/8 * 3.2 / 1.8 > pi
    const ProfileG u = ramp_profile(0.1, 2.0, 3.2);
    CHECK(u.value(0.05) == 0.0);
    CHECK(u.value(1.95) == 3.2);
    CHECK_THROWS_AS(build_g(0.1, 2.0, 3.2), ConstraintError);
    CHECK(minimal_feasible_r(0.1, 3.2) == doctest::Approx(0.2 + 15.0 * 3.2 / (8.0 * std::numbers::pi)).epsilon(1e-9));

    const ProfileG g = build_g(0.1, 2.2, 3.2);
    CHECK(g.value(0.05) == 0.0);
    CHECK(g.value(2.15) == 3.2);
    double slope = 0.0;
    for (int i = 0; i <= 10000; ++i) slope = std::max(slope, g.d1(2.5 * i / 10000.0));
    CHECK(slope < kPi);
    CHECK(slope <= g.max_slope() + 1e-12);
    CHECK_THROWS_AS(build_g(0.4, 1.0, 3.2), ConstraintError);
    // feasible interval but too steep: minimal r is reported in the message
    try {
        build_g(0.05, 1.5, 4.0);
        FAIL("expected a constraint error");
    } catch (const ConstraintError& e) {
        CHECK(std::string(e.what()).find("minimal") != std::string::npos);
    }
    CHECK(minimal_feasible_r(0.05, 4.0) > 1.5);
}

TEST_CASE("g is C^2 across the ramp ends") {
    const ProfileG g = build_g(0.1, 2.2, 3.2);
    for (double t : {g.delta, g.r - g.delta}) {
        CHECK(std::abs(g.d1(t - 1e-9) - g.d1(t + 1e-9)) < 1e-6);
        CHECK(std::abs(g.d2(t - 1e-9) - g.d2(t + 1e-9)) < 1e-5);
    }
}

TEST_CASE("build_rho") {
    CHECK_THROWS_AS(build_rho(3.2, 3.3, 8.0), DomainError);
    CHECK_THROWS_AS(build_rho(4.0, 3.0, 8.0), DomainError);
    const ProfileRho rho = build_rho(4.0, 3.5, 8.0);
    CHECK(rho.value(0.5) == 4.0);
    CHECK(rho.value(20.0) == doctest::Approx(70.0).epsilon(1e-14));
    for (int i = 0; i <= 10000; ++i) {
        const double t = 16.0 * i / 10000.0;
        CHECK(rho.value(t) >= 3.5 * t - 1e-12);
    }
    for (double t : {1.0, rho.M_big}) {
        CHECK(std::abs(rho.value(t - 1e-9) - rho.value(t + 1e-9)) < 1e-7);
        CHECK(std::abs(rho.d1(t - 1e-9) - rho.d1(t + 1e-9)) < 1e-6);
    }
}

TEST_CASE("F") {
    const HamPtr F = make_F(build_g(0.05, 3.0, 4.0));
    const Vec z = Vec::Zero(4);
    CHECK(F->value(z) == 0.0);
    CHECK(F->gradient(z).norm() == 0.0);
    Vec far = Vec::Zero(4);
    far[1] = std::sqrt(3.0 - 0.05);
    CHECK(F->value(far) == 4.0);
    CHECK(F->gradient(far).norm() == 0.0);
    std::mt19937_64 rng(9);
    for (int i = 0; i < 100; ++i) CHECK(fd_rel_error(*F, random_point(rng, 4, 0.8), rng) <= 1e-5);
}

TEST_CASE("K: plateau, quadratic regime, continuity") {
    const int d = 2;
    // the shell test needs F = m on 0.9 <= q <= 1.1, so the ball must sit inside q < 0.9
    const HamPtr F = make_F(ramp_profile(0.02, 0.4, 4.0));
    const QuadraticQ q{2};
    const ProfileRho rho = build_rho(4.0, 3.5, 8.0);
    const HamPtr K = make_K(F, q, rho, d);
    Vec x = Vec::Zero(4);
    x[0] = std::sqrt(0.5);
    CHECK(K->value(x) == doctest::Approx(4.0).epsilon(1e-15));
    Vec y = Vec::Zero(4);
    y[2] = 2.0 * std::sqrt(12.0);  // tail pair, weight 1/N^2: q = 12
    CHECK(q.value(y) == doctest::Approx(12.0).epsilon(1e-14));
    CHECK(K->value(y) == doctest::Approx(3.5 * 12.0).epsilon(1e-14));
    CHECK((K->gradient(y) - 2 * 3.5 * q.apply(y)).norm() <= 1e-12);

    std::mt19937_64 rng(4);
    double jump = 0.0;
    for (int i = 0; i < 50; ++i) {
        Vec u = random_point(rng, 4, 1.0);
        u /= std::sqrt(q.value(u));
        jump = std::max(jump, std::abs(K->value((1 + 1e-12) * u) - K->value((1 - 1e-12) * u)));
    }
    CHECK(jump <= 1e-9);
    for (int i = 0; i < 100; ++i) CHECK(fd_rel_error(*K, random_point(rng, 4, 1.5), rng) <= 1e-5);
}

TEST_CASE("K shell check failure names the point") {
    // r too small: the inner Hamiltonian is below m on part of the shell
    const HamPtr F = make_F(ramp_profile(0.05, 1.5, 4.0));
    try {
        make_K(F, QuadraticQ{1}, build_rho(4.0, 3.5, 8.0), 2);
        FAIL("expected a constraint error");
    } catch (const ConstraintError& e) {
        CHECK(std::string(e.what()).find("shell") != std::string::npos);
    }
    Vec w;
    CHECK_FALSE(shell_check(*F, QuadraticQ{1}, 4.0, 2, ShellCheck{}, &w));
    CHECK(w.size() == 4);
}

TEST_CASE("restriction") {
    const int d = 3;
    const HamPtr K = reference_K(d);
    CHECK_THROWS_AS(restrict_to(K, 4, d), DimensionError);
    const HamPtr K3 = restrict_to(K, 3, d);
    std::mt19937_64 rng(8);
    for (int i = 0; i < 20; ++i) {
        const Vec x = random_point(rng, 6, 1.0);
        CHECK(K3->value(x) == K->value(x));
    }
    const HamPtr K1 = restrict_to(K, 1, d);
    Vec tail = Vec::Zero(6);
    tail[3] = 4.0;
    tail[5] = -2.0;
    CHECK(K1->value(tail) == K->value(Vec::Zero(6)));
    for (int i = 0; i < 20; ++i) {
        const Vec x = random_point(rng, 6, 1.0);
        const Vec Px = project_ambient(x, 1);
        CHECK((K1->gradient(x) - project_ambient(K->gradient(Px), 1)).norm() == 0.0);
    }
    CHECK(as_capped(*K1) == as_capped(*K));
}

TEST_CASE("catalogue gradients are consistent pointwise") {
    std::mt19937_64 rng(21);
    for (const auto& [label, H] : hamiltonian_catalogue(2)) {
        CAPTURE(label);
        for (int i = 0; i < 20; ++i) CHECK(fd_rel_error(*H, random_point(rng, 4, 0.7), rng) <= 1e-5);
    }
}
