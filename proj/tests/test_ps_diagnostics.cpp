#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "nsq/ps_diagnostics.hpp"
#include "nsq/action.hpp"
#include "nsq/verify.hpp"

using namespace nsq;
constexpr double kPi = std::numbers::pi;

TEST_CASE("smooth_once") {
    std::mt19937_64 rng(5);
    const int K = 8, M = default_grid(K);
    const FourierLoop x = random_loop(rng, 2, K, 1.0, 0.5);
    const FourierLoop y = smooth_once(x, *make_zero(), M);
    CHECK((y - project(x, Part::Zero)).coeffs().cwiseAbs().maxCoeff() <= 1e-15);
    FourierLoop c(1, K);
    c.coeff(1)[0] = 0.7;
    CHECK(hs_norm(smooth_once(c, *make_quadratic(kPi), M) - c, 0.5) <= 1e-9);
}

TEST_CASE("decay_fit") {
    FourierLoop y(1, 32);
    for (int k = 1; k <= 32; ++k) y.coeff(k)[0] = 1.0 / (double(k) * k);
    const DecayFit f = decay_fit(y);
    CHECK(f.exponent == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(f.residual >= 0.0);
    FourierLoop z(1, 8);
    z.coeff(0)[0] = 1.0;
    CHECK(decay_fit(z).exponent == std::numeric_limits<double>::infinity());

    std::mt19937_64 rng(1);
    FourierLoop x(2, 32);
    std::normal_distribution<double> nd;
    for (int k = -32; k <= 32; ++k)
        for (int i = 0; i < 4; ++i) x.coeff(k)[i] = (k == 0 ? 0.2 : 0.05 * std::pow(std::abs(k), -1.05)) * nd(rng);
    CHECK(decay_fit(grad_b_h12(x, *reference_K(2), default_grid(32))).exponent >= 1.4);
}

TEST_CASE("support classes") {
    const int d = 1, K = 8, M = default_grid(K);
    const HamPtr Kh = reference_K(d);
    const CappedK& Kc = *as_capped(*Kh);
    const double collar = measure_collar(Kc, d, 2000, 1.0, 3);
    CHECK(collar > 0.0);
    const double eta = 0.5 * collar;
    CHECK(classify_support(FourierLoop::zero(d, K), *Kh, eta, M) == Support::Inside);
    FourierLoop far(d, K);
    far.coeff(1)[0] = std::sqrt(Kc.rho().M_big);
    CHECK(classify_support(far, *Kh, eta, M) == Support::Outside);
    FourierLoop cross(d, K);
    cross.coeff(0)[0] = 0.5;
    cross.coeff(1)[0] = 0.5;
    CHECK(classify_support(cross, *Kh, eta, M) == Support::Straddling);
}

TEST_CASE("radial level sign") {
    const int K = 8, M = default_grid(K);
    const HamPtr Fp = make_F(build_g(0.05, 3.0, 4.0));
    const RadialF& F = dynamic_cast<const RadialF&>(*Fp);
    Vec v(2);
    v << 1.0, 0.6;
    const PSCandidate c = make_candidate(FourierLoop::constant(v, K), *Fp, M);
    CHECK(c.action == doctest::Approx(-F.value(v)).epsilon(1e-14));
    CHECK(level_sign_radial({c}, F, M).pass);

    PSCandidate fake = c;
    fake.action = 0.5;
    fake.grad_norm_h12 = 1e-8;
    CHECK_FALSE(level_sign_radial({fake}, F, M).pass);
    PSCandidate loud = c;
    loud.grad_norm_h12 = 1.0;
    const LevelVerdict lv = level_sign_radial({loud}, F, M);
    CHECK(lv.excluded == 1);
    CHECK_FALSE(lv.items[0].included);
}

TEST_CASE("quadratic-tail level sign") {
    const int d = 1, K = 8, M = default_grid(K);
    const HamPtr Kh = reference_K(d);
    const CappedK& Kc = *as_capped(*Kh);
    Vec v(2);
    v << 4.0, 0.0;  // q = 16, deep in the linear regime of rho
    const PSCandidate c = make_candidate(FourierLoop::constant(v, K), *Kh, M);
    CHECK(c.action == doctest::Approx(-Kc.rho().mu * 16.0).epsilon(1e-12));
    CHECK(c.action < 0.0);

    PSCandidate fake = c;
    fake.action = 0.5;
    fake.grad_norm_h12 = 1e-8;
    CHECK_FALSE(level_sign_quadratic_tail({fake}, Kc, M).pass);
}

TEST_CASE("boundedness probe") {
    const double mu = 3.5;
    CHECK(mode_operator(mu, 1.0, 1) == doctest::Approx(1.0 - 2 * mu / (2 * kPi)).epsilon(1e-14));
    CHECK(mode_operator(mu, 1.0, 1) != 0.0);
    CHECK(mode_operator(mu, 1.0, 0) == doctest::Approx(-2 * mu).epsilon(1e-14));
    const int d = 3;
    const HamPtr F = make_F(ramp_profile(0.0405, 0.9, 4.0));
    const HamPtr Kh = make_K(F, QuadraticQ{4}, build_rho(4.0, mu, 8.0), d);
    const BoundednessReport rep = boundedness_probe(*as_capped(*Kh), d, {32}, {});
    REQUIRE(rep.sigma.size() == 1);
    CHECK(rep.sigma[0] > 0.01);
}
