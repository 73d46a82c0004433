#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nsq/minimax_flow.hpp"
#include "nsq/verify.hpp"

using namespace nsq;
constexpr double kPi = std::numbers::pi;

TEST_CASE("linear flow for H = 0") {
    const int K = 6, M = default_grid(K);
    const double h = 0.1;
    const FourierLoop ep = e_plus(1, K);
    CHECK((flow_step(ep, *make_zero(), h, M) - std::exp(-h) * ep).coeffs().cwiseAbs().maxCoeff() == 0.0);
    FourierLoop m(1, K);
    m.coeff(-1) << 0.3, -0.5;
    CHECK((flow_step(m, *make_zero(), h, M) - std::exp(h) * m).coeffs().cwiseAbs().maxCoeff() <= 1e-16);
}

TEST_CASE("sigma samples") {
    LinkingSets sets;
    sets.d = 2;
    sets.K = 6;
    sets.tau = 3.0;
    const auto ends = sample_sigma(sets, 2, SigmaCounts{0, 0, 2});
    REQUIRE(ends.size() == 2);
    CHECK(ends[0].x.coeffs().norm() == 0.0);
    CHECK((ends[1].x - 3.0 * e_plus(2, 6)).coeffs().norm() <= 1e-15);

    const auto all = sample_sigma(sets, 1, SigmaCounts{});
    for (const auto& s : all) {
        const FourierLoop plus = project(s.x, Part::Plus);
        const FourierLoop rest = s.x - plus;
        CHECK(s.s >= 0.0);
        CHECK(s.s <= sets.tau + 1e-12);
        CHECK(hs_norm(rest, 0.5) <= sets.tau + 1e-12);
        CHECK((plus - s.s * sets.eplus()).coeffs().norm() <= 1e-12);
        // only the first ambient pair is touched
        CHECK(s.x.coeffs().bottomRows(2).norm() == 0.0);
    }
    for (const auto& s : sample_sigma_boundary(sets, 1, SigmaCounts{})) {
        const double r = hs_norm(s.x - project(s.x, Part::Plus), 0.5);
        const bool face = s.s <= 1e-12 || std::abs(s.s - sets.tau) <= 1e-12 || std::abs(r - sets.tau) <= 1e-9;
        CHECK(face);
    }
}

TEST_CASE("gamma samples lie on the sphere") {
    LinkingSets sets;
    sets.d = 2;
    sets.K = 6;
    sets.alpha = 0.4;
    const auto g = sample_gamma(sets, 2, 32);
    CHECK((g.front() - 0.4 * sets.eplus()).coeffs().norm() <= 1e-15);
    for (const auto& x : g) {
        CHECK(hs_norm(x, 0.5) == doctest::Approx(0.4).epsilon(1e-12));
        CHECK((project(x, Part::Plus) - x).coeffs().norm() <= 1e-15);
    }
}

TEST_CASE("H = 0 minimax collapses to 0 and stays monotone") {
    LinkingSets sets;
    sets.d = 1;
    sets.K = 6;
    sets.tau = 1.0;
    FlowConfig fc;
    fc.T = 6.0;
    fc.h = 0.05;
    fc.counts = {3, 2, 5};
    const MinimaxTrace tr = estimate_minimax(*make_zero(), sets, 1, fc);
    CHECK(tr.c_estimate <= 1e-4);
    CHECK(tr.c_estimate >= 0.0);
    for (size_t i = 1; i < tr.sup_estimates.size(); ++i) CHECK(tr.sup_estimates[i] <= tr.sup_estimates[i - 1] + 1e-6);
    CHECK(tr.times.size() == tr.witness_grad.size());
    CHECK(tr.ray_chain.size() == tr.times.size());
}

TEST_CASE("t = 0 linking point") {
    LinkingSets sets;
    sets.d = 1;
    sets.K = 6;
    sets.alpha = 0.25;
    sets.tau = 1.0;
    FlowConfig fc;
    fc.T = 0.5;
    fc.h = 0.05;
    fc.counts = {2, 2, 5};
    const MinimaxTrace tr = estimate_minimax(*make_zero(), sets, 1, fc);
    const LinkingResult lr = check_linking(tr, sets, 1e-2);
    REQUIRE(!lr.distance.empty());
    CHECK(lr.distance.front() <= 1e-12);
}

TEST_CASE("blow-up is reported") {
    LinkingSets sets;
    sets.d = 1;
    sets.K = 4;
    sets.tau = 4.0;
    FlowConfig fc;
    fc.T = 20.0;
    fc.h = 0.05;
    fc.counts = {2, 2, 3};
    fc.blowup = 10.0;
    CHECK_THROWS_AS(estimate_minimax(*make_quadratic(-50.0), sets, 1, fc), BlowUpError);
}

TEST_CASE("Newton on the harmonic oscillator") {
    const int K = 8, M = default_grid(K);
    const HamPtr H = make_quadratic(kPi);
    FourierLoop c(1, K);
    c.coeff(1)[0] = 0.6;
    const NewtonResult exact = refine_newton(c, *H, 10, M);
    CHECK(exact.residual <= 1e-12);
    CHECK((exact.loop - c).coeffs().norm() <= 1e-12);

    std::mt19937_64 rng(31);
    FourierLoop p = c + 0.06 * random_loop(rng, 1, K, 1.0, 1.0);
    const NewtonResult nr = refine_newton(p, *H, 30, M);
    CHECK(nr.residual <= 1e-10);
    CHECK(nr.initial_residual > nr.residual);
}

TEST_CASE("sweeps terminate on the capped Hamiltonian") {
    const HamPtr K = reference_K(1);
    const int M = default_grid(8);
    LinkingSets sets;
    sets.d = 1;
    sets.K = 8;
    const SweepResult t = tau_sweep(*K, sets, 1, SigmaCounts{}, M);
    CHECK_FALSE(t.hit_bound);
    CHECK(t.objective <= 0.0);
    sets.tau = t.value;
    const SweepResult a = alpha_sweep(*K, sets, 1, 32, M);
    CHECK_FALSE(a.hit_bound);
    CHECK(a.objective > 0.0);
}
