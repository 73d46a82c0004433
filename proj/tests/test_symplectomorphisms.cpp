#include <doctest.h>

#include <cmath>
#include <random>

#include "nsq/symplectomorphisms.hpp"
#include "nsq/action.hpp"
#include "nsq/verify.hpp"

using namespace nsq;

TEST_CASE("catalogue maps are symplectic with exact inverses") {
    const int d = 3;
    BumpFlowParams bp;
    bp.n0 = 2;
    const std::vector<std::pair<std::string, MapPtr>> maps = {
        {"identity", make_identity(d)},
        {"rotation", make_rotation(d, {0.3, -0.4, 1.1})},
        {"shear", make_shear(d, 0.5)},
        {"mixing", make_mixing(d, 0.2, spread_vector(d, false))},
        {"plane_wave", make_plane_wave(d, 0.05, spread_vector(d, true))},
        {"bump", make_bump_flow(d, bp)},
        {"elementary", elementary_decompose_example(d, 1, 0.01)},
        {"composition", make_composition({make_shear(d, 0.3), make_rotation(d, {0.2})})},
        {"inverse", make_inverse(make_shear(d, 0.5))}};
    for (const auto& [label, phi] : maps) {
        CAPTURE(label);
        const MapChecks c = check_map(*phi, 1.5, 50, 3);
        CHECK(c.symplectic_err <= 1e-9);
        CHECK(c.inverse_err <= 1e-9);
    }
}

TEST_CASE("push_loop") {
    std::mt19937_64 rng(4);
    const int d = 2, K = 8, M = default_grid(K);
    const FourierLoop x = random_loop(rng, d, K, 0.5, 1.0);
    CHECK((push_loop(*make_identity(d), x, K, M) - x).coeffs().cwiseAbs().maxCoeff() <= 1e-14);

    const MapPtr R = make_rotation(d, {0.7, 0.7});
    const FourierLoop y = push_loop(*R, x, K, M);
    const Mat L = rotation_matrix(d, 0.7);
    for (int k = -K; k <= K; ++k) CHECK((y.coeff(k) - L * x.coeff(k)).norm() <= 1e-13);
    CHECK(hs_norm(y, 0.5) == doctest::Approx(hs_norm(x, 0.5)).epsilon(1e-13));

    Vec v(4);
    v << 0.2, -0.1, 0.5, 0.3;
    const MapPtr P = make_plane_wave(d, 0.1, spread_vector(d, true));
    const FourierLoop c = push_loop(*P, FourierLoop::constant(v, K), K, M);
    CHECK((c.coeff(0) - P->forward(v)).norm() <= 1e-14);
    for (int k = 1; k <= K; ++k) CHECK(c.coeff(k).norm() + c.coeff(-k).norm() <= 1e-14);
}

TEST_CASE("action transport") {
    std::mt19937_64 rng(6);
    const int d = 2, K = 32, M = default_grid(K);
    const FourierLoop x = random_loop(rng, d, K, 0.4, 2.0);
    const HamPtr Q = make_quadratic(3.5);
    const auto [a0, b0] = action_transport_check(make_identity(d), Q, x, M);
    CHECK(a0 == b0);
    const auto [a1, b1] = action_transport_check(make_rotation(d, {0.4, -0.9}), Q, x, M);
    CHECK(std::abs(a1 - b1) <= 1e-10);
    const auto [a2, b2] = action_transport_check(make_shear(d, 0.5), Q, x, M);
    CHECK(std::abs(a2 - b2) <= 1e-8);
}

TEST_CASE("admissibility of linear block maps and the elementary example") {
    const AdmissibilityReport r = admissibility_scan(*make_rotation(3, {0.2, 0.5, 0.9}), 1.0, {1, 2, 3}, 20, 1);
    for (const auto& row : r.rows) {
        CHECK(row.comm_forward == 0.0);
        CHECK(row.comm_inverse == 0.0);
        CHECK(row.proj_forward == 0.0);
        CHECK(row.proj_inverse == 0.0);
    }
    CHECK_FALSE(r.flagged);

    BumpFlowParams bp;
    bp.n0 = 1;
    const AdmissibilityReport b = admissibility_scan(*make_bump_flow(3, bp), 1.0, {1, 2, 3}, 20, 1);
    for (const auto& row : b.rows) {
        CHECK(row.proj_forward == 0.0);
        CHECK(row.proj_inverse == 0.0);
        CHECK(row.comm_forward >= 0.0);
    }
    CHECK(admissibility_scan(*make_mixing(4, 0.3, spread_vector(4, false)), 1.0, {1, 2, 3, 4}, 20, 1).flagged);
    const std::string csv = admissibility_csv(b);
    CHECK(csv.rfind("n,proj_forward,proj_inverse,comm_forward,comm_inverse", 0) == 0);
}

TEST_CASE("commutator norm of block-diagonal matrices vanishes") {
    const Mat A = rotation_matrix(3, 0.4);
    CHECK(commutator_norm(A, 1) == 0.0);
    Mat B = A;
    B(0, 4) = 0.25;
    CHECK(commutator_norm(B, 1) == doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("the symplectic transport bound is tight for rotations") {
    CHECK(pushforward_gradient_bound(*make_rotation(2, {0.5, 1.0}), 2, 8) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pushforward_gradient_bound(*make_shear(2, 0.5), 2, 8) > 1.0);
}
