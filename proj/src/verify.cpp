#include "nsq/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <Eigen/SVD>

#include "nsq/action.hpp"
#include "nsq/minimax_flow.hpp"
#include "nsq/nonsqueeze.hpp"
#include "nsq/ps_diagnostics.hpp"

namespace nsq {

namespace {

constexpr double kPi = std::numbers::pi;

// x^k entries for the test loops of a given regularity: |x^k| ~ |k|^{-p}
FourierLoop shaped_loop(std::mt19937_64& rng, int d, int K, double base, double tail, double p) {
    std::normal_distribution<double> nd(0.0, 1.0);
    FourierLoop x(d, K);
    for (int k = -K; k <= K; ++k) {
        Vec v(2 * d);
        for (int i = 0; i < 2 * d; ++i) v[i] = nd(rng);
        v.normalize();
        const int a = std::abs(k);
        const double w = a == 0 ? 0.3 * base : a == 1 ? base : tail * std::pow(double(a), -p);
        x.coeff(k) = w * v;
    }
    return x;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

FourierLoop random_loop(std::mt19937_64& rng, int d, int K, double amp, double p) {
    std::normal_distribution<double> nd(0.0, 1.0);
    FourierLoop x(d, K);
    for (int k = -K; k <= K; ++k) {
        const double w = amp / std::pow(1.0 + std::abs(k), p);
        for (int i = 0; i < 2 * d; ++i) x.coeff(k)[i] = w * nd(rng);
    }
    return x;
}

HamPtr reference_K(int d) {
    const double r = 0.9;
    HamPtr inner = make_F(ramp_profile(0.05 * r * r, r, 4.0));
    return make_K(inner, QuadraticQ{1}, build_rho(4.0, 3.5, 8.0), d);
}

std::vector<std::pair<std::string, HamPtr>> hamiltonian_catalogue(int d) {
    std::vector<std::pair<std::string, HamPtr>> c;
    c.emplace_back("zero", make_zero());
    c.emplace_back("quadratic", make_quadratic(3.5));
    c.emplace_back("radial_F", make_F(build_g(0.05, 3.0, 4.0)));
    c.emplace_back("radial_F_steep", make_F(ramp_profile(0.0405, 0.9, 4.0)));
    HamPtr K = reference_K(d);
    c.emplace_back("capped_K", K);
    if (d >= 2) c.emplace_back("restricted_K1", restrict_to(K, 1, d));
    c.emplace_back("pushforward_F_shear", pushforward(make_F(build_g(0.05, 3.0, 4.0)), make_shear(d, 0.5)));
    c.emplace_back("pushforward_F_plane_wave",
                   pushforward(make_F(build_g(0.05, 3.0, 4.0)), make_plane_wave(d, 0.1, spread_vector(d, true))));
    return c;
}

double pushforward_gradient_bound(const Symplectomorphism& L, int d, int K) {
    const int M = default_grid(K);
    const int dim = 2 * d, nc = dim * (2 * K + 1);
    const MapPtr inv = make_inverse(std::shared_ptr<const Symplectomorphism>(&L, [](const Symplectomorphism*) {}));
    Mat P(nc, nc);
    for (int j = 0; j < nc; ++j) {
        FourierLoop e(d, K);
        e.coeffs().data()[j] = 1.0;
        const FourierLoop y = push_loop(*inv, e, K, M);
        P.col(j) = Eigen::Map<const Vec>(y.coeffs().data(), nc);
    }
    Vec w(nc);
    for (int k = -K; k <= K; ++k)
        for (int i = 0; i < dim; ++i) w[(k + K) * dim + i] = k == 0 ? 1.0 : std::sqrt(2.0 * kPi * std::abs(k));
    const Mat S = w.asDiagonal() * P * w.cwiseInverse().asDiagonal();
    Eigen::JacobiSVD<Mat> svd(S);
    return svd.singularValues()[0];
}

SuiteResult verify_adjoint(unsigned long long seed) {
    SuiteResult r;
    r.name = "adjoint";
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> dd(1, 3), kd(1, 32);
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const int d = dd(rng), K = kd(rng);
        const FourierLoop x = random_loop(rng, d, K, 1.0, 0.0);
        const FourierLoop y = random_loop(rng, d, K, 1.0, 0.0);
        worst = std::max(worst, std::abs(hs_inner(t_star(y, 0.5), x, 0.5) - l2_inner(y, x)));
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.metric("max_abs_error", worst);
    r.metric("pairs", 1000);
    r.metric("seconds", secs);
    r.require(worst <= 1e-10, "adjoint identity within 1e-10");
    r.require(secs < 5.0, "runtime under 5 s");
    return r;
}

SuiteResult verify_gradient(unsigned long long seed) {
    SuiteResult r;
    r.name = "gradient";
    const int d = 2, K = 16, M = default_grid(K);
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    for (const auto& [label, H] : hamiltonian_catalogue(d)) {
        double w = 0.0;
        for (int trial = 0; trial < 5; ++trial) {
            FourierLoop x = shaped_loop(rng, d, K, 0.35, 0.05, 2.0);
            const FourierLoop g = grad_h12(x, *H, M);
            // direction with a guaranteed large component along the gradient
            FourierLoop u = random_loop(rng, d, K, 1.0, 1.5);
            u *= 1.0 / hs_norm(u, 0.5);
            const double gn = hs_norm(g, 0.5);
            if (gn > 0.0) u += (1.0 / gn) * g;
            const double an = hs_inner(g, u, 0.5);
            const double eps = 1e-5;
            const double fd = (action(x + eps * u, *H, M) - action(x - eps * u, *H, M)) / (2.0 * eps);
            w = std::max(w, rel(fd, an));
        }
        r.metric(label, w);
        worst = std::max(worst, w);
    }
    r.metric("max_rel_error", worst);
    r.require(worst <= 1e-5, "finite differences agree within 1e-5 for the whole catalogue");
    return r;
}

SuiteResult verify_decay(unsigned long long seed) {
    SuiteResult r;
    r.name = "decay";
    const int d = 2;
    const HamPtr K = reference_K(d);
    bool ok = true;
    for (double s : {0.5, 1.0}) {
        std::mt19937_64 rng(seed + (s > 0.75 ? 1 : 0));
        // coefficients just inside H^s
        const FourierLoop x64 = shaped_loop(rng, d, 64, 0.45, 0.05, s + 0.5 + 0.05);
        double p[2];
        int i = 0;
        for (int Kt : {32, 64}) {
            const FourierLoop x = x64.with_order(Kt);
            p[i++] = decay_fit(grad_b_h12(x, *K, default_grid(Kt))).exponent;
        }
        const std::string tag = s > 0.75 ? "s1" : "s05";
        r.metric("exponent_" + tag + "_K32", p[0]);
        r.metric("exponent_" + tag + "_K64", p[1]);
        const double target = s + 1.0 - 0.1;
        ok = ok && p[0] >= target && p[1] >= target;
        r.require(p[0] >= target && p[1] >= target, "exponent >= " + std::to_string(target) + " at K=32 and K=64");
    }
    (void)ok;
    return r;
}

SuiteResult verify_transport(unsigned long long seed) {
    SuiteResult r;
    r.name = "transport";
    const int d = 2, K = 32, M = default_grid(K);
    std::mt19937_64 rng(seed);
    const std::vector<std::pair<std::string, MapPtr>> maps = {
        {"rotation", make_rotation(d, {0.7, -1.1})}, {"shear", make_shear(d, 0.5)}};
    const std::vector<std::pair<std::string, HamPtr>> hams = {
        {"quadratic", make_quadratic(3.5)}, {"radial_F", make_F(build_g(0.05, 3.0, 4.0))}};
    double worst_action = 0.0, worst_excess = -std::numeric_limits<double>::infinity();
    for (const auto& [ml, phi] : maps) {
        const double c = pushforward_gradient_bound(*phi, d, K);
        r.metric("c_" + ml, c);
        for (const auto& [hl, H] : hams) {
            const HamPtr G = pushforward(H, phi);
            for (int trial = 0; trial < 5; ++trial) {
                // smooth test loop: coefficients decay like |k|^{-2}
                const FourierLoop x = shaped_loop(rng, d, K, 0.4, 0.05, 2.0);
                const auto [aH, aG] = action_transport_check(phi, H, x, M);
                worst_action = std::max(worst_action, std::abs(aH - aG));

                // near-critical candidate: circle of the quadratic flow plus a small defect
                FourierLoop cand(d, K);
                Vec v = Vec::Zero(2 * d);
                v[0] = 0.5;
                cand.coeff(1) = v;
                cand += 1e-3 * shaped_loop(rng, d, K, 1.0, 1.0, 2.0);
                const double g = hs_norm(grad_h12(cand, *H, M), 0.5);
                const FourierLoop pushed = push_loop(*phi, cand, K, M);
                const double gG = hs_norm(grad_h12(pushed, *G, M), 0.5);
                // truncation error by doubling K
                const FourierLoop c2 = cand.with_order(2 * K);
                const double gG2 = hs_norm(grad_h12(push_loop(*phi, c2, 2 * K, default_grid(2 * K)), *G,
                                                    default_grid(2 * K)), 0.5);
                const double trunc = std::abs(gG2 - gG);
                worst_excess = std::max(worst_excess, gG - (c * g * (1.0 + 1e-9) + trunc));
            }
        }
    }
    r.metric("max_action_gap", worst_action);
    r.metric("max_bound_excess", worst_excess);
    r.require(worst_action <= 1e-8, "action transport within 1e-8");
    r.require(worst_excess <= 0.0, "pushed gradient within c*g + truncation");
    return r;
}

SuiteResult verify_admissibility(unsigned long long seed) {
    SuiteResult r;
    r.name = "admissibility";
    const int d = 3, n0 = 1, samples = 40;
    const double radius = 1.5;
    const std::vector<int> ns = {1, 2, 3};

    const MapPtr phi0 = elementary_decompose_example(d, n0, 0.0);
    const AdmissibilityReport rep0 = admissibility_scan(*phi0, radius, ns, samples, seed);
    double zero_max = 0.0;
    for (const auto& row : rep0.rows)
        if (row.n >= n0)
            zero_max = std::max({zero_max, row.comm_forward, row.comm_inverse, row.proj_forward, row.proj_inverse});
    r.metric("eps0_max_norm", zero_max);
    r.require(zero_max == 0.0, "eps=0: commutators and off-block images exactly 0 for n >= n0");

    const MapChecks mc = check_map(*phi0, radius, 100, seed + 1);
    r.metric("symplectic_err", mc.symplectic_err);
    r.metric("inverse_err", mc.inverse_err);
    r.require(mc.symplectic_err <= 1e-9 && mc.inverse_err <= 1e-9, "symplectic and inverse checks at 1e-9");

    // linear response in eps
    std::vector<double> xs, ys;
    for (double eps : {0.0025, 0.005, 0.01, 0.02, 0.04}) {
        const AdmissibilityReport rep = admissibility_scan(*elementary_decompose_example(d, n0, eps), radius, ns, samples, seed);
        double c = 0.0;
        for (const auto& row : rep.rows)
            if (row.n >= n0 && row.n < d) c = std::max({c, row.comm_forward, row.comm_inverse});
        xs.push_back(eps);
        ys.push_back(c);
    }
    const double n = double(xs.size());
    double mx = 0, my = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i] / n;
        my += ys[i] / n;
    }
    double sxx = 0, sxy = 0, syy = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    const double r2 = syy > 0 ? sxy * sxy / (sxx * syy) : 0.0;
    r.metric("eps_slope", sxy / sxx);
    r.metric("eps_r2", r2);
    r.require(r2 >= 0.99, "commutator norms linear in eps (R^2 >= 0.99)");

    const AdmissibilityReport bad = admissibility_scan(*make_mixing(4, 0.3, spread_vector(4, false)), radius,
                                                       {1, 2, 3, 4}, samples, seed);
    const AdmissibilityReport good = admissibility_scan(*make_mixing(4, 0.3, spread_vector(4, true)), radius,
                                                        {1, 2, 3, 4}, samples, seed);
    r.metric("uniform_mixing_flagged", bad.flagged);
    r.metric("geometric_mixing_flagged", good.flagged);
    r.require(bad.flagged, "uniform mixing map flagged as non-admissible");
    return r;
}

SuiteResult verify_flow(unsigned long long seed) {
    SuiteResult r;
    r.name = "flow";
    const int d = 2, K = 8, M = default_grid(K);
    std::mt19937_64 rng(seed);
    const HamPtr Z = make_zero();
    const double h = 0.05;

    // H = 0 is the exact hyperbolic flow
    const FourierLoop x = random_loop(rng, d, K, 1.0, 1.0);
    const FourierLoop y = flow_step(x, *Z, h, M);
    double lin = 0.0;
    for (int k = -K; k <= K; ++k) {
        const double f = k < 0 ? std::exp(h) : k == 0 ? 1.0 : std::exp(-h);
        lin = std::max(lin, (y.coeff(k) - f * x.coeff(k)).cwiseAbs().maxCoeff());
    }
    r.metric("linear_flow_error", lin);
    r.require(lin <= 1e-14, "H=0 step equals e^{h} x^- + x^0 + e^{-h} x^+");

    // energy decrease and first order against a fine reference, on K
    const HamPtr Kh = reference_K(d);
    const FourierLoop x0 = shaped_loop(rng, d, K, 0.35, 0.05, 2.0);
    const double A0 = action(x0, *Kh, M);
    double worst_rise = -std::numeric_limits<double>::infinity();
    for (double hh : {0.04, 0.02, 0.01}) worst_rise = std::max(worst_rise, action(flow_step(x0, *Kh, hh, M), *Kh, M) - A0);
    r.metric("max_action_change", worst_rise);
    r.require(worst_rise <= 0.0, "one step does not increase the action");

    const double T = 0.08;
    auto run = [&](double hh) {
        FourierLoop z = x0;
        const int n = int(std::lround(T / hh));
        for (int i = 0; i < n; ++i) z = flow_step(z, *Kh, hh, M);
        return z;
    };
    const FourierLoop ref = run(T / 1024.0);
    double prev = 0.0;
    double worst_ratio_dev = 0.0;
    for (int i = 0; i < 3; ++i) {
        const double hh = 0.02 / std::ldexp(1.0, i);
        const double err = hs_norm(run(hh) - ref, 0.5);
        r.metric("defect_h" + std::to_string(i), err);
        if (i > 0) {
            const double ratio = prev / err;
            r.metric("ratio_" + std::to_string(i), ratio);
            worst_ratio_dev = std::max(worst_ratio_dev, std::abs(ratio - 2.0));
        }
        prev = err;
    }
    r.require(worst_ratio_dev <= 0.4, "halving h halves the defect (ratio 2 +- 0.4)");

    // H = 0 minimax collapses
    LinkingSets sets;
    sets.d = 1;
    sets.K = 8;
    sets.alpha = 0.25;
    sets.tau = 1.0;
    FlowConfig fc;
    fc.T = 8.0;
    fc.h = 0.05;
    fc.counts = {3, 2, 5};
    const MinimaxTrace tr = estimate_minimax(*Z, sets, 1, fc);
    r.metric("zero_H_c_estimate", tr.c_estimate);
    r.metric("zero_H_monotone_violation", tr.max_monotone_violation);
    r.require(tr.c_estimate <= 1e-6, "H=0 minimax estimate tends to 0");
    r.require(tr.max_monotone_violation <= 1e-12, "sup non-increasing");
    return r;
}

SuiteResult verify_dichotomy(unsigned long long seed) {
    SuiteResult r;
    r.name = "dichotomy";
    const int d = 1, K = 16, M = default_grid(K);
    const HamPtr Kh = reference_K(d);
    const CappedK& Kc = *as_capped(*Kh);
    const double eta = 0.5 * measure_collar(Kc, d, 4000, 1.0, seed);
    r.metric("eta", eta);

    const FourierLoop zero = FourierLoop::zero(d, K);
    r.require(classify_support(zero, *Kh, eta, M) == Support::Inside, "constant 0 is inside");
    FourierLoop far(d, K);
    Vec v = Vec::Zero(2);
    v[0] = std::sqrt(Kc.rho().M_big);
    far.coeff(1) = v;
    r.require(classify_support(far, *Kh, eta, M) == Support::Outside, "circle at q = M_big is outside");
    FourierLoop cross(d, K);
    v[0] = 0.5;
    cross.coeff(0) = v;
    cross.coeff(1) = v;  // |x(t)| sweeps 0..1
    r.require(classify_support(cross, *Kh, eta, M) == Support::Straddling, "loop crossing the collar straddles");

    const RadialF& F = dynamic_cast<const RadialF&>(*make_F(build_g(0.05, 3.0, 4.0)));
    PSCandidate fake;
    fake.loop = zero;
    fake.action = 0.5;
    fake.grad_norm_h12 = 1e-8;
    r.require(!level_sign_radial({fake}, F, M).pass, "positive-action radial candidate flagged");
    r.require(!level_sign_quadratic_tail({fake}, Kc, M).pass, "positive-action outside candidate flagged");

    NonsqueezeConfig cfg;
    cfg.d = d;
    cfg.K = K;
    cfg.flow.seed = seed;
    const NonsqueezeReport rep = run_nonsqueeze(cfg);
    int straddling = 0;
    bool outside_ok = true;
    for (const auto& row : rep.rows) {
        straddling += row.straddling;
        outside_ok = outside_ok && row.outside_verdict;
    }
    r.metric("pipeline_straddling", straddling);
    r.metric("pipeline_outside_ok", outside_ok);
    r.require(straddling == 0, "no refined candidate straddles");
    r.require(outside_ok, "outside candidates have non-positive action");
    return r;
}

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names = {"adjoint", "gradient", "decay", "transport",
                                                   "admissibility", "flow", "dichotomy"};
    return names;
}

SuiteResult run_suite(const std::string& name, unsigned long long seed) {
    if (name == "adjoint") return verify_adjoint(seed);
    if (name == "gradient") return verify_gradient(seed);
    if (name == "decay") return verify_decay(seed);
    if (name == "transport") return verify_transport(seed);
    if (name == "admissibility") return verify_admissibility(seed);
    if (name == "flow") return verify_flow(seed);
    if (name == "dichotomy") return verify_dichotomy(seed);
    throw std::invalid_argument("unknown suite '" + name + "'");
}

}  // namespace nsq
