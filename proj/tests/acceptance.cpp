// One line per acceptance criterion; exit status 1 if any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "nsq/action.hpp"
#include "nsq/io.hpp"
#include "nsq/minimax_flow.hpp"
#include "nsq/nonsqueeze.hpp"
#include "nsq/ps_diagnostics.hpp"
#include "nsq/verify.hpp"

using namespace nsq;

namespace {

constexpr double kPi = std::numbers::pi;
int failures = 0;

void report(int id, bool ok, const std::string& what, const std::string& detail) {
    std::printf("[%s] %2d %s: %s\n", ok ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string metrics_of(const SuiteResult& r) {
    std::ostringstream os;
    for (size_t i = 0; i < r.metrics.size(); ++i) os << (i ? " " : "") << r.metrics[i].first << "=" << r.metrics[i].second;
    for (const auto& n : r.notes) os << " | " << n;
    return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Timed {
    NonsqueezeReport rep;
    double seconds = 0.0;
};

Timed run_pipeline(int d, int threads) {
    NonsqueezeConfig cfg;
    cfg.d = d;
    cfg.K = 16;
    cfg.flow.threads = threads;
    const auto t0 = std::chrono::steady_clock::now();
    Timed t{run_nonsqueeze(cfg), 0.0};
    t.seconds = seconds_since(t0);
    return t;
}

}  // namespace

int main() {
    const unsigned long long seed = 1;

    {
        const SuiteResult r = verify_adjoint(seed);
        report(1, r.pass, "adjoint identity", metrics_of(r));
    }

    {
        std::mt19937_64 rng(seed);
        const int K = 16, M = default_grid(K);
        double worst = 0.0;
        for (double mu : {0.5, kPi, 3.5, 6.0})
            for (int trial = 0; trial < 10; ++trial) {
                const FourierLoop x = random_loop(rng, 2, K, 1.0, 0.5);
                const FourierLoop g = grad_b_h12(x, *make_quadratic(mu), M);
                for (int k = -K; k <= K; ++k) {
                    const double f = k == 0 ? 2 * mu : 2 * mu / (2 * kPi * std::abs(k));
                    worst = std::max(worst, (g.coeff(k) - f * x.coeff(k)).cwiseAbs().maxCoeff());
                }
            }
        std::ostringstream os;
        os << "max coefficient error " << worst;
        report(2, worst <= 1e-12, "quadratic mode scaling", os.str());
    }

    {
        const SuiteResult r = verify_gradient(seed);
        report(3, r.pass, "gradient vs finite differences", metrics_of(r));
    }

    {
        std::mt19937_64 rng(seed + 3);
        const int d = 2, K = 16, M = default_grid(K);
        const auto cat = hamiltonian_catalogue(d);
        double worst = -1e300;
        for (int i = 0; i < 1000; ++i) {
            const HamPtr& H = cat[size_t(i) % cat.size()].second;
            const FourierLoop x = random_loop(rng, d, K, 0.6, 0.8);
            const auto [a, b] = sandwich_check(x, *H, M);
            worst = std::max({worst, a - b, b - 2 * kPi * a});
        }
        std::ostringstream os;
        os << "max violation " << worst << " over 1000 loops";
        report(4, worst <= 1e-9, "sandwich inequality", os.str());
    }

    {
        const SuiteResult r = verify_decay(seed);
        report(5, r.pass, "decay exponent of grad b_K", metrics_of(r));
    }

    {
        const int d = 2, K = 16, M = default_grid(K);
        const HamPtr H = make_quadratic(kPi);
        FourierLoop c(d, K);
        c.coeff(1) << 0.6, 0.0, 0.2, -0.3;
        const double res = orbit_residual(c, *H, M);
        const double A = action(c, *H, M);
        std::mt19937_64 rng(seed + 6);
        FourierLoop noise = random_loop(rng, d, K, 1.0, 1.0);
        noise *= 0.1 * hs_norm(c, 0.5) / hs_norm(noise, 0.5);
        const NewtonResult nr = refine_newton(c + noise, *H, 30, M);
        // the orbits of this H are exactly the loops carried by mode 1
        const double off = (nr.loop - project_mode(nr.loop, 1)).coeffs().norm();
        std::ostringstream os;
        os << "residual " << res << ", action " << A << ", newton residual " << nr.residual << ", off-orbit " << off;
        report(6, res <= 1e-10 && std::abs(A) <= 1e-10 && nr.residual <= 1e-10 && off <= 1e-10,
               "harmonic oscillator oracle", os.str());
    }

    const Timed run1 = run_pipeline(1, 1);
    const Timed run2 = run_pipeline(2, 1);
    {
        bool ok = true;
        std::ostringstream os;
        for (const Timed* t : {&run1, &run2}) {
            const double per_n = t->seconds / double(t->rep.rows.size());
            for (const auto& row : t->rep.rows) {
                const bool good = row.orbit_residual <= 1e-6 && row.orbit_action > 0.0 && row.orbit_action <= 4.0 &&
                                  row.sandwich_ok;
                ok = ok && good;
                os << "d=" << t->rep.rows.size() << " n=" << row.n << " A=" << row.orbit_action
                   << " res=" << row.orbit_residual << " in [" << row.inf_gamma << ", " << row.sup_sigma << "]; ";
            }
            ok = ok && per_n < 300.0;
            os << "(" << per_n << " s per n) ";
        }
        report(7, ok, "positive-level critical orbit of K_n", os.str());
    }

    {
        const int d = 1, K = 16, M = default_grid(K);
        const double delta = 0.05, m = 4.0;
        const ProfileG g = build_g(delta, 1.1 * minimal_feasible_r(delta, m), m);
        const HamPtr F = make_F(g);
        LinkingSets sets;
        sets.d = d;
        sets.K = K;
        sets.tau = 2.0;
        sets.alpha = 1.0;
        FlowConfig fc;
        fc.M = M;
        const MinimaxTrace tr = estimate_minimax(*F, sets, d, fc);
        double worst = -1e300;
        int counted = 0;
        for (size_t i = 0; i < tr.ps_candidates.size(); ++i)
            if (tr.candidate_grad[i] <= 1e-4) {
                worst = std::max(worst, tr.candidate_action[i]);
                ++counted;
            }
        const double last = tr.sup_estimates.back();
        std::ostringstream os;
        os << "g' max " << g.max_slope() << ", final sup " << last << " at T=" << tr.times.back() << ", "
           << counted << " candidates with grad <= 1e-4, max action " << (counted ? worst : 0.0);
        report(8, last <= 1e-3 && (counted == 0 || worst <= 1e-3), "null result for F", os.str());
    }

    {
        bool ok = true;
        std::ostringstream os;
        for (const Timed* t : {&run1, &run2})
            for (const auto& row : t->rep.rows) {
                ok = ok && !row.tau_hit_bound && row.boundary_max <= 0.0 && !row.alpha_hit_bound && row.inf_gamma > 0.0;
                os << "d=" << t->rep.rows.size() << " n=" << row.n << " tau=" << row.tau << " max_bd=" << row.boundary_max
                   << " alpha=" << row.alpha << " inf_gamma=" << row.inf_gamma << "; ";
            }
        report(9, ok, "boundary sweeps", os.str());
    }

    {
        const SuiteResult r = verify_transport(seed);
        report(10, r.pass, "action transport and gradient bound", metrics_of(r));
    }

    {
        // critical orbit of the d=1 run, refined at K=32, plus an eps/|k| tail
        const int d = 1, K = 32, M = default_grid(K);
        const HamPtr Kh = make_K(make_F(run1.rep.g), QuadraticQ{run1.rep.N}, run1.rep.rho, d);
        const NewtonResult base = refine_newton(run1.rep.rows[0].orbit.with_order(K), *Kh, 30, M);
        std::mt19937_64 rng(seed + 11);
        std::normal_distribution<double> nd;
        FourierLoop x = base.loop;
        const double eps = 1e-3;
        for (int k = -K; k <= K; ++k) {
            if (std::abs(k) < 2) continue;
            Vec v(2 * d);
            for (int i = 0; i < 2 * d; ++i) v[i] = nd(rng);
            x.coeff(k) += eps / std::abs(k) * v.normalized();
        }
        const double p0 = decay_fit(x).exponent;
        const FourierLoop y1 = smooth_once(x, *Kh, M);
        const double p1 = decay_fit(y1).exponent;
        const double p2 = decay_fit(smooth_once(y1, *Kh, M)).exponent;
        std::ostringstream os;
        os << "orbit residual " << base.residual << ", exponents " << p0 << " -> " << p1 << " -> " << p2;
        report(11, std::abs(p1 - p0 - 1.0) <= 0.2 && p2 >= 1.9, "smoothing bootstrap", os.str());
    }

    {
        const SuiteResult r = verify_admissibility(seed);
        BumpFlowParams bp;
        bp.n0 = 1;
        const AdmissibilityReport b = admissibility_scan(*make_bump_flow(3, bp), 1.5, {1, 2, 3}, 40, seed);
        double proj = 0.0;
        for (const auto& row : b.rows) proj = std::max({proj, row.proj_forward, row.proj_inverse});
        report(12, r.pass && proj == 0.0, "admissibility", metrics_of(r) + " bump_proj_max=" + std::to_string(proj));
    }

    {
        bool ok = true;
        std::ostringstream os;
        for (const auto& row : run2.rep.rows) {
            int outside = 0;
            for (const auto& c : row.candidates) outside += c.support == Support::Outside;
            ok = ok && row.straddling == 0 && row.outside_verdict;
            os << "n=" << row.n << " candidates=" << row.candidates.size() << " straddling=" << row.straddling
               << " outside=" << outside << " verdict=" << (row.outside_verdict ? "pass" : "fail") << "; ";
        }
        report(13, ok, "support dichotomy and level signs (d=2)", os.str());
    }

    {
        const Timed again = run_pipeline(1, 2);
        const std::string a = io::dump(io::nonsqueeze_report_json(run1.rep, true));
        const std::string b = io::dump(io::nonsqueeze_report_json(again.rep, true));
        std::ostringstream os;
        os << a.size() << " bytes, threads 1 vs 2";
        report(14, a == b, "deterministic nonsqueeze report", os.str());
    }

    std::printf("%d failed\n", failures);
    return failures == 0 ? 0 : 1;
}
