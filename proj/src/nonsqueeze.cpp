#include "nsq/nonsqueeze.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <exception>
#include <sstream>

#include "nsq/action.hpp"
#include "parallel.hpp"

namespace nsq {

namespace {

constexpr double kPi = std::numbers::pi;

double delta_for(const NonsqueezeConfig& cfg, double r) { return cfg.delta > 0.0 ? cfg.delta : 0.05 * r * r; }

HamPtr inner_for(const ProfileG& g, const MapPtr& phi) {
    HamPtr F = make_F(g);
    if (phi->kind() == MapKind::Identity) return F;
    return pushforward(F, phi);
}

// Smallest N in [1, N_max] (or the fixed N) passing the shell test; 0 if none.
int find_N(const NonsqueezeConfig& cfg, const Hamiltonian& inner, Vec* bad) {
    const int lo = cfg.N > 0 ? cfg.N : 1;
    const int hi = cfg.N > 0 ? cfg.N : cfg.N_max;
    for (int N = lo; N <= hi; ++N)
        if (shell_check(inner, QuadraticQ{N}, cfg.m, cfg.d, cfg.shell, bad)) return N;
    return 0;
}

std::string describe_obstruction(const Vec& bad, const QuadraticQ& q, const Hamiltonian& inner) {
    std::ostringstream os;
    os.precision(6);
    os << "inner Hamiltonian below the plateau on the shell at (";
    for (Eigen::Index i = 0; i < bad.size(); ++i) os << (i ? ", " : "") << bad[i];
    os << "), q=" << q.value(bad) << ", H=" << inner.value(bad);
    return os.str();
}

std::vector<FourierLoop> probe_seeds(int d, int K, unsigned long long seed) {
    std::vector<FourierLoop> out;
    out.push_back(e_plus(d, K));
    Vec v = Vec::Zero(2 * d);
    v[0] = 1.0;
    out.push_back(FourierLoop::constant(v, K));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (int s = 0; s < 4; ++s) {
        FourierLoop x(d, K);
        for (int k = -K; k <= K; ++k)
            for (int i = 0; i < 2 * d; ++i) x.coeff(k)[i] = nd(rng) / (1.0 + k * k);
        out.push_back(x);
    }
    return out;
}

}  // namespace

NonsqueezeReport run_nonsqueeze(const NonsqueezeConfig& cfg) {
    if (cfg.d < 1) throw DimensionError("need at least one symplectic pair");
    if (!(cfg.r > 1.0)) throw DomainError("ball radius must exceed 1");
    if (!(cfg.m > kPi)) throw DomainError("plateau m must exceed pi");
    const MapPtr phi = cfg.map ? cfg.map : make_identity(cfg.d);
    if (phi->pairs() != cfg.d) throw DimensionError("map dimension differs from the space");
    std::vector<int> ladder = cfg.ladder;
    if (ladder.empty())
        for (int n = 1; n <= cfg.d; ++n) ladder.push_back(n);
    for (int n : ladder)
        if (n < 1 || n > cfg.d) throw DimensionError("ladder entry outside 1..d");
    const int M = cfg.M > 0 ? cfg.M : default_grid(cfg.K);
    if (M < 2 * cfg.K + 1) throw AliasingError("grid too coarse for the truncation");

    NonsqueezeReport rep;
    rep.map_kind = phi->kind();
    rep.r_requested = cfg.r;

    // g, F and the shell test
    ProfileG g;
    HamPtr inner;
    Vec bad;
    if (cfg.mode == FitMode::Strict) {
        g = build_g(delta_for(cfg, cfg.r), cfg.r, cfg.m);
        inner = inner_for(g, phi);
        rep.N = find_N(cfg, *inner, &bad);
        if (rep.N == 0) throw ConstraintError("shell containment failed: " + describe_obstruction(bad, QuadraticQ{cfg.N_max}, *inner));
        rep.r_used = cfg.r;
    } else {
        auto passes = [&](double r, int* N) {
            const ProfileG gr = ramp_profile(delta_for(cfg, r), r, cfg.m);
            const HamPtr h = inner_for(gr, phi);
            *N = find_N(cfg, *h, &bad);
            return *N > 0;
        };
        int N = 0;
        if (passes(cfg.r, &N)) {
            rep.r_used = cfg.r;
        } else {
            // the requested ball does not fit through the cylinder: record why and
            // shrink it until it does
            {
                const ProfileG gr = ramp_profile(delta_for(cfg, cfg.r), cfg.r, cfg.m);
                rep.obstruction = describe_obstruction(bad, QuadraticQ{cfg.N > 0 ? cfg.N : cfg.N_max}, *inner_for(gr, phi));
            }
            rep.fitted = true;
            double hi = cfg.r, lo = cfg.r;
            int tries = 0;
            do {
                hi = lo;
                lo *= 0.5;
                if (++tries > 20) throw ConstraintError("no ball radius passes the shell test: " + rep.obstruction);
            } while (!passes(lo, &N));
            for (int it = 0; it < cfg.bisection_steps; ++it) {
                const double mid = 0.5 * (lo + hi);
                int Nm = 0;
                if (passes(mid, &Nm))
                    lo = mid;
                else
                    hi = mid;
            }
            rep.r_used = lo;
            passes(lo, &N);
        }
        rep.N = N;
        const double dl = delta_for(cfg, rep.r_used);
        g = minimal_feasible_r(dl, cfg.m) < rep.r_used ? build_g(dl, rep.r_used, cfg.m) : ramp_profile(dl, rep.r_used, cfg.m);
        inner = inner_for(g, phi);
    }
    rep.g = g;
    rep.delta = g.delta;
    rep.g_max_slope = g.max_slope();
    rep.slope_cap_violated = !(rep.g_max_slope < kPi);
    rep.minimal_feasible_r = minimal_feasible_r(g.delta, cfg.m);

    rep.rho = build_rho(cfg.m, cfg.mu, cfg.M_big);
    const QuadraticQ q{rep.N};
    const HamPtr K = make_K(inner, q, rep.rho, cfg.d, cfg.shell);
    const CappedK& Kc = *as_capped(*K);
    rep.collar = measure_collar(Kc, cfg.d, cfg.collar_samples, double(rep.N), cfg.shell.seed + 1);
    rep.eta = cfg.eta > 0.0 ? cfg.eta : (std::isfinite(rep.collar) ? 0.5 * rep.collar : 0.0);
    rep.sigma = boundedness_probe(Kc, cfg.d, {cfg.K, 2 * cfg.K}, probe_seeds(cfg.d, cfg.K, cfg.flow.seed)).sigma;

    const HamPtr F = make_F(g);
    const MapPtr phi_inv = make_inverse(phi);
    const Vec shift = phi->forward(Vec::Zero(2 * cfg.d));

    // rows run concurrently; threads left over go to the flow of each row
    const int outer = std::max(1, std::min<int>(cfg.flow.threads, int(ladder.size())));
    const int per_row = std::max(1, cfg.flow.threads / outer);
    std::vector<LadderRow> rows(ladder.size());
    std::vector<std::exception_ptr> errors(ladder.size());
    detail::parallel_for(int(ladder.size()), outer, [&](int li) {
        try {
            const int n = ladder[li];
            LadderRow& row = rows[li];
            row.n = n;
            const HamPtr Kn = restrict_to(K, n, cfg.d);
            LinkingSets sets;
            sets.d = cfg.d;
            sets.K = cfg.K;
            sets.shift = shift;
            if (cfg.tau > 0.0) {
                sets.tau = cfg.tau;
                row.boundary_max = sup_boundary(*Kn, sets, n, cfg.flow.counts, M, cfg.flow.seed);
            } else {
                const SweepResult ts = tau_sweep(*Kn, sets, n, cfg.flow.counts, M);
                sets.tau = ts.value;
                row.tau_hit_bound = ts.hit_bound;
                row.boundary_max = ts.objective;
            }
            if (cfg.alpha > 0.0) {
                sets.alpha = cfg.alpha;
            } else {
                const SweepResult as = alpha_sweep(*Kn, sets, n, cfg.gamma_count, M);
                sets.alpha = as.value;
                row.alpha_hit_bound = as.hit_bound;
            }
            row.alpha = sets.alpha;
            row.tau = sets.tau;
            row.inf_gamma = inf_gamma(*Kn, sets, n, cfg.gamma_count, M);

            FlowConfig fc = cfg.flow;
            fc.M = M;
            fc.gamma_count = cfg.gamma_count;
            fc.threads = per_row;
            MinimaxTrace tr = estimate_minimax(*Kn, sets, n, fc);
            row.sup_sigma = tr.initial_sup;
            row.c_estimate = tr.c_estimate;
            row.c_linked = tr.c_linked;
            row.linked_all = check_linking(tr, sets, fc.link_tol).linked;
            row.samples = tr.sample_count;
            row.restarts = tr.restarts;
            row.h_used = tr.h_used;
            row.final_sup = tr.sup_estimates.back();

            // Newton from the qualifying witnesses, smallest gradient first
            std::vector<int> order;
            for (int t = 0; t < int(tr.times.size()); ++t)
                if (!tr.c_linked || tr.linked[t]) order.push_back(t);
            std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return tr.witness_grad[a] < tr.witness_grad[b]; });
            bool found = false;
            NewtonResult best;
            double best_score = std::numeric_limits<double>::infinity();
            const int starts = std::min<int>(cfg.newton_starts, int(order.size()));
            for (int s = 0; s < starts && !found; ++s) {
                const NewtonResult nr = refine_newton(tr.witnesses[order[s]], *Kn, cfg.newton_iters, M);
                const double A = action(nr.loop, *Kn, M);
                const bool ok = nr.residual <= cfg.residual_tol && A > 0.0 && A <= cfg.m;
                const double score = ok ? -1.0 : nr.residual + (A > 0.0 ? 0.0 : 1.0);
                if (score < best_score) {
                    best_score = score;
                    best = nr;
                    row.newton_start = order[s];
                }
                found = ok;
            }
            row.orbit = best.loop;
            row.orbit_action = action(best.loop, *Kn, M);
            row.orbit_residual = best.residual;
            row.newton_iterations = best.iterations;
            row.newton_stagnated = best.stagnated;
            row.orbit_support = classify_support(best.loop, *Kn, rep.eta, M, shift);
            row.level_ok = row.orbit_action > 0.0 && row.orbit_action <= cfg.m;
            const double stol = 1e-9 * (1.0 + std::abs(row.orbit_action));
            row.sandwich_ok = row.inf_gamma - stol <= row.orbit_action && row.orbit_action <= row.sup_sigma + stol;

            // refine, deduplicate and classify the flow's PS candidates
            std::vector<FourierLoop> kept;
            std::vector<PSCandidate> outside;
            std::vector<size_t> outside_rows;
            for (const auto& c0 : tr.ps_candidates) {
                const NewtonResult nr = refine_newton(c0, *Kn, cfg.newton_iters, M);
                CandidateRow cr;
                cr.refined = nr.residual <= cfg.residual_tol;
                const FourierLoop& x = cr.refined ? nr.loop : c0;
                if (cr.refined) {
                    bool dup = false;
                    for (const auto& k : kept)
                        if (hs_norm(k - x, 0.5) < fc.dedup) {
                            dup = true;
                            break;
                        }
                    if (dup) continue;
                    kept.push_back(x);
                }
                const PSCandidate pc = make_candidate(x, *Kn, M);
                cr.action = pc.action;
                cr.grad = pc.grad_norm_h12;
                cr.residual = pc.residual;
                cr.support = classify_support(x, *Kn, rep.eta, M, shift);
                if (cr.refined && cr.support == Support::Straddling) ++row.straddling;
                if (cr.support == Support::Outside) {
                    outside.push_back(pc);
                    outside_rows.push_back(row.candidates.size());
                }
                row.candidates.push_back(cr);
            }
            if (!outside.empty()) {
                const LevelVerdict lv = level_sign_quadratic_tail(outside, Kc, M, cfg.level);
                row.outside_verdict = lv.pass;
                for (size_t i = 0; i < outside.size(); ++i) {
                    CandidateRow& cr = row.candidates[outside_rows[i]];
                    cr.verdict_pass = lv.items[i].pass;
                    cr.d_mean = lv.items[i].d_mean;
                    cr.resonant = lv.items[i].resonant;
                    cr.xi = lv.items[i].xi;
                }
            }

            row.grad_K = hs_norm(grad_h12(row.orbit, *Kn, M), 0.5);
            const FourierLoop pulled = push_loop(*phi_inv, row.orbit, cfg.K, M);
            row.grad_F_pulled = hs_norm(grad_h12(pulled, *F, M), 0.5);
            row.trace = std::move(tr);
        } catch (...) {
            errors[li] = std::current_exception();
        }
    });
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    rep.rows = std::move(rows);

    if (rep.rows.size() >= 2) {
        bool up = true, down = true;
        for (size_t i = 1; i < rep.rows.size(); ++i) {
            const double dc = rep.rows[i].c_estimate - rep.rows[i - 1].c_estimate;
            up = up && dc >= -1e-6;
            down = down && dc <= 1e-6;
        }
        rep.c_monotone = up || down;
        const double last = rep.rows.back().c_estimate, prev = rep.rows[rep.rows.size() - 2].c_estimate;
        rep.c_stabilizing = std::abs(last - prev) <= 1e-2 * std::max(1.0, std::abs(last));
    }
    return rep;
}

}  // namespace nsq
