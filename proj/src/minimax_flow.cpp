#include "nsq/minimax_flow.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "parallel.hpp"

namespace nsq {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

int grid_for(int K, int M) { return M > 0 ? M : default_grid(K); }

// Unit H^{1/2} direction with coefficient weights |k|^{-3/2}, supported on the
// given modes and on the first n pairs.
FourierLoop random_direction(std::mt19937_64& rng, int d, int K, int n, int kmin, int kmax) {
    std::normal_distribution<double> nd(0.0, 1.0);
    FourierLoop x(d, K);
    for (int k = kmin; k <= kmax; ++k) {
        const double w = k == 0 ? 1.0 : std::pow(std::abs(k), -1.5);
        for (int i = 0; i < 2 * n; ++i) x.coeff(k)[i] = w * nd(rng);
    }
    const double nrm = hs_norm(x, 0.5);
    if (nrm > 0.0) x *= 1.0 / nrm;
    return x;
}

std::vector<FourierLoop> sigma_directions(const LinkingSets& sets, int n, const SigmaCounts& c, unsigned long long seed) {
    std::mt19937_64 rng(seed);
    std::vector<FourierLoop> minus, zero, dirs;
    for (int i = 0; i < c.n_minus; ++i) minus.push_back(random_direction(rng, sets.d, sets.K, n, -sets.K, -1));
    for (int i = 0; i < c.n_zero; ++i) zero.push_back(random_direction(rng, sets.d, sets.K, n, 0, 0));
    dirs = minus;
    dirs.insert(dirs.end(), zero.begin(), zero.end());
    for (int i = 0; i < std::min(c.n_minus, c.n_zero); ++i) {
        FourierLoop m = minus[i] + zero[i];
        m *= 1.0 / hs_norm(m, 0.5);
        dirs.push_back(m);
    }
    return dirs;
}

std::vector<SigmaSample> sigma_lattice(const LinkingSets& sets, int n, const SigmaCounts& c, unsigned long long seed,
                                       bool boundary_only) {
    if (n < 1 || n > sets.d) throw DimensionError("ambient index outside 1..d");
    const FourierLoop base = sets.shift_loop();
    const FourierLoop ep = sets.eplus();
    const int ns = std::max(1, c.n_s);
    const int nr = std::max(1, ns - 1);
    auto s_at = [&](int b) { return ns == 1 ? 0.0 : sets.tau * b / (ns - 1); };
    std::vector<SigmaSample> out;
    for (int b = 0; b < ns; ++b) {
        const bool face = b == 0 || b == ns - 1;
        if (boundary_only && !face) continue;
        SigmaSample smp;
        smp.s = s_at(b);
        smp.x = base + smp.s * ep;
        out.push_back(std::move(smp));
    }
    const auto dirs = sigma_directions(sets, n, c, seed);
    for (int di = 0; di < int(dirs.size()); ++di) {
        for (int a = 1; a <= nr; ++a) {
            const double rad = sets.tau * a / nr;
            for (int b = 0; b < ns; ++b) {
                const bool face = b == 0 || b == ns - 1 || a == nr;
                if (boundary_only && !face) continue;
                SigmaSample smp;
                smp.s = s_at(b);
                smp.radius = rad;
                smp.dir = di;
                smp.x = base + rad * dirs[di] + smp.s * ep;
                out.push_back(std::move(smp));
            }
        }
    }
    return out;
}

}  // namespace

FourierLoop LinkingSets::shift_loop() const {
    if (shift.size() == 0) return FourierLoop::zero(d, K);
    return FourierLoop::constant(shift, K);
}

FourierLoop flow_step(const FourierLoop& x, const Hamiltonian& H, double h, int M) {
    const FourierLoop nb = grad_b_h12(x, H, M);
    FourierLoop y(x.pairs(), x.order());
    const double ep = std::exp(h), em = std::exp(-h);
    for (int k = -x.order(); k <= x.order(); ++k) {
        if (k < 0)
            y.coeff(k) = ep * x.coeff(k) + (ep - 1.0) * nb.coeff(k);
        else if (k == 0)
            y.coeff(k) = x.coeff(k) + h * nb.coeff(k);
        else
            y.coeff(k) = em * x.coeff(k) + (1.0 - em) * nb.coeff(k);
    }
    return y;
}

std::vector<SigmaSample> sample_sigma(const LinkingSets& sets, int n, const SigmaCounts& counts,
                                      unsigned long long seed) {
    return sigma_lattice(sets, n, counts, seed, false);
}

std::vector<SigmaSample> sample_sigma_boundary(const LinkingSets& sets, int n, const SigmaCounts& counts,
                                               unsigned long long seed) {
    return sigma_lattice(sets, n, counts, seed, true);
}

std::vector<FourierLoop> sample_gamma(const LinkingSets& sets, int n, int count, unsigned long long seed) {
    if (n < 1 || n > sets.d) throw DimensionError("ambient index outside 1..d");
    std::mt19937_64 rng(seed);
    const FourierLoop base = sets.shift_loop();
    std::vector<FourierLoop> out;
    out.push_back(base + sets.alpha * sets.eplus());
    for (int i = 1; i < count; ++i)
        out.push_back(base + sets.alpha * random_direction(rng, sets.d, sets.K, n, 1, sets.K));
    return out;
}

double inf_gamma(const Hamiltonian& H, const LinkingSets& sets, int n, int count, int M, unsigned long long seed) {
    M = grid_for(sets.K, M);
    double v = std::numeric_limits<double>::infinity();
    for (const auto& x : sample_gamma(sets, n, count, seed)) v = std::min(v, action(x, H, M));
    return v;
}

double sup_sigma(const Hamiltonian& H, const LinkingSets& sets, int n, const SigmaCounts& counts, int M,
                 unsigned long long seed) {
    M = grid_for(sets.K, M);
    double v = -std::numeric_limits<double>::infinity();
    for (const auto& s : sample_sigma(sets, n, counts, seed)) v = std::max(v, action(s.x, H, M));
    return v;
}

double sup_boundary(const Hamiltonian& H, const LinkingSets& sets, int n, const SigmaCounts& counts, int M,
                    unsigned long long seed) {
    M = grid_for(sets.K, M);
    double v = -std::numeric_limits<double>::infinity();
    for (const auto& s : sample_sigma_boundary(sets, n, counts, seed)) v = std::max(v, action(s.x, H, M));
    return v;
}

SweepResult alpha_sweep(const Hamiltonian& H, LinkingSets sets, int n, int count, int M) {
    SweepResult r;
    const int jmax = 2, jmin = -12;
    for (int j = jmax; j >= jmin; --j) {
        sets.alpha = std::ldexp(1.0, j);
        const double v = inf_gamma(H, sets, n, count, M);
        ++r.evaluations;
        if (v > 0.0) {
            r.value = sets.alpha;
            r.objective = v;
            r.hit_bound = j == jmax;
            return r;
        }
    }
    r.value = std::ldexp(1.0, jmin);
    r.hit_bound = true;
    sets.alpha = r.value;
    r.objective = inf_gamma(H, sets, n, count, M);
    return r;
}

SweepResult tau_sweep(const Hamiltonian& H, LinkingSets sets, int n, const SigmaCounts& counts, int M) {
    SweepResult r;
    const int jmin = -2, jmax = 10;
    for (int j = jmin; j <= jmax; ++j) {
        sets.tau = std::ldexp(1.0, j);
        const double v = sup_boundary(H, sets, n, counts, M);
        ++r.evaluations;
        if (v <= 0.0) {
            r.value = sets.tau;
            r.objective = v;
            r.hit_bound = j == jmin;
            return r;
        }
    }
    r.value = std::ldexp(1.0, jmax);
    r.hit_bound = true;
    sets.tau = r.value;
    r.objective = sup_boundary(H, sets, n, counts, M);
    return r;
}

namespace {

struct RunState {
    std::vector<FourierLoop> xs;
    std::vector<double> act, gnorm, plus, rest;
};

void evaluate_all(const Hamiltonian& H, const FourierLoop& base, int M, int threads, RunState& st) {
    const int n = int(st.xs.size());
    detail::parallel_for(n, threads, [&](int i) {
        const FourierLoop& x = st.xs[i];
        st.act[i] = action(x, H, M);
        st.gnorm[i] = hs_norm(grad_h12(x, H, M), 0.5);
        st.plus[i] = hs_norm(project(x, Part::Plus), 0.5);
        st.rest[i] = hs_norm(project(x, Part::Minus) + project(x, Part::Zero) - base, 0.5);
    });
}

MinimaxTrace run_flow(const Hamiltonian& H, const LinkingSets& sets, int n, const FlowConfig& cfg, double h) {
    const int M = grid_for(sets.K, cfg.M);
    std::vector<SigmaSample> smp = sample_sigma(sets, n, cfg.counts, cfg.seed);

    RunState st;
    auto resize = [&] {
        const size_t m = st.xs.size();
        st.act.assign(m, 0.0);
        st.gnorm.assign(m, 0.0);
        st.plus.assign(m, 0.0);
        st.rest.assign(m, 0.0);
    };
    for (auto& s : smp) st.xs.push_back(s.x);
    resize();
    const FourierLoop base = sets.shift_loop();
    evaluate_all(H, base, M, cfg.threads, st);

    // local resampling around the initial argmax, within the solid
    {
        const int arg = int(std::max_element(st.act.begin(), st.act.end()) - st.act.begin());
        const SigmaSample w = smp[arg];
        const int ns = std::max(2, cfg.counts.n_s);
        const double ds = sets.tau / (ns - 1);
        const FourierLoop dirpart = w.x - base - w.s * sets.eplus();
        for (int b = 1; b <= cfg.refine_budget; ++b) {
            const double off = ds * std::ldexp(1.0, -((b + 1) / 2)) * (b % 2 ? 1.0 : -1.0);
            SigmaSample extra = w;
            extra.s = std::clamp(w.s + off, 0.0, sets.tau);
            extra.x = base + dirpart + extra.s * sets.eplus();
            smp.push_back(extra);
            st.xs.push_back(extra.x);
        }
        // golden section along s pins the top of this fibre
        if (cfg.refine_budget > 0) {
            auto at = [&](double sv) { return base + dirpart + sv * sets.eplus(); };
            double lo = std::max(0.0, w.s - ds), hi = std::min(sets.tau, w.s + ds);
            const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
            double c1 = hi - gr * (hi - lo), c2 = lo + gr * (hi - lo);
            double f1 = action(at(c1), H, M), f2 = action(at(c2), H, M);
            for (int it = 0; it < 60 && hi - lo > 1e-12; ++it) {
                if (f1 < f2) {
                    lo = c1;
                    c1 = c2;
                    f1 = f2;
                    c2 = lo + gr * (hi - lo);
                    f2 = action(at(c2), H, M);
                } else {
                    hi = c2;
                    c2 = c1;
                    f2 = f1;
                    c1 = hi - gr * (hi - lo);
                    f1 = action(at(c1), H, M);
                }
            }
            SigmaSample extra = w;
            extra.s = 0.5 * (lo + hi);
            extra.x = at(extra.s);
            smp.push_back(extra);
            st.xs.push_back(extra.x);
        }
        resize();
        evaluate_all(H, base, M, cfg.threads, st);
    }

    MinimaxTrace tr;
    tr.seed = cfg.seed;
    tr.h_used = h;
    std::vector<int> chain;
    for (int i = 0; i < int(smp.size()); ++i)
        if (smp[i].dir < 0) chain.push_back(i);
    std::stable_sort(chain.begin(), chain.end(), [&](int a, int b) { return smp[a].s < smp[b].s; });
    int inserted = 0;

    auto eval_one = [&](int i) {
        const FourierLoop& x = st.xs[i];
        st.act[i] = action(x, H, M);
        st.gnorm[i] = hs_norm(grad_h12(x, H, M), 0.5);
        st.plus[i] = hs_norm(project(x, Part::Plus), 0.5);
        st.rest[i] = hs_norm(project(x, Part::Minus) + project(x, Part::Zero) - base, 0.5);
    };

    // keep the e^+ ray connected near its top: split stretched links next to the
    // ray argmax so the pass point is not lost between samples
    auto refine_chain = [&] {
        while (inserted < cfg.chain_budget && chain.size() >= 2) {
            size_t top = 0;
            for (size_t j = 1; j < chain.size(); ++j)
                if (st.act[chain[j]] > st.act[chain[top]]) top = j;
            size_t link = chain.size();
            double gap = cfg.chain_gap;
            for (size_t j : {top == 0 ? chain.size() : top - 1, top}) {
                if (j + 1 >= chain.size()) continue;
                const double len = hs_norm(st.xs[chain[j]] - st.xs[chain[j + 1]], 0.5);
                if (len > gap) {
                    gap = len;
                    link = j;
                }
            }
            if (link == chain.size()) break;
            st.xs.push_back(0.5 * (st.xs[chain[link]] + st.xs[chain[link + 1]]));
            const int i = int(st.xs.size()) - 1;
            for (auto* v : {&st.act, &st.gnorm, &st.plus, &st.rest}) v->push_back(0.0);
            eval_one(i);
            chain.insert(chain.begin() + link + 1, i);
            ++inserted;
        }
    };

    auto record = [&](double t) {
        // monotonicity is judged on the flowed points, before new ones are added
        const double flowed = *std::max_element(st.act.begin(), st.act.end());
        if (!std::isfinite(flowed) || flowed > cfg.blowup) {
            std::ostringstream os;
            os << "flowed sup diverged (" << flowed << " at t=" << t << ")";
            throw BlowUpError(os.str());
        }
        if (!tr.sup_estimates.empty())
            tr.max_monotone_violation = std::max(tr.max_monotone_violation, flowed - tr.sup_estimates.back());
        refine_chain();
        const int arg = int(std::max_element(st.act.begin(), st.act.end()) - st.act.begin());
        const double sup = st.act[arg];
        tr.times.push_back(t);
        tr.sup_estimates.push_back(sup);
        tr.witness_grad.push_back(st.gnorm[arg]);
        tr.witnesses.push_back(st.xs[arg]);
        tr.plus_norm.push_back(st.plus);
        tr.rest_norm.push_back(st.rest);
        tr.ray_chain.push_back(chain);
        for (int i = 0; i < int(st.xs.size()); ++i) {
            if (st.gnorm[i] > cfg.eps_grad || int(tr.ps_candidates.size()) >= cfg.max_candidates) continue;
            bool dup = false;
            for (const auto& c : tr.ps_candidates)
                if (hs_norm(c - st.xs[i], 0.5) < cfg.dedup) {
                    dup = true;
                    break;
                }
            if (dup) continue;
            tr.ps_candidates.push_back(st.xs[i]);
            tr.candidate_grad.push_back(st.gnorm[i]);
            tr.candidate_action.push_back(st.act[i]);
        }
    };

    record(0.0);
    const int steps = std::max(1, int(std::lround(cfg.T / h)));
    const int every = std::max(1, cfg.record_every);
    for (int s = 1; s <= steps; ++s) {
        detail::parallel_for(int(st.xs.size()), cfg.threads, [&](int i) { st.xs[i] = flow_step(st.xs[i], H, h, M); });
        if (s % every == 0 || s == steps) {
            evaluate_all(H, base, M, cfg.threads, st);
            record(s * h);
        }
    }
    tr.sample_count = int(st.xs.size());
    tr.chain_insertions = inserted;
    tr.initial_sup = tr.sup_estimates.front();
    // with the linking geometry in place (A <= 0 on the boundary of Sigma, A > 0 on
    // Gamma) only times at which the flowed samples still meet Gamma bound c from
    // above; a finite sample set eventually slides off the pass point
    const LinkingResult lk = check_linking(tr, sets, cfg.link_tol);
    tr.linked.resize(tr.times.size());
    for (size_t t = 0; t < tr.times.size(); ++t) tr.linked[t] = lk.distance[t] <= cfg.link_tol;
    tr.boundary_max = sup_boundary(H, sets, n, cfg.counts, M, cfg.seed);
    tr.gamma_inf = inf_gamma(H, sets, n, cfg.gamma_count, M);
    tr.geometry_ok = tr.boundary_max <= 0.0 && tr.gamma_inf > 0.0;
    tr.c_linked = tr.geometry_ok && std::any_of(tr.linked.begin(), tr.linked.end(), [](bool b) { return b; });
    tr.c_index = -1;
    tr.witness_index = -1;
    for (int t = 0; t < int(tr.times.size()); ++t) {
        if (tr.c_linked && !tr.linked[t]) continue;
        if (tr.c_index < 0 || tr.sup_estimates[t] < tr.sup_estimates[tr.c_index]) tr.c_index = t;
        if (tr.witness_index < 0 || tr.witness_grad[t] < tr.witness_grad[tr.witness_index]) tr.witness_index = t;
    }
    tr.c_estimate = tr.sup_estimates[tr.c_index];
    return tr;
}

}  // namespace

MinimaxTrace estimate_minimax(const Hamiltonian& H, const LinkingSets& sets, int n, const FlowConfig& cfg) {
    if (!(cfg.h > 0.0) || !(cfg.T > 0.0)) throw DomainError("flow step and horizon must be positive");
    double h = cfg.h;
    MinimaxTrace tr;
    for (int attempt = 0;; ++attempt) {
        tr = run_flow(H, sets, n, cfg, h);
        tr.restarts = attempt;
        // the flow decreases A; a rising sup beyond tolerance means the step was too coarse
        if (tr.max_monotone_violation <= cfg.monotone_tol * (1.0 + std::abs(tr.initial_sup)) || attempt >= 3) break;
        h *= 0.5;
    }
    return tr;
}

LinkingResult check_linking(const MinimaxTrace& trace, const LinkingSets& sets, double tol) {
    LinkingResult res;
    for (size_t t = 0; t < trace.times.size(); ++t) {
        const auto& P = trace.plus_norm[t];
        const auto& R = trace.rest_norm[t];
        double best = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < P.size(); ++i) best = std::min(best, std::hypot(P[i] - sets.alpha, R[i]));
        // crossing of the sphere between neighbouring ray samples
        const auto& chain = trace.ray_chain[t];
        for (size_t j = 0; j + 1 < chain.size(); ++j) {
            const int a = chain[j], b = chain[j + 1];
            if ((P[a] - sets.alpha) * (P[b] - sets.alpha) <= 0.0) best = std::min(best, std::max(R[a], R[b]));
        }
        res.distance.push_back(best);
        if (!(best <= tol)) res.linked = false;
    }
    return res;
}

namespace {

// Jacobian of R(x)^k = -2 pi k x^k + (grad H o x)^k in column-major coefficient order.
Mat residual_jacobian(const FourierLoop& x, const Hamiltonian& H, int M) {
    const int K = x.order();
    const int m = x.dim();
    const int nm = 2 * K + 1;
    const GridSamples g = sample(x, M);
    const Mat J = SymplecticSpace(x.pairs()).J();
    Mat C(M, nm), S(M, nm);
    for (int j = 0; j < M; ++j)
        for (int k = -K; k <= K; ++k) {
            const double th = kTwoPi * k * double(j) / M;
            C(j, k + K) = std::cos(th);
            S(j, k + K) = std::sin(th);
        }
    Mat Jac = Mat::Zero(m * nm, m * nm);
    for (int j = 0; j < M; ++j) {
        const Mat Hj = H.hessian(g.values.col(j));
        const Mat HJ = Hj * J, JH = J * Hj, JHJ = J * Hj * J;
        for (int k = 0; k < nm; ++k) {
            const double ck = C(j, k), sk = S(j, k);
            for (int l = 0; l < nm; ++l) {
                const double cl = C(j, l), sl = S(j, l);
                Jac.block(k * m, l * m, m, m) += ck * cl * Hj + ck * sl * HJ - sk * cl * JH - sk * sl * JHJ;
            }
        }
    }
    Jac /= double(M);
    for (int k = -K; k <= K; ++k)
        for (int i = 0; i < m; ++i) Jac((k + K) * m + i, (k + K) * m + i) -= kTwoPi * k;
    return Jac;
}

Vec residual_vec(const FourierLoop& x, const Hamiltonian& H, int M) {
    FourierLoop r = grad_l2(x, H, M);
    r *= -1.0;
    return Eigen::Map<const Vec>(r.coeffs().data(), r.coeffs().size());
}

}  // namespace

NewtonResult refine_newton(const FourierLoop& x0, const Hamiltonian& H, int iters, int M, double tol) {
    M = grid_for(x0.order(), M);
    NewtonResult res;
    res.loop = x0;
    Vec R = residual_vec(x0, H, M);
    res.initial_residual = R.norm();
    res.residual = res.initial_residual;
    for (int it = 0; it < iters && res.residual > tol; ++it) {
        const Mat Jm = residual_jacobian(res.loop, H, M);
        Eigen::CompleteOrthogonalDecomposition<Mat> cod(Jm);
        cod.setThreshold(1e-11);
        const Vec step = cod.solve(R);
        bool accepted = false;
        double t = 1.0;
        for (int ls = 0; ls < 40; ++ls, t *= 0.5) {
            FourierLoop trial = res.loop;
            Eigen::Map<Vec>(trial.coeffs().data(), trial.coeffs().size()) -= t * step;
            const Vec Rt = residual_vec(trial, H, M);
            if (Rt.norm() < res.residual) {
                res.loop = std::move(trial);
                R = Rt;
                res.residual = Rt.norm();
                accepted = true;
                break;
            }
        }
        res.iterations = it + 1;
        if (!accepted) {
            res.stagnated = true;
            break;
        }
    }
    return res;
}

}  // namespace nsq
