#include "nsq/ps_diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace nsq {

namespace {
constexpr double kPi = std::numbers::pi;
}

PSCandidate make_candidate(const FourierLoop& x, const Hamiltonian& H, int M) {
    PSCandidate c;
    c.loop = x;
    c.grad_norm_h12 = hs_norm(grad_h12(x, H, M), 0.5);
    c.action = action(x, H, M);
    c.h1_norm = hs_norm(x, 1.0);
    c.residual = orbit_residual(x, H, M);
    const GridSamples g = sample(x, M);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int j = 0; j < M; ++j) {
        const double v = H.value(g.values.col(j));
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    c.uniform_energy_spread = hi - lo;
    return c;
}

FourierLoop smooth_once(const FourierLoop& x, const Hamiltonian& H, int M) {
    const FourierLoop g = grad_h12(x, H, M);
    return x - (project(g, Part::Plus) - project(g, Part::Minus));
}

DecayFit decay_fit(const FourierLoop& y) {
    DecayFit f;
    const int K = y.order();
    f.mode_norms.resize(K + 1);
    f.mode_norms[0] = y.coeff(0).norm();
    for (int k = 1; k <= K; ++k)
        f.mode_norms[k] = std::sqrt(y.coeff(k).squaredNorm() + y.coeff(-k).squaredNorm());
    f.kmin = std::max(1, K / 4);
    f.kmax = K;
    std::vector<double> lx, ly;
    for (int k = f.kmin; k <= f.kmax; ++k) {
        if (f.mode_norms[k] > 0.0) {
            lx.push_back(std::log(double(k)));
            ly.push_back(std::log(f.mode_norms[k]));
        }
    }
    if (lx.size() < 2) {
        f.exponent = std::numeric_limits<double>::infinity();
        f.constant = 0.0;
        f.residual = 0.0;
        return f;
    }
    const double n = double(lx.size());
    double mx = 0, my = 0;
    for (size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    const double slope = sxy / sxx;
    f.exponent = -slope;
    f.constant = std::exp(my - slope * mx);
    double ss = 0;
    for (size_t i = 0; i < lx.size(); ++i) {
        const double e = ly[i] - (my + slope * (lx[i] - mx));
        ss += e * e;
    }
    f.residual = std::sqrt(ss / n);
    return f;
}

std::string to_string(Support s) {
    switch (s) {
        case Support::Inside: return "inside";
        case Support::Outside: return "outside";
        case Support::Straddling: return "straddling";
    }
    return "unknown";
}

namespace {

bool in_low_set(const CappedK& K, const Vec& y) {
    return K.q().value(y) < 1.0 && K.inner()->value(y) < K.plateau();
}

}  // namespace

Support classify_support(const FourierLoop& x, const Hamiltonian& Kh, double eta, int M, const Vec& shift) {
    const CappedK* K = as_capped(Kh);
    if (!K) throw DomainError("support classification needs a capped-quadratic Hamiltonian");
    const Vec c = shift.size() ? shift : Vec::Zero(x.dim());
    const GridSamples g = sample(x, M);
    int inside = 0, touching = 0;
    for (int j = 0; j < M; ++j) {
        const Vec y = g.values.col(j);
        const bool low = in_low_set(*K, y);
        if (low) ++touching;
        bool near = low;
        if (!near) {
            // probe one step of length eta toward the base point
            const Vec dir = c - y;
            const double len = dir.norm();
            const Vec probe = len <= eta ? c : Vec(y + eta / len * dir);
            near = in_low_set(*K, probe);
        }
        if (near) ++inside;
    }
    if (inside == M) return Support::Inside;
    if (touching == 0) return Support::Outside;
    return Support::Straddling;
}

double measure_collar(const CappedK& K, int d, int samples, double radius, unsigned long long seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    double lam = std::numeric_limits<double>::infinity();
    for (int s = 0; s < samples; ++s) {
        Vec u(2 * d);
        for (int i = 0; i < 2 * d; ++i) u[i] = nd(rng);
        u.normalize();
        const Vec y = radius * std::pow(ud(rng), 1.0 / (2 * d)) * u;
        if (!in_low_set(K, y)) continue;
        // sqrt(q) is 1-Lipschitz since all weights of Q are <= 1
        lam = std::min(lam, 1.0 - std::sqrt(K.q().value(y)));
    }
    return lam;
}

namespace {

template <class Slope>
std::pair<double, double> slope_stats(const FourierLoop& x, int M, Slope slope) {
    const GridSamples g = sample(x, M);
    double sum = 0, lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int j = 0; j < M; ++j) {
        const double v = slope(Vec(g.values.col(j)));
        sum += v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return {sum / M, hi - lo};
}

void mode_summary(const FourierLoop& x, CandidateVerdict& v) {
    const FourierLoop plus = project(x, Part::Plus);
    const FourierLoop one = project_mode(x, 1);
    v.plus_minus_one = hs_norm(plus - one, 0.5);
    v.minus_norm = hs_norm(project(x, Part::Minus), 0.5);
    v.one_norm = hs_norm(one, 0.5);
}

}  // namespace

LevelVerdict level_sign_radial(const std::vector<PSCandidate>& cands, const RadialF& F, int M,
                               const LevelTolerances& tol) {
    LevelVerdict out;
    for (const auto& c : cands) {
        CandidateVerdict v;
        v.action = c.action;
        v.grad = c.grad_norm_h12;
        mode_summary(c.loop, v);
        const auto [dm, sp] = slope_stats(c.loop, M, [&](const Vec& y) { return F.profile().d1(y.squaredNorm()); });
        v.d_mean = dm;
        v.d_spread = sp;
        if (c.grad_norm_h12 > tol.eps_grad) {
            v.included = false;
            ++out.excluded;
        } else {
            v.pass = c.action <= tol.action_tol;
            out.pass = out.pass && v.pass;
        }
        out.items.push_back(v);
    }
    return out;
}

LevelVerdict level_sign_quadratic_tail(const std::vector<PSCandidate>& cands, const CappedK& K, int M,
                                       const LevelTolerances& tol) {
    LevelVerdict out;
    const ProfileRho& rho = K.rho();
    for (const auto& c : cands) {
        CandidateVerdict v;
        v.action = c.action;
        v.grad = c.grad_norm_h12;
        mode_summary(c.loop, v);
        const auto [dm, sp] = slope_stats(c.loop, M, [&](const Vec& y) { return rho.d1(K.q().value(y)); });
        v.d_mean = dm;
        v.d_spread = sp;
        v.resonant = std::abs(dm - kPi) <= tol.resonance_band;
        if (v.resonant) {
            // nearest resonant circle: plane-1 part of the first mode, q-level s
            const Vec x1 = c.loop.coeff(1);
            const double s = x1.head(2).squaredNorm();
            const double circle = kPi * s - rho.value(s);
            v.xi = circle + rho.m - kPi;
            v.bound = kPi + v.xi - rho.m;
            v.xi_residual = std::abs(c.action - v.bound);
        }
        if (c.grad_norm_h12 > tol.eps_grad) {
            v.included = false;
            ++out.excluded;
        } else {
            v.pass = c.action <= tol.action_tol;
            out.pass = out.pass && v.pass;
        }
        out.items.push_back(v);
    }
    return out;
}

double mode_operator(double mu, double Qi, int k) {
    if (k == 0) return -2.0 * mu * Qi;
    const double sgn = k > 0 ? 1.0 : -1.0;
    return sgn - 2.0 * mu * Qi / (2.0 * kPi * std::abs(k));
}

double mode_operator_min(double slope, const QuadraticQ& q, int d, int K, bool skip_resonant) {
    double s = std::numeric_limits<double>::infinity();
    for (int i = 0; i < d; ++i)
        for (int k = -K; k <= K; ++k) {
            const double v = std::abs(mode_operator(slope, q.weight(i), k));
            if (skip_resonant && v < 1e-9) continue;
            s = std::min(s, v);
        }
    return s;
}

BoundednessReport boundedness_probe(const CappedK& K, int d, const std::vector<int>& orders,
                                    const std::vector<FourierLoop>& seeds) {
    BoundednessReport rep;
    rep.mu = K.rho().mu;
    rep.N = K.q().N;
    rep.orders = orders;
    for (int Kt : orders) {
        rep.sigma.push_back(mode_operator_min(rep.mu, K.q(), d, Kt));
        double ratio = std::numeric_limits<double>::infinity();
        for (const auto& s0 : seeds) {
            FourierLoop y = s0.with_order(Kt);
            const double nrm = hs_norm(y, 0.5);
            if (nrm == 0.0) continue;
            y *= 1.0 / nrm;
            FourierLoop Qy(d, Kt);
            for (int k = -Kt; k <= Kt; ++k) Qy.coeff(k) = K.q().apply(y.coeff(k));
            const FourierLoop Ly = project(y, Part::Plus) - project(y, Part::Minus) - t_star(2.0 * rep.mu * Qy, 0.5);
            ratio = std::min(ratio, hs_norm(Ly, 0.5));
        }
        rep.seed_ratio.push_back(ratio);
    }
    return rep;
}

}  // namespace nsq
