#include "nsq/hamiltonians.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace nsq {

namespace {

constexpr double kPi = std::numbers::pi;

double smoothstep(double u) { return u * u * u * (10.0 + u * (-15.0 + 6.0 * u)); }
double smoothstep_d1(double u) { return 30.0 * u * u * (1.0 - u) * (1.0 - u); }
double smoothstep_d2(double u) { return 60.0 * u * (1.0 - u) * (1.0 - 2.0 * u); }

std::string fmt_point(const Vec& v) {
    std::ostringstream os;
    os.precision(6);
    os << "(";
    for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
    os << ")";
    return os.str();
}

}  // namespace

// ---- g ----

double ProfileG::value(double t) const {
    if (t <= delta) return 0.0;
    if (t >= r - delta) return m;
    return m * smoothstep((t - delta) / width());
}

double ProfileG::d1(double t) const {
    if (t <= delta || t >= r - delta) return 0.0;
    return m * smoothstep_d1((t - delta) / width()) / width();
}

double ProfileG::d2(double t) const {
    if (t <= delta || t >= r - delta) return 0.0;
    const double w = width();
    return m * smoothstep_d2((t - delta) / w) / (w * w);
}

ProfileG ramp_profile(double delta, double r, double m) {
    if (!(delta > 0.0)) throw DomainError("ramp start delta must be positive");
    if (!(delta < r / 2.0)) throw ConstraintError("empty ramp interval: need delta < r/2");
    return ProfileG{delta, r, m};
}

double minimal_feasible_r(double delta, double m) { return 2.0 * delta + 15.0 * m / (8.0 * kPi); }

ProfileG build_g(double delta, double r, double m) {
    if (!(m > kPi)) throw DomainError("plateau m must exceed pi");
    ProfileG g = ramp_profile(delta, r, m);
    if (g.max_slope() >= kPi) {
        std::ostringstream os;
        os << "slope cap violated: sup g' = " << g.max_slope() << " >= pi; minimal feasible r at delta=" << delta
           << " is " << minimal_feasible_r(delta, m);
        throw ConstraintError(os.str());
    }
    return g;
}

// ---- rho ----

double ProfileRho::value(double t) const {
    if (t <= 1.0) return m;
    if (t >= M_big) return mu * t;
    const double u = (t - 1.0) / (M_big - 1.0);
    return m + u * u * u * (a3 + u * (a4 + u * a5));
}

double ProfileRho::d1(double t) const {
    if (t <= 1.0) return 0.0;
    if (t >= M_big) return mu;
    const double L = M_big - 1.0;
    const double u = (t - 1.0) / L;
    return u * u * (3.0 * a3 + u * (4.0 * a4 + 5.0 * u * a5)) / L;
}

double ProfileRho::d2(double t) const {
    if (t <= 1.0 || t >= M_big) return 0.0;
    const double L = M_big - 1.0;
    const double u = (t - 1.0) / L;
    return u * (6.0 * a3 + u * (12.0 * a4 + 20.0 * u * a5)) / (L * L);
}

namespace {

ProfileRho rho_candidate(double m, double mu, double Mb) {
    ProfileRho p{m, mu, Mb};
    const double L = Mb - 1.0;
    Eigen::Matrix3d A;
    A << 1, 1, 1, 3, 4, 5, 6, 12, 20;
    Eigen::Vector3d b(mu * Mb - m, mu * L, 0.0);
    Eigen::Vector3d a = A.partialPivLu().solve(b);
    p.a3 = a[0];
    p.a4 = a[1];
    p.a5 = a[2];
    return p;
}

bool rho_grid_ok(const ProfileRho& p) {
    const int n = 10000;
    const double hi = 2.0 * p.M_big;
    for (int i = 0; i <= n; ++i) {
        const double t = hi * i / n;
        const double v = p.value(t);
        if (v < p.mu * t - 1e-12 * (1.0 + p.mu * t)) return false;
        if (t > 1.0) {
            const double s = p.d1(t);
            if (!(s > 0.0) || s > p.mu * (1.0 + 1e-12)) return false;
        }
    }
    return true;
}

}  // namespace

ProfileRho build_rho(double m, double mu, double M_big) {
    if (!(mu > kPi && mu < std::min(m, 2.0 * kPi)))
        throw DomainError("rho slope mu must satisfy pi < mu < min(m, 2 pi)");
    if (!(M_big > m / mu)) throw DomainError("rho threshold M_big must exceed m/mu");
    // The bridge slope is mu * (3u^2 - 2u^3 + c u^2 (1-u)^2) with c fixed by the
    // value gap; it stays in (0, mu] iff |c| <= 3, i.e. L = M_big - 1 lies in
    // [(m-mu)/(0.6 mu), (m-mu)/(0.4 mu)]. Doubling only helps below that window.
    const double Lhi = (m - mu) / (0.4 * mu);
    int dbl = 0;
    for (; dbl < 40; ++dbl) {
        ProfileRho p = rho_candidate(m, mu, M_big);
        p.doublings = dbl;
        if (rho_grid_ok(p)) return p;
        if (M_big - 1.0 > Lhi) break;
        M_big *= 2.0;
    }
    ProfileRho p = rho_candidate(m, mu, 1.0 + 2.0 * (m - mu) / mu);
    p.doublings = dbl;
    p.adjusted = true;
    if (rho_grid_ok(p)) return p;
    throw ConstraintError("rho bridge failed verification");
}

// ---- q ----

double QuadraticQ::value(const Vec& x) const {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) acc += weight(int(i / 2)) * x[i] * x[i];
    return acc;
}

Vec QuadraticQ::apply(const Vec& x) const {
    Vec out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = weight(int(i / 2)) * x[i];
    return out;
}

Vec QuadraticQ::weights(int d) const {
    Vec w(2 * d);
    for (int i = 0; i < 2 * d; ++i) w[i] = weight(i / 2);
    return w;
}

// ---- catalogue ----

std::string to_string(HamKind k) {
    switch (k) {
        case HamKind::Zero: return "zero";
        case HamKind::Quadratic: return "quadratic";
        case HamKind::RadialF: return "radial_f";
        case HamKind::CappedK: return "capped_k";
        case HamKind::Restricted: return "restricted";
        case HamKind::Pushforward: return "pushforward";
    }
    return "unknown";
}

Mat Hamiltonian::hessian(const Vec& x) const {
    const Eigen::Index n = x.size();
    Mat Hm(n, n);
    const double h = 1e-5 * std::max(1.0, x.norm());
    for (Eigen::Index i = 0; i < n; ++i) {
        Vec xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        Hm.col(i) = (gradient(xp) - gradient(xm)) / (2.0 * h);
    }
    return 0.5 * (Hm + Hm.transpose());
}

QuadraticH::QuadraticH(double mu) : mu_(mu) { lipschitz = 2.0 * std::abs(mu); }

Mat QuadraticH::hessian(const Vec& x) const { return 2.0 * mu_ * Mat::Identity(x.size(), x.size()); }

RadialF::RadialF(ProfileG g) : g_(g) {
    // sup over t of the largest eigenvalue magnitude of 2g' I + 4g'' x x^T
    double L = 0.0;
    const int n = 4000;
    for (int i = 0; i <= n; ++i) {
        const double t = g_.r * i / n;
        L = std::max({L, 2.0 * std::abs(g_.d1(t)), std::abs(2.0 * g_.d1(t) + 4.0 * t * g_.d2(t))});
    }
    lipschitz = L * 1.01;
}

Vec RadialF::gradient(const Vec& x) const { return 2.0 * g_.d1(x.squaredNorm()) * x; }

Mat RadialF::hessian(const Vec& x) const {
    const double t = x.squaredNorm();
    return 2.0 * g_.d1(t) * Mat::Identity(x.size(), x.size()) + 4.0 * g_.d2(t) * x * x.transpose();
}

CappedK::CappedK(HamPtr inner, QuadraticQ q, ProfileRho rho) : inner_(std::move(inner)), q_(q), rho_(rho) {
    double Lr = 0.0;
    const int n = 4000;
    const double hi = 2.0 * rho_.M_big;
    for (int i = 0; i <= n; ++i) {
        const double t = 1.0 + (hi - 1.0) * i / n;
        Lr = std::max({Lr, 2.0 * rho_.d1(t), std::abs(2.0 * rho_.d1(t) + 4.0 * t * rho_.d2(t))});
    }
    lipschitz = std::max(Lr * 1.01, inner_->lipschitz);
}

double CappedK::value(const Vec& x) const {
    const double qv = q_.value(x);
    return qv < 1.0 ? inner_->value(x) : rho_.value(qv);
}

Vec CappedK::gradient(const Vec& x) const {
    const double qv = q_.value(x);
    if (qv < 1.0) return inner_->gradient(x);
    return 2.0 * rho_.d1(qv) * q_.apply(x);
}

Mat CappedK::hessian(const Vec& x) const {
    const double qv = q_.value(x);
    if (qv < 1.0) return inner_->hessian(x);
    const Vec Qx = q_.apply(x);
    return 2.0 * rho_.d1(qv) * Mat(q_.weights(int(x.size() / 2)).asDiagonal()) +
           4.0 * rho_.d2(qv) * Qx * Qx.transpose();
}

RestrictedH::RestrictedH(HamPtr base, int n) : base_(std::move(base)), n_(n) { lipschitz = base_->lipschitz; }

double RestrictedH::value(const Vec& x) const { return base_->value(project_ambient(x, n_)); }

Vec RestrictedH::gradient(const Vec& x) const {
    return project_ambient(base_->gradient(project_ambient(x, n_)), n_);
}

Mat RestrictedH::hessian(const Vec& x) const {
    Mat Hm = base_->hessian(project_ambient(x, n_));
    const Eigen::Index keep = 2 * n_;
    Hm.bottomRows(Hm.rows() - keep).setZero();
    Hm.rightCols(Hm.cols() - keep).setZero();
    return Hm;
}

HamPtr make_zero() { return std::make_shared<QuadraticH>(0.0); }
HamPtr make_quadratic(double mu) { return std::make_shared<QuadraticH>(mu); }
HamPtr make_F(const ProfileG& g) { return std::make_shared<RadialF>(g); }

bool shell_check(const Hamiltonian& inner, const QuadraticQ& q, double m, int d, const ShellCheck& chk,
                 Vec* witness) {
    std::mt19937_64 rng(chk.seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::uniform_real_distribution<double> ud(0.9, 1.1);
    auto test = [&](Vec u, double target) {
        const double qu = q.value(u);
        if (qu <= 0.0) return true;
        u *= std::sqrt(target / qu);
        if (std::abs(inner.value(u) - m) > chk.tol) {
            if (witness) *witness = u;
            return false;
        }
        return true;
    };
    // axis rays first: they realize the extreme extents of the shell
    for (int i = 0; i < 2 * d; ++i) {
        for (double target : {0.9, 1.0, 1.1}) {
            for (double sgn : {1.0, -1.0}) {
                Vec u = Vec::Zero(2 * d);
                u[i] = sgn;
                if (!test(u, target)) return false;
            }
        }
    }
    for (int s = 0; s < chk.samples; ++s) {
        Vec u(2 * d);
        for (int i = 0; i < 2 * d; ++i) u[i] = nd(rng);
        if (!test(u, ud(rng))) return false;
    }
    return true;
}

HamPtr make_K(HamPtr inner, const QuadraticQ& q, const ProfileRho& rho, int d, const ShellCheck& chk) {
    Vec bad;
    if (!shell_check(*inner, q, rho.m, d, chk, &bad)) {
        std::ostringstream os;
        os << "shell containment failed: inner Hamiltonian differs from m=" << rho.m << " at " << fmt_point(bad)
           << " (q=" << q.value(bad) << ", H=" << inner->value(bad) << ")";
        throw ConstraintError(os.str());
    }
    return std::make_shared<CappedK>(std::move(inner), q, rho);
}

HamPtr restrict_to(HamPtr K, int n, int d) {
    if (n > d || n < 1) throw DimensionError("restriction index must satisfy 1 <= n <= d");
    if (n == d) return K;
    return std::make_shared<RestrictedH>(std::move(K), n);
}

const CappedK* as_capped(const Hamiltonian& H) {
    if (auto* k = dynamic_cast<const CappedK*>(&H)) return k;
    if (auto* r = dynamic_cast<const RestrictedH*>(&H)) return as_capped(*r->base());
    return nullptr;
}

}  // namespace nsq
