#pragma once

#include <limits>
#include <memory>
#include <string>

#include "nsq/loop_space.hpp"

namespace nsq {

/// C^2 ramp g: 0 below delta, m above r - delta, quintic smoothstep in between.
struct ProfileG {
    double delta = 0.0;
    double r = 0.0;
    double m = 0.0;

    double width() const { return r - 2.0 * delta; }
    double value(double t) const;
    double d1(double t) const;
    double d2(double t) const;
    /// Exact sup of g' (attained mid-ramp).
    double max_slope() const { return 15.0 * m / (8.0 * width()); }
};

/// Unchecked ramp; only requires a nonempty interval. No slope cap.
ProfileG ramp_profile(double delta, double r, double m);
/// Checked: delta < r/2, m > pi, and sup g' < pi. Throws ConstraintError / DomainError.
ProfileG build_g(double delta, double r, double m);
/// Smallest r with the slope cap satisfied at this delta and m.
double minimal_feasible_r(double delta, double m);

/// rho = m on [0,1], quintic bridge on [1, M_big], mu t beyond.
struct ProfileRho {
    double m = 0.0;
    double mu = 0.0;
    double M_big = 0.0;
    double a3 = 0.0, a4 = 0.0, a5 = 0.0;  // bridge in u = (t-1)/(M_big-1)
    int doublings = 0;
    bool adjusted = false;  // M_big moved into the admissible window

    double value(double t) const;
    double d1(double t) const;
    double d2(double t) const;
};

ProfileRho build_rho(double m, double mu, double M_big);

struct QuadraticQ {
    int N = 1;

    double weight(int pair) const { return pair == 0 ? 1.0 : 1.0 / (double(N) * N); }
    double value(const Vec& x) const;
    Vec apply(const Vec& x) const;
    Vec weights(int d) const;
};

enum class HamKind { Zero, Quadratic, RadialF, CappedK, Restricted, Pushforward };

std::string to_string(HamKind k);

class Hamiltonian {
public:
    virtual ~Hamiltonian() = default;
    virtual double value(const Vec& x) const = 0;
    virtual Vec gradient(const Vec& x) const = 0;
    /// Central differences of the gradient unless overridden.
    virtual Mat hessian(const Vec& x) const;
    virtual HamKind kind() const = 0;

    /// Declared Lipschitz constant of the gradient (NaN if unknown).
    double lipschitz = std::numeric_limits<double>::quiet_NaN();
};

using HamPtr = std::shared_ptr<const Hamiltonian>;

class QuadraticH final : public Hamiltonian {
public:
    explicit QuadraticH(double mu);
    double value(const Vec& x) const override { return mu_ * x.squaredNorm(); }
    Vec gradient(const Vec& x) const override { return 2.0 * mu_ * x; }
    Mat hessian(const Vec& x) const override;
    HamKind kind() const override { return mu_ == 0.0 ? HamKind::Zero : HamKind::Quadratic; }
    double mu() const { return mu_; }

private:
    double mu_;
};

class RadialF final : public Hamiltonian {
public:
    explicit RadialF(ProfileG g);
    double value(const Vec& x) const override { return g_.value(x.squaredNorm()); }
    Vec gradient(const Vec& x) const override;
    Mat hessian(const Vec& x) const override;
    HamKind kind() const override { return HamKind::RadialF; }
    const ProfileG& profile() const { return g_; }

private:
    ProfileG g_;
};

class CappedK final : public Hamiltonian {
public:
    CappedK(HamPtr inner, QuadraticQ q, ProfileRho rho);
    double value(const Vec& x) const override;
    Vec gradient(const Vec& x) const override;
    Mat hessian(const Vec& x) const override;
    HamKind kind() const override { return HamKind::CappedK; }

    const HamPtr& inner() const { return inner_; }
    const QuadraticQ& q() const { return q_; }
    const ProfileRho& rho() const { return rho_; }
    double plateau() const { return rho_.m; }

private:
    HamPtr inner_;
    QuadraticQ q_;
    ProfileRho rho_;
};

class RestrictedH final : public Hamiltonian {
public:
    RestrictedH(HamPtr base, int n);
    double value(const Vec& x) const override;
    Vec gradient(const Vec& x) const override;
    Mat hessian(const Vec& x) const override;
    HamKind kind() const override { return HamKind::Restricted; }
    const HamPtr& base() const { return base_; }
    int pairs() const { return n_; }

private:
    HamPtr base_;
    int n_;
};

HamPtr make_zero();
HamPtr make_quadratic(double mu);
HamPtr make_F(const ProfileG& g);

struct ShellCheck {
    int samples = 4000;
    unsigned long long seed = 17;
    double tol = 1e-12;
};

/// Builds K after verifying inner == m on 0.9 <= q <= 1.1 in R^{2d}.
HamPtr make_K(HamPtr inner, const QuadraticQ& q, const ProfileRho& rho, int d, const ShellCheck& chk = {});
/// Shell test alone; returns false and the first violating point.
bool shell_check(const Hamiltonian& inner, const QuadraticQ& q, double m, int d, const ShellCheck& chk,
                 Vec* witness = nullptr);
HamPtr restrict_to(HamPtr K, int n, int d);

/// Walk up through Restricted wrappers to the CappedK, or nullptr.
const CappedK* as_capped(const Hamiltonian& H);

}  // namespace nsq
