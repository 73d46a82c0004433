#include "nsq/action.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace nsq {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

double quadratic_part(const FourierLoop& x) {
    double acc = 0.0;
    for (int k = 1; k <= x.order(); ++k) acc += k * (x.coeff(k).squaredNorm() - x.coeff(-k).squaredNorm());
    return 0.5 * kTwoPi * acc;
}

double hamiltonian_part(const FourierLoop& x, const Hamiltonian& H, int M) {
    const GridSamples g = sample(x, M);
    double acc = 0.0;
    for (int j = 0; j < M; ++j) acc += H.value(g.values.col(j));
    return acc / M;
}

double action(const FourierLoop& x, const Hamiltonian& H, int M) {
    return quadratic_part(x) - hamiltonian_part(x, H, M);
}

FourierLoop gradient_field(const FourierLoop& x, const Hamiltonian& H, int M) {
    GridSamples g = sample(x, M);
    for (int j = 0; j < M; ++j) g.values.col(j) = H.gradient(g.values.col(j));
    return analyze(g, x.order());
}

FourierLoop grad_b_h12(const FourierLoop& x, const Hamiltonian& H, int M) {
    return t_star(gradient_field(x, H, M), 0.5);
}

FourierLoop grad_h12(const FourierLoop& x, const Hamiltonian& H, int M) {
    return project(x, Part::Plus) - project(x, Part::Minus) - grad_b_h12(x, H, M);
}

FourierLoop grad_l2(const FourierLoop& x, const Hamiltonian& H, int M) {
    FourierLoop out = gradient_field(x, H, M);
    // J xdot has mode k equal to -2 pi k x^k
    for (int k = -x.order(); k <= x.order(); ++k) out.coeff(k) = kTwoPi * k * x.coeff(k) - out.coeff(k);
    return out;
}

double orbit_residual(const FourierLoop& x, const Hamiltonian& H, int M) { return l2_norm(grad_l2(x, H, M)); }

std::pair<double, double> sandwich_check(const FourierLoop& x, const Hamiltonian& H, int M) {
    const double lo = hs_norm(grad_h12(x, H, M), 1.0);
    const double mid = orbit_residual(x, H, M);
    const double tol = 1e-9;
    if (lo > mid + tol || mid > kTwoPi * lo + tol) {
        std::ostringstream os;
        os.precision(17);
        os << "sandwich inequality violated: |grad_1/2|_1=" << lo << ", |grad_L2|=" << mid;
        throw ConsistencyError(os.str());
    }
    return {lo, mid};
}

ActionReport evaluate_action(const FourierLoop& x, const Hamiltonian& H, int M) {
    ActionReport r;
    r.a_value = quadratic_part(x);
    r.b_value = hamiltonian_part(x, H, M);
    r.total = r.a_value - r.b_value;
    r.grad_h12 = grad_h12(x, H, M);
    r.grad_l2_residual = orbit_residual(x, H, M);
    return r;
}

}  // namespace nsq
