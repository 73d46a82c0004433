#pragma once

#include <utility>

#include "nsq/hamiltonians.hpp"
#include "nsq/loop_space.hpp"

namespace nsq {

struct ActionReport {
    double a_value = 0.0;
    double b_value = 0.0;
    double total = 0.0;
    FourierLoop grad_h12;
    double grad_l2_residual = 0.0;
};

/// 1/2 |x+|^2_{1/2} - 1/2 |x-|^2_{1/2}
double quadratic_part(const FourierLoop& x);
/// Trapezoid mean of H over M samples.
double hamiltonian_part(const FourierLoop& x, const Hamiltonian& H, int M);
double action(const FourierLoop& x, const Hamiltonian& H, int M);

/// Coefficients of grad H along the loop, analyzed at the loop's K.
FourierLoop gradient_field(const FourierLoop& x, const Hamiltonian& H, int M);
/// H^{1/2} gradient of b: T*(grad H o x).
FourierLoop grad_b_h12(const FourierLoop& x, const Hamiltonian& H, int M);
/// (P+ - P-) x - T*(grad H o x)
FourierLoop grad_h12(const FourierLoop& x, const Hamiltonian& H, int M);
/// -(J xdot + grad H o x), truncated at K
FourierLoop grad_l2(const FourierLoop& x, const Hamiltonian& H, int M);
double orbit_residual(const FourierLoop& x, const Hamiltonian& H, int M);

/// (|grad_{1/2} A|_1, |grad_{L2} A|_{L2}); throws ConsistencyError past 1e-9.
std::pair<double, double> sandwich_check(const FourierLoop& x, const Hamiltonian& H, int M);

ActionReport evaluate_action(const FourierLoop& x, const Hamiltonian& H, int M);

}  // namespace nsq
