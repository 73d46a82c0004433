#pragma once

#include <Eigen/Dense>

#include "nsq/errors.hpp"

namespace nsq {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Phase space R^{2d} with basis (q1,p1,...,qd,pd), J e_i = f_i, J f_i = -e_i.
class SymplecticSpace {
public:
    explicit SymplecticSpace(int d);

    int pairs() const { return d_; }
    int dim() const { return 2 * d_; }
    Mat J() const;

private:
    int d_;
};

/// J applied to a phase-space vector without forming the matrix.
Vec apply_J(const Vec& v);
/// Columnwise J for a 2d x n block.
Mat apply_J(const Mat& v);
/// e^{theta J} v = cos(theta) v + sin(theta) J v
Vec rotate(const Vec& v, double theta);
/// Matrix of e^{theta J} on R^{2d}.
Mat rotation_matrix(int d, double theta);

/**
 * @brief Truncated loop x(t) = sum_{|k|<=K} e^{2 pi k J t} x^k.
 *
 * Coefficients are stored densely as a 2d x (2K+1) matrix; column k+K holds x^k.
 */
class FourierLoop {
public:
    FourierLoop() = default;
    FourierLoop(int d, int K);
    FourierLoop(int d, int K, Mat coeffs);

    static FourierLoop zero(int d, int K) { return FourierLoop(d, K); }
    static FourierLoop constant(const Vec& v, int K);

    int pairs() const { return d_; }
    int dim() const { return 2 * d_; }
    int order() const { return K_; }
    SymplecticSpace space() const { return SymplecticSpace(d_); }

    auto coeff(int k) { return c_.col(k + K_); }
    auto coeff(int k) const { return c_.col(k + K_); }
    const Mat& coeffs() const { return c_; }
    Mat& coeffs() { return c_; }

    Vec eval(double t) const;
    /// Same loop at truncation K2 (zero-padded or cut).
    FourierLoop with_order(int K2) const;

    FourierLoop& operator+=(const FourierLoop& o);
    FourierLoop& operator-=(const FourierLoop& o);
    FourierLoop& operator*=(double a);

private:
    int d_ = 0;
    int K_ = 0;
    Mat c_;
};

FourierLoop operator+(FourierLoop a, const FourierLoop& b);
FourierLoop operator-(FourierLoop a, const FourierLoop& b);
FourierLoop operator*(double s, FourierLoop a);
FourierLoop operator*(FourierLoop a, double s);

/// <x0,y0> + 2 pi sum_{k!=0} |k|^{2s} <x^k,y^k>; mismatched K is zero-padded.
double hs_inner(const FourierLoop& x, const FourierLoop& y, double s);
double hs_norm(const FourierLoop& x, double s);
double l2_inner(const FourierLoop& x, const FourierLoop& y);
double l2_norm(const FourierLoop& x);

/// Midpoint product rule, band |t-r| < 1/M dropped, periodic distance.
double slobodeckij_seminorm(const FourierLoop& x, double s, int M);

enum class Part { Plus, Zero, Minus };

FourierLoop project(const FourierLoop& x, Part part);
/// Keeps a single mode; |k| > K yields the zero loop.
FourierLoop project_mode(const FourierLoop& x, int k);
/// P_n: zero every symplectic pair with index > n.
FourierLoop project_ambient(const FourierLoop& x, int n);
Vec project_ambient(const Vec& v, int n);

/// Adjoint of H^s -> L^2: y^k / (2 pi |k|^{2s}) for k != 0.
FourierLoop t_star(const FourierLoop& y, double s);

struct GridSamples {
    int M = 0;
    Mat values;  // 2d x M, column j is x(j/M)
};

GridSamples sample(const FourierLoop& x, int M);
FourierLoop analyze(const GridSamples& g, int K);

/// Default grid for nonlinear evaluation.
inline int default_grid(int K) { return 4 * K + 2; }

/// e^+(t) = e^{2 pi t J} e_1 / sqrt(2 pi)
FourierLoop e_plus(int d, int K);

/// Time derivative: mode k becomes 2 pi k J x^k.
FourierLoop derivative(const FourierLoop& x);

}  // namespace nsq
