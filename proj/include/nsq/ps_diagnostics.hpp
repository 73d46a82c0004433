#pragma once

#include <string>
#include <vector>

#include "nsq/action.hpp"
#include "nsq/hamiltonians.hpp"
#include "nsq/loop_space.hpp"

namespace nsq {

struct PSCandidate {
    FourierLoop loop;
    double grad_norm_h12 = 0.0;
    double action = 0.0;
    double h1_norm = 0.0;
    double uniform_energy_spread = 0.0;  // max - min of H(x(t)) on the grid
    double residual = 0.0;               // L2 orbit residual
};

PSCandidate make_candidate(const FourierLoop& x, const Hamiltonian& H, int M);

/// y = x - (P+ - P-) grad_{1/2} A_H(x)
FourierLoop smooth_once(const FourierLoop& x, const Hamiltonian& H, int M);

struct DecayFit {
    std::vector<double> mode_norms;  // index |k| = 0..K, norm of (y^k, y^{-k})
    double exponent = 0.0;           // +inf when the tail is zero
    double constant = 0.0;
    double residual = 0.0;           // rms of the log-log fit
    int kmin = 0, kmax = 0;
};

DecayFit decay_fit(const FourierLoop& y);

enum class Support { Inside, Outside, Straddling };
std::string to_string(Support s);

/// Membership of every grid sample in {H < m} + B_eta, H the inner Hamiltonian of K.
Support classify_support(const FourierLoop& x, const Hamiltonian& Kh, double eta, int M, const Vec& shift = Vec());

/// Smallest measured distance from sampled points of {H < m} to {q >= 1}.
double measure_collar(const CappedK& K, int d, int samples, double radius, unsigned long long seed);

struct CandidateVerdict {
    bool included = true;
    double action = 0.0;
    double grad = 0.0;
    double d_mean = 0.0;
    double d_spread = 0.0;
    bool resonant = false;
    double xi = 0.0;
    double xi_residual = 0.0;
    double bound = 0.0;
    double plus_minus_one = 0.0;  // |x^+ - x^1|_{1/2}
    double minus_norm = 0.0;      // |x^-|_{1/2}
    double one_norm = 0.0;        // |x^1|_{1/2}
    bool pass = true;
};

struct LevelVerdict {
    bool pass = true;
    int excluded = 0;
    std::vector<CandidateVerdict> items;
};

struct LevelTolerances {
    double eps_grad = 1e-4;
    double action_tol = 1e-3;
    double resonance_band = 0.05;
    double slope_margin = 0.05;
    double spread_max = 0.05;
};

LevelVerdict level_sign_radial(const std::vector<PSCandidate>& cands, const RadialF& F, int M,
                               const LevelTolerances& tol = {});
LevelVerdict level_sign_quadratic_tail(const std::vector<PSCandidate>& cands, const CappedK& K, int M,
                                       const LevelTolerances& tol = {});

struct BoundednessReport {
    std::vector<int> orders;
    std::vector<double> sigma;        // smallest mode-operator singular value per truncation
    std::vector<double> seed_ratio;   // min |L y| / |y| over the seeds per truncation
    double mu = 0.0;
    int N = 1;
};

/// L y = y^+ - y^- - grad_{1/2}(mu q)(y): its mode-k action in plane i.
double mode_operator(double mu, double Qi, int k);
/// sigma for the operator with mu replaced by a plateau slope d.
double mode_operator_min(double slope, const QuadraticQ& q, int d, int K, bool skip_resonant = false);
BoundednessReport boundedness_probe(const CappedK& K, int d, const std::vector<int>& orders,
                                    const std::vector<FourierLoop>& seeds);

}  // namespace nsq
