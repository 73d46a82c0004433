#pragma once

#include <vector>

#include "nsq/action.hpp"
#include "nsq/hamiltonians.hpp"
#include "nsq/loop_space.hpp"

namespace nsq {

struct LinkingSets {
    double alpha = 0.25;
    double tau = 8.0;
    Vec shift;  // base point phi(0); zero if empty
    int d = 1;
    int K = 16;

    FourierLoop shift_loop() const;
    FourierLoop eplus() const { return e_plus(d, K); }
};

struct SigmaCounts {
    int n_minus = 6;
    int n_zero = 4;
    int n_s = 9;
};

struct FlowConfig {
    double h = 0.02;
    double T = 6.0;
    SigmaCounts counts;
    int refine_budget = 16;   // extra samples around the initial argmax
    int chain_budget = 400;   // midpoints inserted along the e^+ ray path
    double chain_gap = 0.05;  // H^{1/2} length above which a link is split
    double eps_grad = 1e-4;
    double dedup = 1e-3;
    int max_candidates = 64;
    int record_every = 5;
    int M = 0;  // 0 means 4K+2
    unsigned long long seed = 1;
    int threads = 1;
    double blowup = 1e6;
    double monotone_tol = 1e-6;
    double link_tol = 1e-2;  // H^{1/2} distance for a sample to count as meeting Gamma
    int gamma_count = 64;
};

struct SigmaSample {
    FourierLoop x;
    double s = 0.0;       // e^+ coordinate
    double radius = 0.0;  // |x^- + x^0|_{1/2}
    int dir = -1;         // -1 for the e^+ ray
};

struct MinimaxTrace {
    std::vector<double> times;
    std::vector<double> sup_estimates;
    std::vector<double> witness_grad;
    std::vector<FourierLoop> witnesses;
    std::vector<FourierLoop> ps_candidates;
    std::vector<double> candidate_grad;
    std::vector<double> candidate_action;
    // c is the least sup over recorded times; when the linking geometry holds
    // (geometry_ok) only times at which the samples still meet Gamma count
    double c_estimate = 0.0;
    int c_index = 0;
    bool c_linked = false;
    bool geometry_ok = false;
    double boundary_max = 0.0;
    double gamma_inf = 0.0;
    std::vector<bool> linked;
    int witness_index = 0;  // qualifying time with the smallest witness gradient
    double initial_sup = 0.0;
    double max_monotone_violation = 0.0;
    int restarts = 0;
    double h_used = 0.0;
    int sample_count = 0;
    unsigned long long seed = 0;
    // per recorded time, per sample: |x^+|_{1/2} and |x^- + x^0 - shift|_{1/2}
    std::vector<std::vector<double>> plus_norm;
    std::vector<std::vector<double>> rest_norm;
    std::vector<std::vector<int>> ray_chain;  // per recorded time, ray path in order
    int chain_insertions = 0;
};

/// Exponential Euler for xdot = x^- - x^+ + grad_{1/2} b(x).
FourierLoop flow_step(const FourierLoop& x, const Hamiltonian& H, double h, int M);

/// Lattice over directions x radii x s, all faces included, seeded directions.
std::vector<SigmaSample> sample_sigma(const LinkingSets& sets, int n, const SigmaCounts& counts,
                                      unsigned long long seed = 1);
/// Only the samples on the boundary faces s=0, s=tau, |x^- + x^0| = tau.
std::vector<SigmaSample> sample_sigma_boundary(const LinkingSets& sets, int n, const SigmaCounts& counts,
                                               unsigned long long seed = 1);
/// shift + alpha e^+ plus seeded directions on the sphere of E^+_n.
std::vector<FourierLoop> sample_gamma(const LinkingSets& sets, int n, int count, unsigned long long seed = 2);

double inf_gamma(const Hamiltonian& H, const LinkingSets& sets, int n, int count, int M, unsigned long long seed = 2);
double sup_sigma(const Hamiltonian& H, const LinkingSets& sets, int n, const SigmaCounts& counts, int M,
                 unsigned long long seed = 1);
double sup_boundary(const Hamiltonian& H, const LinkingSets& sets, int n, const SigmaCounts& counts, int M,
                    unsigned long long seed = 1);

struct SweepResult {
    double value = 0.0;
    double objective = 0.0;  // inf over Gamma or max over boundary at the chosen value
    bool hit_bound = false;
    int evaluations = 0;
};

/// Largest dyadic alpha with inf over Gamma_alpha of A > 0.
SweepResult alpha_sweep(const Hamiltonian& H, LinkingSets sets, int n, int count, int M);
/// Smallest dyadic tau with max over boundary of Sigma_tau of A <= 0.
SweepResult tau_sweep(const Hamiltonian& H, LinkingSets sets, int n, const SigmaCounts& counts, int M);

MinimaxTrace estimate_minimax(const Hamiltonian& H, const LinkingSets& sets, int n, const FlowConfig& cfg);

struct LinkingResult {
    bool linked = true;
    std::vector<double> distance;  // per recorded time
};

LinkingResult check_linking(const MinimaxTrace& trace, const LinkingSets& sets, double tol);

struct NewtonResult {
    FourierLoop loop;
    double residual = 0.0;
    double initial_residual = 0.0;
    int iterations = 0;
    bool stagnated = false;
};

/// Gauss-Newton on R(x)^k = -2 pi k x^k + (grad H o x)^k with backtracking.
NewtonResult refine_newton(const FourierLoop& x0, const Hamiltonian& H, int iters, int M, double tol = 1e-12);

}  // namespace nsq
