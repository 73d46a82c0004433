#pragma once

#include <string>
#include <vector>

#include "nsq/hamiltonians.hpp"
#include "nsq/minimax_flow.hpp"
#include "nsq/ps_diagnostics.hpp"
#include "nsq/symplectomorphisms.hpp"

namespace nsq {

enum class FitMode { Fit, Strict };

struct NonsqueezeConfig {
    int d = 2;
    int K = 16;
    int M = 0;  // 0 means 4K+2
    double r = 1.5;
    double m = 4.0;
    double mu = 3.5;
    double M_big = 8.0;
    double delta = 0.0;  // 0 means 0.05 r^2
    int N = 0;           // 0: smallest passing value up to N_max
    int N_max = 16;
    FitMode mode = FitMode::Fit;
    MapPtr map;  // identity if null
    std::vector<int> ladder;  // empty means 1..d
    double alpha = 0.0;  // 0: dyadic sweep
    double tau = 0.0;    // 0: dyadic sweep
    int gamma_count = 64;
    FlowConfig flow;
    int newton_iters = 30;
    int newton_starts = 4;
    double residual_tol = 1e-6;
    int collar_samples = 4000;
    double eta = 0.0;  // 0 means half the measured collar
    ShellCheck shell;
    LevelTolerances level;
    int bisection_steps = 30;
};

struct CandidateRow {
    double action = 0.0;
    double grad = 0.0;
    double residual = 0.0;
    bool refined = false;
    Support support = Support::Inside;
    bool verdict_pass = true;  // outside candidates only
    double d_mean = 0.0;
    bool resonant = false;
    double xi = 0.0;
};

struct LadderRow {
    int n = 0;
    double alpha = 0.0;
    bool alpha_hit_bound = false;
    double tau = 0.0;
    bool tau_hit_bound = false;
    double boundary_max = 0.0;
    double inf_gamma = 0.0;
    double sup_sigma = 0.0;
    double c_estimate = 0.0;
    bool c_linked = false;
    bool linked_all = false;
    int samples = 0;
    int restarts = 0;
    double h_used = 0.0;
    double final_sup = 0.0;
    // refined critical orbit
    FourierLoop orbit;
    double orbit_action = 0.0;
    double orbit_residual = 0.0;
    int newton_iterations = 0;
    bool newton_stagnated = false;
    int newton_start = 0;
    Support orbit_support = Support::Inside;
    bool level_ok = false;     // 0 < A <= m
    bool sandwich_ok = false;  // inf Gamma <= A <= sup Sigma
    std::vector<CandidateRow> candidates;
    int straddling = 0;
    bool outside_verdict = true;
    // PS transport to the F side
    double grad_K = 0.0;
    double grad_F_pulled = 0.0;
    MinimaxTrace trace;
};

struct NonsqueezeReport {
    double r_requested = 0.0;
    double r_used = 0.0;
    bool fitted = false;
    std::string obstruction;  // shell failure at the requested radius
    ProfileG g;
    double delta = 0.0;
    double g_max_slope = 0.0;
    bool slope_cap_violated = false;
    double minimal_feasible_r = 0.0;
    int N = 1;
    ProfileRho rho;
    double collar = 0.0;
    double eta = 0.0;
    std::vector<double> sigma;  // boundedness probe at K, 2K
    std::vector<LadderRow> rows;
    bool c_monotone = true;
    bool c_stabilizing = true;
    MapKind map_kind = MapKind::Identity;
};

/// Full chain: g, F, shell/N, rho, K, K_n ladder with minimax, Newton, diagnostics.
NonsqueezeReport run_nonsqueeze(const NonsqueezeConfig& cfg);

}  // namespace nsq
