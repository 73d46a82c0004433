#pragma once

#include <random>
#include <string>
#include <utility>
#include <vector>

#include "nsq/hamiltonians.hpp"
#include "nsq/loop_space.hpp"
#include "nsq/symplectomorphisms.hpp"

namespace nsq {

struct SuiteResult {
    std::string name;
    bool pass = true;
    std::vector<std::pair<std::string, double>> metrics;
    std::vector<std::string> notes;

    void metric(const std::string& key, double v) { metrics.emplace_back(key, v); }
    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            notes.push_back("failed: " + what);
        }
    }
};

/// Gaussian coefficients scaled by amp / (1 + |k|)^p.
FourierLoop random_loop(std::mt19937_64& rng, int d, int K, double amp, double p);

/// Catalogue used by the gradient suite: (label, Hamiltonian) at the given d.
std::vector<std::pair<std::string, HamPtr>> hamiltonian_catalogue(int d);

/// K built the way the nonsqueeze pipeline builds it for the identity map (fit mode).
HamPtr reference_K(int d);

/// H^{1/2} operator norm of (L_*)^{-T} at truncation K, for linear L.
double pushforward_gradient_bound(const Symplectomorphism& L, int d, int K);

SuiteResult verify_adjoint(unsigned long long seed);
SuiteResult verify_gradient(unsigned long long seed);
SuiteResult verify_decay(unsigned long long seed);
SuiteResult verify_transport(unsigned long long seed);
SuiteResult verify_admissibility(unsigned long long seed);
SuiteResult verify_flow(unsigned long long seed);
SuiteResult verify_dichotomy(unsigned long long seed);

const std::vector<std::string>& suite_names();
/// Throws std::invalid_argument on an unknown name.
SuiteResult run_suite(const std::string& name, unsigned long long seed);

}  // namespace nsq
