#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qnw/circuit.hpp"
#include "qnw/distributions.hpp"
#include "qnw/rng.hpp"
#include "qnw/sparse.hpp"

namespace qnw::analysis {

/// Frozen constant for the k-wise bound c * p * k^2 / sqrt(l): 2*sqrt(2/pi),
/// calibrated from the central-binomial step and validated against the
/// exhaustive computation before being pinned here.
inline constexpr double kKWiseBoundConstant = 1.5957691216057308;

struct KWiseReport {
    uint32_t k = 0;
    double epsilon_measured = 0.0;
    double bound_value = 0.0;
    std::vector<uint32_t> worst_indices;
    std::vector<int> worst_assignment;  // bits, +1 <-> 1
    double worst_probability = 0.0;
    std::string method;  // "exhaustive" | "monte-carlo"
    uint64_t trials = 0;  // 0 for exhaustive
    uint32_t ell = 0;
    uint32_t p = 0;
};

/// Exact joint probabilities of the (seed, NW output) variable by enumerating
/// all 2^t seeds, splitting tie mass analytically, maximized over all k-tuples
/// of the t+m coordinates and all assignments. Guards: 2^t <= 2^20, k <= 4.
KWiseReport kwise_epsilon_exact(const dist::NWParams& params, uint32_t k, dist::TieRule tie);

/// Monte Carlo estimate over sampled seeds (trials >= 10^4).
KWiseReport kwise_epsilon_mc(const dist::NWParams& params, uint32_t k, uint64_t trials, const SplitRng& root,
                             dist::TieRule tie);

/// Exact joint probability of one index tuple (distinct indices required).
double kwise_probability_exact(const dist::NWParams& params, const std::vector<uint32_t>& indices,
                               const std::vector<int>& assignment, dist::TieRule tie);

struct GapReport {
    double accept_mean_dam = 0.0;
    double accept_mean_uniform = 0.0;
    double halfwidth_dam = 0.0;      // 95%, normal approximation
    double halfwidth_uniform = 0.0;
    uint64_t trials = 0;
    std::string tie_rule;
    std::string mode;  // "exact" | "circuit"
    uint32_t num_deterministic_rows = 0;
    std::vector<double> per_trial_dam;
    std::vector<double> per_trial_uniform;

    double gap() const { return accept_mean_dam - accept_mean_uniform; }
};

/// Mean acceptance of the distinguisher under D_{A,R} and under U_{2N}.
/// Acceptance per sample is deterministic (exact formula, or the statevector
/// circuit when one is supplied).
GapReport gap_experiment(const SignedSparseMatrix& a, const std::vector<uint32_t>& deterministic_rows,
                         const circuit::Circuit* circ, uint64_t trials, const SplitRng& root, dist::TieRule tie);

/// Exact Pr[x_1 = majority(x)] on l bits: 1/2 + C(l-1,(l-1)/2)/2^l for odd l;
/// even l uses the fair-coin rule, 1/2 + C(l-1, l/2-1)/2^l.
double baseline_first_bit(uint32_t ell);

}  // namespace qnw::analysis
