#include "qnw/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "qnw/errors.hpp"
#include "qnw/sim.hpp"

namespace qnw::analysis {

namespace {

using dist::NWParams;
using dist::TieRule;

std::vector<std::vector<uint32_t>> k_subsets(uint32_t r, uint32_t k) {
    std::vector<std::vector<uint32_t>> out;
    std::vector<uint32_t> cur(k);
    // lexicographic enumeration of increasing k-tuples
    for (uint32_t i = 0; i < k; ++i) cur[i] = i;
    if (k == 0 || k > r) return out;
    while (true) {
        out.push_back(cur);
        int i = static_cast<int>(k) - 1;
        while (i >= 0 && cur[i] == r - k + i) --i;
        if (i < 0) break;
        ++cur[i];
        for (uint32_t j = static_cast<uint32_t>(i) + 1; j < k; ++j) cur[j] = cur[j - 1] + 1;
    }
    return out;
}

// Mass that coordinate c takes value 1 (sign +1) given the seed; deterministic
// bits give 0/1, a fair-coin tie gives 1/2.
void coordinate_mass(const NWParams& params, uint64_t seed, TieRule tie, std::vector<double>& m1,
                     std::vector<int8_t>& signs) {
    const uint32_t t = params.universe_size;
    for (uint32_t i = 0; i < t; ++i) {
        const int bit = static_cast<int>(seed >> i & 1);
        m1[i] = bit;
        signs[i] = bit ? int8_t{+1} : int8_t{-1};
    }
    for (size_t j = 0; j < params.sets.size(); ++j) {
        long long sum = 0;
        for (size_t u = 0; u < params.sets[j].size(); ++u)
            sum += static_cast<long long>(params.patterns[j][u]) * signs[params.sets[j][u]];
        m1[t + j] = sum > 0 ? 1.0 : sum < 0 ? 0.0 : (tie == TieRule::FairCoin ? 0.5 : 1.0);
    }
}

void check_exhaustive_guard(const NWParams& params, uint32_t k) {
    if (params.universe_size > 20) throw resource_error("analysis: exhaustive guard 2^t <= 2^20 exceeded");
    if (k < 1 || k > 4) throw std::invalid_argument("analysis: k must be in [1,4]");
}

KWiseReport make_report(const NWParams& params, uint32_t k) {
    KWiseReport rep;
    rep.k = k;
    rep.ell = params.set_size();
    rep.p = params.max_intersection();
    rep.bound_value = kKWiseBoundConstant * rep.p * static_cast<double>(k) * k / std::sqrt(rep.ell);
    return rep;
}

double halfwidth95(const std::vector<double>& xs, double mean) {
    if (xs.size() < 2) return 0.0;
    double ss = 0.0;
    for (double v : xs) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    return 1.96 * sd / std::sqrt(static_cast<double>(xs.size()));
}

}  // namespace

KWiseReport kwise_epsilon_exact(const NWParams& params, uint32_t k, TieRule tie) {
    params.validate();
    check_exhaustive_guard(params, k);
    const uint32_t t = params.universe_size;
    const uint32_t r = t + static_cast<uint32_t>(params.sets.size());
    if (k > r) throw std::invalid_argument("analysis: k exceeds the number of coordinates");

    const auto tuples = k_subsets(r, k);
    const uint32_t num_assignments = 1u << k;
    std::vector<double> acc(tuples.size() * num_assignments, 0.0);

    std::vector<double> m1(r);
    std::vector<int8_t> signs(t);
    const uint64_t num_seeds = uint64_t{1} << t;
    for (uint64_t seed = 0; seed < num_seeds; ++seed) {
        coordinate_mass(params, seed, tie, m1, signs);
        for (size_t ti = 0; ti < tuples.size(); ++ti) {
            const auto& tu = tuples[ti];
            for (uint32_t asg = 0; asg < num_assignments; ++asg) {
                double prod = 1.0;
                for (uint32_t b = 0; b < k; ++b) {
                    const double m = m1[tu[b]];
                    prod *= (asg >> b & 1) ? m : 1.0 - m;
                }
                acc[ti * num_assignments + asg] += prod;
            }
        }
    }

    KWiseReport rep = make_report(params, k);
    rep.method = "exhaustive";
    const double norm = 1.0 / static_cast<double>(num_seeds);
    const double scale = static_cast<double>(num_assignments);  // 1/2^-k
    for (size_t ti = 0; ti < tuples.size(); ++ti)
        for (uint32_t asg = 0; asg < num_assignments; ++asg) {
            const double rho = acc[ti * num_assignments + asg] * norm;
            const double dev = std::fabs(rho * scale - 1.0);
            if (dev > rep.epsilon_measured) {
                rep.epsilon_measured = dev;
                rep.worst_indices = tuples[ti];
                rep.worst_assignment.assign(k, 0);
                for (uint32_t b = 0; b < k; ++b) rep.worst_assignment[b] = asg >> b & 1;
                rep.worst_probability = rho;
            }
        }
    if (rep.worst_indices.empty() && !tuples.empty()) {
        rep.worst_indices = tuples.front();
        rep.worst_assignment.assign(k, 0);
        rep.worst_probability = acc[0] * norm;
    }
    return rep;
}

double kwise_probability_exact(const NWParams& params, const std::vector<uint32_t>& indices,
                               const std::vector<int>& assignment, TieRule tie) {
    params.validate();
    const uint32_t t = params.universe_size;
    const uint32_t r = t + static_cast<uint32_t>(params.sets.size());
    if (t > 20) throw resource_error("analysis: exhaustive guard 2^t <= 2^20 exceeded");
    if (indices.size() != assignment.size() || indices.empty())
        throw std::invalid_argument("analysis: indices/assignment mismatch");
    std::set<uint32_t> distinct(indices.begin(), indices.end());
    if (distinct.size() != indices.size())
        throw std::invalid_argument("analysis: indices must be distinct");
    for (uint32_t i : indices)
        if (i >= r) throw std::invalid_argument("analysis: index out of range");

    std::vector<double> m1(r);
    std::vector<int8_t> signs(t);
    double total = 0.0;
    const uint64_t num_seeds = uint64_t{1} << t;
    for (uint64_t seed = 0; seed < num_seeds; ++seed) {
        coordinate_mass(params, seed, tie, m1, signs);
        double prod = 1.0;
        for (size_t b = 0; b < indices.size(); ++b) {
            const double m = m1[indices[b]];
            prod *= assignment[b] ? m : 1.0 - m;
        }
        total += prod;
    }
    return total / static_cast<double>(num_seeds);
}

KWiseReport kwise_epsilon_mc(const NWParams& params, uint32_t k, uint64_t trials, const SplitRng& root,
                             TieRule tie) {
    params.validate();
    if (trials < 10000) throw std::invalid_argument("analysis: monte-carlo needs trials >= 10^4");
    if (k < 1 || k > 4) throw std::invalid_argument("analysis: k must be in [1,4]");
    const uint32_t t = params.universe_size;
    const uint32_t r = t + static_cast<uint32_t>(params.sets.size());
    if (k > r) throw std::invalid_argument("analysis: k exceeds the number of coordinates");

    const auto tuples = k_subsets(r, k);
    const uint32_t num_assignments = 1u << k;
    std::vector<uint64_t> counts(tuples.size() * num_assignments, 0);

    std::vector<int8_t> joint(r);
    std::vector<int8_t> seed(t);
    for (uint64_t trial = 0; trial < trials; ++trial) {
        const SplitRng stream = root.derive(trial);
        const SplitRng xs = stream.derive(dist::kTagX);
        for (uint32_t i = 0; i < t; ++i) {
            seed[i] = xs.sign_at(i);
            joint[i] = seed[i];
        }
        const auto out = dist::nw_evaluate(params, seed, tie, stream.derive(dist::kTagTie));
        for (size_t j = 0; j < out.size(); ++j) joint[t + j] = out[j];
        for (size_t ti = 0; ti < tuples.size(); ++ti) {
            uint32_t asg = 0;
            for (uint32_t b = 0; b < k; ++b)
                if (joint[tuples[ti][b]] > 0) asg |= 1u << b;
            ++counts[ti * num_assignments + asg];
        }
    }

    KWiseReport rep = make_report(params, k);
    rep.method = "monte-carlo";
    rep.trials = trials;
    const double scale = static_cast<double>(num_assignments);
    for (size_t ti = 0; ti < tuples.size(); ++ti)
        for (uint32_t asg = 0; asg < num_assignments; ++asg) {
            const double rho = static_cast<double>(counts[ti * num_assignments + asg]) / static_cast<double>(trials);
            const double dev = std::fabs(rho * scale - 1.0);
            if (dev > rep.epsilon_measured) {
                rep.epsilon_measured = dev;
                rep.worst_indices = tuples[ti];
                rep.worst_assignment.assign(k, 0);
                for (uint32_t b = 0; b < k; ++b) rep.worst_assignment[b] = asg >> b & 1;
                rep.worst_probability = rho;
            }
        }
    return rep;
}

GapReport gap_experiment(const SignedSparseMatrix& a, const std::vector<uint32_t>& deterministic_rows,
                         const circuit::Circuit* circ, uint64_t trials, const SplitRng& root, TieRule tie) {
    if (trials < 1000) throw std::invalid_argument("analysis: gap experiment needs trials >= 10^3");
    sim::validate_qa_matrix(a);
    if (circ && circ->dimension != a.num_cols) throw std::invalid_argument("analysis: circuit dimension mismatch");

    const uint32_t n = a.num_cols;
    GapReport rep;
    rep.trials = trials;
    rep.tie_rule = dist::to_string(tie);
    rep.mode = circ ? "circuit" : "exact";
    rep.num_deterministic_rows = static_cast<uint32_t>(deterministic_rows.size());
    rep.per_trial_dam.reserve(trials);
    rep.per_trial_uniform.reserve(trials);

    auto acceptance = [&](const dist::Sample& s) {
        const sim::SignString x(s.bits.begin(), s.bits.begin() + n);
        const sim::SignString z(s.bits.begin() + n, s.bits.end());
        return circ ? sim::run_qa_circuit(x, z, *circ) : sim::qa_exact_prevalidated(x, z, a);
    };

    double sum_dam = 0.0, sum_unif = 0.0;
    for (uint64_t t = 0; t < trials; ++t) {
        const auto dam = dist::sample_dam(a, deterministic_rows, root.derive(2 * t), tie);
        const auto unif = dist::sample_uniform(2 * n, root.derive(2 * t + 1));
        const double pd = acceptance(dam);
        const double pu = acceptance(unif);
        rep.per_trial_dam.push_back(pd);
        rep.per_trial_uniform.push_back(pu);
        sum_dam += pd;
        sum_unif += pu;
    }
    rep.accept_mean_dam = sum_dam / static_cast<double>(trials);
    rep.accept_mean_uniform = sum_unif / static_cast<double>(trials);
    rep.halfwidth_dam = halfwidth95(rep.per_trial_dam, rep.accept_mean_dam);
    rep.halfwidth_uniform = halfwidth95(rep.per_trial_uniform, rep.accept_mean_uniform);
    return rep;
}

double baseline_first_bit(uint32_t ell) {
    if (ell < 1) throw std::invalid_argument("analysis: l must be >= 1");
    if (ell > 62) throw resource_error("analysis: l must be <= 62 for exact integer binomials");
    // Pascal row l-1
    std::vector<unsigned long long> row(ell, 0);
    row[0] = 1;
    for (uint32_t i = 1; i < ell; ++i)
        for (uint32_t j = i; j > 0; --j) row[j] += row[j - 1];
    const uint32_t idx = (ell % 2 == 1) ? (ell - 1) / 2 : ell / 2 - 1;
    return 0.5 + static_cast<double>(row[idx]) / std::ldexp(1.0, static_cast<int>(ell));
}

}  // namespace qnw::analysis
