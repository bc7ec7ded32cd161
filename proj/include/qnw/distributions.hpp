#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qnw/rng.hpp"
#include "qnw/sparse.hpp"

namespace qnw::dist {

/// Resolution of sgn(0) when a row sum vanishes. The paper never defines it;
/// fair-coin keeps every deterministic coordinate exactly unbiased.
enum class TieRule { FairCoin, ConstantPlus };

const char* to_string(TieRule t);
TieRule tie_rule_from_string(const std::string& s);

/// Design sets over a universe [t] plus per-set +-1 negation patterns.
struct NWParams {
    uint32_t universe_size = 0;
    std::vector<std::vector<uint32_t>> sets;
    std::vector<std::vector<int8_t>> patterns;

    void validate() const;  // equal set sizes, matching pattern lengths
    uint32_t set_size() const;
    uint32_t max_intersection() const;
};

/// Sets = supports of the chosen rows (ascending row order), patterns = signs.
NWParams nw_params_from_matrix(const SignedSparseMatrix& a, const std::vector<uint32_t>& rows);

enum class SampleSource { Uniform, Dam, Nw };

struct Sample {
    std::vector<int8_t> bits;  // +-1, length 2N
    uint64_t stream_key = 0;
    SampleSource source = SampleSource::Uniform;
};

// Substream tags within one trial stream (see docs/determinism.md).
inline constexpr uint64_t kTagX = 0;
inline constexpr uint64_t kTagTie = 1;
inline constexpr uint64_t kTagFree = 2;

Sample sample_uniform(uint32_t two_n, const SplitRng& trial_stream);

/// x uniform on {+-1}^N; z_i = sgn(<A_i, x>) for i in R (ties per rule, from the
/// kTagTie substream keyed by the ordinal of i in sorted R), uniform otherwise.
Sample sample_dam(const SignedSparseMatrix& a, const std::vector<uint32_t>& deterministic_rows,
                  const SplitRng& trial_stream, TieRule tie);

/// Output j = sign of sum_{u in S_j} pattern_j[u] * seed[u]; ties resolved per
/// rule from tie_stream word j, so it reproduces sample_dam coordinatewise.
std::vector<int8_t> nw_evaluate(const NWParams& params, const std::vector<int8_t>& seed, TieRule tie,
                                const SplitRng& tie_stream);

/// Permutation placing the deterministic rows first (the paper's prefix form).
/// Returns new-position -> original-row-index.
std::vector<uint32_t> canonical_row_permutation(uint32_t num_rows, const std::vector<uint32_t>& deterministic_rows);

struct NwEquivalenceReport {
    uint64_t trials = 0;
    uint64_t deterministic_mismatches = 0;
    bool deterministic_ok = false;
    double max_abs_free_mean = 0.0;
    double four_sigma = 0.0;
    bool free_ok = false;
    uint32_t ell = 0;
    uint32_t p = 0;
    uint32_t num_sets = 0;

    bool ok() const { return deterministic_ok && free_ok; }
};

/// Shared-seed comparison of sample_dam with (x, NW(x)): deterministic
/// coordinates must agree in every trial; the free coordinates get a 4-sigma
/// marginal frequency test.
NwEquivalenceReport verify_nw_equivalence(const SignedSparseMatrix& a, const std::vector<uint32_t>& rows,
                                          const NWParams& params, uint64_t trials, const SplitRng& root,
                                          TieRule tie);

/// Packed bit export: one bit per +-1 value, +1 <-> 1, LSB-first within bytes,
/// each sample padded to a byte boundary.
void write_packed_samples(std::ostream& out, const std::vector<Sample>& samples);
std::vector<std::vector<int8_t>> read_packed_samples(std::istream& in, uint32_t bits_per_sample,
                                                     uint32_t num_samples);

}  // namespace qnw::dist
