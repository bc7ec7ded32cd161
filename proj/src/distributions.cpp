#include "qnw/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace qnw::dist {

const char* to_string(TieRule t) { return t == TieRule::FairCoin ? "fair-coin" : "constant-plus"; }

TieRule tie_rule_from_string(const std::string& s) {
    if (s == "fair" || s == "fair-coin") return TieRule::FairCoin;
    if (s == "plus" || s == "constant-plus") return TieRule::ConstantPlus;
    throw std::invalid_argument("dist: unknown tie rule '" + s + "'");
}

void NWParams::validate() const {
    if (sets.size() != patterns.size()) throw std::invalid_argument("dist: sets/patterns length mismatch");
    if (sets.empty()) throw std::invalid_argument("dist: empty design");
    const size_t ell = sets.front().size();
    for (size_t j = 0; j < sets.size(); ++j) {
        if (sets[j].size() != ell) throw std::invalid_argument("dist: design sets must have equal cardinality");
        if (patterns[j].size() != ell) throw std::invalid_argument("dist: pattern length mismatch");
        for (uint32_t u : sets[j])
            if (u >= universe_size) throw std::invalid_argument("dist: set element outside the universe");
        for (int8_t s : patterns[j])
            if (s != 1 && s != -1) throw std::invalid_argument("dist: pattern entries must be +-1");
    }
}

uint32_t NWParams::set_size() const { return sets.empty() ? 0 : static_cast<uint32_t>(sets.front().size()); }

uint32_t NWParams::max_intersection() const {
    uint32_t p = 0;
    for (size_t i = 0; i < sets.size(); ++i)
        for (size_t j = i + 1; j < sets.size(); ++j) {
            uint32_t n = 0;
            size_t u = 0, v = 0;
            while (u < sets[i].size() && v < sets[j].size()) {
                if (sets[i][u] < sets[j][v])
                    ++u;
                else if (sets[i][u] > sets[j][v])
                    ++v;
                else
                    ++n, ++u, ++v;
            }
            p = std::max(p, n);
        }
    return p;
}

NWParams nw_params_from_matrix(const SignedSparseMatrix& a, const std::vector<uint32_t>& rows) {
    a.validate();
    std::vector<uint32_t> sorted = rows;
    std::sort(sorted.begin(), sorted.end());
    NWParams p;
    p.universe_size = a.num_cols;
    for (uint32_t r : sorted) {
        if (r >= a.num_rows) throw std::invalid_argument("dist: row index out of range");
        std::vector<uint32_t> set;
        std::vector<int8_t> pat;
        for (const auto& e : a.rows[r]) {
            set.push_back(e.col);
            pat.push_back(e.sign);
        }
        p.sets.push_back(std::move(set));
        p.patterns.push_back(std::move(pat));
    }
    p.validate();
    return p;
}

Sample sample_uniform(uint32_t two_n, const SplitRng& trial_stream) {
    Sample s;
    s.source = SampleSource::Uniform;
    s.stream_key = trial_stream.key();
    const SplitRng bits = trial_stream.derive(kTagX);
    s.bits.resize(two_n);
    for (uint32_t i = 0; i < two_n; ++i) s.bits[i] = bits.sign_at(i);
    return s;
}

namespace {

std::vector<uint32_t> checked_sorted_rows(const SignedSparseMatrix& a, const std::vector<uint32_t>& rows) {
    if (rows.empty()) throw std::invalid_argument("dist: deterministic row set must be nonempty");
    std::vector<uint32_t> sorted = rows;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw std::invalid_argument("dist: repeated row index");
    for (uint32_t r : sorted) {
        if (r >= a.num_rows) throw std::invalid_argument("dist: row index out of range");
        if (a.rows[r].empty()) throw std::invalid_argument("dist: deterministic row has empty support");
    }
    return sorted;
}

int8_t resolve_tie(TieRule tie, const SplitRng& tie_stream, uint64_t ordinal) {
    return tie == TieRule::FairCoin ? tie_stream.sign_at(ordinal) : int8_t{+1};
}

}  // namespace

Sample sample_dam(const SignedSparseMatrix& a, const std::vector<uint32_t>& deterministic_rows,
                  const SplitRng& trial_stream, TieRule tie) {
    a.validate();
    const auto sorted = checked_sorted_rows(a, deterministic_rows);
    const uint32_t n = a.num_cols;
    if (a.num_rows > n) throw std::invalid_argument("dist: more rows than columns");

    Sample s;
    s.source = SampleSource::Dam;
    s.stream_key = trial_stream.key();
    s.bits.resize(2 * n);

    const SplitRng xs = trial_stream.derive(kTagX);
    for (uint32_t i = 0; i < n; ++i) s.bits[i] = xs.sign_at(i);

    const SplitRng free = trial_stream.derive(kTagFree);
    for (uint32_t i = 0; i < n; ++i) s.bits[n + i] = free.sign_at(i);

    const SplitRng ties = trial_stream.derive(kTagTie);
    for (size_t j = 0; j < sorted.size(); ++j) {
        const uint32_t r = sorted[j];
        long long sum = 0;
        for (const auto& e : a.rows[r]) sum += static_cast<long long>(e.sign) * s.bits[e.col];
        s.bits[n + r] = sum > 0 ? int8_t{+1} : sum < 0 ? int8_t{-1} : resolve_tie(tie, ties, j);
    }
    return s;
}

std::vector<int8_t> nw_evaluate(const NWParams& params, const std::vector<int8_t>& seed, TieRule tie,
                                const SplitRng& tie_stream) {
    params.validate();
    if (seed.size() != params.universe_size) throw std::invalid_argument("dist: seed length mismatch");
    std::vector<int8_t> out(params.sets.size());
    for (size_t j = 0; j < params.sets.size(); ++j) {
        long long sum = 0;
        for (size_t u = 0; u < params.sets[j].size(); ++u)
            sum += static_cast<long long>(params.patterns[j][u]) * seed[params.sets[j][u]];
        out[j] = sum > 0 ? int8_t{+1} : sum < 0 ? int8_t{-1} : resolve_tie(tie, tie_stream, j);
    }
    return out;
}

std::vector<uint32_t> canonical_row_permutation(uint32_t num_rows, const std::vector<uint32_t>& deterministic_rows) {
    std::vector<uint32_t> sorted = deterministic_rows;
    std::sort(sorted.begin(), sorted.end());
    std::vector<bool> in_r(num_rows, false);
    for (uint32_t r : sorted) {
        if (r >= num_rows) throw std::invalid_argument("dist: row index out of range");
        in_r[r] = true;
    }
    std::vector<uint32_t> perm = sorted;
    for (uint32_t r = 0; r < num_rows; ++r)
        if (!in_r[r]) perm.push_back(r);
    return perm;
}

NwEquivalenceReport verify_nw_equivalence(const SignedSparseMatrix& a, const std::vector<uint32_t>& rows,
                                          const NWParams& params, uint64_t trials, const SplitRng& root,
                                          TieRule tie) {
    const NWParams derived = nw_params_from_matrix(a, rows);
    if (!(derived.sets == params.sets) || !(derived.patterns == params.patterns) ||
        derived.universe_size != params.universe_size)
        throw std::invalid_argument("dist: params do not match the matrix rows");

    const auto sorted = checked_sorted_rows(a, rows);
    const uint32_t n = a.num_cols;

    NwEquivalenceReport rep;
    rep.trials = trials;
    rep.ell = params.set_size();
    rep.p = params.max_intersection();
    rep.num_sets = static_cast<uint32_t>(params.sets.size());

    std::vector<bool> in_r(n, false);
    for (uint32_t r : sorted) in_r[r] = true;
    std::vector<double> free_sum(n, 0.0);

    for (uint64_t t = 0; t < trials; ++t) {
        const SplitRng trial = root.derive(t);
        const Sample s = sample_dam(a, sorted, trial, tie);
        const std::vector<int8_t> seed(s.bits.begin(), s.bits.begin() + n);
        const auto nw = nw_evaluate(params, seed, tie, trial.derive(kTagTie));
        for (size_t j = 0; j < sorted.size(); ++j)
            if (s.bits[n + sorted[j]] != nw[j]) ++rep.deterministic_mismatches;
        for (uint32_t i = 0; i < n; ++i)
            if (!in_r[i]) free_sum[i] += s.bits[n + i];
    }

    rep.deterministic_ok = rep.deterministic_mismatches == 0;
    for (uint32_t i = 0; i < n; ++i)
        if (!in_r[i])
            rep.max_abs_free_mean =
                std::max(rep.max_abs_free_mean, std::fabs(free_sum[i] / static_cast<double>(trials)));
    rep.four_sigma = 4.0 / std::sqrt(static_cast<double>(trials));
    rep.free_ok = rep.max_abs_free_mean <= rep.four_sigma;
    return rep;
}

void write_packed_samples(std::ostream& out, const std::vector<Sample>& samples) {
    for (const auto& s : samples) {
        const size_t nbytes = (s.bits.size() + 7) / 8;
        std::string bytes(nbytes, '\0');
        for (size_t i = 0; i < s.bits.size(); ++i)
            if (s.bits[i] > 0) bytes[i / 8] |= static_cast<char>(1u << (i % 8));
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    }
}

std::vector<std::vector<int8_t>> read_packed_samples(std::istream& in, uint32_t bits_per_sample,
                                                     uint32_t num_samples) {
    const size_t nbytes = (bits_per_sample + 7) / 8;
    std::vector<std::vector<int8_t>> out;
    std::string buf(nbytes, '\0');
    for (uint32_t s = 0; s < num_samples; ++s) {
        if (!in.read(buf.data(), static_cast<std::streamsize>(nbytes)))
            throw std::invalid_argument("dist: truncated packed sample file");
        std::vector<int8_t> bits(bits_per_sample);
        for (uint32_t i = 0; i < bits_per_sample; ++i)
            bits[i] = (buf[i / 8] >> (i % 8)) & 1 ? int8_t{+1} : int8_t{-1};
        out.push_back(std::move(bits));
    }
    return out;
}

}  // namespace qnw::dist
