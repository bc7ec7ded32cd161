#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

namespace qnw {

struct SignedEntry {
    uint32_t col;
    int8_t sign;  // +1 or -1
    friend bool operator==(const SignedEntry&, const SignedEntry&) = default;
};

/// Rows with entries in {0,+1,-1}. Within a row, column indices are strictly
/// increasing. column_points optionally labels columns with points of
/// F_q x F_q (or the punctured plane); empty when unused.
struct SignedSparseMatrix {
    uint32_t num_rows = 0;
    uint32_t num_cols = 0;
    std::vector<std::vector<SignedEntry>> rows;
    std::vector<std::pair<uint32_t, uint32_t>> column_points;

    static SignedSparseMatrix identity(uint32_t n);

    void validate() const;  // throws std::invalid_argument on malformed data

    long long inner_product(uint32_t i, uint32_t j) const;
    uint32_t support_intersection(uint32_t i, uint32_t j) const;

    friend bool operator==(const SignedSparseMatrix&, const SignedSparseMatrix&) = default;
};

/// Measured design parameters of a vector family (exact integer arithmetic).
struct DesignReport {
    uint32_t support_size_min = 0;
    uint32_t support_size_max = 0;
    uint32_t max_pairwise_intersection = 0;
    bool orthogonal = false;
    uint32_t num_vectors = 0;
    uint32_t universe_size = 0;
    friend bool operator==(const DesignReport&, const DesignReport&) = default;
};

DesignReport verify_design(const SignedSparseMatrix& m);

// Text format: header "signed-sparse v1 <rows> <cols>", then one line
// "<row> <col> <+1|-1>" per nonzero, rows ascending, cols ascending within row.
void write_signed_sparse(std::ostream& out, const SignedSparseMatrix& m);
SignedSparseMatrix read_signed_sparse(std::istream& in);

}  // namespace qnw
