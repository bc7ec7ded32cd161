#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qnw/dense.hpp"
#include "qnw/gf.hpp"
#include "qnw/sparse.hpp"

namespace qnw::circuit {

struct Factor;
using FactorPtr = std::shared_ptr<const Factor>;

/// Ordered factor list in matrix-product order: factors[0] * factors[1] * ...,
/// applied right-to-left. ancilla_width > 0 only after block-dispatch lowering;
/// factors then act on dimension << ancilla_width.
struct Circuit {
    uint64_t dimension = 1;
    std::vector<Factor> factors;
    uint32_t ancilla_width = 0;

    uint64_t total_dimension() const { return dimension << ancilla_width; }
    void validate() const;
};

// ---- structured operator variants ----

/// I_copies (x) inner.
struct TensorLeftIdentity {
    FactorPtr inner;
    uint64_t copies;
};

/// F over the additive group of GF(2^n): entry (x,y) = (-1)^Tr(xy) / sqrt(q).
/// Symmetric and self-inverse in characteristic 2.
struct FieldDft {
    gf::FieldSpec field;
};

/// The q x q orthogonal matrix with rows (1/sqrt(2))(I|-I),
/// then (1/sqrt 4)(I|-I|I|-I), ..., and last row (1/sqrt q)(1,...,1).
struct BMatrix {
    uint32_t q;
};

/// Identity with the lower-right 2^stage block replaced by H (x) I_{2^(stage-1)},
/// H = (1/sqrt 2)[[1,-1],[1,1]]. B == BStage(1) * BStage(2) * ... * BStage(n).
struct BStage {
    uint32_t q;
    uint32_t stage;  // 1..n
};

/// The q^2 x q^2 matrix whose (i,j) q-block is the diagonal D_{ij} (i == j) or
/// D'_{ij} (i != j): inner position of field element z holds (-1)^Tr(ij z)/sqrt(q)
/// for z != 0; position 0 holds 1 on diagonal blocks and 0 elsewhere.
struct DMatrix {
    gf::FieldSpec field;
    uint32_t alpha_value;  // generator of F_q^*; fixes the lowered block order
};

/// Permutation x -> x + c on field elements: (S_c v)[x] = v[x + c].
struct FieldShift {
    gf::FieldSpec field;
    uint32_t shift_value;
};

/// Permutation x -> x * alpha^power (alpha the canonical generator).
struct FieldScale {
    gf::FieldSpec field;
    uint32_t power;
};

/// H^(x)n: entry (i,j) = (-1)^<i,j> / sqrt(2^n).
struct BitHadamard {
    uint32_t num_bits;
};

/// Diagonal of +-1 phases from an input string.
struct InputPhase {
    std::vector<int8_t> signs;
};

/// Block-diagonal with 2^selector_width equal-dimension blocks, block i applied
/// on the selector-i slice.
struct BlockDispatch {
    uint32_t selector_width;
    std::vector<Circuit> blocks;
};

/// Permutation of F_q x F_q swapping the two coordinates: (i,k) -> (k,i).
struct IndexTranspose {
    uint32_t q;
};

/// |i>|p>|a> -> |i>|p>|a xor table[i]>; writes (and uncomputes) the per-selector
/// gate table of the block-dispatch lowering.
struct AncillaXorTable {
    uint32_t selector_width;
    uint64_t data_dim;
    uint32_t ancilla_width;
    std::vector<uint64_t> table;
};

/// Applies gates[v] to the data register, v read from ancilla bits
/// [slot_offset, slot_offset + slot_width); identity for v >= gates.size().
struct AncillaSelect {
    uint32_t selector_width;
    uint64_t data_dim;
    uint32_t ancilla_width;
    uint32_t slot_offset;
    uint32_t slot_width;
    std::vector<Factor> gates;
};

struct Factor {
    std::variant<TensorLeftIdentity, FieldDft, BMatrix, BStage, DMatrix, FieldShift, FieldScale, BitHadamard,
                 InputPhase, BlockDispatch, IndexTranspose, AncillaXorTable, AncillaSelect>
        op;

    uint64_t dimension() const;
    static Factor identity(uint64_t dim);  // InputPhase of all +1
};

// ---- evaluation ----

void apply_factor(const Factor& f, std::vector<double>& state);
void apply_circuit(const Circuit& c, std::vector<double>& state);

inline constexpr uint64_t kMaterializeLimit = 1ull << 14;

Matrix materialize(const Factor& f);
Matrix materialize(const Circuit& c);

// ---- constructions ----

struct Decomposition {
    Circuit circuit;                    // (I (x) B)(I (x) F) D (I (x) F^-1), F^-1 = F
    std::vector<uint32_t> design_rows;  // {i*q + r : i in [q], r < q/2}
};
Decomposition build_decomposition(uint32_t q);

struct DFactorisation {
    Factor d;        // DMatrix
    Circuit lowered;  // IndexTranspose * BlockDispatch * IndexTranspose
};
DFactorisation build_d_matrix(uint32_t q, const gf::Element& alpha);

/// Checks F D_c F^-1 = (1/sqrt q) S_c + ((sqrt q - 1)/(q sqrt q)) J and
/// F D'_c F^-1 = (1/sqrt q) S_c - (1/(q sqrt q)) J by dense evaluation.
/// (The published J-coefficients are typos; these are the forms that hold.)
struct DcIdentityReport {
    bool ok = false;
    double max_abs_error_diagonal = 0.0;   // D_c identity
    double max_abs_error_offdiag = 0.0;    // D'_c identity
};
DcIdentityReport verify_dc_identity(uint32_t q, uint32_t c);

/// Appendix-A style lowering of a block dispatch onto (selector, data, ancilla)
/// registers: write the per-selector gate table into the ancilla, apply one
/// ancilla-controlled step per gate position, uncompute. Ancilla returns to 0.
Circuit lower_block_dispatch(const BlockDispatch& bd);

struct GateCostReport {
    uint32_t factor_count = 0;
    uint32_t lowered_factor_count = 0;
    uint32_t ancilla_width = 0;
};
GateCostReport cost_report(const Circuit& original, const Circuit& lowered);

// ---- verification helpers ----

/// Brute-force line fitting for the design rows of a materialized decomposition:
/// each row, scaled by sqrt(2q), must be -1 on one line of F_q x F_q and +1 on a
/// parallel one; the intercept pairing must be a single consistent bijection
/// between the two classes of an equipartition.
struct RowMatchReport {
    bool all_rows_matched = false;
    bool equipartition_ok = false;
    bool phi_consistent = false;
    std::vector<std::pair<uint32_t, uint32_t>> phi;  // (minus intercept, plus intercept)
    double max_entry_error = 0.0;

    bool ok() const { return all_rows_matched && equipartition_ok && phi_consistent; }
};
RowMatchReport match_design_rows(const Matrix& dense, uint32_t q, const std::vector<uint32_t>& design_rows);

/// Recovers the integer sign matrix A with dense = A row-scaled by 1/sqrt(support).
/// Every row must be a +-1 pattern of uniform magnitude (true for the
/// decomposition); throws otherwise.
SignedSparseMatrix sign_rows_from_unitary(const Matrix& dense, double tol = 1e-9);

// ---- serialization ----

std::string serialize(const Circuit& c);
Circuit parse_circuit(const std::string& text);

}  // namespace qnw::circuit
