#pragma once

#include <vector>

#include "qnw/gf.hpp"
#include "qnw/sparse.hpp"

namespace qnw::construction {

/// Equipartition (B1, B2) of F_q plus a bijection phi: B1 -> B2, q a power of 2.
/// b2[i] = phi(b1[i]).
struct PairedLinesParams {
    gf::FieldSpec field;
    std::vector<gf::Element> b1;
    std::vector<gf::Element> b2;

    /// B1 = first q/2 elements in enumeration order, phi = +q/2 index shift.
    static PairedLinesParams canonical(uint32_t q);

    void validate() const;
};

/// q^2/2 rows indexed by (a,b) in F_q x B1 (a-major), each -1 on the line
/// y = ax + b and +1 on y = ax + phi(b). Columns are F_q x F_q in enumeration
/// order, labeled via column_points.
SignedSparseMatrix build_paired_lines(const PairedLinesParams& params);

/// Q, a subset of F_q^* with |Q| = (q-1)/2 and Q disjoint from -Q; q an odd prime.
struct AllRowsParams {
    gf::FieldSpec field;
    std::vector<gf::Element> q_set;

    /// Q = residues {1, ..., (q-1)/2}.
    static AllRowsParams canonical(uint32_t q);

    void validate() const;
};

/// q^2-1 rows over the punctured plane F_q x F_q minus the origin:
/// q(q-1)/2 line-pair rows over Q, as many over -Q, and q-1 vertical-line rows.
SignedSparseMatrix build_all_rows(const AllRowsParams& params);

}  // namespace qnw::construction
