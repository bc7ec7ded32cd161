#include "qnw/construction.hpp"

#include <algorithm>
#include <bit>
#include <set>
#include <stdexcept>

namespace qnw::construction {

namespace {

using gf::Element;
using gf::FieldSpec;

uint32_t log2_exact(uint32_t q) {
    if (q < 2 || !std::has_single_bit(q)) throw std::invalid_argument("construction: q must be a power of 2, q >= 2");
    return static_cast<uint32_t>(std::countr_zero(q));
}

void push_sorted_row(SignedSparseMatrix& m, std::vector<SignedEntry> row) {
    std::sort(row.begin(), row.end(), [](const SignedEntry& a, const SignedEntry& b) { return a.col < b.col; });
    m.rows.push_back(std::move(row));
}

}  // namespace

PairedLinesParams PairedLinesParams::canonical(uint32_t q) {
    const auto spec = FieldSpec::binary(log2_exact(q));
    PairedLinesParams p{spec, {}, {}};
    for (uint32_t i = 0; i < q / 2; ++i) {
        p.b1.push_back(Element(spec, i));
        p.b2.push_back(Element(spec, i + q / 2));
    }
    return p;
}

void PairedLinesParams::validate() const {
    const uint32_t q = field.order();
    if (field.characteristic != 2) throw std::invalid_argument("paired-lines: field must have characteristic 2");
    if (b1.size() != q / 2 || b2.size() != q / 2)
        throw std::invalid_argument("paired-lines: partition classes must each have q/2 elements");
    std::set<uint32_t> s1, s2;
    for (const auto& e : b1) s1.insert(e.value());
    for (const auto& e : b2) s2.insert(e.value());
    if (s1.size() != b1.size() || s2.size() != b2.size())
        throw std::invalid_argument("paired-lines: partition classes must not repeat elements");
    for (uint32_t v : s1)
        if (s2.count(v)) throw std::invalid_argument("paired-lines: B1 and B2 must be disjoint");
}

SignedSparseMatrix build_paired_lines(const PairedLinesParams& params) {
    params.validate();
    const FieldSpec& spec = params.field;
    const uint32_t q = spec.order();

    SignedSparseMatrix m;
    m.num_rows = q * q / 2;
    m.num_cols = q * q;
    m.rows.reserve(m.num_rows);
    m.column_points.reserve(m.num_cols);
    for (uint32_t x = 0; x < q; ++x)
        for (uint32_t y = 0; y < q; ++y) m.column_points.emplace_back(x, y);

    for (uint32_t av = 0; av < q; ++av) {
        const Element a(spec, av);
        for (size_t bi = 0; bi < params.b1.size(); ++bi) {
            std::vector<SignedEntry> row;
            row.reserve(2 * q);
            for (uint32_t xv = 0; xv < q; ++xv) {
                const Element x(spec, xv);
                const Element y_minus = a * x + params.b1[bi];
                const Element y_plus = a * x + params.b2[bi];
                row.push_back(SignedEntry{xv * q + y_minus.value(), -1});
                row.push_back(SignedEntry{xv * q + y_plus.value(), +1});
            }
            push_sorted_row(m, std::move(row));
        }
    }
    m.validate();
    return m;
}

AllRowsParams AllRowsParams::canonical(uint32_t q) {
    const auto spec = FieldSpec::prime(q);
    AllRowsParams p{spec, {}};
    for (uint32_t v = 1; v <= (q - 1) / 2; ++v) p.q_set.push_back(Element(spec, v));
    return p;
}

void AllRowsParams::validate() const {
    const uint32_t q = field.characteristic;
    if (field.degree != 1 || q % 2 == 0) throw std::invalid_argument("all-rows: field must be GF(p), p an odd prime");
    if (q_set.size() != (q - 1) / 2) throw std::invalid_argument("all-rows: |Q| must be (q-1)/2");
    std::set<uint32_t> seen;
    for (const auto& e : q_set) {
        if (e.is_zero()) throw std::invalid_argument("all-rows: 0 is not allowed in Q");
        seen.insert(e.value());
    }
    if (seen.size() != q_set.size()) throw std::invalid_argument("all-rows: Q must not repeat elements");
    for (const auto& e : q_set)
        if (seen.count((-e).value())) throw std::invalid_argument("all-rows: Q and -Q must be disjoint");
}

SignedSparseMatrix build_all_rows(const AllRowsParams& params) {
    params.validate();
    const FieldSpec& spec = params.field;
    const uint32_t q = spec.characteristic;

    // Punctured plane: (x,y) in lexicographic order, skipping (0,0).
    auto col = [q](uint32_t x, uint32_t y) { return x * q + y - 1; };

    SignedSparseMatrix m;
    m.num_rows = q * q - 1;
    m.num_cols = q * q - 1;
    m.rows.reserve(m.num_rows);
    m.column_points.reserve(m.num_cols);
    for (uint32_t x = 0; x < q; ++x)
        for (uint32_t y = 0; y < q; ++y)
            if (!(x == 0 && y == 0)) m.column_points.emplace_back(x, y);

    // Line-pair rows over a half-plane H (= Q or -Q): +1 at (0,b), then +1 on
    // y = ax + b and -1 on y = ax - b for x in H.
    auto emit_half = [&](const std::vector<Element>& half) {
        for (uint32_t av = 0; av < q; ++av) {
            const Element a(spec, av);
            for (const auto& b : half) {
                std::vector<SignedEntry> row;
                row.reserve(q);
                row.push_back(SignedEntry{col(0, b.value()), +1});
                for (const auto& x : half) {
                    const Element y_plus = a * x + b;
                    const Element y_minus = a * x - b;
                    row.push_back(SignedEntry{col(x.value(), y_plus.value()), +1});
                    row.push_back(SignedEntry{col(x.value(), y_minus.value()), -1});
                }
                push_sorted_row(m, std::move(row));
            }
        }
    };

    emit_half(params.q_set);
    std::vector<Element> neg;
    for (const auto& e : params.q_set) neg.push_back(-e);
    emit_half(neg);

    for (uint32_t cv = 1; cv < q; ++cv) {
        std::vector<SignedEntry> row;
        row.reserve(q);
        for (uint32_t y = 0; y < q; ++y) row.push_back(SignedEntry{col(cv, y), +1});
        push_sorted_row(m, std::move(row));
    }

    m.validate();
    return m;
}

}  // namespace qnw::construction
