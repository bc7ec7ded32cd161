#include "qnw/sparse.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace qnw {

SignedSparseMatrix SignedSparseMatrix::identity(uint32_t n) {
    SignedSparseMatrix m;
    m.num_rows = m.num_cols = n;
    m.rows.resize(n);
    for (uint32_t i = 0; i < n; ++i) m.rows[i] = {SignedEntry{i, +1}};
    return m;
}

void SignedSparseMatrix::validate() const {
    if (rows.size() != num_rows) throw std::invalid_argument("sparse: row count mismatch");
    if (!column_points.empty() && column_points.size() != num_cols)
        throw std::invalid_argument("sparse: column label count mismatch");
    for (const auto& row : rows) {
        uint32_t prev = 0;
        bool first = true;
        for (const auto& e : row) {
            if (e.col >= num_cols) throw std::invalid_argument("sparse: column index out of range");
            if (!first && e.col <= prev) throw std::invalid_argument("sparse: columns not strictly increasing");
            if (e.sign != 1 && e.sign != -1) throw std::invalid_argument("sparse: sign must be +1 or -1");
            prev = e.col;
            first = false;
        }
    }
}

long long SignedSparseMatrix::inner_product(uint32_t i, uint32_t j) const {
    const auto& a = rows.at(i);
    const auto& b = rows.at(j);
    long long acc = 0;
    size_t u = 0, v = 0;
    while (u < a.size() && v < b.size()) {
        if (a[u].col < b[v].col)
            ++u;
        else if (a[u].col > b[v].col)
            ++v;
        else
            acc += static_cast<long long>(a[u++].sign) * b[v++].sign;
    }
    return acc;
}

uint32_t SignedSparseMatrix::support_intersection(uint32_t i, uint32_t j) const {
    const auto& a = rows.at(i);
    const auto& b = rows.at(j);
    uint32_t n = 0;
    size_t u = 0, v = 0;
    while (u < a.size() && v < b.size()) {
        if (a[u].col < b[v].col)
            ++u;
        else if (a[u].col > b[v].col)
            ++v;
        else
            ++n, ++u, ++v;
    }
    return n;
}

DesignReport verify_design(const SignedSparseMatrix& m) {
    m.validate();
    DesignReport r;
    r.num_vectors = m.num_rows;
    r.universe_size = m.num_cols;
    r.orthogonal = true;
    r.support_size_min = m.num_rows ? static_cast<uint32_t>(m.rows[0].size()) : 0;
    r.support_size_max = r.support_size_min;
    for (const auto& row : m.rows) {
        const auto s = static_cast<uint32_t>(row.size());
        r.support_size_min = std::min(r.support_size_min, s);
        r.support_size_max = std::max(r.support_size_max, s);
    }
    for (uint32_t i = 0; i < m.num_rows; ++i)
        for (uint32_t j = i + 1; j < m.num_rows; ++j) {
            r.max_pairwise_intersection = std::max(r.max_pairwise_intersection, m.support_intersection(i, j));
            if (m.inner_product(i, j) != 0) r.orthogonal = false;
        }
    return r;
}

void write_signed_sparse(std::ostream& out, const SignedSparseMatrix& m) {
    m.validate();
    out << "signed-sparse v1 " << m.num_rows << ' ' << m.num_cols << '\n';
    for (uint32_t i = 0; i < m.num_rows; ++i)
        for (const auto& e : m.rows[i]) out << i << ' ' << e.col << ' ' << (e.sign > 0 ? "+1" : "-1") << '\n';
}

SignedSparseMatrix read_signed_sparse(std::istream& in) {
    std::string magic, version;
    SignedSparseMatrix m;
    if (!(in >> magic >> version >> m.num_rows >> m.num_cols) || magic != "signed-sparse" || version != "v1")
        throw std::invalid_argument("sparse: bad header");
    m.rows.resize(m.num_rows);
    uint32_t row = 0, col = 0;
    int sign = 0;
    long long prev_row = -1, prev_col = -1;
    while (in >> row >> col >> sign) {
        if (row >= m.num_rows) throw std::invalid_argument("sparse: row index out of range");
        if (static_cast<long long>(row) < prev_row ||
            (static_cast<long long>(row) == prev_row && static_cast<long long>(col) <= prev_col))
            throw std::invalid_argument("sparse: entries out of order");
        if (sign != 1 && sign != -1) throw std::invalid_argument("sparse: sign must be +1 or -1");
        m.rows[row].push_back(SignedEntry{col, static_cast<int8_t>(sign)});
        prev_row = row;
        prev_col = col;
    }
    if (!in.eof() && in.fail()) {
        in.clear();
        std::string tail;
        std::getline(in, tail);
        throw std::invalid_argument("sparse: malformed entry near '" + tail + "'");
    }
    m.validate();
    return m;
}

}  // namespace qnw
