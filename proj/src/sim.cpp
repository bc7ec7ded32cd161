#include "qnw/sim.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace qnw::sim {

void validate_qa_matrix(const SignedSparseMatrix& a) {
    a.validate();
    if (a.num_rows != a.num_cols) throw std::invalid_argument("sim: A must be square");
    for (const auto& row : a.rows)
        if (row.empty()) throw std::invalid_argument("sim: zero-support row");
    for (uint32_t i = 0; i < a.num_rows; ++i)
        for (uint32_t j = i + 1; j < a.num_rows; ++j)
            if (a.inner_product(i, j) != 0) throw std::invalid_argument("sim: rows are not pairwise orthogonal");
}

double qa_exact_prevalidated(const SignString& x, const SignString& z, const SignedSparseMatrix& a) {
    const size_t n = a.num_cols;
    if (x.size() != n || z.size() != n) throw std::invalid_argument("sim: sign string length mismatch");
    double total = 0.0;
    for (uint32_t i = 0; i < a.num_rows; ++i) {
        long long s = 0;
        for (const auto& e : a.rows[i]) s += static_cast<long long>(e.sign) * x[e.col];
        total += z[i] * static_cast<double>(s) / std::sqrt(static_cast<double>(a.rows[i].size()));
    }
    const double amp = total / static_cast<double>(n);
    return amp * amp;
}

double run_qa_exact(const SignString& x, const SignString& z, const SignedSparseMatrix& a) {
    validate_qa_matrix(a);
    return qa_exact_prevalidated(x, z, a);
}

namespace {

void check_unit_norm(const std::vector<double>& state) {
    double nrm = 0.0;
    for (double v : state) nrm += v * v;
    if (std::fabs(nrm - 1.0) > 1e-9) throw std::logic_error("sim: state norm drifted past 1e-9");
}

}  // namespace

double run_qa_circuit(const SignString& x, const SignString& z, const circuit::Circuit& c) {
    c.validate();
    if (c.ancilla_width != 0) throw std::invalid_argument("sim: circuit must be ancilla-free");
    const uint64_t n = c.dimension;
    if (x.size() != n || z.size() != n) throw std::invalid_argument("sim: dimension mismatch");
    if (!std::has_single_bit(n)) throw std::invalid_argument("sim: dimension must be a power of 2");

    std::vector<double> state(n, 1.0 / std::sqrt(static_cast<double>(n)));
    circuit::apply_factor(circuit::Factor{circuit::InputPhase{x}}, state);
    check_unit_norm(state);
    for (auto it = c.factors.rbegin(); it != c.factors.rend(); ++it) {
        circuit::apply_factor(*it, state);
        check_unit_norm(state);
    }
    circuit::apply_factor(circuit::Factor{circuit::InputPhase{z}}, state);
    circuit::apply_factor(circuit::Factor{circuit::BitHadamard{static_cast<uint32_t>(std::countr_zero(n))}}, state);
    check_unit_norm(state);
    return state[0] * state[0];
}

}  // namespace qnw::sim
