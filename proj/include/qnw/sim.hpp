#pragma once

#include <cstdint>
#include <vector>

#include "qnw/circuit.hpp"
#include "qnw/sparse.hpp"

namespace qnw::sim {

/// +-1 string; the phase-multiplication inputs x and z.
using SignString = std::vector<int8_t>;

/// Throws unless A is square with nonempty, pairwise-orthogonal rows.
void validate_qa_matrix(const SignedSparseMatrix& a);

/// Acceptance probability of the distinguisher in closed form:
/// ((1/N) sum_i z_i (Abar x)_i)^2, Abar = A with row i scaled by 1/sqrt(support).
/// Equals the circuit acceptance because the state is real and
/// (Hw)_{0^n} = (1/sqrt N) sum_i w_i.
double run_qa_exact(const SignString& x, const SignString& z, const SignedSparseMatrix& a);

/// Same, with A pre-validated (hot path for experiment loops).
double qa_exact_prevalidated(const SignString& x, const SignString& z, const SignedSparseMatrix& a);

/// Statevector route: uniform superposition, phase(x), circuit factors,
/// phase(z), N x N Hadamard, probability of outcome 0^n. Norm is checked to
/// 1e-9 after every factor.
double run_qa_circuit(const SignString& x, const SignString& z, const circuit::Circuit& c);

}  // namespace qnw::sim
