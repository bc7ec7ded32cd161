#include "qnw/circuit.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>

#include "qnw/errors.hpp"

namespace qnw::circuit {

namespace {

using gf::Element;
using gf::FieldSpec;

uint32_t log2_exact(uint32_t q) {
    if (q < 2 || !std::has_single_bit(q)) throw std::invalid_argument("circuit: q must be a power of 2, q >= 2");
    return static_cast<uint32_t>(std::countr_zero(q));
}

// Multiplication table and (-1)^Tr(z) signs for a small field.
struct FieldTables {
    uint32_t q;
    std::vector<uint32_t> mul;      // q*q
    std::vector<double> trace_sign;  // q

    explicit FieldTables(const FieldSpec& spec) : q(spec.order()), mul(q * q), trace_sign(q) {
        for (uint32_t x = 0; x < q; ++x)
            for (uint32_t y = 0; y < q; ++y) mul[x * q + y] = (Element(spec, x) * Element(spec, y)).value();
        for (uint32_t z = 0; z < q; ++z) trace_sign[z] = gf::trace(Element(spec, z)) ? -1.0 : 1.0;
    }
};

void apply_span(const Factor& f, std::span<double> s);

void apply_circuit_span(const Circuit& c, std::span<double> s) {
    for (auto it = c.factors.rbegin(); it != c.factors.rend(); ++it) apply_span(*it, s);
}

void apply_span(const Factor& f, std::span<double> s) {
    if (s.size() != f.dimension()) throw std::invalid_argument("circuit: state dimension mismatch");
    std::visit(
        [&](const auto& op) {
            using T = std::decay_t<decltype(op)>;
            if constexpr (std::is_same_v<T, TensorLeftIdentity>) {
                const uint64_t d = op.inner->dimension();
                for (uint64_t b = 0; b < op.copies; ++b) apply_span(*op.inner, s.subspan(b * d, d));
            } else if constexpr (std::is_same_v<T, FieldDft>) {
                const FieldTables t(op.field);
                const uint32_t q = t.q;
                const double scale = 1.0 / std::sqrt(static_cast<double>(q));
                std::vector<double> out(q, 0.0);
                for (uint32_t x = 0; x < q; ++x) {
                    double acc = 0.0;
                    for (uint32_t y = 0; y < q; ++y) acc += t.trace_sign[t.mul[x * q + y]] * s[y];
                    out[x] = acc * scale;
                }
                std::copy(out.begin(), out.end(), s.begin());
            } else if constexpr (std::is_same_v<T, BMatrix>) {
                const uint32_t q = op.q;
                const uint32_t n = log2_exact(q);
                std::vector<double> out(q, 0.0);
                uint32_t row = 0;
                for (uint32_t g = 1; g <= n; ++g) {
                    const uint32_t w = q >> g;
                    const double scale = 1.0 / std::sqrt(static_cast<double>(1u << g));
                    for (uint32_t r = 0; r < w; ++r, ++row) {
                        double acc = 0.0;
                        for (uint32_t j = 0; j < (1u << g); ++j) {
                            const double v = s[j * w + r];
                            acc += (j & 1) ? -v : v;
                        }
                        out[row] = acc * scale;
                    }
                }
                double acc = 0.0;
                for (uint32_t y = 0; y < q; ++y) acc += s[y];
                out[q - 1] = acc / std::sqrt(static_cast<double>(q));
                std::copy(out.begin(), out.end(), s.begin());
            } else if constexpr (std::is_same_v<T, BStage>) {
                const uint32_t q = op.q;
                const uint32_t m = 1u << op.stage;
                const uint32_t half = m >> 1;
                const uint32_t base = q - m;
                const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
                for (uint32_t r = 0; r < half; ++r) {
                    const double x = s[base + r];
                    const double y = s[base + half + r];
                    s[base + r] = (x - y) * inv_sqrt2;
                    s[base + half + r] = (x + y) * inv_sqrt2;
                }
            } else if constexpr (std::is_same_v<T, DMatrix>) {
                const FieldTables t(op.field);
                const uint32_t q = t.q;
                const double scale = 1.0 / std::sqrt(static_cast<double>(q));
                std::vector<double> col(q), out(q);
                for (uint32_t u = 1; u < q; ++u) {  // inner position 0 is untouched
                    for (uint32_t j = 0; j < q; ++j) col[j] = s[j * q + u];
                    for (uint32_t i = 0; i < q; ++i) {
                        double acc = 0.0;
                        for (uint32_t j = 0; j < q; ++j) acc += t.trace_sign[t.mul[t.mul[i * q + j] * q + u]] * col[j];
                        out[i] = acc * scale;
                    }
                    for (uint32_t i = 0; i < q; ++i) s[i * q + u] = out[i];
                }
            } else if constexpr (std::is_same_v<T, FieldShift>) {
                const uint32_t q = op.field.order();
                const Element c(op.field, op.shift_value);
                std::vector<double> out(q);
                for (uint32_t u = 0; u < q; ++u) out[u] = s[(Element(op.field, u) + c).value()];
                std::copy(out.begin(), out.end(), s.begin());
            } else if constexpr (std::is_same_v<T, FieldScale>) {
                const uint32_t q = op.field.order();
                const Element factor = gf::pow(gf::find_generator(op.field), op.power);
                std::vector<double> out(q);
                for (uint32_t v = 0; v < q; ++v) out[(Element(op.field, v) * factor).value()] = s[v];
                std::copy(out.begin(), out.end(), s.begin());
            } else if constexpr (std::is_same_v<T, BitHadamard>) {
                const uint64_t n = s.size();
                for (uint64_t len = 1; len < n; len <<= 1)
                    for (uint64_t i = 0; i < n; i += len << 1)
                        for (uint64_t j = i; j < i + len; ++j) {
                            const double x = s[j];
                            const double y = s[j + len];
                            s[j] = x + y;
                            s[j + len] = x - y;
                        }
                const double scale = 1.0 / std::sqrt(static_cast<double>(n));
                for (auto& v : s) v *= scale;
            } else if constexpr (std::is_same_v<T, InputPhase>) {
                for (size_t i = 0; i < s.size(); ++i) s[i] *= op.signs[i];
            } else if constexpr (std::is_same_v<T, BlockDispatch>) {
                const uint64_t d = op.blocks.front().dimension;
                for (size_t b = 0; b < op.blocks.size(); ++b) apply_circuit_span(op.blocks[b], s.subspan(b * d, d));
            } else if constexpr (std::is_same_v<T, IndexTranspose>) {
                const uint64_t q = op.q;
                std::vector<double> out(q * q);
                for (uint64_t i = 0; i < q; ++i)
                    for (uint64_t k = 0; k < q; ++k) out[k * q + i] = s[i * q + k];
                std::copy(out.begin(), out.end(), s.begin());
            } else if constexpr (std::is_same_v<T, AncillaXorTable>) {
                const uint64_t words = uint64_t{1} << op.selector_width;
                const uint64_t anc = uint64_t{1} << op.ancilla_width;
                for (uint64_t i = 0; i < words; ++i) {
                    const uint64_t t = op.table[i];
                    if (t == 0) continue;
                    for (uint64_t p = 0; p < op.data_dim; ++p) {
                        const uint64_t base = (i * op.data_dim + p) << op.ancilla_width;
                        for (uint64_t a = 0; a < anc; ++a) {
                            const uint64_t b = a ^ t;
                            if (a < b) std::swap(s[base + a], s[base + b]);
                        }
                    }
                }
            } else if constexpr (std::is_same_v<T, AncillaSelect>) {
                const uint64_t words = uint64_t{1} << op.selector_width;
                const uint64_t anc = uint64_t{1} << op.ancilla_width;
                const uint64_t mask = (op.slot_width == 0) ? 0 : ((uint64_t{1} << op.slot_width) - 1);
                std::vector<double> data(op.data_dim);
                for (uint64_t i = 0; i < words; ++i)
                    for (uint64_t a = 0; a < anc; ++a) {
                        const uint64_t v = (a >> op.slot_offset) & mask;
                        if (v >= op.gates.size()) continue;  // treated as identity
                        const uint64_t base = ((i * op.data_dim) << op.ancilla_width) + a;
                        const uint64_t stride = anc;
                        for (uint64_t p = 0; p < op.data_dim; ++p) data[p] = s[base + p * stride];
                        apply_span(op.gates[v], data);
                        for (uint64_t p = 0; p < op.data_dim; ++p) s[base + p * stride] = data[p];
                    }
            }
        },
        f.op);
}

Matrix permutation_matrix(uint64_t dim, const std::vector<uint64_t>& image) {
    Matrix m(dim, dim);
    for (uint64_t v = 0; v < dim; ++v) m.at(image[v], v) = 1.0;
    return m;
}

void check_materialize_guard(uint64_t dim) {
    if (dim > kMaterializeLimit) throw resource_error("circuit: materialize guard exceeded (dimension > 2^14)");
}

Factor tensor_left(Factor inner, uint64_t copies) {
    return Factor{TensorLeftIdentity{std::make_shared<Factor>(std::move(inner)), copies}};
}

void serialize_factor(std::ostream& out, const Factor& f);

std::string factor_signature(const Factor& f) {
    std::ostringstream ss;
    serialize_factor(ss, f);
    return ss.str();
}

}  // namespace

uint64_t Factor::dimension() const {
    return std::visit(
        [](const auto& op) -> uint64_t {
            using T = std::decay_t<decltype(op)>;
            if constexpr (std::is_same_v<T, TensorLeftIdentity>) {
                if (!op.inner || op.copies == 0) throw std::invalid_argument("circuit: empty tensor factor");
                return op.copies * op.inner->dimension();
            } else if constexpr (std::is_same_v<T, FieldDft>) {
                return op.field.order();
            } else if constexpr (std::is_same_v<T, BMatrix>) {
                return op.q;
            } else if constexpr (std::is_same_v<T, BStage>) {
                if (op.stage < 1 || (uint64_t{1} << op.stage) > op.q)
                    throw std::invalid_argument("circuit: BStage index out of range");
                return op.q;
            } else if constexpr (std::is_same_v<T, DMatrix>) {
                const uint64_t q = op.field.order();
                return q * q;
            } else if constexpr (std::is_same_v<T, FieldShift> || std::is_same_v<T, FieldScale>) {
                return op.field.order();
            } else if constexpr (std::is_same_v<T, BitHadamard>) {
                return uint64_t{1} << op.num_bits;
            } else if constexpr (std::is_same_v<T, InputPhase>) {
                return op.signs.size();
            } else if constexpr (std::is_same_v<T, BlockDispatch>) {
                if (op.blocks.size() != (uint64_t{1} << op.selector_width))
                    throw std::invalid_argument("circuit: block count must be 2^selector_width");
                const uint64_t d = op.blocks.front().dimension;
                for (const auto& b : op.blocks) {
                    if (b.dimension != d) throw std::invalid_argument("circuit: ragged block dimensions");
                    if (b.ancilla_width != 0) throw std::invalid_argument("circuit: dispatch blocks must be ancilla-free");
                    b.validate();
                }
                return op.blocks.size() * d;
            } else if constexpr (std::is_same_v<T, IndexTranspose>) {
                return uint64_t{op.q} * op.q;
            } else if constexpr (std::is_same_v<T, AncillaXorTable>) {
                if (op.table.size() != (uint64_t{1} << op.selector_width))
                    throw std::invalid_argument("circuit: xor table size must be 2^selector_width");
                for (uint64_t t : op.table)
                    if (op.ancilla_width < 64 && (t >> op.ancilla_width) != 0)
                        throw std::invalid_argument("circuit: xor table entry wider than the ancilla");
                return ((uint64_t{1} << op.selector_width) * op.data_dim) << op.ancilla_width;
            } else {  // AncillaSelect
                for (const auto& g : op.gates)
                    if (g.dimension() != op.data_dim)
                        throw std::invalid_argument("circuit: select gate dimension mismatch");
                return ((uint64_t{1} << op.selector_width) * op.data_dim) << op.ancilla_width;
            }
        },
        op);
}

Factor Factor::identity(uint64_t dim) { return Factor{InputPhase{std::vector<int8_t>(dim, +1)}}; }

void Circuit::validate() const {
    if (!std::has_single_bit(dimension)) throw std::invalid_argument("circuit: dimension must be a power of 2");
    for (const auto& f : factors)
        if (f.dimension() != total_dimension()) throw std::invalid_argument("circuit: factor dimension mismatch");
}

void apply_factor(const Factor& f, std::vector<double>& state) { apply_span(f, state); }

void apply_circuit(const Circuit& c, std::vector<double>& state) {
    c.validate();
    if (state.size() != c.total_dimension()) throw std::invalid_argument("circuit: state dimension mismatch");
    apply_circuit_span(c, state);
}

Matrix materialize(const Factor& f) {
    const uint64_t dim = f.dimension();
    check_materialize_guard(dim);
    return std::visit(
        [&](const auto& op) -> Matrix {
            using T = std::decay_t<decltype(op)>;
            if constexpr (std::is_same_v<T, TensorLeftIdentity>) {
                const Matrix inner = materialize(*op.inner);
                const uint64_t d = inner.rows();
                Matrix m(dim, dim);
                for (uint64_t b = 0; b < op.copies; ++b)
                    for (uint64_t r = 0; r < d; ++r)
                        for (uint64_t c = 0; c < d; ++c) m.at(b * d + r, b * d + c) = inner.at(r, c);
                return m;
            } else if constexpr (std::is_same_v<T, FieldDft>) {
                const FieldTables t(op.field);
                const double scale = 1.0 / std::sqrt(static_cast<double>(t.q));
                Matrix m(t.q, t.q);
                for (uint32_t x = 0; x < t.q; ++x)
                    for (uint32_t y = 0; y < t.q; ++y) m.at(x, y) = t.trace_sign[t.mul[x * t.q + y]] * scale;
                return m;
            } else if constexpr (std::is_same_v<T, BMatrix>) {
                const uint32_t q = op.q;
                const uint32_t n = log2_exact(q);
                Matrix m(q, q);
                uint32_t row = 0;
                for (uint32_t g = 1; g <= n; ++g) {
                    const uint32_t w = q >> g;
                    const double scale = 1.0 / std::sqrt(static_cast<double>(1u << g));
                    for (uint32_t r = 0; r < w; ++r, ++row)
                        for (uint32_t j = 0; j < (1u << g); ++j) m.at(row, j * w + r) = (j & 1) ? -scale : scale;
                }
                for (uint32_t c = 0; c < q; ++c) m.at(q - 1, c) = 1.0 / std::sqrt(static_cast<double>(q));
                return m;
            } else if constexpr (std::is_same_v<T, BStage>) {
                const uint32_t q = op.q;
                const uint32_t mdim = 1u << op.stage;
                const uint32_t half = mdim >> 1;
                const uint32_t base = q - mdim;
                Matrix m = Matrix::identity(q);
                const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
                for (uint32_t r = 0; r < half; ++r) {
                    m.at(base + r, base + r) = inv_sqrt2;
                    m.at(base + r, base + half + r) = -inv_sqrt2;
                    m.at(base + half + r, base + r) = inv_sqrt2;
                    m.at(base + half + r, base + half + r) = inv_sqrt2;
                }
                return m;
            } else if constexpr (std::is_same_v<T, DMatrix>) {
                const FieldTables t(op.field);
                const uint32_t q = t.q;
                const double scale = 1.0 / std::sqrt(static_cast<double>(q));
                Matrix m(dim, dim);
                for (uint32_t i = 0; i < q; ++i) m.at(uint64_t{i} * q, uint64_t{i} * q) = 1.0;
                for (uint32_t i = 0; i < q; ++i)
                    for (uint32_t j = 0; j < q; ++j)
                        for (uint32_t u = 1; u < q; ++u)
                            m.at(uint64_t{i} * q + u, uint64_t{j} * q + u) =
                                t.trace_sign[t.mul[t.mul[i * q + j] * q + u]] * scale;
                return m;
            } else if constexpr (std::is_same_v<T, FieldShift>) {
                const uint32_t q = op.field.order();
                const Element c(op.field, op.shift_value);
                // S_c[x, x+c] = 1
                std::vector<uint64_t> image(q);
                for (uint32_t x = 0; x < q; ++x) image[(Element(op.field, x) + c).value()] = x;
                return permutation_matrix(q, image);
            } else if constexpr (std::is_same_v<T, FieldScale>) {
                const uint32_t q = op.field.order();
                const Element factor = gf::pow(gf::find_generator(op.field), op.power);
                std::vector<uint64_t> image(q);
                for (uint32_t v = 0; v < q; ++v) image[v] = (Element(op.field, v) * factor).value();
                return permutation_matrix(q, image);
            } else if constexpr (std::is_same_v<T, BitHadamard>) {
                const uint64_t n = dim;
                const double scale = 1.0 / std::sqrt(static_cast<double>(n));
                Matrix m(n, n);
                for (uint64_t i = 0; i < n; ++i)
                    for (uint64_t j = 0; j < n; ++j)
                        m.at(i, j) = (std::popcount(i & j) & 1) ? -scale : scale;
                return m;
            } else if constexpr (std::is_same_v<T, InputPhase>) {
                Matrix m(dim, dim);
                for (uint64_t i = 0; i < dim; ++i) m.at(i, i) = op.signs[i];
                return m;
            } else if constexpr (std::is_same_v<T, BlockDispatch>) {
                const uint64_t d = op.blocks.front().dimension;
                Matrix m(dim, dim);
                for (size_t b = 0; b < op.blocks.size(); ++b) {
                    const Matrix blk = materialize(op.blocks[b]);
                    for (uint64_t r = 0; r < d; ++r)
                        for (uint64_t c = 0; c < d; ++c) m.at(b * d + r, b * d + c) = blk.at(r, c);
                }
                return m;
            } else if constexpr (std::is_same_v<T, IndexTranspose>) {
                const uint64_t q = op.q;
                std::vector<uint64_t> image(q * q);
                for (uint64_t i = 0; i < q; ++i)
                    for (uint64_t k = 0; k < q; ++k) image[i * q + k] = k * q + i;
                return permutation_matrix(dim, image);
            } else if constexpr (std::is_same_v<T, AncillaXorTable>) {
                std::vector<uint64_t> image(dim);
                const uint64_t anc = uint64_t{1} << op.ancilla_width;
                for (uint64_t i = 0; i < (uint64_t{1} << op.selector_width); ++i)
                    for (uint64_t p = 0; p < op.data_dim; ++p)
                        for (uint64_t a = 0; a < anc; ++a) {
                            const uint64_t base = (i * op.data_dim + p) << op.ancilla_width;
                            image[base + a] = base + (a ^ op.table[i]);
                        }
                return permutation_matrix(dim, image);
            } else {  // AncillaSelect: column-by-column through apply
                Matrix m(dim, dim);
                std::vector<double> e(dim, 0.0);
                for (uint64_t c = 0; c < dim; ++c) {
                    std::fill(e.begin(), e.end(), 0.0);
                    e[c] = 1.0;
                    apply_span(Factor{op}, e);
                    for (uint64_t r = 0; r < dim; ++r) m.at(r, c) = e[r];
                }
                return m;
            }
        },
        f.op);
}

Matrix materialize(const Circuit& c) {
    c.validate();
    check_materialize_guard(c.total_dimension());
    Matrix m = Matrix::identity(c.total_dimension());
    bool first = true;
    for (const auto& f : c.factors) {
        m = first ? materialize(f) : multiply(m, materialize(f));
        first = false;
    }
    return m;
}

Decomposition build_decomposition(uint32_t q) {
    const uint32_t n = log2_exact(q);
    const auto spec = FieldSpec::binary(n);
    const Element alpha = gf::find_generator(spec);

    Circuit c;
    c.dimension = uint64_t{q} * q;
    c.factors.push_back(tensor_left(Factor{BMatrix{q}}, q));
    c.factors.push_back(tensor_left(Factor{FieldDft{spec}}, q));
    c.factors.push_back(Factor{DMatrix{spec, alpha.value()}});
    c.factors.push_back(tensor_left(Factor{FieldDft{spec}}, q));  // F^{-1} = F in char 2
    c.validate();

    Decomposition d{std::move(c), {}};
    for (uint32_t i = 0; i < q; ++i)
        for (uint32_t r = 0; r < q / 2; ++r) d.design_rows.push_back(i * q + r);
    return d;
}

DFactorisation build_d_matrix(uint32_t q, const Element& alpha) {
    const uint32_t n = log2_exact(q);
    const auto spec = FieldSpec::binary(n);
    if (!(alpha.spec() == spec)) throw std::invalid_argument("circuit: alpha from the wrong field");
    if (gf::multiplicative_order(alpha) != q - 1) throw std::invalid_argument("circuit: alpha is not a generator");

    BlockDispatch bd;
    bd.selector_width = n;
    bd.blocks.resize(q);
    bd.blocks[0] = Circuit{q, {}, 0};
    for (uint32_t u = 1; u < q; ++u) {
        const uint32_t k = gf::discrete_log(alpha, Element(spec, u));
        bd.blocks[u] = Circuit{q, {Factor{FieldDft{spec}}, Factor{FieldScale{spec, k}}}, 0};
    }

    Circuit lowered;
    lowered.dimension = uint64_t{q} * q;
    lowered.factors.push_back(Factor{IndexTranspose{q}});
    lowered.factors.push_back(Factor{bd});
    lowered.factors.push_back(Factor{IndexTranspose{q}});
    lowered.validate();

    return DFactorisation{Factor{DMatrix{spec, alpha.value()}}, std::move(lowered)};
}

DcIdentityReport verify_dc_identity(uint32_t q, uint32_t c) {
    const uint32_t n = log2_exact(q);
    const auto spec = FieldSpec::binary(n);
    if (c >= q) throw std::invalid_argument("circuit: c out of range");

    const Matrix f = materialize(Factor{FieldDft{spec}});
    const double root_q = std::sqrt(static_cast<double>(q));

    Matrix dc(q, q), dcp(q, q);
    dc.at(0, 0) = 1.0;
    for (uint32_t z = 1; z < q; ++z) {
        const double v = (gf::trace(Element(spec, z) * Element(spec, c)) ? -1.0 : 1.0) / root_q;
        dc.at(z, z) = v;
        dcp.at(z, z) = v;
    }

    const Matrix sc = materialize(Factor{FieldShift{spec, c}});
    Matrix j(q, q);
    for (uint32_t r = 0; r < q; ++r)
        for (uint32_t cc = 0; cc < q; ++cc) j.at(r, cc) = 1.0;

    const Matrix lhs_diag = multiply(multiply(f, dc), f);
    const Matrix lhs_off = multiply(multiply(f, dcp), f);
    Matrix rhs_diag(q, q), rhs_off(q, q);
    for (uint32_t r = 0; r < q; ++r)
        for (uint32_t cc = 0; cc < q; ++cc) {
            rhs_diag.at(r, cc) = sc.at(r, cc) / root_q + (root_q - 1.0) / (q * root_q) * j.at(r, cc);
            rhs_off.at(r, cc) = sc.at(r, cc) / root_q - 1.0 / (q * root_q) * j.at(r, cc);
        }

    DcIdentityReport rep;
    rep.max_abs_error_diagonal = max_abs_diff(lhs_diag, rhs_diag);
    rep.max_abs_error_offdiag = max_abs_diff(lhs_off, rhs_off);
    rep.ok = rep.max_abs_error_diagonal < 1e-10 && rep.max_abs_error_offdiag < 1e-10;
    return rep;
}

Circuit lower_block_dispatch(const BlockDispatch& bd) {
    const uint64_t total = Factor{bd}.dimension();  // validates shape
    const uint64_t num_blocks = bd.blocks.size();
    const uint64_t d = total / num_blocks;

    if (num_blocks == 1) return Circuit{d, bd.blocks[0].factors, 0};

    size_t num_steps = 0;
    for (const auto& b : bd.blocks) num_steps = std::max(num_steps, b.factors.size());

    // Application-order step l of block i; shorter blocks pad with identity.
    auto step_factor = [&](size_t i, size_t l) -> Factor {
        const auto& fs = bd.blocks[i].factors;
        if (l < fs.size()) return fs[fs.size() - 1 - l];
        return Factor::identity(d);
    };

    std::vector<std::vector<Factor>> step_gates(num_steps);
    std::vector<std::vector<uint64_t>> gate_index(num_steps, std::vector<uint64_t>(num_blocks, 0));
    std::vector<uint32_t> slot_width(num_steps, 0), slot_offset(num_steps, 0);
    uint32_t ancilla_width = 0;
    for (size_t l = 0; l < num_steps; ++l) {
        std::map<std::string, uint64_t> seen;
        for (size_t i = 0; i < num_blocks; ++i) {
            Factor g = step_factor(i, l);
            const std::string sig = factor_signature(g);
            auto [it, inserted] = seen.emplace(sig, step_gates[l].size());
            if (inserted) step_gates[l].push_back(std::move(g));
            gate_index[l][i] = it->second;
        }
        slot_offset[l] = ancilla_width;
        slot_width[l] = step_gates[l].size() > 1 ? std::bit_width(step_gates[l].size() - 1) : 0;
        ancilla_width += slot_width[l];
    }

    AncillaXorTable table;
    table.selector_width = static_cast<uint32_t>(std::countr_zero(num_blocks));
    table.data_dim = d;
    table.ancilla_width = ancilla_width;
    table.table.resize(num_blocks, 0);
    for (size_t i = 0; i < num_blocks; ++i)
        for (size_t l = 0; l < num_steps; ++l) table.table[i] |= gate_index[l][i] << slot_offset[l];

    // Application order: write table, one controlled step per position, uncompute.
    std::vector<Factor> applied;
    if (ancilla_width > 0) applied.push_back(Factor{table});
    for (size_t l = 0; l < num_steps; ++l) {
        AncillaSelect sel;
        sel.selector_width = table.selector_width;
        sel.data_dim = d;
        sel.ancilla_width = ancilla_width;
        sel.slot_offset = slot_offset[l];
        sel.slot_width = slot_width[l];
        sel.gates = step_gates[l];
        applied.push_back(Factor{std::move(sel)});
    }
    if (ancilla_width > 0) applied.push_back(Factor{table});

    Circuit out;
    out.dimension = total;
    out.ancilla_width = ancilla_width;
    out.factors.assign(applied.rbegin(), applied.rend());
    out.validate();
    return out;
}

GateCostReport cost_report(const Circuit& original, const Circuit& lowered) {
    return GateCostReport{static_cast<uint32_t>(original.factors.size()),
                          static_cast<uint32_t>(lowered.factors.size()), lowered.ancilla_width};
}

RowMatchReport match_design_rows(const Matrix& dense, uint32_t q, const std::vector<uint32_t>& design_rows) {
    const uint32_t n = log2_exact(q);
    const auto spec = FieldSpec::binary(n);
    const double scale = std::sqrt(2.0 * q);

    RowMatchReport rep;
    rep.all_rows_matched = true;

    // point sets keyed (x,y); a line y = ax+b fits a q-point set iff every point satisfies it
    auto fit_line = [&](const std::vector<std::pair<uint32_t, uint32_t>>& pts)
        -> std::pair<bool, std::pair<uint32_t, uint32_t>> {
        for (uint32_t a = 0; a < q; ++a)
            for (uint32_t b = 0; b < q; ++b) {
                bool all = true;
                for (const auto& [x, y] : pts)
                    if ((Element(spec, a) * Element(spec, x) + Element(spec, b)).value() != y) {
                        all = false;
                        break;
                    }
                if (all) return {true, {a, b}};
            }
        return {false, {0, 0}};
    };

    std::map<uint32_t, uint32_t> phi;  // minus intercept -> plus intercept
    bool consistent = true;
    for (uint32_t idx : design_rows) {
        std::vector<std::pair<uint32_t, uint32_t>> plus, minus;
        for (uint32_t col = 0; col < q * q; ++col) {
            const double v = dense.at(idx, col) * scale;
            const double r = std::round(v);
            rep.max_entry_error = std::max(rep.max_entry_error, std::fabs(v - r));
            const int iv = static_cast<int>(r);
            if (iv == 1)
                plus.emplace_back(col / q, col % q);
            else if (iv == -1)
                minus.emplace_back(col / q, col % q);
            else if (iv != 0) {
                rep.all_rows_matched = false;
            }
        }
        if (plus.size() != q || minus.size() != q) {
            rep.all_rows_matched = false;
            continue;
        }
        const auto [okp, lp] = fit_line(plus);
        const auto [okm, lm] = fit_line(minus);
        if (!okp || !okm || lp.first != lm.first || lp.second == lm.second) {
            rep.all_rows_matched = false;
            continue;
        }
        auto [it, inserted] = phi.emplace(lm.second, lp.second);
        if (!inserted && it->second != lp.second) consistent = false;
    }
    rep.phi_consistent = consistent;

    std::set<uint32_t> minus_class, plus_class;
    for (const auto& [bm, bp] : phi) {
        minus_class.insert(bm);
        plus_class.insert(bp);
        rep.phi.emplace_back(bm, bp);
    }
    rep.equipartition_ok = minus_class.size() == q / 2 && plus_class.size() == q / 2;
    for (uint32_t v : minus_class)
        if (plus_class.count(v)) rep.equipartition_ok = false;
    return rep;
}

SignedSparseMatrix sign_rows_from_unitary(const Matrix& dense, double tol) {
    if (dense.rows() != dense.cols()) throw std::invalid_argument("circuit: sign extraction needs a square matrix");
    SignedSparseMatrix m;
    m.num_rows = static_cast<uint32_t>(dense.rows());
    m.num_cols = static_cast<uint32_t>(dense.cols());
    m.rows.resize(m.num_rows);
    for (uint32_t r = 0; r < m.num_rows; ++r) {
        std::vector<uint32_t> support;
        for (uint32_t c = 0; c < m.num_cols; ++c)
            if (std::fabs(dense.at(r, c)) > tol) support.push_back(c);
        if (support.empty()) throw std::invalid_argument("circuit: zero row in sign extraction");
        const double mag = std::sqrt(static_cast<double>(support.size()));
        for (uint32_t c : support) {
            const double scaled = dense.at(r, c) * mag;
            if (std::fabs(std::fabs(scaled) - 1.0) > 1e-6)
                throw std::invalid_argument("circuit: row is not a uniformly scaled sign pattern");
            m.rows[r].push_back(SignedEntry{c, static_cast<int8_t>(scaled > 0 ? 1 : -1)});
        }
    }
    m.validate();
    return m;
}

// ---- serialization ----

namespace {

void serialize_field(std::ostream& out, const FieldSpec& s) {
    out << s.characteristic << ' ' << s.degree << ' ' << s.modulus;
}

void serialize_circuit_body(std::ostream& out, const Circuit& c) {
    out << "( Block " << c.dimension << ' ' << c.ancilla_width << ' ' << c.factors.size();
    for (const auto& f : c.factors) {
        out << ' ';
        serialize_factor(out, f);
    }
    out << " )";
}

void serialize_factor(std::ostream& out, const Factor& f) {
    std::visit(
        [&](const auto& op) {
            using T = std::decay_t<decltype(op)>;
            if constexpr (std::is_same_v<T, TensorLeftIdentity>) {
                out << "( TensorLeftIdentity " << op.copies << ' ';
                serialize_factor(out, *op.inner);
                out << " )";
            } else if constexpr (std::is_same_v<T, FieldDft>) {
                out << "( FieldDFT ";
                serialize_field(out, op.field);
                out << " )";
            } else if constexpr (std::is_same_v<T, BMatrix>) {
                out << "( BMatrix " << op.q << " )";
            } else if constexpr (std::is_same_v<T, BStage>) {
                out << "( BStage " << op.q << ' ' << op.stage << " )";
            } else if constexpr (std::is_same_v<T, DMatrix>) {
                out << "( DMatrix ";
                serialize_field(out, op.field);
                out << ' ' << op.alpha_value << " )";
            } else if constexpr (std::is_same_v<T, FieldShift>) {
                out << "( FieldShiftPermutation ";
                serialize_field(out, op.field);
                out << ' ' << op.shift_value << " )";
            } else if constexpr (std::is_same_v<T, FieldScale>) {
                out << "( FieldScalePermutation ";
                serialize_field(out, op.field);
                out << ' ' << op.power << " )";
            } else if constexpr (std::is_same_v<T, BitHadamard>) {
                out << "( BitHadamard " << op.num_bits << " )";
            } else if constexpr (std::is_same_v<T, InputPhase>) {
                out << "( InputPhase ";
                for (int8_t s : op.signs) out << (s > 0 ? '+' : '-');
                out << " )";
            } else if constexpr (std::is_same_v<T, BlockDispatch>) {
                out << "( BlockDispatch " << op.selector_width << ' ' << op.blocks.size();
                for (const auto& b : op.blocks) {
                    out << ' ';
                    serialize_circuit_body(out, b);
                }
                out << " )";
            } else if constexpr (std::is_same_v<T, IndexTranspose>) {
                out << "( IndexTranspose " << op.q << " )";
            } else if constexpr (std::is_same_v<T, AncillaXorTable>) {
                out << "( AncillaXorTable " << op.selector_width << ' ' << op.data_dim << ' ' << op.ancilla_width
                    << ' ' << op.table.size();
                for (uint64_t t : op.table) out << ' ' << t;
                out << " )";
            } else {  // AncillaSelect
                out << "( AncillaSelect " << op.selector_width << ' ' << op.data_dim << ' ' << op.ancilla_width
                    << ' ' << op.slot_offset << ' ' << op.slot_width << ' ' << op.gates.size();
                for (const auto& g : op.gates) {
                    out << ' ';
                    serialize_factor(out, g);
                }
                out << " )";
            }
        },
        f.op);
}

struct TokenStream {
    std::vector<std::string> tokens;
    size_t pos = 0;

    explicit TokenStream(const std::string& text) {
        std::istringstream in(text);
        std::string t;
        while (in >> t) tokens.push_back(t);
    }

    const std::string& next() {
        if (pos >= tokens.size()) throw std::invalid_argument("circuit: unexpected end of input");
        return tokens[pos++];
    }

    void expect(const std::string& t) {
        if (next() != t) throw std::invalid_argument("circuit: expected '" + t + "'");
    }

    uint64_t number() { return std::stoull(next()); }
};

Factor parse_factor(TokenStream& ts);

Circuit parse_circuit_body(TokenStream& ts) {
    ts.expect("(");
    ts.expect("Block");
    Circuit c;
    c.dimension = ts.number();
    c.ancilla_width = static_cast<uint32_t>(ts.number());
    const uint64_t nf = ts.number();
    for (uint64_t i = 0; i < nf; ++i) c.factors.push_back(parse_factor(ts));
    ts.expect(")");
    return c;
}

FieldSpec parse_field(TokenStream& ts) {
    const uint32_t ch = static_cast<uint32_t>(ts.number());
    const uint32_t deg = static_cast<uint32_t>(ts.number());
    const uint32_t mod = static_cast<uint32_t>(ts.number());
    if (ch == 2) return FieldSpec::binary_with_modulus(deg, mod);
    return FieldSpec::prime(ch);
}

Factor parse_factor(TokenStream& ts) {
    ts.expect("(");
    const std::string kind = ts.next();
    Factor f = Factor::identity(1);
    if (kind == "TensorLeftIdentity") {
        const uint64_t copies = ts.number();
        Factor inner = parse_factor(ts);
        f = Factor{TensorLeftIdentity{std::make_shared<Factor>(std::move(inner)), copies}};
    } else if (kind == "FieldDFT") {
        f = Factor{FieldDft{parse_field(ts)}};
    } else if (kind == "BMatrix") {
        f = Factor{BMatrix{static_cast<uint32_t>(ts.number())}};
    } else if (kind == "BStage") {
        const uint32_t q = static_cast<uint32_t>(ts.number());
        f = Factor{BStage{q, static_cast<uint32_t>(ts.number())}};
    } else if (kind == "DMatrix") {
        const FieldSpec s = parse_field(ts);
        f = Factor{DMatrix{s, static_cast<uint32_t>(ts.number())}};
    } else if (kind == "FieldShiftPermutation") {
        const FieldSpec s = parse_field(ts);
        f = Factor{FieldShift{s, static_cast<uint32_t>(ts.number())}};
    } else if (kind == "FieldScalePermutation") {
        const FieldSpec s = parse_field(ts);
        f = Factor{FieldScale{s, static_cast<uint32_t>(ts.number())}};
    } else if (kind == "BitHadamard") {
        f = Factor{BitHadamard{static_cast<uint32_t>(ts.number())}};
    } else if (kind == "InputPhase") {
        const std::string& signs = ts.next();
        InputPhase ip;
        for (char c : signs) {
            if (c != '+' && c != '-') throw std::invalid_argument("circuit: bad InputPhase sign string");
            ip.signs.push_back(c == '+' ? int8_t{1} : int8_t{-1});
        }
        f = Factor{std::move(ip)};
    } else if (kind == "BlockDispatch") {
        BlockDispatch bd;
        bd.selector_width = static_cast<uint32_t>(ts.number());
        const uint64_t nb = ts.number();
        for (uint64_t i = 0; i < nb; ++i) bd.blocks.push_back(parse_circuit_body(ts));
        f = Factor{std::move(bd)};
    } else if (kind == "IndexTranspose") {
        f = Factor{IndexTranspose{static_cast<uint32_t>(ts.number())}};
    } else if (kind == "AncillaXorTable") {
        AncillaXorTable t;
        t.selector_width = static_cast<uint32_t>(ts.number());
        t.data_dim = ts.number();
        t.ancilla_width = static_cast<uint32_t>(ts.number());
        const uint64_t n = ts.number();
        for (uint64_t i = 0; i < n; ++i) t.table.push_back(ts.number());
        f = Factor{std::move(t)};
    } else if (kind == "AncillaSelect") {
        AncillaSelect sel;
        sel.selector_width = static_cast<uint32_t>(ts.number());
        sel.data_dim = ts.number();
        sel.ancilla_width = static_cast<uint32_t>(ts.number());
        sel.slot_offset = static_cast<uint32_t>(ts.number());
        sel.slot_width = static_cast<uint32_t>(ts.number());
        const uint64_t n = ts.number();
        for (uint64_t i = 0; i < n; ++i) sel.gates.push_back(parse_factor(ts));
        f = Factor{std::move(sel)};
    } else {
        throw std::invalid_argument("circuit: unknown factor kind '" + kind + "'");
    }
    ts.expect(")");
    return f;
}

}  // namespace

std::string serialize(const Circuit& c) {
    std::ostringstream out;
    out << "circuit v1 " << c.dimension << ' ' << c.ancilla_width << ' ' << c.factors.size() << '\n';
    for (const auto& f : c.factors) {
        out << "FACTOR ";
        serialize_factor(out, f);
        out << '\n';
    }
    return out.str();
}

Circuit parse_circuit(const std::string& text) {
    TokenStream ts(text);
    ts.expect("circuit");
    ts.expect("v1");
    Circuit c;
    c.dimension = ts.number();
    c.ancilla_width = static_cast<uint32_t>(ts.number());
    const uint64_t nf = ts.number();
    for (uint64_t i = 0; i < nf; ++i) {
        ts.expect("FACTOR");
        c.factors.push_back(parse_factor(ts));
    }
    c.validate();
    return c;
}

}  // namespace qnw::circuit
