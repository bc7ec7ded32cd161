#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "qnw/circuit.hpp"
#include "qnw/construction.hpp"
#include "qnw/errors.hpp"
#include "qnw/gf.hpp"
#include "qnw/rng.hpp"

using namespace qnw;
using namespace qnw::circuit;
using gf::Element;
using gf::FieldSpec;

namespace {

std::vector<double> random_unit_vector(size_t dim, SplitRng& rng) {
    std::vector<double> v(dim);
    double norm = 0.0;
    for (auto& x : v) {
        x = static_cast<double>(rng.next() % 2001) / 1000.0 - 1.0;
        norm += x * x;
    }
    norm = std::sqrt(norm);
    for (auto& x : v) x /= norm;
    return v;
}

Factor tli(Factor inner, uint64_t copies) {
    return Factor{TensorLeftIdentity{std::make_shared<Factor>(std::move(inner)), copies}};
}

}  // namespace

TEST_CASE("materialize: tensor with identity, field shift, bit Hadamard") {
    const Matrix m = materialize(tli(Factor{BitHadamard{1}}, 2));
    const double s = 1.0 / std::sqrt(2.0);
    Matrix expect(4, 4);
    expect.at(0, 0) = s;
    expect.at(0, 1) = s;
    expect.at(1, 0) = s;
    expect.at(1, 1) = -s;
    expect.at(2, 2) = s;
    expect.at(2, 3) = s;
    expect.at(3, 2) = s;
    expect.at(3, 3) = -s;
    CHECK(max_abs_diff(m, expect) == 0.0);

    const Matrix swap = materialize(Factor{FieldShift{FieldSpec::binary(1), 1}});
    Matrix expect_swap(2, 2);
    expect_swap.at(0, 1) = 1.0;
    expect_swap.at(1, 0) = 1.0;
    CHECK(max_abs_diff(swap, expect_swap) == 0.0);

    const Matrix h = materialize(Factor{BitHadamard{1}});
    CHECK(h.at(0, 0) == doctest::Approx(s));
    CHECK(h.at(0, 1) == doctest::Approx(s));
    CHECK(h.at(1, 0) == doctest::Approx(s));
    CHECK(h.at(1, 1) == doctest::Approx(-s));
}

TEST_CASE("F over GF(2) is the 2x2 Hadamard; F is symmetric and self-inverse, q <= 16") {
    const Matrix f2 = materialize(Factor{FieldDft{FieldSpec::binary(1)}});
    const double s = 1.0 / std::sqrt(2.0);
    CHECK(f2.at(0, 0) == doctest::Approx(s));
    CHECK(f2.at(0, 1) == doctest::Approx(s));
    CHECK(f2.at(1, 0) == doctest::Approx(s));
    CHECK(f2.at(1, 1) == doctest::Approx(-s));

    for (uint32_t n : {1u, 2u, 3u, 4u}) {
        const Matrix f = materialize(Factor{FieldDft{FieldSpec::binary(n)}});
        CHECK(max_abs_diff(f, transpose(f)) == 0.0);
        CHECK(max_abs_diff(multiply(f, f), Matrix::identity(f.rows())) < 1e-12);
    }
}

TEST_CASE("every factor materializes to an orthogonal matrix") {
    const auto spec4 = FieldSpec::binary(2);
    const auto spec8 = FieldSpec::binary(3);
    std::vector<Factor> factors;
    factors.push_back(Factor{FieldDft{spec4}});
    factors.push_back(Factor{BMatrix{8}});
    factors.push_back(Factor{BStage{8, 2}});
    factors.push_back(Factor{DMatrix{spec4, gf::find_generator(spec4).value()}});
    factors.push_back(Factor{FieldShift{spec8, 5}});
    factors.push_back(Factor{FieldScale{spec8, 3}});
    factors.push_back(Factor{BitHadamard{3}});
    factors.push_back(Factor{InputPhase{{1, -1, -1, 1}}});
    factors.push_back(Factor{IndexTranspose{4}});
    factors.push_back(tli(Factor{BitHadamard{1}}, 4));
    for (const auto& f : factors) {
        const Matrix m = materialize(f);
        CHECK(orthogonality_defect(m) < 1e-10);
    }
    // permutations and phases are exactly orthogonal
    CHECK(orthogonality_defect(materialize(Factor{FieldShift{spec8, 5}})) == 0.0);
    CHECK(orthogonality_defect(materialize(Factor{InputPhase{{1, -1, -1, 1}}})) == 0.0);
    CHECK(orthogonality_defect(materialize(Factor{IndexTranspose{4}})) == 0.0);
}

TEST_CASE("apply agrees with materialize on random vectors (property)") {
    SplitRng rng(2026, 11);
    const auto spec4 = FieldSpec::binary(2);
    std::vector<Factor> factors;
    factors.push_back(Factor{FieldDft{spec4}});
    factors.push_back(Factor{BMatrix{16}});
    factors.push_back(Factor{BStage{16, 3}});
    factors.push_back(Factor{DMatrix{spec4, 2}});
    factors.push_back(Factor{FieldShift{spec4, 3}});
    factors.push_back(Factor{FieldScale{spec4, 1}});
    factors.push_back(Factor{BitHadamard{4}});
    factors.push_back(Factor{IndexTranspose{4}});
    factors.push_back(tli(Factor{FieldDft{spec4}}, 4));
    for (const auto& f : factors) {
        const Matrix m = materialize(f);
        for (int rep = 0; rep < 5; ++rep) {
            auto v = random_unit_vector(f.dimension(), rng);
            const auto expect = qnw::apply(m, v);
            auto w = v;
            apply_factor(f, w);
            double err = 0.0;
            for (size_t i = 0; i < w.size(); ++i) err = std::max(err, std::fabs(w[i] - expect[i]));
            CHECK(err < 1e-12);
        }
    }
}

TEST_CASE("B equals the product of its stages, entrywise < 1e-12, q <= 16") {
    for (uint32_t q : {2u, 4u, 8u, 16u}) {
        const uint32_t n = static_cast<uint32_t>(std::countr_zero(q));
        Matrix prod = Matrix::identity(q);
        for (uint32_t i = 1; i <= n; ++i) prod = multiply(prod, materialize(Factor{BStage{q, i}}));
        CHECK(max_abs_diff(materialize(Factor{BMatrix{q}}), prod) < 1e-12);
    }
}

TEST_CASE("D matrix: entries, orthogonality, lowered form equality") {
    for (uint32_t q : {2u, 4u, 8u}) {
        const uint32_t n = static_cast<uint32_t>(std::countr_zero(q));
        const auto spec = FieldSpec::binary(n);
        const Element alpha = gf::find_generator(spec);
        const auto [d, lowered] = build_d_matrix(q, alpha);
        const Matrix dm = materialize(d);
        CHECK(orthogonality_defect(dm) < 1e-10);

        // entry check: block (i,j), inner position of alpha^k holds (-1)^Tr(ij a^k)/sqrt q
        const double root_q = std::sqrt(static_cast<double>(q));
        for (uint32_t i = 0; i < q; ++i)
            for (uint32_t j = 0; j < q; ++j)
                for (uint32_t k = 1; k < q; ++k) {
                    const uint32_t u = gf::pow(alpha, k).value();
                    const Element prod = Element(spec, i) * Element(spec, j) * gf::pow(alpha, k);
                    const double expect = (gf::trace(prod) ? -1.0 : 1.0) / root_q;
                    CHECK(dm.at(uint64_t{i} * q + u, uint64_t{j} * q + u) == doctest::Approx(expect));
                }

        CHECK(max_abs_diff(materialize(lowered), dm) < 1e-10);
    }
    const auto spec = FieldSpec::binary(2);
    CHECK_THROWS_AS(build_d_matrix(4, gf::one(spec)), std::invalid_argument);  // not a generator
}

TEST_CASE("conjugation identities for D_c and D'_c hold; coefficients are forced") {
    for (uint32_t q : {2u, 4u, 8u, 16u}) {
        for (uint32_t c = 0; c < q; ++c) {
            const auto rep = verify_dc_identity(q, c);
            CHECK(rep.ok);
            CHECK(rep.max_abs_error_diagonal < 1e-12);
            CHECK(rep.max_abs_error_offdiag < 1e-12);
        }
    }

    // The J-coefficients are pinned by the structure itself: the residual of
    // F D_c F^-1 minus (1/sqrt q) S_c must be a constant matrix, and row-sum
    // conservation fixes the constants to +(sqrt q - 1)/(q sqrt q) and
    // -1/(q sqrt q).
    const uint32_t q = 8;
    const auto spec = FieldSpec::binary(3);
    const Matrix f = materialize(Factor{FieldDft{spec}});
    const double root_q = std::sqrt(static_cast<double>(q));
    for (uint32_t c = 0; c < q; ++c) {
        Matrix dc(q, q), dcp(q, q);
        dc.at(0, 0) = 1.0;
        for (uint32_t z = 1; z < q; ++z) {
            const double v = (gf::trace(Element(spec, z) * Element(spec, c)) ? -1.0 : 1.0) / root_q;
            dc.at(z, z) = v;
            dcp.at(z, z) = v;
        }
        const Matrix sc = materialize(Factor{FieldShift{spec, c}});
        const Matrix res_diag = add_scaled(multiply(multiply(f, dc), f), -1.0 / root_q, sc);
        const Matrix res_off = add_scaled(multiply(multiply(f, dcp), f), -1.0 / root_q, sc);
        for (uint32_t r = 0; r < q; ++r)
            for (uint32_t cc = 0; cc < q; ++cc) {
                CHECK(res_diag.at(r, cc) == doctest::Approx((root_q - 1.0) / (q * root_q)).epsilon(1e-12));
                CHECK(res_off.at(r, cc) == doctest::Approx(-1.0 / (q * root_q)).epsilon(1e-12));
            }
    }

    CHECK_THROWS_AS(verify_dc_identity(4, 7), std::invalid_argument);
    CHECK_THROWS_AS(verify_dc_identity(6, 0), std::invalid_argument);
}

TEST_CASE("decomposition: orthogonal, four factors, design rows are paired lines") {
    for (uint32_t q : {2u, 4u, 8u}) {
        const auto dec = build_decomposition(q);
        CHECK(dec.circuit.factors.size() == 4);
        CHECK(dec.design_rows.size() == q * q / 2);
        for (uint32_t i = 0; i < q; ++i)
            for (uint32_t r = 0; r < q / 2; ++r)
                CHECK(std::find(dec.design_rows.begin(), dec.design_rows.end(), i * q + r) != dec.design_rows.end());

        const Matrix u = materialize(dec.circuit);
        CHECK(orthogonality_defect(u) < 1e-10);

        const auto match = match_design_rows(u, q, dec.design_rows);
        CHECK(match.all_rows_matched);
        CHECK(match.equipartition_ok);
        CHECK(match.phi_consistent);
        CHECK(match.ok());
        CHECK(match.max_entry_error < 1e-10);
        CHECK(match.phi.size() == q / 2);
    }
}

TEST_CASE("sign extraction reconstructs the decomposition and bridges to the construction") {
    for (uint32_t q : {2u, 4u, 8u}) {
        const auto dec = build_decomposition(q);
        const Matrix u = materialize(dec.circuit);
        const auto a = sign_rows_from_unitary(u);
        CHECK(a.num_rows == q * q);

        // row-scaling the sign matrix reproduces the dense unitary
        Matrix rebuilt(a.num_rows, a.num_cols);
        for (uint32_t r = 0; r < a.num_rows; ++r) {
            const double s = 1.0 / std::sqrt(static_cast<double>(a.rows[r].size()));
            for (const auto& e : a.rows[r]) rebuilt.at(r, e.col) = e.sign * s;
        }
        CHECK(max_abs_diff(rebuilt, u) < 1e-12);

        // the design rows alone form a (2q,4) design with orthogonal rows
        SignedSparseMatrix design;
        design.num_cols = a.num_cols;
        for (uint32_t r : dec.design_rows) design.rows.push_back(a.rows[r]);
        design.num_rows = static_cast<uint32_t>(design.rows.size());
        const auto rep = verify_design(design);
        CHECK(rep.support_size_min == 2 * q);
        CHECK(rep.support_size_max == 2 * q);
        CHECK(rep.max_pairwise_intersection == 4);
        CHECK(rep.orthogonal);
    }
    CHECK_THROWS_AS(build_decomposition(3), std::invalid_argument);
    CHECK_THROWS_AS(build_decomposition(0), std::invalid_argument);
}

TEST_CASE("design rows equal the construction built from the discovered partition") {
    for (uint32_t q : {2u, 4u, 8u}) {
        const uint32_t n = static_cast<uint32_t>(std::countr_zero(q));
        const auto spec = FieldSpec::binary(n);
        const auto dec = build_decomposition(q);
        const auto a = sign_rows_from_unitary(materialize(dec.circuit));

        // independently fit each design row to a signed line pair
        auto on_line = [&](uint32_t av, uint32_t bv, uint32_t x, uint32_t y) {
            return (Element(spec, av) * Element(spec, x) + Element(spec, bv)).value() == y;
        };
        auto fit = [&](const std::vector<uint32_t>& cols) -> std::pair<uint32_t, uint32_t> {
            for (uint32_t av = 0; av < q; ++av)
                for (uint32_t bv = 0; bv < q; ++bv) {
                    bool all = true;
                    for (uint32_t c : cols)
                        if (!on_line(av, bv, c / q, c % q)) {
                            all = false;
                            break;
                        }
                    if (all) return {av, bv};
                }
            REQUIRE(false);
            return {0, 0};
        };

        std::map<uint32_t, uint32_t> phi;  // minus intercept -> plus intercept
        std::map<uint32_t, uint32_t> row_minus;
        for (uint32_t idx : dec.design_rows) {
            std::vector<uint32_t> plus, minus;
            for (const auto& e : a.rows[idx]) (e.sign > 0 ? plus : minus).push_back(e.col);
            const auto [ap, bp] = fit(plus);
            const auto [am, bm] = fit(minus);
            CHECK(ap == am);
            CHECK(ap == idx / q);  // slope is the block-row index
            phi[bm] = bp;
            row_minus[idx] = bm;
        }

        // rebuild the family from the discovered equipartition and compare rows
        construction::PairedLinesParams params{spec, {}, {}};
        for (const auto& [bm, bp] : phi) {
            params.b1.push_back(Element(spec, bm));
            params.b2.push_back(Element(spec, bp));
        }
        const auto rebuilt = construction::build_paired_lines(params);
        for (uint32_t idx : dec.design_rows) {
            const uint32_t slope = idx / q;
            uint32_t bi = 0;
            while (params.b1[bi].value() != row_minus[idx]) ++bi;
            CHECK(rebuilt.rows[slope * (q / 2) + bi] == a.rows[idx]);
        }
    }
}

TEST_CASE("factors are applied right-to-left (non-commuting pair)") {
    // X (phase flip on |1>) and the swap do not commute
    const Factor phase{InputPhase{{1, -1}}};
    const Factor swap{FieldShift{FieldSpec::binary(1), 1}};
    Circuit ps{2, {phase, swap}, 0};  // matrix product phase*swap: swap applied first
    std::vector<double> v{1.0, 0.0};
    apply_circuit(ps, v);
    CHECK(v[0] == 0.0);
    CHECK(v[1] == -1.0);  // swap then phase
    Circuit sp{2, {swap, phase}, 0};
    v = {1.0, 0.0};
    apply_circuit(sp, v);
    CHECK(v[0] == 0.0);
    CHECK(v[1] == 1.0);  // phase (no-op on |0>) then swap
    CHECK(max_abs_diff(materialize(ps), multiply(materialize(phase), materialize(swap))) == 0.0);
}

TEST_CASE("index transpose is the coordinate swap and an involution") {
    const uint32_t q = 4;
    const Matrix t = materialize(Factor{IndexTranspose{q}});
    CHECK(max_abs_diff(multiply(t, t), Matrix::identity(q * q)) == 0.0);
    std::vector<double> v(q * q);
    for (size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
    auto w = v;
    apply_factor(Factor{IndexTranspose{q}}, w);
    for (uint32_t i = 0; i < q; ++i)
        for (uint32_t k = 0; k < q; ++k) CHECK(w[k * q + i] == v[i * q + k]);
}

TEST_CASE("block dispatch lowering: single block degenerates to the block itself") {
    BlockDispatch bd;
    bd.selector_width = 0;
    bd.blocks.push_back(Circuit{2, {Factor{BitHadamard{1}}}, 0});
    const Circuit low = lower_block_dispatch(bd);
    CHECK(low.ancilla_width == 0);
    CHECK(low.dimension == 2);
    REQUIRE(low.factors.size() == 1);
    CHECK(max_abs_diff(materialize(low), materialize(Factor{BitHadamard{1}})) == 0.0);
}

TEST_CASE("block dispatch lowering: M=2 blocks {I, swap} act selector-wise, ancilla restored") {
    BlockDispatch bd;
    bd.selector_width = 1;
    bd.blocks.push_back(Circuit{2, {}, 0});
    bd.blocks.push_back(Circuit{2, {Factor{FieldShift{FieldSpec::binary(1), 1}}}, 0});
    const Circuit low = lower_block_dispatch(bd);
    CHECK(low.dimension == 4);
    CHECK(low.ancilla_width >= 1);

    const Matrix expect = materialize(Factor{bd});
    const uint64_t anc = uint64_t{1} << low.ancilla_width;
    for (uint64_t sel = 0; sel < 2; ++sel)
        for (uint64_t data = 0; data < 2; ++data) {
            std::vector<double> state(low.total_dimension(), 0.0);
            state[(sel * 2 + data) * anc] = 1.0;  // ancilla |0...0>
            apply_circuit(low, state);
            for (uint64_t s2 = 0; s2 < 2; ++s2)
                for (uint64_t d2 = 0; d2 < 2; ++d2)
                    for (uint64_t a2 = 0; a2 < anc; ++a2) {
                        const double got = state[(s2 * 2 + d2) * anc + a2];
                        const double want =
                            (a2 == 0 && s2 == sel) ? expect.at(s2 * 2 + d2, sel * 2 + data) : 0.0;
                        CHECK(got == doctest::Approx(want));
                    }
        }
}

TEST_CASE("block dispatch lowering: mixed four-block dispatch on every basis state") {
    BlockDispatch bd;
    bd.selector_width = 2;
    bd.blocks.push_back(Circuit{2, {Factor{BitHadamard{1}}}, 0});
    bd.blocks.push_back(Circuit{2, {}, 0});
    bd.blocks.push_back(Circuit{2, {Factor{FieldShift{FieldSpec::binary(1), 1}}}, 0});
    bd.blocks.push_back(Circuit{2, {Factor{InputPhase{{1, -1}}}}, 0});
    const Circuit low = lower_block_dispatch(bd);
    const Matrix expect = materialize(Factor{bd});

    const uint64_t anc = uint64_t{1} << low.ancilla_width;
    for (uint64_t col = 0; col < 8; ++col) {
        std::vector<double> state(low.total_dimension(), 0.0);
        state[col * anc] = 1.0;
        apply_circuit(low, state);
        for (uint64_t row = 0; row < 8; ++row)
            for (uint64_t a2 = 0; a2 < anc; ++a2)
                CHECK(state[row * anc + a2] == doctest::Approx(a2 == 0 ? expect.at(row, col) : 0.0));
    }

    const auto cost = cost_report(Circuit{8, {Factor{bd}}, 0}, low);
    CHECK(cost.lowered_factor_count >= cost.factor_count);
    CHECK(cost.ancilla_width == low.ancilla_width);
}

TEST_CASE("block dispatch lowering reproduces the dispatch factor of D, q in {2,4}") {
    for (uint32_t q : {2u, 4u}) {
        const uint32_t n = static_cast<uint32_t>(std::countr_zero(q));
        const auto spec = FieldSpec::binary(n);
        const auto df = build_d_matrix(q, gf::find_generator(spec));
        const auto* bd = std::get_if<BlockDispatch>(&df.lowered.factors[1].op);
        REQUIRE(bd != nullptr);
        const Circuit low = lower_block_dispatch(*bd);
        const Matrix expect = materialize(Factor{*bd});
        const uint64_t dim = q * q;
        const uint64_t anc = uint64_t{1} << low.ancilla_width;
        for (uint64_t col = 0; col < dim; ++col) {
            std::vector<double> state(low.total_dimension(), 0.0);
            state[col * anc] = 1.0;
            apply_circuit(low, state);
            for (uint64_t row = 0; row < dim; ++row) {
                CHECK(std::fabs(state[row * anc] - expect.at(row, col)) < 1e-10);
                for (uint64_t a2 = 1; a2 < anc; ++a2) CHECK(std::fabs(state[row * anc + a2]) < 1e-12);
            }
        }
    }
}

TEST_CASE("lowering rejects ragged blocks; materialize guards dimension") {
    BlockDispatch bd;
    bd.selector_width = 1;
    bd.blocks.push_back(Circuit{2, {}, 0});
    bd.blocks.push_back(Circuit{4, {}, 0});
    CHECK_THROWS_AS(lower_block_dispatch(bd), std::invalid_argument);

    BlockDispatch short_bd;
    short_bd.selector_width = 2;
    short_bd.blocks.push_back(Circuit{2, {}, 0});
    CHECK_THROWS_AS(lower_block_dispatch(short_bd), std::invalid_argument);

    CHECK_THROWS_AS(materialize(Factor{IndexTranspose{256}}), resource_error);
}

TEST_CASE("circuit serialization round-trips") {
    SplitRng rng(5, 5);
    std::vector<Circuit> circuits;
    circuits.push_back(build_decomposition(4).circuit);
    circuits.push_back(build_d_matrix(8, gf::find_generator(FieldSpec::binary(3))).lowered);
    {
        BlockDispatch bd;
        bd.selector_width = 1;
        bd.blocks.push_back(Circuit{2, {}, 0});
        bd.blocks.push_back(Circuit{2, {Factor{FieldShift{FieldSpec::binary(1), 1}}}, 0});
        circuits.push_back(lower_block_dispatch(bd));
    }
    circuits.push_back(Circuit{4, {Factor{InputPhase{{1, -1, -1, 1}}}, Factor{BitHadamard{2}}}, 0});

    for (const auto& c : circuits) {
        const std::string text = serialize(c);
        const Circuit back = parse_circuit(text);
        CHECK(serialize(back) == text);
        CHECK(back.dimension == c.dimension);
        CHECK(back.ancilla_width == c.ancilla_width);
        auto v = random_unit_vector(c.total_dimension(), rng);
        auto w = v;
        apply_circuit(c, v);
        apply_circuit(back, w);
        for (size_t i = 0; i < v.size(); ++i) CHECK(v[i] == w[i]);
    }

    CHECK_THROWS_AS(parse_circuit("circuit v2 2 0 0\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_circuit("circuit v1 2 0 1\nFACTOR ( Unknown 2 )\n"), std::invalid_argument);
}

TEST_CASE("csv export of a dense factor") {
    std::ostringstream out;
    write_csv(out, materialize(Factor{InputPhase{{1, -1}}}));
    CHECK(out.str() == "1,0\n0,-1\n");
}
