#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "qnw/circuit.hpp"
#include "qnw/construction.hpp"
#include "qnw/distributions.hpp"
#include "qnw/rng.hpp"

using namespace qnw;
using namespace qnw::dist;

TEST_CASE("rng: frozen golden values, random access, derivation") {
    SplitRng r(42, 0);
    CHECK(r.key() == 0x4b8ab842bcd2743dull);
    CHECK(r.word(0) == 0x43e852cadb87d2e1ull);
    CHECK(r.word(1) == 0x92ed6a61819ba444ull);
    CHECK(r.word(2) == 0x785eca826a2e2d29ull);
    CHECK(r.word(3) == 0xd51d5e07dc068f4bull);
    CHECK(r.derive(7).word(0) == 0x203f3adf7d8ec4c1ull);
    CHECK(SplitRng(42, 1).key() == 0xbc7c2918443fbd58ull);

    // sequential next() is counter-indexed word()
    SplitRng s(42, 0);
    for (uint64_t i = 0; i < 8; ++i) CHECK(s.next() == r.word(i));

    // signs are near-balanced
    int plus = 0;
    for (uint64_t i = 0; i < 10000; ++i) plus += r.sign_at(i) > 0;
    CHECK(plus == 5050);  // frozen: 0.505 of 1e4
}

TEST_CASE("uniform samples have the right length, alphabet, and determinism") {
    SplitRng root(9, 0);
    const auto s1 = sample_uniform(32, root.derive(0));
    const auto s2 = sample_uniform(32, root.derive(0));
    CHECK(s1.bits.size() == 32);
    CHECK(s1.bits == s2.bits);
    for (int8_t b : s1.bits) CHECK((b == 1 || b == -1));
    CHECK(s1.source == SampleSource::Uniform);
}

TEST_CASE("paired-lines rows are balanced, so all-equal x forces the tie rule") {
    const auto m = construction::build_paired_lines(construction::PairedLinesParams::canonical(4));
    for (const auto& row : m.rows) {
        long long sum = 0;
        for (const auto& e : row) sum += e.sign;
        CHECK(sum == 0);  // q entries -1, q entries +1
    }

    // single +1/-1 row: tie iff x0 == x1; find such a trial and check both rules
    SignedSparseMatrix a;
    a.num_rows = a.num_cols = 2;
    a.rows = {{SignedEntry{0, 1}, SignedEntry{1, -1}}, {SignedEntry{0, 1}, SignedEntry{1, 1}}};
    SplitRng root(31, 2);
    bool found_tie = false;
    for (uint64_t t = 0; t < 64 && !found_tie; ++t) {
        const SplitRng trial = root.derive(t);
        const auto s = sample_dam(a, {0}, trial, TieRule::FairCoin);
        if (s.bits[0] == s.bits[1]) {
            found_tie = true;
            CHECK(s.bits[2] == trial.derive(kTagTie).sign_at(0));
            const auto sp = sample_dam(a, {0}, trial, TieRule::ConstantPlus);
            CHECK(sp.bits[2] == 1);
        } else {
            CHECK(s.bits[2] == (s.bits[0] - s.bits[1] > 0 ? 1 : -1));
        }
    }
    CHECK(found_tie);
}

TEST_CASE("dam coordinates: deterministic rows near-unbiased, free rows near-zero mean") {
    const auto dec = circuit::build_decomposition(4);
    const auto a = circuit::sign_rows_from_unitary(circuit::materialize(dec.circuit));
    const auto& r = dec.design_rows;
    SplitRng root(77, 0);
    const uint64_t trials = 4000;
    std::vector<double> mean(16, 0.0);
    for (uint64_t t = 0; t < trials; ++t) {
        const auto s = sample_dam(a, r, root.derive(t), TieRule::FairCoin);
        REQUIRE(s.bits.size() == 32);  // 2N
        for (int8_t b : s.bits) REQUIRE((b == 1 || b == -1));
        for (uint32_t i = 0; i < 16; ++i) mean[i] += s.bits[16 + i] / static_cast<double>(trials);
    }
    const double four_sigma = 4.0 / std::sqrt(static_cast<double>(trials));
    for (uint32_t i = 0; i < 16; ++i) CHECK(std::fabs(mean[i]) <= four_sigma);
}

TEST_CASE("nw_evaluate: majority of one is the (possibly negated) selected bit") {
    NWParams p;
    p.universe_size = 3;
    p.sets = {{0}, {2}};
    p.patterns = {{1}, {-1}};
    SplitRng ties(1, 1);
    const auto out = nw_evaluate(p, {1, -1, -1}, TieRule::FairCoin, ties);
    CHECK(out == std::vector<int8_t>{1, 1});

    NWParams allpos;
    allpos.universe_size = 3;
    allpos.sets = {{0, 1, 2}};
    allpos.patterns = {{1, 1, 1}};
    CHECK(nw_evaluate(allpos, {1, 1, 1}, TieRule::FairCoin, ties) == std::vector<int8_t>{1});
}

TEST_CASE("nw output equals the dam coordinates functionally, 1000 shared seeds at q=4") {
    const auto dec = circuit::build_decomposition(4);
    const auto a = circuit::sign_rows_from_unitary(circuit::materialize(dec.circuit));
    const auto params = nw_params_from_matrix(a, dec.design_rows);
    CHECK(params.set_size() == 8);          // 2q
    CHECK(params.max_intersection() == 4);  // p
    CHECK(params.sets.size() == 8);         // m = N/2

    SplitRng root(123, 9);
    for (uint64_t t = 0; t < 1000; ++t) {
        const SplitRng trial = root.derive(t);
        const auto s = sample_dam(a, dec.design_rows, trial, TieRule::FairCoin);
        const std::vector<int8_t> x(s.bits.begin(), s.bits.begin() + 16);
        const auto nw = nw_evaluate(params, x, TieRule::FairCoin, trial.derive(kTagTie));
        for (size_t j = 0; j < dec.design_rows.size(); ++j) CHECK(s.bits[16 + dec.design_rows[j]] == nw[j]);
    }
}

TEST_CASE("verify_nw_equivalence at q=4 with 10^4 trials") {
    const auto dec = circuit::build_decomposition(4);
    const auto a = circuit::sign_rows_from_unitary(circuit::materialize(dec.circuit));
    const auto params = nw_params_from_matrix(a, dec.design_rows);
    const auto rep = verify_nw_equivalence(a, dec.design_rows, params, 10000, SplitRng(2026, 4), TieRule::FairCoin);
    CHECK(rep.deterministic_ok);
    CHECK(rep.deterministic_mismatches == 0);
    CHECK(rep.free_ok);
    CHECK(rep.max_abs_free_mean <= rep.four_sigma);
    CHECK(rep.ell == 8);
    CHECK(rep.p == 4);
    CHECK(rep.num_sets == 8);
    CHECK(rep.ok());

    // params must actually describe the rows
    auto wrong = params;
    wrong.patterns[0][0] = static_cast<int8_t>(-wrong.patterns[0][0]);
    CHECK_THROWS_AS(verify_nw_equivalence(a, dec.design_rows, wrong, 10, SplitRng(1, 1), TieRule::FairCoin),
                    std::invalid_argument);
}

TEST_CASE("canonical permutation places the deterministic rows first") {
    const auto perm = canonical_row_permutation(6, {4, 1});
    CHECK(perm == std::vector<uint32_t>{1, 4, 0, 2, 3, 5});
    CHECK_THROWS_AS(canonical_row_permutation(3, {7}), std::invalid_argument);
}

TEST_CASE("sampler usage errors") {
    const auto id = SignedSparseMatrix::identity(4);
    SplitRng root(5, 5);
    CHECK_THROWS_AS(sample_dam(id, {}, root, TieRule::FairCoin), std::invalid_argument);
    CHECK_THROWS_AS(sample_dam(id, {9}, root, TieRule::FairCoin), std::invalid_argument);
    CHECK_THROWS_AS(sample_dam(id, {1, 1}, root, TieRule::FairCoin), std::invalid_argument);

    SignedSparseMatrix empty_row;
    empty_row.num_rows = empty_row.num_cols = 2;
    empty_row.rows = {{SignedEntry{0, 1}}, {}};
    CHECK_THROWS_AS(sample_dam(empty_row, {1}, root, TieRule::FairCoin), std::invalid_argument);

    NWParams uneven;
    uneven.universe_size = 4;
    uneven.sets = {{0, 1}, {2}};
    uneven.patterns = {{1, 1}, {1}};
    CHECK_THROWS_AS(uneven.validate(), std::invalid_argument);
}

TEST_CASE("packed bit export: layout and round trip") {
    Sample s1, s2;
    s1.bits = {1, -1, 1, 1, -1, -1, -1, 1, 1, 1};   // 10 bits -> 2 bytes
    s2.bits = {-1, -1, -1, -1, -1, -1, -1, -1, 1, -1};
    std::stringstream ss;
    write_packed_samples(ss, {s1, s2});
    const std::string raw = ss.str();
    REQUIRE(raw.size() == 4);
    // +1 <-> 1, LSB-first: s1 bits 0,2,3,7 set -> 0b10001101
    CHECK(static_cast<unsigned char>(raw[0]) == 0b10001101);
    CHECK(static_cast<unsigned char>(raw[1]) == 0b00000011);
    CHECK(static_cast<unsigned char>(raw[2]) == 0b00000000);
    CHECK(static_cast<unsigned char>(raw[3]) == 0b00000001);

    ss.seekg(0);
    const auto back = read_packed_samples(ss, 10, 2);
    CHECK(back[0] == s1.bits);
    CHECK(back[1] == s2.bits);
}

TEST_CASE("tie rule names round-trip") {
    CHECK(tie_rule_from_string("fair") == TieRule::FairCoin);
    CHECK(tie_rule_from_string("plus") == TieRule::ConstantPlus);
    CHECK(std::string(to_string(TieRule::FairCoin)) == "fair-coin");
    CHECK_THROWS_AS(tie_rule_from_string("maybe"), std::invalid_argument);
}
