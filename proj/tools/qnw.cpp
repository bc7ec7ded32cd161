// Command-line front end: construct / decompose / verify / distinguish / kwise / baseline.
// Reports are JSON envelopes with the full run configuration; identical
// configurations (including --seed) produce byte-identical files.
#include <CLI11.hpp>
#include <bit>
#include <cmath>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>

#include "qnw/analysis.hpp"
#include "qnw/circuit.hpp"
#include "qnw/construction.hpp"
#include "qnw/distributions.hpp"
#include "qnw/errors.hpp"
#include "qnw/reports.hpp"
#include "qnw/rng.hpp"
#include "qnw/sim.hpp"
#include "qnw/sparse.hpp"
#include "qnw/version.hpp"

using namespace qnw;
using reports::Json;

namespace {

constexpr int kExitVerificationFailed = 1;
constexpr int kExitUsage = 2;

struct CommonOpts {
    uint32_t q = 4;
    std::string construction = "paired-lines";
    std::string matrix = "decomposition";
    std::string rows = "design";
    std::string tie = "fair";
    std::string mode = "exact";
    std::string format = "json";
    std::string out;
    std::string dense_csv;
    std::string source = "dam";
    uint64_t trials = 0;
    uint64_t seed = 1;
    uint32_t k = 2;
    uint32_t max_l = 31;
};

void emit(const Json& config, const Json& payload, const std::string& out_path, const std::string& format,
          const std::string& csv_payload = "") {
    const Json env = reports::envelope(config, payload);
    std::cout << env.dump(2) << '\n';
    if (out_path.empty()) return;
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw std::invalid_argument("cannot open output file: " + out_path);
    if (format == "csv" && !csv_payload.empty())
        f << csv_payload;
    else
        f << env.dump(2) << '\n';
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::invalid_argument("cannot open output file: " + path);
    f << text;
}

struct Instance {
    SignedSparseMatrix a;
    std::vector<uint32_t> design_rows;
    circuit::Circuit circ;
};

Instance build_instance(const CommonOpts& o) {
    Instance inst;
    if (o.matrix == "identity") {
        inst.a = SignedSparseMatrix::identity(o.q * o.q);
        for (uint32_t i = 0; i < o.q * o.q; ++i) inst.design_rows.push_back(i);
    } else if (o.matrix == "decomposition") {
        auto dec = circuit::build_decomposition(o.q);
        inst.a = circuit::sign_rows_from_unitary(circuit::materialize(dec.circuit));
        inst.design_rows = dec.design_rows;
        inst.circ = std::move(dec.circuit);
    } else {
        throw std::invalid_argument("unknown --matrix (use decomposition|identity)");
    }
    return inst;
}

std::vector<uint32_t> parse_rows(const std::string& spec, const Instance& inst) {
    if (spec == "design") return inst.design_rows;
    if (spec == "all") {
        std::vector<uint32_t> all(inst.a.num_rows);
        for (uint32_t i = 0; i < inst.a.num_rows; ++i) all[i] = i;
        return all;
    }
    if (spec.rfind("prefix:", 0) == 0) {
        const uint32_t m = static_cast<uint32_t>(std::stoul(spec.substr(7)));
        if (m == 0 || m > inst.a.num_rows) throw std::invalid_argument("prefix length out of range");
        std::vector<uint32_t> pre(m);
        for (uint32_t i = 0; i < m; ++i) pre[i] = i;
        return pre;
    }
    throw std::invalid_argument("unknown --rows (use design|all|prefix:<m>)");
}

int cmd_construct(const CommonOpts& o) {
    SignedSparseMatrix m;
    if (o.construction == "paired-lines")
        m = construction::build_paired_lines(construction::PairedLinesParams::canonical(o.q));
    else if (o.construction == "all-rows")
        m = construction::build_all_rows(construction::AllRowsParams::canonical(o.q));
    else
        throw std::invalid_argument("unknown --construction (use paired-lines|all-rows)");

    const std::string path = o.out.empty() ? o.construction + "-q" + std::to_string(o.q) + ".txt" : o.out;
    std::ostringstream text;
    write_signed_sparse(text, m);
    write_text_file(path, text.str());

    const auto rep = verify_design(m);
    const Json config{{"subcommand", "construct"}, {"q", o.q}, {"construction", o.construction}, {"out", path}};
    Json payload = reports::to_json(rep);
    payload["matrix_file"] = path;
    emit(config, payload, "", o.format);
    return rep.orthogonal ? 0 : kExitVerificationFailed;
}

int cmd_decompose(const CommonOpts& o) {
    const auto dec = circuit::build_decomposition(o.q);
    const std::string path = o.out.empty() ? "decomposition-q" + std::to_string(o.q) + ".txt" : o.out;
    write_text_file(path, circuit::serialize(dec.circuit));

    const Matrix u = circuit::materialize(dec.circuit);
    if (!o.dense_csv.empty()) {
        std::ofstream f(o.dense_csv, std::ios::binary);
        if (!f) throw std::invalid_argument("cannot open output file: " + o.dense_csv);
        write_csv(f, u);
    }
    const double defect = orthogonality_defect(u);
    const auto match = circuit::match_design_rows(u, o.q, dec.design_rows);

    const auto spec = gf::FieldSpec::binary(static_cast<uint32_t>(std::countr_zero(o.q)));
    const auto df = circuit::build_d_matrix(o.q, gf::find_generator(spec));
    const auto* bd = std::get_if<circuit::BlockDispatch>(&df.lowered.factors[1].op);
    const auto cost = circuit::cost_report(dec.circuit, circuit::lower_block_dispatch(*bd));

    const Json config{{"subcommand", "decompose"}, {"q", o.q}, {"out", path}};
    Json payload{{"circuit_file", path},
                 {"orthogonality_defect", defect},
                 {"design_rows", dec.design_rows},
                 {"row_match", reports::to_json(match)},
                 {"d_dispatch_lowering", reports::to_json(cost)}};
    emit(config, payload, "", o.format);
    return (match.ok() && defect < 1e-10) ? 0 : kExitVerificationFailed;
}

int cmd_verify(const CommonOpts& o) {
    const uint32_t q = o.q;
    const uint32_t n = static_cast<uint32_t>(std::countr_zero(q));
    bool ok = true;

    const auto design = verify_design(construction::build_paired_lines(construction::PairedLinesParams::canonical(q)));
    ok = ok && design.orthogonal && design.support_size_min == 2 * q && design.support_size_max == 2 * q &&
         design.max_pairwise_intersection == 4 && design.num_vectors == q * q / 2;

    const auto dec = circuit::build_decomposition(q);
    const Matrix u = circuit::materialize(dec.circuit);
    const double defect = orthogonality_defect(u);
    ok = ok && defect < 1e-10;

    const auto match = circuit::match_design_rows(u, q, dec.design_rows);
    ok = ok && match.ok() && match.max_entry_error < 1e-10;

    double dc_err = 0.0;
    for (uint32_t c = 0; c < q; ++c) {
        const auto rep = circuit::verify_dc_identity(q, c);
        dc_err = std::max({dc_err, rep.max_abs_error_diagonal, rep.max_abs_error_offdiag});
        ok = ok && rep.ok;
    }

    Matrix stage_prod = Matrix::identity(q);
    for (uint32_t i = 1; i <= n; ++i)
        stage_prod = multiply(stage_prod, circuit::materialize(circuit::Factor{circuit::BStage{q, i}}));
    const double b_err = max_abs_diff(circuit::materialize(circuit::Factor{circuit::BMatrix{q}}), stage_prod);
    ok = ok && b_err < 1e-12;

    const auto spec = gf::FieldSpec::binary(n);
    const Matrix f = circuit::materialize(circuit::Factor{circuit::FieldDft{spec}});
    const double f_err = max_abs_diff(multiply(f, f), Matrix::identity(q));
    ok = ok && f_err < 1e-12;

    const auto df = circuit::build_d_matrix(q, gf::find_generator(spec));
    const double d_err = max_abs_diff(circuit::materialize(df.lowered), circuit::materialize(df.d));
    ok = ok && d_err < 1e-10;

    const auto a = circuit::sign_rows_from_unitary(u);
    const auto params = dist::nw_params_from_matrix(a, dec.design_rows);
    const auto nw =
        dist::verify_nw_equivalence(a, dec.design_rows, params, 2000, SplitRng(1, 0), dist::TieRule::FairCoin);
    ok = ok && nw.ok();

    const Json config{{"subcommand", "verify"}, {"q", q}};
    const Json payload{{"ok", ok},
                       {"paired_lines_design", reports::to_json(design)},
                       {"decomposition_orthogonality_defect", defect},
                       {"row_match", reports::to_json(match)},
                       {"dc_identity_max_error", dc_err},
                       {"b_factorization_max_error", b_err},
                       {"f_self_inverse_max_error", f_err},
                       {"d_lowered_form_max_error", d_err},
                       {"nw_equivalence", reports::to_json(nw)}};
    emit(config, payload, o.out, "json");
    return ok ? 0 : kExitVerificationFailed;
}

int cmd_distinguish(const CommonOpts& o) {
    const auto inst = build_instance(o);
    const auto rows = parse_rows(o.rows, inst);
    const uint64_t trials = o.trials ? o.trials : 10000;
    const auto tie = dist::tie_rule_from_string(o.tie);

    const circuit::Circuit* circ = nullptr;
    if (o.mode == "circuit") {
        if (o.matrix != "decomposition")
            throw std::invalid_argument("--mode circuit requires --matrix decomposition");
        circ = &inst.circ;
    } else if (o.mode != "exact") {
        throw std::invalid_argument("unknown --mode (use exact|circuit)");
    }

    const auto rep = analysis::gap_experiment(inst.a, rows, circ, trials, SplitRng(o.seed, 0), tie);

    const Json config{{"subcommand", "distinguish"},
                      {"q", o.q},
                      {"matrix", o.matrix},
                      {"rows", o.rows},
                      {"tie", dist::to_string(tie)},
                      {"mode", rep.mode},
                      {"trials", trials},
                      {"seed", o.seed},
                      {"stream", 0},
                      {"format", o.format},
                      {"out", o.out}};
    std::ostringstream csv;
    csv << "trial,accept_dam,accept_uniform\n";
    csv.precision(17);
    for (uint64_t t = 0; t < trials; ++t)
        csv << t << ',' << rep.per_trial_dam[t] << ',' << rep.per_trial_uniform[t] << '\n';
    emit(config, reports::to_json(rep), o.out, o.format, csv.str());
    return 0;
}

int cmd_kwise(const CommonOpts& o) {
    const auto dec = circuit::build_decomposition(o.q);
    const auto a = circuit::sign_rows_from_unitary(circuit::materialize(dec.circuit));
    const auto params = dist::nw_params_from_matrix(a, dec.design_rows);
    const auto tie = dist::tie_rule_from_string(o.tie);

    const auto rep = o.trials == 0 ? analysis::kwise_epsilon_exact(params, o.k, tie)
                                   : analysis::kwise_epsilon_mc(params, o.k, o.trials, SplitRng(o.seed, 0), tie);

    const Json config{{"subcommand", "kwise"}, {"q", o.q},       {"k", o.k},
                      {"tie", dist::to_string(tie)},             {"trials", o.trials},
                      {"seed", o.seed},        {"stream", 0},        {"out", o.out}};
    emit(config, reports::to_json(rep), o.out, "json");
    return rep.epsilon_measured <= rep.bound_value ? 0 : kExitVerificationFailed;
}

int cmd_sample(const CommonOpts& o) {
    const uint64_t num = o.trials ? o.trials : 100;
    const auto tie = dist::tie_rule_from_string(o.tie);
    const SplitRng root(o.seed, 0);

    std::vector<dist::Sample> samples;
    samples.reserve(num);
    uint32_t two_n = 0;
    if (o.source == "uniform") {
        two_n = 2 * o.q * o.q;
        for (uint64_t t = 0; t < num; ++t) samples.push_back(dist::sample_uniform(two_n, root.derive(t)));
    } else if (o.source == "dam") {
        const auto inst = build_instance(o);
        const auto rows = parse_rows(o.rows, inst);
        two_n = 2 * inst.a.num_cols;
        for (uint64_t t = 0; t < num; ++t) samples.push_back(dist::sample_dam(inst.a, rows, root.derive(t), tie));
    } else {
        throw std::invalid_argument("unknown --source (use dam|uniform)");
    }

    const std::string path = o.out.empty() ? "samples.bits" : o.out;
    {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw std::invalid_argument("cannot open output file: " + path);
        dist::write_packed_samples(f, samples);
    }
    const Json config{{"subcommand", "sample"}, {"q", o.q},     {"source", o.source},
                      {"matrix", o.matrix},     {"rows", o.rows}, {"tie", dist::to_string(tie)},
                      {"trials", num},          {"seed", o.seed}, {"stream", 0},    {"out", path}};
    const Json sidecar = reports::sample_sidecar(static_cast<uint32_t>(num), two_n, config);
    write_text_file(path + ".json", sidecar.dump(2) + "\n");
    emit(config, sidecar, "", "json");
    return 0;
}

int cmd_baseline(const CommonOpts& o) {
    Json table = Json::array();
    std::ostringstream csv;
    csv << "l,probability,advantage,advantage_sqrt_l\n";
    csv.precision(17);
    bool ok = true;
    double prev_adv = 1.0, prev_scaled = 1.0;
    for (uint32_t l = 1; l <= o.max_l; l += 2) {
        const double prob = analysis::baseline_first_bit(l);
        const double adv = prob - 0.5;
        const double scaled = adv * std::sqrt(static_cast<double>(l));
        table.push_back(Json{{"l", l}, {"probability", prob}, {"advantage", adv}, {"advantage_sqrt_l", scaled}});
        csv << l << ',' << prob << ',' << adv << ',' << scaled << '\n';
        ok = ok && adv > 0.0 && scaled <= 0.5 && (l == 1 || (adv < prev_adv && scaled < prev_scaled));
        prev_adv = adv;
        prev_scaled = scaled;
    }
    const Json config{{"subcommand", "baseline"}, {"max_l", o.max_l}, {"format", o.format}, {"out", o.out}};
    emit(config, Json{{"ok", ok}, {"table", table}}, o.out, o.format, csv.str());
    return ok ? 0 : kExitVerificationFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"workbench for line-pair unitaries, their circuits, and NW-majority distributions"};
    app.set_version_flag("--version", version_string());
    app.require_subcommand(1);

    CommonOpts o;
    auto add_common = [&](CLI::App* sub, bool with_seed = true) {
        sub->add_option("--q", o.q, "field size / problem parameter");
        sub->add_option("--out", o.out, "output file path");
        sub->add_option("--format", o.format, "report file format (json|csv)")
            ->check(CLI::IsMember({"json", "csv"}));
        if (with_seed) sub->add_option("--seed", o.seed, "root seed (recorded in the report)");
    };

    auto* construct = app.add_subcommand("construct", "emit a sparse matrix and its design report");
    add_common(construct, false);
    construct->add_option("--construction", o.construction, "paired-lines|all-rows");

    auto* decompose = app.add_subcommand("decompose", "emit the circuit and verify its design rows");
    add_common(decompose, false);
    decompose->add_option("--dense-csv", o.dense_csv, "also export the materialized matrix as CSV");

    auto* verify = app.add_subcommand("verify", "all identity checks for a given q");
    add_common(verify, false);

    auto* distinguish = app.add_subcommand("distinguish", "acceptance-gap experiment");
    add_common(distinguish);
    distinguish->add_option("--matrix", o.matrix, "decomposition|identity");
    distinguish->add_option("--rows", o.rows, "design|all|prefix:<m>");
    distinguish->add_option("--tie", o.tie, "fair|plus");
    distinguish->add_option("--trials", o.trials, "number of trials (default 10000)");
    distinguish->add_option("--mode", o.mode, "exact|circuit");

    auto* kwise = app.add_subcommand("kwise", "almost k-wise independence report");
    add_common(kwise);
    kwise->add_option("--k", o.k, "marginal order k (1..4)");
    kwise->add_option("--tie", o.tie, "fair|plus");
    kwise->add_option("--trials", o.trials, "Monte Carlo trials (omit for exhaustive)");

    auto* sample = app.add_subcommand("sample", "export packed sample batches with a JSON sidecar");
    add_common(sample);
    sample->add_option("--source", o.source, "dam|uniform");
    sample->add_option("--matrix", o.matrix, "decomposition|identity");
    sample->add_option("--rows", o.rows, "design|all|prefix:<m>");
    sample->add_option("--tie", o.tie, "fair|plus");
    sample->add_option("--trials", o.trials, "number of samples (default 100)");

    auto* baseline = app.add_subcommand("baseline", "first-bit baseline table");
    add_common(baseline, false);
    baseline->add_option("--max-l", o.max_l, "largest odd l in the table");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (construct->parsed()) return cmd_construct(o);
        if (decompose->parsed()) return cmd_decompose(o);
        if (verify->parsed()) return cmd_verify(o);
        if (distinguish->parsed()) return cmd_distinguish(o);
        if (kwise->parsed()) return cmd_kwise(o);
        if (sample->parsed()) return cmd_sample(o);
        if (baseline->parsed()) return cmd_baseline(o);
    } catch (const resource_error& e) {
        std::cerr << "resource guard: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitVerificationFailed;
    }
    return kExitUsage;
}
