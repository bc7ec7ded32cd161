#pragma once

#include <json.hpp>

#include "qnw/analysis.hpp"
#include "qnw/circuit.hpp"
#include "qnw/distributions.hpp"
#include "qnw/sparse.hpp"
#include "qnw/version.hpp"

namespace qnw::reports {

using Json = nlohmann::ordered_json;

inline Json to_json(const DesignReport& r) {
    return Json{{"num_vectors", r.num_vectors},
                {"universe_size", r.universe_size},
                {"support_size_min", r.support_size_min},
                {"support_size_max", r.support_size_max},
                {"max_pairwise_intersection", r.max_pairwise_intersection},
                {"orthogonal", r.orthogonal}};
}

inline Json to_json(const circuit::DcIdentityReport& r) {
    return Json{{"ok", r.ok},
                {"max_abs_error_diagonal", r.max_abs_error_diagonal},
                {"max_abs_error_offdiag", r.max_abs_error_offdiag}};
}

inline Json to_json(const circuit::RowMatchReport& r) {
    Json phi = Json::array();
    for (const auto& [bm, bp] : r.phi) phi.push_back(Json::array({bm, bp}));
    return Json{{"all_rows_matched", r.all_rows_matched}, {"equipartition_ok", r.equipartition_ok},
                {"phi_consistent", r.phi_consistent},     {"ok", r.ok()},
                {"max_entry_error", r.max_entry_error},   {"realized_phi", phi}};
}

inline Json to_json(const circuit::GateCostReport& r) {
    return Json{{"factor_count", r.factor_count},
                {"lowered_factor_count", r.lowered_factor_count},
                {"ancilla_width", r.ancilla_width}};
}

inline Json to_json(const analysis::KWiseReport& r) {
    return Json{{"k", r.k},
                {"epsilon_measured", r.epsilon_measured},
                {"bound_value", r.bound_value},
                {"bound_constant", analysis::kKWiseBoundConstant},
                {"ell", r.ell},
                {"p", r.p},
                {"worst_indices", r.worst_indices},
                {"worst_assignment", r.worst_assignment},
                {"worst_probability", r.worst_probability},
                {"method", r.method},
                {"trials", r.trials}};
}

inline Json to_json(const analysis::GapReport& r) {
    return Json{{"accept_mean_dam", r.accept_mean_dam},
                {"accept_mean_uniform", r.accept_mean_uniform},
                {"gap", r.gap()},
                {"halfwidth95_dam", r.halfwidth_dam},
                {"halfwidth95_uniform", r.halfwidth_uniform},
                {"trials", r.trials},
                {"tie_rule", r.tie_rule},
                {"mode", r.mode},
                {"num_deterministic_rows", r.num_deterministic_rows}};
}

inline Json to_json(const dist::NwEquivalenceReport& r) {
    return Json{{"ok", r.ok()},
                {"trials", r.trials},
                {"deterministic_ok", r.deterministic_ok},
                {"deterministic_mismatches", r.deterministic_mismatches},
                {"free_ok", r.free_ok},
                {"max_abs_free_mean", r.max_abs_free_mean},
                {"four_sigma", r.four_sigma},
                {"ell", r.ell},
                {"p", r.p},
                {"num_sets", r.num_sets}};
}

/// Sidecar for a packed-bit sample file (see docs/formats.md).
inline Json sample_sidecar(uint32_t num_samples, uint32_t bits_per_sample, const Json& config) {
    return Json{{"format", "packed-bits v1"},
                {"num_samples", num_samples},
                {"bits_per_sample", bits_per_sample},
                {"bytes_per_sample", (bits_per_sample + 7) / 8},
                {"bit_convention", "+1 -> 1, LSB-first within bytes, each sample padded to a byte boundary"},
                {"config", config}};
}

/// Wraps a payload with the artifact version and the full run configuration,
/// so identical configurations produce byte-identical report files.
inline Json envelope(const Json& config, const Json& payload) {
    return Json{{"artifact", version_string()}, {"config", config}, {"report", payload}};
}

}  // namespace qnw::reports
