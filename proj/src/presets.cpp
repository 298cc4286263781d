#include "asclt/experiments.hpp"

namespace asclt::presets {

using experiments::json;

namespace {

json doubling_cos() {
    return json{{"type", "fourier"}, {"coeffs", {{1, 1.0}}}};
}

json sqrt_renorm() {
    return json{{"d", 0.5}, {"L", {{"kind", "constant"}, {"value", 1.0}}}};
}

std::vector<std::pair<std::string, json>> build() {
    std::vector<std::pair<std::string, json>> presets;

    presets.emplace_back("c01_stable_iid_clt", json{
        {"name", "c01_stable_iid_clt"},
        {"kind", "StableLimit"},
        {"iid", {{"type", "pareto"}, {"p", 1.5}, {"c1", 1.0}, {"c2", 0.0}, {"centered", true}}},
        {"renorm", {{"d", 2.0 / 3.0}, {"L", {{"kind", "constant"}, {"value", 1.0}}}}},
        {"law", {{"type", "from_tails"}, {"p", 1.5}, {"c1", 1.0}, {"c2", 0.0}}},
        {"n", 10000},
        {"replicas", 10000},
        {"base_seed", 20260801},
        {"assert", {{"ks_max", 0.03}}}});

    presets.emplace_back("c02_stable_iid_asclt", json{
        {"name", "c02_stable_iid_asclt"},
        {"kind", "ASCLT"},
        {"iid", {{"type", "pareto"}, {"p", 1.5}, {"c1", 1.0}, {"c2", 0.0}, {"centered", true}}},
        {"renorm", {{"d", 2.0 / 3.0}, {"L", {{"kind", "constant"}, {"value", 1.0}}}}},
        {"law", {{"type", "from_tails"}, {"p", 1.5}, {"c1", 1.0}, {"c2", 0.0}}},
        {"N", 1000000},
        {"seeds", 50},
        {"checkpoints", {10000, 1000000}},
        {"base_seed", 20260802},
        {"assert", {{"ks_median_max", 0.25}, {"median_decreases", true}}}});

    presets.emplace_back("c03a_gm_clt", json{
        {"name", "c03a_gm_clt"},
        {"kind", "ClassicalCLT"},
        {"system", {{"type", "doubling"}}},
        {"observable", doubling_cos()},
        {"renorm", sqrt_renorm()},
        {"law", {{"type", "gaussian"}, {"sigma2", 0.5}}},
        {"n", 16384},
        {"replicas", 10000},
        {"base_seed", 20260803},
        {"assert", {{"ks_max", 0.03}}}});

    presets.emplace_back("c03b_gm_asclt", json{
        {"name", "c03b_gm_asclt"},
        {"kind", "ASCLT"},
        {"system", {{"type", "doubling"}}},
        {"observable", doubling_cos()},
        {"renorm", sqrt_renorm()},
        {"law", {{"type", "gaussian"}, {"sigma2", 0.5}}},
        {"N", 1000000},
        {"seeds", 50},
        {"checkpoints", {10000, 100000, 1000000}},
        {"base_seed", 20260804},
        {"assert",
         {{"ks_median_max", 0.25},
          {"median_decreases", true},
          {"decrease_fraction_min", 0.6}}}});

    presets.emplace_back("c04a_tight_maxima_gordin", json{
        {"name", "c04a_tight_maxima_gordin"},
        {"kind", "TightMaxima"},
        {"source", "gordin_h"},
        {"observable", {{"type", "fourier"}, {"coeffs", {{1, 1.0}, {2, 1.0}}}}},
        {"renorm", sqrt_renorm()},
        {"n_max", 1000000},
        {"replicas", 2000},
        {"c_grid", {10.0}},
        {"base_seed", 20260805},
        {"assert", {{"c_ref", 10.0}, {"p_max", 0.02}}}});

    presets.emplace_back("c04b_tight_maxima_cauchy", json{
        {"name", "c04b_tight_maxima_cauchy"},
        {"kind", "TightMaxima"},
        {"source", "iid_cauchy"},
        {"renorm", sqrt_renorm()},
        {"n_max", 1000000},
        {"replicas", 2000},
        {"c_grid", {10.0}},
        {"base_seed", 20260806},
        {"assert", {{"c_ref", 10.0}, {"grows_with_n", true}}}});

    presets.emplace_back("c05a_kac_right_half", json{
        {"name", "c05a_kac_right_half"},
        {"kind", "Inducing"},
        {"mode", "kac"},
        {"system", {{"type", "doubling"}}},
        {"return_set", {{"type", "dyadic"}, {"level", 1}, {"cells", {1}}}},
        {"n_returns", 1000000},
        {"base_seed", 20260807},
        {"assert", {{"return_law_abs_tol", 0.01}}}});

    presets.emplace_back("c05b_kac_first_quarter", json{
        {"name", "c05b_kac_first_quarter"},
        {"kind", "Inducing"},
        {"mode", "kac"},
        {"system", {{"type", "doubling"}}},
        {"return_set", {{"type", "dyadic"}, {"level", 2}, {"cells", {0}}}},
        {"n_returns", 1000000},
        {"base_seed", 20260808},
        {"assert", json::object()}});

    presets.emplace_back("c06a_inducing_lift", json{
        {"name", "c06a_inducing_lift"},
        {"kind", "Inducing"},
        {"mode", "lift"},
        {"system", {{"type", "doubling"}}},
        {"return_set", {{"type", "dyadic"}, {"level", 1}, {"cells", {1}}}},
        {"observable", doubling_cos()},
        {"renorm", sqrt_renorm()},
        {"law", {{"type", "gaussian"}, {"sigma2", 0.5}}},
        {"n", 16384},
        {"replicas", 10000},
        {"c_grid", {2.0, 10.0}},
        {"base_seed", 20260809},
        {"assert", {{"ks_max", 0.03}}}});

    presets.emplace_back("c06b_asclt_lift", json{
        {"name", "c06b_asclt_lift"},
        {"kind", "ASCLTInducing"},
        {"system", {{"type", "doubling"}}},
        {"return_set", {{"type", "dyadic"}, {"level", 1}, {"cells", {1}}}},
        {"observable", doubling_cos()},
        {"renorm", sqrt_renorm()},
        {"law", {{"type", "gaussian"}, {"sigma2", 0.5}}},
        {"N", 1000000},
        {"seeds", 50},
        {"base_seed", 20260810},
        {"assert", {{"ks_median_max", 0.25}}}});

    // centered Holder observable on the intermittent map; the centering
    // constant is the invariant mean of |x - 1/3|^0.6 from a 8e9-step pilot
    const json lsv_holder = {{"type", "holder"},
                             {"gamma", 0.6},
                             {"anchors", {{1.0, 1.0 / 3.0}}},
                             {"offset", -0.42361433}};
    presets.emplace_back("c07a_lsv_clt", json{
        {"name", "c07a_lsv_clt"},
        {"kind", "ClassicalCLT"},
        {"system", {{"type", "lsv"}, {"alpha", 0.3}}},
        {"observable", lsv_holder},
        {"renorm", sqrt_renorm()},
        {"law", {{"type", "gaussian"}, {"sigma2", 1.0}}},
        {"n", 65536},
        {"replicas", 5000},
        {"standardize", true},
        {"base_seed", 20260811},
        {"assert", {{"ks_max", 0.05}}}});

    presets.emplace_back("c07b_lsv_asclt", json{
        {"name", "c07b_lsv_asclt"},
        {"kind", "ASCLT"},
        {"system", {{"type", "lsv"}, {"alpha", 0.3}}},
        {"observable", lsv_holder},
        {"renorm", sqrt_renorm()},
        {"law", {{"type", "gaussian"}, {"sigma2", 1.0}}},
        {"scale", "batch_means"},
        {"N", 1000000},
        {"seeds", 30},
        {"checkpoints", {10000, 1000000}},
        {"base_seed", 20260812},
        {"assert", {{"ks_median_max", 0.25}}}});

    presets.emplace_back("c08a_eigen_convergence_coin", json{
        {"name", "c08a_eigen_convergence_coin"},
        {"kind", "EigenConvergence"},
        {"system", {{"type", "bernoulli"}, {"probs", {0.5, 0.5}}}},
        {"observable", {{"type", "locally_constant"}, {"values", {1.0, -1.0}}}},
        {"grid", 2},
        {"renorm", sqrt_renorm()},
        {"law", {{"type", "gaussian"}, {"sigma2", 1.0}}},
        {"t_list", {0.5, 1.0, 2.0}},
        {"n_grid", {10000}},
        {"curve_t_max", 0.5},
        {"curve_points", 25},
        {"base_seed", 20260813},
        {"assert", {{"gap_max", 1e-3}}}});

    presets.emplace_back("c08b_eigen_convergence_doubling", json{
        {"name", "c08b_eigen_convergence_doubling"},
        {"kind", "EigenConvergence"},
        {"system", {{"type", "doubling"}}},
        {"observable", doubling_cos()},
        {"grid", 4096},
        {"renorm", sqrt_renorm()},
        {"law", {{"type", "gaussian"}, {"sigma2", 0.5}}},
        {"t_list", {1.0}},
        {"n_grid", {10000}},
        {"curve_t_max", 0.4},
        {"curve_points", 10},
        {"base_seed", 20260814},
        {"assert", {{"gap_max", 0.02}}}});

    presets.emplace_back("c09a_charfn_residual_coin", json{
        {"name", "c09a_charfn_residual_coin"},
        {"kind", "Spectral"},
        {"mode", "charfn_residual"},
        {"system", {{"type", "bernoulli"}, {"probs", {0.5, 0.5}}}},
        {"observable", {{"type", "locally_constant"}, {"values", {1.0, -1.0}}}},
        {"grid", 2},
        {"t", 0.8},
        {"n", 50},
        {"replicas", 20000},
        {"base_seed", 20260815},
        {"assert", {{"bias_allowance", 0.0}}}});

    presets.emplace_back("c09b_charfn_residual_doubling", json{
        {"name", "c09b_charfn_residual_doubling"},
        {"kind", "Spectral"},
        {"mode", "charfn_residual"},
        {"system", {{"type", "doubling"}}},
        {"observable", doubling_cos()},
        {"grid", 4096},
        {"t", 0.5},
        {"n", 50},
        {"replicas", 100000},
        {"base_seed", 20260816},
        {"assert", {{"bias_allowance", 0.01}}}});

    presets.emplace_back("c10_gordin", json{
        {"name", "c10_gordin"},
        {"kind", "Gordin"},
        {"system", {{"type", "doubling"}}},
        {"observable", {{"type", "fourier"}, {"coeffs", {{1, 1.0}, {2, 1.0}}}}},
        {"grid", 4096},
        {"expected_g", {{1, 1.0}}},
        {"expected_h", {{1, 2.0}}},
        {"base_seed", 20260817},
        {"assert",
         {{"coeff_abs_tol", 1e-12},
          {"transfer_sup_max", 1e-10},
          {"identity_residual_max", 1e-12},
          {"h2_expected", 2.0}}}});

    presets.emplace_back("c11a_reverse_md_iid", json{
        {"name", "c11a_reverse_md_iid"},
        {"kind", "ReverseMDASCLT"},
        {"stream", {{"type", "iid_gaussian"}, {"sigma2", 1.0}}},
        {"N", 1000000},
        {"seeds", 50},
        {"base_seed", 20260818},
        {"assert", {{"ks_median_max", 0.25}, {"qv_rel_tol", 0.05}, {"trend_fraction_min", 0.9}}}});

    presets.emplace_back("c11b_reverse_md_dynamical", json{
        {"name", "c11b_reverse_md_dynamical"},
        {"kind", "ReverseMDASCLT"},
        {"stream", {{"type", "dynamical_h"}, {"h_coeffs", {{1, 2.0}}}}},
        {"N", 1000000},
        {"seeds", 50},
        {"base_seed", 20260819},
        {"assert", {{"ks_median_max", 0.25}, {"qv_rel_tol", 0.05}, {"trend_fraction_min", 0.9}}}});

    presets.emplace_back("c12_weighted_log_avg", json{
        {"name", "c12_weighted_log_avg"},
        {"kind", "WeightedLogAvg"},
        {"system", {{"type", "doubling"}}},
        {"observable", doubling_cos()},
        {"phi", {{"type", "locally_constant"}, {"values", {2.0, 0.0}}}},
        {"renorm", sqrt_renorm()},
        {"N", 1000000},
        {"seeds", 30},
        {"base_seed", 20260820},
        {"assert", {{"suite_gap_median_max", 0.07}, {"rescale_diff_max", 0.035}}}});

    presets.emplace_back("c13_random_index", json{
        {"name", "c13_random_index"},
        {"kind", "RandomIndex"},
        {"system", {{"type", "doubling"}}},
        {"observable", doubling_cos()},
        {"index_observable", doubling_cos()},
        {"renorm", sqrt_renorm()},
        {"law", {{"type", "gaussian"}, {"sigma2", 0.5}}},
        {"n", 16384},
        {"replicas", 10000},
        {"base_seed", 20260821},
        {"assert", {{"ks_max", 0.03}, {"two_sample_ks_max", 0.02}}}});

    // tiny smoke preset: zero observable gives the point mass at 0
    presets.emplace_back("smoke_asclt_zero", json{
        {"name", "smoke_asclt_zero"},
        {"kind", "ASCLT"},
        {"system", {{"type", "doubling"}}},
        {"observable", {{"type", "zero"}}},
        {"renorm", sqrt_renorm()},
        {"law", {{"type", "dirac0"}}},
        {"N", 2000},
        {"seeds", 2},
        {"checkpoints", {1000, 2000}},
        {"export_measure", true},
        {"base_seed", 20260822},
        {"assert", {{"ks_median_max", 1e-9}}}});

    return presets;
}

}  // namespace

std::vector<std::pair<std::string, json>> all() { return build(); }

json by_name(const std::string& name) {
    for (auto& [preset_name, cfg] : build())
        if (preset_name == name) return cfg;
    throw std::out_of_range("unknown preset '" + name + "'");
}

}  // namespace asclt::presets
