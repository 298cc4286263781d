// Acceptance suite: runs the preset bundle(s) behind one numbered criterion
// and prints a pass/fail line per assertion.  Usage: acceptance [k] with
// k in 1..13; no argument runs everything.

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "asclt/experiments.hpp"
#include "asclt/parallel.hpp"

namespace {

const std::vector<std::vector<std::string>>& criterion_presets() {
    static const std::vector<std::vector<std::string>> table = {
        {"c01_stable_iid_clt"},
        {"c02_stable_iid_asclt"},
        {"c03a_gm_clt", "c03b_gm_asclt"},
        {"c04a_tight_maxima_gordin", "c04b_tight_maxima_cauchy"},
        {"c05a_kac_right_half", "c05b_kac_first_quarter"},
        {"c06a_inducing_lift", "c06b_asclt_lift"},
        {"c07a_lsv_clt", "c07b_lsv_asclt"},
        {"c08a_eigen_convergence_coin", "c08b_eigen_convergence_doubling"},
        {"c09a_charfn_residual_coin", "c09b_charfn_residual_doubling"},
        {"c10_gordin"},
        {"c11a_reverse_md_iid", "c11b_reverse_md_dynamical"},
        {"c12_weighted_log_avg"},
        {"c13_random_index"},
    };
    return table;
}

bool run_criterion(int k) {
    bool pass = true;
    for (const auto& name : criterion_presets()[static_cast<std::size_t>(k - 1)]) {
        const auto result = asclt::experiments::run_experiment(
            asclt::presets::by_name(name), asclt::default_threads());
        for (const auto& a : result.assertions) {
            std::printf("  %s  %s: %s = %.6g (%s %.6g)\n", a.pass ? "pass" : "FAIL",
                        name.c_str(), a.statistic.c_str(), a.value, a.relation.c_str(),
                        a.tolerance);
            pass = pass && a.pass;
        }
        std::printf("  [%s ran in %.1f s]\n", name.c_str(), result.runtime_seconds);
    }
    std::printf("criterion %02d: %s\n", k, pass ? "PASS" : "FAIL");
    std::fflush(stdout);
    return pass;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc > 1) {
        const int k = std::atoi(argv[1]);
        if (k < 1 || k > 13) {
            std::fprintf(stderr, "usage: acceptance [1..13]\n");
            return 2;
        }
        return run_criterion(k) ? 0 : 1;
    }
    bool all = true;
    for (int k = 1; k <= 13; ++k) all = run_criterion(k) && all;
    return all ? 0 : 1;
}
