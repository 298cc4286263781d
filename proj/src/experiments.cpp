#include "asclt/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <fstream>
#include <iostream>
#include <sstream>

#include "asclt/asmeasure.hpp"
#include "asclt/inducing.hpp"
#include "asclt/martingale.hpp"
#include "asclt/orbits.hpp"
#include "asclt/parallel.hpp"
#include "asclt/spectral.hpp"
#include "asclt/stats.hpp"

namespace asclt::experiments {

namespace {

using config::ConfigError;

void push_assert(RunResult& out, const std::string& stat, double value, double tol,
                 const std::string& rel = "<=") {
    Assertion a;
    a.statistic = stat;
    a.value = value;
    a.tolerance = tol;
    a.relation = rel;
    a.pass = rel == "<=" ? value <= tol : (rel == ">=" ? value >= tol : value < tol);
    out.assertions.push_back(a);
}

/// Draw-by-draw source: either f along a system orbit or an i.i.d. sampler.
class SampleSource {
public:
    explicit SampleSource(const json& cfg) {
        if (cfg.contains("iid")) {
            const auto& iid = cfg.at("iid");
            const std::string type = iid.value("type", "");
            if (type == "pareto") {
                iid_kind_ = IidKind::Pareto;
                p_ = iid.at("p").get<double>();
                c1_ = iid.at("c1").get<double>();
                c2_ = iid.at("c2").get<double>();
                shift_ = iid.value("centered", true)
                             ? laws::two_sided_pareto_mean(p_, c1_, c2_)
                             : 0.0;
            } else if (type == "gaussian") {
                iid_kind_ = IidKind::Gaussian;
                sigma_ = std::sqrt(iid.value("sigma2", 1.0));
            } else if (type == "cauchy") {
                iid_kind_ = IidKind::Cauchy;
            } else {
                throw ConfigError("iid.type", "unknown iid source '" + type + "'");
            }
            is_iid_ = true;
            return;
        }
        sys_ = config::parse_system(cfg.at("system"));
        obs_ = config::parse_observable(cfg.at("observable"));
    }

    bool is_iid() const { return is_iid_; }
    const systems::System& system() const { return sys_; }
    const systems::Observable& observable() const { return obs_; }

    /// Streaming partial sums S_1..S_n through the consumer(k, S_k).
    template <class Consumer>
    void run(std::int64_t n, Rng& rng, Consumer&& consumer) const {
        if (is_iid_) {
            double sum = 0.0, comp = 0.0;
            for (std::int64_t k = 1; k <= n; ++k) {
                const double y = draw(rng) - comp;
                const double t = sum + y;
                comp = (t - sum) - y;
                sum = t;
                consumer(k, sum);
            }
            return;
        }
        orbits::run_orbit(sys_, obs_, n, rng, {},
                          [&](std::int64_t k, double s_k, const systems::Point&) {
                              consumer(k, s_k);
                          });
    }

    double draw(Rng& rng) const {
        switch (iid_kind_) {
            case IidKind::Pareto:
                return laws::two_sided_pareto_quantile(p_, c1_, c2_, rng.uniform01()) - shift_;
            case IidKind::Gaussian:
                return sigma_ * rng.normal();
            case IidKind::Cauchy:
                return rng.cauchy();
        }
        return 0.0;
    }

private:
    enum class IidKind { Pareto, Gaussian, Cauchy };
    bool is_iid_ = false;
    IidKind iid_kind_ = IidKind::Gaussian;
    double p_ = 0.0, c1_ = 0.0, c2_ = 0.0, shift_ = 0.0, sigma_ = 1.0;
    systems::System sys_ = systems::System::doubling();
    systems::Observable obs_ = systems::Observable::zero();
};

inducing::ReturnSet parse_return_set(const json& j, const std::string& path) {
    const std::string type = j.value("type", "");
    if (type == "whole") return inducing::ReturnSet::whole_space();
    if (type == "dyadic")
        return inducing::ReturnSet::dyadic_cells(
            j.at("level").get<int>(), j.at("cells").get<std::vector<std::uint32_t>>());
    if (type == "lsv_right") return inducing::ReturnSet::lsv_right();
    if (type == "first_symbols")
        return inducing::ReturnSet::first_symbols(
            j.at("symbols").get<std::vector<std::uint32_t>>());
    throw ConfigError(path + ".type", "unknown return-set type '" + type + "'");
}

double ks_of_samples(const std::vector<double>& samples, const laws::TargetLaw& law) {
    std::vector<std::pair<double, double>> atoms;
    atoms.reserve(samples.size());
    const double w = 1.0 / static_cast<double>(samples.size());
    for (double v : samples) atoms.emplace_back(v, w);
    if (law.kind() == laws::TargetLaw::Kind::Stable) {
        const laws::CdfTable table(law);
        return laws::ks_distance(atoms, table);
    }
    return laws::ks_distance(atoms, law);
}

/// Batch-means estimate of the CLT variance of f along one long orbit.
double batch_means_sigma(const systems::System& sys, const systems::Observable& f,
                         std::int64_t length, std::int64_t batch_len, std::uint64_t seed) {
    Rng rng(seed);
    auto p = systems::sample_invariant(sys, rng);
    const auto n_batches = length / batch_len;
    std::vector<double> batch_sums(static_cast<std::size_t>(n_batches), 0.0);
    for (std::int64_t b = 0; b < n_batches; ++b) {
        double s = 0.0, comp = 0.0;
        for (std::int64_t i = 0; i < batch_len; ++i) {
            const double y = f(sys, p) - comp;
            const double t = s + y;
            comp = (t - s) - y;
            s = t;
            systems::step(sys, p);
        }
        batch_sums[static_cast<std::size_t>(b)] = s;
    }
    double mean = 0.0;
    for (double s : batch_sums) mean += s / static_cast<double>(n_batches);
    double var = 0.0;
    for (double s : batch_sums) var += (s - mean) * (s - mean);
    var /= static_cast<double>(n_batches - 1);
    return std::sqrt(var / static_cast<double>(batch_len));
}

// ---------------------------------------------------------------- kinds --

void run_classical_clt(const json& cfg, int threads, RunResult& out) {
    const SampleSource source(cfg);
    const auto n = cfg.at("n").get<std::int64_t>();
    const int replicas = cfg.at("replicas").get<int>();
    const auto seq = config::parse_renorm(cfg.at("renorm"));
    json law_json = cfg.at("law");
    const auto law = config::parse_law(law_json);
    const auto base_seed = cfg.at("base_seed").get<std::uint64_t>();
    const double b_n = seq(n);

    std::vector<double> samples(static_cast<std::size_t>(replicas));
    parallel_for(replicas, threads, [&](std::int64_t r) {
        Rng rng = derive_rng(base_seed, static_cast<std::uint64_t>(r));
        double last = 0.0;
        source.run(n, rng, [&](std::int64_t, double s) { last = s; });
        samples[static_cast<std::size_t>(r)] = last / b_n;
    });

    double ks;
    if (cfg.value("standardize", false)) {
        // best-fit Gaussian: center with the replica mean, scale with a
        // batch-means sigma from a dedicated orbit
        const double mu = stats::mean(samples);
        const double sigma = batch_means_sigma(source.system(), source.observable(),
                                               std::int64_t{1} << 26, std::int64_t{1} << 14,
                                               base_seed ^ 0xBADC0FFEEull);
        out.resolved_config["derived"]["batch_means_sigma"] = sigma;
        std::vector<double> standardized(samples.size());
        const double scale = sigma * std::sqrt(static_cast<double>(n)) / b_n;
        for (std::size_t i = 0; i < samples.size(); ++i)
            standardized[i] = (samples[i] - mu) / scale;
        ks = ks_of_samples(standardized, law);
    } else {
        ks = ks_of_samples(samples, law);
    }
    push_assert(out, "ks", ks, cfg.at("assert").at("ks_max").get<double>());

    Table table;
    table.name = "samples";
    table.columns = {"replica", "value"};
    for (std::size_t i = 0; i < samples.size(); ++i)
        table.rows.push_back({static_cast<double>(i), samples[i]});
    out.tables.push_back(std::move(table));

    // plot-ready CDF of the target law across the sample range
    Table cdf_table;
    cdf_table.name = "law_cdf";
    cdf_table.columns = {"x", "F"};
    const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
    const double lo = *lo_it, hi = *hi_it;
    for (int i = 0; i <= 256; ++i) {
        const double x = lo + (hi - lo) * i / 256.0;
        cdf_table.rows.push_back({x, laws::cdf(law, x)});
    }
    out.tables.push_back(std::move(cdf_table));
}

void run_asclt(const json& cfg, int threads, RunResult& out) {
    const SampleSource source(cfg);
    const auto n_final = cfg.at("N").get<std::int64_t>();
    const int seeds = cfg.at("seeds").get<int>();
    const auto seq = config::parse_renorm(cfg.at("renorm"));
    json law_json = cfg.at("law");
    const auto law = config::parse_law(law_json);
    const auto base_seed = cfg.at("base_seed").get<std::uint64_t>();
    double scale = 1.0;
    if (cfg.contains("scale")) {
        if (cfg.at("scale").is_string() && cfg.at("scale").get<std::string>() == "batch_means") {
            scale = batch_means_sigma(source.system(), source.observable(),
                                      std::int64_t{1} << 26, std::int64_t{1} << 14,
                                      base_seed ^ 0xBADC0FFEEull);
            out.resolved_config["derived"]["scale_batch_means_sigma"] = scale;
        } else {
            scale = cfg.at("scale").get<double>();
        }
    }
    std::vector<std::int64_t> checkpoints =
        cfg.contains("checkpoints") ? cfg.at("checkpoints").get<std::vector<std::int64_t>>()
                                    : std::vector<std::int64_t>{n_final / 100, n_final};
    std::sort(checkpoints.begin(), checkpoints.end());

    const laws::CdfTable table(law);
    std::vector<std::vector<double>> ks(checkpoints.size(),
                                        std::vector<double>(static_cast<std::size_t>(seeds)));
    Table measure_table;
    parallel_for(seeds, threads, [&](std::int64_t s) {
        Rng rng = derive_rng(base_seed, static_cast<std::uint64_t>(s));
        asmeasure::LogMeasureBuilder builder(seq);
        std::size_t ci = 0;
        source.run(n_final, rng, [&](std::int64_t k, double s_k) {
            builder.push(s_k / scale);
            if (ci < checkpoints.size() && checkpoints[ci] == k) {
                ks[ci][static_cast<std::size_t>(s)] = builder.snapshot().ks_to(table);
                ++ci;
            }
        });
        if (s == 0 && cfg.value("export_measure", false)) {
            measure_table.name = "measure_seed0";
            measure_table.columns = {"value", "weight"};
            for (const auto& [v, w] : builder.snapshot().weighted_atoms())
                measure_table.rows.push_back({v, w});
        }
    });
    if (!measure_table.rows.empty()) out.tables.push_back(std::move(measure_table));

    Table t;
    t.name = "ks_by_seed";
    t.columns = {"seed", "N", "ks"};
    for (std::size_t ci = 0; ci < checkpoints.size(); ++ci)
        for (int s = 0; s < seeds; ++s)
            t.rows.push_back({static_cast<double>(s), static_cast<double>(checkpoints[ci]),
                              ks[ci][static_cast<std::size_t>(s)]});
    out.tables.push_back(std::move(t));

    const auto& assert_cfg = cfg.at("assert");
    const double median_final = stats::median(ks.back());
    push_assert(out, "median_ks_final", median_final,
                assert_cfg.at("ks_median_max").get<double>());
    if (assert_cfg.value("median_decreases", false)) {
        push_assert(out, "median_ks_final_minus_first", median_final,
                    stats::median(ks.front()), "<");
    }
    if (assert_cfg.contains("decrease_fraction_min")) {
        int dec = 0;
        for (int s = 0; s < seeds; ++s)
            if (ks.back()[static_cast<std::size_t>(s)] < ks.front()[static_cast<std::size_t>(s)])
                ++dec;
        push_assert(out, "fraction_seeds_decreasing",
                    static_cast<double>(dec) / static_cast<double>(seeds),
                    assert_cfg.at("decrease_fraction_min").get<double>(), ">=");
    }
}

void run_tight_maxima(const json& cfg, int threads, RunResult& out) {
    const std::string source_type = cfg.at("source").get<std::string>();
    const auto n_max = cfg.at("n_max").get<std::int64_t>();
    const int replicas = cfg.at("replicas").get<int>();
    const auto base_seed = cfg.at("base_seed").get<std::uint64_t>();
    const auto c_grid = cfg.at("c_grid").get<std::vector<double>>();
    const auto seq = config::parse_renorm(cfg.at("renorm"));

    std::vector<std::int64_t> grid;
    for (std::int64_t n = 100; n <= n_max; n *= 10) grid.push_back(n);

    martingale::CosinePoly h;
    if (source_type == "gordin_h") {
        const auto f = config::parse_observable(cfg.at("observable"));
        const auto dec =
            martingale::gordin_decompose(systems::System::doubling(), f, 64,
                                         martingale::GordinDecomposition::Rep::FourierExact);
        h = dec.h_poly();
    }

    std::vector<orbits::OrbitStats> stats_list(static_cast<std::size_t>(replicas));
    const auto sys = systems::System::doubling();
    parallel_for(replicas, threads, [&](std::int64_t r) {
        Rng rng = derive_rng(base_seed, static_cast<std::uint64_t>(r));
        orbits::OrbitStats st;
        st.checkpoints.reserve(grid.size());
        systems::Point p;
        if (source_type == "gordin_h") p = systems::sample_invariant(sys, rng);
        std::size_t ci = 0;
        for (std::int64_t k = 1; k <= n_max; ++k) {
            double z = 0.0;
            if (source_type == "gordin_h") {
                z = martingale::eval_cosine_poly(h, systems::coordinate(sys, p));
                systems::step(sys, p);
            } else if (source_type == "iid_gaussian") {
                z = rng.normal();
            } else if (source_type == "iid_cauchy") {
                z = rng.cauchy();
            } else {
                throw ConfigError("source", "unknown tight-maxima source '" + source_type + "'");
            }
            st.add(z);
            if (ci < grid.size() && grid[ci] == k) {
                st.checkpoints.push_back({k, st.birkhoff, st.running_max});
                ++ci;
            }
        }
        stats_list[static_cast<std::size_t>(r)] = std::move(st);
    });

    const auto rows = orbits::tight_maxima_profile(stats_list, seq, c_grid);
    Table t;
    t.name = "profile";
    t.columns = {"n", "c", "prob"};
    for (const auto& row : rows)
        t.rows.push_back({static_cast<double>(row.n), row.c, row.probability});
    out.tables.push_back(std::move(t));

    Table replica_table;
    replica_table.name = "replicas";
    replica_table.columns = {"replica_id", "n", "S_n", "max_n"};
    for (std::size_t r = 0; r < stats_list.size(); ++r)
        for (const auto& cp : stats_list[r].checkpoints)
            replica_table.rows.push_back({static_cast<double>(r), static_cast<double>(cp.k),
                                          cp.birkhoff, cp.running_max});
    out.tables.push_back(std::move(replica_table));

    const auto& assert_cfg = cfg.at("assert");
    const double c_ref = assert_cfg.at("c_ref").get<double>();
    if (assert_cfg.contains("p_max")) {
        double worst = 0.0;
        for (const auto& row : rows)
            if (row.c == c_ref) worst = std::max(worst, row.probability);
        push_assert(out, "profile_max_at_c_ref", worst, assert_cfg.at("p_max").get<double>());
    }
    if (assert_cfg.value("grows_with_n", false)) {
        double first = -1.0, last = -1.0;
        for (const auto& row : rows) {
            if (row.c != c_ref) continue;
            if (first < 0.0) first = row.probability;
            last = row.probability;
        }
        push_assert(out, "profile_growth", last, first + 0.1, ">=");
        push_assert(out, "profile_not_tight", last, 0.5, ">=");
    }
}

void run_inducing(const json& cfg, int threads, RunResult& out) {
    const auto sys = config::parse_system(cfg.at("system"));
    const auto ret = parse_return_set(cfg.at("return_set"), "return_set");
    const auto base_seed = cfg.at("base_seed").get<std::uint64_t>();
    Rng setup_rng(base_seed ^ 0x517CC1B727220A95ull);
    const auto ind = inducing::make_induced(sys, ret, setup_rng);
    out.resolved_config["derived"]["m_y"] = ind.m_y;

    const std::string mode = cfg.value("mode", "lift");
    if (mode == "kac") {
        const auto n_returns = cfg.at("n_returns").get<std::int64_t>();
        Rng rng(base_seed);
        const auto report = inducing::kac_check(ind, n_returns, rng);
        push_assert(out, "kac_product_error", std::abs(report.product - 1.0),
                    3.0 * report.product_stderr);
        if (cfg.at("assert").contains("return_law_abs_tol")) {
            const double tol = cfg.at("assert").at("return_law_abs_tol").get<double>();
            double worst = 0.0;
            for (int k = 1; k <= 10; ++k)
                worst = std::max(worst,
                                 std::abs(report.return_law[static_cast<std::size_t>(k)] -
                                          std::pow(2.0, -k)));
            push_assert(out, "return_law_abs_error", worst, tol);
        }
        Table t;
        t.name = "return_law";
        t.columns = {"k", "prob"};
        for (std::size_t k = 1; k < report.return_law.size(); ++k)
            t.rows.push_back({static_cast<double>(k), report.return_law[k]});
        out.tables.push_back(std::move(t));
        out.resolved_config["derived"]["mean_phi"] = report.mean_phi;
        out.resolved_config["derived"]["m_y_estimate"] = report.m_y_estimate;
        return;
    }

    const auto f = config::parse_observable(cfg.at("observable"));
    const auto seq = config::parse_renorm(cfg.at("renorm"));
    json law_json = cfg.at("law");
    const auto law = config::parse_law(law_json);
    const auto n = cfg.at("n").get<std::int64_t>();
    const int replicas = cfg.at("replicas").get<int>();
    const auto c_grid = cfg.value("c_grid", std::vector<double>{2.0, 10.0});

    const auto lift =
        inducing::lift_experiment(ind, f, seq, n, replicas, c_grid, base_seed, threads);
    const double ks_max = cfg.at("assert").at("ks_max").get<double>();
    push_assert(out, "ks_direct", ks_of_samples(lift.direct, law), ks_max);
    push_assert(out, "ks_induced", ks_of_samples(lift.induced, law), ks_max);

    Table samples;
    samples.name = "lift_samples";
    samples.columns = {"replica", "induced", "direct"};
    for (std::size_t i = 0; i < lift.induced.size(); ++i)
        samples.rows.push_back({static_cast<double>(i), lift.induced[i], lift.direct[i]});
    out.tables.push_back(std::move(samples));

    Table profile;
    profile.name = "induced_profile";
    profile.columns = {"n", "c", "prob"};
    for (const auto& row : lift.induced_profile)
        profile.rows.push_back({static_cast<double>(row.n), row.c, row.probability});
    out.tables.push_back(std::move(profile));

    Table cond;
    cond.name = "excursion_condition";
    cond.columns = {"n", "c", "n_mass"};
    for (const auto& cell : lift.condition_grid)
        cond.rows.push_back({static_cast<double>(cell.n), cell.c, cell.value});
    out.tables.push_back(std::move(cond));
}

void run_asclt_inducing(const json& cfg, int threads, RunResult& out) {
    const auto sys = config::parse_system(cfg.at("system"));
    const auto ret = parse_return_set(cfg.at("return_set"), "return_set");
    const auto f = config::parse_observable(cfg.at("observable"));
    const auto seq = config::parse_renorm(cfg.at("renorm"));
    json law_json = cfg.at("law");
    const auto law = config::parse_law(law_json);
    const auto base_seed = cfg.at("base_seed").get<std::uint64_t>();
    Rng setup_rng(base_seed ^ 0x517CC1B727220A95ull);
    const auto ind = inducing::make_induced(sys, ret, setup_rng);
    out.resolved_config["derived"]["m_y"] = ind.m_y;

    const auto n = cfg.at("N").get<std::int64_t>();
    const int seeds = cfg.at("seeds").get<int>();
    const auto reports =
        inducing::asclt_lift_experiment(ind, f, seq, n, seeds, law, base_seed, threads);

    std::vector<double> ks_ind, ks_dir;
    Table t;
    t.name = "ks_by_seed";
    t.columns = {"seed", "ks_induced", "ks_direct"};
    for (std::size_t s = 0; s < reports.size(); ++s) {
        ks_ind.push_back(reports[s].ks_induced);
        ks_dir.push_back(reports[s].ks_direct);
        t.rows.push_back({static_cast<double>(s), reports[s].ks_induced,
                          reports[s].ks_direct});
    }
    out.tables.push_back(std::move(t));

    const double tol = cfg.at("assert").at("ks_median_max").get<double>();
    push_assert(out, "median_ks_induced", stats::median(ks_ind), tol);
    push_assert(out, "median_ks_direct", stats::median(ks_dir), tol);
}

void run_spectral(const json& cfg, int threads, RunResult& out) {
    const auto sys = config::parse_system(cfg.at("system"));
    const auto f = config::parse_observable(cfg.at("observable"));
    const auto base_seed = cfg.at("base_seed").get<std::uint64_t>();
    const int k_terms = cfg.value("k_terms", 30);

    spectral::GreenKuboOptions opts;
    opts.grid = cfg.value("grid", 4096);
    opts.seed = base_seed;
    opts.threads = threads;
    opts.mc_replicas = cfg.value("mc_replicas", 24);
    opts.mc_length = cfg.value("mc_length", std::int64_t{1} << 17);

    const auto ulam =
        spectral::green_kubo_sigma2(sys, f, k_terms, spectral::GreenKuboMethod::UlamPowers, opts);
    const auto mc =
        spectral::green_kubo_sigma2(sys, f, k_terms, spectral::GreenKuboMethod::MonteCarlo, opts);
    out.resolved_config["derived"]["sigma2_ulam"] = ulam.sigma2;
    out.resolved_config["derived"]["sigma2_mc"] = mc.sigma2;

    const auto& assert_cfg = cfg.at("assert");
    if (assert_cfg.contains("sigma2_expected")) {
        push_assert(out, "sigma2_ulam_error",
                    std::abs(ulam.sigma2 - assert_cfg.at("sigma2_expected").get<double>()),
                    assert_cfg.at("sigma2_abs_tol").get<double>());
    }
    push_assert(out, "sigma2_method_gap", std::abs(ulam.sigma2 - mc.sigma2),
                3.0 * (ulam.error + mc.error) + 1e-9);

    Table corr;
    corr.name = "correlations";
    corr.columns = {"k", "ulam", "monte_carlo"};
    for (std::size_t k = 0; k < ulam.correlations.size(); ++k)
        corr.rows.push_back({static_cast<double>(k), ulam.correlations[k],
                             k < mc.correlations.size() ? mc.correlations[k] : 0.0});
    out.tables.push_back(std::move(corr));

    if (cfg.contains("curvature_probe")) {
        const double t = cfg.at("curvature_probe").get<double>();
        const auto eig = spectral::leading_eigenvalue(spectral::build_ulam(sys, f, t, opts.grid));
        const double implied = -2.0 * std::log(std::abs(eig.lambda)) / (t * t);
        push_assert(out, "curvature_sigma2_error", std::abs(implied - ulam.sigma2),
                    assert_cfg.at("curvature_abs_tol").get<double>());
    }
}

void run_eigen_convergence(const json& cfg, int threads, RunResult& out) {
    const auto sys = config::parse_system(cfg.at("system"));
    const auto f = config::parse_observable(cfg.at("observable"));
    const int grid = cfg.value("grid", 4096);
    const auto seq = config::parse_renorm(cfg.at("renorm"));
    json law_json = cfg.at("law");
    const auto law = config::parse_law(law_json);
    const auto t_list = cfg.at("t_list").get<std::vector<double>>();
    const auto n_grid = cfg.at("n_grid").get<std::vector<std::int64_t>>();
    const double tol = cfg.at("assert").at("gap_max").get<double>();

    // evaluate lambda exactly at the scaled arguments (no interpolation)
    Table t;
    t.name = "eigen_convergence";
    t.columns = {"t", "n", "gap"};
    double worst = 0.0;
    std::vector<std::vector<double>> gaps(t_list.size(),
                                          std::vector<double>(n_grid.size(), 0.0));
    parallel_for(static_cast<std::int64_t>(t_list.size() * n_grid.size()), threads,
                 [&](std::int64_t idx) {
                     const auto ti = static_cast<std::size_t>(idx) / n_grid.size();
                     const auto ni = static_cast<std::size_t>(idx) % n_grid.size();
                     const double tval = t_list[ti];
                     const auto n = n_grid[ni];
                     const auto op = spectral::build_ulam(sys, f, tval / seq(n), grid);
                     const auto lam = spectral::leading_eigenvalue(op).lambda;
                     const auto powered = std::pow(lam, static_cast<double>(n));
                     gaps[ti][ni] = std::abs(powered - laws::char_fn(law, tval));
                 });
    for (std::size_t ti = 0; ti < t_list.size(); ++ti)
        for (std::size_t ni = 0; ni < n_grid.size(); ++ni) {
            t.rows.push_back({t_list[ti], static_cast<double>(n_grid[ni]), gaps[ti][ni]});
            worst = std::max(worst, gaps[ti][ni]);
        }
    out.tables.push_back(std::move(t));
    push_assert(out, "max_gap", worst, tol);

    // curve export (t, Re lambda, Im lambda, gap)
    const auto curve = spectral::build_eigen_curve(sys, f, grid, cfg.value("curve_t_max", 0.5),
                                                   cfg.value("curve_points", 20));
    Table curve_table;
    curve_table.name = "eigen_curve";
    curve_table.columns = {"t", "re_lambda", "im_lambda", "gap"};
    for (std::size_t i = 0; i < curve.ts.size(); ++i)
        curve_table.rows.push_back({curve.ts[i], curve.lambdas[i].real(),
                                    curve.lambdas[i].imag(), curve.gaps[i]});
    out.tables.push_back(std::move(curve_table));
    out.resolved_config["derived"]["eps0"] = curve.eps0;
}

void run_charfn_residual(const json& cfg, int threads, RunResult& out) {
    const auto sys = config::parse_system(cfg.at("system"));
    const auto f = config::parse_observable(cfg.at("observable"));
    const int grid = cfg.value("grid", 4096);
    const double t = cfg.at("t").get<double>();
    const auto n = cfg.at("n").get<std::int64_t>();
    const int replicas = cfg.at("replicas").get<int>();
    const auto base_seed = cfg.at("base_seed").get<std::uint64_t>();

    const auto op = spectral::build_ulam(sys, f, t, grid);
    const auto res = spectral::charfn_vs_eigen(sys, f, t, n, replicas, op, base_seed, threads);
    out.resolved_config["derived"]["mc_re"] = res.monte_carlo.real();
    out.resolved_config["derived"]["mc_im"] = res.monte_carlo.imag();
    out.resolved_config["derived"]["predicted_re"] = res.predicted.real();
    out.resolved_config["derived"]["predicted_im"] = res.predicted.imag();

    const double bias = cfg.at("assert").value("bias_allowance", 0.0);
    push_assert(out, "charfn_residual", res.residual, bias + 3.0 * res.mc_stderr);
}

void run_gordin(const json& cfg, int threads, RunResult& out) {
    const auto sys = config::parse_system(cfg.at("system"));
    const auto f = config::parse_observable(cfg.at("observable"));
    const int grid = cfg.value("grid", 4096);
    const auto base_seed = cfg.at("base_seed").get<std::uint64_t>();
    const auto dec = martingale::gordin_decompose(
        sys, f, 64, martingale::GordinDecomposition::Rep::FourierExact);

    const auto& assert_cfg = cfg.at("assert");
    const auto check_poly = [&](const char* key, const martingale::CosinePoly& poly,
                                const std::string& stat) {
        if (!cfg.contains(key)) return;
        martingale::CosinePoly expected;
        for (const auto& c : cfg.at(key))
            expected[c.at(0).get<int>()] += c.at(1).get<double>();
        double worst = 0.0;
        for (const auto& [freq, amp] : expected) {
            const auto it = poly.find(freq);
            worst = std::max(worst,
                             std::abs((it == poly.end() ? 0.0 : it->second) - amp));
        }
        for (const auto& [freq, amp] : poly)
            if (!expected.contains(freq)) worst = std::max(worst, std::abs(amp));
        push_assert(out, stat, worst, assert_cfg.at("coeff_abs_tol").get<double>());
    };
    check_poly("expected_g", dec.g_poly(), "g_coefficient_error");
    check_poly("expected_h", dec.h_poly(), "h_coefficient_error");

    push_assert(out, "transfer_annihilation_sup", dec.transfer_annihilation_sup(sys, grid),
                assert_cfg.at("transfer_sup_max").get<double>());

    Rng rng(base_seed);
    push_assert(out, "identity_residual", dec.identity_residual(sys, f, 100000, rng),
                assert_cfg.at("identity_residual_max").get<double>());

    spectral::GreenKuboOptions opts;
    opts.grid = grid;
    opts.seed = base_seed;
    opts.threads = threads;
    const auto ulam =
        spectral::green_kubo_sigma2(sys, f, 30, spectral::GreenKuboMethod::UlamPowers, opts);
    const auto mc =
        spectral::green_kubo_sigma2(sys, f, 30, spectral::GreenKuboMethod::MonteCarlo, opts);
    const double h2 = dec.h_second_moment();
    out.resolved_config["derived"]["h_second_moment"] = h2;
    out.resolved_config["derived"]["sigma2_ulam"] = ulam.sigma2;
    out.resolved_config["derived"]["sigma2_mc"] = mc.sigma2;
    push_assert(out, "h2_vs_green_kubo", std::abs(h2 - mc.sigma2),
                3.0 * (mc.error + ulam.error) + 1e-9);
    if (assert_cfg.contains("h2_expected"))
        push_assert(out, "h2_error",
                    std::abs(h2 - assert_cfg.at("h2_expected").get<double>()), 1e-12);

    Table t;
    t.name = "decomposition";
    t.columns = {"x", "g", "h"};
    for (int i = 0; i < 256; ++i) {
        const double x = (i + 0.5) / 256.0;
        t.rows.push_back({x, dec.eval_g(x), dec.eval_h(x)});
    }
    out.tables.push_back(std::move(t));
}

void run_reverse_md_asclt(const json& cfg, int threads, RunResult& out) {
    const auto n = cfg.at("N").get<std::int64_t>();
    const int seeds = cfg.at("seeds").get<int>();
    const auto base_seed = cfg.at("base_seed").get<std::uint64_t>();
    const auto& stream_cfg = cfg.at("stream");
    const std::string type = stream_cfg.value("type", "");

    martingale::ReverseMDStream stream;
    if (type == "iid_gaussian") {
        stream = martingale::ReverseMDStream::iid(
            laws::TargetLaw::gaussian(stream_cfg.value("sigma2", 1.0)));
    } else if (type == "dynamical_h") {
        martingale::CosinePoly h;
        for (const auto& c : stream_cfg.at("h_coeffs"))
            h[c.at(0).get<int>()] += c.at(1).get<double>();
        double zeta = 0.0;
        for (const auto& [freq, amp] : h) {
            (void)freq;
            zeta += 0.5 * amp * amp;
        }
        stream = martingale::ReverseMDStream::dynamical(systems::System::doubling(), h, zeta);
    } else {
        throw ConfigError("stream.type", "unknown stream '" + type + "'");
    }

    const auto reports = martingale::reverse_md_asclt(stream, n, seeds, base_seed, threads);
    std::vector<double> ks;
    double worst_qv = 0.0;
    int trend_ok = 0;
    Table t;
    t.name = "seed_reports";
    t.columns = {"seed", "ks", "quadratic_variation", "max_ratio_sup", "trend_ok"};
    for (std::size_t s = 0; s < reports.size(); ++s) {
        const auto& rep = reports[s];
        ks.push_back(rep.ks);
        if (stream.zeta > 0.0)
            worst_qv = std::max(worst_qv,
                                std::abs(rep.quadratic_variation / stream.zeta - 1.0));
        trend_ok += rep.ratio_trend_ok ? 1 : 0;
        t.rows.push_back({static_cast<double>(s), rep.ks, rep.quadratic_variation,
                          rep.max_ratio_sup, rep.ratio_trend_ok ? 1.0 : 0.0});
    }
    out.tables.push_back(std::move(t));

    const auto& assert_cfg = cfg.at("assert");
    push_assert(out, "median_ks", stats::median(ks),
                assert_cfg.at("ks_median_max").get<double>());
    push_assert(out, "quadratic_variation_rel_error", worst_qv,
                assert_cfg.value("qv_rel_tol", 0.05));
    push_assert(out, "trend_fraction", static_cast<double>(trend_ok) / seeds,
                assert_cfg.value("trend_fraction_min", 0.9), ">=");
}

void run_random_index(const json& cfg, int threads, RunResult& out) {
    const auto sys = config::parse_system(cfg.at("system"));
    const auto f = config::parse_observable(cfg.at("observable"));
    const auto u = config::parse_observable(cfg.at("index_observable"), "index_observable");
    const auto seq = config::parse_renorm(cfg.at("renorm"));
    json law_json = cfg.at("law");
    const auto law = config::parse_law(law_json);
    const auto n = cfg.at("n").get<std::int64_t>();
    const int replicas = cfg.at("replicas").get<int>();
    const auto base_seed = cfg.at("base_seed").get<std::uint64_t>();

    const auto sample = orbits::random_index_sums(sys, f, orbits::IndexRule::perturbed(u), n,
                                                  replicas, seq, base_seed, threads);
    const auto& assert_cfg = cfg.at("assert");
    push_assert(out, "ks_perturbed", ks_of_samples(sample.perturbed, law),
                assert_cfg.at("ks_max").get<double>());
    push_assert(out, "ks_exact", ks_of_samples(sample.exact, law),
                assert_cfg.at("ks_max").get<double>());
    push_assert(out, "two_sample_ks", stats::two_sample_ks(sample.perturbed, sample.exact),
                assert_cfg.at("two_sample_ks_max").get<double>());

    Table t;
    t.name = "random_index_samples";
    t.columns = {"replica", "perturbed", "exact", "index_ratio"};
    for (std::size_t i = 0; i < sample.perturbed.size(); ++i)
        t.rows.push_back({static_cast<double>(i), sample.perturbed[i], sample.exact[i],
                          sample.index_ratio[i]});
    out.tables.push_back(std::move(t));
}

void run_weighted_log_avg(const json& cfg, int threads, RunResult& out) {
    const auto sys = config::parse_system(cfg.at("system"));
    const auto f = config::parse_observable(cfg.at("observable"));
    const auto phi = config::parse_observable(cfg.at("phi"), "phi");
    const auto seq = config::parse_renorm(cfg.at("renorm"));
    const auto n = cfg.at("N").get<std::int64_t>();
    const int seeds = cfg.at("seeds").get<int>();
    const auto base_seed = cfg.at("base_seed").get<std::uint64_t>();

    const auto suite = asmeasure::tent_suite();
    std::vector<double> max_gap(static_cast<std::size_t>(seeds));
    std::vector<double> rescale_diff(static_cast<std::size_t>(seeds));
    parallel_for(seeds, threads, [&](std::int64_t s) {
        Rng rng = derive_rng(base_seed, static_cast<std::uint64_t>(s));
        const std::vector<systems::Observable> phis{phi, systems::Observable::constant(1.0)};
        const auto table =
            asmeasure::weighted_log_average_suite(sys, f, phis, suite, seq, n, rng);
        double worst = 0.0;
        for (std::size_t j = 0; j < suite.size(); ++j)
            worst = std::max(worst, std::abs(table[0][j] - table[1][j]));
        max_gap[static_cast<std::size_t>(s)] = worst;

        Rng rng2 = derive_rng(base_seed ^ 0xD6E8FEB86659FD93ull, static_cast<std::uint64_t>(s));
        const auto pair = asmeasure::rescale_invariance_check(
            sys, f, seq, n, asmeasure::TestFunction::tent(0.0), rng2);
        rescale_diff[static_cast<std::size_t>(s)] = std::abs(pair.first - pair.second);
    });

    Table t;
    t.name = "weighted_gaps";
    t.columns = {"seed", "max_suite_gap", "rescale_diff"};
    for (int s = 0; s < seeds; ++s)
        t.rows.push_back({static_cast<double>(s), max_gap[static_cast<std::size_t>(s)],
                          rescale_diff[static_cast<std::size_t>(s)]});
    out.tables.push_back(std::move(t));

    const auto& assert_cfg = cfg.at("assert");
    push_assert(out, "median_max_suite_gap", stats::median(max_gap),
                assert_cfg.at("suite_gap_median_max").get<double>());
    push_assert(out, "median_rescale_diff", stats::median(rescale_diff),
                assert_cfg.at("rescale_diff_max").get<double>());

    // exact form of the rescaling bound: C_g sum w_k |1 - rho_k| with
    // C_g = 2 K Lip(g) for a tent g supported in [-K, K]
    const auto g = asmeasure::TestFunction::tent(0.0);
    double bound_sum = 0.0, harmonic = 0.0;
    for (std::int64_t k = 1; k <= n; ++k) {
        bound_sum += 1.0 / (static_cast<double>(k) * std::sqrt(static_cast<double>(k)));
        harmonic += 1.0 / static_cast<double>(k);
    }
    const double deterministic_bound =
        2.0 * g.support_radius() * g.lipschitz() * bound_sum / harmonic;
    out.resolved_config["derived"]["rescale_deterministic_bound"] = deterministic_bound;
    push_assert(out, "median_rescale_diff_vs_bound", stats::median(rescale_diff),
                deterministic_bound);
}

}  // namespace

RunResult run_experiment(json cfg, int threads) {
    config::validate_config(cfg);
    RunResult out;
    out.resolved_config = cfg;
    out.hash = config::config_hash_hex(cfg);

    const auto started = std::chrono::steady_clock::now();
    const std::string kind = cfg.at("kind").get<std::string>();
    if (kind == "ClassicalCLT" || kind == "StableLimit")
        run_classical_clt(cfg, threads, out);
    else if (kind == "ASCLT")
        run_asclt(cfg, threads, out);
    else if (kind == "TightMaxima")
        run_tight_maxima(cfg, threads, out);
    else if (kind == "Inducing")
        run_inducing(cfg, threads, out);
    else if (kind == "ASCLTInducing")
        run_asclt_inducing(cfg, threads, out);
    else if (kind == "Spectral" && cfg.value("mode", "green_kubo") == "charfn_residual")
        run_charfn_residual(cfg, threads, out);
    else if (kind == "Spectral")
        run_spectral(cfg, threads, out);
    else if (kind == "EigenConvergence")
        run_eigen_convergence(cfg, threads, out);
    else if (kind == "Gordin")
        run_gordin(cfg, threads, out);
    else if (kind == "ReverseMDASCLT")
        run_reverse_md_asclt(cfg, threads, out);
    else if (kind == "RandomIndex")
        run_random_index(cfg, threads, out);
    else if (kind == "WeightedLogAvg")
        run_weighted_log_avg(cfg, threads, out);
    else
        throw ConfigError("kind", "unhandled kind '" + kind + "'");
    out.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return out;
}

void write_bundle(const RunResult& result, const std::filesystem::path& out_dir) {
    const std::string name = result.resolved_config.at("name").get<std::string>();
    const auto dir = out_dir / name;
    std::filesystem::create_directories(dir);

    {
        json config_with_hash = result.resolved_config;
        config_with_hash["config_hash"] = result.hash;
        std::ofstream f(dir / "config.json");
        f << config_with_hash.dump(2) << "\n";
    }
    {
        json summary;
        summary["name"] = name;
        summary["kind"] = result.resolved_config.at("kind");
        summary["config_hash"] = result.hash;
        summary["runtime_seconds"] = result.runtime_seconds;
        summary["base_seed"] = result.resolved_config.at("base_seed");
        if (result.resolved_config.contains("law"))
            summary["law"] = result.resolved_config.at("law");
        summary["pass"] = result.pass();
        json rows = json::array();
        for (const auto& a : result.assertions)
            rows.push_back({{"statistic", a.statistic},
                            {"value", a.value},
                            {"tolerance", a.tolerance},
                            {"relation", a.relation},
                            {"pass", a.pass}});
        summary["assertions"] = rows;
        std::ofstream f(dir / "summary.json");
        f << summary.dump(2) << "\n";
    }
    for (const auto& table : result.tables) {
        std::ofstream f(dir / (table.name + ".csv"));
        f << "# config_hash=" << result.hash << "\n";
        for (std::size_t c = 0; c < table.columns.size(); ++c)
            f << (c ? "," : "") << table.columns[c];
        f << "\n";
        char buf[32];
        for (const auto& row : table.rows) {
            for (std::size_t c = 0; c < row.size(); ++c) {
                std::snprintf(buf, sizeof buf, "%.17g", row[c]);
                f << (c ? "," : "") << buf;
            }
            f << "\n";
        }
    }
}

int report(const std::filesystem::path& dir, std::ostream& out) {
    std::vector<std::filesystem::path> summaries;
    if (std::filesystem::exists(dir)) {
        for (const auto& entry : std::filesystem::recursive_directory_iterator(dir))
            if (entry.is_regular_file() && entry.path().filename() == "summary.json")
                summaries.push_back(entry.path());
    }
    std::sort(summaries.begin(), summaries.end());

    out << "experiment,statistic,value,tolerance,relation,pass,runtime_s,seed\n";
    bool all_pass = true;
    std::ostringstream csv;
    csv << "experiment,statistic,value,tolerance,relation,pass,runtime_s,seed\n";
    for (const auto& path : summaries) {
        json summary;
        {
            std::ifstream f(path);
            f >> summary;
        }
        const std::string name = summary.value("name", "?");
        const std::string hash = summary.value("config_hash", "");

        // refuse bundles whose data files carry a different hash
        bool hash_ok = true;
        for (const auto& entry : std::filesystem::directory_iterator(path.parent_path())) {
            if (entry.path().extension() != ".csv") continue;
            std::ifstream f(entry.path());
            std::string first;
            std::getline(f, first);
            if (first != "# config_hash=" + hash) hash_ok = false;
        }
        if (!hash_ok) {
            out << name << ",CONFIG_HASH_MISMATCH,,,,FAIL,,\n";
            all_pass = false;
            continue;
        }

        const double runtime = summary.value("runtime_seconds", 0.0);
        const auto seed = summary.value("base_seed", std::uint64_t{0});
        for (const auto& a : summary.value("assertions", json::array())) {
            const bool pass = a.value("pass", false);
            all_pass = all_pass && pass;
            std::ostringstream line;
            line << name << "," << a.value("statistic", "?") << "," << a.value("value", 0.0)
                 << "," << a.value("tolerance", 0.0) << "," << a.value("relation", "?") << ","
                 << (pass ? "PASS" : "FAIL") << "," << runtime << "," << seed << "\n";
            out << line.str();
            csv << line.str();
        }
    }
    std::ofstream f(dir / "report.csv");
    f << csv.str();
    return all_pass ? 0 : 1;
}

}  // namespace asclt::experiments
