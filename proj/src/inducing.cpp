#include "asclt/inducing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "asclt/asmeasure.hpp"
#include "asclt/parallel.hpp"
#include "asclt/stats.hpp"

namespace asclt::inducing {

ReturnSet ReturnSet::whole_space() { return ReturnSet{}; }

ReturnSet ReturnSet::dyadic_cells(int level, std::vector<std::uint32_t> cells) {
    if (level < 1 || level > 20)
        throw std::invalid_argument("ReturnSet::dyadic_cells: level must lie in [1,20]");
    if (cells.empty()) throw std::invalid_argument("ReturnSet::dyadic_cells: empty cell set");
    ReturnSet y;
    y.kind_ = Kind::DyadicCells;
    y.level_ = level;
    y.member_.assign(std::size_t{1} << level, 0);
    for (auto c : cells) {
        if (c >= (std::uint32_t{1} << level))
            throw std::invalid_argument("ReturnSet::dyadic_cells: cell index out of range");
        y.member_[c] = 1;
    }
    y.cells_ = std::move(cells);
    return y;
}

ReturnSet ReturnSet::lsv_right() {
    ReturnSet y;
    y.kind_ = Kind::LsvRight;
    return y;
}

ReturnSet ReturnSet::first_symbols(std::vector<std::uint32_t> symbols) {
    if (symbols.empty()) throw std::invalid_argument("ReturnSet::first_symbols: empty set");
    ReturnSet y;
    y.kind_ = Kind::FirstSymbols;
    y.cells_ = std::move(symbols);
    return y;
}

bool ReturnSet::contains(const systems::System& sys, const systems::Point& p) const {
    switch (kind_) {
        case Kind::WholeSpace:
            return true;
        case Kind::DyadicCells:
            return member_[static_cast<std::size_t>(
                       systems::cell_at_resolution(sys, p, level_))] != 0;
        case Kind::LsvRight:
            return p.x >= 0.5;
        case Kind::FirstSymbols: {
            const auto cell = static_cast<std::uint32_t>(systems::cell_of(sys, p));
            return std::find(cells_.begin(), cells_.end(), cell) != cells_.end();
        }
    }
    return false;
}

double ReturnSet::exact_measure(const systems::System& sys) const {
    switch (kind_) {
        case Kind::WholeSpace:
            return 1.0;
        case Kind::DyadicCells:
            return static_cast<double>(cells_.size()) /
                   static_cast<double>(std::size_t{1} << level_);
        case Kind::LsvRight:
            return std::numeric_limits<double>::quiet_NaN();
        case Kind::FirstSymbols: {
            double mass = 0.0;
            for (auto a : cells_) mass += sys.cell_probability(static_cast<int>(a));
            return mass;
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

std::string ReturnSet::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case Kind::WholeSpace: os << "whole space"; break;
        case Kind::DyadicCells: os << cells_.size() << " dyadic cells at level " << level_; break;
        case Kind::LsvRight: os << "[1/2, 1]"; break;
        case Kind::FirstSymbols: os << cells_.size() << " first symbols"; break;
    }
    return os.str();
}

InducedSystem make_induced(systems::System base, ReturnSet return_set, Rng& rng,
                           std::int64_t estimate_steps, std::int64_t cap) {
    InducedSystem ind;
    ind.return_set = return_set;
    ind.cap = cap;

    const double exact = return_set.exact_measure(base);
    if (std::isnan(exact)) {
        // occupation fraction along one long orbit, batch-means error bar
        auto p = systems::sample_invariant(base, rng);
        const int batches = 50;
        const std::int64_t per_batch = estimate_steps / batches;
        std::vector<double> fraction(static_cast<std::size_t>(batches), 0.0);
        for (int b = 0; b < batches; ++b) {
            std::int64_t hits = 0;
            for (std::int64_t i = 0; i < per_batch; ++i) {
                if (return_set.contains(base, p)) ++hits;
                systems::step(base, p);
            }
            fraction[static_cast<std::size_t>(b)] =
                static_cast<double>(hits) / static_cast<double>(per_batch);
        }
        ind.m_y = stats::mean(fraction);
        ind.m_y_stderr = stats::stderr_of_mean(fraction);
    } else {
        ind.m_y = exact;
        ind.m_y_stderr = 0.0;
    }
    if (!(ind.m_y > 0.0))
        throw std::invalid_argument("make_induced: return set has no empirical mass");
    ind.base = std::move(base);
    return ind;
}

systems::Point sample_conditional(const InducedSystem& ind, Rng& rng) {
    for (int tries = 0; tries < 1000000; ++tries) {
        auto p = systems::sample_invariant(ind.base, rng);
        if (ind.return_set.contains(ind.base, p)) return p;
    }
    throw CapExceeded("sample_conditional: rejection sampling failed (measure-zero set?)");
}

InduceStep induce_step(const InducedSystem& ind, const systems::Observable& f,
                       systems::Point& y) {
    InduceStep out;
    double comp = 0.0;
    for (std::int64_t k = 1; k <= ind.cap; ++k) {
        const double v = f(ind.base, y) - comp;
        const double t = out.f_y + v;
        comp = (t - out.f_y) - v;
        out.f_y = t;
        out.excursion_max = std::max(out.excursion_max, std::abs(out.f_y));
        systems::step(ind.base, y);
        if (ind.return_set.contains(ind.base, y)) {
            out.phi = k;
            return out;
        }
    }
    throw CapExceeded("induce_step: no return within the cap");
}

KacReport kac_check(const InducedSystem& ind, std::int64_t n_returns, Rng& rng) {
    if (n_returns < 1000)
        throw std::invalid_argument("kac_check: need at least 1e3 returns");
    KacReport report;
    auto y = sample_conditional(ind, rng);
    const auto f = systems::Observable::zero();
    std::vector<double> phis(static_cast<std::size_t>(n_returns));
    std::vector<std::int64_t> law_counts(21, 0);
    for (std::int64_t r = 0; r < n_returns; ++r) {
        const auto step = induce_step(ind, f, y);
        phis[static_cast<std::size_t>(r)] = static_cast<double>(step.phi);
        if (step.phi <= 20) ++law_counts[static_cast<std::size_t>(step.phi)];
    }
    report.mean_phi = stats::mean(phis);
    report.mean_phi_stderr = stats::bootstrap_stderr_mean(phis, 200, rng);
    report.return_law.resize(21, 0.0);
    for (std::size_t k = 1; k <= 20; ++k)
        report.return_law[k] =
            static_cast<double>(law_counts[k]) / static_cast<double>(n_returns);

    // independent occupation estimate of m(Y)
    {
        auto p = systems::sample_invariant(ind.base, rng);
        const std::int64_t probe = std::max<std::int64_t>(4 * n_returns, 100000);
        std::int64_t hits = 0;
        for (std::int64_t i = 0; i < probe; ++i) {
            if (ind.return_set.contains(ind.base, p)) ++hits;
            systems::step(ind.base, p);
        }
        report.m_y_estimate = static_cast<double>(hits) / static_cast<double>(probe);
    }

    report.product = report.mean_phi * ind.m_y;
    report.product_stderr = std::sqrt(
        std::pow(ind.m_y * report.mean_phi_stderr, 2) +
        std::pow(report.mean_phi * ind.m_y_stderr, 2));
    return report;
}

LiftResult lift_experiment(const InducedSystem& ind, const systems::Observable& f,
                           const renorm::RenormSeq& seq, std::int64_t n, int replicas,
                           std::span<const double> c_grid, std::uint64_t base_seed,
                           int threads) {
    LiftResult result;
    result.induced.resize(static_cast<std::size_t>(replicas));
    result.direct.resize(static_cast<std::size_t>(replicas));

    const auto n_induced = static_cast<std::int64_t>(
        std::floor(static_cast<double>(n) * ind.m_y));
    if (n_induced < 1) throw std::invalid_argument("lift_experiment: n m(Y) < 1");
    const double b_n = seq(n);
    const auto grid = orbits::geometric_grid(n_induced);

    std::vector<orbits::OrbitStats> induced_stats(static_cast<std::size_t>(replicas));
    parallel_for(replicas, threads, [&](std::int64_t r) {
        Rng rng = derive_rng(base_seed, static_cast<std::uint64_t>(r));
        // induced orbit
        auto y = sample_conditional(ind, rng);
        orbits::OrbitStats stats;
        stats.checkpoints.reserve(grid.size());
        std::size_t ci = 0;
        for (std::int64_t k = 1; k <= n_induced; ++k) {
            const auto step = induce_step(ind, f, y);
            stats.add(step.f_y);
            if (ci < grid.size() && grid[ci] == k) {
                stats.checkpoints.push_back({k, stats.birkhoff, stats.running_max});
                ++ci;
            }
        }
        result.induced[static_cast<std::size_t>(r)] = stats.birkhoff / b_n;
        induced_stats[static_cast<std::size_t>(r)] = std::move(stats);

        // independent direct orbit
        Rng rng_direct = derive_rng(base_seed ^ 0x9E3779B97F4A7C15ull,
                                    static_cast<std::uint64_t>(r));
        const auto direct = orbits::run_orbit(ind.base, f, n, rng_direct);
        result.direct[static_cast<std::size_t>(r)] = direct.birkhoff / b_n;
    });

    result.induced_profile = orbits::tight_maxima_profile(induced_stats, seq, c_grid, ind.m_y);

    // Excursion-maximum condition sup_n n m{ M >= c B(n) } on a stationary
    // sample of M under m_Y.
    {
        Rng rng = derive_rng(base_seed ^ 0x5851F42D4C957F2Dull, 0);
        auto y = sample_conditional(ind, rng);
        const std::int64_t m_samples = 200000;
        std::vector<double> maxima(static_cast<std::size_t>(m_samples));
        for (auto& m : maxima) m = induce_step(ind, f, y).excursion_max;
        std::sort(maxima.begin(), maxima.end());
        for (std::int64_t cond_n : {100, 1000, 10000, 100000, 1000000}) {
            const double b = seq(cond_n);
            for (double c : c_grid) {
                const auto it = std::lower_bound(maxima.begin(), maxima.end(), c * b);
                const double frac = static_cast<double>(maxima.end() - it) /
                                    static_cast<double>(m_samples);
                result.condition_grid.push_back(
                    {cond_n, c, static_cast<double>(cond_n) * ind.m_y * frac});
            }
        }
    }
    return result;
}

std::vector<AscltLiftSeed> asclt_lift_experiment(const InducedSystem& ind,
                                                 const systems::Observable& f,
                                                 const renorm::RenormSeq& seq, std::int64_t n,
                                                 int seeds, const laws::TargetLaw& law,
                                                 std::uint64_t base_seed, int threads) {
    std::vector<AscltLiftSeed> out(static_cast<std::size_t>(seeds));
    parallel_for(seeds, threads, [&](std::int64_t s) {
        Rng rng = derive_rng(base_seed, static_cast<std::uint64_t>(s));

        // induced side: atoms S^Y_k f_Y / B(k / m(Y))
        asmeasure::LogMeasureBuilder induced_builder(seq, ind.m_y);
        auto y = sample_conditional(ind, rng);
        orbits::OrbitStats induced_sums;
        for (std::int64_t k = 1; k <= n; ++k) {
            induced_sums.add(induce_step(ind, f, y).f_y);
            induced_builder.push(induced_sums.birkhoff);
        }

        // direct side: atoms S_k f / B(k)
        Rng rng_direct = derive_rng(base_seed ^ 0xA24BAED4963EE407ull,
                                    static_cast<std::uint64_t>(s));
        asmeasure::LogMeasureBuilder direct_builder(seq);
        orbits::run_orbit(ind.base, f, n, rng_direct, {},
                          [&](std::int64_t, double s_k, const systems::Point&) {
                              direct_builder.push(s_k);
                          });

        out[static_cast<std::size_t>(s)] = {induced_builder.snapshot().ks_to(law),
                                            direct_builder.snapshot().ks_to(law)};
    });
    return out;
}

}  // namespace asclt::inducing
