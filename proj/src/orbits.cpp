#include "asclt/orbits.hpp"

#include <algorithm>

#include "asclt/parallel.hpp"

namespace asclt::orbits {

std::vector<std::int64_t> geometric_grid(std::int64_t n, double ratio) {
    std::vector<std::int64_t> grid;
    double v = 1.0;
    std::int64_t last = 0;
    while (true) {
        const auto k = static_cast<std::int64_t>(std::llround(v));
        if (k > n) break;
        if (k > last) {
            grid.push_back(k);
            last = k;
        }
        v *= ratio;
    }
    if (grid.empty() || grid.back() != n) grid.push_back(n);
    return grid;
}

std::vector<ProfileRow> tight_maxima_profile(std::span<const OrbitStats> replicas,
                                             const renorm::RenormSeq& seq,
                                             std::span<const double> c_grid, double time_scale) {
    if (replicas.empty()) throw std::invalid_argument("tight_maxima_profile: no replicas");
    const auto& grid = replicas.front().checkpoints;
    for (const auto& r : replicas) {
        if (r.checkpoints.size() != grid.size())
            throw GridMismatch("tight_maxima_profile: replicas disagree on checkpoint grid");
        for (std::size_t i = 0; i < grid.size(); ++i)
            if (r.checkpoints[i].k != grid[i].k)
                throw GridMismatch("tight_maxima_profile: replicas disagree on checkpoint grid");
    }

    std::vector<ProfileRow> rows;
    rows.reserve(grid.size() * c_grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto n = grid[i].k;
        const double b_n = seq.at(static_cast<double>(n) / time_scale);
        for (double c : c_grid) {
            std::int64_t exceed = 0;
            for (const auto& r : replicas)
                if (r.checkpoints[i].running_max > c * b_n) ++exceed;
            rows.push_back(
                {n, c, static_cast<double>(exceed) / static_cast<double>(replicas.size())});
        }
    }
    return rows;
}

RandomIndexSample random_index_sums(const systems::System& sys, const systems::Observable& f,
                                    const IndexRule& rule, std::int64_t n, int replicas,
                                    const renorm::RenormSeq& seq, std::uint64_t base_seed,
                                    int threads) {
    if (n < 1) throw std::invalid_argument("random_index_sums: n must be >= 1");
    RandomIndexSample out;
    out.perturbed.resize(static_cast<std::size_t>(replicas));
    out.exact.resize(static_cast<std::size_t>(replicas));
    out.index_ratio.resize(static_cast<std::size_t>(replicas));
    const double b_n = seq(n);

    parallel_for(replicas, threads, [&](std::int64_t r) {
        Rng rng = derive_rng(base_seed, static_cast<std::uint64_t>(r));
        systems::Point x = systems::sample_invariant(sys, rng);

        std::int64_t t_n = n;
        if (rule.kind == IndexRule::Kind::Perturbed) {
            const double u = rule.perturbation(sys, x);
            t_n = n + static_cast<std::int64_t>(
                          std::floor(std::sqrt(static_cast<double>(n)) * u));
        }
        if (t_n < 1)
            throw std::invalid_argument("random_index_sums: index rule produced t_n < 1");

        OrbitStats stats;
        double s_at_n = 0.0, s_at_tn = 0.0;
        const std::int64_t horizon = std::max(n, t_n);
        for (std::int64_t k = 1; k <= horizon; ++k) {
            stats.add(f(sys, x));
            systems::step(sys, x);
            if (k == n) s_at_n = stats.birkhoff;
            if (k == t_n) s_at_tn = stats.birkhoff;
        }
        out.perturbed[static_cast<std::size_t>(r)] = s_at_tn / b_n;
        out.exact[static_cast<std::size_t>(r)] = s_at_n / b_n;
        out.index_ratio[static_cast<std::size_t>(r)] =
            static_cast<double>(t_n) / static_cast<double>(n);
    });
    return out;
}

}  // namespace asclt::orbits
