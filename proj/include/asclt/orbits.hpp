#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "asclt/renorm.hpp"
#include "asclt/rng.hpp"
#include "asclt/systems.hpp"

namespace asclt::orbits {

struct GridMismatch : std::runtime_error {
    explicit GridMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct Checkpoint {
    std::int64_t k = 0;
    double birkhoff = 0.0;
    double running_max = 0.0;
};

/**
 * Streaming record of one orbit: Birkhoff sum S_k f with compensated
 * accumulation, the running maximum of |S_j f|, and checkpoints on a
 * requested grid of k values.
 */
struct OrbitStats {
    double birkhoff = 0.0;
    double running_max = 0.0;
    std::int64_t steps = 0;
    std::vector<Checkpoint> checkpoints;

    void add(double value) {
        const double y = value - comp_;
        const double t = birkhoff + y;
        comp_ = (t - birkhoff) - y;
        birkhoff = t;
        ++steps;
        const double a = std::abs(birkhoff);
        if (a > running_max) running_max = a;
    }

private:
    double comp_ = 0.0;
};

/// Geometric checkpoint grid with the given ratio, deduplicated, ending at n.
std::vector<std::int64_t> geometric_grid(std::int64_t n, double ratio = 1.189207115002721);

/**
 * Runs one orbit of n_steps from an invariant-measure start.  The consumer
 * sees (k, S_k, point) after every step, with point = T^k x0; it is the
 * streaming hook for the log-average machinery.
 */
template <class Consumer>
OrbitStats run_orbit(const systems::System& sys, const systems::Observable& f,
                     std::int64_t n_steps, Rng& rng, std::span<const std::int64_t> checkpoints,
                     Consumer&& consumer) {
    if (n_steps < 1) throw std::invalid_argument("run_orbit: n_steps must be >= 1");
    systems::Point x = systems::sample_invariant(sys, rng);
    OrbitStats stats;
    stats.checkpoints.reserve(checkpoints.size());
    std::size_t ci = 0;
    for (std::int64_t k = 1; k <= n_steps; ++k) {
        stats.add(f(sys, x));
        systems::step(sys, x);
        consumer(k, stats.birkhoff, x);
        if (ci < checkpoints.size() && checkpoints[ci] == k) {
            stats.checkpoints.push_back({k, stats.birkhoff, stats.running_max});
            ++ci;
        }
    }
    return stats;
}

inline OrbitStats run_orbit(const systems::System& sys, const systems::Observable& f,
                            std::int64_t n_steps, Rng& rng,
                            std::span<const std::int64_t> checkpoints = {}) {
    return run_orbit(sys, f, n_steps, rng, checkpoints,
                     [](std::int64_t, double, const systems::Point&) {});
}

/// One row of a tight-maxima profile: empirical P{max_{k<=n} |S_k| > c B(n)}.
struct ProfileRow {
    std::int64_t n = 0;
    double c = 0.0;
    double probability = 0.0;
};

/**
 * Tight-maxima profile over a replica ensemble sharing one checkpoint grid.
 * B is evaluated as seq(n / time_scale); time_scale = m(Y) gives the induced
 * normalization B(n / m(Y)).
 */
std::vector<ProfileRow> tight_maxima_profile(std::span<const OrbitStats> replicas,
                                             const renorm::RenormSeq& seq,
                                             std::span<const double> c_grid,
                                             double time_scale = 1.0);

/// Random-index rule: t_n = n, or t_n = n + floor(sqrt(n) u(x)) for a
/// bounded observable u of the initial point.
struct IndexRule {
    enum class Kind { Exact, Perturbed };
    Kind kind = Kind::Exact;
    systems::Observable perturbation = systems::Observable::zero();

    static IndexRule exact() { return {}; }
    static IndexRule perturbed(systems::Observable u) {
        return {Kind::Perturbed, std::move(u)};
    }
};

struct RandomIndexSample {
    std::vector<double> perturbed;    // S_{t_n} / B_n per replica
    std::vector<double> exact;        // S_n / B_n per replica (same replicas)
    std::vector<double> index_ratio;  // t_n / n per replica
};

RandomIndexSample random_index_sums(const systems::System& sys, const systems::Observable& f,
                                    const IndexRule& rule, std::int64_t n, int replicas,
                                    const renorm::RenormSeq& seq, std::uint64_t base_seed,
                                    int threads);

}  // namespace asclt::orbits
