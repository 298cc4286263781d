#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "asclt/laws.hpp"
#include "asclt/renorm.hpp"
#include "asclt/rng.hpp"
#include "asclt/systems.hpp"

namespace asclt::asmeasure {

/**
 * Log-averaged empirical measure of one orbit:
 *   (1 / H_N) sum_{k<=N} (1/k) delta_{S_k / B_k},
 * normalized by the harmonic sum H_N rather than log N so the object is an
 * exact probability measure at every N (the two normalizations differ by a
 * factor tending to 1, which the rescaling invariance check verifies to be
 * immaterial).
 *
 * Up to 1e6 terms the atoms are kept exactly (value S_k/B_k, weight 1/k);
 * beyond that the measure switches to a clipped histogram with the clipped
 * mass tracked.
 */
class LogAvgMeasure {
public:
    enum class Rep { ExactAtoms, Histogram };

    Rep rep() const { return rep_; }
    std::int64_t terms() const { return n_terms_; }
    double normalizer() const { return harmonic_; }  // H_N
    double clipped_mass() const { return clipped_raw_ / harmonic_; }

    /// Normalized (value, weight) atoms; histogram bins appear at centers.
    std::vector<std::pair<double, double>> weighted_atoms() const;

    double ks_to(const laws::TargetLaw& law) const;
    double ks_to(const laws::CdfTable& table) const;

    /// Atom-weighted mean and variance (diagnostics).
    double mean() const;
    double variance() const;

private:
    friend class LogMeasureBuilder;

    Rep rep_ = Rep::ExactAtoms;
    std::int64_t n_terms_ = 0;
    double harmonic_ = 0.0;
    std::vector<double> atom_values_;  // atom k (1-based) has raw weight 1/k
    double clip_ = 0.0;
    std::int64_t bins_ = 0;
    std::vector<double> masses_;  // raw 1/k mass per bin
    double clipped_raw_ = 0.0;
};

/// Streaming builder; push S_k for k = 1, 2, ... and snapshot at any N.
class LogMeasureBuilder {
public:
    explicit LogMeasureBuilder(renorm::RenormSeq seq, double time_scale = 1.0,
                               double clip = 20.0, std::int64_t exact_cap = 1000000,
                               std::int64_t histogram_bins = 4096);

    void push(double s_k);
    std::int64_t size() const { return count_; }
    LogAvgMeasure snapshot() const;

private:
    void spill_to_histogram();

    renorm::RenormSeq seq_;
    double time_scale_;
    double clip_;
    std::int64_t exact_cap_;
    std::int64_t bins_;
    std::int64_t count_ = 0;
    double harmonic_ = 0.0, comp_ = 0.0;
    bool histogram_mode_ = false;
    std::vector<double> atom_values_;
    std::vector<double> masses_;
    double clipped_raw_ = 0.0;
};

/// Bounded Lipschitz test functions for weak-convergence probes.
struct TestFunction {
    enum class Kind { Tent, SmoothStep, One };
    Kind kind = Kind::One;
    double center = 0.0;
    double halfwidth = 1.0;

    double operator()(double x) const;
    double lipschitz() const;
    /// Radius K with g = 0 off [-K, K]; infinity for One/SmoothStep.
    double support_radius() const;

    static TestFunction one() { return {}; }
    static TestFunction tent(double center, double halfwidth = 0.5) {
        return {Kind::Tent, center, halfwidth};
    }
    static TestFunction smooth_step(double center, double halfwidth = 1.0) {
        return {Kind::SmoothStep, center, halfwidth};
    }
};

/// The fixed probe suite: tents at the 17 half-integer centers of [-4, 4].
std::vector<TestFunction> tent_suite();

/**
 * nu_{N,phi,g}(x) = (1/log N) sum_{k<=N} phi(T^k x)/k g(S_k f(x) / B_k)
 * for every (phi, g) pair in one orbit pass.  Returns
 * value[phi_index][g_index].
 */
std::vector<std::vector<double>> weighted_log_average_suite(
    const systems::System& sys, const systems::Observable& f,
    std::span<const systems::Observable> phis, std::span<const TestFunction> gs,
    const renorm::RenormSeq& seq, std::int64_t n, Rng& rng);

double weighted_log_average(const systems::System& sys, const systems::Observable& f,
                            const systems::Observable& phi, const TestFunction& g,
                            const renorm::RenormSeq& seq, std::int64_t n, Rng& rng);

/// Log-averaged characteristic function at each t of the grid.
std::vector<std::complex<double>> log_avg_charfn(const systems::System& sys,
                                                 const systems::Observable& f,
                                                 const renorm::RenormSeq& seq, std::int64_t n,
                                                 std::span<const double> t_grid, Rng& rng);

/**
 * Pair (average with x_k, average with rho_k x_k) for the normalization
 * invariance check; rho defaults to rho_k = 1 + k^{-1/2}.
 */
std::pair<double, double> rescale_invariance_check(
    const systems::System& sys, const systems::Observable& f, const renorm::RenormSeq& seq,
    std::int64_t n, const TestFunction& g, Rng& rng,
    const std::function<double(std::int64_t)>& rho = {});

}  // namespace asclt::asmeasure
