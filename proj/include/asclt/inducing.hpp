#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "asclt/laws.hpp"
#include "asclt/orbits.hpp"
#include "asclt/renorm.hpp"
#include "asclt/rng.hpp"
#include "asclt/systems.hpp"

namespace asclt::inducing {

struct CapExceeded : std::runtime_error {
    explicit CapExceeded(const std::string& what) : std::runtime_error(what) {}
};

/// Return set Y as a union of partition cells (or dyadic refinements for the
/// doubling map), which keeps the induced LSV map Gibbs-Markov.
class ReturnSet {
public:
    enum class Kind { WholeSpace, DyadicCells, LsvRight, FirstSymbols };

    static ReturnSet whole_space();
    static ReturnSet dyadic_cells(int level, std::vector<std::uint32_t> cells);
    static ReturnSet lsv_right();
    static ReturnSet first_symbols(std::vector<std::uint32_t> symbols);

    Kind kind() const { return kind_; }
    bool contains(const systems::System& sys, const systems::Point& p) const;

    /// Exact invariant measure when known (dyadic cells, symbol sets,
    /// whole space); NaN when it must be estimated (LSV).
    double exact_measure(const systems::System& sys) const;

    std::string describe() const;

    /// Default-constructs as the whole space.
    ReturnSet() = default;

private:
    Kind kind_ = Kind::WholeSpace;
    int level_ = 0;
    std::vector<std::uint32_t> cells_;
    std::vector<char> member_;  // dyadic membership mask
};

struct InducedSystem {
    systems::System base;
    ReturnSet return_set;
    double m_y = 1.0;               // exact or estimated measure of Y
    double m_y_stderr = 0.0;        // 0 when exact
    std::int64_t cap = 100000000;   // hard error beyond this return time
};

/// Builds the induced system, estimating m(Y) by occupation fraction when it
/// is not exact.
InducedSystem make_induced(systems::System base, ReturnSet return_set, Rng& rng,
                           std::int64_t estimate_steps = 2000000,
                           std::int64_t cap = 100000000);

/// y ~ m_Y by rejection from the invariant sampler.
systems::Point sample_conditional(const InducedSystem& ind, Rng& rng);

struct InduceStep {
    std::int64_t phi = 0;        // first return time
    double f_y = 0.0;            // sum of f over the excursion
    double excursion_max = 0.0;  // max_{1<=k<=phi} |S_k f(y)|
};

/// Iterates the base map until first return; y becomes T_Y y.
InduceStep induce_step(const InducedSystem& ind, const systems::Observable& f,
                       systems::Point& y);

struct KacReport {
    double mean_phi = 0.0;
    double mean_phi_stderr = 0.0;  // bootstrap
    double m_y_estimate = 0.0;     // independent occupation estimate
    double product = 0.0;          // mean_phi x m(Y)
    double product_stderr = 0.0;
    std::vector<double> return_law;  // empirical P(phi = k), k = 1..20
};

KacReport kac_check(const InducedSystem& ind, std::int64_t n_returns, Rng& rng);

struct LiftResult {
    std::vector<double> induced;  // S^Y_{floor(n m(Y))} f_Y / B(n) per replica
    std::vector<double> direct;   // S_n f / B(n) per replica
    std::vector<orbits::ProfileRow> induced_profile;  // tight maxima, B(k/m(Y))
    struct ConditionCell {
        std::int64_t n = 0;
        double c = 0.0;
        double value = 0.0;  // n m{ y in Y : M(y) >= c B(n) }
    };
    std::vector<ConditionCell> condition_grid;
};

LiftResult lift_experiment(const InducedSystem& ind, const systems::Observable& f,
                           const renorm::RenormSeq& seq, std::int64_t n, int replicas,
                           std::span<const double> c_grid, std::uint64_t base_seed,
                           int threads);

struct AscltLiftSeed {
    double ks_induced = 0.0;  // measure of S^Y_k f_Y / B(k / m(Y)) vs the law
    double ks_direct = 0.0;   // measure of S_k f / B(k) vs the law
};

std::vector<AscltLiftSeed> asclt_lift_experiment(const InducedSystem& ind,
                                                 const systems::Observable& f,
                                                 const renorm::RenormSeq& seq, std::int64_t n,
                                                 int seeds, const laws::TargetLaw& law,
                                                 std::uint64_t base_seed, int threads);

}  // namespace asclt::inducing
