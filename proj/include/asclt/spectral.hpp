#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "asclt/renorm.hpp"
#include "asclt/laws.hpp"
#include "asclt/rng.hpp"
#include "asclt/systems.hpp"

namespace asclt::spectral {

struct UnsupportedSystem : std::runtime_error {
    explicit UnsupportedSystem(const std::string& what) : std::runtime_error(what) {}
};
struct NoGap : std::runtime_error {
    explicit NoGap(const std::string& what) : std::runtime_error(what) {}
};
struct ExtrapolationOutOfRange : std::runtime_error {
    explicit ExtrapolationOutOfRange(const std::string& what) : std::runtime_error(what) {}
};
struct NonSummable : std::runtime_error {
    explicit NonSummable(const std::string& what) : std::runtime_error(what) {}
};

/**
 * Ulam discretization of the perturbed transfer operator L_t u = L(e^{itf} u)
 * on piecewise-constant functions.
 *
 * The t = 0 matrix is normalized by the discrete invariant density, so it is
 * real, nonnegative and row-stochastic (L1 = 1); the perturbation multiplies
 * column j by e^{i t f(midpoint_j)}.  For the doubling map on a dyadic grid
 * the t = 0 matrix is exact: L maps piecewise constants to piecewise
 * constants, and every row carries two entries of 1/2.
 */
class UlamOperator {
public:
    int grid() const { return grid_; }
    double perturbation() const { return t_; }
    const std::vector<double>& invariant_mass() const { return mass_; }
    const std::vector<double>& observable_on_cells() const { return f_cell_; }
    const std::vector<std::vector<std::pair<std::uint32_t, double>>>& rows() const {
        return rows_;
    }

    void apply(std::span<const std::complex<double>> in,
               std::span<std::complex<double>> out) const;
    void apply_real(std::span<const double> in, std::span<double> out) const;  // t = 0 only

    /// Integral against the invariant measure of a piecewise-constant rep.
    std::complex<double> integrate(std::span<const std::complex<double>> u) const;
    double integrate(std::span<const double> u) const;

    /// Max over rows of |row sum - 1| at t = 0 (constant preservation).
    double row_sum_defect() const;

private:
    friend UlamOperator build_ulam(const systems::System&, const systems::Observable&, double,
                                   int);
    int grid_ = 0;
    double t_ = 0.0;
    std::vector<std::vector<std::pair<std::uint32_t, double>>> rows_;
    std::vector<double> mass_;
    std::vector<double> f_cell_;
    std::vector<std::complex<double>> phase_;
};

/// Supported systems: doubling map, LSV map, finite-alphabet Bernoulli shift
/// (observable measurable on the cells).  Throws UnsupportedSystem otherwise.
UlamOperator build_ulam(const systems::System& sys, const systems::Observable& f, double t,
                        int grid);

struct Eigenvalue {
    std::complex<double> lambda;
    double gap;  // |lambda_2| / |lambda_1| estimate from the iteration
};

/// Power iteration with modulus normalization; NoGap when the residual decay
/// ratio stays above 0.999 after 1000 iterations.
Eigenvalue leading_eigenvalue(const UlamOperator& op);

struct EigenCurve {
    std::vector<double> ts;
    std::vector<std::complex<double>> lambdas;
    std::vector<double> gaps;
    double eps0 = 0.0;  // largest |t| with measured gap <= 0.95
};

EigenCurve build_eigen_curve(const systems::System& sys, const systems::Observable& f, int grid,
                             double t_max, int points_per_side);

/// Cubic interpolation of the curve at t; ExtrapolationOutOfRange outside.
std::complex<double> interpolate_lambda(const EigenCurve& curve, double t);

enum class GreenKuboMethod { UlamPowers, MonteCarlo };

struct GreenKubo {
    double sigma2 = 0.0;
    double error = 0.0;  // tail bound (Ulam) or 1-sigma stderr (Monte Carlo)
    std::vector<double> correlations;
};

struct GreenKuboOptions {
    int grid = 4096;                  // UlamPowers
    int mc_replicas = 24;             // MonteCarlo
    std::int64_t mc_length = 1 << 17;
    std::uint64_t seed = 1;
    int threads = 1;
};

/// sigma^2 = int f^2 dm + 2 sum_{k=1}^K int f f o T^k dm with the truncation
/// tail reported from the measured decay rate.
GreenKubo green_kubo_sigma2(const systems::System& sys, const systems::Observable& f,
                            int k_terms, GreenKuboMethod method,
                            const GreenKuboOptions& opts = {});

struct ConvergenceRow {
    double t = 0.0;
    std::int64_t n = 0;
    double gap = 0.0;  // |lambda(t/B_n)^n - E e^{itW}|
};

std::vector<ConvergenceRow> eigenvalue_convergence_check(const EigenCurve& curve,
                                                         const renorm::RenormSeq& seq,
                                                         const laws::TargetLaw& law,
                                                         std::span<const double> t_list,
                                                         std::span<const std::int64_t> n_grid);

struct CharfnResidual {
    std::complex<double> monte_carlo;
    std::complex<double> predicted;  // lambda(t)^n
    double residual = 0.0;
    double mc_stderr = 0.0;
};

CharfnResidual charfn_vs_eigen(const systems::System& sys, const systems::Observable& f,
                               double t, std::int64_t n, int replicas, const UlamOperator& op,
                               std::uint64_t base_seed, int threads);

}  // namespace asclt::spectral
