#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <vector>

#include "asclt/laws.hpp"
#include "asclt/renorm.hpp"
#include "asclt/spectral.hpp"
#include "asclt/systems.hpp"

namespace asclt::martingale {

struct NoDecay : std::runtime_error {
    explicit NoDecay(const std::string& what) : std::runtime_error(what) {}
};

/// Cosine polynomial sum a_k cos(2 pi k x), keyed by frequency.
using CosinePoly = std::map<int, double>;

double eval_cosine_poly(const CosinePoly& poly, double x);

/// Transfer operator of the doubling map on cosine polynomials: frequency k
/// maps to k/2 when k is even and dies when k is odd.
CosinePoly doubling_transfer(const CosinePoly& poly);

/**
 * Gordin decomposition with g = sum_{n>=1} L^n f and h = f + g - g o T,
 * which satisfies L h = 0 (so h o T^n is a reverse martingale difference
 * for T^{-n} B).  Equivalently f = G - G o T + h with G = -g; the code works
 * with g throughout.
 *
 * FourierExact terminates in finitely many terms on the doubling map (each
 * application of L halves frequencies); UlamGrid truncates the Neumann sum
 * once the measured decay puts the tail below 1e-8.
 */
class GordinDecomposition {
public:
    enum class Rep { FourierExact, UlamGrid };

    Rep rep() const { return rep_; }
    int truncation() const { return truncation_; }
    double residual_norm() const { return residual_norm_; }

    const CosinePoly& f_poly() const { return f_poly_; }
    const CosinePoly& g_poly() const { return g_poly_; }
    const CosinePoly& h_poly() const { return h_poly_; }
    const spectral::UlamOperator& grid_operator() const { return *op_; }
    const std::vector<double>& g_grid() const { return g_grid_; }
    const std::vector<double>& h_grid() const { return h_grid_; }

    double eval_g(double x) const;
    double eval_h(double x) const;

    /// E h^2 (exact for cosine polynomials, grid quadrature otherwise).
    double h_second_moment() const;
    double g_sup_norm() const;

    /// Max over sampled points of |f - (h + g o T - g)|.
    double identity_residual(const systems::System& sys, const systems::Observable& f,
                             int n_samples, Rng& rng) const;

    /// Sup norm of L h on a dyadic Ulam grid of the given size.
    double transfer_annihilation_sup(const systems::System& sys, int grid) const;

private:
    friend GordinDecomposition gordin_decompose(const systems::System&,
                                                const systems::Observable&, int, Rep, int);
    Rep rep_ = Rep::FourierExact;
    int truncation_ = 0;
    double residual_norm_ = 0.0;
    CosinePoly f_poly_, g_poly_, h_poly_;
    std::shared_ptr<const spectral::UlamOperator> op_;
    std::vector<double> f_grid_, g_grid_, h_grid_;
};

GordinDecomposition gordin_decompose(const systems::System& sys, const systems::Observable& f,
                                     int max_terms, GordinDecomposition::Rep rep,
                                     int grid = 4096);

struct ConditionalMeanRow {
    int resolution = 0;       // cells conditioning the future position
    double worst_mean = 0.0;  // max over bins of |mean h|
    double worst_sigma = 0.0; // the matching 3 x stderr allowance
    bool pass = false;
};

struct ReverseMdReport {
    double transfer_sup = 0.0;          // ||L h||_inf on the grid
    std::vector<ConditionalMeanRow> conditional;
    double var_of_normalized_sums = 0.0;  // Var(S_n h / sqrt(n)) across replicas
    double var_stderr = 0.0;
    double h_second_moment = 0.0;
};

ReverseMdReport verify_reverse_md(const systems::System& sys, const GordinDecomposition& dec,
                                  int replicas, std::int64_t horizon, std::uint64_t base_seed,
                                  int threads, int grid = 4096);

/// Reverse-martingale-difference stream: i.i.d. draws from a law, or
/// h o T^n along an orbit of a system.
struct ReverseMDStream {
    enum class Kind { Iid, Dynamical };
    Kind kind = Kind::Iid;
    laws::TargetLaw law = laws::TargetLaw::gaussian(1.0);
    systems::System sys = systems::System::doubling();
    CosinePoly h;
    double zeta = 1.0;  // limiting variance

    static ReverseMDStream iid(laws::TargetLaw law);
    static ReverseMDStream dynamical(systems::System sys, CosinePoly h, double zeta);
};

struct AscltSeedReport {
    double ks = 0.0;               // log-average measure vs N(0, zeta)
    double quadratic_variation = 0.0;  // sum Z_j^2 / B_N^2 at the horizon
    double max_ratio_sup = 0.0;    // sup_k max_{j<=k} Z_j^2 / B_k^2
    bool ratio_trend_ok = false;   // block maxima of |Z_k|/B_k decreasing
};

std::vector<AscltSeedReport> reverse_md_asclt(const ReverseMDStream& stream, std::int64_t n,
                                              int seeds, std::uint64_t base_seed, int threads);

struct CoboundarySeedReport {
    double ks_f = 0.0;        // f-measure vs the target law
    double ks_h = 0.0;        // h-measure vs the target law
    double ks_between = 0.0;  // sup distance between the two measures
    double coboundary_sup = 0.0;  // max_k |S_k f - S_k h| / B_k
};

std::vector<CoboundarySeedReport> coboundary_correction_check(
    const systems::System& sys, const systems::Observable& f, const GordinDecomposition& dec,
    const renorm::RenormSeq& seq, std::int64_t n, int seeds, const laws::TargetLaw& law,
    std::uint64_t base_seed, int threads);

}  // namespace asclt::martingale
