#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "asclt/rng.hpp"

namespace asclt::systems {

enum class SystemKind { Doubling, Bernoulli, Lsv };

class System;
struct Point;
Point sample_invariant(const System& sys, Rng& rng);
void step(const System& sys, Point& p);

/**
 * Simulable measure-preserving systems.
 *
 * The doubling map is simulated symbolically: a point is the leading 64 bits
 * of its binary expansion plus a lazy bit source, and the map is the left
 * shift.  Naive float doubling collapses onto 0 after ~53 steps, so this
 * representation is what makes long orbits distribution-exact.
 *
 * Bernoulli shifts keep a ring of the next 64 symbols; the geometric family
 * p_a = (1-q) q^a is sampled exactly by inverse CDF.  The LSV map
 * T(x) = x (1 + 2^a x^a) on [0,1/2), 2x - 1 on [1/2,1] is iterated in
 * 64-bit floats, which is numerically benign near the neutral fixed point.
 */
class System {
public:
    static System doubling();
    static System bernoulli(std::vector<double> symbol_probs, double tau = 0.5);
    static System bernoulli_geometric(double q, double tau = 0.5);
    static System lsv(double alpha);

    SystemKind kind() const { return kind_; }
    double tau() const { return tau_; }
    double lsv_alpha() const { return lsv_alpha_; }

    bool bernoulli_is_geometric() const { return geometric_q_ > 0.0; }
    double geometric_q() const { return geometric_q_; }
    const std::vector<double>& symbol_probs() const { return probs_; }

    /// Number of partition cells; 0 means countably infinite (geometric family).
    int n_cells() const;

    /// Stationary probability of partition cell `a`.
    double cell_probability(int a) const;

    /// Cumulative stationary mass strictly before cell `a`.
    double cell_cum_before(int a) const;

    std::string describe() const;

    /// Default-constructs as the doubling map.
    System() = default;

private:
    SystemKind kind_ = SystemKind::Doubling;
    double tau_ = 0.5;
    double lsv_alpha_ = 0.0;
    double lsv_branch_coeff_ = 0.0;  // 2^alpha
    double geometric_q_ = 0.0;
    std::vector<double> probs_, cum_;

    friend struct Point;
    friend Point sample_invariant(const System&, Rng&);
    friend void step(const System&, Point&);
};

/// Orbit state; only the members relevant to the owning system are used.
struct Point {
    std::uint64_t window = 0;                 // doubling: next 64 binary digits
    std::array<std::uint32_t, 64> symbols{};  // bernoulli: ring of next 64 symbols
    std::uint32_t head = 0;
    double x = 0.0;       // lsv coordinate
    Rng source;           // lazy extension stream
    std::uint64_t bitbuf = 0;
    int bitcnt = 0;
};

Point sample_invariant(const System& sys, Rng& rng);
void step(const System& sys, Point& p);

/// Coordinate projection: binary value for the doubling map, x for LSV, the
/// interval-encoded uniform for Bernoulli shifts.
double coordinate(const System& sys, const Point& p);

/// Uniform variate measurable with respect to the leading 64-symbol block.
double encoded_uniform(const System& sys, const Point& p);

/// Partition cell of the current point.
int cell_of(const System& sys, const Point& p);

/// Dyadic cell at `bits` resolution (doubling map only).
int cell_at_resolution(const System& sys, const Point& p, int bits);

/// d_tau(x, y) = tau^{s(x,y)}; separation capped at 64 iterates, with the
/// cap reported as distance 0.
double gm_metric(const System& sys, const Point& a, const Point& b);

/**
 * Observables over the systems above.  HeavyTail reads the uniform variate
 * encoded by the leading symbol block and pushes it through the two-sided
 * Pareto quantile, so its marginal under the invariant measure is exactly of
 * condition-III type (and it is measurable with respect to that block).
 */
class Observable {
public:
    enum class Kind { Constant, LocallyConstant, FourierSum, HeavyTail, Holder };

    static Observable zero() { return constant(0.0); }
    static Observable constant(double value);
    static Observable locally_constant(std::vector<double> cell_values);
    /// Sum of amplitude * cos(2 pi frequency x).
    static Observable fourier(std::vector<std::pair<int, double>> coeffs);
    static Observable heavy_tail(double p, double c1, double c2, bool centered);
    /// Sum of a_j |x - s_j|^gamma plus a fixed offset; gamma in (0,1].
    static Observable holder(double gamma, std::vector<std::pair<double, double>> anchors,
                             double offset = 0.0);

    Kind kind() const { return kind_; }
    double operator()(const System& sys, const Point& p) const;

    /// Evaluation from the coordinate alone (Ulam grids, LSV orbits).
    double eval_coordinate(double x) const;

    /// Lipschitz bound with respect to d_tau on partition cells; 0 for the
    /// locally constant kinds.
    double regularity_bound() const;

    /// Adds a centering shift; for Fourier sums the mean is already exactly 0.
    Observable with_offset(double offset) const;

    double heavy_p() const { return p_; }
    double heavy_c1() const { return c1_; }
    double heavy_c2() const { return c2_; }
    const std::vector<std::pair<int, double>>& fourier_coeffs() const { return coeffs_; }
    double offset() const { return offset_; }

    std::string describe() const;

private:
    Observable() = default;

    Kind kind_ = Kind::Constant;
    double value_ = 0.0;
    std::vector<double> cell_values_;
    std::vector<std::pair<int, double>> coeffs_;
    double p_ = 0.0, c1_ = 0.0, c2_ = 0.0;
    bool centered_ = false;
    double center_shift_ = 0.0;
    double gamma_ = 1.0;
    std::vector<std::pair<double, double>> anchors_;  // (amplitude, anchor)
    double offset_ = 0.0;
};

}  // namespace asclt::systems
