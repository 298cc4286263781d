#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace asclt::renorm {

/// Thrown by solve_bn when no sign change is found on [1, 1e30].
struct NoBracket : std::runtime_error {
    explicit NoBracket(const std::string& what) : std::runtime_error(what) {}
};

/**
 * Slowly varying function L, restricted to a closed set of shapes so that
 * experiment configs stay serializable:
 *   Constant    L(x) = value
 *   LogPower    L(x) = log(x)^exponent for x >= e, clamped to 1 below
 *               (the clamp keeps L positive on (0, inf))
 *   Table       log-log linear interpolation, constant beyond the grid
 */
class SlowVar {
public:
    enum class Kind { Constant, LogPower, Table };

    static SlowVar constant(double value);
    static SlowVar log_power(double exponent);
    static SlowVar table(std::vector<double> grid, std::vector<double> values);

    double operator()(double x) const;

    Kind kind() const { return kind_; }
    double value() const { return value_; }
    double exponent() const { return exponent_; }
    const std::vector<double>& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }

private:
    SlowVar() = default;

    Kind kind_ = Kind::Constant;
    double value_ = 1.0;
    double exponent_ = 0.0;
    std::vector<double> grid_, values_;
};

/**
 * Renormalization function B(x) = x^d L(x) with d > 0; the renormalizing
 * sequence is B_n = B(n).
 */
class RenormSeq {
public:
    RenormSeq(double exponent, SlowVar slow_part);

    /// B at a real argument (needed for the induced scaling B(k / m(Y))).
    double at(double x) const;

    /// B_n = B(n) for n >= 1.
    double operator()(std::int64_t n) const;

    double exponent() const { return exponent_; }
    const SlowVar& slow_part() const { return slow_part_; }

    static RenormSeq sqrt() { return RenormSeq(0.5, SlowVar::constant(1.0)); }
    static RenormSeq power(double d) { return RenormSeq(d, SlowVar::constant(1.0)); }

private:
    double exponent_;
    SlowVar slow_part_;
};

/**
 * Solves n L(x) ~ x^p for x on the monotone tail: returns x > 0 with
 * |n L(x) / x^p - 1| <= 1e-10, by bracketed root search over [1, 1e30].
 */
double solve_bn(double p, const SlowVar& L, double n);

}  // namespace asclt::renorm
