#include "asclt/renorm.hpp"

#include <algorithm>
#include <cmath>

namespace asclt::renorm {

namespace {
constexpr double kE = 2.718281828459045235360287;
}

SlowVar SlowVar::constant(double value) {
    if (!(value > 0.0)) throw std::invalid_argument("SlowVar::constant: value must be positive");
    SlowVar L;
    L.kind_ = Kind::Constant;
    L.value_ = value;
    return L;
}

SlowVar SlowVar::log_power(double exponent) {
    SlowVar L;
    L.kind_ = Kind::LogPower;
    L.exponent_ = exponent;
    return L;
}

SlowVar SlowVar::table(std::vector<double> grid, std::vector<double> values) {
    if (grid.size() != values.size() || grid.size() < 2)
        throw std::invalid_argument("SlowVar::table: need matching grid/values with >= 2 nodes");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0) || !(values[i] > 0.0))
            throw std::invalid_argument("SlowVar::table: grid and values must be positive");
        if (i > 0 && !(grid[i] > grid[i - 1]))
            throw std::invalid_argument("SlowVar::table: grid must be strictly increasing");
    }
    SlowVar L;
    L.kind_ = Kind::Table;
    L.grid_ = std::move(grid);
    L.values_ = std::move(values);
    return L;
}

double SlowVar::operator()(double x) const {
    switch (kind_) {
        case Kind::Constant:
            return value_;
        case Kind::LogPower:
            return x <= kE ? 1.0 : std::pow(std::log(x), exponent_);
        case Kind::Table: {
            if (x <= grid_.front()) return values_.front();
            if (x >= grid_.back()) return values_.back();
            const auto it = std::upper_bound(grid_.begin(), grid_.end(), x);
            const auto hi = static_cast<std::size_t>(it - grid_.begin());
            const auto lo = hi - 1;
            const double t = (std::log(x) - std::log(grid_[lo])) /
                             (std::log(grid_[hi]) - std::log(grid_[lo]));
            return std::exp((1.0 - t) * std::log(values_[lo]) + t * std::log(values_[hi]));
        }
    }
    return 1.0;
}

RenormSeq::RenormSeq(double exponent, SlowVar slow_part)
    : exponent_(exponent), slow_part_(std::move(slow_part)) {
    if (!(exponent > 0.0)) throw std::invalid_argument("RenormSeq: exponent d must be positive");
}

double RenormSeq::at(double x) const {
    if (!(x > 0.0)) throw std::invalid_argument("RenormSeq::at: argument must be positive");
    return std::pow(x, exponent_) * slow_part_(x);
}

double RenormSeq::operator()(std::int64_t n) const {
    if (n < 1) throw std::invalid_argument("RenormSeq: n must be >= 1");
    return at(static_cast<double>(n));
}

double solve_bn(double p, const SlowVar& L, double n) {
    if (!(p > 1.0) || !(p <= 2.0)) throw std::invalid_argument("solve_bn: p must lie in (1,2]");
    if (!(n >= 1.0)) throw std::invalid_argument("solve_bn: n must be >= 1");

    // Residual in log form: r(x) = log(n L(x)) - p log(x); decreasing on the tail.
    const auto log_residual = [&](double x) { return std::log(n * L(x)) - p * std::log(x); };

    // Scan a log grid over [1, 1e30] for a sign change.
    constexpr int kScan = 600;
    double a = 1.0, fa = log_residual(a);
    double b = 0.0, fb = 0.0;
    bool bracketed = false;
    for (int i = 1; i <= kScan; ++i) {
        b = std::pow(10.0, 30.0 * static_cast<double>(i) / kScan);
        fb = log_residual(b);
        if (fa == 0.0) return a;
        if ((fa > 0.0) != (fb > 0.0)) {
            bracketed = true;
            break;
        }
        a = b;
        fa = fb;
    }
    if (!bracketed)
        throw NoBracket("solve_bn: no sign change of n L(x) - x^p on [1, 1e30]");

    // Bisection in log x until the defining relation holds to 1e-10.
    double la = std::log(a), lb = std::log(b);
    double x = std::exp(0.5 * (la + lb));
    for (int it = 0; it < 200; ++it) {
        x = std::exp(0.5 * (la + lb));
        const double rel = n * L(x) / std::pow(x, p) - 1.0;
        if (std::abs(rel) <= 1e-10) return x;
        if ((rel > 0.0) == (fa > 0.0))
            la = std::log(x);
        else
            lb = std::log(x);
    }
    return x;
}

}  // namespace asclt::renorm
