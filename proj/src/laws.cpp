#include "asclt/laws.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace asclt::laws {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

double kahan_sum_weights(std::span<const std::pair<double, double>> atoms) {
    double s = 0.0, comp = 0.0;
    for (const auto& [value, weight] : atoms) {
        (void)value;
        const double y = weight - comp;
        const double t = s + y;
        comp = (t - s) - y;
        s = t;
    }
    return s;
}

}  // namespace

TargetLaw TargetLaw::gaussian(double sigma2) {
    if (!(sigma2 >= 0.0)) throw std::invalid_argument("TargetLaw::gaussian: sigma2 must be >= 0");
    TargetLaw law;
    law.kind_ = Kind::Gaussian;
    law.sigma2_ = sigma2;
    return law;
}

TargetLaw TargetLaw::stable(double p, double c, double beta) {
    if (!(p > 1.0 && p < 2.0)) throw std::invalid_argument("TargetLaw::stable: p must lie in (1,2)");
    if (!(c > 0.0)) throw std::invalid_argument("TargetLaw::stable: scale c must be positive");
    if (!(beta >= -1.0 && beta <= 1.0))
        throw std::invalid_argument("TargetLaw::stable: beta must lie in [-1,1]");
    TargetLaw law;
    law.kind_ = Kind::Stable;
    law.p_ = p;
    law.c_ = c;
    law.beta_ = beta;
    return law;
}

TargetLaw TargetLaw::dirac0() { return TargetLaw{}; }

bool TargetLaw::is_degenerate() const {
    return kind_ == Kind::Dirac0 || (kind_ == Kind::Gaussian && sigma2_ == 0.0);
}

std::string TargetLaw::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case Kind::Gaussian: os << "N(0," << sigma2_ << ")"; break;
        case Kind::Stable: os << "Stable(p=" << p_ << ",c=" << c_ << ",beta=" << beta_ << ")"; break;
        case Kind::Dirac0: os << "delta_0"; break;
    }
    return os.str();
}

TargetLaw stable_from_tails(double p, double c1, double c2) {
    if (!(p > 1.0 && p < 2.0)) throw std::invalid_argument("stable_from_tails: p must lie in (1,2)");
    if (!(c1 >= 0.0 && c2 >= 0.0))
        throw std::invalid_argument("stable_from_tails: tail constants must be >= 0");
    if (c1 + c2 <= 0.0) throw DegenerateTails("stable_from_tails: c1 + c2 must be positive");
    const double c = (c1 + c2) * std::tgamma(1.0 - p) * std::cos(p * kPi / 2.0);
    const double beta = (c1 - c2) / (c1 + c2);
    return TargetLaw::stable(p, c, beta);
}

std::complex<double> char_fn(const TargetLaw& law, double t) {
    switch (law.kind()) {
        case TargetLaw::Kind::Gaussian:
            return {std::exp(-0.5 * law.sigma2() * t * t), 0.0};
        case TargetLaw::Kind::Stable: {
            const double at = std::abs(t);
            const double mod = law.c() * std::pow(at, law.p());
            const double sgn = t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0);
            const double phase = mod * law.beta() * sgn * std::tan(law.p() * kPi / 2.0);
            return std::polar(std::exp(-mod), phase);
        }
        case TargetLaw::Kind::Dirac0:
            return {1.0, 0.0};
    }
    return {1.0, 0.0};
}

namespace {

double stable_cdf_gil_pelaez(const TargetLaw& law, double x) {
    const double p = law.p();
    const double c = law.c();
    const double a = c * law.beta() * std::tan(p * kPi / 2.0);  // phase coefficient

    // Deep tails: continue with the power tail matched at +-300 scale units.
    // The second-order term is O(x^-2p), so the handover error is < 1e-7
    // while the oscillation count of the integrand stays bounded.
    const double x_quad_max = 300.0 * std::pow(c, 1.0 / p);
    if (std::abs(x) > x_quad_max) {
        const double f_edge = stable_cdf_gil_pelaez(law, x > 0.0 ? x_quad_max : -x_quad_max);
        const double ratio = std::pow(std::abs(x) / x_quad_max, -p);
        return x > 0.0 ? 1.0 - (1.0 - f_edge) * ratio : f_edge * ratio;
    }

    // Integrand sin(a t^p - x t) e^{-c t^p} / t, written through sinc so the
    // t -> 0 limit (-x) is exact.
    const auto integrand = [&](double t) {
        const double tp = std::pow(t, p);
        const double y = a * tp - x * t;
        const double y_over_t = a * tp / t - x;
        const double sinc = std::abs(y) < 1e-8 ? 1.0 - y * y / 6.0 : std::sin(y) / y;
        return std::exp(-c * tp) * sinc * y_over_t;
    };

    // |phi| <= 1e-18 beyond t_cut; split into panels of about one oscillation.
    const double t_cut = std::pow(41.0 / c, 1.0 / p);
    const double omega = p * std::abs(a) * std::pow(t_cut, p - 1.0) + std::abs(x);
    const auto base_panels = std::clamp<std::int64_t>(
        static_cast<std::int64_t>(std::ceil(omega * t_cut / kPi)), 8, 400000);

    using quad = boost::math::quadrature::gauss_kronrod<double, 15>;
    const auto integrate_with = [&](std::int64_t panels) {
        double acc = 0.0;
        for (std::int64_t i = 0; i < panels; ++i) {
            const double lo = t_cut * static_cast<double>(i) / static_cast<double>(panels);
            const double hi = t_cut * static_cast<double>(i + 1) / static_cast<double>(panels);
            acc += quad::integrate(integrand, lo, hi, 6, 1e-10);
        }
        return acc;
    };

    // Panel-doubling until two resolutions agree; the difference is the
    // practical error estimate.  Values within 1e-9 of the limits are
    // snapped to them so quadrature noise cannot break monotonicity in the
    // numerically flat tails.
    const auto snap = [](double f) {
        if (f < 1e-9) return 0.0;
        if (f > 1.0 - 1e-9) return 1.0;
        return f;
    };
    double coarse = integrate_with(base_panels);
    for (std::int64_t panels = 2 * base_panels; panels <= 16 * base_panels; panels *= 2) {
        const double fine = integrate_with(panels);
        if (std::abs(fine - coarse) <= 1e-7)
            return snap(std::clamp(0.5 - fine / kPi, 0.0, 1.0));
        coarse = fine;
    }
    throw QuadratureFailure("stable cdf: Gil-Pelaez quadrature did not reach 1e-6");
}

}  // namespace

double cdf(const TargetLaw& law, double x) {
    if (law.is_degenerate()) return x < 0.0 ? 0.0 : 1.0;
    switch (law.kind()) {
        case TargetLaw::Kind::Gaussian:
            return 0.5 * std::erfc(-x / std::sqrt(2.0 * law.sigma2()));
        case TargetLaw::Kind::Stable:
            return stable_cdf_gil_pelaez(law, x);
        case TargetLaw::Kind::Dirac0:
            break;
    }
    return x < 0.0 ? 0.0 : 1.0;
}

double cdf_left(const TargetLaw& law, double x) {
    if (law.is_degenerate()) return x <= 0.0 ? 0.0 : 1.0;
    return cdf(law, x);
}

double sample(const TargetLaw& law, Rng& rng) {
    if (law.is_degenerate()) return 0.0;
    switch (law.kind()) {
        case TargetLaw::Kind::Gaussian:
            return std::sqrt(law.sigma2()) * rng.normal();
        case TargetLaw::Kind::Stable: {
            const double p = law.p();
            const double theta0 = std::atan(law.beta() * std::tan(p * kPi / 2.0)) / p;
            const double u = kPi * (rng.uniform01() - 0.5);
            const double w = rng.exponential();
            const double num = std::sin(p * (theta0 + u));
            const double den = std::pow(std::cos(p * theta0) * std::cos(u), 1.0 / p);
            const double trail = std::max(std::cos(p * theta0 + (p - 1.0) * u) / w, 1e-300);
            const double z = num / den * std::pow(trail, (1.0 - p) / p);
            return std::pow(law.c(), 1.0 / p) * z;
        }
        case TargetLaw::Kind::Dirac0:
            break;
    }
    return 0.0;
}

CdfTable::CdfTable(const TargetLaw& law, int nodes) : law_(law) {
    if (law.kind() != TargetLaw::Kind::Stable) return;  // exact evaluation is cheap
    passthrough_ = false;

    // Bracket the ~1e-5 quantiles by doubling, then tabulate on an asinh grid.
    constexpr double kTail = 1e-5;
    double hi = 1.0;
    while (cdf(law, hi) < 1.0 - kTail && hi < 1e12) hi *= 2.0;
    double lo = -1.0;
    while (cdf(law, lo) > kTail && lo > -1e12) lo *= 2.0;
    x_lo_ = lo;
    x_hi_ = hi;
    u_lo_ = std::asinh(lo);
    u_hi_ = std::asinh(hi);
    du_ = (u_hi_ - u_lo_) / static_cast<double>(nodes - 1);

    table_.resize(static_cast<std::size_t>(nodes));
    for (int i = 0; i < nodes; ++i)
        table_[static_cast<std::size_t>(i)] = cdf(law, std::sinh(u_lo_ + du_ * i));
    for (std::size_t i = 1; i < table_.size(); ++i)  // monotone clamp
        table_[i] = std::max(table_[i], table_[i - 1]);
    f_lo_ = table_.front();
    f_hi_ = table_.back();
}

double CdfTable::operator()(double x) const {
    if (passthrough_) return cdf(law_, x);
    if (x <= x_lo_) {
        // matched power tail of the stable law
        return x_lo_ < 0.0 ? f_lo_ * std::pow(x / x_lo_, -law_.p()) : 0.0;
    }
    if (x >= x_hi_)
        return 1.0 - (1.0 - f_hi_) * std::pow(x / x_hi_, -law_.p());
    const double u = std::asinh(x);
    const double pos = (u - u_lo_) / du_;
    const auto i = std::min(static_cast<std::size_t>(pos), table_.size() - 2);
    const double frac = pos - static_cast<double>(i);
    return (1.0 - frac) * table_[i] + frac * table_[i + 1];
}

namespace {

template <class CdfFn, class CdfLeftFn>
double ks_impl(std::span<const std::pair<double, double>> weighted_atoms, CdfFn&& F,
               CdfLeftFn&& F_left) {
    if (weighted_atoms.empty()) throw EmptyInput("ks_distance: no atoms");
    const double total = kahan_sum_weights(weighted_atoms);
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("ks_distance: weights must sum to 1 within 1e-12");
    std::vector<std::pair<double, double>> atoms(weighted_atoms.begin(), weighted_atoms.end());
    std::sort(atoms.begin(), atoms.end());

    double d = 0.0, cum = 0.0, comp = 0.0;
    std::size_t i = 0;
    while (i < atoms.size()) {
        const double v = atoms[i].first;
        const double before = cum;
        while (i < atoms.size() && atoms[i].first == v) {
            const double y = atoms[i].second / total - comp;
            const double t = cum + y;
            comp = (t - cum) - y;
            cum = t;
            ++i;
        }
        d = std::max(d, std::abs(before - F_left(v)));
        d = std::max(d, std::abs(cum - F(v)));
    }
    return d;
}

}  // namespace

double ks_distance(std::span<const std::pair<double, double>> weighted_atoms,
                   const TargetLaw& law) {
    return ks_impl(
        weighted_atoms, [&](double v) { return cdf(law, v); },
        [&](double v) { return cdf_left(law, v); });
}

double ks_distance(std::span<const std::pair<double, double>> weighted_atoms,
                   const CdfTable& table) {
    // tables only speed up the continuous stable laws; degenerate laws need
    // the genuine left limits
    if (table.law().kind() != TargetLaw::Kind::Stable)
        return ks_distance(weighted_atoms, table.law());
    return ks_impl(
        weighted_atoms, [&](double v) { return table(v); }, [&](double v) { return table(v); });
}

double ks_between(std::span<const std::pair<double, double>> a,
                  std::span<const std::pair<double, double>> b) {
    if (a.empty() || b.empty()) throw EmptyInput("ks_between: no atoms");
    std::vector<std::pair<double, double>> sa(a.begin(), a.end());
    std::vector<std::pair<double, double>> sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    const double ta = kahan_sum_weights(sa);
    const double tb = kahan_sum_weights(sb);

    double d = 0.0, ca = 0.0, cb = 0.0;
    std::size_t i = 0, j = 0;
    while (i < sa.size() || j < sb.size()) {
        double v;
        if (j >= sb.size() || (i < sa.size() && sa[i].first <= sb[j].first))
            v = sa[i].first;
        else
            v = sb[j].first;
        while (i < sa.size() && sa[i].first <= v) ca += sa[i++].second / ta;
        while (j < sb.size() && sb[j].first <= v) cb += sb[j++].second / tb;
        d = std::max(d, std::abs(ca - cb));
    }
    return d;
}

TailClass TailClass::condition_i() {
    TailClass tc;
    tc.condition = Condition::I;
    tc.p = 2.0;
    tc.slow_part = renorm::SlowVar::constant(1.0);
    return tc;
}

TailClass TailClass::condition_ii(renorm::SlowVar ell_based_L) {
    TailClass tc;
    tc.condition = Condition::II;
    tc.p = 2.0;
    tc.slow_part = std::move(ell_based_L);
    return tc;
}

TailClass TailClass::condition_iii(double p, double c1, double c2, renorm::SlowVar L) {
    if (!(p > 1.0 && p < 2.0))
        throw std::invalid_argument("TailClass::condition_iii: p must lie in (1,2)");
    if (!(c1 + c2 > 0.0))
        throw std::invalid_argument("TailClass::condition_iii: c1 + c2 must be positive");
    TailClass tc;
    tc.condition = Condition::III;
    tc.p = p;
    tc.c1 = c1;
    tc.c2 = c2;
    tc.slow_part = std::move(L);
    return tc;
}

namespace {

/// Hill estimator of the tail index on the top-k order statistics.
double hill_exponent(std::vector<double>& tail, std::size_t k) {
    if (tail.size() < 10 || k < 5) return 0.0;
    k = std::min(k, tail.size() - 1);
    std::nth_element(tail.begin(), tail.begin() + static_cast<std::ptrdiff_t>(k), tail.end(),
                     std::greater<>());
    const double threshold = tail[k];
    if (!(threshold > 0.0)) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < k; ++i) acc += std::log(tail[i] / threshold);
    return acc > 0.0 ? static_cast<double>(k) / acc : 0.0;
}

}  // namespace

TailDiagnostics classify_tail(std::span<const double> samples, const TailClass& candidate) {
    if (samples.size() < 10000)
        throw std::invalid_argument("classify_tail: need at least 1e4 samples");
    const auto n = samples.size();

    std::vector<double> upper, lower;
    upper.reserve(n / 2);
    lower.reserve(n / 2);
    for (double x : samples) {
        if (x > 0.0) upper.push_back(x);
        else if (x < 0.0) lower.push_back(-x);
    }

    TailDiagnostics diag;
    const auto k_of = [](std::size_t m) {
        return static_cast<std::size_t>(std::pow(static_cast<double>(m), 0.6));
    };
    diag.upper_exponent = hill_exponent(upper, upper.empty() ? 0 : k_of(upper.size()));
    diag.lower_exponent = hill_exponent(lower, lower.empty() ? 0 : k_of(lower.size()));

    // Tail-constant estimates at a common |f| threshold.
    std::vector<double> abs_vals(samples.begin(), samples.end());
    for (double& x : abs_vals) x = std::abs(x);
    const std::size_t k = k_of(n);
    std::nth_element(abs_vals.begin(), abs_vals.begin() + static_cast<std::ptrdiff_t>(k),
                     abs_vals.end(), std::greater<>());
    const double threshold = abs_vals[k];
    const double p_pool = std::max(
        {diag.upper_exponent, diag.lower_exponent, 1.01});
    std::size_t n_up = 0, n_lo = 0;
    for (double x : samples) {
        if (x > threshold) ++n_up;
        if (x < -threshold) ++n_lo;
    }
    const double scale = std::pow(threshold, p_pool) / static_cast<double>(n);
    diag.c1_hat = static_cast<double>(n_up) * scale;
    diag.c2_hat = static_cast<double>(n_lo) * scale;
    diag.c_ratio = (n_up + n_lo) > 0
                       ? static_cast<double>(n_up) / static_cast<double>(n_up + n_lo)
                       : 0.0;

    const double tail_exp = std::max(diag.upper_exponent, diag.lower_exponent);
    if (n_up + n_lo == 0 || tail_exp > 3.5)
        diag.suggested = TailClass::Condition::I;
    else if (tail_exp >= 1.95)
        diag.suggested = TailClass::Condition::II;
    else
        diag.suggested = TailClass::Condition::III;

    // Truncated moment ratios of the candidate class on a grid of n.
    for (double grid_n : {1e2, 1e3, 1e4, 1e5, 1e6}) {
        const double b_n = candidate.condition == TailClass::Condition::I
                               ? std::sqrt(grid_n)
                               : renorm::solve_bn(candidate.p, candidate.slow_part, grid_n);
        double tail_prob = 0.0, abs_moment = 0.0, second_moment = 0.0;
        for (double x : samples) {
            const double ax = std::abs(x);
            if (ax > b_n) {
                tail_prob += 1.0;
                abs_moment += ax;
            } else {
                second_moment += x * x;
            }
        }
        const double inv_n = 1.0 / static_cast<double>(n);
        diag.moment_rows.push_back({grid_n, grid_n * tail_prob * inv_n,
                                    grid_n * abs_moment * inv_n / b_n,
                                    grid_n * second_moment * inv_n / (b_n * b_n)});
    }
    return diag;
}

double two_sided_pareto_quantile(double p, double c1, double c2, double u) {
    const double s = c1 + c2;
    if (!(s > 0.0)) throw DegenerateTails("two_sided_pareto_quantile: c1 + c2 must be positive");
    u = std::clamp(u, 0x1.0p-64, 1.0 - 0x1.0p-64);
    if (u < c2 / s) return -std::pow(c2 / u, 1.0 / p);
    return std::pow(c1 / (1.0 - u), 1.0 / p);
}

double two_sided_pareto_mean(double p, double c1, double c2) {
    const double s = c1 + c2;
    if (!(s > 0.0)) throw DegenerateTails("two_sided_pareto_mean: c1 + c2 must be positive");
    return p / (p - 1.0) * (c1 - c2) * std::pow(s, 1.0 / p - 1.0);
}

}  // namespace asclt::laws
