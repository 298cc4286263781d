#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "asclt/rng.hpp"

namespace asclt::stats {

inline double mean(std::span<const double> xs) {
    if (xs.empty()) throw std::invalid_argument("stats::mean: empty input");
    double m = 0.0;
    std::size_t count = 0;
    for (double x : xs)
        m += (x - m) / static_cast<double>(++count);
    return m;
}

inline double variance(std::span<const double> xs) {
    if (xs.size() < 2) throw std::invalid_argument("stats::variance: need >= 2 samples");
    const double m = mean(xs);
    double acc = 0.0;
    for (double x : xs)
        acc += (x - m) * (x - m);
    return acc / static_cast<double>(xs.size() - 1);
}

inline double stderr_of_mean(std::span<const double> xs) {
    return std::sqrt(variance(xs) / static_cast<double>(xs.size()));
}

inline double median(std::vector<double> xs) {
    if (xs.empty()) throw std::invalid_argument("stats::median: empty input");
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

inline double quantile(std::vector<double> xs, double q) {
    if (xs.empty()) throw std::invalid_argument("stats::quantile: empty input");
    std::sort(xs.begin(), xs.end());
    const double pos = q * static_cast<double>(xs.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, xs.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return (1.0 - frac) * xs[lo] + frac * xs[hi];
}

/// Bootstrap standard error of the sample mean.
inline double bootstrap_stderr_mean(std::span<const double> xs, int resamples, Rng& rng) {
    if (xs.empty()) throw std::invalid_argument("stats::bootstrap_stderr_mean: empty input");
    std::vector<double> means;
    means.reserve(static_cast<std::size_t>(resamples));
    for (int b = 0; b < resamples; ++b) {
        double m = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const auto j = static_cast<std::size_t>(rng.next_u64() % xs.size());
            m += (xs[j] - m) / static_cast<double>(i + 1);
        }
        means.push_back(m);
    }
    const double grand = mean(means);
    double acc = 0.0;
    for (double m : means)
        acc += (m - grand) * (m - grand);
    return std::sqrt(acc / static_cast<double>(resamples - 1));
}

/// Two-sample Kolmogorov-Smirnov statistic (unweighted samples).
inline double two_sample_ks(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("stats::two_sample_ks: empty input");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

/**
 * Batch-means estimate of the asymptotic variance of a stationary series:
 * sigma^2 such that Var(S_n) ~ sigma^2 n.  Returns (sigma2, stderr).
 */
struct BatchMeans {
    double sigma2 = 0.0;
    double stderr_sigma2 = 0.0;
};

inline BatchMeans batch_means_sigma2(std::span<const double> series, std::int64_t batch_len) {
    const auto n_batches = static_cast<std::int64_t>(series.size()) / batch_len;
    if (n_batches < 8) throw std::invalid_argument("stats::batch_means_sigma2: too few batches");
    std::vector<double> batch_mean(static_cast<std::size_t>(n_batches));
    for (std::int64_t b = 0; b < n_batches; ++b) {
        double s = 0.0;
        for (std::int64_t i = 0; i < batch_len; ++i)
            s += series[static_cast<std::size_t>(b * batch_len + i)];
        batch_mean[static_cast<std::size_t>(b)] = s / static_cast<double>(batch_len);
    }
    const double v = variance(batch_mean) * static_cast<double>(batch_len);
    // relative sampling error of a variance over n_batches values
    const double rel = std::sqrt(2.0 / static_cast<double>(n_batches - 1));
    return {v, v * rel};
}

}  // namespace asclt::stats
