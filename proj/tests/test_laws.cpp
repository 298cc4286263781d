#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "asclt/laws.hpp"
#include "asclt/rng.hpp"
#include "asclt/stats.hpp"

using namespace asclt;
using laws::TargetLaw;

namespace {

constexpr double kSqrt2Pi = 2.5066282746310005024;

/// Unweighted empirical KS against a law, for sampler checks.
double empirical_ks(std::vector<double> xs, const laws::CdfTable& table) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = table(xs[i]);
        d = std::max(d, std::abs(static_cast<double>(i) / n - f));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
    }
    return d;
}

}  // namespace

TEST_SUITE_BEGIN("laws");

TEST_CASE("stable_from_tails reproduces the hand-evaluated constants") {
    // Gamma(-1/2) = -2 sqrt(pi), cos(3 pi / 4) = -sqrt(2)/2, product with
    // (c1 + c2) = 1 gives sqrt(2 pi).
    const auto one_sided = laws::stable_from_tails(1.5, 1.0, 0.0);
    CHECK(one_sided.c() == doctest::Approx(kSqrt2Pi).epsilon(1e-12));
    CHECK(one_sided.beta() == doctest::Approx(1.0));

    const auto symmetric = laws::stable_from_tails(1.5, 1.0, 1.0);
    CHECK(symmetric.c() == doctest::Approx(2.0 * kSqrt2Pi).epsilon(1e-12));
    CHECK(symmetric.beta() == doctest::Approx(0.0));

    for (double p : {1.2, 1.5, 1.8}) {
        const auto law = laws::stable_from_tails(p, 0.7, 0.7);
        CHECK(law.beta() == doctest::Approx(0.0));
        CHECK(law.c() > 0.0);
    }
    CHECK_THROWS_AS((void)laws::stable_from_tails(1.5, 0.0, 0.0), laws::DegenerateTails);
}

TEST_CASE("char_fn fixed points and Hermitian symmetry") {
    CHECK(laws::char_fn(TargetLaw::gaussian(1.0), 0.0) == std::complex<double>(1.0, 0.0));
    CHECK(laws::char_fn(TargetLaw::stable(1.5, 2.0, 0.5), 0.0) == std::complex<double>(1.0, 0.0));
    CHECK(laws::char_fn(TargetLaw::dirac0(), 3.0) == std::complex<double>(1.0, 0.0));
    CHECK(laws::char_fn(TargetLaw::gaussian(2.0), 1.0).real() ==
          doctest::Approx(std::exp(-1.0)).epsilon(1e-14));

    const TargetLaw laws_to_check[] = {
        TargetLaw::gaussian(0.5), TargetLaw::stable(1.5, kSqrt2Pi, 1.0),
        TargetLaw::stable(1.2, 1.0, -0.7), TargetLaw::dirac0()};
    for (const auto& law : laws_to_check) {
        for (double t : {0.1, 0.5, 1.0, 3.0, 17.0}) {
            const auto plus = laws::char_fn(law, t);
            const auto minus = laws::char_fn(law, -t);
            CHECK(std::abs(plus - std::conj(minus)) <= 1e-14);
        }
    }
}

TEST_CASE("cdf at the symmetry points") {
    CHECK(laws::cdf(TargetLaw::gaussian(1.0), 0.0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(laws::cdf(TargetLaw::stable(1.5, 2.0, 0.0), 0.0) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(laws::cdf(TargetLaw::stable(1.2, 1.0, 0.0), 0.0) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("stable cdf cross-checked against the sampler at x = 0") {
    const auto law = TargetLaw::stable(1.5, kSqrt2Pi, 1.0);
    Rng rng(20240517);
    const int n = 1000000;
    int below = 0;
    for (int i = 0; i < n; ++i)
        if (laws::sample(law, rng) <= 0.0) ++below;
    const double mc = static_cast<double>(below) / n;
    CHECK(std::abs(laws::cdf(law, 0.0) - mc) <= 3e-3);
}

TEST_CASE("cdf is monotone with correct tail limits") {
    const TargetLaw laws_to_check[] = {TargetLaw::gaussian(1.0),
                                       TargetLaw::stable(1.5, kSqrt2Pi, 1.0),
                                       TargetLaw::stable(1.8, 1.0, -0.5)};
    for (const auto& law : laws_to_check) {
        double prev = -1.0;
        for (int i = 0; i <= 1000; ++i) {
            const double x = -50.0 + 0.1 * i;
            const double f = laws::cdf(law, x);
            CHECK(f >= prev);
            CHECK(f >= 0.0);
            CHECK(f <= 1.0);
            prev = f;
        }
        // tails: within 1e-5 of the limits plus the law's own surviving tail
        // mass (heavy-tailed laws genuinely keep ~c |x|^-p beyond +-1e3).
        const double scale =
            law.kind() == TargetLaw::Kind::Stable ? std::pow(law.c(), 1.0 / law.p()) : 1.0;
        const double x_far = 1e3 * scale;
        double allowance = 1e-5;
        if (law.kind() == TargetLaw::Kind::Stable)
            allowance += 2.0 * law.c() * std::pow(x_far, -law.p());
        CHECK(1.0 - laws::cdf(law, x_far) <= allowance);
        CHECK(laws::cdf(law, -x_far) <= allowance);
    }
}

TEST_CASE("sampler fixed points and moments") {
    Rng rng(7);
    CHECK(laws::sample(TargetLaw::dirac0(), rng) == 0.0);
    CHECK(laws::sample(TargetLaw::gaussian(0.0), rng) == 0.0);

    const int n = 1000000;
    std::vector<double> draws(n);
    for (auto& d : draws) d = laws::sample(TargetLaw::gaussian(1.0), rng);
    CHECK(std::abs(stats::mean(draws)) <= 0.005);
    CHECK(stats::variance(draws) == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("stable sampler agrees with the inverted cdf") {
    Rng rng(42);
    const auto law = TargetLaw::stable(1.5, kSqrt2Pi, 1.0);
    const laws::CdfTable table(law);
    std::vector<double> draws(1000000);
    for (auto& d : draws) d = laws::sample(law, rng);
    CHECK(empirical_ks(std::move(draws), table) <= 0.002);
}

TEST_CASE("sampler/cdf consistency across the (p, beta) grid") {
    Rng rng(90210);
    for (double p : {1.2, 1.5, 1.8}) {
        for (double beta : {-1.0, 0.0, 1.0}) {
            const auto law = TargetLaw::stable(p, 1.0, beta);
            const laws::CdfTable table(law);
            std::vector<double> draws(1000000);
            for (auto& d : draws) d = laws::sample(law, rng);
            CHECK(empirical_ks(std::move(draws), table) <= 0.005);
        }
    }
}

TEST_CASE("weighted ks_distance hand cases") {
    using Atom = std::pair<double, double>;
    const std::vector<Atom> origin{{0.0, 1.0}};
    CHECK(laws::ks_distance(origin, TargetLaw::dirac0()) == doctest::Approx(0.0));
    CHECK(laws::ks_distance(origin, TargetLaw::gaussian(1.0)) == doctest::Approx(0.5).epsilon(1e-12));

    // Two atoms at +-1, weight 1/2 each, against N(0,1).  Candidate gaps are
    // |0 - Phi(-1)|, |1/2 - Phi(-1)|, |1/2 - Phi(1)|, |1 - Phi(1)|; the sup is
    // 1/2 - Phi(-1) = Phi(1) - 1/2 = 0.341344746...
    const std::vector<Atom> pair{{-1.0, 0.5}, {1.0, 0.5}};
    const double phi1 = 0.5 * std::erfc(-1.0 / std::sqrt(2.0));
    CHECK(laws::ks_distance(pair, TargetLaw::gaussian(1.0)) ==
          doctest::Approx(phi1 - 0.5).epsilon(1e-12));

    CHECK_THROWS_AS((void)laws::ks_distance(std::vector<Atom>{}, TargetLaw::dirac0()),
                    laws::EmptyInput);
    const std::vector<Atom> unnormalized{{0.0, 0.7}};
    CHECK_THROWS_AS((void)laws::ks_distance(unnormalized, TargetLaw::dirac0()),
                    std::invalid_argument);
}

TEST_CASE("ks_distance against the law's own sample meets the DKW-style bound") {
    Rng rng(5150);
    for (const auto& law : {TargetLaw::gaussian(1.0), TargetLaw::stable(1.5, 1.0, 0.5)}) {
        const int n = 10000;
        std::vector<std::pair<double, double>> atoms(n);
        for (auto& a : atoms) a = {laws::sample(law, rng), 1.0 / n};
        CHECK(laws::ks_distance(atoms, law) <= 3.0 * 1.36 / std::sqrt(static_cast<double>(n)));
    }
}

TEST_CASE("ks_between is zero on identical atom sets and sees a shift") {
    std::vector<std::pair<double, double>> a{{0.0, 0.25}, {1.0, 0.5}, {2.0, 0.25}};
    CHECK(laws::ks_between(a, a) == doctest::Approx(0.0));
    // on [1, 1.5) the two ECDFs read 0.75 and 0.25
    std::vector<std::pair<double, double>> b{{0.5, 0.25}, {1.5, 0.5}, {2.5, 0.25}};
    CHECK(laws::ks_between(a, b) == doctest::Approx(0.5));
}

TEST_CASE("two-sided Pareto quantile matches its tail law and mean") {
    // P(Z > x) = x^{-1.5} for x >= 1 when (p, c1, c2) = (1.5, 1, 0)
    CHECK(laws::two_sided_pareto_quantile(1.5, 1.0, 0.0, 0.5) ==
          doctest::Approx(std::pow(2.0, 2.0 / 3.0)).epsilon(1e-12));
    CHECK(laws::two_sided_pareto_mean(1.5, 1.0, 0.0) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(laws::two_sided_pareto_mean(1.5, 1.0, 1.0) == doctest::Approx(0.0));

    Rng rng(99);
    int exceed = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i)
        if (laws::two_sided_pareto_quantile(1.5, 1.0, 0.0, rng.uniform01()) > 4.0) ++exceed;
    CHECK(static_cast<double>(exceed) / n == doctest::Approx(std::pow(4.0, -1.5)).epsilon(0.05));
}

TEST_CASE("classify_tail diagnostics on reference samples") {
    Rng rng(1234);
    const int n = 100000;

    std::vector<double> pareto(n);
    for (auto& x : pareto) x = laws::two_sided_pareto_quantile(1.5, 1.0, 0.0, rng.uniform01());
    const auto candidate =
        laws::TailClass::condition_iii(1.5, 1.0, 0.0, renorm::SlowVar::constant(1.0));
    const auto diag = laws::classify_tail(pareto, candidate);
    CHECK(diag.suggested == laws::TailClass::Condition::III);
    CHECK(std::abs(diag.upper_exponent - 1.5) <= 0.1);
    CHECK(diag.c2_hat == doctest::Approx(0.0));
    for (const auto& row : diag.moment_rows) {
        CHECK(row.tail_prob_scaled <= 10.0);  // C/n bound with a generous C
        CHECK(row.second_moment_scaled <= 30.0);
    }

    std::vector<double> bounded(n);
    for (auto& x : bounded) x = rng.uniform01() - 0.5;
    const auto diag_bounded = laws::classify_tail(bounded, laws::TailClass::condition_i());
    CHECK(diag_bounded.suggested == laws::TailClass::Condition::I);

    std::vector<double> symmetric(n);
    for (auto& x : symmetric)
        x = laws::two_sided_pareto_quantile(1.5, 1.0, 1.0, rng.uniform01());
    const auto diag_sym = laws::classify_tail(
        symmetric, laws::TailClass::condition_iii(1.5, 1.0, 1.0, renorm::SlowVar::constant(1.0)));
    CHECK(std::abs(diag_sym.c_ratio - 0.5) <= 0.05);  // c1 ~= c2 within 10%
}

TEST_SUITE_END();
