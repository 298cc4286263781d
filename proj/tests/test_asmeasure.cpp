#include "doctest.h"

#include <cmath>
#include <vector>

#include "asclt/asmeasure.hpp"
#include "asclt/orbits.hpp"
#include "asclt/parallel.hpp"
#include "asclt/stats.hpp"

using namespace asclt;
using asmeasure::LogAvgMeasure;
using asmeasure::LogMeasureBuilder;
using asmeasure::TestFunction;
using systems::Observable;
using systems::System;

namespace {

LogAvgMeasure doubling_cos_measure(std::int64_t n, std::uint64_t seed,
                                   double sigma_scale = 1.0) {
    const auto sys = System::doubling();
    const auto f = Observable::fourier({{1, 1.0}});
    LogMeasureBuilder builder(renorm::RenormSeq::sqrt());
    Rng rng(seed);
    orbits::run_orbit(sys, f, n, rng, {},
                      [&](std::int64_t, double s_k, const systems::Point&) {
                          builder.push(s_k / sigma_scale);
                      });
    return builder.snapshot();
}

}  // namespace

TEST_SUITE_BEGIN("asmeasure");

TEST_CASE("zero observable gives the point mass at 0") {
    LogMeasureBuilder builder(renorm::RenormSeq::sqrt());
    for (int k = 0; k < 1000; ++k) builder.push(0.0);
    const auto measure = builder.snapshot();
    CHECK(measure.ks_to(laws::TargetLaw::dirac0()) == doctest::Approx(0.0));
    CHECK(measure.mean() == doctest::Approx(0.0));
}

TEST_CASE("two-term measure has the hand-computed atoms") {
    LogMeasureBuilder builder(renorm::RenormSeq::sqrt());
    builder.push(0.3);             // S_1, atom 0.3 / 1
    builder.push(-0.4 * std::sqrt(2.0));  // S_2, atom -0.4
    const auto atoms = builder.snapshot().weighted_atoms();
    REQUIRE(atoms.size() == 2);
    CHECK(atoms[0].first == doctest::Approx(0.3));
    CHECK(atoms[0].second == doctest::Approx(1.0 / 1.5));
    CHECK(atoms[1].first == doctest::Approx(-0.4));
    CHECK(atoms[1].second == doctest::Approx(0.5 / 1.5));
    CHECK(builder.snapshot().normalizer() == doctest::Approx(1.5));
}

TEST_CASE("atom weights are an exact probability vector") {
    const auto measure = doubling_cos_measure(20000, 5);
    double total = 0.0, comp = 0.0;
    for (const auto& [v, w] : measure.weighted_atoms()) {
        (void)v;
        const double y = w - comp;
        const double t = total + y;
        comp = (t - total) - y;
        total = t;
    }
    CHECK(std::abs(total - 1.0) <= 1e-12);
}

TEST_CASE("builder snapshots are merge consistent") {
    const auto sys = System::doubling();
    const auto f = Observable::fourier({{1, 1.0}});
    LogMeasureBuilder incremental(renorm::RenormSeq::sqrt());
    Rng rng(99);
    std::vector<double> sums;
    orbits::run_orbit(sys, f, 5000, rng, {},
                      [&](std::int64_t, double s_k, const systems::Point&) {
                          sums.push_back(s_k);
                      });
    for (int k = 0; k < 2000; ++k) incremental.push(sums[static_cast<std::size_t>(k)]);
    const auto at_2000 = incremental.snapshot();
    for (int k = 2000; k < 5000; ++k) incremental.push(sums[static_cast<std::size_t>(k)]);
    const auto extended = incremental.snapshot();

    LogMeasureBuilder direct(renorm::RenormSeq::sqrt());
    for (double s : sums) direct.push(s);
    const auto fresh = direct.snapshot();

    const auto a = extended.weighted_atoms();
    const auto b = fresh.weighted_atoms();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].first == b[i].first);    // exact atom equality
        CHECK(a[i].second == b[i].second);
    }
    CHECK(at_2000.terms() == 2000);
}

TEST_CASE("histogram representation beyond the exact cap tracks clipped mass") {
    LogMeasureBuilder builder(renorm::RenormSeq::sqrt(), 1.0, 4.0, 1000, 256);
    Rng rng(3);
    for (int k = 1; k <= 5000; ++k)
        builder.push(rng.normal() * std::sqrt(static_cast<double>(k)));
    const auto m = builder.snapshot();
    CHECK(m.rep() == LogAvgMeasure::Rep::Histogram);
    CHECK(m.clipped_mass() < 0.01);
    double total = 0.0;
    for (const auto& [v, w] : m.weighted_atoms()) {
        (void)v;
        total += w;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    // histogram and exact-atom builds of the same data agree at KS scale
    LogMeasureBuilder exact(renorm::RenormSeq::sqrt(), 1.0, 4.0, 100000, 256);
    Rng rng2(3);
    for (int k = 1; k <= 5000; ++k)
        exact.push(rng2.normal() * std::sqrt(static_cast<double>(k)));
    CHECK(std::abs(m.ks_to(laws::TargetLaw::gaussian(1.0)) -
                   exact.snapshot().ks_to(laws::TargetLaw::gaussian(1.0))) <= 0.02);
}

TEST_CASE("asclt envelope: doubling cos measure approaches N(0, 1/2)") {
    const auto measure = doubling_cos_measure(1000000, 12);
    CHECK(measure.ks_to(laws::TargetLaw::gaussian(0.5)) <= 0.2);
    CHECK(std::isfinite(measure.mean()));
    CHECK(std::isfinite(measure.variance()));
}

TEST_CASE("harmonic-sum normalization: nu_{N,1,1} = H_N / log N") {
    const auto sys = System::doubling();
    const auto f = Observable::zero();
    Rng rng(1);
    const std::int64_t n = 100000;
    const double nu = asmeasure::weighted_log_average(
        sys, f, Observable::constant(1.0), TestFunction::one(), renorm::RenormSeq::sqrt(), n,
        rng);
    constexpr double kEulerGamma = 0.57721566490153286;
    CHECK(std::abs(nu * std::log(static_cast<double>(n)) -
                   std::log(static_cast<double>(n)) - kEulerGamma) <= 1e-3);
}

TEST_CASE("weighted log average vanishes for phi = 0") {
    const auto sys = System::doubling();
    Rng rng(2);
    const double nu = asmeasure::weighted_log_average(
        sys, Observable::fourier({{1, 1.0}}), Observable::zero(), TestFunction::tent(0.0),
        renorm::RenormSeq::sqrt(), 10000, rng);
    CHECK(nu == 0.0);
}

TEST_CASE("weighted and unweighted averages agree for a density phi") {
    const auto sys = System::doubling();
    const auto f = Observable::fourier({{1, 1.0}});
    // phi = 2 on [0, 1/2), mean 1 under Lebesgue
    const auto phi = Observable::locally_constant({2.0, 0.0});
    const std::vector<Observable> phis{phi, Observable::constant(1.0)};
    const auto gs = asmeasure::tent_suite();
    Rng rng(7);
    const auto table = asmeasure::weighted_log_average_suite(sys, f, phis, gs,
                                                             renorm::RenormSeq::sqrt(),
                                                             1000000, rng);
    double worst = 0.0;
    for (std::size_t j = 0; j < gs.size(); ++j)
        worst = std::max(worst, std::abs(table[0][j] - table[1][j]));
    CHECK(worst <= 0.1);
}

TEST_CASE("weighted/unweighted gap decreases along N in most seeds") {
    const auto sys = System::doubling();
    const auto f = Observable::fourier({{1, 1.0}});
    const auto phi = Observable::locally_constant({2.0, 0.0});
    const std::vector<std::int64_t> n_grid{10000, 100000, 1000000};
    const int seeds = 100;
    const auto g = TestFunction::tent(0.0);

    std::vector<int> monotone(seeds, 0);
    parallel_for(seeds, default_threads(), [&](std::int64_t s) {
        std::vector<double> gap;
        for (auto n : n_grid) {
            Rng rng = derive_rng(4040, static_cast<std::uint64_t>(s));
            const std::vector<Observable> phis{phi, Observable::constant(1.0)};
            const TestFunction gs[] = {g};
            const auto t = asmeasure::weighted_log_average_suite(sys, f, phis, gs,
                                                                 renorm::RenormSeq::sqrt(),
                                                                 n, rng);
            gap.push_back(std::abs(t[0][0] - t[1][0]));
        }
        monotone[static_cast<std::size_t>(s)] = gap[2] < gap[1] && gap[1] < gap[0] ? 1 : 0;
    });
    int count = 0;
    for (int m : monotone) count += m;
    CHECK(count >= 80);
}

TEST_CASE("log-averaged characteristic function fixed points") {
    const auto sys = System::doubling();
    Rng rng(11);
    const std::vector<double> ts{0.0, 1.0};
    const auto zero_vals = asmeasure::log_avg_charfn(sys, Observable::zero(),
                                                     renorm::RenormSeq::sqrt(), 1000, ts, rng);
    CHECK(std::abs(zero_vals[0] - std::complex<double>(1.0, 0.0)) <= 1e-12);
    CHECK(std::abs(zero_vals[1] - std::complex<double>(1.0, 0.0)) <= 1e-12);

    const auto vals = asmeasure::log_avg_charfn(sys, Observable::fourier({{1, 1.0}}),
                                                renorm::RenormSeq::sqrt(), 1000000, ts, rng);
    CHECK(std::abs(vals[0] - std::complex<double>(1.0, 0.0)) <= 1e-12);
    // E exp(i t W) = exp(-0.25) for W = N(0, 1/2) at t = 1
    CHECK(std::abs(vals[1] - std::complex<double>(std::exp(-0.25), 0.0)) <= 0.15);
}

TEST_CASE("rescale invariance fixed points and doubling-map magnitude") {
    const auto sys = System::doubling();
    Rng rng(13);
    // rho = 1: both averages coincide exactly
    const auto same = asmeasure::rescale_invariance_check(
        sys, Observable::fourier({{1, 1.0}}), renorm::RenormSeq::sqrt(), 10000,
        asmeasure::TestFunction::tent(0.0), rng, [](std::int64_t) { return 1.0; });
    CHECK(same.first == same.second);

    // f = 0: both averages equal g(0) H_N / log N
    const auto g = TestFunction::tent(0.0);
    const auto zero = asmeasure::rescale_invariance_check(sys, Observable::zero(),
                                                          renorm::RenormSeq::sqrt(), 10000, g,
                                                          rng);
    CHECK(zero.first == doctest::Approx(zero.second));
    CHECK(zero.first == doctest::Approx(g(0.0)).epsilon(1e-12));
}

TEST_SUITE_END();
