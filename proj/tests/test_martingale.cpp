#include "doctest.h"

#include <cmath>
#include <vector>

#include "asclt/martingale.hpp"
#include "asclt/parallel.hpp"
#include "asclt/stats.hpp"

using namespace asclt;
using martingale::CosinePoly;
using martingale::GordinDecomposition;
using systems::Observable;
using systems::System;

TEST_SUITE_BEGIN("martingale");

TEST_CASE("doubling transfer on cosine polynomials halves even frequencies") {
    // L cos(2 pi x) = 0, L cos(4 pi x) = cos(2 pi x)
    CHECK(martingale::doubling_transfer({{1, 1.0}}).empty());
    const auto image = martingale::doubling_transfer({{2, 1.0}});
    REQUIRE(image.size() == 1);
    CHECK(image.at(1) == doctest::Approx(1.0));
}

TEST_CASE("exact decomposition of cos(2 pi x): g = 0, h = f") {
    const auto dec = martingale::gordin_decompose(System::doubling(),
                                                  Observable::fourier({{1, 1.0}}), 64,
                                                  GordinDecomposition::Rep::FourierExact);
    CHECK(dec.g_poly().empty());
    REQUIRE(dec.h_poly().size() == 1);
    CHECK(dec.h_poly().at(1) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("exact decomposition of cos(2 pi x) + cos(4 pi x)") {
    const auto f = Observable::fourier({{1, 1.0}, {2, 1.0}});
    const auto dec = martingale::gordin_decompose(System::doubling(), f, 64,
                                                  GordinDecomposition::Rep::FourierExact);
    // g = cos(2 pi x), h = 2 cos(2 pi x), both exactly
    REQUIRE(dec.g_poly().size() == 1);
    CHECK(std::abs(dec.g_poly().at(1) - 1.0) <= 1e-12);
    REQUIRE(dec.h_poly().size() == 1);
    CHECK(std::abs(dec.h_poly().at(1) - 2.0) <= 1e-12);
    CHECK(dec.h_second_moment() == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(dec.residual_norm() == 0.0);

    // L h = 0 exactly on a dyadic Ulam grid
    CHECK(dec.transfer_annihilation_sup(System::doubling(), 4096) <= 1e-10);

    // decomposition identity f = h + g o T - g at sampled points
    Rng rng(42);
    CHECK(dec.identity_residual(System::doubling(), f, 100000, rng) <= 1e-12);
}

TEST_CASE("zero observable decomposes to zero") {
    const auto dec = martingale::gordin_decompose(System::doubling(),
                                                  Observable::fourier({{4, 0.0}}), 64,
                                                  GordinDecomposition::Rep::FourierExact);
    CHECK(dec.g_poly().empty());
    CHECK(dec.h_poly().empty());
    CHECK(dec.h_second_moment() == 0.0);
}

TEST_CASE("grid decomposition matches the exact one for a Fourier sum") {
    const auto f = Observable::fourier({{1, 1.0}, {2, 1.0}});
    const auto dec = martingale::gordin_decompose(System::doubling(), f, 60,
                                                  GordinDecomposition::Rep::UlamGrid, 4096);
    Rng rng(7);
    // piecewise-constant representation: the identity holds up to the cell
    // sampling error O(Lip(f)/G) and halves under grid refinement
    const double coarse = dec.identity_residual(System::doubling(), f, 100000, rng);
    CHECK(coarse <= 5e-3);
    const auto fine = martingale::gordin_decompose(System::doubling(), f, 60,
                                                   GordinDecomposition::Rep::UlamGrid, 8192);
    CHECK(fine.identity_residual(System::doubling(), f, 100000, rng) <= 0.75 * coarse);
    CHECK(std::abs(dec.h_second_moment() - 2.0) <= 1e-3);
    CHECK(dec.transfer_annihilation_sup(System::doubling(), 4096) <= 1e-6);
}

TEST_CASE("reverse martingale property diagnostics") {
    const auto f = Observable::fourier({{1, 1.0}, {2, 1.0}});
    const auto dec = martingale::gordin_decompose(System::doubling(), f, 64,
                                                  GordinDecomposition::Rep::FourierExact);
    const auto report = martingale::verify_reverse_md(System::doubling(), dec, 10000, 1 << 14,
                                                      2025, default_threads());
    CHECK(report.transfer_sup <= 1e-10);
    for (const auto& row : report.conditional) CHECK(row.pass);
    // Var(S_n h / sqrt(n)) -> E h^2 = 2
    CHECK(std::abs(report.var_of_normalized_sums - 2.0) <=
          3.0 * report.var_stderr);
    CHECK(std::abs(report.var_of_normalized_sums - 2.0) <= 0.06);
}

TEST_CASE("reverse-md asclt: degenerate stream gives the point mass") {
    auto stream = martingale::ReverseMDStream::dynamical(System::doubling(), CosinePoly{}, 0.0);
    const auto reports = martingale::reverse_md_asclt(stream, 1000, 2, 3, default_threads());
    for (const auto& rep : reports) {
        CHECK(rep.ks == doctest::Approx(0.0));
        CHECK(rep.quadratic_variation == doctest::Approx(0.0));
    }
}

TEST_CASE("reverse-md asclt: iid gaussian stream satisfies the envelope") {
    auto stream = martingale::ReverseMDStream::iid(laws::TargetLaw::gaussian(1.0));
    const auto reports = martingale::reverse_md_asclt(stream, 200000, 10, 99, default_threads());
    std::vector<double> ks;
    for (const auto& rep : reports) {
        ks.push_back(rep.ks);
        CHECK(std::abs(rep.quadratic_variation - 1.0) <= 0.05);
        CHECK(rep.ratio_trend_ok);
    }
    // per-orbit convergence is O(1/sqrt(log N)); at N = 2e5 the pilot median
    // sits near 0.31 (the acceptance run uses N = 1e6)
    CHECK(stats::median(ks) <= 0.38);
}

TEST_CASE("coboundary correction: g=0 gives identical measures") {
    const auto f = Observable::fourier({{1, 1.0}});
    const auto dec = martingale::gordin_decompose(System::doubling(), f, 64,
                                                  GordinDecomposition::Rep::FourierExact);
    const auto reports = martingale::coboundary_correction_check(
        System::doubling(), f, dec, renorm::RenormSeq::sqrt(), 10000, 2,
        laws::TargetLaw::gaussian(0.5), 17, default_threads());
    for (const auto& rep : reports) {
        CHECK(rep.ks_between == doctest::Approx(0.0));
        CHECK(rep.coboundary_sup == doctest::Approx(0.0));
        CHECK(rep.ks_f == doctest::Approx(rep.ks_h));
    }
}

TEST_CASE("coboundary correction: bounded g keeps the measures close") {
    const auto f = Observable::fourier({{1, 1.0}, {2, 1.0}});
    const auto dec = martingale::gordin_decompose(System::doubling(), f, 64,
                                                  GordinDecomposition::Rep::FourierExact);
    CHECK(dec.g_sup_norm() == doctest::Approx(1.0));
    const auto reports = martingale::coboundary_correction_check(
        System::doubling(), f, dec, renorm::RenormSeq::sqrt(), 1000000, 2,
        laws::TargetLaw::gaussian(2.0), 21, default_threads());
    for (const auto& rep : reports) {
        // |S_k f - S_k h| = |g - g o T^k| <= 2 ||g||_inf
        CHECK(rep.coboundary_sup <= 2.0 * dec.g_sup_norm() + 1e-9);
        // the two KS statistics track each other up to the early-atom
        // displacement: more than half the mass sits at k < 1600 where the
        // coboundary can move atoms by over 0.05
        CHECK(std::abs(rep.ks_f - rep.ks_h) <= 0.12);
        CHECK(rep.ks_between <= 0.2);
    }
}

TEST_CASE("asclt weight hypothesis b_k B_k / (B_k - B_{k-1}) stays bounded") {
    // b_k = 1/k, B_k = sqrt(k): the ratio tends to 2 from below
    double worst = 0.0;
    for (std::int64_t k = 2; k <= 1000000; k = k < 100 ? k + 1 : k * 11 / 10) {
        const double b_k = 1.0 / static_cast<double>(k);
        const double big = std::sqrt(static_cast<double>(k));
        const double prev = std::sqrt(static_cast<double>(k - 1));
        worst = std::max(worst, b_k * big / (big - prev));
    }
    CHECK(worst <= 2.01);
}

TEST_SUITE_END();
