#include "doctest.h"

#include <cmath>
#include <vector>

#include "asclt/orbits.hpp"
#include "asclt/parallel.hpp"
#include "asclt/stats.hpp"

using namespace asclt;
using orbits::OrbitStats;
using systems::Observable;
using systems::System;

TEST_SUITE_BEGIN("orbits");

TEST_CASE("zero and constant observables") {
    Rng rng(1);
    const auto sys = System::doubling();
    const auto grid = orbits::geometric_grid(1000);

    const auto zero = orbits::run_orbit(sys, Observable::zero(), 1000, rng, grid);
    CHECK(zero.birkhoff == 0.0);
    CHECK(zero.running_max == 0.0);
    for (const auto& cp : zero.checkpoints) {
        CHECK(cp.birkhoff == 0.0);
        CHECK(cp.running_max == 0.0);
    }

    const auto ones = orbits::run_orbit(sys, Observable::constant(1.0), 1000, rng, grid);
    CHECK(ones.birkhoff == doctest::Approx(1000.0));
    for (const auto& cp : ones.checkpoints)
        CHECK(cp.birkhoff == doctest::Approx(static_cast<double>(cp.k)));
}

TEST_CASE("checkpoint grid is geometric, deduplicated and ends at n") {
    const auto grid = orbits::geometric_grid(1 << 14);
    CHECK(grid.front() == 1);
    CHECK(grid.back() == (1 << 14));
    for (std::size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] > grid[i - 1]);
}

TEST_CASE("running max dominates every checkpoint sum and is nondecreasing") {
    Rng rng(2);
    const auto sys = System::doubling();
    const auto f = Observable::fourier({{1, 1.0}});
    const auto grid = orbits::geometric_grid(4096);
    const auto stats = orbits::run_orbit(sys, f, 4096, rng, grid);
    double prev = 0.0;
    for (const auto& cp : stats.checkpoints) {
        CHECK(std::abs(cp.birkhoff) <= cp.running_max + 1e-12);
        CHECK(cp.running_max >= prev);
        prev = cp.running_max;
    }
}

TEST_CASE("compensated sums match a long-double recomputation") {
    Rng rng(3);
    const auto sys = System::doubling();
    const auto f = Observable::fourier({{1, 1.0}, {3, 0.5}});
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<double> values;
        Rng orbit_rng(100 + static_cast<std::uint64_t>(trial));
        auto p = systems::sample_invariant(sys, orbit_rng);
        OrbitStats stats;
        long double exact = 0.0L;
        for (int k = 0; k < 1000; ++k) {
            const double v = f(sys, p);
            stats.add(v);
            exact += static_cast<long double>(v);
            systems::step(sys, p);
        }
        CHECK(std::abs(stats.birkhoff - static_cast<double>(exact)) <= 1e-9 * 1000.0 * 1.5);
    }
    (void)rng;
}

TEST_CASE("shift identity S_{n+m}(x) = S_n(x) + S_m(T^n x)") {
    const auto sys = System::doubling();
    const auto f = Observable::fourier({{1, 1.0}});
    Rng rng(4);
    const std::int64_t n = 700, m = 400;

    systems::Point start = systems::sample_invariant(sys, rng);
    systems::Point at_n = start;  // will hold T^n x
    OrbitStats all;
    double s_n = 0.0;
    systems::Point x = start;
    for (std::int64_t k = 1; k <= n + m; ++k) {
        all.add(f(sys, x));
        systems::step(sys, x);
        if (k == n) {
            s_n = all.birkhoff;
            at_n = x;
        }
    }
    OrbitStats tail;
    systems::Point y = at_n;
    for (std::int64_t k = 1; k <= m; ++k) {
        tail.add(f(sys, y));
        systems::step(sys, y);
    }
    CHECK(std::abs(all.birkhoff - (s_n + tail.birkhoff)) <=
          1e-9 * static_cast<double>(n + m));
}

TEST_CASE("doubling cos observable has CLT variance 1/2") {
    // Green-Kubo oracle: all autocorrelations of cos(2 pi x) under the
    // doubling map vanish, so Var(S_n / sqrt(n)) = 1/2.
    const auto sys = System::doubling();
    const auto f = Observable::fourier({{1, 1.0}});
    const std::int64_t n = 1 << 14;
    const int replicas = 10000;
    std::vector<double> samples(replicas);
    parallel_for(replicas, default_threads(), [&](std::int64_t r) {
        Rng rng = derive_rng(808, static_cast<std::uint64_t>(r));
        const auto st = orbits::run_orbit(sys, f, n, rng);
        samples[static_cast<std::size_t>(r)] =
            st.birkhoff / std::sqrt(static_cast<double>(n));
    });
    CHECK(stats::variance(samples) == doctest::Approx(0.5).epsilon(0.04));
}

TEST_CASE("tight maxima: iid gaussian summands are tight, cauchy are not") {
    const int replicas = 2000;
    const std::vector<std::int64_t> grid{100, 1000, 10000};
    const auto seq = renorm::RenormSeq::sqrt();

    std::vector<OrbitStats> gauss(replicas), cauchy(replicas);
    parallel_for(replicas, default_threads(), [&](std::int64_t r) {
        Rng rng = derive_rng(17, static_cast<std::uint64_t>(r));
        OrbitStats g, c;
        std::size_t ci = 0;
        for (std::int64_t k = 1; k <= grid.back(); ++k) {
            g.add(rng.normal());
            c.add(rng.cauchy());
            if (ci < grid.size() && grid[ci] == k) {
                g.checkpoints.push_back({k, g.birkhoff, g.running_max});
                c.checkpoints.push_back({k, c.birkhoff, c.running_max});
                ++ci;
            }
        }
        gauss[static_cast<std::size_t>(r)] = std::move(g);
        cauchy[static_cast<std::size_t>(r)] = std::move(c);
    });

    const std::vector<double> c_grid{10.0};
    const auto rows = orbits::tight_maxima_profile(gauss, seq, c_grid);
    for (const auto& row : rows) CHECK(row.probability <= 0.01);

    const auto cauchy_rows = orbits::tight_maxima_profile(cauchy, seq, c_grid);
    CHECK(cauchy_rows.back().probability > cauchy_rows.front().probability);
    CHECK(cauchy_rows.back().probability > 0.5);
}

TEST_CASE("tight maxima profile is monotone nonincreasing in c") {
    Rng rng(5);
    const auto sys = System::doubling();
    const auto f = Observable::fourier({{1, 1.0}});
    const auto grid = orbits::geometric_grid(2048);
    std::vector<OrbitStats> replicas(200);
    for (auto& r : replicas) r = orbits::run_orbit(sys, f, 2048, rng, grid);
    const std::vector<double> c_grid{0.5, 1.0, 2.0, 4.0};
    const auto rows = orbits::tight_maxima_profile(replicas, renorm::RenormSeq::sqrt(), c_grid);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].n == rows[i - 1].n) CHECK(rows[i].probability <= rows[i - 1].probability);
    }
}

TEST_CASE("grid mismatch is reported") {
    Rng rng(6);
    const auto sys = System::doubling();
    const auto f = Observable::fourier({{1, 1.0}});
    const std::vector<std::int64_t> g1{10, 100};
    const std::vector<std::int64_t> g2{10, 200};
    std::vector<OrbitStats> replicas;
    replicas.push_back(orbits::run_orbit(sys, f, 200, rng, g1));
    replicas.push_back(orbits::run_orbit(sys, f, 200, rng, g2));
    const std::vector<double> c_grid{1.0};
    CHECK_THROWS_AS(
        (void)orbits::tight_maxima_profile(replicas, renorm::RenormSeq::sqrt(), c_grid),
        orbits::GridMismatch);
}

TEST_CASE("random index: trivial rules reproduce the exact sums") {
    const auto sys = System::doubling();
    const auto f = Observable::fourier({{1, 1.0}});
    const auto seq = renorm::RenormSeq::sqrt();

    const auto exact = orbits::random_index_sums(sys, f, orbits::IndexRule::exact(), 256, 500,
                                                 seq, 99, default_threads());
    for (std::size_t i = 0; i < exact.perturbed.size(); ++i) {
        CHECK(exact.perturbed[i] == exact.exact[i]);
        CHECK(exact.index_ratio[i] == 1.0);
    }

    const auto zero_perturbed = orbits::random_index_sums(
        sys, f, orbits::IndexRule::perturbed(Observable::zero()), 256, 500, seq, 99,
        default_threads());
    for (std::size_t i = 0; i < zero_perturbed.perturbed.size(); ++i)
        CHECK(zero_perturbed.perturbed[i] == zero_perturbed.exact[i]);
}

TEST_CASE("random index: perturbed sample stays close to the exact sample") {
    const auto sys = System::doubling();
    const auto f = Observable::fourier({{1, 1.0}});
    const auto seq = renorm::RenormSeq::sqrt();
    const auto rule = orbits::IndexRule::perturbed(Observable::fourier({{1, 1.0}}));
    const auto out =
        orbits::random_index_sums(sys, f, rule, 1 << 12, 4000, seq, 7, default_threads());
    CHECK(stats::two_sample_ks(out.perturbed, out.exact) <= 0.03);
    for (double ratio : out.index_ratio) CHECK(std::abs(ratio - 1.0) <= 0.05);
}

TEST_SUITE_END();
