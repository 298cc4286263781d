#include "asclt/martingale.hpp"

#include <algorithm>
#include <cmath>

#include "asclt/asmeasure.hpp"
#include "asclt/orbits.hpp"
#include "asclt/parallel.hpp"
#include "asclt/stats.hpp"

namespace asclt::martingale {

namespace {
constexpr double kTwoPi = 6.28318530717958647692528676655900577;
}

double eval_cosine_poly(const CosinePoly& poly, double x) {
    double acc = 0.0;
    for (const auto& [freq, amp] : poly) acc += amp * std::cos(kTwoPi * freq * x);
    return acc;
}

CosinePoly doubling_transfer(const CosinePoly& poly) {
    CosinePoly out;
    for (const auto& [freq, amp] : poly)
        if (freq % 2 == 0 && amp != 0.0) out[freq / 2] += amp;
    for (auto it = out.begin(); it != out.end();)
        it = it->second == 0.0 ? out.erase(it) : std::next(it);
    return out;
}

namespace {

CosinePoly compose_with_doubling(const CosinePoly& poly) {
    CosinePoly out;
    for (const auto& [freq, amp] : poly) out[2 * freq] += amp;
    return out;
}

CosinePoly poly_sum(const CosinePoly& a, const CosinePoly& b, double b_scale) {
    CosinePoly out = a;
    for (const auto& [freq, amp] : b) {
        out[freq] += b_scale * amp;
        if (out[freq] == 0.0) out.erase(freq);
    }
    return out;
}

}  // namespace

double GordinDecomposition::eval_g(double x) const {
    if (rep_ == Rep::FourierExact) return eval_cosine_poly(g_poly_, x);
    const auto g = g_grid_.size();
    auto cell = static_cast<std::size_t>(x * static_cast<double>(g));
    return g_grid_[std::min(cell, g - 1)];
}

double GordinDecomposition::eval_h(double x) const {
    if (rep_ == Rep::FourierExact) return eval_cosine_poly(h_poly_, x);
    const auto g = h_grid_.size();
    auto cell = static_cast<std::size_t>(x * static_cast<double>(g));
    return h_grid_[std::min(cell, g - 1)];
}

double GordinDecomposition::h_second_moment() const {
    if (rep_ == Rep::FourierExact) {
        double acc = 0.0;
        for (const auto& [freq, amp] : h_poly_) {
            (void)freq;
            acc += 0.5 * amp * amp;
        }
        return acc;
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < h_grid_.size(); ++i)
        acc += op_->invariant_mass()[i] * h_grid_[i] * h_grid_[i];
    return acc;
}

double GordinDecomposition::g_sup_norm() const {
    if (rep_ == Rep::FourierExact) {
        double acc = 0.0;
        for (const auto& [freq, amp] : g_poly_) {
            (void)freq;
            acc += std::abs(amp);
        }
        return acc;
    }
    double sup = 0.0;
    for (double v : g_grid_) sup = std::max(sup, std::abs(v));
    return sup;
}

double GordinDecomposition::identity_residual(const systems::System& sys,
                                              const systems::Observable& f, int n_samples,
                                              Rng& rng) const {
    double worst = 0.0;
    for (int i = 0; i < n_samples; ++i) {
        auto p = systems::sample_invariant(sys, rng);
        const double x = systems::coordinate(sys, p);
        const double fx = f(sys, p);
        auto next = p;
        systems::step(sys, next);
        const double tx = systems::coordinate(sys, next);
        // f = h + g o T - g under the g = sum L^n f convention
        const double recon = eval_h(x) + eval_g(tx) - eval_g(x);
        worst = std::max(worst, std::abs(fx - recon));
    }
    return worst;
}

double GordinDecomposition::transfer_annihilation_sup(const systems::System& sys,
                                                      int grid) const {
    const auto op = spectral::build_ulam(sys, systems::Observable::zero(), 0.0, grid);
    const auto g = static_cast<std::size_t>(op.grid());
    const double width = 1.0 / static_cast<double>(g);
    std::vector<double> h_vec(g), image(g);
    for (std::size_t j = 0; j < g; ++j)
        h_vec[j] = eval_h(width * (static_cast<double>(j) + 0.5));
    op.apply_real(h_vec, image);
    double sup = 0.0;
    for (double v : image) sup = std::max(sup, std::abs(v));
    return sup;
}

GordinDecomposition gordin_decompose(const systems::System& sys, const systems::Observable& f,
                                     int max_terms, GordinDecomposition::Rep rep, int grid) {
    GordinDecomposition dec;
    dec.rep_ = rep;

    if (rep == GordinDecomposition::Rep::FourierExact) {
        if (sys.kind() != systems::SystemKind::Doubling ||
            f.kind() != systems::Observable::Kind::FourierSum)
            throw std::invalid_argument(
                "gordin_decompose: FourierExact needs a Fourier sum on the doubling map");
        CosinePoly fp;
        for (const auto& [freq, amp] : f.fourier_coeffs())
            if (amp != 0.0) fp[freq] += amp;
        for (auto it = fp.begin(); it != fp.end();)
            it = it->second == 0.0 ? fp.erase(it) : std::next(it);
        dec.f_poly_ = fp;

        CosinePoly g_acc;
        CosinePoly power = fp;
        int terms = 0;
        while (!power.empty() && terms < 64) {
            power = doubling_transfer(power);
            g_acc = poly_sum(g_acc, power, 1.0);
            ++terms;
            if (power.empty()) break;
        }
        dec.g_poly_ = g_acc;
        dec.truncation_ = terms;
        dec.residual_norm_ = 0.0;
        // h = f + g - g o T
        dec.h_poly_ = poly_sum(poly_sum(fp, g_acc, 1.0), compose_with_doubling(g_acc), -1.0);
        return dec;
    }

    const auto op = std::make_shared<spectral::UlamOperator>(
        spectral::build_ulam(sys, f, 0.0, grid));
    const auto g = static_cast<std::size_t>(op->grid());
    std::vector<double> fc(op->observable_on_cells().begin(), op->observable_on_cells().end());
    const double mean = op->integrate(std::span<const double>(fc));
    for (double& v : fc) v -= mean;
    if (std::abs(mean) > 1e-6)
        throw std::invalid_argument("gordin_decompose: observable must be centered");

    std::vector<double> g_acc(g, 0.0), power = fc, next(g);
    double first_norm = 0.0, last_norm = 0.0;
    int k = 0;
    double residual = 1.0;
    for (k = 1; k <= max_terms; ++k) {
        op->apply_real(power, next);
        power.swap(next);
        for (std::size_t i = 0; i < g; ++i) g_acc[i] += power[i];
        double sup = 0.0;
        for (double v : power) sup = std::max(sup, std::abs(v));
        if (k == 1) first_norm = sup;
        last_norm = sup;
        if (sup <= 1e-14) {
            residual = 0.0;
            break;
        }
        if (k >= 8) {
            const double eta = std::pow(last_norm / first_norm, 1.0 / (k - 1.0));
            if (eta < 1.0) {
                residual = last_norm * eta / (1.0 - eta);
                if (residual <= 1e-8) break;
            } else if (k == max_terms) {
                throw NoDecay("gordin_decompose: transfer powers do not contract");
            }
        }
    }
    if (residual > 1e-8 && last_norm > 1e-14)
        throw NoDecay("gordin_decompose: requested residual not reached within max_terms");

    dec.op_ = op;
    dec.truncation_ = k;
    dec.residual_norm_ = residual;
    dec.f_grid_ = fc;
    dec.g_grid_ = g_acc;

    // h(mid_i) = f(mid_i) + g(mid_i) - g(T mid_i)
    dec.h_grid_.resize(g);
    const double width = 1.0 / static_cast<double>(g);
    for (std::size_t i = 0; i < g; ++i) {
        const double x = width * (static_cast<double>(i) + 0.5);
        double tx = 0.0;
        if (sys.kind() == systems::SystemKind::Doubling) {
            tx = x < 0.5 ? 2.0 * x : 2.0 * x - 1.0;
        } else if (sys.kind() == systems::SystemKind::Lsv) {
            tx = x < 0.5 ? x * (1.0 + std::pow(2.0, sys.lsv_alpha()) *
                                          std::pow(x, sys.lsv_alpha()))
                         : 2.0 * x - 1.0;
        } else {
            throw std::invalid_argument("gordin_decompose: UlamGrid needs an interval map");
        }
        auto cell = static_cast<std::size_t>(tx * static_cast<double>(g));
        cell = std::min(cell, g - 1);
        dec.h_grid_[i] = fc[i] + g_acc[i] - g_acc[cell];
    }
    return dec;
}

ReverseMdReport verify_reverse_md(const systems::System& sys, const GordinDecomposition& dec,
                                  int replicas, std::int64_t horizon, std::uint64_t base_seed,
                                  int threads, int grid) {
    ReverseMdReport report;
    report.transfer_sup = dec.transfer_annihilation_sup(sys, grid);
    report.h_second_moment = dec.h_second_moment();

    // Conditional-mean test: bin h(x) by the dyadic cell of T x.
    const int n_cond = 200000;
    for (int resolution : {2, 4, 8}) {
        const auto bits = resolution == 2 ? 1 : (resolution == 4 ? 2 : 3);
        std::vector<double> sum(static_cast<std::size_t>(resolution), 0.0);
        std::vector<double> sumsq(static_cast<std::size_t>(resolution), 0.0);
        std::vector<std::int64_t> count(static_cast<std::size_t>(resolution), 0);
        Rng rng = derive_rng(base_seed, 1000 + static_cast<std::uint64_t>(resolution));
        for (int i = 0; i < n_cond; ++i) {
            auto p = systems::sample_invariant(sys, rng);
            const double hx = dec.eval_h(systems::coordinate(sys, p));
            systems::step(sys, p);
            const auto bin = static_cast<std::size_t>(systems::cell_at_resolution(sys, p, bits));
            sum[bin] += hx;
            sumsq[bin] += hx * hx;
            ++count[bin];
        }
        ConditionalMeanRow row;
        row.resolution = resolution;
        for (std::size_t b = 0; b < sum.size(); ++b) {
            if (count[b] < 100) continue;
            const double n = static_cast<double>(count[b]);
            const double mean = sum[b] / n;
            const double var = std::max(sumsq[b] / n - mean * mean, 0.0);
            const double sigma = 3.0 * std::sqrt(var / n);
            if (std::abs(mean) > row.worst_mean) {
                row.worst_mean = std::abs(mean);
                row.worst_sigma = sigma;
            }
        }
        row.pass = row.worst_mean <= row.worst_sigma + 1e-12;
        report.conditional.push_back(row);
    }

    // Var(S_n h / sqrt(n)) across replicas vs E h^2.
    std::vector<double> normalized(static_cast<std::size_t>(replicas));
    parallel_for(replicas, threads, [&](std::int64_t r) {
        Rng rng = derive_rng(base_seed, static_cast<std::uint64_t>(r));
        auto p = systems::sample_invariant(sys, rng);
        double s = 0.0, comp = 0.0;
        for (std::int64_t k = 0; k < horizon; ++k) {
            const double y = dec.eval_h(systems::coordinate(sys, p)) - comp;
            const double t = s + y;
            comp = (t - s) - y;
            s = t;
            systems::step(sys, p);
        }
        normalized[static_cast<std::size_t>(r)] = s / std::sqrt(static_cast<double>(horizon));
    });
    report.var_of_normalized_sums = stats::variance(normalized);
    report.var_stderr =
        report.var_of_normalized_sums * std::sqrt(2.0 / static_cast<double>(replicas - 1));
    return report;
}

ReverseMDStream ReverseMDStream::iid(laws::TargetLaw law) {
    ReverseMDStream s;
    s.kind = Kind::Iid;
    s.law = law;
    s.zeta = law.kind() == laws::TargetLaw::Kind::Gaussian ? law.sigma2() : 0.0;
    return s;
}

ReverseMDStream ReverseMDStream::dynamical(systems::System sys, CosinePoly h, double zeta) {
    ReverseMDStream s;
    s.kind = Kind::Dynamical;
    s.sys = std::move(sys);
    s.h = std::move(h);
    s.zeta = zeta;
    return s;
}

std::vector<AscltSeedReport> reverse_md_asclt(const ReverseMDStream& stream, std::int64_t n,
                                              int seeds, std::uint64_t base_seed, int threads) {
    std::vector<AscltSeedReport> reports(static_cast<std::size_t>(seeds));
    const auto law = laws::TargetLaw::gaussian(stream.zeta);

    parallel_for(seeds, threads, [&](std::int64_t s) {
        Rng rng = derive_rng(base_seed, static_cast<std::uint64_t>(s));
        asmeasure::LogMeasureBuilder builder(renorm::RenormSeq::sqrt());

        systems::Point p;
        if (stream.kind == ReverseMDStream::Kind::Dynamical)
            p = systems::sample_invariant(stream.sys, rng);

        double sum = 0.0, comp = 0.0, qv = 0.0;
        double running_max_sq = 0.0, ratio_sup = 0.0;
        double early_block_max = 0.0, late_block_max = 0.0;
        const auto early_hi = static_cast<std::int64_t>(std::cbrt(static_cast<double>(n)) *
                                                        std::cbrt(static_cast<double>(n)));
        for (std::int64_t k = 1; k <= n; ++k) {
            double z;
            if (stream.kind == ReverseMDStream::Kind::Iid) {
                z = laws::sample(stream.law, rng);
            } else {
                z = eval_cosine_poly(stream.h, systems::coordinate(stream.sys, p));
                systems::step(stream.sys, p);
            }
            const double y = z - comp;
            const double t = sum + y;
            comp = (t - sum) - y;
            sum = t;
            qv += z * z;
            running_max_sq = std::max(running_max_sq, z * z);
            const double b_k_sq = static_cast<double>(k);
            ratio_sup = std::max(ratio_sup, running_max_sq / b_k_sq);
            const double step_ratio = std::abs(z) / std::sqrt(b_k_sq);
            if (k <= early_hi)
                early_block_max = std::max(early_block_max, step_ratio);
            else
                late_block_max = std::max(late_block_max, step_ratio);
            builder.push(sum);
        }
        AscltSeedReport rep;
        rep.ks = builder.snapshot().ks_to(law);
        rep.quadratic_variation = qv / static_cast<double>(n);
        rep.max_ratio_sup = ratio_sup;
        rep.ratio_trend_ok = late_block_max < early_block_max;
        reports[static_cast<std::size_t>(s)] = rep;
    });
    return reports;
}

std::vector<CoboundarySeedReport> coboundary_correction_check(
    const systems::System& sys, const systems::Observable& f, const GordinDecomposition& dec,
    const renorm::RenormSeq& seq, std::int64_t n, int seeds, const laws::TargetLaw& law,
    std::uint64_t base_seed, int threads) {
    std::vector<CoboundarySeedReport> reports(static_cast<std::size_t>(seeds));
    parallel_for(seeds, threads, [&](std::int64_t s) {
        Rng rng = derive_rng(base_seed, static_cast<std::uint64_t>(s));
        asmeasure::LogMeasureBuilder f_builder(seq), h_builder(seq);
        double sum_h = 0.0, comp_h = 0.0, cob_sup = 0.0;
        systems::Point p = systems::sample_invariant(sys, rng);
        orbits::OrbitStats f_stats;
        for (std::int64_t k = 1; k <= n; ++k) {
            f_stats.add(f(sys, p));
            const double y = dec.eval_h(systems::coordinate(sys, p)) - comp_h;
            const double t = sum_h + y;
            comp_h = (t - sum_h) - y;
            sum_h = t;
            systems::step(sys, p);
            f_builder.push(f_stats.birkhoff);
            h_builder.push(sum_h);
            cob_sup = std::max(cob_sup, std::abs(f_stats.birkhoff - sum_h) / seq(k));
        }
        CoboundarySeedReport rep;
        const auto f_measure = f_builder.snapshot();
        const auto h_measure = h_builder.snapshot();
        rep.ks_f = f_measure.ks_to(law);
        rep.ks_h = h_measure.ks_to(law);
        rep.ks_between = laws::ks_between(f_measure.weighted_atoms(), h_measure.weighted_atoms());
        rep.coboundary_sup = cob_sup;
        reports[static_cast<std::size_t>(s)] = rep;
    });
    return reports;
}

}  // namespace asclt::martingale
