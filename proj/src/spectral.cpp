#include "asclt/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "asclt/orbits.hpp"
#include "asclt/parallel.hpp"

namespace asclt::spectral {

namespace {

bool is_power_of_two(int g) { return g >= 2 && (g & (g - 1)) == 0; }

struct Branch {
    double lo, hi;                       // domain
    double (*fwd)(double, double);       // (x, alpha)
    double (*inv)(double, double);       // monotone inverse on the branch
};

double doubling_left_fwd(double x, double) { return 2.0 * x; }
double doubling_left_inv(double y, double) { return 0.5 * y; }
double doubling_right_fwd(double x, double) { return 2.0 * x - 1.0; }
double doubling_right_inv(double y, double) { return 0.5 * (y + 1.0); }

double lsv_left_fwd(double x, double alpha) {
    return x * (1.0 + std::pow(2.0, alpha) * std::pow(x, alpha));
}
double lsv_left_inv(double y, double alpha) {
    double lo = 0.0, hi = 0.5;
    for (int i = 0; i < 100; ++i) {
        const double mid = 0.5 * (lo + hi);
        (lsv_left_fwd(mid, alpha) < y ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Column-stochastic Lebesgue-Ulam masses M[i][j] = |cell_j cap T^-1 cell_i| * G.
std::vector<std::vector<std::pair<std::uint32_t, double>>> lebesgue_ulam_columns(
    const systems::System& sys, int grid) {
    std::vector<Branch> branches;
    const double alpha = sys.kind() == systems::SystemKind::Lsv ? sys.lsv_alpha() : 0.0;
    if (sys.kind() == systems::SystemKind::Doubling) {
        branches.push_back({0.0, 0.5, doubling_left_fwd, doubling_left_inv});
        branches.push_back({0.5, 1.0, doubling_right_fwd, doubling_right_inv});
    } else {
        branches.push_back({0.0, 0.5, lsv_left_fwd, lsv_left_inv});
        branches.push_back({0.5, 1.0, doubling_right_fwd, doubling_right_inv});
    }

    const double width = 1.0 / static_cast<double>(grid);
    std::vector<std::vector<std::pair<std::uint32_t, double>>> columns(
        static_cast<std::size_t>(grid));
    for (int j = 0; j < grid; ++j) {
        const double cell_lo = width * j;
        const double cell_hi = width * (j + 1);
        for (const auto& br : branches) {
            const double part_lo = std::max(cell_lo, br.lo);
            const double part_hi = std::min(cell_hi, br.hi);
            if (!(part_hi > part_lo)) continue;
            const double img_lo = br.fwd(part_lo, alpha);
            const double img_hi = br.fwd(part_hi, alpha);
            const int dest_first = std::clamp(static_cast<int>(img_lo * grid), 0, grid - 1);
            const int dest_last =
                std::clamp(static_cast<int>(std::ceil(img_hi * grid)) - 1, 0, grid - 1);
            for (int i = dest_first; i <= dest_last; ++i) {
                const double seg_lo = std::max(img_lo, width * i);
                const double seg_hi = std::min(img_hi, width * (i + 1));
                if (!(seg_hi > seg_lo)) continue;
                double pre_lo = std::clamp(br.inv(seg_lo, alpha), part_lo, part_hi);
                double pre_hi = std::clamp(br.inv(seg_hi, alpha), part_lo, part_hi);
                if (seg_lo == img_lo) pre_lo = part_lo;  // keep dyadic endpoints exact
                if (seg_hi == img_hi) pre_hi = part_hi;
                const double mass = (pre_hi - pre_lo) * grid;
                if (mass > 0.0)
                    columns[static_cast<std::size_t>(j)].push_back(
                        {static_cast<std::uint32_t>(i), mass});
            }
        }
    }
    return columns;
}

std::vector<double> stationary_mass(
    const std::vector<std::vector<std::pair<std::uint32_t, double>>>& columns) {
    const std::size_t g = columns.size();
    std::vector<double> rho(g, 1.0 / static_cast<double>(g)), next(g, 0.0);
    for (int it = 0; it < 200000; ++it) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t j = 0; j < g; ++j) {
            const double rj = rho[j];
            for (const auto& [i, w] : columns[j]) next[i] += w * rj;
        }
        double total = 0.0;
        for (double v : next) total += v;
        for (double& v : next) v /= total;
        double delta = 0.0;
        for (std::size_t i = 0; i < g; ++i) delta += std::abs(next[i] - rho[i]);
        rho.swap(next);
        if (delta <= 1e-14) break;
    }
    return rho;
}

}  // namespace

void UlamOperator::apply(std::span<const std::complex<double>> in,
                         std::span<std::complex<double>> out) const {
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        std::complex<double> acc{0.0, 0.0};
        for (const auto& [j, w] : rows_[i]) acc += w * phase_[j] * in[j];
        out[i] = acc;
    }
}

void UlamOperator::apply_real(std::span<const double> in, std::span<double> out) const {
    if (t_ != 0.0) throw std::logic_error("UlamOperator::apply_real: operator has t != 0");
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        double acc = 0.0;
        for (const auto& [j, w] : rows_[i]) acc += w * in[j];
        out[i] = acc;
    }
}

std::complex<double> UlamOperator::integrate(std::span<const std::complex<double>> u) const {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t i = 0; i < mass_.size(); ++i) acc += mass_[i] * u[i];
    return acc;
}

double UlamOperator::integrate(std::span<const double> u) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < mass_.size(); ++i) acc += mass_[i] * u[i];
    return acc;
}

double UlamOperator::row_sum_defect() const {
    double worst = 0.0;
    for (const auto& row : rows_) {
        double s = 0.0;
        for (const auto& [j, w] : row) {
            (void)j;
            s += w;
        }
        worst = std::max(worst, std::abs(s - 1.0));
    }
    return worst;
}

UlamOperator build_ulam(const systems::System& sys, const systems::Observable& f, double t,
                        int grid) {
    UlamOperator op;
    op.t_ = t;

    if (sys.kind() == systems::SystemKind::Bernoulli) {
        if (sys.bernoulli_is_geometric())
            throw UnsupportedSystem("build_ulam: infinite-alphabet Bernoulli shift");
        using OK = systems::Observable::Kind;
        if (f.kind() != OK::Constant && f.kind() != OK::LocallyConstant)
            throw UnsupportedSystem(
                "build_ulam: Bernoulli shifts need a cell-measurable observable");
        const int g = sys.n_cells();
        op.grid_ = g;
        op.mass_ = sys.symbol_probs();
        op.f_cell_.resize(static_cast<std::size_t>(g));
        op.phase_.resize(static_cast<std::size_t>(g));
        // first-symbol functions: L_t u = sum_a p_a e^{itf(a)} u(a), a rank-one block
        std::vector<std::pair<std::uint32_t, double>> row(static_cast<std::size_t>(g));
        for (int a = 0; a < g; ++a)
            row[static_cast<std::size_t>(a)] = {static_cast<std::uint32_t>(a),
                                                sys.cell_probability(a)};
        op.rows_.assign(static_cast<std::size_t>(g), row);
        for (int a = 0; a < g; ++a) {
            const double width = 1.0 / static_cast<double>(g);
            const double fa = f.kind() == OK::Constant
                                  ? f.eval_coordinate(0.0)
                                  : f.eval_coordinate(width * (a + 0.5));
            op.f_cell_[static_cast<std::size_t>(a)] = fa;
            op.phase_[static_cast<std::size_t>(a)] = std::polar(1.0, t * fa);
        }
        return op;
    }

    if (!is_power_of_two(grid))
        throw std::invalid_argument("build_ulam: grid must be a power of two >= 2");
    if (f.kind() == systems::Observable::Kind::HeavyTail &&
        sys.kind() != systems::SystemKind::Doubling)
        throw UnsupportedSystem(
            "build_ulam: heavy-tail observables need the symbolic uniform block");

    const auto columns = lebesgue_ulam_columns(sys, grid);
    const auto rho = stationary_mass(columns);

    op.grid_ = grid;
    op.mass_ = rho;
    op.rows_.assign(static_cast<std::size_t>(grid), {});
    for (std::size_t j = 0; j < columns.size(); ++j)
        for (const auto& [i, w] : columns[j])
            op.rows_[i].push_back({static_cast<std::uint32_t>(j), w * rho[j] / rho[i]});

    op.f_cell_.resize(static_cast<std::size_t>(grid));
    op.phase_.resize(static_cast<std::size_t>(grid));
    const double width = 1.0 / static_cast<double>(grid);
    for (int j = 0; j < grid; ++j) {
        const double fj = f.eval_coordinate(width * (j + 0.5));
        op.f_cell_[static_cast<std::size_t>(j)] = fj;
        op.phase_[static_cast<std::size_t>(j)] = std::polar(1.0, t * fj);
    }
    return op;
}

Eigenvalue leading_eigenvalue(const UlamOperator& op) {
    const auto g = static_cast<std::size_t>(op.grid());
    std::vector<std::complex<double>> v(g, {1.0, 0.0}), w(g);
    std::complex<double> lambda{1.0, 0.0};
    double gap_estimate = 1.0;
    double prev_residual = -1.0;
    int stable_iters = 0;

    for (int it = 0; it < 2000; ++it) {
        op.apply(v, w);
        const std::complex<double> num = op.integrate(std::span<const std::complex<double>>(w));
        const std::complex<double> den = op.integrate(std::span<const std::complex<double>>(v));
        const std::complex<double> next = num / den;

        double wnorm = 0.0;
        for (const auto& z : w) wnorm += std::norm(z);
        wnorm = std::sqrt(wnorm);
        double residual = 0.0;
        for (std::size_t i = 0; i < g; ++i) residual += std::norm(w[i] - next * v[i]);
        residual = std::sqrt(residual) / wnorm;

        if (prev_residual > 1e-300 && residual > 0.0) {
            const double ratio = residual / prev_residual;
            gap_estimate = it < 3 ? ratio : 0.5 * (gap_estimate + ratio);
        } else if (residual <= 1e-14) {
            gap_estimate = 0.0;
        }
        prev_residual = residual;

        const bool converged = std::abs(next - lambda) <= 1e-13 * std::abs(next);
        lambda = next;
        for (std::size_t i = 0; i < g; ++i) v[i] = w[i] / wnorm;

        if (converged && ++stable_iters >= 3 && it >= 5)
            return {lambda, std::clamp(gap_estimate, 0.0, 1.0)};
        if (!converged) stable_iters = 0;
        if (it == 999 && gap_estimate > 0.999)
            throw NoGap("leading_eigenvalue: residual decay ratio above 0.999");
    }
    return {lambda, std::clamp(gap_estimate, 0.0, 1.0)};
}

EigenCurve build_eigen_curve(const systems::System& sys, const systems::Observable& f, int grid,
                             double t_max, int points_per_side) {
    EigenCurve curve;
    const int total = 2 * points_per_side + 1;
    curve.ts.resize(static_cast<std::size_t>(total));
    curve.lambdas.resize(static_cast<std::size_t>(total));
    curve.gaps.resize(static_cast<std::size_t>(total));
    for (int i = 0; i < total; ++i)
        curve.ts[static_cast<std::size_t>(i)] =
            t_max * static_cast<double>(i - points_per_side) / points_per_side;

    parallel_for(total, default_threads(), [&](std::int64_t i) {
        const double t = curve.ts[static_cast<std::size_t>(i)];
        const auto op = build_ulam(sys, f, t, grid);
        const auto eig = leading_eigenvalue(op);
        curve.lambdas[static_cast<std::size_t>(i)] = eig.lambda;
        curve.gaps[static_cast<std::size_t>(i)] = eig.gap;
    });

    curve.eps0 = 0.0;
    for (int off = 0; off <= points_per_side; ++off) {
        const auto plus = static_cast<std::size_t>(points_per_side + off);
        const auto minus = static_cast<std::size_t>(points_per_side - off);
        if (curve.gaps[plus] > 0.95 || curve.gaps[minus] > 0.95) break;
        curve.eps0 = curve.ts[plus];
    }
    return curve;
}

std::complex<double> interpolate_lambda(const EigenCurve& curve, double t) {
    const auto n = curve.ts.size();
    if (n < 4 || t < curve.ts.front() || t > curve.ts.back())
        throw ExtrapolationOutOfRange("interpolate_lambda: t outside the curve grid");
    const double step = curve.ts[1] - curve.ts[0];
    auto idx = static_cast<std::ptrdiff_t>((t - curve.ts.front()) / step);
    idx = std::clamp<std::ptrdiff_t>(idx, 1, static_cast<std::ptrdiff_t>(n) - 3);
    const double u = (t - curve.ts[static_cast<std::size_t>(idx)]) / step;

    // Catmull-Rom through the four surrounding nodes, Re and Im separately.
    const auto cr = [u](double p0, double p1, double p2, double p3) {
        return p1 + 0.5 * u * (p2 - p0 +
                               u * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 +
                                    u * (3.0 * (p1 - p2) + p3 - p0)));
    };
    const auto& l = curve.lambdas;
    const auto i = static_cast<std::size_t>(idx);
    return {cr(l[i - 1].real(), l[i].real(), l[i + 1].real(), l[i + 2].real()),
            cr(l[i - 1].imag(), l[i].imag(), l[i + 1].imag(), l[i + 2].imag())};
}

GreenKubo green_kubo_sigma2(const systems::System& sys, const systems::Observable& f,
                            int k_terms, GreenKuboMethod method, const GreenKuboOptions& opts) {
    GreenKubo out;
    if (method == GreenKuboMethod::UlamPowers) {
        const auto op = build_ulam(sys, f, 0.0, opts.grid);
        const auto g = static_cast<std::size_t>(op.grid());
        std::vector<double> fc(op.observable_on_cells().begin(),
                               op.observable_on_cells().end());
        const double mean = op.integrate(std::span<const double>(fc));
        for (double& v : fc) v -= mean;

        std::vector<double> v = fc, next(g);
        const double c0 = [&] {
            double acc = 0.0;
            for (std::size_t i = 0; i < g; ++i)
                acc += op.invariant_mass()[i] * fc[i] * fc[i];
            return acc;
        }();
        out.correlations.push_back(c0);
        double sigma2 = c0;
        double norm_first = 0.0, norm_last = 0.0;
        for (int k = 1; k <= k_terms; ++k) {
            op.apply_real(v, next);
            v.swap(next);
            double ck = 0.0;
            for (std::size_t i = 0; i < g; ++i) ck += op.invariant_mass()[i] * fc[i] * v[i];
            out.correlations.push_back(ck);
            sigma2 += 2.0 * ck;
            double sup = 0.0;
            for (double x : v) sup = std::max(sup, std::abs(x));
            if (k == std::max(1, k_terms / 2)) norm_first = sup;
            if (k == k_terms) norm_last = sup;
        }
        out.sigma2 = sigma2;
        const double f_scale = std::sqrt(std::max(c0, 1e-300));
        if (norm_last <= 1e-13 * f_scale) {
            out.error = 0.0;  // correlations vanished identically
        } else {
            const double span = static_cast<double>(k_terms - std::max(1, k_terms / 2));
            const double eta = std::pow(norm_last / norm_first, 1.0 / std::max(span, 1.0));
            if (!(eta < 0.9995))
                throw NonSummable("green_kubo_sigma2: no measurable correlation decay");
            out.error = 2.0 * std::abs(out.correlations.back()) * eta / (1.0 - eta);
        }
        return out;
    }

    // Monte Carlo: independent orbits, each yielding its own correlation sums.
    const int replicas = opts.mc_replicas;
    std::vector<double> sigma2_r(static_cast<std::size_t>(replicas));
    std::vector<std::vector<double>> corr_r(static_cast<std::size_t>(replicas));
    parallel_for(replicas, opts.threads, [&](std::int64_t r) {
        Rng rng = derive_rng(opts.seed, static_cast<std::uint64_t>(r));
        auto p = systems::sample_invariant(sys, rng);
        const auto len = opts.mc_length;
        std::vector<double> series(static_cast<std::size_t>(len));
        for (std::int64_t i = 0; i < len; ++i) {
            series[static_cast<std::size_t>(i)] = f(sys, p);
            systems::step(sys, p);
        }
        double mean = 0.0;
        for (double x : series) mean += x;
        mean /= static_cast<double>(len);
        std::vector<double> corr(static_cast<std::size_t>(k_terms + 1), 0.0);
        for (int k = 0; k <= k_terms; ++k) {
            double acc = 0.0;
            for (std::int64_t i = 0; i + k < len; ++i)
                acc += (series[static_cast<std::size_t>(i)] - mean) *
                       (series[static_cast<std::size_t>(i + k)] - mean);
            corr[static_cast<std::size_t>(k)] = acc / static_cast<double>(len - k);
        }
        double s2 = corr[0];
        for (int k = 1; k <= k_terms; ++k) s2 += 2.0 * corr[static_cast<std::size_t>(k)];
        sigma2_r[static_cast<std::size_t>(r)] = s2;
        corr_r[static_cast<std::size_t>(r)] = std::move(corr);
    });

    double mean = 0.0;
    for (double s : sigma2_r) mean += s;
    mean /= static_cast<double>(replicas);
    double var = 0.0;
    for (double s : sigma2_r) var += (s - mean) * (s - mean);
    var /= static_cast<double>(replicas - 1);
    out.sigma2 = mean;
    out.error = std::sqrt(var / static_cast<double>(replicas));
    out.correlations.assign(static_cast<std::size_t>(k_terms + 1), 0.0);
    for (const auto& corr : corr_r)
        for (std::size_t k = 0; k < corr.size(); ++k)
            out.correlations[k] += corr[k] / static_cast<double>(replicas);

    // no-decay guard: the far half of the correlation sequence should not
    // dominate the near half (beyond Monte Carlo noise)
    double near = 0.0, far = 0.0;
    const std::size_t half = out.correlations.size() / 2;
    for (std::size_t k = 1; k < out.correlations.size(); ++k)
        (k < half ? near : far) += std::abs(out.correlations[k]);
    if (far > 4.0 * near && far > 0.05 * out.correlations[0] * static_cast<double>(k_terms))
        throw NonSummable("green_kubo_sigma2: correlations show no decay");
    return out;
}

std::vector<ConvergenceRow> eigenvalue_convergence_check(const EigenCurve& curve,
                                                         const renorm::RenormSeq& seq,
                                                         const laws::TargetLaw& law,
                                                         std::span<const double> t_list,
                                                         std::span<const std::int64_t> n_grid) {
    std::vector<ConvergenceRow> rows;
    rows.reserve(t_list.size() * n_grid.size());
    for (double t : t_list) {
        for (auto n : n_grid) {
            const double b_n = seq(n);
            const auto lam = interpolate_lambda(curve, t / b_n);
            const auto powered = std::pow(lam, static_cast<double>(n));
            rows.push_back({t, n, std::abs(powered - laws::char_fn(law, t))});
        }
    }
    return rows;
}

CharfnResidual charfn_vs_eigen(const systems::System& sys, const systems::Observable& f,
                               double t, std::int64_t n, int replicas, const UlamOperator& op,
                               std::uint64_t base_seed, int threads) {
    if (replicas < 10000)
        throw std::invalid_argument("charfn_vs_eigen: need at least 1e4 replicas");
    std::vector<double> re(static_cast<std::size_t>(replicas)),
        im(static_cast<std::size_t>(replicas));
    parallel_for(replicas, threads, [&](std::int64_t r) {
        Rng rng = derive_rng(base_seed, static_cast<std::uint64_t>(r));
        const auto stats = orbits::run_orbit(sys, f, n, rng);
        re[static_cast<std::size_t>(r)] = std::cos(t * stats.birkhoff);
        im[static_cast<std::size_t>(r)] = std::sin(t * stats.birkhoff);
    });
    double mr = 0.0, mi = 0.0;
    for (std::size_t i = 0; i < re.size(); ++i) {
        mr += re[i];
        mi += im[i];
    }
    mr /= static_cast<double>(replicas);
    mi /= static_cast<double>(replicas);
    double vr = 0.0, vi = 0.0;
    for (std::size_t i = 0; i < re.size(); ++i) {
        vr += (re[i] - mr) * (re[i] - mr);
        vi += (im[i] - mi) * (im[i] - mi);
    }
    const double denom = static_cast<double>(replicas) * static_cast<double>(replicas - 1);

    CharfnResidual out;
    out.monte_carlo = {mr, mi};
    out.predicted = std::pow(leading_eigenvalue(op).lambda, static_cast<double>(n));
    out.residual = std::abs(out.monte_carlo - out.predicted);
    out.mc_stderr = std::sqrt((vr + vi) / denom);
    return out;
}

}  // namespace asclt::spectral
