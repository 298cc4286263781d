#include "asclt/asmeasure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "asclt/orbits.hpp"

namespace asclt::asmeasure {

std::vector<std::pair<double, double>> LogAvgMeasure::weighted_atoms() const {
    std::vector<std::pair<double, double>> atoms;
    if (rep_ == Rep::ExactAtoms) {
        atoms.reserve(atom_values_.size());
        for (std::size_t i = 0; i < atom_values_.size(); ++i)
            atoms.emplace_back(atom_values_[i],
                               1.0 / static_cast<double>(i + 1) / harmonic_);
    } else {
        atoms.reserve(static_cast<std::size_t>(bins_) + 2);
        const double width = 2.0 * clip_ / static_cast<double>(bins_);
        for (std::int64_t b = 0; b < bins_; ++b) {
            const double mass = masses_[static_cast<std::size_t>(b)];
            if (mass > 0.0)
                atoms.emplace_back(-clip_ + width * (static_cast<double>(b) + 0.5),
                                   mass / harmonic_);
        }
        if (clipped_raw_ > 0.0) atoms.emplace_back(clip_, clipped_raw_ / harmonic_);
    }
    return atoms;
}

double LogAvgMeasure::ks_to(const laws::TargetLaw& law) const {
    return laws::ks_distance(weighted_atoms(), law);
}

double LogAvgMeasure::ks_to(const laws::CdfTable& table) const {
    return laws::ks_distance(weighted_atoms(), table);
}

double LogAvgMeasure::mean() const {
    double m = 0.0;
    for (const auto& [v, w] : weighted_atoms()) m += v * w;
    return m;
}

double LogAvgMeasure::variance() const {
    const double m = mean();
    double acc = 0.0;
    for (const auto& [v, w] : weighted_atoms()) acc += w * (v - m) * (v - m);
    return acc;
}

LogMeasureBuilder::LogMeasureBuilder(renorm::RenormSeq seq, double time_scale, double clip,
                                     std::int64_t exact_cap, std::int64_t histogram_bins)
    : seq_(std::move(seq)),
      time_scale_(time_scale),
      clip_(clip),
      exact_cap_(exact_cap),
      bins_(histogram_bins) {
    if (!(time_scale > 0.0))
        throw std::invalid_argument("LogMeasureBuilder: time_scale must be positive");
    if (!(clip > 0.0)) throw std::invalid_argument("LogMeasureBuilder: clip must be positive");
}

void LogMeasureBuilder::spill_to_histogram() {
    masses_.assign(static_cast<std::size_t>(bins_), 0.0);
    clipped_raw_ = 0.0;
    const double width = 2.0 * clip_ / static_cast<double>(bins_);
    for (std::size_t i = 0; i < atom_values_.size(); ++i) {
        const double w = 1.0 / static_cast<double>(i + 1);
        const double v = atom_values_[i];
        if (std::abs(v) >= clip_) {
            clipped_raw_ += w;
        } else {
            const auto b = static_cast<std::size_t>((v + clip_) / width);
            masses_[std::min(b, masses_.size() - 1)] += w;
        }
    }
    atom_values_.clear();
    atom_values_.shrink_to_fit();
    histogram_mode_ = true;
}

void LogMeasureBuilder::push(double s_k) {
    ++count_;
    const double k = static_cast<double>(count_);
    const double b_k = seq_.at(k / time_scale_);
    const double atom = s_k / b_k;

    const double y = 1.0 / k - comp_;
    const double t = harmonic_ + y;
    comp_ = (t - harmonic_) - y;
    harmonic_ = t;

    if (!histogram_mode_) {
        atom_values_.push_back(atom);
        if (count_ > exact_cap_) spill_to_histogram();
        return;
    }
    if (std::abs(atom) >= clip_) {
        clipped_raw_ += 1.0 / k;
    } else {
        const double width = 2.0 * clip_ / static_cast<double>(bins_);
        const auto b = static_cast<std::size_t>((atom + clip_) / width);
        masses_[std::min(b, masses_.size() - 1)] += 1.0 / k;
    }
}

LogAvgMeasure LogMeasureBuilder::snapshot() const {
    if (count_ == 0) throw std::logic_error("LogMeasureBuilder::snapshot: no terms pushed");
    LogAvgMeasure m;
    m.n_terms_ = count_;
    m.harmonic_ = harmonic_;
    m.clip_ = clip_;
    if (!histogram_mode_) {
        m.rep_ = LogAvgMeasure::Rep::ExactAtoms;
        m.atom_values_ = atom_values_;
    } else {
        m.rep_ = LogAvgMeasure::Rep::Histogram;
        m.bins_ = bins_;
        m.masses_ = masses_;
        m.clipped_raw_ = clipped_raw_;
    }
    return m;
}

double TestFunction::operator()(double x) const {
    switch (kind) {
        case Kind::One:
            return 1.0;
        case Kind::Tent: {
            const double t = 1.0 - std::abs(x - center) / halfwidth;
            return t > 0.0 ? t : 0.0;
        }
        case Kind::SmoothStep: {
            if (x <= center - halfwidth) return 1.0;
            if (x >= center + halfwidth) return 0.0;
            return (center + halfwidth - x) / (2.0 * halfwidth);
        }
    }
    return 0.0;
}

double TestFunction::lipschitz() const {
    switch (kind) {
        case Kind::One: return 0.0;
        case Kind::Tent: return 1.0 / halfwidth;
        case Kind::SmoothStep: return 0.5 / halfwidth;
    }
    return 0.0;
}

double TestFunction::support_radius() const {
    switch (kind) {
        case Kind::One:
        case Kind::SmoothStep:
            return std::numeric_limits<double>::infinity();
        case Kind::Tent:
            return std::abs(center) + halfwidth;
    }
    return 0.0;
}

std::vector<TestFunction> tent_suite() {
    std::vector<TestFunction> suite;
    suite.reserve(17);
    for (int i = 0; i < 17; ++i) suite.push_back(TestFunction::tent(-4.0 + 0.5 * i, 0.5));
    return suite;
}

std::vector<std::vector<double>> weighted_log_average_suite(
    const systems::System& sys, const systems::Observable& f,
    std::span<const systems::Observable> phis, std::span<const TestFunction> gs,
    const renorm::RenormSeq& seq, std::int64_t n, Rng& rng) {
    if (n < 1) throw std::invalid_argument("weighted_log_average_suite: n must be >= 1");
    std::vector<std::vector<double>> acc(phis.size(), std::vector<double>(gs.size(), 0.0));
    std::vector<double> g_vals(gs.size());
    orbits::run_orbit(sys, f, n, rng, {},
                      [&](std::int64_t k, double s_k, const systems::Point& x) {
                          const double b_k = seq(k);
                          for (std::size_t j = 0; j < gs.size(); ++j)
                              g_vals[j] = gs[j](s_k / b_k);
                          const double inv_k = 1.0 / static_cast<double>(k);
                          for (std::size_t i = 0; i < phis.size(); ++i) {
                              const double phi_val = phis[i](sys, x) * inv_k;
                              for (std::size_t j = 0; j < gs.size(); ++j)
                                  acc[i][j] += phi_val * g_vals[j];
                          }
                      });
    const double norm = 1.0 / std::log(static_cast<double>(n));
    for (auto& row : acc)
        for (auto& v : row) v *= norm;
    return acc;
}

double weighted_log_average(const systems::System& sys, const systems::Observable& f,
                            const systems::Observable& phi, const TestFunction& g,
                            const renorm::RenormSeq& seq, std::int64_t n, Rng& rng) {
    const systems::Observable phis[] = {phi};
    const TestFunction gs[] = {g};
    return weighted_log_average_suite(sys, f, phis, gs, seq, n, rng)[0][0];
}

std::vector<std::complex<double>> log_avg_charfn(const systems::System& sys,
                                                 const systems::Observable& f,
                                                 const renorm::RenormSeq& seq, std::int64_t n,
                                                 std::span<const double> t_grid, Rng& rng) {
    if (n < 1) throw std::invalid_argument("log_avg_charfn: n must be >= 1");
    std::vector<std::complex<double>> acc(t_grid.size(), {0.0, 0.0});
    double harmonic = 0.0;
    orbits::run_orbit(sys, f, n, rng, {},
                      [&](std::int64_t k, double s_k, const systems::Point&) {
                          const double atom = s_k / seq(k);
                          const double inv_k = 1.0 / static_cast<double>(k);
                          harmonic += inv_k;
                          for (std::size_t j = 0; j < t_grid.size(); ++j) {
                              const double arg = t_grid[j] * atom;
                              acc[j] += std::complex<double>(std::cos(arg) * inv_k,
                                                             std::sin(arg) * inv_k);
                          }
                      });
    for (auto& v : acc) v /= harmonic;
    return acc;
}

std::pair<double, double> rescale_invariance_check(
    const systems::System& sys, const systems::Observable& f, const renorm::RenormSeq& seq,
    std::int64_t n, const TestFunction& g, Rng& rng,
    const std::function<double(std::int64_t)>& rho) {
    const auto rho_fn = rho ? rho : [](std::int64_t k) {
        return 1.0 + 1.0 / std::sqrt(static_cast<double>(k));
    };
    // normalized by H_N so that f = 0 gives exactly g(0) on both sides
    double plain = 0.0, rescaled = 0.0, harmonic = 0.0;
    orbits::run_orbit(sys, f, n, rng, {},
                      [&](std::int64_t k, double s_k, const systems::Point&) {
                          const double x_k = s_k / seq(k);
                          const double inv_k = 1.0 / static_cast<double>(k);
                          harmonic += inv_k;
                          plain += g(x_k) * inv_k;
                          rescaled += g(rho_fn(k) * x_k) * inv_k;
                      });
    return {plain / harmonic, rescaled / harmonic};
}

}  // namespace asclt::asmeasure
