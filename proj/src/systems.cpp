#include "asclt/systems.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

#include "asclt/laws.hpp"

namespace asclt::systems {

namespace {
constexpr double kTwoPi = 6.28318530717958647692528676655900577;
constexpr int kLsvBurnIn = 10000;
}  // namespace

System System::doubling() {
    System s;
    s.kind_ = SystemKind::Doubling;
    s.tau_ = 0.5;
    return s;
}

System System::bernoulli(std::vector<double> symbol_probs, double tau) {
    if (symbol_probs.size() < 2)
        throw std::invalid_argument("System::bernoulli: need at least two symbols");
    double total = 0.0, comp = 0.0;
    for (double p : symbol_probs) {
        if (!(p >= 0.0)) throw std::invalid_argument("System::bernoulli: negative probability");
        const double y = p - comp;
        const double t = total + y;
        comp = (t - total) - y;
        total = t;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("System::bernoulli: probabilities must sum to 1 within 1e-12");
    if (!(tau > 0.0 && tau < 1.0))
        throw std::invalid_argument("System::bernoulli: tau must lie in (0,1)");
    System s;
    s.kind_ = SystemKind::Bernoulli;
    s.tau_ = tau;
    s.probs_ = std::move(symbol_probs);
    s.cum_.resize(s.probs_.size() + 1, 0.0);
    for (std::size_t i = 0; i < s.probs_.size(); ++i) s.cum_[i + 1] = s.cum_[i] + s.probs_[i];
    return s;
}

System System::bernoulli_geometric(double q, double tau) {
    if (!(q > 0.0 && q < 1.0))
        throw std::invalid_argument("System::bernoulli_geometric: q must lie in (0,1)");
    if (!(tau > 0.0 && tau < 1.0))
        throw std::invalid_argument("System::bernoulli_geometric: tau must lie in (0,1)");
    System s;
    s.kind_ = SystemKind::Bernoulli;
    s.tau_ = tau;
    s.geometric_q_ = q;
    return s;
}

System System::lsv(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("System::lsv: alpha must lie in (0,1)");
    System s;
    s.kind_ = SystemKind::Lsv;
    s.tau_ = 0.5;
    s.lsv_alpha_ = alpha;
    s.lsv_branch_coeff_ = std::pow(2.0, alpha);
    return s;
}

int System::n_cells() const {
    switch (kind_) {
        case SystemKind::Doubling: return 2;
        case SystemKind::Bernoulli:
            return geometric_q_ > 0.0 ? 0 : static_cast<int>(probs_.size());
        case SystemKind::Lsv: return 2;
    }
    return 0;
}

double System::cell_probability(int a) const {
    if (kind_ != SystemKind::Bernoulli)
        throw std::logic_error("cell_probability: only defined for Bernoulli shifts");
    if (geometric_q_ > 0.0)
        return (1.0 - geometric_q_) * std::pow(geometric_q_, a);
    return a < static_cast<int>(probs_.size()) ? probs_[static_cast<std::size_t>(a)] : 0.0;
}

double System::cell_cum_before(int a) const {
    if (kind_ != SystemKind::Bernoulli)
        throw std::logic_error("cell_cum_before: only defined for Bernoulli shifts");
    if (geometric_q_ > 0.0)
        return 1.0 - std::pow(geometric_q_, a);
    const auto idx = std::min<std::size_t>(static_cast<std::size_t>(a), probs_.size());
    return cum_[idx];
}

std::string System::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case SystemKind::Doubling: os << "doubling"; break;
        case SystemKind::Bernoulli:
            if (geometric_q_ > 0.0)
                os << "bernoulli(geometric q=" << geometric_q_ << ")";
            else
                os << "bernoulli(" << probs_.size() << " symbols)";
            break;
        case SystemKind::Lsv: os << "lsv(alpha=" << lsv_alpha_ << ")"; break;
    }
    return os.str();
}

namespace {

std::uint32_t draw_symbol(const System& sys, Rng& rng) {
    if (sys.bernoulli_is_geometric()) {
        const double u = rng.uniform01_open();
        const double a = std::floor(std::log(u) / std::log(sys.geometric_q()));
        return a < 0.0 ? 0u : static_cast<std::uint32_t>(a);
    }
    const auto& probs = sys.symbol_probs();
    double u = rng.uniform01();
    for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
        if (u < probs[i]) return static_cast<std::uint32_t>(i);
        u -= probs[i];
    }
    return static_cast<std::uint32_t>(probs.size() - 1);
}

}  // namespace

Point sample_invariant(const System& sys, Rng& rng) {
    Point p;
    p.source = Rng(rng.next_u64());
    switch (sys.kind()) {
        case SystemKind::Doubling:
            p.window = rng.next_u64();
            break;
        case SystemKind::Bernoulli:
            for (auto& s : p.symbols) s = draw_symbol(sys, p.source);
            p.head = 0;
            break;
        case SystemKind::Lsv: {
            p.x = rng.uniform01_open();
            for (int i = 0; i < kLsvBurnIn; ++i) step(sys, p);
            break;
        }
    }
    return p;
}

void step(const System& sys, Point& p) {
    switch (sys.kind()) {
        case SystemKind::Doubling: {
            if (p.bitcnt == 0) {
                p.bitbuf = p.source.next_u64();
                p.bitcnt = 64;
            }
            const std::uint64_t bit = p.bitbuf >> 63;
            p.bitbuf <<= 1;
            --p.bitcnt;
            p.window = (p.window << 1) | bit;
            break;
        }
        case SystemKind::Bernoulli: {
            p.symbols[p.head] = draw_symbol(sys, p.source);
            p.head = (p.head + 1u) & 63u;
            break;
        }
        case SystemKind::Lsv: {
            const double x = p.x;
            p.x = x < 0.5 ? x * (1.0 + sys.lsv_branch_coeff_ * std::pow(x, sys.lsv_alpha_))
                          : 2.0 * x - 1.0;
            break;
        }
    }
}

double coordinate(const System& sys, const Point& p) {
    switch (sys.kind()) {
        case SystemKind::Doubling:
            return static_cast<double>(p.window) * 0x1.0p-64;
        case SystemKind::Bernoulli:
            return encoded_uniform(sys, p);
        case SystemKind::Lsv:
            return p.x;
    }
    return 0.0;
}

double encoded_uniform(const System& sys, const Point& p) {
    switch (sys.kind()) {
        case SystemKind::Doubling:
            return static_cast<double>(p.window) * 0x1.0p-64;
        case SystemKind::Bernoulli: {
            // Nested stationary-CDF intervals over the leading symbol block;
            // the midpoint is uniform up to the block's residual mass.
            double lo = 0.0, len = 1.0;
            for (std::uint32_t i = 0; i < 64 && len > 1e-18; ++i) {
                const auto a = static_cast<int>(p.symbols[(p.head + i) & 63u]);
                lo += len * sys.cell_cum_before(a);
                len *= sys.cell_probability(a);
            }
            return lo + 0.5 * len;
        }
        case SystemKind::Lsv:
            return p.x;
    }
    return 0.0;
}

int cell_of(const System& sys, const Point& p) {
    switch (sys.kind()) {
        case SystemKind::Doubling:
            return static_cast<int>(p.window >> 63);
        case SystemKind::Bernoulli:
            return static_cast<int>(p.symbols[p.head]);
        case SystemKind::Lsv:
            return p.x < 0.5 ? 0 : 1;
    }
    return 0;
}

int cell_at_resolution(const System& sys, const Point& p, int bits) {
    if (sys.kind() != SystemKind::Doubling)
        throw std::logic_error("cell_at_resolution: only defined for the doubling map");
    if (bits < 1 || bits > 62) throw std::invalid_argument("cell_at_resolution: bits in [1,62]");
    return static_cast<int>(p.window >> (64 - bits));
}

double gm_metric(const System& sys, const Point& a, const Point& b) {
    int separation = 64;
    switch (sys.kind()) {
        case SystemKind::Doubling: {
            const std::uint64_t diff = a.window ^ b.window;
            separation = diff == 0 ? 64 : std::countl_zero(diff);
            break;
        }
        case SystemKind::Bernoulli: {
            for (int i = 0; i < 64; ++i) {
                if (a.symbols[(a.head + static_cast<std::uint32_t>(i)) & 63u] !=
                    b.symbols[(b.head + static_cast<std::uint32_t>(i)) & 63u]) {
                    separation = i;
                    break;
                }
            }
            break;
        }
        case SystemKind::Lsv: {
            Point pa = a, pb = b;
            for (int i = 0; i < 64; ++i) {
                if ((pa.x < 0.5) != (pb.x < 0.5)) {
                    separation = i;
                    break;
                }
                step(sys, pa);
                step(sys, pb);
            }
            break;
        }
    }
    return separation >= 64 ? 0.0 : std::pow(sys.tau(), separation);
}

Observable Observable::constant(double value) {
    Observable f;
    f.kind_ = Kind::Constant;
    f.value_ = value;
    return f;
}

Observable Observable::locally_constant(std::vector<double> cell_values) {
    if (cell_values.empty())
        throw std::invalid_argument("Observable::locally_constant: empty value table");
    Observable f;
    f.kind_ = Kind::LocallyConstant;
    f.cell_values_ = std::move(cell_values);
    return f;
}

Observable Observable::fourier(std::vector<std::pair<int, double>> coeffs) {
    for (const auto& [freq, amp] : coeffs) {
        (void)amp;
        if (freq < 1) throw std::invalid_argument("Observable::fourier: frequencies must be >= 1");
    }
    Observable f;
    f.kind_ = Kind::FourierSum;
    f.coeffs_ = std::move(coeffs);
    return f;
}

Observable Observable::heavy_tail(double p, double c1, double c2, bool centered) {
    if (!(p > 1.0 && p <= 2.0))
        throw std::invalid_argument("Observable::heavy_tail: p must lie in (1,2]");
    if (!(c1 >= 0.0 && c2 >= 0.0 && c1 + c2 > 0.0))
        throw std::invalid_argument("Observable::heavy_tail: need c1, c2 >= 0 with c1 + c2 > 0");
    Observable f;
    f.kind_ = Kind::HeavyTail;
    f.p_ = p;
    f.c1_ = c1;
    f.c2_ = c2;
    f.centered_ = centered;
    f.center_shift_ = centered ? laws::two_sided_pareto_mean(p, c1, c2) : 0.0;
    return f;
}

Observable Observable::holder(double gamma, std::vector<std::pair<double, double>> anchors,
                              double offset) {
    if (!(gamma > 0.0 && gamma <= 1.0))
        throw std::invalid_argument("Observable::holder: gamma must lie in (0,1]");
    Observable f;
    f.kind_ = Kind::Holder;
    f.gamma_ = gamma;
    f.anchors_ = std::move(anchors);
    f.offset_ = offset;
    return f;
}

double Observable::operator()(const System& sys, const Point& p) const {
    switch (kind_) {
        case Kind::Constant:
            return value_;
        case Kind::LocallyConstant: {
            const auto cell = static_cast<std::size_t>(cell_of(sys, p));
            return cell < cell_values_.size() ? cell_values_[cell] + offset_ : offset_;
        }
        case Kind::FourierSum:
        case Kind::Holder:
            return eval_coordinate(coordinate(sys, p));
        case Kind::HeavyTail:
            return laws::two_sided_pareto_quantile(p_, c1_, c2_, encoded_uniform(sys, p)) -
                   center_shift_ + offset_;
    }
    return 0.0;
}

double Observable::eval_coordinate(double x) const {
    switch (kind_) {
        case Kind::Constant:
            return value_;
        case Kind::LocallyConstant: {
            // interval-map convention: the table refines [0,1) uniformly
            const auto cells = cell_values_.size();
            auto cell = static_cast<std::size_t>(x * static_cast<double>(cells));
            cell = std::min(cell, cells - 1);
            return cell_values_[cell] + offset_;
        }
        case Kind::FourierSum: {
            double acc = offset_;
            for (const auto& [freq, amp] : coeffs_) acc += amp * std::cos(kTwoPi * freq * x);
            return acc;
        }
        case Kind::HeavyTail:
            return laws::two_sided_pareto_quantile(p_, c1_, c2_, x) - center_shift_ + offset_;
        case Kind::Holder: {
            double acc = offset_;
            for (const auto& [amp, anchor] : anchors_)
                acc += amp * std::pow(std::abs(x - anchor), gamma_);
            return acc;
        }
    }
    return 0.0;
}

double Observable::regularity_bound() const {
    switch (kind_) {
        case Kind::Constant:
        case Kind::LocallyConstant:
        case Kind::HeavyTail:
            return 0.0;  // locally constant at the block refinement
        case Kind::FourierSum: {
            double acc = 0.0;
            for (const auto& [freq, amp] : coeffs_) acc += std::abs(amp) * kTwoPi * freq;
            return acc;
        }
        case Kind::Holder: {
            double acc = 0.0;
            for (const auto& [amp, anchor] : anchors_) {
                (void)anchor;
                acc += std::abs(amp);
            }
            return acc;
        }
    }
    return 0.0;
}

Observable Observable::with_offset(double offset) const {
    Observable f = *this;
    f.offset_ += offset;
    return f;
}

std::string Observable::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case Kind::Constant: os << "const(" << value_ << ")"; break;
        case Kind::LocallyConstant: os << "locally_constant[" << cell_values_.size() << "]"; break;
        case Kind::FourierSum: {
            os << "fourier(";
            for (std::size_t i = 0; i < coeffs_.size(); ++i) {
                if (i) os << "+";
                os << coeffs_[i].second << "cos(2pi*" << coeffs_[i].first << "x)";
            }
            os << ")";
            break;
        }
        case Kind::HeavyTail:
            os << "heavy_tail(p=" << p_ << ",c1=" << c1_ << ",c2=" << c2_ << ")";
            break;
        case Kind::Holder: os << "holder(gamma=" << gamma_ << ")"; break;
    }
    if (offset_ != 0.0) os << "+" << offset_;
    return os.str();
}

}  // namespace asclt::systems
