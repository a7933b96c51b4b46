#include "permclust/shift_distribution.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>

#include "permclust/numeric.hpp"

namespace permclust {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// sum_{j >= a} j^{-s} by Euler-Maclaurin off the integral, accurate to well
// below 1e-15 relative for a >= 64.
double zeta_tail_from(double a, double s) {
    const double inv = std::pow(a, -s);
    return a * inv / (s - 1.0) + 0.5 * inv + s * inv / (12.0 * a) -
           s * (s + 1.0) * (s + 2.0) * inv / (720.0 * a * a * a);
}

double zeta_value(double s) {
    constexpr int kPrefix = 8192;
    KahanSum sum;
    for (int j = 1; j < kPrefix; ++j) sum.add(std::pow(static_cast<double>(j), -s));
    sum.add(zeta_tail_from(static_cast<double>(kPrefix), s));
    return sum.value();
}

double parse_number(std::string_view text) {
    // from_chars<double> handles no locale surprises
    double x = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), x);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw ValidationError("cannot parse number in distribution spec: '" +
                              std::string(text) + "'");
    }
    return x;
}

std::string format_number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

MeanValue MeanValue::infinite() { return {false, kInf}; }

ShiftDistribution ShiftDistribution::geometric(double q) {
    if (!(q > 0.0 && q < 1.0)) throw ValidationError("geometric requires q in (0,1)");
    return ShiftDistribution(Geometric{q, std::log(q), std::log1p(-q)});
}

ShiftDistribution ShiftDistribution::finite_with_geometric_tail(std::vector<double> weights,
                                                                double ratio) {
    if (weights.empty()) throw ValidationError("finite tail family needs at least one weight");
    if (!(ratio > 0.0 && ratio < 1.0)) throw ValidationError("tail ratio must lie in (0,1)");
    KahanSum total;
    for (double w : weights) {
        if (!(w > 0.0)) throw ValidationError("weights must be strictly positive");
        total.add(w);
    }
    const double mass = 1.0 - total.value();
    if (!(mass > 0.0)) throw ValidationError("weights must sum to strictly less than 1");

    FiniteGeomTail f;
    f.w = std::move(weights);
    f.r = ratio;
    f.tail_mass = mass;
    const auto m = f.w.size();
    f.cum.resize(m + 1);
    f.tails.resize(m + 1);
    f.cum[0] = 0.0;
    for (std::size_t j = 0; j < m; ++j) f.cum[j + 1] = f.cum[j] + f.w[j];
    f.tails[m] = mass;
    for (std::size_t j = m; j-- > 0;) f.tails[j] = f.tails[j + 1] + f.w[j];
    KahanSum mean;
    for (std::size_t j = 0; j < m; ++j) mean.add(static_cast<double>(j + 1) * f.w[j]);
    mean.add(mass * (static_cast<double>(m) + 1.0 / (1.0 - ratio)));
    f.mean = mean.value();
    return ShiftDistribution(std::move(f));
}

ShiftDistribution ShiftDistribution::power_law(double s, int cutoff) {
    if (!(s > 1.0)) throw ValidationError("power law requires exponent s > 1");
    if (cutoff < 64) throw ValidationError("power law prefix cutoff must be >= 64");
    PowerLaw p;
    p.s = s;
    p.cutoff = cutoff;
    p.zeta_s = zeta_value(s);
    p.log_zeta_s = std::log(p.zeta_s);
    p.cdf_table.resize(static_cast<std::size_t>(cutoff) + 1);
    p.tail_table.resize(static_cast<std::size_t>(cutoff) + 1);
    {
        KahanSum acc;
        p.cdf_table[0] = 0.0;
        for (int j = 1; j <= cutoff; ++j) {
            acc.add(std::pow(static_cast<double>(j), -s) / p.zeta_s);
            p.cdf_table[static_cast<std::size_t>(j)] = std::min(1.0, acc.value());
        }
    }
    {
        KahanSum acc;
        acc.add(zeta_tail_from(static_cast<double>(cutoff) + 1.0, s) / p.zeta_s);
        p.tail_table[static_cast<std::size_t>(cutoff)] = acc.value();
        for (int j = cutoff - 1; j >= 0; --j) {
            acc.add(std::pow(static_cast<double>(j) + 1.0, -s) / p.zeta_s);
            p.tail_table[static_cast<std::size_t>(j)] = acc.value();
        }
    }
    p.mean = s > 2.0 ? zeta_value(s - 1.0) / p.zeta_s : kInf;
    return ShiftDistribution(std::move(p));
}

double ShiftDistribution::pmf(std::int64_t j) const {
    if (j < 1) throw ValidationError("pmf index must be >= 1");
    const auto dj = static_cast<double>(j);
    return std::visit(
        [&](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, Geometric>) {
                return std::exp(f.log_one_minus_q + (dj - 1.0) * f.log_q);
            } else if constexpr (std::is_same_v<T, FiniteGeomTail>) {
                const auto m = static_cast<std::int64_t>(f.w.size());
                if (j <= m) return f.w[static_cast<std::size_t>(j - 1)];
                return f.tail_mass * (1.0 - f.r) *
                       std::exp(static_cast<double>(j - m - 1) * std::log(f.r));
            } else {
                return std::exp(-f.s * std::log(dj) - f.log_zeta_s);
            }
        },
        family_);
}

double ShiftDistribution::cdf(std::int64_t j) const {
    if (j < 0) throw ValidationError("cdf index must be >= 0");
    if (j == 0) return 0.0;
    return std::visit(
        [&](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, Geometric>) {
                return -std::expm1(static_cast<double>(j) * f.log_q);
            } else if constexpr (std::is_same_v<T, FiniteGeomTail>) {
                const auto m = static_cast<std::int64_t>(f.w.size());
                if (j <= m) return f.cum[static_cast<std::size_t>(j)];
                return 1.0 - f.tail_mass * std::exp(static_cast<double>(j - m) * std::log(f.r));
            } else {
                if (j <= f.cutoff) return f.cdf_table[static_cast<std::size_t>(j)];
                return 1.0 - zeta_tail_from(static_cast<double>(j) + 1.0, f.s) / f.zeta_s;
            }
        },
        family_);
}

double ShiftDistribution::tail(std::int64_t j) const {
    if (j < 0) throw ValidationError("tail index must be >= 0");
    if (j == 0) return 1.0;
    return std::visit(
        [&](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, Geometric>) {
                return std::exp(static_cast<double>(j) * f.log_q);
            } else if constexpr (std::is_same_v<T, FiniteGeomTail>) {
                const auto m = static_cast<std::int64_t>(f.w.size());
                if (j <= m) return f.tails[static_cast<std::size_t>(j)];
                return f.tail_mass * std::exp(static_cast<double>(j - m) * std::log(f.r));
            } else {
                if (j <= f.cutoff) return f.tail_table[static_cast<std::size_t>(j)];
                return zeta_tail_from(static_cast<double>(j) + 1.0, f.s) / f.zeta_s;
            }
        },
        family_);
}

double ShiftDistribution::log_cdf(std::int64_t j) const {
    if (j < 0) throw ValidationError("cdf index must be >= 0");
    if (j == 0) return -kInf;
    if (const auto* g = std::get_if<Geometric>(&family_)) {
        return log1mexp(static_cast<double>(j) * g->log_q);
    }
    return std::log1p(-tail(j));
}

double ShiftDistribution::truncated_pmf(std::int64_t j, std::int64_t i) const {
    if (j < 2) throw ValidationError("truncation level must be >= 2");
    if (i < 0 || i > j - 1) throw ValidationError("truncated value must lie in 0..j-1");
    return pmf(i + 1) / cdf(j);
}

std::int64_t ShiftDistribution::truncated_sample(std::int64_t j, double u) const {
    if (j < 2) throw ValidationError("truncation level must be >= 2");
    const double nj = cdf(j);
    auto above = [&](std::int64_t i) { return cdf(i + 1) / nj > u; };
    if (const auto* g = std::get_if<Geometric>(&family_)) {
        // closed-form inverse cdf, then a local fix against the exact predicate
        const double t = std::log1p(-u * nj) / g->log_q;
        auto i = static_cast<std::int64_t>(std::ceil(t)) - 1;
        i = std::clamp<std::int64_t>(i, 0, j - 1);
        while (i > 0 && above(i - 1)) --i;
        while (i < j - 1 && !above(i)) ++i;
        return i;
    }
    std::int64_t lo = 0, hi = j - 1;
    while (lo < hi) {
        const auto mid = lo + (hi - lo) / 2;
        if (above(mid)) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    return lo;
}

std::int64_t ShiftDistribution::sample(double u) const {
    if (!(u >= 0.0 && u < 1.0)) throw ValidationError("uniform variate must lie in [0,1)");
    auto above = [&](std::int64_t j) { return cdf(j) > u; };
    if (const auto* g = std::get_if<Geometric>(&family_)) {
        const double t = std::log1p(-u) / g->log_q;
        auto j = static_cast<std::int64_t>(std::floor(t)) + 1;
        j = std::max<std::int64_t>(j, 1);
        while (j > 1 && above(j - 1)) --j;
        while (!above(j)) ++j;
        return j;
    }
    // exact prefix by search, doubling past it when the tail is heavy
    constexpr std::int64_t kMaxDraw = std::int64_t{1} << 62;
    std::int64_t lo = 1, hi = 1;
    while (!above(hi)) {
        lo = hi + 1;
        if (hi > kMaxDraw / 2) {
            throw CapacityError("inverse-cdf draw exceeds the representable value range");
        }
        hi *= 2;
    }
    while (lo < hi) {
        const auto mid = lo + (hi - lo) / 2;
        if (above(mid)) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    return lo;
}

MeanValue ShiftDistribution::mean() const {
    return std::visit(
        [&](const auto& f) -> MeanValue {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, Geometric>) {
                return MeanValue::of(1.0 / (1.0 - f.q));
            } else if constexpr (std::is_same_v<T, FiniteGeomTail>) {
                return MeanValue::of(f.mean);
            } else {
                return f.s > 2.0 ? MeanValue::of(f.mean) : MeanValue::infinite();
            }
        },
        family_);
}

bool ShiftDistribution::is_positive_recurrent() const { return mean().finite; }

bool ShiftDistribution::is_nonincreasing() const {
    if (const auto* f = std::get_if<FiniteGeomTail>(&family_)) {
        for (std::size_t j = 0; j + 1 < f->w.size(); ++j) {
            if (f->w[j] < f->w[j + 1]) return false;
        }
        return f->w.back() >= f->tail_mass * (1.0 - f->r);
    }
    return true;  // geometric and power-law pmfs are decreasing by form
}

double ShiftDistribution::log_renewal_prob(std::int64_t n) const {
    if (n < 0) throw ValidationError("renewal index must be >= 0");
    KahanSum acc;
    for (std::int64_t j = 1; j <= n; ++j) acc.add(log_cdf(j));
    return acc.value();
}

double ShiftDistribution::renewal_prob(std::int64_t n) const {
    return std::exp(log_renewal_prob(n));
}

std::vector<double> ShiftDistribution::renewal_prob_prefix(int nmax) const {
    if (nmax < 0) throw ValidationError("renewal index must be >= 0");
    std::vector<double> u(static_cast<std::size_t>(nmax) + 1);
    u[0] = 1.0;
    KahanSum acc;
    for (int j = 1; j <= nmax; ++j) {
        acc.add(log_cdf(j));
        u[static_cast<std::size_t>(j)] = std::exp(acc.value());
    }
    return u;
}

std::vector<double> ShiftDistribution::first_renewal_pmf(int nmax) const {
    if (nmax < 1) throw ValidationError("first_renewal_pmf needs nmax >= 1");
    const auto u = renewal_prob_prefix(nmax);
    std::vector<double> f(static_cast<std::size_t>(nmax) + 1, 0.0);
    for (int n = 1; n <= nmax; ++n) {
        KahanSum conv;
        for (int k = 1; k < n; ++k) {
            conv.add(f[static_cast<std::size_t>(k)] * u[static_cast<std::size_t>(n - k)]);
        }
        f[static_cast<std::size_t>(n)] = u[static_cast<std::size_t>(n)] - conv.value();
    }
    return {f.begin() + 1, f.end()};
}

double ShiftDistribution::tail_sum(std::int64_t J) const {
    if (J < 0) throw ValidationError("tail_sum index must be >= 0");
    return std::visit(
        [&](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, Geometric>) {
                return std::exp(static_cast<double>(J + 1) * f.log_q) / (1.0 - f.q);
            } else if constexpr (std::is_same_v<T, FiniteGeomTail>) {
                const auto m = static_cast<std::int64_t>(f.w.size());
                if (J >= m) {
                    return f.tail_mass *
                           std::exp(static_cast<double>(J + 1 - m) * std::log(f.r)) /
                           (1.0 - f.r);
                }
                KahanSum acc;
                for (std::int64_t j = J + 1; j < m; ++j) {
                    acc.add(f.tails[static_cast<std::size_t>(j)]);
                }
                acc.add(f.tail_mass / (1.0 - f.r));
                return acc.value();
            } else {
                if (f.s <= 2.0) return kInf;
                // sum_{j>J} R_j = (sum_{i>=J+2} i^{1-s} - (J+1) sum_{i>=J+2} i^{-s}) / zeta(s)
                const double a = static_cast<double>(J) + 2.0;
                if (J + 2 > f.cutoff) {
                    return (zeta_tail_from(a, f.s - 1.0) -
                            static_cast<double>(J + 1) * zeta_tail_from(a, f.s)) /
                           f.zeta_s;
                }
                KahanSum acc;
                for (std::int64_t j = J + 1; j <= f.cutoff; ++j) {
                    acc.add(f.tail_table[static_cast<std::size_t>(j)]);
                }
                const double b = static_cast<double>(f.cutoff) + 2.0;
                acc.add((zeta_tail_from(b, f.s - 1.0) -
                         static_cast<double>(f.cutoff + 1) * zeta_tail_from(b, f.s)) /
                        f.zeta_s);
                return acc.value();
            }
        },
        family_);
}

std::optional<double> ShiftDistribution::geometric_q() const {
    if (const auto* g = std::get_if<Geometric>(&family_)) return g->q;
    return std::nullopt;
}

ShiftDistribution ShiftDistribution::parse(std::string_view spec) {
    const auto colon = spec.find(':');
    if (colon == std::string_view::npos) {
        throw ValidationError("distribution spec must look like 'geom:q=0.5'");
    }
    const auto family = spec.substr(0, colon);
    auto rest = spec.substr(colon + 1);

    auto expect_key = [&](std::string_view field, std::string_view key) {
        const auto eq = field.find('=');
        if (eq == std::string_view::npos || field.substr(0, eq) != key) {
            throw ValidationError("expected '" + std::string(key) +
                                  "=...' in distribution spec");
        }
        return field.substr(eq + 1);
    };

    if (family == "geom") {
        return geometric(parse_number(expect_key(rest, "q")));
    }
    if (family == "power") {
        const auto semi = rest.find(';');
        if (semi == std::string_view::npos) {
            return power_law(parse_number(expect_key(rest, "s")));
        }
        const double s = parse_number(expect_key(rest.substr(0, semi), "s"));
        const double cutoff = parse_number(expect_key(rest.substr(semi + 1), "cutoff"));
        return power_law(s, static_cast<int>(cutoff));
    }
    if (family == "finitetail") {
        const auto semi = rest.find(';');
        if (semi == std::string_view::npos) {
            throw ValidationError("finitetail spec must look like 'finitetail:w=0.5,0.2;r=0.5'");
        }
        auto wlist = expect_key(rest.substr(0, semi), "w");
        std::vector<double> weights;
        while (!wlist.empty()) {
            const auto comma = wlist.find(',');
            weights.push_back(parse_number(wlist.substr(0, comma)));
            if (comma == std::string_view::npos) break;
            wlist = wlist.substr(comma + 1);
        }
        const double r = parse_number(expect_key(rest.substr(semi + 1), "r"));
        return finite_with_geometric_tail(std::move(weights), r);
    }
    throw ValidationError("unknown distribution family: '" + std::string(family) + "'");
}

std::string ShiftDistribution::spec_string() const {
    return std::visit(
        [&](const auto& f) -> std::string {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, Geometric>) {
                return "geom:q=" + format_number(f.q);
            } else if constexpr (std::is_same_v<T, FiniteGeomTail>) {
                std::string out = "finitetail:w=";
                for (std::size_t j = 0; j < f.w.size(); ++j) {
                    if (j) out.push_back(',');
                    out += format_number(f.w[j]);
                }
                out += ";r=" + format_number(f.r);
                return out;
            } else {
                return "power:s=" + format_number(f.s);
            }
        },
        family_);
}

}  // namespace permclust
