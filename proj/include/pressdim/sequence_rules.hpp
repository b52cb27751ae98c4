#pragma once
/**
 * @file sequence_rules.hpp
 * @brief Closed-form length rules for the tails of countable partitions.
 *
 * A partition is a finite prefix plus a rule giving every later length.
 * Rules know how to bound sums of powers of their terms, whether those sums
 * converge, and how their logarithm behaves at astronomically large indices.
 */

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "pressdim/numeric.hpp"

namespace pressdim {

/// scale * ratio^m, 0 < ratio < 1.
struct GeometricRule {
    double scale = 1.0;
    double ratio = 0.5;
};

/// C * (m + shift)^{-p} * log(m + shift)^{-q}.
struct PowerLogRule {
    double C = 1.0;
    double shift = 0.0;
    double p = 2.0;
    double q = 0.0;
};

/// 1 / (m (m + 1)): the branch lengths of the Gauss map.
struct GaussRule {};

using LengthRule = std::variant<GeometricRule, PowerLogRule, GaussRule>;

namespace detail {
template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;
}  // namespace detail

inline double rule_length(const LengthRule& rule, double m) {
    return std::visit(
        detail::overloaded{
            [&](const GeometricRule& g) { return g.scale * std::pow(g.ratio, m); },
            [&](const PowerLogRule& r) {
                const double y = m + r.shift;
                double v = r.C * std::pow(y, -r.p);
                if (r.q != 0.0) v *= std::pow(std::log(y), -r.q);
                return v;
            },
            [&](const GaussRule&) { return 1.0 / (m * (m + 1.0)); }},
        rule);
}

/// log of the m-th length, given only lm = log m. Valid for huge m.
inline double rule_log_length_far(const LengthRule& rule, double lm) {
    return std::visit(
        detail::overloaded{
            [&](const GeometricRule& g) {
                if (lm > 700.0) return -kInf;
                return std::log(g.scale) + std::exp(lm) * std::log(g.ratio);
            },
            [&](const PowerLogRule& r) {
                const double ly = lm + std::log1p(r.shift * std::exp(-lm));
                double v = std::log(r.C) - r.p * ly;
                if (r.q != 0.0) v -= r.q * std::log(ly);
                return v;
            },
            [&](const GaussRule&) { return -2.0 * lm - std::log1p(std::exp(-lm)); }},
        rule);
}

/// Does the sum over m >= 1 of length^t converge?
inline bool rule_converges(const LengthRule& rule, double t) {
    return std::visit(
        detail::overloaded{
            [&](const GeometricRule&) { return t > 0.0; },
            [&](const PowerLogRule& r) {
                const double a = r.p * t;
                return a > 1.0 || (a == 1.0 && r.q * t > 1.0);
            },
            [&](const GaussRule&) { return 2.0 * t > 1.0; }},
        rule);
}

/// Convergence abscissa of the sum of length^t.
inline double rule_critical(const LengthRule& rule) {
    return std::visit(detail::overloaded{[](const GeometricRule&) { return 0.0; },
                                         [](const PowerLogRule& r) { return 1.0 / r.p; },
                                         [](const GaussRule&) { return 0.5; }},
                      rule);
}

/// Whether the series converges exactly at its abscissa. For geometric
/// rules the abscissa is 0 and the series of ones diverges there.
inline bool rule_converges_at_critical(const LengthRule& rule) {
    return std::visit(detail::overloaded{[](const GeometricRule&) { return false; },
                                         [](const PowerLogRule& r) { return r.q / r.p > 1.0; },
                                         [](const GaussRule&) { return false; }},
                      rule);
}

/// Enclosure of the sum over m >= m1 of length(m)^t.
inline Interval rule_tail_power_sum(const LengthRule& rule, double t, std::int64_t m1) {
    if (m1 < 1) throw ValidationError("tail must start at m >= 1");
    if (!rule_converges(rule, t)) return {kInf, kInf};
    const double mm = static_cast<double>(m1);
    return std::visit(
        detail::overloaded{
            [&](const GeometricRule& g) {
                const double rt = std::pow(g.ratio, t);
                const double v = std::pow(g.scale, t) * std::pow(rt, mm) / (1.0 - rt);
                return widen({v, v}, 1e-15);
            },
            [&](const PowerLogRule& r) {
                const double Ct = std::pow(r.C, t);
                auto f = [&](double m) { return std::pow(rule_length(rule, m), t); };
                auto integral = [&](double m) {
                    const Interval I = power_log_tail_integral(r.p * t, r.q * t, m + r.shift);
                    return Interval{Ct * I.lo, Ct * I.hi};
                };
                return widen(convex_tail_sum(f, integral, mm), 1e-15);
            },
            [&](const GaussRule&) {
                // y(y+1) = (y+1/2)^2 - 1/4 gives a two-sided closed form.
                auto f = [&](double m) { return std::pow(m * (m + 1.0), -t); };
                auto integral = [&](double x0) {
                    const double z = x0 + 0.5;
                    const double base = std::pow(z, 1.0 - 2.0 * t) / (2.0 * t - 1.0);
                    const double corr = std::pow(1.0 - 0.25 / (z * z), -t);
                    return Interval{base, base * corr};
                };
                return widen(convex_tail_sum(f, integral, mm), 1e-15);
            }},
        rule);
}

inline std::string rule_describe(const LengthRule& rule) {
    std::ostringstream os;
    os.precision(17);
    std::visit(detail::overloaded{
                   [&](const GeometricRule& g) { os << "geometric(scale=" << g.scale << ",ratio=" << g.ratio << ")"; },
                   [&](const PowerLogRule& r) {
                       os << "power-log(C=" << r.C << ",shift=" << r.shift << ",p=" << r.p << ",q=" << r.q << ")";
                   },
                   [&](const GaussRule&) { os << "gauss(1/(m(m+1)))"; }},
               rule);
    return os.str();
}

/// Lengths at global indices n = offset + stride * (m - 1), m >= 1.
struct Subsequence {
    std::int64_t stride = 1;
    std::int64_t offset = 1;
    LengthRule rule;
};

/// Tail of a partition: every index past the prefix belongs to exactly one
/// subsequence.  `shift` moves the whole pattern when a compact perturbation
/// changes the number of prefix intervals.
struct TailRule {
    std::vector<Subsequence> parts;
    std::int64_t shift = 0;

    double length(std::int64_t n) const {
        const std::int64_t r = n - shift;
        for (const auto& s : parts) {
            const std::int64_t k = r - s.offset;
            if (k >= 0 && k % s.stride == 0) return rule_length(s.rule, static_cast<double>(k / s.stride + 1));
        }
        throw ValidationError("index " + std::to_string(n) + " is not covered by the tail rule");
    }

    /// Enclosure of the sum over n > M of length(n)^t.
    Interval tail_power_sum(double t, std::int64_t M) const {
        Interval total{0.0, 0.0};
        for (const auto& s : parts) {
            const std::int64_t K = M - shift - s.offset;
            const std::int64_t m1 = K < 0 ? 1 : K / s.stride + 2;
            total = total + rule_tail_power_sum(s.rule, t, m1);
        }
        return total;
    }

    bool converges(double t) const {
        for (const auto& s : parts)
            if (!rule_converges(s.rule, t)) return false;
        return true;
    }

    double critical() const {
        double c = 0.0;
        for (const auto& s : parts) c = std::max(c, rule_critical(s.rule));
        return c;
    }

    bool converges_at_critical() const {
        const double c = critical();
        for (const auto& s : parts)
            if (rule_critical(s.rule) == c && !rule_converges_at_critical(s.rule)) return false;
        return true;
    }

    bool geometric_only() const {
        for (const auto& s : parts)
            if (!std::holds_alternative<GeometricRule>(s.rule)) return false;
        return true;
    }

    std::string describe() const {
        std::ostringstream os;
        for (std::size_t i = 0; i < parts.size(); ++i) {
            if (i) os << "; ";
            os << "n=" << parts[i].offset << "+" << parts[i].stride << "(m-1): " << rule_describe(parts[i].rule);
        }
        if (shift) os << "; shift=" << shift;
        return os.str();
    }
};

}  // namespace pressdim
