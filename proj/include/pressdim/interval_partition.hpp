#pragma once
/**
 * @file interval_partition.hpp
 * @brief Countable interval partitions of [0,1], the piecewise expanding maps
 *        they define, cylinders, refinement and compact perturbation.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <cstdio>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/special_functions/zeta.hpp>

#include "pressdim/numeric.hpp"
#include "pressdim/sequence_rules.hpp"

namespace pressdim {

enum class GeneratorKind { ExplicitList, Gauss, GaussRestricted, Dyadic, PowerLaw, CustomLengths, Derived };

inline std::string to_string(GeneratorKind k) {
    switch (k) {
        case GeneratorKind::ExplicitList: return "explicit-list";
        case GeneratorKind::Gauss: return "gauss";
        case GeneratorKind::GaussRestricted: return "gauss-restricted";
        case GeneratorKind::Dyadic: return "dyadic";
        case GeneratorKind::PowerLaw: return "power-law";
        case GeneratorKind::CustomLengths: return "custom-lengths";
        case GeneratorKind::Derived: return "derived";
    }
    return "?";
}

/// How a generator is described in configs.
struct GeneratorSpec {
    GeneratorKind kind = GeneratorKind::Gauss;
    std::vector<std::pair<double, double>> intervals;  // explicit-list
    std::vector<int> digits;                           // gauss-restricted
    double exponent = 0.0;                             // power-law
    std::string rule;                                  // custom-lengths: n-log2 | interleaved | power-log
    double p = 0.0, q = 0.0, shift = 0.0;              // custom power-log parameters
    bool unbounded = false;  // explicit list that continues with no known rule

    static GeneratorSpec gauss() { return {}; }
    static GeneratorSpec dyadic() {
        GeneratorSpec s;
        s.kind = GeneratorKind::Dyadic;
        return s;
    }
    static GeneratorSpec gauss_restricted(std::vector<int> d) {
        GeneratorSpec s;
        s.kind = GeneratorKind::GaussRestricted;
        s.digits = std::move(d);
        return s;
    }
    static GeneratorSpec power_law(double p) {
        GeneratorSpec s;
        s.kind = GeneratorKind::PowerLaw;
        s.exponent = p;
        return s;
    }
    static GeneratorSpec custom(std::string rule) {
        GeneratorSpec s;
        s.kind = GeneratorKind::CustomLengths;
        s.rule = std::move(rule);
        return s;
    }
    static GeneratorSpec explicit_list(std::vector<std::pair<double, double>> iv) {
        GeneratorSpec s;
        s.kind = GeneratorKind::ExplicitList;
        s.intervals = std::move(iv);
        return s;
    }

    std::string describe() const {
        std::ostringstream os;
        os.precision(17);
        os << to_string(kind);
        switch (kind) {
            case GeneratorKind::GaussRestricted:
                os << "{";
                for (std::size_t i = 0; i < digits.size(); ++i) os << (i ? "," : "") << digits[i];
                os << "}";
                break;
            case GeneratorKind::PowerLaw: os << "(" << exponent << ")"; break;
            case GeneratorKind::CustomLengths:
                os << "(" << rule;
                if (rule == "power-log") os << ",p=" << p << ",q=" << q << ",shift=" << shift;
                os << ")";
                break;
            case GeneratorKind::ExplicitList: os << "[" << intervals.size() << "]"; break;
            default: break;
        }
        return os.str();
    }
};

enum class TailKind { None, Rule, Unknown };

/// Finite prefix of a countable family of closed intervals in [0,1], stored
/// in decreasing order of right endpoint, plus an optional tail rule for all
/// later indices.  Immutable once built.
class IntervalPartition {
public:
    IntervalPartition() = default;

    std::size_t size() const { return a_.size(); }
    std::size_t truncation() const { return a_.size(); }
    const std::vector<double>& left() const { return a_; }
    const std::vector<double>& right() const { return b_; }
    const std::vector<double>& lengths() const { return len_; }
    TailKind tail_kind() const { return tail_kind_; }
    const std::optional<TailRule>& tail() const { return tail_; }
    const GeneratorSpec& generator() const { return gen_; }
    const std::string& label() const { return label_; }
    bool tiles_unit_interval() const { return tiles_; }
    bool unbounded() const { return tail_kind_ != TailKind::None; }

    /// Length of interval n (1-based); past the prefix the tail rule is used.
    double length(std::int64_t n) const {
        if (n >= 1 && static_cast<std::size_t>(n) <= len_.size()) return len_[n - 1];
        if (!tail_) throw ValidationError("no length known for index " + std::to_string(n));
        return tail_->length(n);
    }

    /// Enclosure of the sum of length^t over indices past the prefix.
    Interval tail_power_sum(double t) const {
        if (tail_kind_ == TailKind::None) return {0.0, 0.0};
        if (tail_kind_ == TailKind::Unknown) return {0.0, kInf};
        return tail_->tail_power_sum(t, static_cast<std::int64_t>(size()));
    }

    /// Indices (0-based) ordered by decreasing length; ties keep index order.
    std::vector<std::size_t> sorted_by_length() const {
        std::vector<std::size_t> idx(size());
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return len_[i] > len_[j]; });
        return idx;
    }

    std::vector<double> sorted_lengths() const {
        std::vector<double> out;
        out.reserve(size());
        for (auto i : sorted_by_length()) out.push_back(len_[i]);
        return out;
    }

    /// Union of all endpoints, ascending, with shared endpoints counted once.
    std::vector<double> endpoints() const {
        std::vector<double> e;
        e.reserve(2 * size());
        e.insert(e.end(), a_.begin(), a_.end());
        e.insert(e.end(), b_.begin(), b_.end());
        std::sort(e.begin(), e.end());
        std::vector<double> out;
        out.reserve(e.size());
        for (double x : e) {
            if (!out.empty() && x - out.back() <= 1e-15 * std::max(std::abs(x), std::abs(out.back()))) continue;
            out.push_back(x);
        }
        return out;
    }

    /// The prefix alone, viewed as a finite partition.
    IntervalPartition truncated() const {
        IntervalPartition p = *this;
        p.tail_.reset();
        p.tail_kind_ = TailKind::None;
        p.label_ = label_ + " (truncated at " + std::to_string(size()) + ")";
        return p;
    }

    /// Assemble and validate.  Intervals must already be sorted by
    /// decreasing right endpoint.
    static IntervalPartition assemble(std::vector<double> a, std::vector<double> b, std::vector<double> len,
                                      TailKind kind, std::optional<TailRule> tail, GeneratorSpec gen,
                                      std::string label, bool tiles) {
        IntervalPartition p;
        p.a_ = std::move(a);
        p.b_ = std::move(b);
        p.len_ = std::move(len);
        p.tail_kind_ = kind;
        p.tail_ = std::move(tail);
        p.gen_ = std::move(gen);
        p.label_ = std::move(label);
        p.tiles_ = tiles;
        p.validate();
        return p;
    }

    void validate() const {
        if (a_.empty()) throw ValidationError("partition has no intervals");
        if (a_.size() != b_.size() || a_.size() != len_.size()) throw ValidationError("partition arrays disagree");
        for (std::size_t i = 0; i < size(); ++i) {
            if (!(a_[i] < b_[i])) throw ValidationError("interval " + std::to_string(i + 1) + " has a_n >= b_n");
            if (a_[i] < 0.0 || b_[i] > 1.0) throw ValidationError("interval " + std::to_string(i + 1) + " leaves [0,1]");
            if (i && b_[i] > b_[i - 1]) throw ValidationError("intervals not ordered by right endpoint");
            if (i && b_[i] > a_[i - 1] + 1e-15)
                throw ValidationError("interiors of intervals " + std::to_string(i) + " and " + std::to_string(i + 1) +
                                      " overlap");
        }
        if (tail_kind_ == TailKind::Rule && !tail_) throw ValidationError("rule tail without a rule");
        if (tail_kind_ == TailKind::Rule && tiles_) {
            // Tail intervals sit in [0, a_M] and accumulate only at 0.
            const Interval rest = tail_power_sum(1.0);
            if (std::abs(a_.back() - rest.mid()) > 1e-12 + rest.width())
                throw ValidationError("tail mass does not match the gap [0, a_M]");
        }
    }

    double prefix_mass() const { return ordered_sum(len_); }

private:
    std::vector<double> a_, b_, len_;
    TailKind tail_kind_ = TailKind::None;
    std::optional<TailRule> tail_;
    GeneratorSpec gen_;
    std::string label_;
    bool tiles_ = false;
};

namespace detail {

inline std::string interval_text(double a, double b) {
    std::ostringstream os;
    os.precision(17);
    os << "[" << a << "," << b << "]";
    return os.str();
}

/// Sum over n > M of the tail lengths: the first 2^20 terms directly, the
/// rest through the rule's integral enclosure.
inline double accurate_tail_mass(const TailRule& tail, std::int64_t M) {
    constexpr std::int64_t kDirect = 1 << 20;
    const double direct = block_sum(kDirect, [&](std::size_t i) { return tail.length(M + 1 + static_cast<std::int64_t>(i)); });
    return direct + tail.tail_power_sum(1.0, M + kDirect).mid();
}

/// Lay out intervals from a length rule so that they tile [0,1] with
/// decreasing right endpoints: a_M equals the tail mass, and each b_n is
/// a_n + length_n, accumulated from the small end for relative accuracy.
inline IntervalPartition tile_from_rule(const TailRule& tail, std::int64_t M, GeneratorSpec gen, std::string label) {
    std::vector<double> len(M), a(M), b(M);
    for (std::int64_t n = 1; n <= M; ++n) len[n - 1] = tail.length(n);
    NeumaierSum pos;
    pos.add(accurate_tail_mass(tail, M));
    for (std::int64_t n = M; n >= 1; --n) {
        a[n - 1] = pos.value();
        pos.add(len[n - 1]);
        b[n - 1] = pos.value();
    }
    if (std::abs(b[0] - 1.0) > 1e-12)
        throw ValidationError("length rule does not sum to 1 (got " + std::to_string(b[0]) + ")");
    b[0] = 1.0;
    for (std::int64_t n = 1; n < M; ++n) b[n] = a[n - 1];
    return IntervalPartition::assemble(std::move(a), std::move(b), std::move(len), TailKind::Rule, tail, std::move(gen),
                                       std::move(label), true);
}

/// Normalizing constant for C (m+shift)^{-p} log(m+shift)^{-q}.
inline double power_log_total(double p, double q, double shift) {
    TailRule t{{Subsequence{1, 1, PowerLogRule{1.0, shift, p, q}}}, 0};
    return accurate_tail_mass(t, 0);
}

}  // namespace detail

/// First M intervals of the generator, in decreasing order of right endpoint.
inline IntervalPartition build_partition(const GeneratorSpec& spec, std::int64_t M) {
    if (M < 1) throw ValidationError("truncation M must be >= 1");
    const std::string label = spec.describe();
    switch (spec.kind) {
        case GeneratorKind::Gauss: {
            if (M > 10'000'000) throw ValidationError("gauss truncation above 1e7 cannot separate endpoints in double precision");
            std::vector<double> a(M), b(M), len(M);
            for (std::int64_t n = 1; n <= M; ++n) {
                const double x = static_cast<double>(n);
                a[n - 1] = 1.0 / (x + 1.0);
                b[n - 1] = 1.0 / x;
                len[n - 1] = 1.0 / (x * (x + 1.0));
            }
            TailRule tail{{Subsequence{1, 1, GaussRule{}}}, 0};
            return IntervalPartition::assemble(std::move(a), std::move(b), std::move(len), TailKind::Rule, tail, spec,
                                               label, true);
        }
        case GeneratorKind::GaussRestricted: {
            std::vector<int> d = spec.digits;
            std::sort(d.begin(), d.end());
            if (d.empty()) throw ValidationError("gauss-restricted needs at least one digit");
            if (d.front() < 1) throw ValidationError("gauss digits must be >= 1");
            if (std::adjacent_find(d.begin(), d.end()) != d.end()) throw ValidationError("repeated gauss digit");
            if (static_cast<std::int64_t>(d.size()) > M) d.resize(M);
            std::vector<double> a, b, len;
            for (int k : d) {
                const double x = k;
                a.push_back(1.0 / (x + 1.0));
                b.push_back(1.0 / x);
                len.push_back(1.0 / (x * (x + 1.0)));
            }
            GeneratorSpec g = spec;
            g.digits = d;
            return IntervalPartition::assemble(std::move(a), std::move(b), std::move(len), TailKind::None, std::nullopt,
                                               g, g.describe(), false);
        }
        case GeneratorKind::Dyadic: {
            if (M > 1000) throw ValidationError("dyadic truncation above 1000 cannot separate endpoints in double precision");
            std::vector<double> a(M), b(M), len(M);
            for (std::int64_t n = 1; n <= M; ++n) {
                a[n - 1] = std::ldexp(1.0, -static_cast<int>(n));
                b[n - 1] = std::ldexp(1.0, -static_cast<int>(n) + 1);
                len[n - 1] = a[n - 1];
            }
            TailRule tail{{Subsequence{1, 1, GeometricRule{1.0, 0.5}}}, 0};
            return IntervalPartition::assemble(std::move(a), std::move(b), std::move(len), TailKind::Rule, tail, spec,
                                               label, true);
        }
        case GeneratorKind::PowerLaw: {
            if (!(spec.exponent > 1.0)) throw ValidationError("power-law exponent must be > 1 for summable lengths");
            const double c = 1.0 / boost::math::zeta(spec.exponent);
            TailRule tail{{Subsequence{1, 1, PowerLogRule{c, 0.0, spec.exponent, 0.0}}}, 0};
            return detail::tile_from_rule(tail, M, spec, label);
        }
        case GeneratorKind::CustomLengths: {
            TailRule tail;
            if (spec.rule == "n-log2") {
                // lengths c / ((n+1) log^2 (n+1))
                const double c = 1.0 / detail::power_log_total(1.0, 2.0, 1.0);
                tail.parts = {Subsequence{1, 1, PowerLogRule{c, 1.0, 1.0, 2.0}}};
            } else if (spec.rule == "interleaved") {
                // c m^-2 at n = 2m-1 and c m^-3 at n = 2m
                const double c = 1.0 / (boost::math::zeta(2.0) + boost::math::zeta(3.0));
                tail.parts = {Subsequence{2, 1, PowerLogRule{c, 0.0, 2.0, 0.0}},
                              Subsequence{2, 2, PowerLogRule{c, 0.0, 3.0, 0.0}}};
            } else if (spec.rule == "power-log") {
                const bool summable = spec.p > 1.0 || (spec.p == 1.0 && spec.q > 1.0);
                if (!summable) throw ValidationError("power-log rule with p=" + std::to_string(spec.p) +
                                                     ", q=" + std::to_string(spec.q) + " is not summable");
                if (spec.q != 0.0 && !(spec.shift > 0.0))
                    throw ValidationError("power-log rule with q != 0 needs shift > 0");
                const double c = 1.0 / detail::power_log_total(spec.p, spec.q, spec.shift);
                tail.parts = {Subsequence{1, 1, PowerLogRule{c, spec.shift, spec.p, spec.q}}};
            } else {
                throw ValidationError("unknown length rule '" + spec.rule + "' (expected n-log2, interleaved, power-log)");
            }
            return detail::tile_from_rule(tail, M, spec, label);
        }
        case GeneratorKind::ExplicitList: {
            auto iv = spec.intervals;
            if (iv.empty()) throw ValidationError("explicit list is empty");
            for (const auto& [a, b] : iv) {
                if (!(a < b)) throw ValidationError("interval " + detail::interval_text(a, b) + " has a >= b");
                if (a < 0.0 || b > 1.0) throw ValidationError("interval " + detail::interval_text(a, b) + " leaves [0,1]");
            }
            std::vector<std::size_t> order(iv.size());
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return iv[i].second > iv[j].second; });
            for (std::size_t k = 1; k < order.size(); ++k) {
                const auto& hi = iv[order[k - 1]];
                const auto& lo = iv[order[k]];
                if (lo.second > hi.first)
                    throw ValidationError("interiors overlap: " + detail::interval_text(lo.first, lo.second) + " and " +
                                          detail::interval_text(hi.first, hi.second));
            }
            if (static_cast<std::int64_t>(order.size()) > M) order.resize(M);
            std::vector<double> a, b, len;
            for (auto i : order) {
                a.push_back(iv[i].first);
                b.push_back(iv[i].second);
                len.push_back(iv[i].second - iv[i].first);
            }
            const bool tiles = std::abs(ordered_sum(len) - 1.0) <= 1e-12;
            return IntervalPartition::assemble(std::move(a), std::move(b), std::move(len),
                                               spec.unbounded ? TailKind::Unknown : TailKind::None, std::nullopt, spec,
                                               label, tiles);
        }
        case GeneratorKind::Derived: break;
    }
    throw ValidationError("generator cannot be built directly");
}

// ---------------------------------------------------------------------------

enum class BranchKind { LinearFull, GaussAnalytic };

inline std::string to_string(BranchKind k) { return k == BranchKind::LinearFull ? "linear-full" : "gauss-analytic"; }

/// A piecewise map on a partition: each branch is either the increasing
/// affine map of I_n onto [0,1], or x -> 1/x - floor(1/x).
class BranchMap {
public:
    BranchMap(IntervalPartition partition, BranchKind kind) : part_(std::move(partition)), kind_(kind) {
        if (kind_ == BranchKind::GaussAnalytic) {
            const auto g = part_.generator().kind;
            if (g != GeneratorKind::Gauss && g != GeneratorKind::GaussRestricted)
                throw ValidationError("gauss-analytic branches need a gauss or gauss-restricted partition");
            for (double bn : part_.right()) digits_.push_back(static_cast<int>(std::lround(1.0 / bn)));
        }
        check_expansion();
    }

    const IntervalPartition& partition() const { return part_; }
    BranchKind kind() const { return kind_; }
    std::size_t branches() const { return part_.size(); }

    /// Continued-fraction digit of branch i (0-based); gauss maps only.
    int digit(std::size_t i) const { return digits_.at(i); }

    /// |T'(x)| for x inside branch i.
    double derivative(std::size_t i, double x) const {
        if (kind_ == BranchKind::LinearFull) return 1.0 / part_.lengths()[i];
        return 1.0 / (x * x);
    }

    /// sup |T''| / |T'|^2 over branch i.
    double renyi_constant(std::size_t i) const {
        if (kind_ == BranchKind::LinearFull) return 0.0;
        return 2.0 * part_.right()[i];  // |T''| / T'^2 = 2x
    }

    double apply(std::size_t i, double x) const {
        if (kind_ == BranchKind::LinearFull) return (x - part_.left()[i]) / part_.lengths()[i];
        const double y = 1.0 / x;
        return y - std::floor(y);
    }

private:
    void check_expansion() const {
        for (std::size_t i = 0; i < part_.size(); ++i) {
            const double a = part_.left()[i], w = part_.right()[i] - a;
            for (double f : {0.25, 0.5, 0.75}) {
                if (!(derivative(i, a + f * w) > 1.0))
                    throw ValidationError("branch " + std::to_string(i + 1) + " is not expanding");
            }
        }
    }

    IntervalPartition part_;
    BranchKind kind_;
    std::vector<int> digits_;
};

/// Projection of the symbolic cylinder [i_1 ... i_n] to [0,1], with the
/// range of |(T^n)'| over it.
struct CylinderWord {
    std::vector<std::size_t> symbols;  // 0-based branch indices
    double lo = 0.0, hi = 1.0;
    double length = 1.0;
    double deriv_inf = 1.0, deriv_sup = 1.0;
};

/// Convergent denominators of the continued fraction [0; d_1, ..., d_n].
struct Convergents {
    double p = 0.0, p_prev = 1.0;
    double q = 1.0, q_prev = 0.0;

    void push(int d) {
        const double np = d * p + p_prev;
        const double nq = d * q + q_prev;
        p_prev = p;
        q_prev = q;
        p = np;
        q = nq;
    }
};

inline CylinderWord cylinder(const BranchMap& map, const std::vector<std::size_t>& word) {
    CylinderWord c;
    c.symbols = word;
    const auto& P = map.partition();
    for (auto s : word)
        if (s >= P.size()) throw ValidationError("symbol out of range");
    if (map.kind() == BranchKind::LinearFull) {
        double lo = 0.0, hi = 1.0, len = 1.0;
        for (auto it = word.rbegin(); it != word.rend(); ++it) {
            lo = P.left()[*it] + P.lengths()[*it] * lo;
            hi = P.left()[*it] + P.lengths()[*it] * hi;
        }
        for (auto s : word) len *= P.lengths()[s];
        c.lo = lo;
        c.hi = hi;
        c.length = len;
        c.deriv_inf = c.deriv_sup = 1.0 / len;
        return c;
    }
    Convergents cv;
    for (auto s : word) cv.push(map.digit(s));
    const double x1 = cv.p / cv.q;
    const double x2 = (cv.p + cv.p_prev) / (cv.q + cv.q_prev);
    c.lo = std::min(x1, x2);
    c.hi = std::max(x1, x2);
    c.length = 1.0 / (cv.q * (cv.q + cv.q_prev));
    c.deriv_inf = cv.q * cv.q;
    c.deriv_sup = (cv.q + cv.q_prev) * (cv.q + cv.q_prev);
    return c;
}

inline constexpr std::int64_t kDefaultRefineCap = std::int64_t{1} << 22;

/// Partition into rank-k cylinders.  Uses the finite prefix as alphabet.
inline IntervalPartition refine_partition(const BranchMap& map, int k, std::int64_t cap = kDefaultRefineCap) {
    if (k < 1) throw ValidationError("refinement order k must be >= 1");
    if (k == 1) return map.partition();
    const auto A = static_cast<std::int64_t>(map.branches());
    double total = 1.0;
    for (int i = 0; i < k; ++i) total *= static_cast<double>(A);
    if (total > static_cast<double>(cap)) {
        std::ostringstream os;
        os << "refinement needs " << A << "^" << k << " = " << total << " cylinders; cap is " << cap
           << "; raise the cap to at least " << static_cast<std::int64_t>(total);
        throw CapacityError(os.str());
    }
    const auto count = static_cast<std::size_t>(total);
    std::vector<CylinderWord> cyl(count);
    parallel_for((count + kSumBlock - 1) / kSumBlock, [&](std::size_t blk) {
        std::vector<std::size_t> w(k);
        for (std::size_t idx = blk * kSumBlock; idx < std::min(count, (blk + 1) * kSumBlock); ++idx) {
            std::size_t r = idx;
            for (int j = k - 1; j >= 0; --j) {
                w[j] = r % A;
                r /= A;
            }
            cyl[idx] = cylinder(map, w);
        }
    });
    std::stable_sort(cyl.begin(), cyl.end(), [](const CylinderWord& x, const CylinderWord& y) { return x.hi > y.hi; });
    std::vector<double> a, b, len;
    for (const auto& c : cyl) {
        a.push_back(c.lo);
        b.push_back(c.hi);
        len.push_back(c.length);
    }
    GeneratorSpec g = map.partition().generator();
    g.kind = GeneratorKind::Derived;
    return IntervalPartition::assemble(std::move(a), std::move(b), std::move(len), TailKind::None, std::nullopt, g,
                                       map.partition().label() + " refined k=" + std::to_string(k), false);
}

/// Replace every interval inside [c,1] by a new tiling of the same set.
inline IntervalPartition perturb_compactly(const IntervalPartition& part, double c,
                                           std::vector<std::pair<double, double>> replacement) {
    if (!(c > 0.0 && c < 1.0)) throw ValidationError("perturbation region must be [c,1] with 0 < c < 1");
    const double tol = 1e-12;
    const auto& A = part.left();
    const auto& B = part.right();
    if (part.unbounded() && A.back() > c + tol)
        throw ValidationError("the prefix does not reach below c; increase the truncation");

    std::vector<std::pair<double, double>> removed;
    std::size_t first_kept = 0;
    for (std::size_t i = 0; i < part.size(); ++i) {
        if (B[i] <= c + tol) break;
        if (A[i] < c - tol)
            throw ValidationError("interval " + detail::interval_text(A[i], B[i]) + " straddles c");
        removed.push_back({A[i], B[i]});
        first_kept = i + 1;
    }
    if (removed.empty()) throw ValidationError("no interval lies in the region");

    for (const auto& [a, b] : replacement) {
        if (!(a < b)) throw ValidationError("replacement " + detail::interval_text(a, b) + " has a >= b");
        if (a < c - tol || b > 1.0 + tol)
            throw ValidationError("replacement " + detail::interval_text(a, b) + " leaks outside the region");
    }
    std::sort(replacement.begin(), replacement.end(), [](auto& x, auto& y) { return x.second > y.second; });
    for (std::size_t i = 1; i < replacement.size(); ++i)
        if (replacement[i].second > replacement[i - 1].first + tol)
            throw ValidationError("replacement intervals overlap");

    auto merged = [&](std::vector<std::pair<double, double>> v) {
        std::sort(v.begin(), v.end());
        std::vector<std::pair<double, double>> out;
        for (const auto& iv : v) {
            if (!out.empty() && iv.first <= out.back().second + tol)
                out.back().second = std::max(out.back().second, iv.second);
            else
                out.push_back(iv);
        }
        return out;
    };
    std::vector<double> old_len, new_len;
    for (const auto& [a, b] : removed) old_len.push_back(b - a);
    for (const auto& [a, b] : replacement) new_len.push_back(b - a);
    if (std::abs(ordered_sum(old_len) - ordered_sum(new_len)) > tol)
        throw ValidationError("replacement changes the total tiled mass");
    const auto mo = merged(removed), mn = merged(replacement);
    bool same = mo.size() == mn.size();
    for (std::size_t i = 0; same && i < mo.size(); ++i)
        same = std::abs(mo[i].first - mn[i].first) <= tol && std::abs(mo[i].second - mn[i].second) <= tol;
    if (!same) throw ValidationError("replacement does not tile the replaced intervals");

    // A replacement interval that coincides with a removed one keeps its
    // stored length, so re-inserting the original intervals is exact.
    auto length_of = [&](double x, double y) {
        for (std::size_t i = 0; i < removed.size(); ++i)
            if (std::abs(removed[i].first - x) <= tol && std::abs(removed[i].second - y) <= tol)
                return part.lengths()[i];
        return y - x;
    };
    std::vector<double> a, b, len;
    for (const auto& [x, y] : replacement) {
        a.push_back(x);
        b.push_back(y);
        len.push_back(length_of(x, y));
    }
    for (std::size_t i = first_kept; i < part.size(); ++i) {
        a.push_back(A[i]);
        b.push_back(B[i]);
        len.push_back(part.lengths()[i]);
    }
    std::optional<TailRule> tail = part.tail();
    if (tail)
        tail->shift += static_cast<std::int64_t>(replacement.size()) - static_cast<std::int64_t>(removed.size());
    GeneratorSpec g = part.generator();
    g.kind = GeneratorKind::Derived;
    std::ostringstream lbl;
    lbl << part.label() << " perturbed on [" << c << ",1]";
    return IntervalPartition::assemble(std::move(a), std::move(b), std::move(len), part.tail_kind(), tail, g,
                                       lbl.str(), part.tiles_unit_interval());
}

/// CSV with columns n, a_n, b_n, length.
inline void write_partition_csv(std::ostream& os, const IntervalPartition& part) {
    char buf[128];
    os << "n,a_n,b_n,length\n";
    for (std::size_t i = 0; i < part.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", i + 1, part.left()[i], part.right()[i],
                      part.lengths()[i]);
        os << buf;
    }
}

}  // namespace pressdim
