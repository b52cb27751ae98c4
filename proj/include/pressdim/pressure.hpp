#pragma once
/**
 * @file pressure.hpp
 * @brief Pressure of the geometric potential: series evaluation for
 *        piecewise-linear maps, cylinder and ratio brackets for the Gauss
 *        family, the convergence abscissa s_inf, and Bowen roots.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pressdim/interval_partition.hpp"
#include "pressdim/numeric.hpp"

namespace pressdim {

enum class PressureMethod { LinearSeries, CylinderBracket, RatioBracket };

inline std::string to_string(PressureMethod m) {
    switch (m) {
        case PressureMethod::LinearSeries: return "linear-series";
        case PressureMethod::CylinderBracket: return "cylinder-bracket";
        case PressureMethod::RatioBracket: return "ratio-bracket";
    }
    return "?";
}

/// P(t) with a certified enclosure [lower, upper].
struct PressureSample {
    double t = 0.0;
    double value = 0.0;
    bool infinite = false;
    double lower = 0.0;
    double upper = 0.0;
    std::int64_t truncation = 0;
    double tail_bound = 0.0;  ///< upper bound of the unsummed tail
    PressureMethod method = PressureMethod::LinearSeries;
    int order = 1;
    double distortion = 1.0;  ///< max over cylinders of sup|(T^n)'| / inf|(T^n)'|
    std::string note;

    std::string method_label() const {
        if (method == PressureMethod::LinearSeries) return to_string(method);
        return to_string(method) + "(" + std::to_string(order) + ")";
    }
};

namespace detail {
inline PressureSample infinite_sample(double t, std::int64_t M, std::string note) {
    PressureSample s;
    s.t = t;
    s.value = s.lower = s.upper = kInf;
    s.infinite = true;
    s.truncation = M;
    s.tail_bound = kInf;
    s.note = std::move(note);
    return s;
}
}  // namespace detail

/// P(t) = log sum (b_n - a_n)^t.
inline PressureSample pressure_linear(const IntervalPartition& part, double t) {
    const auto M = static_cast<std::int64_t>(part.size());
    if (t <= 0.0 && part.unbounded())
        return detail::infinite_sample(t, M, "t <= 0 with infinitely many intervals");
    if (part.tail_kind() == TailKind::Rule && !part.tail()->converges(t))
        return detail::infinite_sample(t, M, "tail rule diverges at this t (integral-test minorant)");

    const auto& len = part.lengths();
    const double partial = block_sum(len.size(), [&](std::size_t i) { return std::pow(len[i], t); });
    const Interval tail = part.tail_power_sum(t);

    PressureSample s;
    s.t = t;
    s.truncation = M;
    s.tail_bound = tail.hi;
    // Neumaier summation keeps the relative error of the partial sum near
    // one rounding; 1e-14 leaves a wide margin.
    const double pad = 1e-14;
    s.lower = std::log(partial + tail.lo) - pad;
    if (std::isfinite(tail.hi)) {
        s.value = std::log(partial + tail.mid());
        s.upper = std::log(partial + tail.hi) + pad;
    } else {
        s.value = std::log(partial);
        s.upper = kInf;
        s.note = "no tail rule: upper bracket unbounded, value is the partial sum only";
    }
    if (part.tail_kind() == TailKind::None) s.value = std::log(partial);
    return s;
}

/// Largest n' with A^n' <= cap and largest M' with M'^n <= cap.
inline std::string enumeration_suggestion(std::int64_t A, int n, std::int64_t cap) {
    int n2 = 0;
    for (double w = A; w <= static_cast<double>(cap); w *= static_cast<double>(A)) ++n2;
    const auto M2 = static_cast<std::int64_t>(std::floor(std::pow(static_cast<double>(cap), 1.0 / n) + 1e-9));
    std::ostringstream os;
    os << "alphabet " << A << " at order " << n << " needs " << std::pow(static_cast<double>(A), n)
       << " words, above the cap " << cap << "; try (n=" << n2 << ", M=" << A << ") or (n=" << n << ", M=" << M2 << ")";
    return os.str();
}

inline constexpr std::int64_t kDefaultWordCap = std::int64_t{1} << 25;

namespace detail {

/// Visit every word of length n over an alphabet of size A in fixed blocks
/// (by prefix).  `leaf(block, state)` receives the per-word state produced by
/// `step(state, symbol)`.  Block boundaries depend only on (A, n).
template <class State, class Step, class Leaf>
void enumerate_words(std::int64_t A, int n, const State& root, Step&& step,
                     std::vector<std::vector<double>>& lo_terms, std::vector<std::vector<double>>& hi_terms,
                     Leaf&& leaf) {
    int p = 0;
    double suffix = std::pow(static_cast<double>(A), n);
    while (p < n && suffix > 65536.0) {
        ++p;
        suffix /= static_cast<double>(A);
    }
    std::size_t blocks = 1;
    for (int i = 0; i < p; ++i) blocks *= static_cast<std::size_t>(A);
    lo_terms.assign(blocks, {});
    hi_terms.assign(blocks, {});
    parallel_for(blocks, [&](std::size_t b) {
        State st = root;
        std::size_t r = b;
        std::vector<int> pre(p);
        for (int j = p - 1; j >= 0; --j) {
            pre[j] = static_cast<int>(r % A);
            r /= A;
        }
        for (int j = 0; j < p; ++j) st = step(st, pre[j]);
        std::vector<State> stack(n - p + 1);
        std::vector<int> sym(n - p + 1, 0);
        const int L = n - p;
        stack[0] = st;
        if (L == 0) {
            leaf(b, st);
            return;
        }
        int d = 0;
        sym[0] = 0;
        for (;;) {
            if (sym[d] < A) {
                stack[d + 1] = step(stack[d], sym[d]);
                if (d + 1 == L) {
                    leaf(b, stack[d + 1]);
                    ++sym[d];
                } else {
                    ++d;
                    sym[d] = 0;
                }
            } else {
                if (d == 0) break;
                --d;
                ++sym[d];
            }
        }
    });
}

}  // namespace detail

/// Order-n bracket from the per-cylinder range of |(T^n)'|:
///   lower = (1/n) log sum_w (sup |(T^n)'|)^{-t},
///   upper = (1/n) log sum_w (inf |(T^n)'|)^{-t}.
/// Words run over the first min(M, branches) branches.
inline PressureSample pressure_cylinder_bracket(const BranchMap& map, double t, int n, std::int64_t M,
                                                std::int64_t cap = kDefaultWordCap) {
    if (n < 1) throw ValidationError("order n must be >= 1");
    if (M < 2) throw ValidationError("alphabet cap M must be >= 2");
    const std::int64_t A = std::min<std::int64_t>(M, static_cast<std::int64_t>(map.branches()));
    if (std::pow(static_cast<double>(A), n) > static_cast<double>(cap))
        throw CapacityError(enumeration_suggestion(A, n, cap));

    std::vector<std::vector<double>> lo_terms, hi_terms;
    PressureSample s;
    s.t = t;
    s.order = n;
    s.truncation = A;
    s.method = PressureMethod::CylinderBracket;

    if (map.kind() == BranchKind::LinearFull) {
        const auto& len = map.partition().lengths();
        detail::enumerate_words(
            A, n, 1.0, [&](double prod, int d) { return prod * len[d]; }, lo_terms, hi_terms,
            [&](std::size_t b, double prod) { lo_terms[b].push_back(std::pow(prod, t)); });
        hi_terms = lo_terms;
        s.distortion = 1.0;
    } else {
        std::vector<int> digit(A);
        for (std::int64_t i = 0; i < A; ++i) digit[i] = map.digit(i);
        detail::enumerate_words(
            A, n, Convergents{}, [&](Convergents c, int d) { c.push(digit[d]); return c; }, lo_terms, hi_terms,
            [&](std::size_t b, const Convergents& c) {
                lo_terms[b].push_back(std::pow(c.q + c.q_prev, -2.0 * t));
                hi_terms[b].push_back(std::pow(c.q, -2.0 * t));
            });
        // Distortion: the largest ((q + q') / q)^2 among words.
        double cmax = 1.0;
        for (std::size_t b = 0; b < lo_terms.size(); ++b) {
            for (std::size_t i = 0; i < lo_terms[b].size(); ++i) {
                const double r = std::pow(hi_terms[b][i] / lo_terms[b][i], 1.0 / t);
                cmax = std::max(cmax, r);
            }
        }
        s.distortion = t > 0.0 ? cmax : 4.0;
    }
    std::vector<double> lo_b(lo_terms.size()), hi_b(hi_terms.size());
    for (std::size_t b = 0; b < lo_terms.size(); ++b) {
        lo_b[b] = ordered_sum(std::move(lo_terms[b]));
        hi_b[b] = ordered_sum(std::move(hi_terms[b]));
    }
    const double lo_sum = ordered_sum(std::move(lo_b));
    const double hi_sum = ordered_sum(std::move(hi_b));
    s.lower = std::log(lo_sum) / n;
    s.upper = std::log(hi_sum) / n;
    if (map.kind() == BranchKind::GaussAnalytic) {
        s.lower -= 1e-14;
        s.upper += 1e-14;
    }
    s.value = 0.5 * (s.lower + s.upper);
    if (map.partition().unbounded() && A == static_cast<std::int64_t>(map.branches()))
        s.note = "alphabet limited to the " + std::to_string(A) + " materialized branches";
    return s;
}

/// Enclosure of P(t) for a finite-alphabet Gauss system from the ratio of
/// consecutive cylinder sums g_n(y) = sum_{|w|=n} (q_w + q'_w y)^{-2t}.
///
/// g_{n+1} is the transfer operator applied to g_n, and both are positive
/// and decreasing on [0,1].  On a grid of cells [y_j, y_{j+1}] the ratio is
/// enclosed by g_{n+1}(y_{j+1}) / g_n(y_j) and g_{n+1}(y_j) / g_n(y_{j+1}).
/// The min and max of these over cells bracket exp P(t).
inline PressureSample pressure_ratio_bracket(const BranchMap& map, double t, int n, int grid,
                                             std::int64_t cap = kDefaultWordCap) {
    if (map.kind() != BranchKind::GaussAnalytic) throw ValidationError("ratio bracket needs gauss-analytic branches");
    if (map.partition().unbounded())
        throw ValidationError("ratio bracket needs a finite alphabet (use gauss-restricted digits)");
    if (n < 1 || grid < 1) throw ValidationError("ratio bracket needs n >= 1 and grid >= 1");
    const auto A = static_cast<std::int64_t>(map.branches());
    if (std::pow(static_cast<double>(A), n + 1) > static_cast<double>(cap))
        throw CapacityError(enumeration_suggestion(A, n + 1, cap));

    auto collect = [&](int order) {
        std::vector<double> q, qp;
        std::vector<int> sym(order, 0);
        // Lexicographic enumeration, recomputing convergents from scratch;
        // word counts here are small.
        for (;;) {
            Convergents cv;
            for (int k = 0; k < order; ++k) cv.push(map.digit(sym[k]));
            q.push_back(cv.q);
            qp.push_back(cv.q_prev);
            int k = order - 1;
            while (k >= 0 && ++sym[k] == A) sym[k--] = 0;
            if (k < 0) break;
        }
        return std::make_pair(q, qp);
    };
    const auto [q1, qp1] = collect(n);
    const auto [q2, qp2] = collect(n + 1);

    std::vector<double> g1(grid + 1), g2(grid + 1);
    parallel_for(static_cast<std::size_t>(grid + 1), [&](std::size_t j) {
        const double y = static_cast<double>(j) / grid;
        NeumaierSum s1, s2;
        for (std::size_t i = 0; i < q1.size(); ++i) s1.add(std::pow(q1[i] + qp1[i] * y, -2.0 * t));
        for (std::size_t i = 0; i < q2.size(); ++i) s2.add(std::pow(q2[i] + qp2[i] * y, -2.0 * t));
        g1[j] = s1.value();
        g2[j] = s2.value();
    });
    double lo = kInf, hi = 0.0;
    for (int j = 0; j < grid; ++j) {
        lo = std::min(lo, g2[j + 1] / g1[j]);
        hi = std::max(hi, g2[j] / g1[j + 1]);
    }
    PressureSample s;
    s.t = t;
    s.order = n;
    s.truncation = A;
    s.method = PressureMethod::RatioBracket;
    s.lower = std::log(lo) - 1e-13;
    s.upper = std::log(hi) + 1e-13;
    s.value = 0.5 * (s.lower + s.upper);
    s.note = "grid=" + std::to_string(grid);
    return s;
}

// ---------------------------------------------------------------------------

enum class DivergenceBehavior { DivergesAtSInf, ConvergesAtSInf, Undetermined };

inline std::string to_string(DivergenceBehavior b) {
    switch (b) {
        case DivergenceBehavior::DivergesAtSInf: return "diverges_at_s_inf";
        case DivergenceBehavior::ConvergesAtSInf: return "converges_at_s_inf";
        case DivergenceBehavior::Undetermined: return "undetermined";
    }
    return "?";
}

struct PartialSumRecord {
    std::int64_t N = 0;
    double partial = 0.0;
};

struct CriticalExponentEstimate {
    double s_low = 0.0;
    double s_high = 0.0;
    DivergenceBehavior behavior = DivergenceBehavior::Undetermined;
    double evidence_t = 0.0;                 ///< exponent at which partial sums were recorded
    std::vector<PartialSumRecord> evidence;  ///< partial sums at N = 10, 100, ...
    int bisection_steps = 0;
    std::string note;

    double width() const { return s_high - s_low; }
    double mid() const { return 0.5 * (s_low + s_high); }
};

namespace detail {
inline std::vector<PartialSumRecord> partial_sum_growth(const IntervalPartition& part, double t, std::int64_t n_max) {
    std::vector<PartialSumRecord> out;
    NeumaierSum running;
    std::int64_t done = 0;
    for (std::int64_t N = 10; N <= n_max; N *= 10) {
        const std::int64_t from = done;
        running.add(block_sum(static_cast<std::size_t>(N - from),
                              [&](std::size_t i) { return std::pow(part.length(from + 1 + static_cast<std::int64_t>(i)), t); }));
        done = N;
        out.push_back({N, running.value()});
    }
    return out;
}
}  // namespace detail

/// Bisection on the convergence of sum (b_n - a_n)^t, decided by the
/// integral test of the closed-form tail.
inline CriticalExponentEstimate find_s_infinity(const IntervalPartition& part, double tol,
                                                std::int64_t evidence_n_max = 1'000'000) {
    if (!(tol > 0.0)) throw ValidationError("tol must be > 0");
    CriticalExponentEstimate est;
    if (part.tail_kind() == TailKind::None) {
        est.note = "finite partition: the series converges for every t; s_inf reported as 0";
        return est;
    }
    if (part.tail_kind() == TailKind::Unknown) {
        est.s_high = kInf;
        est.note = "no tail rule: convergence cannot be decided";
        return est;
    }
    const TailRule& tail = *part.tail();
    if (tail.converges(1e-12)) {
        est.note = "series converges for every t > 0 tested (down to 1e-12); s_inf = 0. "
                   "Boundary convention: the series at t = 0 itself diverges.";
        est.behavior = DivergenceBehavior::ConvergesAtSInf;
        est.evidence_t = 1e-12;
        est.evidence = detail::partial_sum_growth(part, est.evidence_t, std::min<std::int64_t>(evidence_n_max, 1000));
        return est;
    }
    double lo = 0.0, hi = 1.0;
    while (!tail.converges(hi)) {
        hi *= 2.0;
        if (hi > 1e6) throw ValidationError("series diverges for every t up to 1e6");
    }
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (tail.converges(mid))
            hi = mid;
        else
            lo = mid;
        ++est.bisection_steps;
    }
    est.s_low = lo;
    est.s_high = hi;
    const double sc = tail.critical();
    if (sc >= lo && sc <= hi) {
        est.behavior = tail.converges_at_critical() ? DivergenceBehavior::ConvergesAtSInf
                                                    : DivergenceBehavior::DivergesAtSInf;
        est.evidence_t = sc;
    } else {
        est.behavior = DivergenceBehavior::Undetermined;
        est.evidence_t = est.mid();
    }
    est.evidence = detail::partial_sum_growth(part, est.evidence_t, evidence_n_max);
    return est;
}

struct StabilityVerdict {
    DivergenceBehavior behavior = DivergenceBehavior::Undetermined;
    CriticalExponentEstimate estimate;
    std::string annotation;
};

/// Whether the series still diverges at s_inf, with the resulting statement
/// about compact perturbations.
inline StabilityVerdict classify_s_infinity_behavior(const IntervalPartition& part, double tol = 1e-3,
                                                     double max_width = 0.05) {
    StabilityVerdict v;
    v.estimate = find_s_infinity(part, tol, 100'000);
    v.behavior = v.estimate.behavior;
    if (v.estimate.width() > max_width) v.behavior = DivergenceBehavior::Undetermined;
    switch (v.behavior) {
        case DivergenceBehavior::DivergesAtSInf:
            v.annotation = "P(s_inf) = infinity: every compact perturbation admits a measure of maximal dimension";
            break;
        case DivergenceBehavior::ConvergesAtSInf:
            v.annotation = "P(s_inf) < infinity: some compact perturbations have no measure of maximal dimension";
            if (v.estimate.s_high == 0.0) v.annotation += " (s_inf = 0 boundary convention)";
            break;
        case DivergenceBehavior::Undetermined: v.annotation = "bracket too wide or no tail rule"; break;
    }
    return v;
}

// ---------------------------------------------------------------------------

struct BowenResult {
    double t_low = 0.0;   ///< certified: P(t) > 0 for t < t_low
    double t_high = 0.0;  ///< certified: P(t) < 0 for t > t_high
    bool bracketed = true;
    bool jump_at_lower_end = false;  ///< P <= 0 already at the range start
    int evaluations = 0;
    std::string note;

    double mid() const { return 0.5 * (t_low + t_high); }
    double width() const { return t_high - t_low; }
};

using PressureEvaluator = std::function<PressureSample(double)>;

/// Root of a decreasing pressure function, bracketed from its certified
/// lower and upper enclosures.  The true root lies in [t_low, t_high].
inline BowenResult bowen_root(const PressureEvaluator& eval, double t_min, double t_max, double tol) {
    if (!(t_min < t_max)) throw ValidationError("bowen range must have t_min < t_max");
    if (!(tol > 0.0)) throw ValidationError("tol must be > 0");
    BowenResult r;
    auto sample = [&](double t) {
        ++r.evaluations;
        return eval(t);
    };
    const PressureSample s_lo = sample(t_min);
    const PressureSample s_hi = sample(t_max);

    // Left end: largest t known to have lower(t) > 0.
    if (s_hi.lower > 0.0) {
        r.t_low = r.t_high = t_max;
        r.bracketed = false;
        r.note = "pressure positive on the whole range";
        return r;
    }
    if (!(s_lo.upper >= 0.0)) {
        r.t_low = r.t_high = t_min;
        r.jump_at_lower_end = true;
        r.note = "pressure already <= 0 at the range start";
        return r;
    }
    double a = t_min, b = t_max;
    if (s_lo.lower > 0.0) {
        while (b - a > 0.5 * tol) {
            const double m = 0.5 * (a + b);
            if (sample(m).lower > 0.0)
                a = m;
            else
                b = m;
        }
        r.t_low = a;
    } else {
        r.t_low = t_min;
        r.note = "lower bracket not positive at range start";
    }
    // Right end: smallest t known to have upper(t) < 0.
    a = r.t_low;
    b = t_max;
    if (s_hi.upper < 0.0) {
        while (b - a > 0.5 * tol) {
            const double m = 0.5 * (a + b);
            if (sample(m).upper < 0.0)
                b = m;
            else
                a = m;
        }
        r.t_high = b;
    } else {
        r.t_high = t_max;
        r.bracketed = false;
        r.note = "upper bracket not negative at range end";
    }
    return r;
}

/// Pressure evaluator for a branch map: series for linear maps, the order-n
/// distortion bracket for Gauss maps.
inline PressureEvaluator make_evaluator(const BranchMap& map, int order, std::int64_t alphabet_cap) {
    if (map.kind() == BranchKind::LinearFull && order == 1) {
        const IntervalPartition& p = map.partition();
        return [&p](double t) { return pressure_linear(p, t); };
    }
    return [&map, order, alphabet_cap](double t) { return pressure_cylinder_bracket(map, t, order, alphabet_cap); };
}

/// Bowen roots of a Gauss-type map at several distortion orders.
struct BowenOrder {
    int order = 0;
    BowenResult root;
    double pressure_width = 0.0;  ///< upper - lower of the order-n bracket at the root midpoint
    double distortion = 1.0;      ///< C for this order
    double bound = 0.0;           ///< 2 t log C / n at the root midpoint
};

struct NestedBowenResult {
    std::vector<BowenOrder> orders;
    bool nested = true;         ///< each root bracket lies in the previous one
    Interval plain;             ///< intersection of the order-n root brackets
    std::optional<BowenResult> ratio;
    int ratio_order = 0, ratio_grid = 0;
    Interval certified;         ///< intersection with the ratio enclosure, when present
};

inline NestedBowenResult bowen_nested(const BranchMap& map, const std::vector<int>& orders, std::int64_t alphabet,
                                      double t_min, double t_max, double tol, int ratio_order = 0,
                                      int ratio_grid = 4096, std::int64_t cap = kDefaultWordCap) {
    if (orders.empty()) throw ValidationError("need at least one order");
    NestedBowenResult r;
    r.plain = {t_min, t_max};
    for (int n : orders) {
        BowenOrder o;
        o.order = n;
        o.root = bowen_root([&](double t) { return pressure_cylinder_bracket(map, t, n, alphabet, cap); }, t_min,
                            t_max, tol);
        const PressureSample s = pressure_cylinder_bracket(map, o.root.mid(), n, alphabet, cap);
        o.pressure_width = s.upper - s.lower;
        o.distortion = s.distortion;
        o.bound = 2.0 * std::log(s.distortion) * o.root.mid() / n;
        if (!r.orders.empty()) {
            const auto& prev = r.orders.back().root;
            r.nested = r.nested && o.root.t_low >= prev.t_low && o.root.t_high <= prev.t_high;
        }
        r.plain.lo = std::max(r.plain.lo, o.root.t_low);
        r.plain.hi = std::min(r.plain.hi, o.root.t_high);
        r.orders.push_back(o);
    }
    r.certified = r.plain;
    if (ratio_order > 0) {
        r.ratio_order = ratio_order;
        r.ratio_grid = ratio_grid;
        r.ratio = bowen_root([&](double t) { return pressure_ratio_bracket(map, t, ratio_order, ratio_grid, cap); },
                             t_min, t_max, tol);
        r.certified.lo = std::max(r.certified.lo, r.ratio->t_low);
        r.certified.hi = std::min(r.certified.hi, r.ratio->t_high);
    }
    return r;
}

}  // namespace pressdim
