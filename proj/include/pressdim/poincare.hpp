#pragma once
/**
 * @file poincare.hpp
 * @brief Poincare series, critical exponents and orbit counting for
 *        parabolic translation groups.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pressdim/hyperbolic.hpp"
#include "pressdim/numeric.hpp"
#include "pressdim/pressure.hpp"

namespace pressdim {

enum class TailClass { ConvergentWithBound, DivergentMinorant, Undetermined };

inline std::string to_string(TailClass c) {
    switch (c) {
        case TailClass::ConvergentWithBound: return "convergent-with-bound";
        case TailClass::DivergentMinorant: return "divergent-minorant";
        case TailClass::Undetermined: return "undetermined";
    }
    return "?";
}

struct PoincareSample {
    double s = 0.0;
    double partial_sum = 0.0;  ///< includes the identity term
    std::int64_t radius = 0;
    TailClass tail_class = TailClass::Undetermined;
    double tail_bound = kInf;  ///< bound on the terms with |N|_inf > radius
    double minorant = 0.0;     ///< divergent comparison series summed to radius
};

/// Decide convergence of sum exp(-s d(o, N.o)) by comparing with
/// sum |N|^{-2s} over Z^k; within `band` of s = k/2 the answer is left open.
inline TailClass classify_poincare_tail(int k, double s, double band) {
    const double gap = 2.0 * s - k;
    if (gap > band) return TailClass::ConvergentWithBound;
    if (gap < -band) return TailClass::DivergentMinorant;
    return TailClass::Undetermined;
}

/// Sum over the cube |N|_inf <= M of exp(-s * 2 asinh(|sum N_i alpha_i| / 2)).
inline PoincareSample poincare_partial(const ParabolicGroupSpec& group, double s, std::int64_t M,
                                       double band = 1e-9) {
    group.validate();
    if (!(s >= 0.0)) throw ValidationError("s must be >= 0");
    if (M < 1) throw ValidationError("radius M must be >= 1");
    const int k = group.k;
    const auto side = static_cast<std::size_t>(2 * M + 1);
    double total_d = 1.0;
    for (int i = 0; i < k; ++i) total_d *= static_cast<double>(side);
    if (total_d > 2e9) throw CapacityError("cube of radius " + std::to_string(M) + " is too large to enumerate");
    const auto total = static_cast<std::size_t>(total_d);
    const Eigen::MatrixXd A = group.matrix();

    PoincareSample out;
    out.s = s;
    out.radius = M;
    out.partial_sum = block_sum(total, [&](std::size_t idx) {
        Eigen::VectorXd N(k);
        std::size_t r = idx;
        for (int i = k - 1; i >= 0; --i) {
            N(i) = static_cast<double>(static_cast<std::int64_t>(r % side) - M);
            r /= side;
        }
        return std::exp(-s * horosphere_distance((A * N).norm()));
    });

    const auto [smin, smax] = group.singular_range();
    out.tail_class = classify_poincare_tail(k, s, band);
    if (out.tail_class == TailClass::ConvergentWithBound) {
        // Shell |N|_inf = m has at most 2k(3m)^{k-1} points, each with
        // |A N| >= smin m and exp(-s d) <= |A N|^{-2s}.
        const double Md = static_cast<double>(M);
        out.tail_bound = 2.0 * k * std::pow(3.0, k - 1) * std::pow(smin, -2.0 * s) * std::pow(Md, k - 2.0 * s) /
                         (2.0 * s - k);
    }
    // Minorant: shells hold at least 2k(2m-1)^{k-1} points with
    // |A N| <= smax sqrt(k) m, and exp(-s d) >= (1 + |A N|)^{-2s}.
    NeumaierSum mn;
    for (std::int64_t m = 1; m <= M; ++m) {
        const double md = static_cast<double>(m);
        mn.add(2.0 * k * std::pow(2.0 * md - 1.0, k - 1) * std::pow(1.0 + smax * std::sqrt(k) * md, -2.0 * s));
    }
    out.minorant = mn.value();
    return out;
}

/// Bisection on the tail classification.  Stops early when the
/// classification becomes undetermined.
inline CriticalExponentEstimate critical_exponent(const ParabolicGroupSpec& group, double tol, double band = 1e-9) {
    group.validate();
    if (!(tol > 0.0)) throw ValidationError("tol must be > 0");
    CriticalExponentEstimate est;
    double lo = 0.0, hi = static_cast<double>(group.k);
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        const TailClass c = classify_poincare_tail(group.k, mid, band);
        ++est.bisection_steps;
        if (c == TailClass::ConvergentWithBound)
            hi = mid;
        else if (c == TailClass::DivergentMinorant)
            lo = mid;
        else {
            // Inside the band around k/2: step out until both sides are
            // decided, then stop refining.
            double step = band;
            while (classify_poincare_tail(group.k, mid - step, band) != TailClass::DivergentMinorant ||
                   classify_poincare_tail(group.k, mid + step, band) != TailClass::ConvergentWithBound)
                step *= 2.0;
            lo = std::max(lo, mid - step);
            hi = std::min(hi, mid + step);
            est.note = "classification undetermined at s=" + format_double(mid) + "; bracket refinement stopped";
            break;
        }
    }
    est.s_low = lo;
    est.s_high = hi;
    // At s = k/2 the comparison series is sum |N|^{-k} over Z^k, which diverges.
    est.behavior = DivergenceBehavior::DivergesAtSInf;
    est.evidence_t = 0.5 * (lo + hi);
    for (std::int64_t M = 10;; M *= 10) {
        if (std::pow(2.0 * M + 1.0, group.k) > 5e6) break;
        est.evidence.push_back({M, poincare_partial(group, est.evidence_t, M, band).partial_sum});
    }
    return est;
}

// ---------------------------------------------------------------------------

struct CountingFunction {
    std::vector<double> thresholds;
    std::vector<std::int64_t> counts;
    std::vector<double> slopes;  ///< log(count) / t, 0 for count = 1
    double final_slope = 0.0;    ///< least-squares slope of log(count) against t over the last third
    std::size_t fit_from = 0;    ///< first level in the fit
};

namespace detail {

/// #{N in Z^k : |A N| <= R} by nested enumeration on the Cholesky factor of
/// the Gram matrix; the innermost coordinate is counted in closed form.
inline std::int64_t lattice_count(const Eigen::MatrixXd& U, double R) {
    const int k = static_cast<int>(U.rows());
    const double R2 = R * R;
    // |A N|^2 = |U N|^2 with U upper triangular.  Coordinates are fixed from
    // the last one down to the first.
    std::int64_t total = 0;
    std::vector<double> N(k, 0.0);
    std::function<void(int, double)> rec = [&](int i, double used) {
        double c = 0.0;  // sum_{j > i} U(i,j) N_j
        for (int j = i + 1; j < k; ++j) c += U(i, j) * N[j];
        const double rem = R2 - used;
        if (rem < 0.0) return;
        const double w = std::sqrt(rem);
        const double lo = std::ceil((-c - w) / U(i, i));
        const double hi = std::floor((-c + w) / U(i, i));
        if (hi < lo) return;
        if (i == 0) {
            total += static_cast<std::int64_t>(hi - lo) + 1;
            return;
        }
        for (double v = lo; v <= hi; v += 1.0) {
            N[i] = v;
            const double e = U(i, i) * v + c;
            rec(i - 1, used + e * e);
        }
    };
    rec(k - 1, 0.0);
    return total;
}

inline double outer_iterations(const Eigen::MatrixXd& U, double R) {
    double w = 1.0;
    for (int i = 1; i < U.rows(); ++i) w *= 2.0 * R / U(i, i) + 1.0;
    return w;
}

}  // namespace detail

/// Exact counts #{N : d(o, N.o) <= t_j} at t_j = t_max * j / levels.
inline CountingFunction counting_exponent(const ParabolicGroupSpec& group, double t_max, int levels,
                                          double iteration_cap = 2e8) {
    group.validate();
    if (levels < 3) throw ValidationError("counting needs at least 3 levels");
    if (!(t_max > 0.0)) throw ValidationError("t_max must be > 0");
    const Eigen::MatrixXd G = group.matrix().transpose() * group.matrix();
    const Eigen::MatrixXd U = Eigen::LLT<Eigen::MatrixXd>(G).matrixU();
    auto radius = [](double t) { return 2.0 * std::sinh(0.5 * t); };
    if (detail::outer_iterations(U, radius(t_max)) > iteration_cap) {
        double a = 0.0, b = t_max;
        for (int i = 0; i < 60; ++i) {
            const double m = 0.5 * (a + b);
            (detail::outer_iterations(U, radius(m)) > iteration_cap ? b : a) = m;
        }
        throw CapacityError("counting to t_max=" + std::to_string(t_max) + " exceeds the enumeration cap; achievable t_max is " +
                            std::to_string(a));
    }
    CountingFunction cf;
    cf.thresholds.resize(levels);
    cf.counts.resize(levels);
    cf.slopes.resize(levels);
    parallel_for(static_cast<std::size_t>(levels), [&](std::size_t j) {
        const double t = t_max * static_cast<double>(j + 1) / levels;
        cf.thresholds[j] = t;
        cf.counts[j] = detail::lattice_count(U, radius(t));
    });
    for (int j = 0; j < levels; ++j)
        cf.slopes[j] = cf.counts[j] > 1 ? std::log(static_cast<double>(cf.counts[j])) / cf.thresholds[j] : 0.0;

    cf.fit_from = static_cast<std::size_t>(levels - std::max(2, levels / 3));
    double sx = 0, sy = 0, sxx = 0, sxy = 0, m = 0;
    for (std::size_t j = cf.fit_from; j < cf.counts.size(); ++j) {
        if (cf.counts[j] <= 1) continue;
        const double x = cf.thresholds[j], y = std::log(static_cast<double>(cf.counts[j]));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        m += 1;
    }
    cf.final_slope = m >= 2 ? (m * sxy - sx * sy) / (m * sxx - sx * sx) : 0.0;
    return cf;
}

// ---------------------------------------------------------------------------

/// Positive decreasing sequence a_n = exp(-neg_log(n)).
struct DichotomyRule {
    std::string name;
    std::function<double(double)> neg_log;

    static DichotomyRule power(double p) {
        return {"n^-" + std::to_string(p), [p](double n) { return p * std::log(n); }};
    }
    /// exp(-s d(o, n.o)) for the unit translation in H^2.
    static DichotomyRule orbit(double s) {
        return {"exp(-s 2asinh(n/2)), s=" + std::to_string(s), [s](double n) { return s * horosphere_distance(n); }};
    }
};

enum class DichotomyVerdict { Converges, Diverges, Boundary };

inline std::string to_string(DichotomyVerdict v) {
    switch (v) {
        case DichotomyVerdict::Converges: return "converges";
        case DichotomyVerdict::Diverges: return "diverges";
        case DichotomyVerdict::Boundary: return "boundary";
    }
    return "?";
}

struct DichotomyReport {
    double ratio_liminf = 0.0, ratio_limsup = 0.0;  ///< log n / log(1/a_n) over the window
    DichotomyVerdict test = DichotomyVerdict::Boundary;
    std::vector<PartialSumRecord> partial_sums;
    bool observed_converging = false;  ///< decade increments shrink by a factor of at most 0.9
    bool consistent = false;
};

/// The ratio test "limsup log n / log(1/a_n) < 1 implies convergence" and its
/// mirror, against the observed growth of partial sums.
inline DichotomyReport verify_dichotomy(const DichotomyRule& rule, std::int64_t n_max = 1'000'000, double margin = 0.02) {
    DichotomyReport r;
    for (double e = 0.0; e <= std::log(static_cast<double>(n_max)); e += 0.25) {
        const double n = std::exp(e);
        if (!(rule.neg_log(n * 1.1) >= rule.neg_log(n))) throw ValidationError("rule is not monotone decreasing");
    }
    r.ratio_liminf = kInf;
    r.ratio_limsup = -kInf;
    const double lo = 0.5 * static_cast<double>(n_max), hi = static_cast<double>(n_max);
    for (int i = 0; i <= 200; ++i) {
        const double n = lo + (hi - lo) * i / 200.0;
        const double q = std::log(n) / rule.neg_log(n);
        r.ratio_liminf = std::min(r.ratio_liminf, q);
        r.ratio_limsup = std::max(r.ratio_limsup, q);
    }
    if (r.ratio_limsup < 1.0 - margin)
        r.test = DichotomyVerdict::Converges;
    else if (r.ratio_liminf > 1.0 + margin)
        r.test = DichotomyVerdict::Diverges;
    NeumaierSum run;
    std::int64_t done = 0;
    for (std::int64_t N = 1000; N <= n_max; N *= 10) {
        const std::int64_t from = done;
        run.add(block_sum(static_cast<std::size_t>(N - from), [&](std::size_t i) {
            return std::exp(-rule.neg_log(static_cast<double>(from + 1 + static_cast<std::int64_t>(i))));
        }));
        done = N;
        r.partial_sums.push_back({N, run.value()});
    }
    const auto& ps = r.partial_sums;
    if (ps.size() >= 3) {
        const double d1 = ps[ps.size() - 2].partial - ps[ps.size() - 3].partial;
        const double d2 = ps.back().partial - ps[ps.size() - 2].partial;
        r.observed_converging = d2 <= 0.9 * d1;
    }
    r.consistent = r.test == DichotomyVerdict::Boundary ||
                   (r.test == DichotomyVerdict::Converges) == r.observed_converging;
    return r;
}

}  // namespace pressdim
