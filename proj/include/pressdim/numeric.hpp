#pragma once
/**
 * @file numeric.hpp
 * @brief Error types, compensated summation, deterministic parallel
 *        reductions and certified tail integrals shared by all modules.
 */

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>

namespace pressdim {

/// Invalid input: malformed partition, bad parameter, violated precondition.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A requested enumeration exceeds a configured cap.
class CapacityError : public std::length_error {
public:
    using std::length_error::length_error;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Closed interval of reals; lo may equal hi.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double mid() const { return 0.5 * (lo + hi); }
    double width() const { return hi - lo; }
    bool contains(double x) const { return lo <= x && x <= hi; }
    bool finite() const { return std::isfinite(lo) && std::isfinite(hi); }
};

inline Interval operator+(Interval a, Interval b) { return {a.lo + b.lo, a.hi + b.hi}; }

/// Widen outward by a relative amount (plus an absolute floor).
inline Interval widen(Interval x, double rel, double abs_floor = 0.0) {
    const double s = std::max(std::abs(x.lo), std::abs(x.hi));
    const double pad = rel * s + abs_floor;
    return {x.lo - pad, x.hi + pad};
}

/// Neumaier's variant of Kahan summation.
class NeumaierSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Sum after sorting by increasing magnitude. Consumes its argument.
inline double ordered_sum(std::vector<double> terms) {
    std::sort(terms.begin(), terms.end(),
              [](double a, double b) { return std::abs(a) < std::abs(b); });
    NeumaierSum s;
    for (double x : terms) s.add(x);
    return s.value();
}

namespace detail {
inline std::atomic<unsigned>& thread_setting() {
    static std::atomic<unsigned> n{1};
    return n;
}
}  // namespace detail

/// Worker count used by parallel kernels. Results never depend on it.
inline void set_thread_count(unsigned n) { detail::thread_setting() = std::max(1u, n); }
inline unsigned thread_count() { return detail::thread_setting(); }

/// Run fn(i) for i in [0, n) on up to thread_count() workers.
/// Callers must write results into per-index slots.
template <class F>
void parallel_for(std::size_t n, F&& fn) {
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(thread_count(), n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    auto work = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n || failed) return;
            try {
                fn(i);
            } catch (...) {
                if (!failed.exchange(true)) failure = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

inline constexpr std::size_t kSumBlock = 8192;

/// Deterministic reduction of term(i), i in [0, n).
///
/// Indices are cut into fixed blocks of kSumBlock. Inside a block the terms
/// are sorted by magnitude and compensated-summed; the block totals are
/// combined the same way. The block layout does not depend on the worker
/// count, so the result is bitwise reproducible.
template <class Term>
double block_sum(std::size_t n, Term&& term) {
    const std::size_t blocks = (n + kSumBlock - 1) / kSumBlock;
    std::vector<double> partial(blocks, 0.0);
    parallel_for(blocks, [&](std::size_t b) {
        const std::size_t lo = b * kSumBlock;
        const std::size_t hi = std::min(n, lo + kSumBlock);
        std::vector<double> buf;
        buf.reserve(hi - lo);
        for (std::size_t i = lo; i < hi; ++i) buf.push_back(term(i));
        partial[b] = ordered_sum(std::move(buf));
    });
    return ordered_sum(std::move(partial));
}

/// Text for a double at the given number of significant digits.
inline std::string format_double(double x, int digits = 10) {
    std::ostringstream os;
    os.precision(digits);
    os << x;
    return os.str();
}

/// FNV-1a, used for config fingerprints in reports.
inline std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// ---------------------------------------------------------------------------
// Tail integrals.  Each returns an enclosure of the integral from y0 to
// infinity, or {inf, inf} when it diverges.

/// Integral of y^{-a} for y >= y0 > 0.
inline Interval power_tail_integral(double a, double y0) {
    if (a <= 1.0) return {kInf, kInf};
    const double v = std::exp((1.0 - a) * std::log(y0)) / (a - 1.0);
    return widen({v, v}, 4e-16);
}

/// Integral of y^{-a} (log y)^{-b} for y >= y0 > 1, with b >= 0.
inline Interval power_log_tail_integral(double a, double b, double y0) {
    if (b == 0.0) return power_tail_integral(a, y0);
    if (y0 <= 1.0) throw ValidationError("log-power tail needs y0 > 1");
    const double w0 = std::log(y0);
    if (a < 1.0) return {kInf, kInf};
    if (a == 1.0) {
        if (b <= 1.0) return {kInf, kInf};
        const double v = std::exp((1.0 - b) * std::log(w0)) / (b - 1.0);
        return widen({v, v}, 4e-16);
    }
    // Substituting w = log y gives the integral of exp((1-a) w) w^{-b} over
    // w >= w0. Scale out the value at w0 so the integrand starts at 1.
    const double scale = std::exp((1.0 - a) * w0 - b * std::log(w0));
    auto f = [&](double v) {
        return std::exp((1.0 - a) * v - b * std::log1p(v / w0));
    };
    boost::math::quadrature::exp_sinh<double> integrator;
    double err = 0.0;
    const double val = integrator.integrate(f, 0.0, kInf, 1e-13, &err);
    const double pad = std::max(err, 1e-13 * std::abs(val));
    return {scale * (val - pad), scale * (val + pad)};
}

/// Sum over integers m >= m1 of a positive, decreasing, convex f, bracketed
/// by integrals: [int_{m1} f + f(m1)/2, int_{m1-1/2} f].
template <class F, class G>
Interval convex_tail_sum(F&& f_at, G&& integral_from, double m1) {
    const Interval lo_int = integral_from(m1);
    const Interval hi_int = integral_from(m1 - 0.5);
    if (!std::isfinite(hi_int.hi)) {
        return {std::isfinite(lo_int.lo) ? lo_int.lo + 0.5 * f_at(m1) : kInf, kInf};
    }
    return {lo_int.lo + 0.5 * f_at(m1), hi_int.hi};
}

}  // namespace pressdim
