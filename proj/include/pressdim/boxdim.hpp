#pragma once
/**
 * @file boxdim.hpp
 * @brief Covering counts and box-dimension estimates for finite point sets
 *        on [0,1] and on spheres, plus gap exponents of partitions.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "pressdim/interval_partition.hpp"
#include "pressdim/numeric.hpp"

namespace pressdim {

enum class Space { Line, Sphere };

/// Finite point set on the line or on the unit sphere S^{d-1} in R^d.
/// Line clouds are sorted ascending; sphere clouds keep insertion order,
/// which is the processing order of greedy packing.
class PointCloud {
public:
    static PointCloud line(std::vector<double> pts, std::string provenance = {}) {
        if (pts.empty()) throw ValidationError("point cloud is empty");
        std::sort(pts.begin(), pts.end());
        PointCloud c;
        c.space_ = Space::Line;
        c.dim_ = 1;
        c.provenance_ = std::move(provenance);
        for (double x : pts) {
            if (!std::isfinite(x)) throw ValidationError("non-finite point");
            if (!c.x_.empty() && x - c.x_.back() <= 1e-15 * std::max(std::abs(x), std::abs(c.x_.back()))) continue;
            c.x_.push_back(x);
        }
        return c;
    }

    /// `flat` holds d coordinates per point.
    static PointCloud sphere(int d, const std::vector<double>& flat, std::string provenance = {}) {
        if (d < 2 || d > 3) throw ValidationError("sphere clouds support ambient dimension 2 or 3");
        if (flat.empty() || flat.size() % d) throw ValidationError("sphere cloud is empty or ragged");
        PointCloud c;
        c.space_ = Space::Sphere;
        c.dim_ = d;
        c.provenance_ = std::move(provenance);
        const double tol = 1e-12;
        std::unordered_map<Key, std::vector<std::size_t>, KeyHash> grid;
        const std::size_t n = flat.size() / d;
        c.x_.reserve(flat.size());
        for (std::size_t i = 0; i < n; ++i) {
            const double* p = &flat[i * d];
            double nn = 0.0;
            for (int k = 0; k < d; ++k) nn += p[k] * p[k];
            if (std::abs(std::sqrt(nn) - 1.0) > 1e-12) throw ValidationError("sphere point is not unit-norm");
            const Key key = cell_of(p, d, 4.0 * tol);
            bool dup = false;
            for_neighbors(key, d, [&](const Key& k2) {
                auto it = grid.find(k2);
                if (it == grid.end() || dup) return;
                for (std::size_t j : it->second)
                    if (chord(p, &c.x_[j * d], d) <= tol) dup = true;
            });
            if (dup) continue;
            grid[key].push_back(c.size());
            c.x_.insert(c.x_.end(), p, p + d);
        }
        return c;
    }

    Space space() const { return space_; }
    int ambient() const { return dim_; }
    /// Topological dimension of the space: 1 for the line, d-1 for S^{d-1}.
    int space_dimension() const { return space_ == Space::Line ? 1 : dim_ - 1; }
    std::size_t size() const { return x_.size() / dim_; }
    const double* point(std::size_t i) const { return &x_[i * dim_]; }
    const std::vector<double>& data() const { return x_; }
    const std::string& provenance() const { return provenance_; }

    // Spatial hashing helpers, shared with covering_count_sphere.
    using Key = std::array<std::int64_t, 3>;
    struct KeyHash {
        std::size_t operator()(const Key& k) const {
            std::uint64_t h = 1469598103934665603ull;
            for (auto v : k) {
                h ^= static_cast<std::uint64_t>(v);
                h *= 1099511628211ull;
            }
            return static_cast<std::size_t>(h);
        }
    };
    static Key cell_of(const double* p, int d, double h) {
        Key k{0, 0, 0};
        for (int i = 0; i < d; ++i) k[i] = static_cast<std::int64_t>(std::floor(p[i] / h));
        return k;
    }
    template <class F>
    static void for_neighbors(const Key& k, int d, F&& f) {
        const int r1 = d > 1 ? 1 : 0, r2 = d > 2 ? 1 : 0;
        for (int a = -1; a <= 1; ++a)
            for (int b = -r1; b <= r1; ++b)
                for (int c = -r2; c <= r2; ++c) f(Key{k[0] + a, k[1] + b, k[2] + c});
    }
    static double chord(const double* p, const double* q, int d) {
        double s = 0.0;
        for (int i = 0; i < d; ++i) s += (p[i] - q[i]) * (p[i] - q[i]);
        return std::sqrt(s);
    }

private:
    Space space_ = Space::Line;
    int dim_ = 1;
    std::vector<double> x_;
    std::string provenance_;
};

struct CoveringCount {
    double delta = 0.0;
    std::int64_t count = 0;
    std::string algorithm;
};

/// Minimal number of intervals of length delta covering the cloud: the
/// left-to-right sweep that starts an interval at each uncovered point.
inline CoveringCount covering_count_line(const PointCloud& cloud, double delta) {
    if (cloud.space() != Space::Line) throw ValidationError("line covering needs a line cloud");
    if (!(delta > 0.0)) throw ValidationError("delta must be > 0");
    const auto& x = cloud.data();
    std::int64_t count = 0;
    std::size_t i = 0;
    while (i < x.size()) {
        const double reach = x[i] + delta;
        ++count;
        i = static_cast<std::size_t>(std::upper_bound(x.begin() + i, x.end(), reach) - x.begin());
    }
    return {delta, count, "sorted-sweep"};
}

/// Size of a greedy maximal packing: points are taken in cloud order and
/// kept when their angle to every kept point exceeds delta.  With M_d this
/// count and N_d the minimal cover by sets of angular diameter d,
/// M_{2d} <= N_{2d} <= M_d.
inline CoveringCount covering_count_sphere(const PointCloud& cloud, double delta) {
    if (cloud.space() != Space::Sphere) throw ValidationError("sphere covering needs a sphere cloud");
    if (!(delta > 0.0 && delta < M_PI)) throw ValidationError("delta must lie in (0, pi)");
    const int d = cloud.ambient();
    const double c = 2.0 * std::sin(0.5 * delta);  // chord of angle delta
    std::unordered_map<PointCloud::Key, std::vector<std::size_t>, PointCloud::KeyHash> grid;
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const double* p = cloud.point(i);
        const auto key = PointCloud::cell_of(p, d, c);
        bool far = true;
        PointCloud::for_neighbors(key, d, [&](const PointCloud::Key& k2) {
            if (!far) return;
            auto it = grid.find(k2);
            if (it == grid.end()) return;
            for (std::size_t j : it->second)
                if (PointCloud::chord(p, cloud.point(j), d) <= c) {
                    far = false;
                    return;
                }
        });
        if (far) {
            grid[key].push_back(i);
            kept.push_back(i);
        }
    }
    return {delta, static_cast<std::int64_t>(kept.size()), "greedy-ball"};
}

inline CoveringCount covering_count(const PointCloud& cloud, double delta) {
    return cloud.space() == Space::Line ? covering_count_line(cloud, delta) : covering_count_sphere(cloud, delta);
}

// ---------------------------------------------------------------------------

struct DimensionLevel {
    double delta = 0.0;
    double log_inv_delta = 0.0;
    std::int64_t count = 0;
    double log_count = 0.0;
    bool used = false;
    std::string excluded;  ///< empty when used, otherwise the reason
};

struct DimensionEstimate {
    double lower_dim = 0.0;
    double upper_dim = 0.0;
    std::vector<DimensionLevel> levels;
    std::vector<double> window_slopes;
    double regression_slope = 0.0;
    std::vector<double> residuals;
    double delta_min = 0.0, delta_max = 0.0;  ///< range of levels in the window
    std::string algorithm;
};

struct BoxDimensionOptions {
    double window_fraction = 0.5;  ///< trailing share of usable levels
    int secant_span = 1;           ///< slopes between levels i and i + span
    /// Optional: true when a level cannot be trusted because of the
    /// unmaterialized part of the set (receives delta and N_delta).
    std::function<bool(double, std::int64_t)> unresolved;
};

/// delta_j = base^{-j} for j in [j_min, j_max].
inline std::vector<double> geometric_deltas(double base, double j_min, double j_max, double step = 1.0) {
    std::vector<double> out;
    for (double j = j_min; j <= j_max + 1e-9; j += step) out.push_back(std::pow(base, -j));
    return out;
}

/// Box dimension from covering counts on a geometric grid of scales.
/// Levels are processed from coarse to fine.  Saturated levels
/// (N > 0.9 |cloud| or N = |cloud|) and unresolved ones are dropped; the
/// secant slopes over the trailing window give [lower_dim, upper_dim].
inline DimensionEstimate estimate_box_dimension(const PointCloud& cloud, std::vector<double> deltas,
                                                const BoxDimensionOptions& opt = {}) {
    if (deltas.size() < 8) throw ValidationError("box dimension needs at least 8 delta levels");
    std::sort(deltas.begin(), deltas.end(), std::greater<>());
    if (deltas.back() <= 0.0) throw ValidationError("deltas must be positive");
    if (std::adjacent_find(deltas.begin(), deltas.end()) != deltas.end()) throw ValidationError("repeated delta");

    DimensionEstimate est;
    est.levels.resize(deltas.size());
    parallel_for(deltas.size(), [&](std::size_t i) {
        const CoveringCount cc = covering_count(cloud, deltas[i]);
        auto& L = est.levels[i];
        L.delta = deltas[i];
        L.log_inv_delta = -std::log(deltas[i]);
        L.count = cc.count;
        L.log_count = std::log(static_cast<double>(cc.count));
    });
    est.algorithm = cloud.space() == Space::Line ? "sorted-sweep" : "greedy-ball";
    const auto n = static_cast<std::int64_t>(cloud.size());
    std::vector<std::size_t> usable;
    for (std::size_t i = 0; i < est.levels.size(); ++i) {
        auto& L = est.levels[i];
        if (L.count == n || static_cast<double>(L.count) > 0.9 * static_cast<double>(n))
            L.excluded = "saturated";
        else if (opt.unresolved && opt.unresolved(L.delta, L.count))
            L.excluded = "unresolved tail";
        else
            usable.push_back(i);
    }
    const int span = std::max(1, opt.secant_span);
    if (usable.size() < static_cast<std::size_t>(span + 1))
        throw ValidationError("all delta levels are saturated or unresolved; increase the truncation");
    std::size_t w = static_cast<std::size_t>(std::ceil(opt.window_fraction * static_cast<double>(usable.size())));
    w = std::clamp<std::size_t>(w, span + 1, usable.size());
    const std::vector<std::size_t> win(usable.end() - static_cast<std::ptrdiff_t>(w), usable.end());
    for (auto i : win) est.levels[i].used = true;
    for (auto i : usable)
        if (!est.levels[i].used) est.levels[i].excluded = "outside window";

    for (std::size_t k = 0; k + span < win.size(); ++k) {
        const auto& A = est.levels[win[k]];
        const auto& B = est.levels[win[k + span]];
        est.window_slopes.push_back((B.log_count - A.log_count) / (B.log_inv_delta - A.log_inv_delta));
    }
    const double cap = cloud.space_dimension();
    est.lower_dim = std::clamp(*std::min_element(est.window_slopes.begin(), est.window_slopes.end()), 0.0, cap);
    est.upper_dim = std::clamp(*std::max_element(est.window_slopes.begin(), est.window_slopes.end()), 0.0, cap);

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto i : win) {
        const auto& L = est.levels[i];
        sx += L.log_inv_delta;
        sy += L.log_count;
        sxx += L.log_inv_delta * L.log_inv_delta;
        sxy += L.log_inv_delta * L.log_count;
    }
    const double m = static_cast<double>(win.size());
    est.regression_slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    const double icpt = (sy - est.regression_slope * sx) / m;
    for (auto i : win) {
        const auto& L = est.levels[i];
        est.residuals.push_back(L.log_count - (icpt + est.regression_slope * L.log_inv_delta));
    }
    est.delta_max = est.levels[win.front()].delta;
    est.delta_min = est.levels[win.back()].delta;
    return est;
}

// ---------------------------------------------------------------------------

struct GapRatioSample {
    double n = 0.0;  ///< index (may be astronomically large for asymptotic samples)
    double ratio = 0.0;
};

struct GapExponentEstimate {
    double L_lower = 0.0, L_upper = 0.0;               ///< index order
    double L_lower_sorted = 0.0, L_upper_sorted = 0.0;  ///< non-increasing order
    std::int64_t n_from = 0, n_to = 0;                   ///< window of indices
    std::vector<GapRatioSample> ratios;                  ///< log-spaced samples, index order
    bool asymptotic = false;
    double drift = 0.0;  ///< spread of the ratio between window ends (asymptotic mode)
};

/// log n / (-log length_n) over the trailing window [window_start * M, M],
/// both in index order and for the lengths sorted non-increasingly.
inline GapExponentEstimate gap_exponent_bounds(const IntervalPartition& part, double window_start = 0.5) {
    const auto M = static_cast<std::int64_t>(part.size());
    if (M < 16) throw ValidationError("gap exponents need at least 16 intervals");
    GapExponentEstimate g;
    g.n_to = M;
    g.n_from = std::max<std::int64_t>(2, static_cast<std::int64_t>(std::ceil(window_start * M)));
    auto ratio = [](double n, double len) { return std::log(n) / -std::log(len); };
    const auto& len = part.lengths();
    const auto sorted = part.sorted_lengths();
    g.L_lower = g.L_lower_sorted = kInf;
    g.L_upper = g.L_upper_sorted = -kInf;
    for (std::int64_t n = g.n_from; n <= M; ++n) {
        const double r = ratio(static_cast<double>(n), len[n - 1]);
        const double rs = ratio(static_cast<double>(n), sorted[n - 1]);
        g.L_lower = std::min(g.L_lower, r);
        g.L_upper = std::max(g.L_upper, r);
        g.L_lower_sorted = std::min(g.L_lower_sorted, rs);
        g.L_upper_sorted = std::max(g.L_upper_sorted, rs);
    }
    for (double e = std::log(2.0); e <= std::log(static_cast<double>(M)) + 1e-12; e += 0.05) {
        const auto n = static_cast<std::int64_t>(std::llround(std::exp(e)));
        if (!g.ratios.empty() && g.ratios.back().n == static_cast<double>(n)) continue;
        g.ratios.push_back({static_cast<double>(n), ratio(static_cast<double>(n), len[n - 1])});
    }
    return g;
}

/// Gap exponents read far beyond any materializable index: for each tail
/// subsequence, ratio(u) = u / (-log length at n = e^u) on u in
/// [u_max/2, u_max].  `drift` is the largest change across that window.
inline GapExponentEstimate gap_exponent_asymptotic(const IntervalPartition& part, double u_max = 1e6, int samples = 64) {
    if (part.tail_kind() != TailKind::Rule) throw ValidationError("asymptotic gap exponents need a tail rule");
    GapExponentEstimate g;
    g.asymptotic = true;
    g.L_lower = kInf;
    g.L_upper = -kInf;
    for (const auto& s : part.tail()->parts) {
        auto ratio = [&](double u) {
            const double lm = u - std::log(static_cast<double>(s.stride));
            const double ll = rule_log_length_far(s.rule, lm);
            return std::isfinite(ll) ? u / -ll : 0.0;
        };
        for (int i = 0; i <= samples; ++i) {
            const double u = u_max * (0.5 + 0.5 * i / samples);
            const double r = ratio(u);
            g.L_lower = std::min(g.L_lower, r);
            g.L_upper = std::max(g.L_upper, r);
            g.ratios.push_back({std::exp(std::min(u, 700.0)), r});
        }
        g.drift = std::max(g.drift, std::abs(ratio(u_max) - ratio(0.5 * u_max)));
    }
    // The sorted view is not available without materializing the lengths.
    g.L_lower_sorted = g.L_upper_sorted = std::numeric_limits<double>::quiet_NaN();
    return g;
}

}  // namespace pressdim
