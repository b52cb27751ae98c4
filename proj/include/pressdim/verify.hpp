#pragma once
// End-to-end checks: the s_inf / gap exponent / box dimension chain for
// interval partitions, the critical exponent / counting / orbit dimension
// chain for parabolic groups, and the hyperbolic geometry property suite.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "pressdim/boxdim.hpp"
#include "pressdim/hyperbolic.hpp"
#include "pressdim/interval_partition.hpp"
#include "pressdim/poincare.hpp"
#include "pressdim/pressure.hpp"

namespace pressdim {

enum class Verdict { Pass, Fail, Inconclusive };

inline std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "PASS";
        case Verdict::Fail: return "FAIL";
        case Verdict::Inconclusive: return "INCONCLUSIVE";
    }
    return "?";
}

struct Assertion {
    std::string name;
    Verdict verdict = Verdict::Inconclusive;
    std::string detail;
};

struct VerifyReport {
    std::vector<Assertion> assertions;
    std::vector<std::string> notes;

    void add(std::string name, bool ok, std::string detail) {
        assertions.push_back({std::move(name), ok ? Verdict::Pass : Verdict::Fail, std::move(detail)});
    }
    void inconclusive(std::string name, std::string detail) {
        assertions.push_back({std::move(name), Verdict::Inconclusive, std::move(detail)});
    }
    Verdict overall() const {
        Verdict v = Verdict::Pass;
        for (const auto& a : assertions) {
            if (a.verdict == Verdict::Fail) return Verdict::Fail;
            if (a.verdict == Verdict::Inconclusive) v = Verdict::Inconclusive;
        }
        return v;
    }
    int exit_code() const { return overall() == Verdict::Fail ? 1 : 0; }
};

// ---------------------------------------------------------------------------
// Interval partitions

struct MainVerifyOptions {
    double tol = 1e-3;
    std::vector<double> deltas = geometric_deltas(2.0, 6, 18);
    double dim_tolerance = 0.05;   ///< |s_inf - box dimension| when the gap exponents agree
    double exists_gap = 0.05;      ///< L_upper - L_lower at or below this counts as agreement
    double unresolved_share = 0.01;
    double u_max = 1e6;
};

struct MainVerifyResult {
    CriticalExponentEstimate s_inf;
    GapExponentEstimate gaps;                     ///< materialized window
    std::optional<GapExponentEstimate> far_gaps;  ///< asymptotic, when a tail rule exists
    double L_lower = 0.0, L_upper = 0.0, eps = 0.0;
    std::optional<DimensionEstimate> dimension;
    std::string dimension_error;
    VerifyReport report;
};

/// Endpoint cloud of a partition.  For unbounded partitions the
/// accumulation point 0 is added; a set and its closure have the same box
/// dimension.
inline PointCloud endpoint_cloud(const IntervalPartition& part) {
    std::vector<double> pts = part.endpoints();
    if (part.unbounded()) pts.push_back(0.0);
    return PointCloud::line(std::move(pts), part.label() + " endpoints");
}

/// The endpoints not materialized lie in [0, a_M].  With 0 in the cloud
/// the first box of a sweep already covers [0, delta], so they add at most
/// ceil(a_M / delta) - 1 boxes; a level is trusted only when that is a small
/// share of N_delta.
inline BoxDimensionOptions endpoint_box_options(const IntervalPartition& part, double share) {
    BoxDimensionOptions opt;
    if (part.unbounded()) {
        const double aM = part.left().back();
        opt.unresolved = [aM, share](double delta, std::int64_t count) {
            return std::ceil(aM / delta) - 1.0 > share * static_cast<double>(count);
        };
    }
    return opt;
}

inline MainVerifyResult verify_theorem_main(const IntervalPartition& part, const MainVerifyOptions& opt = {}) {
    MainVerifyResult r;
    r.s_inf = find_s_infinity(part, opt.tol);
    r.gaps = gap_exponent_bounds(part);
    if (part.tail_kind() == TailKind::Rule) {
        r.far_gaps = gap_exponent_asymptotic(part, opt.u_max);
        r.L_lower = r.far_gaps->L_lower;
        r.L_upper = r.far_gaps->L_upper;
        r.eps = r.s_inf.width() + r.far_gaps->drift;
        r.report.notes.push_back("gap exponents read from the tail rule at log n in [" + format_double(0.5 * opt.u_max) +
                                 ", " + format_double(opt.u_max) + "]");
    } else {
        r.L_lower = r.gaps.L_lower;
        r.L_upper = r.gaps.L_upper;
        r.eps = r.s_inf.width();
    }
    try {
        r.dimension = estimate_box_dimension(endpoint_cloud(part), opt.deltas, endpoint_box_options(part, opt.unresolved_share));
    } catch (const ValidationError& e) {
        r.dimension_error = e.what();
    }

    auto& rep = r.report;
    if (part.tail_kind() == TailKind::Unknown) {
        rep.inconclusive("L_lower - eps <= s_inf <= L_upper + eps", "no tail rule: s_inf cannot be bracketed");
        return r;
    }
    rep.add("L_lower - eps <= s_inf", r.L_lower - r.eps <= r.s_inf.s_high,
            "L_lower=" + format_double(r.L_lower) + " eps=" + format_double(r.eps) + " s_high=" + format_double(r.s_inf.s_high));
    rep.add("s_inf <= L_upper + eps", r.s_inf.s_low <= r.L_upper + r.eps,
            "s_low=" + format_double(r.s_inf.s_low) + " L_upper=" + format_double(r.L_upper) + " eps=" + format_double(r.eps));

    if (r.L_upper - r.L_lower > opt.exists_gap) {
        rep.notes.push_back("L_upper - L_lower = " + format_double(r.L_upper - r.L_lower) +
                            ": only the inequality is asserted");
        return r;
    }
    if (!r.dimension) {
        rep.inconclusive("|s_inf - dim_B| <= " + format_double(opt.dim_tolerance), r.dimension_error);
        return r;
    }
    const auto& d = *r.dimension;
    // Distance between the s_inf bracket and the [lower, upper] dimension range.
    const double gap = std::max({0.0, d.lower_dim - r.s_inf.s_high, r.s_inf.s_low - d.upper_dim});
    rep.add("|s_inf - dim_B| <= " + format_double(opt.dim_tolerance), gap <= opt.dim_tolerance,
            "dim in [" + format_double(d.lower_dim) + ", " + format_double(d.upper_dim) + "], s_inf in [" +
                format_double(r.s_inf.s_low) + ", " + format_double(r.s_inf.s_high) + "]");
    return r;
}

// ---------------------------------------------------------------------------
// Parabolic groups

struct HdimVerifyOptions {
    double tol = 0.01;
    double t_max = 25.0;
    int levels = 50;
    std::int64_t radius = 0;     ///< orbit radius; 0 picks 1e5 for k = 1 and 400 otherwise
    std::vector<double> deltas;  ///< empty picks sqrt(2)^{-j}, j = 6..40 for k = 1 and 6..24 otherwise
    double agreement = 0.1;
    double unresolved_share = 0.01;
};

struct HdimVerifyResult {
    CriticalExponentEstimate critical;
    std::optional<CountingFunction> counting;
    std::string counting_error;
    std::optional<DimensionEstimate> dimension;
    std::string dimension_error;
    std::size_t orbit_size = 0;
    double cap_radius = 0.0;  ///< angular radius of the cap holding the unmaterialized orbit
    VerifyReport report;
};

/// The orbit points with |N|_inf > M satisfy |u0 + A N| >= smin M - |u0|;
/// on the sphere they lie within angle 2 / (smin M - |u0|) of the fixed
/// point.  Covering that cap needs at most (1 + 2 rho / delta)^k boxes.
inline BoxDimensionOptions orbit_box_options(const ParabolicGroupSpec& g, const BoundaryPoint& xi, std::int64_t M,
                                             double share, double* rho_out = nullptr) {
    const double smin = g.singular_range().first;
    const double u0 = to_plane(xi).u.norm();
    const double far = smin * static_cast<double>(M) - u0;
    const double rho = far > 0.0 ? 2.0 / far : M_PI;
    if (rho_out) *rho_out = rho;
    BoxDimensionOptions opt;
    const int k = g.k;
    opt.unresolved = [rho, k, share](double delta, std::int64_t count) {
        return std::pow(1.0 + 2.0 * rho / delta, k) > share * static_cast<double>(count);
    };
    return opt;
}

inline HdimVerifyResult verify_theorem_hdim(const ParabolicGroupSpec& group, const BoundaryPoint& xi,
                                            const HdimVerifyOptions& opt = {}) {
    group.validate();
    HdimVerifyResult r;
    const double target = 0.5 * group.k;
    const std::int64_t M = opt.radius > 0 ? opt.radius : (group.k == 1 ? 100'000 : 400);
    // Validates xi before any heavy work.
    PointCloud cloud = parabolic_orbit(group, xi, M);
    r.orbit_size = cloud.size();

    r.critical = critical_exponent(group, opt.tol);
    try {
        r.counting = counting_exponent(group, opt.t_max, opt.levels);
    } catch (const CapacityError& e) {
        r.counting_error = e.what();
    }
    try {
        const auto deltas = !opt.deltas.empty() ? opt.deltas
                                                : geometric_deltas(std::sqrt(2.0), 6, group.k == 1 ? 40 : 24);
        r.dimension = estimate_box_dimension(cloud, deltas,
                                             orbit_box_options(group, xi, M, opt.unresolved_share, &r.cap_radius));
    } catch (const ValidationError& e) {
        r.dimension_error = e.what();
    }

    auto& rep = r.report;
    const std::string tag = " within " + format_double(opt.agreement) + " of k/2=" + format_double(target);
    rep.add("critical exponent" + tag,
            r.critical.s_low - opt.agreement <= target && target <= r.critical.s_high + opt.agreement &&
                r.critical.width() <= 2.0 * opt.agreement,
            "[" + format_double(r.critical.s_low) + ", " + format_double(r.critical.s_high) + "]");
    if (r.counting)
        rep.add("counting slope" + tag, std::abs(r.counting->final_slope - target) <= opt.agreement,
                "final slope " + format_double(r.counting->final_slope));
    else
        rep.inconclusive("counting slope" + tag, r.counting_error);
    if (r.dimension)
        rep.add("orbit box dimension" + tag,
                std::abs(r.dimension->lower_dim - target) <= opt.agreement &&
                    std::abs(r.dimension->upper_dim - target) <= opt.agreement,
                "[" + format_double(r.dimension->lower_dim) + ", " + format_double(r.dimension->upper_dim) + "]");
    else
        rep.inconclusive("orbit box dimension" + tag, r.dimension_error);

    if (r.counting && r.dimension) {
        const double a = r.critical.mid(), b = r.counting->final_slope;
        const double c = 0.5 * (r.dimension->lower_dim + r.dimension->upper_dim);
        const double spread = std::max({a, b, c}) - std::min({a, b, c});
        rep.add("three-way agreement within " + format_double(opt.agreement), spread <= opt.agreement,
                "critical=" + format_double(a) + " counting=" + format_double(b) + " orbit=" + format_double(c));
    } else {
        rep.inconclusive("three-way agreement within " + format_double(opt.agreement), "a component is unavailable");
    }
    return r;
}

// ---------------------------------------------------------------------------
// Geometry property suite

struct PropertyCheck {
    std::string name;
    std::int64_t trials = 0;
    double max_error = 0.0;
    double tolerance = 0.0;
    bool passed() const { return max_error <= tolerance; }
};

struct SelftestOptions {
    std::uint64_t seed = 20240611;
    std::int64_t trials = 10'000;
};

namespace detail {

inline Vec random_unit(std::mt19937_64& rng, int d) {
    std::normal_distribution<double> g;
    Vec v(d);
    do {
        for (int i = 0; i < d; ++i) v(i) = g(rng);
    } while (v.norm() < 1e-6);
    return v / v.norm();
}

inline HyperbolicPoint random_half_space(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> u(-3.0, 3.0), lh(std::log(0.05), std::log(20.0));
    Vec x(n);
    for (int i = 0; i + 1 < n; ++i) x(i) = u(rng);
    x(n - 1) = std::exp(lh(rng));
    return HyperbolicPoint::half_space(x);
}

inline BoundaryPoint random_plane(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    Vec v(n - 1);
    for (int i = 0; i + 1 < n; ++i) v(i) = u(rng);
    return BoundaryPoint::plane(v);
}

}  // namespace detail

/// Randomized identities of the hyperbolic module at fixed tolerances.
inline std::vector<PropertyCheck> geometry_selftest(const SelftestOptions& opt = {}) {
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::int64_t T = opt.trials;
    std::vector<PropertyCheck> out;

    {   // e^{-(xi|xi')_0} = sin(angle / 2) in the disk and the 3-ball
        PropertyCheck c{"bourdon-sine", T, 0.0, 1e-9};
        const HyperbolicPoint o = HyperbolicPoint::ball(Vec::Zero(2));
        const HyperbolicPoint o3 = HyperbolicPoint::ball(Vec::Zero(3));
        for (std::int64_t i = 0; i < T; ++i) {
            const int d = i % 2 == 0 ? 2 : 3;
            const BoundaryPoint a = BoundaryPoint::sphere(detail::random_unit(rng, d));
            const BoundaryPoint b = BoundaryPoint::sphere(detail::random_unit(rng, d));
            const double lhs = bourdon_metric(a, b, d == 2 ? o : o3);
            const double rhs = std::sin(0.5 * spherical_metric(a, b));
            c.max_error = std::max(c.max_error, std::abs(lhs - rhs));
        }
        out.push_back(c);
    }
    {   // cocycle and B <= d, with xi both finite and at infinity
        PropertyCheck cocycle{"busemann-cocycle", T, 0.0, 1e-10};
        PropertyCheck bound{"busemann-le-distance", T, 0.0, 1e-10};
        for (std::int64_t i = 0; i < T; ++i) {
            const int n = i % 2 == 0 ? 2 : 3;
            const BoundaryPoint xi = i % 5 == 0 ? BoundaryPoint::infinity(n) : detail::random_plane(rng, n);
            const auto p = detail::random_half_space(rng, n), q = detail::random_half_space(rng, n),
                       r = detail::random_half_space(rng, n);
            const double bpq = busemann(xi, p, q), bqr = busemann(xi, q, r), bpr = busemann(xi, p, r);
            cocycle.max_error = std::max(cocycle.max_error, std::abs(bpq + bqr - bpr));
            bound.max_error = std::max(bound.max_error, bpq - distance(p, q));
        }
        out.push_back(cocycle);
        out.push_back(bound);
    }
    {   // Gromov product at two points of the connecting geodesic
        PropertyCheck c{"gromov-z-independence", T, 0.0, 1e-10};
        std::uniform_real_distribution<double> s(-3.0, 3.0);
        for (std::int64_t i = 0; i < T; ++i) {
            const int n = i % 2 == 0 ? 2 : 3;
            const BoundaryPoint a = i % 7 == 0 ? BoundaryPoint::infinity(n) : detail::random_plane(rng, n);
            const BoundaryPoint b = detail::random_plane(rng, n);
            const auto base = detail::random_half_space(rng, n);
            c.max_error = std::max(c.max_error, std::abs(gromov_product(a, b, base, 0.0) - gromov_product(a, b, base, s(rng))));
        }
        out.push_back(c);
    }
    {   // arccosh form against 2 asinh(|v| / 2) on the horosphere through o
        PropertyCheck c{"horosphere-distance", T, 0.0, 1e-12};
        std::uniform_real_distribution<double> lr(std::log(1e-6), std::log(1e6));
        for (std::int64_t i = 0; i < T; ++i) {
            const int n = i % 2 == 0 ? 2 : 3;
            const Vec dir = detail::random_unit(rng, n - 1);
            const double len = std::exp(lr(rng));
            HyperbolicPoint q = HyperbolicPoint::origin(n);
            q.x.head(n - 1) = len * dir;
            c.max_error = std::max(c.max_error, std::abs(distance(HyperbolicPoint::origin(n), q) - horosphere_distance(len)));
        }
        out.push_back(c);
    }
    {
        PropertyCheck tri{"distance-triangle", T, 0.0, 1e-10};
        PropertyCheck inv{"translation-invariance", T, 0.0, 1e-10};
        for (std::int64_t i = 0; i < T; ++i) {
            const int n = 3;
            const auto p = detail::random_half_space(rng, n), q = detail::random_half_space(rng, n),
                       r = detail::random_half_space(rng, n);
            tri.max_error = std::max(tri.max_error, distance(p, r) - distance(p, q) - distance(q, r));
            const auto g = ParabolicGroupSpec::make(n, {(Vec(2) << 1.0, 0.0).finished(), (Vec(2) << 0.5, 1.0).finished()});
            const std::vector<std::int64_t> N{static_cast<std::int64_t>(i % 17) - 8, static_cast<std::int64_t>(i % 13) - 6};
            inv.max_error = std::max(inv.max_error, std::abs(distance(g.apply(N, p), g.apply(N, q)) - distance(p, q)));
        }
        out.push_back(tri);
        out.push_back(inv);
    }
    {
        PropertyCheck c{"bourdon-triangle", T, 0.0, 1e-12};
        const HyperbolicPoint o = HyperbolicPoint::ball(Vec::Zero(2));
        for (std::int64_t i = 0; i < T; ++i) {
            const auto a = BoundaryPoint::sphere(detail::random_unit(rng, 2)),
                       b = BoundaryPoint::sphere(detail::random_unit(rng, 2)),
                       e = BoundaryPoint::sphere(detail::random_unit(rng, 2));
            c.max_error = std::max(c.max_error, bourdon_metric(a, e, o) - bourdon_metric(a, b, o) - bourdon_metric(b, e, o));
        }
        out.push_back(c);
    }
    {
        PropertyCheck c{"cayley-round-trip", T, 0.0, 1e-12};
        std::uniform_real_distribution<double> u(-10.0, 10.0);
        for (std::int64_t i = 0; i < T; ++i) {
            const int n = i % 2 == 0 ? 2 : 3;
            Vec v(n - 1);
            for (int j = 0; j < n - 1; ++j) v(j) = u(rng);
            const BoundaryPoint back = to_plane(to_sphere(BoundaryPoint::plane(v)));
            c.max_error = std::max(c.max_error, (back.u - v).norm() / std::max(1.0, v.norm()));
        }
        out.push_back(c);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Gromov products along a parabolic orbit in H^2

struct SandwichReport {
    std::vector<std::int64_t> k;
    std::vector<double> diff;  ///< (p^k xi | p^{k+1} xi)_o - d(o, p^k o)
    double lower = 0.0;        ///< -c
    double upper = 0.0;        ///< c'
    double spread = 0.0;
    double d_o_z = 0.0;        ///< d(o, z), z the point of (xi, p xi) closest to o
    bool upper_bound_holds = false;
};

/// p = translation by alpha in the upper half-plane; k runs over
/// k_min <= |k| <= k_max.
inline SandwichReport parabolic_sandwich(double alpha, double xi_u, std::int64_t k_min = 50,
                                         std::int64_t k_max = 10'000) {
    if (alpha == 0.0) throw ValidationError("translation length must be nonzero");
    if (k_min < 1 || k_max < k_min) throw ValidationError("need 1 <= k_min <= k_max");
    const auto g = ParabolicGroupSpec::make(2, {(Vec(1) << alpha).finished()});
    const BoundaryPoint xi = BoundaryPoint::plane((Vec(1) << xi_u).finished());
    const HyperbolicPoint o = HyperbolicPoint::origin(2);
    SandwichReport r;
    for (std::int64_t a = -k_max; a <= k_max; ++a)
        if (std::abs(a) >= k_min) r.k.push_back(a);
    r.diff.resize(r.k.size());
    parallel_for(r.k.size(), [&](std::size_t i) {
        const std::int64_t k = r.k[i];
        const double prod = gromov_product(g.apply({k}, xi), g.apply({k + 1}, xi), o);
        r.diff[i] = prod - distance(o, g.apply({k}, o));
    });
    r.lower = *std::min_element(r.diff.begin(), r.diff.end());
    r.upper = *std::max_element(r.diff.begin(), r.diff.end());
    r.spread = r.upper - r.lower;
    r.d_o_z = distance(o, geodesic_point(xi, g.apply({1}, xi), o, 0.0));
    r.upper_bound_holds = r.upper <= r.d_o_z + 1e-12;
    return r;
}

}  // namespace pressdim
