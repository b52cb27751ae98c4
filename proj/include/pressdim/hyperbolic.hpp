#pragma once
/**
 * @file hyperbolic.hpp
 * @brief Upper half-space and ball models of H^n: distances, Busemann
 *        functions, Gromov products, boundary metrics, the Cayley map and
 *        parabolic translation groups.
 *
 * Busemann convention: B_xi(p, q) = lim [d(p, a(t)) - d(q, a(t))] along any
 * geodesic ray a(t) -> xi.  Under it B_inf(p, q) = log(q_n / p_n).
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pressdim/boxdim.hpp"
#include "pressdim/numeric.hpp"

namespace pressdim {

enum class Model { UpperHalfSpace, Ball };

using Vec = Eigen::VectorXd;

struct HyperbolicPoint {
    Model model = Model::UpperHalfSpace;
    Vec x;

    static HyperbolicPoint half_space(Vec v) {
        HyperbolicPoint p{Model::UpperHalfSpace, std::move(v)};
        p.validate();
        return p;
    }
    static HyperbolicPoint ball(Vec v) {
        HyperbolicPoint p{Model::Ball, std::move(v)};
        p.validate();
        return p;
    }
    /// o = (0, ..., 0, 1) in the half-space model.
    static HyperbolicPoint origin(int n) {
        Vec v = Vec::Zero(n);
        v(n - 1) = 1.0;
        return half_space(v);
    }
    int dim() const { return static_cast<int>(x.size()); }

    void validate() const {
        if (x.size() < 2) throw ValidationError("hyperbolic points need n >= 2 coordinates");
        if (!x.allFinite()) throw ValidationError("non-finite coordinates");
        if (model == Model::UpperHalfSpace && !(x(x.size() - 1) > 0.0))
            throw ValidationError("half-space point needs a positive last coordinate");
        if (model == Model::Ball && !(x.squaredNorm() < 1.0)) throw ValidationError("ball point must satisfy |x| < 1");
    }
};

/// Half-space: a plane point u in R^{n-1} or the point at infinity.
/// Ball: a unit vector in R^n.
struct BoundaryPoint {
    Model model = Model::UpperHalfSpace;
    bool at_infinity = false;
    Vec u;

    static BoundaryPoint plane(Vec v) { return {Model::UpperHalfSpace, false, std::move(v)}; }
    static BoundaryPoint infinity(int n) { return {Model::UpperHalfSpace, true, Vec::Zero(n - 1)}; }
    static BoundaryPoint sphere(Vec v) {
        if (std::abs(v.norm() - 1.0) > 1e-12) throw ValidationError("sphere boundary point must be unit-norm");
        return {Model::Ball, false, std::move(v)};
    }
    int ambient() const { return model == Model::Ball ? static_cast<int>(u.size()) : static_cast<int>(u.size()) + 1; }
};

// ---------------------------------------------------------------------------
// Cayley map sigma(y) = -e_n + 2 (y + e_n) / |y + e_n|^2.  It is an
// involution exchanging ball and half-space, with 0 <-> o and -e_n <-> inf.

inline Vec cayley(const Vec& y) {
    Vec w = y;
    w(w.size() - 1) += 1.0;
    Vec out = 2.0 * w / w.squaredNorm();
    out(out.size() - 1) -= 1.0;
    return out;
}

inline HyperbolicPoint to_half_space(const HyperbolicPoint& p) {
    if (p.model == Model::UpperHalfSpace) return p;
    return HyperbolicPoint::half_space(cayley(p.x));
}

inline HyperbolicPoint to_ball(const HyperbolicPoint& p) {
    if (p.model == Model::Ball) return p;
    return HyperbolicPoint::ball(cayley(p.x));
}

/// Plane point u -> (2u, 1 - |u|^2) / (|u|^2 + 1); infinity -> -e_n.
inline BoundaryPoint to_sphere(const BoundaryPoint& b) {
    if (b.model == Model::Ball) return b;
    const int n = b.ambient();
    Vec s = Vec::Zero(n);
    if (b.at_infinity) {
        s(n - 1) = -1.0;
        return {Model::Ball, false, s};
    }
    const double r2 = b.u.squaredNorm();
    s.head(n - 1) = 2.0 * b.u / (r2 + 1.0);
    s(n - 1) = (1.0 - r2) / (r2 + 1.0);
    return {Model::Ball, false, s};
}

inline BoundaryPoint to_plane(const BoundaryPoint& b) {
    if (b.model == Model::UpperHalfSpace) return b;
    const int n = static_cast<int>(b.u.size());
    const double sn = b.u(n - 1);
    if (sn >= 0.0) return BoundaryPoint::plane(b.u.head(n - 1) / (1.0 + sn));
    // Near the pole 1 + s_n cancels; use (1 - s_n)(1 + s_n) = |s_head|^2.
    const double h2 = b.u.head(n - 1).squaredNorm();
    if (h2 <= 1e-300) return BoundaryPoint::infinity(n);
    return BoundaryPoint::plane(b.u.head(n - 1) * ((1.0 - sn) / h2));
}

// ---------------------------------------------------------------------------

namespace detail {
/// arccosh(1 + x) for x >= 0 without cancellation.
inline double acosh1p(double x) { return std::log1p(x + std::sqrt(x * (x + 2.0))); }
}  // namespace detail

inline double distance(const HyperbolicPoint& p_in, const HyperbolicPoint& q_in) {
    p_in.validate();
    q_in.validate();
    if (p_in.dim() != q_in.dim()) throw ValidationError("points live in different dimensions");
    if (p_in.model == Model::Ball && q_in.model == Model::Ball) {
        const double num = 2.0 * (p_in.x - q_in.x).squaredNorm();
        return detail::acosh1p(num / ((1.0 - p_in.x.squaredNorm()) * (1.0 - q_in.x.squaredNorm())));
    }
    const HyperbolicPoint p = to_half_space(p_in), q = to_half_space(q_in);
    const int n = p.dim();
    return detail::acosh1p((p.x - q.x).squaredNorm() / (2.0 * p.x(n - 1) * q.x(n - 1)));
}

/// d(o, o + (v, 0)) for a horizontal displacement v.
inline double horosphere_distance(double v_norm) { return 2.0 * std::asinh(0.5 * v_norm); }

inline double busemann(const BoundaryPoint& xi_in, const HyperbolicPoint& p_in, const HyperbolicPoint& q_in) {
    const HyperbolicPoint p = to_half_space(p_in), q = to_half_space(q_in);
    const BoundaryPoint xi = to_plane(xi_in);
    const int n = p.dim();
    if (xi.ambient() != n || q.dim() != n) throw ValidationError("dimension mismatch");
    if (xi.at_infinity) return std::log(q.x(n - 1) / p.x(n - 1));
    auto gap2 = [&](const HyperbolicPoint& z) {
        Vec d = z.x;
        d.head(n - 1) -= xi.u;
        return d.squaredNorm();
    };
    const double gp = gap2(p), gq = gap2(q);
    if (gp <= 0.0 || gq <= 0.0) throw ValidationError("Busemann function undefined at the boundary point");
    return std::log(gp / p.x(n - 1)) + std::log(q.x(n - 1) / gq);
}

namespace detail {

/// Reflection in the unit sphere centred at the boundary point c: an
/// isometry of the half-space that sends c to infinity and back.
inline Vec invert_at(const Vec& x, const Vec& c) {
    Vec d = x;
    d.head(c.size()) -= c;
    Vec out = d / d.squaredNorm();
    out.head(c.size()) += c;
    return out;
}

struct Geodesic {
    // Normalized picture: after optionally inverting at `pole`, the geodesic
    // is the vertical line over `foot_u`.
    bool inverted = false;
    Vec pole;
    Vec foot_u;
};

inline Geodesic normalize_geodesic(const BoundaryPoint& a, const BoundaryPoint& b) {
    Geodesic g;
    if (a.at_infinity && b.at_infinity) throw ValidationError("boundary points coincide");
    if (a.at_infinity || b.at_infinity) {
        g.foot_u = a.at_infinity ? b.u : a.u;
        return g;
    }
    if ((a.u - b.u).norm() == 0.0) throw ValidationError("boundary points coincide");
    g.inverted = true;
    g.pole = b.u;
    const Vec d = a.u - b.u;
    g.foot_u = b.u + d / d.squaredNorm();
    return g;
}

inline Vec embed(const Vec& u, double h) {
    Vec x(u.size() + 1);
    x.head(u.size()) = u;
    x(u.size()) = h;
    return x;
}

}  // namespace detail

/// Point of the geodesic (xi, xi') at signed arc length s from the point
/// closest to `base`.
inline HyperbolicPoint geodesic_point(const BoundaryPoint& xi_in, const BoundaryPoint& xi2_in,
                                      const HyperbolicPoint& base_in, double s) {
    const BoundaryPoint a = to_plane(xi_in), b = to_plane(xi2_in);
    const HyperbolicPoint base = to_half_space(base_in);
    const auto g = detail::normalize_geodesic(a, b);
    const Vec x = g.inverted ? detail::invert_at(base.x, g.pole) : base.x;
    // Closest point on the vertical line over foot_u: height |x - (foot_u, 0)|.
    const double h = (x - detail::embed(g.foot_u, 0.0)).norm();
    Vec z = detail::embed(g.foot_u, h * std::exp(s));
    if (g.inverted) z = detail::invert_at(z, g.pole);
    return HyperbolicPoint::half_space(z);
}

/// (xi | xi')_x = (B_xi(x, z) + B_xi'(x, z)) / 2 with z on the geodesic
/// joining xi and xi'.  Any z on it gives the same value; `s` selects one by
/// arc length from the point closest to x.
inline double gromov_product(const BoundaryPoint& xi, const BoundaryPoint& xi2, const HyperbolicPoint& base,
                             double s = 0.0) {
    const HyperbolicPoint z = geodesic_point(xi, xi2, base, s);
    return 0.5 * (busemann(xi, base, z) + busemann(xi2, base, z));
}

/// Chordal distance between boundary points after mapping to the sphere.
inline double boundary_chord(const BoundaryPoint& a, const BoundaryPoint& b) {
    return (to_sphere(a).u - to_sphere(b).u).norm();
}

/// Angle metric d_1 on the boundary sphere.
inline double spherical_metric(const BoundaryPoint& a, const BoundaryPoint& b) {
    const double c = std::min(2.0, boundary_chord(a, b));
    return 2.0 * std::asin(0.5 * c);
}

/// e^{-(xi|xi')_base}; zero for equal points.
inline double bourdon_metric(const BoundaryPoint& a, const BoundaryPoint& b, const HyperbolicPoint& base) {
    if (boundary_chord(a, b) == 0.0) return 0.0;
    return std::exp(-gromov_product(a, b, base));
}

// ---------------------------------------------------------------------------

/// Rank-k group of horizontal translations x -> x + (sum N_i alpha_i, 0)
/// of the half-space H^n; all fix the point at infinity.
struct ParabolicGroupSpec {
    int n = 2;
    int k = 1;
    std::vector<Vec> alphas;

    static ParabolicGroupSpec make(int n, std::vector<Vec> alphas) {
        ParabolicGroupSpec g{n, static_cast<int>(alphas.size()), std::move(alphas)};
        g.validate();
        return g;
    }

    void validate() const {
        if (n < 2) throw ValidationError("ambient dimension must be >= 2");
        if (k < 1 || k > n - 1) throw ValidationError("rank k must lie in [1, n-1]");
        if (static_cast<int>(alphas.size()) != k) throw ValidationError("need exactly k translation vectors");
        for (const auto& a : alphas)
            if (a.size() != n - 1) throw ValidationError("translation vectors must have n-1 coordinates");
        if (Eigen::FullPivLU<Eigen::MatrixXd>(matrix()).rank() != k)
            throw ValidationError("translation vectors are linearly dependent");
    }

    /// (n-1) x k matrix with the alphas as columns.
    Eigen::MatrixXd matrix() const {
        Eigen::MatrixXd A(n - 1, k);
        for (int i = 0; i < k; ++i) A.col(i) = alphas[i];
        return A;
    }

    Vec translation(const std::vector<std::int64_t>& N) const {
        Vec v = Vec::Zero(n - 1);
        for (int i = 0; i < k; ++i) v += static_cast<double>(N[i]) * alphas[i];
        return v;
    }

    HyperbolicPoint apply(const std::vector<std::int64_t>& N, const HyperbolicPoint& p_in) const {
        HyperbolicPoint p = to_half_space(p_in);
        p.x.head(n - 1) += translation(N);
        return p;
    }

    BoundaryPoint apply(const std::vector<std::int64_t>& N, const BoundaryPoint& b_in) const {
        BoundaryPoint b = to_plane(b_in);
        if (b.at_infinity) return b;
        b.u += translation(N);
        return b;
    }

    /// Smallest and largest singular values of the alpha matrix.
    std::pair<double, double> singular_range() const {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(matrix());
        const auto& s = svd.singularValues();
        return {s(s.size() - 1), s(0)};
    }
};

/// Orbit of xi under all N with |N|_inf <= M, mapped to the boundary sphere.
/// Points are generated in lexicographic order of N.
inline PointCloud parabolic_orbit(const ParabolicGroupSpec& group, const BoundaryPoint& xi_in, std::int64_t M) {
    group.validate();
    if (M < 0) throw ValidationError("orbit radius must be >= 0");
    const BoundaryPoint xi = to_plane(xi_in);
    if (xi.at_infinity) throw ValidationError("xi is fixed by P");
    if (xi.ambient() != group.n) throw ValidationError("xi has the wrong dimension");
    const int k = group.k, n = group.n;
    const auto side = static_cast<std::size_t>(2 * M + 1);
    std::size_t total = 1;
    for (int i = 0; i < k; ++i) total *= side;
    std::vector<double> flat(total * n);
    // Index -> N in lexicographic order, first coordinate slowest.
    parallel_for((total + kSumBlock - 1) / kSumBlock, [&](std::size_t blk) {
        std::vector<std::int64_t> N(k);
        for (std::size_t idx = blk * kSumBlock; idx < std::min(total, (blk + 1) * kSumBlock); ++idx) {
            std::size_t r = idx;
            for (int i = k - 1; i >= 0; --i) {
                N[i] = static_cast<std::int64_t>(r % side) - M;
                r /= side;
            }
            const Vec u = xi.u + group.translation(N);
            const double r2 = u.squaredNorm();
            double* out = &flat[idx * n];
            for (int j = 0; j < n - 1; ++j) out[j] = 2.0 * u(j) / (r2 + 1.0);
            out[n - 1] = (1.0 - r2) / (r2 + 1.0);
        }
    });
    std::string prov = "parabolic orbit n=" + std::to_string(n) + " k=" + std::to_string(k) +
                       " M=" + std::to_string(M);
    return PointCloud::sphere(n, flat, prov);
}

// ---------------------------------------------------------------------------

struct TriangleReport {
    double side_zx = 0.0, side_zy = 0.0, side_xy = 0.0;
    double angle_at_z = 0.0;
    double slack = 0.0;     ///< d(x,y) - d(z,x) - d(z,y)
    double constant = 0.0;  ///< C(D) = 2 log(2 / (1 - cos D))
    double sharp_constant = 0.0;  ///< log(2 / (1 - cos angle)), the exact infimum of -slack
    bool holds = false;     ///< slack >= -C(D)
};

/// Check d(x,y) >= d(z,x) + d(z,y) - C(D) when the angle at z is >= D.
///
/// With a, b the sides at z, gamma the angle there and k = (1 - cos gamma)/2,
/// the law of cosines reads cosh c = (1 - k) cosh(a - b) + k cosh(a + b),
/// which forces c >= a + b + log k.  So the slack never drops below
/// -log(2/(1 - cos D)); the reported constant C(D) is twice that.
inline TriangleReport comparison_triangle_check(const HyperbolicPoint& x, const HyperbolicPoint& y,
                                                const HyperbolicPoint& z, double D) {
    if (!(D > 0.0 && D <= M_PI)) throw ValidationError("angle bound D must lie in (0, pi]");
    TriangleReport r;
    r.side_zx = distance(z, x);
    r.side_zy = distance(z, y);
    r.side_xy = distance(x, y);
    if (r.side_zx < 1e-12 || r.side_zy < 1e-12) throw ValidationError("degenerate triangle: vertex coincides with z");
    const double num = std::cosh(r.side_zx) * std::cosh(r.side_zy) - std::cosh(r.side_xy);
    const double cg = std::clamp(num / (std::sinh(r.side_zx) * std::sinh(r.side_zy)), -1.0, 1.0);
    r.angle_at_z = std::acos(cg);
    if (r.angle_at_z < D - 1e-9) throw ValidationError("angle at z is below D");
    r.slack = r.side_xy - r.side_zx - r.side_zy;
    r.constant = 2.0 * std::log(2.0 / (1.0 - std::cos(D)));
    r.sharp_constant = std::log(2.0 / (1.0 - cg));
    r.holds = r.slack >= -r.constant;
    return r;
}

}  // namespace pressdim
