#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "wedgefall/rng.hpp"
#include "wedgefall/tangent.hpp"

namespace wedgefall {

enum class ConeStatus { Inside, Boundary, Outside };

inline const char* to_string(ConeStatus s)
{
    switch (s) {
    case ConeStatus::Inside: return "inside";
    case ConeStatus::Boundary: return "boundary";
    case ConeStatus::Outside: return "outside";
    }
    return "?";
}

inline ConeStatus cone_status_value(double q, double norm2, double tol = 1e-12)
{
    if (q > tol * norm2)
        return ConeStatus::Inside;
    if (q < -tol * norm2)
        return ConeStatus::Outside;
    return ConeStatus::Boundary;
}

inline ConeStatus cone_status(const TangentVector& t, double tol = 1e-12)
{
    return cone_status_value(q_form(t), t.vec().squaredNorm(), tol);
}

inline ConeStatus cone_status(const Vec4& r, double tol = 1e-12)
{
    return cone_status_value(q_reduced(r), r.squaredNorm(), tol);
}

struct LagrangianBasis {
    std::array<TangentVector, 2> l1; // dv = 0
    std::array<TangentVector, 2> l2; // dh = 0, dv1 = 0
    std::array<Vec4, 2> l1_reduced;
    std::array<Vec4, 2> l2_reduced;
};

inline LagrangianBasis lagrangian_basis()
{
    LagrangianBasis b;
    for (int i = 0; i < 2; ++i) {
        b.l1_reduced[i] = Vec4::Unit(i);
        b.l2_reduced[i] = Vec4::Unit(2 + i);
        b.l1[i] = from_reduced(b.l1_reduced[i]);
        b.l2[i] = from_reduced(b.l2_reduced[i]);
    }
    return b;
}

// ---------------------------------------------------------------- sigma

enum class SigmaMethod { Pencil, Sampled };

struct SigmaResult {
    double value = 1.0;
    int n = 0;
    SigmaMethod method = SigmaMethod::Pencil;
    Vec4 witness = Vec4::Zero();
    double witness_q = 0.0; // Q(witness)
};

namespace detail {

using Mat4L = Eigen::Matrix<long double, 4, 4>;

inline Mat4L pulled_back_q(const Mat4& r)
{
    const Mat4L rl = r.cast<long double>();
    const Mat4L s = q_matrix().cast<long double>();
    Mat4L sp = rl.transpose() * s * rl;
    return 0.5L * (sp + sp.transpose());
}

inline long double lambda_min(const Mat4L& sp, long double nu)
{
    const Mat4L s = q_matrix().cast<long double>();
    Eigen::SelfAdjointEigenSolver<Mat4L> es(sp - nu * s, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

inline long double pencil_tolerance(const Mat4L& sp, long double nu)
{
    return 64.0L * std::numeric_limits<long double>::epsilon() * (sp.cwiseAbs().maxCoeff() + std::abs(nu));
}

} // namespace detail

// sigma^2 = max{nu : S' - nu S >= 0}, S' the pullback of Q.
inline SigmaResult sigma_pencil(const Mat4& r, int n = 0)
{
    using L = long double;
    const detail::Mat4L sp = detail::pulled_back_q(r);
    const detail::Mat4L s = q_matrix().cast<L>();
    auto feasible = [&](L nu) { return detail::lambda_min(sp, nu) >= -detail::pencil_tolerance(sp, nu); };

    // candidates: real generalized eigenvalues of (S', S)
    Eigen::EigenSolver<detail::Mat4L> ev(s.inverse() * sp, false);
    L best = 1.0L;
    for (int i = 0; i < 4; ++i) {
        const std::complex<L> z = ev.eigenvalues()(i);
        if (std::abs(z.imag()) > 1e-6L * (1.0L + std::abs(z.real())) || z.real() <= best)
            continue;
        if (feasible(z.real()))
            best = z.real();
    }
    if (!feasible(best))
        best = 1.0L;

    // polish the upper end of the feasible interval by bisection
    L lo = best, hi = std::max<L>(2.0L, 2.0L * best);
    while (feasible(hi))
        hi *= 2.0L;
    for (int it = 0; it < 200 && hi - lo > 1e-17L * hi; ++it) {
        const L mid = 0.5L * (lo + hi);
        (feasible(mid) ? lo : hi) = mid;
    }
    // S' - nu S is singular at the optimum, so the answer is 1 or a real generalized
    // eigenvalue. When the null direction is Q-isotropic, lambda_min is flat to first
    // order and bisection drifts by ~sqrt(tolerance); snap back to the eigenvalue.
    // A defective eigenvalue splits under rounding into a cluster of size ~sqrt(eps);
    // the cluster mean is well conditioned, its members are not.
    L snap = 1.0L, gap = std::abs(lo - 1.0L);
    for (int i = 0; i < 4; ++i) {
        const std::complex<L> z = ev.eigenvalues()(i);
        if (z.real() >= 1.0L && std::abs(z.imag()) <= 1e-6L * z.real() && std::abs(lo - z.real()) < gap) {
            snap = z.real();
            gap = std::abs(lo - z.real());
        }
    }
    if (gap <= 1e-6L * lo) {
        L sum = 0.0L;
        int count = 0;
        for (int i = 0; i < 4; ++i) {
            const std::complex<L> z = ev.eigenvalues()(i);
            if (std::abs(z - std::complex<L>(snap, 0.0L)) <= 1e-6L * snap) {
                sum += z.real();
                ++count;
            }
        }
        lo = count ? std::max(1.0L, sum / count) : snap;
    }

    Eigen::SelfAdjointEigenSolver<detail::Mat4L> es(sp - lo * s);
    SigmaResult out;
    out.value = static_cast<double>(std::sqrt(lo));
    out.n = n;
    out.method = SigmaMethod::Pencil;
    out.witness = es.eigenvectors().col(0).cast<double>();
    if (q_reduced(out.witness) < 0.0)
        out.witness = -out.witness;
    out.witness_q = q_reduced(out.witness);
    return out;
}

namespace detail {

// Points on the shell Q = 1 in coordinates a = (xi+eta)/2, b = (xi-eta)/2,
// Q = |a|^2 - |b|^2, parametrized by (theta, b1, b2).
inline Vec4 shell_point(const Eigen::Vector3d& p)
{
    const double rb = std::sqrt(1.0 + p[1] * p[1] + p[2] * p[2]);
    const double a1 = rb * std::cos(p[0]), a2 = rb * std::sin(p[0]);
    return Vec4(a1 + p[1], a2 + p[2], a1 - p[1], a2 - p[2]);
}

} // namespace detail

// Independent oracle: quasi-Newton descent of Q(R w) over the Q = 1 shell from random starts.
inline SigmaResult sigma_sampled(const Mat4& r, Rng& rng, int n = 0, int starts = 24, int iters = 400)
{
    const Mat4 sp = r.transpose() * q_matrix() * r;
    auto f = [&](const Eigen::Vector3d& p) {
        const Vec4 w = detail::shell_point(p);
        return w.dot(sp * w);
    };
    auto grad = [&](const Eigen::Vector3d& p) {
        Eigen::Vector3d g;
        for (int i = 0; i < 3; ++i) {
            const double h = 1e-6 * (1.0 + std::abs(p[i]));
            Eigen::Vector3d a = p, b = p;
            a[i] += h;
            b[i] -= h;
            g[i] = (f(a) - f(b)) / (2 * h);
        }
        return g;
    };
    double best = std::numeric_limits<double>::infinity();
    Eigen::Vector3d best_p = Eigen::Vector3d::Zero();
    for (int s = 0; s < starts; ++s) {
        Eigen::Vector3d p(rng.uniform(0, 6.283185307179586), rng.normal(), rng.normal());
        Eigen::Matrix3d hinv = Eigen::Matrix3d::Identity();
        double fp = f(p);
        Eigen::Vector3d g = grad(p);
        for (int it = 0; it < iters; ++it) {
            Eigen::Vector3d d = -hinv * g;
            if (d.dot(g) >= 0.0) {
                hinv.setIdentity();
                d = -g;
            }
            double t = 1.0;
            Eigen::Vector3d pn = p + t * d;
            double fn = f(pn);
            while (!(fn <= fp + 1e-4 * t * g.dot(d)) && t > 1e-16) {
                t *= 0.5;
                pn = p + t * d;
                fn = f(pn);
            }
            if (t <= 1e-16)
                break;
            const Eigen::Vector3d gn = grad(pn);
            const Eigen::Vector3d sv = pn - p, yv = gn - g;
            const double sy = sv.dot(yv);
            if (sy > 1e-300) {
                const double rho = 1.0 / sy;
                const Eigen::Matrix3d i3 = Eigen::Matrix3d::Identity();
                hinv = (i3 - rho * sv * yv.transpose()) * hinv * (i3 - rho * yv * sv.transpose()) +
                       rho * sv * sv.transpose();
            }
            const double prev = fp;
            p = pn;
            fp = fn;
            g = gn;
            if (std::abs(prev - fp) <= 1e-15 * std::abs(fp) && g.norm() <= 1e-9 * (1.0 + std::abs(fp)))
                break;
        }
        if (fp < best) {
            best = fp;
            best_p = p;
        }
    }
    SigmaResult out;
    out.value = std::sqrt(std::max(best, 0.0));
    out.n = n;
    out.method = SigmaMethod::Sampled;
    out.witness = detail::shell_point(best_p);
    out.witness_q = q_reduced(out.witness);
    return out;
}

inline SigmaResult sigma(const MassModel& m, const PhaseState& x, int n)
{
    return sigma_pencil(reduced_orbit(m, x, n).product(0, n), n);
}

// ------------------------------------------------- eventual strict monotonicity

inline bool positive_definite_2x2(const Eigen::Matrix2d& f, double tol = 1e-12)
{
    const double s = std::max(1.0, f.cwiseAbs().maxCoeff());
    return f(0, 0) > tol * s && f.determinant() > tol * s * s;
}

// Same test for f_ij = Q-polar(R e_i, R e_j): rounding in f_ij is of order eps |R e_i| |R e_j|,
// so decide on the congruence-scaled form f_ij / (n_i n_j), which keeps the sign pattern.
inline bool positive_definite_2x2(const Eigen::Matrix2d& f, double n0, double n1, double tol = 1e-12)
{
    if (!(n0 > 0.0) || !(n1 > 0.0))
        return false;
    const double g00 = f(0, 0) / (n0 * n0), g11 = f(1, 1) / (n1 * n1), g01 = f(0, 1) / (n0 * n1);
    return g00 > tol && g11 > tol && g00 * g11 - g01 * g01 > tol;
}

struct MonotonicityResult {
    std::optional<int> n; // both forms positive definite
    int n_l1 = -1;        // first n with the L1 form positive definite
    int n_l2 = -1;
    int horizon = 0;
    std::string diagnostics;
};

// Induced forms v -> Q(R v) on L1 (upper-left) and L2 (lower-right).
inline std::pair<Eigen::Matrix2d, Eigen::Matrix2d> lagrangian_forms(const Mat4& r)
{
    const Mat4 sp = r.transpose() * q_matrix() * r;
    return {sp.topLeftCorner<2, 2>(), sp.bottomRightCorner<2, 2>()};
}

inline MonotonicityResult monotonicity_time(const ReducedOrbit& orb, int horizon)
{
    MonotonicityResult res;
    res.horizon = horizon;
    Mat4 r = Mat4::Identity();
    for (int k = 0; k < std::min(horizon, orb.size()); ++k) {
        r = orb.steps[k] * r;
        const auto [f1, f2] = lagrangian_forms(r);
        if (res.n_l1 < 0 && positive_definite_2x2(f1, r.col(0).norm(), r.col(1).norm()))
            res.n_l1 = k + 1;
        if (res.n_l2 < 0 && positive_definite_2x2(f2, r.col(2).norm(), r.col(3).norm()))
            res.n_l2 = k + 1;
        if (res.n_l1 > 0 && res.n_l2 > 0) {
            res.n = k + 1;
            return res;
        }
    }
    res.diagnostics = "horizon " + std::to_string(horizon) + " exhausted (L1 at " + std::to_string(res.n_l1) +
                      ", L2 at " + std::to_string(res.n_l2) + ")";
    return res;
}

inline MonotonicityResult monotonicity_time(const MassModel& m, const PhaseState& x, int horizon)
{
    return monotonicity_time(reduced_orbit(m, x, horizon), horizon);
}

// Floor returns among the first n events; a run of floor bounces with no
// ball-ball collision in between counts as a single return.
inline int floor_returns(const std::vector<EventKind>& kinds, int n)
{
    int returns = 0;
    bool pair_since = true;
    for (int k = 0; k < std::min<int>(n, static_cast<int>(kinds.size())); ++k) {
        if (kinds[k] == EventKind::Floor01) {
            returns += pair_since;
            pair_since = false;
        }
        else
            pair_since = true;
    }
    return returns;
}

// First n such that both pair kinds occur among the first n events, or -1.
inline int both_pairs_time(const std::vector<EventKind>& kinds)
{
    bool s12 = false, s23 = false;
    for (std::size_t k = 0; k < kinds.size(); ++k) {
        s12 |= kinds[k] == EventKind::Pair12;
        s23 |= kinds[k] == EventKind::Pair23;
        if (s12 && s23)
            return static_cast<int>(k) + 1;
    }
    return -1;
}

// Smallest eigenvalue of S' - S: positive iff Q(R v) > Q(v) for every v != 0.
inline double strict_gain(const Mat4& r)
{
    const Mat4 d = r.transpose() * q_matrix() * r - q_matrix();
    Eigen::SelfAdjointEigenSolver<Mat4> es(0.5 * (d + d.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

inline bool strictly_monotone(const Mat4& r, double tol = 1e-12)
{
    const Mat4 sp = r.transpose() * q_matrix() * r;
    return strict_gain(r) > tol * std::max(1.0, sp.cwiseAbs().maxCoeff());
}

// ------------------------------------------------------------ Q traces

enum class TimeDirection { Forward, Backward };

struct QTrace {
    std::vector<double> q;
    int crossing = -1; // first n with |q_n| >= threshold in the trace direction
    bool monotone = true;
};

inline QTrace unboundedness_trace(const MassModel& m, const PhaseState& x, const Vec4& v, int N,
                                  TimeDirection dir = TimeDirection::Forward,
                                  double threshold = std::numeric_limits<double>::infinity())
{
    QTrace t;
    Vec4 cur = v;
    PhaseState s = x;
    t.q.push_back(q_reduced(cur));
    const double sign = dir == TimeDirection::Forward ? 1.0 : -1.0;
    if (sign * t.q[0] >= threshold)
        t.crossing = 0;
    for (int k = 0; k < N && t.crossing < 0; ++k) {
        if (dir == TimeDirection::Forward) {
            const Monodromy d = monodromy_step(m, s);
            cur = d.reduced() * cur;
            s = d.target;
        }
        else {
            const MapResult prev = poincare_inverse(m, s);
            const PhaseState& y = prev.state();
            cur = symplectic_inverse(monodromy_step(m, y).reduced()) * cur;
            s = y;
        }
        const double q = q_reduced(cur);
        const double last = t.q.back();
        if (sign * (q - last) < -1e-10 * (1.0 + std::abs(last)))
            t.monotone = false;
        t.q.push_back(q);
        if (sign * q >= threshold)
            t.crossing = k + 1;
    }
    return t;
}

} // namespace wedgefall
