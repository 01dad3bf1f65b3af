#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "wedgefall/rng.hpp"
#include "wedgefall/tangent.hpp"

namespace wedgefall {

// (dh, dv) -> (dxi, deta) with xi_i = sum_{j>=i} dh_j and eta_i = dv_i - dv_{i-1}.
inline Mat6 xieta_basis()
{
    Mat6 t = Mat6::Zero();
    t.block<3, 3>(0, 0) << 1, 1, 1, 0, 1, 1, 0, 0, 1;
    t.block<3, 3>(3, 3) << 1, 0, 0, -1, 1, 0, 0, -1, 1;
    return t;
}

inline Vec6 to_xieta(const TangentVector& t) { return xieta_basis() * t.vec(); }
inline TangentVector from_xieta(const Vec6& x) { return TangentVector::from(xieta_basis().inverse() * x); }

inline double q_xieta(const Vec6& x) { return x.head<3>().dot(x.tail<3>()); }

struct SignCalibration {
    int beta = 1;
    int alpha1 = 1;
    int alpha2 = 1;
};

struct XiEtaBlocks {
    Mat3 B = Mat3::Zero();
    Mat3 U1 = Mat3::Zero();
    Mat3 U2 = Mat3::Zero();
    Mat3 M1 = Mat3::Identity();
    Mat3 M2 = Mat3::Identity();
    Mat6 dphi01 = Mat6::Identity();
    Mat6 dphi12 = Mat6::Identity();
    Mat6 dphi23 = Mat6::Identity();
    SignCalibration sign_calibration;
    double beta = 0.0;
    double alpha1 = 0.0;
    double alpha2 = 0.0;

    const Mat6& step(EventKind k) const
    {
        switch (k) {
        case EventKind::Floor01: return dphi01;
        case EventKind::Pair12: return dphi12;
        case EventKind::Pair23: return dphi23;
        default: throw SingularEvent("no (xi,eta) block for singular kinds");
        }
    }
};

namespace detail {

inline Mat6 upper_block(const Mat3& m, const Mat3& u)
{
    Mat6 r = Mat6::Zero();
    r.block<3, 3>(0, 0) = m;
    r.block<3, 3>(0, 3) = u;
    r.block<3, 3>(3, 3) = m.transpose();
    return r;
}

} // namespace detail

// Printed collision blocks; only the coefficient belonging to `kind` is nonzero.
inline XiEtaBlocks dphi_xieta(EventKind kind, const MassModel& m, const Vec3& vminus, SignCalibration signs = {})
{
    XiEtaBlocks b;
    b.sign_calibration = signs;
    const double g1 = m.gamma(0), g2 = m.gamma(1);
    b.M1 << 1, 0, 0, 0, -1, 1 + g1, 0, 0, 1;
    b.M2 << 1, 0, 0, 0, 1, 0, 0, 1 - g2, -1;
    switch (kind) {
    case EventKind::Floor01:
        if (!(vminus[0] < 0.0))
            throw SectionMismatch("floor block needs v1- < 0");
        b.beta = beta_coefficient(m, vminus);
        break;
    case EventKind::Pair12:
        if (!(vminus[0] >= vminus[1]))
            throw SectionMismatch("(1,2) block needs v1- >= v2-");
        b.alpha1 = alpha_coefficient(m, 0, vminus);
        break;
    case EventKind::Pair23:
        if (!(vminus[1] >= vminus[2]))
            throw SectionMismatch("(2,3) block needs v2- >= v3-");
        b.alpha2 = alpha_coefficient(m, 1, vminus);
        break;
    default: throw SingularEvent("no (xi,eta) block for singular kinds");
    }
    b.B.diagonal() << 1.0, signs.beta * b.beta, 0.0;
    b.U1(1, 1) = signs.alpha1 * b.alpha1;
    b.U2(2, 2) = signs.alpha2 * b.alpha2;
    b.dphi01.block<3, 3>(3, 0) = b.B;
    b.dphi12 = detail::upper_block(b.M1, b.U1);
    b.dphi23 = detail::upper_block(b.M2, b.U2);
    return b;
}

namespace detail {

inline Vec3 random_approach(EventKind kind, Rng& rng)
{
    Vec3 v(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3));
    switch (kind) {
    case EventKind::Floor01: v[0] = -std::abs(v[0]) - 1e-3; break;
    case EventKind::Pair12:
        if (v[0] < v[1]) std::swap(v[0], v[1]);
        v[0] += 1e-3;
        break;
    default:
        if (v[1] < v[2]) std::swap(v[1], v[2]);
        v[1] += 1e-3;
        break;
    }
    return v;
}

// Number of sampled energy-reduced vectors whose Q drops under the block.
inline int q_violations(EventKind kind, const MassModel& m, SignCalibration s, Rng& rng, int samples)
{
    int bad = 0;
    for (int k = 0; k < samples; ++k) {
        const XiEtaBlocks b = dphi_xieta(kind, m, random_approach(kind, rng), s);
        Vec6 x;
        for (int i = 0; i < 6; ++i)
            x[i] = rng.normal();
        x[0] = 0.0;
        const double q0 = q_xieta(x);
        const double q1 = q_xieta(b.step(kind) * x);
        if (q1 < q0 - 1e-10 * (1.0 + std::abs(q0)))
            ++bad;
    }
    return bad;
}

} // namespace detail

// Chooses each beta/alpha sign so that the printed blocks are Q-monotone.
inline SignCalibration calibrate_signs(const MassModel& m, Rng& rng, int samples = 200)
{
    const EventKind kinds[3] = {EventKind::Floor01, EventKind::Pair12, EventKind::Pair23};
    int signs[3] = {1, 1, 1};
    auto pack = [&] { return SignCalibration{signs[0], signs[1], signs[2]}; };
    for (int t = 0; t < 3; ++t) {
        int chosen = 0;
        for (int s : {1, -1}) {
            signs[t] = s;
            if (detail::q_violations(kinds[t], m, pack(), rng, samples) == 0) {
                chosen = s;
                break;
            }
        }
        if (chosen == 0)
            throw Error(std::string("no Q-monotone sign for the ") + to_string(kinds[t]) + " block");
        signs[t] = chosen;
    }
    return pack();
}

// Printed form: sum_{i=1}^{2} (dxi_{i+1} - dxi_i)^2 / m_i.
inline double cw_norm(const Vec3& dxi, const MassModel& m)
{
    const double a = dxi[1] - dxi[0], b = dxi[2] - dxi[1];
    return std::sqrt(a * a / m.m(0) + b * b / m.m(1));
}

// Completion with dxi_4 = 0, i.e. sum dh_i^2 / m_i; invariant under both M_i on {dxi_1 = 0}.
inline double cw_norm_full(const Vec3& dxi, const MassModel& m)
{
    const double a = dxi[1] - dxi[0], b = dxi[2] - dxi[1], c = dxi[2];
    return std::sqrt(a * a / m.m(0) + b * b / m.m(1) + c * c / m.m(2));
}

struct NormEquivalence {
    double d1 = 0.0; // min ||.||_CW / ||.||_max on {dxi_1 = 0}
    double d2 = 0.0; // max ||.||_CW / ||.||_max on {dxi_1 = 0}
};

// Extremes of the CW quadratic form over the boundary of the unit max-norm square in (xi2, xi3).
inline NormEquivalence cw_equivalence_constants(const MassModel& m)
{
    // ||(0,a,b)||_CW^2 = a^2/m1 + (b-a)^2/m2 = A a^2 + 2 C a b + D b^2
    const double A = 1.0 / m.m(0) + 1.0 / m.m(1), C = -1.0 / m.m(1), D = 1.0 / m.m(1);
    auto f = [&](double a, double b) { return A * a * a + 2 * C * a * b + D * b * b; };
    double lo = 1e300, hi = 0.0;
    auto visit = [&](double a, double b) {
        const double val = f(a, b);
        lo = std::min(lo, val);
        hi = std::max(hi, val);
    };
    for (double s : {-1.0, 1.0}) {
        // a = s, b in [-1,1]: stationary at b = -C s / D
        visit(s, -1.0);
        visit(s, 1.0);
        const double bs = -C * s / D;
        if (std::abs(bs) <= 1.0) visit(s, bs);
        // b = s, a in [-1,1]: stationary at a = -C s / A
        const double as = -C * s / A;
        if (std::abs(as) <= 1.0) visit(as, s);
    }
    return {std::sqrt(lo), std::sqrt(hi)};
}

inline double alpha_bound(const MassModel& m, double c)
{
    const double m1 = m.m(0), m3 = m.m(2);
    return 4.0 * std::sqrt(2.0 * c) * m1 * m1 * m1 / (m3 * m3 * std::sqrt(m3));
}

struct AlphaBoundReport {
    double bound = 0.0;
    double max_alpha = 0.0;
    double max_ratio = 0.0;
    std::size_t pair_events = 0;
    bool ok = true;
};

inline AlphaBoundReport alpha_bound_check(const MassModel& m, const OrbitLog& orbit, double c)
{
    AlphaBoundReport r;
    r.bound = alpha_bound(m, c);
    for (const LogEntry& e : orbit.entries) {
        if (!is_ball_ball(e.kind))
            continue;
        const Vec3 pre = collision_law(m, e.state.v, e.kind);
        const double a = std::abs(alpha_coefficient(m, e.kind == EventKind::Pair12 ? 0 : 1, pre));
        r.max_alpha = std::max(r.max_alpha, a);
        ++r.pair_events;
    }
    r.max_ratio = r.max_alpha / r.bound;
    r.ok = r.max_ratio <= 1.0;
    return r;
}

} // namespace wedgefall
