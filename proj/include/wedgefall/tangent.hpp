#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "wedgefall/dynamics.hpp"

namespace wedgefall {

using Vec4 = Eigen::Vector4d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat4 = Eigen::Matrix4d;
using Mat6 = Eigen::Matrix<double, 6, 6>;

// Tangent data in energy coordinates h_i = m_i (v_i^2/2 + q_i) and velocities.
struct TangentVector {
    Vec3 dh = Vec3::Zero();
    Vec3 dv = Vec3::Zero();

    Vec6 vec() const
    {
        Vec6 r;
        r << dh, dv;
        return r;
    }
    static TangentVector from(const Vec6& x) { return {x.head<3>(), x.tail<3>()}; }
    bool energy_reduced(double tol = 1e-12) const { return std::abs(dh.sum()) <= tol * (1.0 + dh.norm()); }
};

inline double q_form(const TangentVector& t) { return t.dh.dot(t.dv); }

inline double q_polar(const TangentVector& a, const TangentVector& b)
{
    return 0.5 * (a.dh.dot(b.dv) + b.dh.dot(a.dv));
}

inline double omega(const TangentVector& a, const TangentVector& b) { return a.dh.dot(b.dv) - b.dh.dot(a.dv); }

inline Mat6 omega_matrix()
{
    Mat6 j = Mat6::Zero();
    j.block<3, 3>(0, 3) = Eigen::Matrix3d::Identity();
    j.block<3, 3>(3, 0) = -Eigen::Matrix3d::Identity();
    return j;
}

// Q in (q,p) coordinates: sum dq_i dp_i + v_i dp_i^2 / m_i.
inline double q_form_qp(const MassModel& m, const PhaseState& x, const Vec3& dq, const Vec3& dp)
{
    double s = 0.0;
    for (int i = 0; i < 3; ++i)
        s += dq[i] * dp[i] + x.v[i] * dp[i] * dp[i] / m.m(i);
    return s;
}

inline TangentVector tangent_qp_to_hv(const MassModel& m, const PhaseState& x, const Vec3& dq, const Vec3& dp)
{
    TangentVector t;
    for (int i = 0; i < 3; ++i) {
        t.dh[i] = x.v[i] * dp[i] + m.m(i) * dq[i];
        t.dv[i] = dp[i] / m.m(i);
    }
    return t;
}

inline std::pair<Vec3, Vec3> tangent_hv_to_qp(const MassModel& m, const PhaseState& x, const TangentVector& t)
{
    Vec3 dq, dp;
    for (int i = 0; i < 3; ++i) {
        dp[i] = m.m(i) * t.dv[i];
        dq[i] = (t.dh[i] - x.v[i] * dp[i]) / m.m(i);
    }
    return {dq, dp};
}

// Reduced coordinates (xi2, xi3, eta2, eta3) on the energy-reduced flow quotient,
// xi_i = sum_{j>=i} dh_j, eta_i = dv_i - dv_{i-1}. Q = xi2 eta2 + xi3 eta3.
inline Eigen::Matrix<double, 4, 6> reduction_projector()
{
    Eigen::Matrix<double, 4, 6> p = Eigen::Matrix<double, 4, 6>::Zero();
    p(0, 1) = 1.0;
    p(0, 2) = 1.0;
    p(1, 2) = 1.0;
    p(2, 3) = -1.0;
    p(2, 4) = 1.0;
    p(3, 4) = -1.0;
    p(3, 5) = 1.0;
    return p;
}

inline Eigen::Matrix<double, 6, 4> reduction_embedding()
{
    Eigen::Matrix<double, 6, 4> e = Eigen::Matrix<double, 6, 4>::Zero();
    e(0, 0) = -1.0;
    e(1, 0) = 1.0;
    e(1, 1) = -1.0;
    e(2, 1) = 1.0;
    e(4, 2) = 1.0;
    e(5, 2) = 1.0;
    e(5, 3) = 1.0;
    return e;
}

inline Vec4 to_reduced(const TangentVector& t) { return reduction_projector() * t.vec(); }
inline TangentVector from_reduced(const Vec4& r) { return TangentVector::from(reduction_embedding() * r); }

inline double q_reduced(const Vec4& r) { return r[0] * r[2] + r[1] * r[3]; }

// Symmetric matrix of the reduced Q.
inline Mat4 q_matrix()
{
    Mat4 s = Mat4::Zero();
    s(0, 2) = s(2, 0) = 0.5;
    s(1, 3) = s(3, 1) = 0.5;
    return s;
}

// Matrix of the reduced symplectic form omega(a, b) = a^T J b.
inline Mat4 omega_reduced()
{
    Mat4 j = Mat4::Zero();
    j(0, 2) = j(1, 3) = 1.0;
    j(2, 0) = j(3, 1) = -1.0;
    return j;
}

struct Monodromy {
    Mat6 matrix = Mat6::Identity();
    PhaseState source;
    PhaseState target;
    EventKind kind = EventKind::Floor01;
    double coeff = 0.0; // beta for floor events, alpha_i for pair events
    double tau = 0.0;
    Vec3 pre_velocity = Vec3::Zero();

    Mat4 reduced() const { return reduction_projector() * matrix * reduction_embedding(); }
    TangentVector apply(const TangentVector& t) const { return TangentVector::from(matrix * t.vec()); }
};

inline double beta_coefficient(const MassModel& m, const Vec3& vminus) { return -2.0 / (m.m(0) * vminus[0]); }

inline double alpha_coefficient(const MassModel& m, int i, const Vec3& vminus)
{
    const double a = m.m(i), b = m.m(i + 1);
    return 2.0 * a * b * (a - b) * (vminus[i] - vminus[i + 1]) / ((a + b) * (a + b));
}

// Derivative of "fly to the section of `kind`, then collide" at arrival velocities vminus.
inline Mat6 collision_jacobian(const MassModel& m, EventKind kind, const Vec3& vminus)
{
    Eigen::Matrix<double, 1, 6> g = Eigen::Matrix<double, 1, 6>::Zero();
    Vec6 flow = Vec6::Zero();
    flow.tail<3>().setConstant(-1.0);
    Mat6 c = Mat6::Identity();
    switch (kind) {
    case EventKind::Floor01:
        g(0) = -1.0 / (m.m(0) * vminus[0]);
        g(3) = 1.0;
        c(3, 3) = -1.0;
        break;
    case EventKind::Pair12:
    case EventKind::Pair23: {
        const int i = kind == EventKind::Pair12 ? 0 : 1, j = i + 1;
        const double rel = vminus[i] - vminus[j];
        g(i) = -1.0 / (m.m(i) * rel);
        g(j) = 1.0 / (m.m(j) * rel);
        g(3 + i) = vminus[i] / rel;
        g(3 + j) = -vminus[j] / rel;
        const double gam = m.gamma(i);
        Eigen::Matrix2d law;
        law << gam, 1.0 - gam, 1.0 + gam, -gam;
        const Vec3 vplus = collision_law(m, vminus, kind);
        c.block<2, 2>(3 + i, 3 + i) = law;
        // dh_k+ = dh_k + m_k v_k+ dv_k+ - m_k v_k- dv_k-
        const int idx[2] = {i, j};
        for (int r = 0; r < 2; ++r) {
            const int k = idx[r];
            for (int s = 0; s < 2; ++s)
                c(k, 3 + idx[s]) = m.m(k) * vplus[k] * law(r, s);
            c(k, 3 + k) -= m.m(k) * vminus[k];
        }
        break;
    }
    default: throw SingularEvent("no monodromy through a singular event");
    }
    return c * (Mat6::Identity() + flow * g);
}

inline Monodromy monodromy_step(const MassModel& m, const PhaseState& x)
{
    const CollisionEvent ev = next_event(x);
    if (is_singular(ev.kind))
        throw SingularEvent(std::string("monodromy_step: next event is ") + to_string(ev.kind));
    const PhaseState arrival = detail::flight(x, ev.tau);
    Monodromy d;
    d.source = x;
    d.target = apply_collision(m, arrival, ev.kind);
    d.kind = ev.kind;
    d.tau = ev.tau;
    d.pre_velocity = arrival.v;
    d.matrix = collision_jacobian(m, ev.kind, arrival.v);
    d.coeff = ev.kind == EventKind::Floor01 ? beta_coefficient(m, arrival.v)
                                            : alpha_coefficient(m, ev.kind == EventKind::Pair12 ? 0 : 1, arrival.v);
    return d;
}

struct RenormPolicy {
    bool enabled = true;
    int cadence = 16;
    double threshold = 1e100;
};

struct MonodromyProduct {
    Mat6 matrix = Mat6::Identity();
    double log_scale = 0.0; // true product = exp(log_scale) * matrix
    PhaseState start;
    PhaseState end;
    std::vector<EventKind> kinds;
};

inline MonodromyProduct monodromy_product(const MassModel& m, const PhaseState& x, int n, RenormPolicy policy = {})
{
    MonodromyProduct p;
    p.start = x;
    p.end = x;
    for (int k = 0; k < n; ++k) {
        const Monodromy d = monodromy_step(m, p.end);
        p.matrix = d.matrix * p.matrix;
        p.end = d.target;
        p.kinds.push_back(d.kind);
        if (policy.enabled) {
            const double big = p.matrix.cwiseAbs().maxCoeff();
            if (((k + 1) % policy.cadence == 0 || big > policy.threshold) && big > 0.0) {
                p.matrix /= big;
                p.log_scale += std::log(big);
            }
        }
    }
    return p;
}

// Reduced one-step matrices along a non-singular orbit segment.
struct ReducedOrbit {
    std::vector<PhaseState> states; // states[k] is the k-th post-collision state, states[0] = x
    std::vector<Mat4> steps;        // steps[k] maps T_{states[k]} to T_{states[k+1]}
    std::vector<EventKind> kinds;
    std::vector<double> coeffs;
    std::vector<Vec3> pre_velocities;

    int size() const { return static_cast<int>(steps.size()); }
    Mat4 product(int from, int to) const
    {
        Mat4 r = Mat4::Identity();
        for (int k = from; k < to; ++k)
            r = steps[k] * r;
        return r;
    }
};

inline ReducedOrbit reduced_orbit(const MassModel& m, const PhaseState& x, int n)
{
    ReducedOrbit o;
    o.states.reserve(n + 1);
    o.states.push_back(x);
    for (int k = 0; k < n; ++k) {
        const Monodromy d = monodromy_step(m, o.states.back());
        o.steps.push_back(d.reduced());
        o.kinds.push_back(d.kind);
        o.coeffs.push_back(d.coeff);
        o.pre_velocities.push_back(d.pre_velocity);
        o.states.push_back(d.target);
    }
    return o;
}

// Symplectic inverse on the reduced space: R^{-1} = -J R^T J.
inline Mat4 symplectic_inverse(const Mat4& r)
{
    const Mat4 j = omega_reduced();
    return -j * r.transpose() * j;
}

} // namespace wedgefall
