#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "wedgefall/cones.hpp"
#include "wedgefall/sampling.hpp"

namespace wedgefall {

struct CharLine {
    PhaseState x;
    Manifold manifold = Manifold::S12Minus;
    Vec3 dq = Vec3::Zero();
    Vec3 dp = Vec3::Zero(); // unit length
    double q_value = 0.0;   // sum v_i dp_i^2 / m_i at unit dp
};

enum class Alignment { Aligned, NotAligned };

inline const char* to_string(Alignment a) { return a == Alignment::Aligned ? "aligned" : "not_aligned"; }

// Q at a vector with dq = 0: sum v_i dp_i^2 / m_i.
inline double q_char(const MassModel& m, const Vec3& v, const Vec3& dp)
{
    double s = 0.0;
    for (int i = 0; i < 3; ++i)
        s += v[i] * dp[i] * dp[i] / m.m(i);
    return s;
}

// Linear constraints cutting out the tangent space of the manifold in (dq, dp).
inline Eigen::Matrix<double, 3, 6> manifold_constraints(const MassModel& m, const PhaseState& x, Manifold s)
{
    Eigen::Matrix<double, 3, 6> c = Eigen::Matrix<double, 3, 6>::Zero();
    switch (s) {
    case Manifold::S12Minus:
    case Manifold::S12Plus:
        c(0, 0) = 1.0;
        c(0, 1) = -1.0;
        c(1, 1) = 1.0;
        c(1, 2) = -1.0;
        break;
    case Manifold::S31Minus:
    case Manifold::S31Plus:
        c(0, 0) = 1.0;
        c(1, 1) = 1.0;
        break;
    }
    // dH = sum m_i dq_i + v_i dp_i
    for (int i = 0; i < 3; ++i) {
        c(2, i) = m.m(i);
        c(2, 3 + i) = x.v[i];
    }
    return c;
}

// Orthonormal basis of the kernel of the constraints (columns).
inline Eigen::Matrix<double, 6, 3> manifold_tangent_basis(const MassModel& m, const PhaseState& x, Manifold s)
{
    const Eigen::Matrix<double, 3, 6> c = manifold_constraints(m, x, s);
    Eigen::JacobiSVD<Eigen::Matrix<double, 3, 6>> svd(c, Eigen::ComputeFullV);
    if (svd.singularValues()(2) <= 1e-12 * svd.singularValues()(0))
        throw DegenerateGeometry("manifold constraints are rank deficient");
    return svd.matrixV().rightCols<3>();
}

namespace detail {

inline CharLine finish_line(const MassModel& m, const PhaseState& x, Manifold s, Vec3 dq, Vec3 dp)
{
    const double n = dp.norm();
    if (!(n > 1e-12 * (1.0 + x.v.norm())))
        throw DegenerateGeometry("characteristic line undefined: velocities proportional to (1,1,1)");
    CharLine l;
    l.x = x;
    l.manifold = s;
    l.dq = dq / n;
    l.dp = dp / n;
    // fix the orientation so that lines from different methods compare directly
    int k = 0;
    for (int i = 1; i < 3; ++i)
        if (std::abs(l.dp[i]) > std::abs(l.dp[k]))
            k = i;
    if (l.dp[k] < 0.0) {
        l.dq = -l.dq;
        l.dp = -l.dp;
    }
    l.q_value = l.dq.dot(l.dp) + q_char(m, x.v, l.dp);
    return l;
}

} // namespace detail

// Kernel of omega restricted to the numerically assembled tangent space.
inline CharLine characteristic_line_generic(const MassModel& m, const PhaseState& x, Manifold s)
{
    const Eigen::Matrix<double, 6, 3> b = manifold_tangent_basis(m, x, s);
    const Mat6 j = omega_matrix();
    const Eigen::Matrix3d om = b.transpose() * j * b;
    // antisymmetric [[0,a,b],[-a,0,c],[-b,-c,0]] has kernel (c,-b,a)
    const Eigen::Vector3d k(om(1, 2), -om(0, 2), om(0, 1));
    if (!(k.norm() > 1e-14))
        throw DegenerateGeometry("characteristic line undefined: omega vanishes on the tangent space");
    const Vec6 w = b * k;
    return detail::finish_line(m, x, s, w.head<3>(), w.tail<3>());
}

inline CharLine characteristic_line(const MassModel& m, const PhaseState& x, Manifold s = Manifold::S12Minus)
{
    switch (s) {
    case Manifold::S12Minus:
    case Manifold::S12Plus:
        return detail::finish_line(m, x, s, Vec3::Zero(), Vec3::Ones().cross(x.v));
    default: return characteristic_line_generic(m, x, s);
    }
}

inline Alignment alignment_status(const CharLine& l, double tol = 1e-12)
{
    return l.q_value >= -tol ? Alignment::Aligned : Alignment::NotAligned;
}

inline Alignment alignment_status(const MassModel& m, const PhaseState& x, double tol = 1e-12)
{
    return alignment_status(characteristic_line(m, x, Manifold::S12Minus), tol);
}

// 1 - |cos| of the angle between two vectors.
inline double collinearity_defect(const Vec4& a, const Vec4& b)
{
    const double na = a.norm(), nb = b.norm();
    if (na == 0.0 || nb == 0.0)
        return 1.0;
    return 1.0 - std::abs(a.dot(b)) / (na * nb);
}

inline Vec4 char_reduced(const MassModel& m, const CharLine& l)
{
    return to_reduced(tangent_qp_to_hv(m, l.x, l.dq, l.dp));
}

// Reduced image of the manifold tangent space (3 columns spanning a hyperplane of the 4-dim quotient).
inline Eigen::Matrix<double, 4, 3> reduced_tangent(const MassModel& m, const PhaseState& x, Manifold s)
{
    const Eigen::Matrix<double, 6, 3> b = manifold_tangent_basis(m, x, s);
    Eigen::Matrix<double, 4, 3> r;
    for (int k = 0; k < 3; ++k)
        r.col(k) = to_reduced(tangent_qp_to_hv(m, x, b.col(k).head<3>(), b.col(k).tail<3>()));
    return r;
}

// Omega-complement of a 3-dim subspace of the reduced space.
inline Vec4 omega_complement(const Eigen::Matrix<double, 4, 3>& t)
{
    const Eigen::Matrix<double, 3, 4> a = t.transpose() * omega_reduced();
    Eigen::JacobiSVD<Eigen::Matrix<double, 3, 4>> svd(a, Eigen::ComputeFullV);
    return svd.matrixV().col(3);
}

struct PushforwardReport {
    std::vector<double> q;          // Q along the orbit, q[0] = Q(v_x-)
    std::vector<double> collinearity; // defect against the image tangent's omega-complement
    Vec4 image = Vec4::Zero();
    bool stays_aligned = true;
    bool monotone = true;
    double max_defect = 0.0;
};

inline PushforwardReport char_pushforward(const MassModel& m, const PhaseState& x, int n,
                                          Manifold s = Manifold::S12Minus)
{
    PushforwardReport rep;
    const CharLine l = characteristic_line(m, x, s);
    Vec4 w = char_reduced(m, l);
    w /= w.norm();
    Eigen::Matrix<double, 4, 3> tan = reduced_tangent(m, x, s);
    PhaseState cur = x;
    // q holds Q of the unit-normalized image; monotonicity is checked before rescaling
    auto record = [&](double q_scaled) {
        const double q = q_reduced(w);
        if (!rep.q.empty()) {
            const double prev = rep.q.back();
            if (q_scaled < prev - 1e-10 * (1.0 + std::abs(prev)))
                rep.monotone = false;
            if (prev >= -1e-12 && q < -1e-12)
                rep.stays_aligned = false;
        }
        rep.q.push_back(q);
        const double d = collinearity_defect(w, omega_complement(tan));
        rep.collinearity.push_back(d);
        rep.max_defect = std::max(rep.max_defect, d);
    };
    record(q_reduced(w));
    for (int k = 0; k < n; ++k) {
        const Monodromy step = monodromy_step(m, cur);
        const Mat4 r = step.reduced();
        w = r * w;
        tan = r * tan;
        const double q_scaled = q_reduced(w);
        w /= w.norm();
        Eigen::HouseholderQR<Eigen::Matrix<double, 4, 3>> qr(tan);
        tan = qr.householderQ() * Eigen::Matrix<double, 4, 3>::Identity();
        cur = step.target;
        record(q_scaled);
    }
    rep.image = w;
    return rep;
}

struct ANReport {
    bool aligned = true;
    std::vector<bool> strict; // strict[n-1]: Q(d T^n v) > Q(v) on L1 + L2
    std::vector<bool> member; // member[n-1]: x in A(n)
};

inline ANReport a_membership(const MassModel& m, const PhaseState& x, int horizon, double tol = 1e-12)
{
    ANReport rep;
    rep.aligned = alignment_status(m, x) == Alignment::Aligned;
    const ReducedOrbit orb = reduced_orbit(m, x, horizon);
    Mat4 r = Mat4::Identity();
    for (int k = 0; k < horizon; ++k) {
        r = orb.steps[k] * r;
        const bool st = strictly_monotone(r, tol);
        rep.strict.push_back(st);
        rep.member.push_back(!rep.aligned && st);
    }
    return rep;
}

} // namespace wedgefall
