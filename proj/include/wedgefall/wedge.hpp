#pragma once

#include <array>
#include <cmath>
#include <utility>

#include <Eigen/Dense>

#include "wedgefall/dynamics.hpp"

namespace wedgefall {

// Mass-weighted coordinates x_i = sqrt(m_i) q_i, w_i = sqrt(m_i) v_i = p_i / sqrt(m_i).
struct WedgePoint {
    Vec3 x = Vec3::Zero();
    Vec3 w = Vec3::Zero();
};

inline WedgePoint to_wedge(const MassModel& m, const PhaseState& s)
{
    const Vec3 r = m.sqrt_vec();
    return {r.cwiseProduct(s.q), r.cwiseProduct(s.v)};
}

inline PhaseState from_wedge(const MassModel& m, const WedgePoint& p, Section section = Section::Interior)
{
    const Vec3 r = m.sqrt_vec();
    PhaseState s;
    s.q = p.x.cwiseQuotient(r);
    s.v = p.w.cwiseQuotient(r);
    s.section = section;
    return s;
}

// c2 = (sqrt m1, sqrt m2, sqrt m3); the acceleration is -c2.
inline Vec3 gravity_vector(const MassModel& m) { return m.sqrt_vec(); }

inline double wedge_energy(const MassModel& m, const WedgePoint& p)
{
    return 0.5 * p.w.squaredNorm() + gravity_vector(m).dot(p.x);
}

inline WedgePoint wedge_flight(const MassModel& m, const WedgePoint& p, double t)
{
    const Vec3 c2 = gravity_vector(m);
    return {p.x + t * p.w - 0.5 * t * t * c2, p.w - t * c2};
}

struct WedgeFrame {
    std::array<Vec3, 3> h;
    double alpha1 = 0.0, alpha2 = 0.0, beta1 = 0.0, beta2 = 0.0;
    MassModel masses;

    explicit WedgeFrame(const MassModel& m) : masses(m) {}
};

// Unit normal of span(a, b).
inline Vec3 plane_normal(const Vec3& a, const Vec3& b)
{
    const Vec3 n = a.cross(b);
    const double l = n.norm();
    if (!(l > 1e-14))
        throw DegenerateGeometry("plane_normal: parallel vectors");
    return n / l;
}

// Angle in [0, pi/2] between span(a1, b1) and span(a2, b2).
inline double plane_angle(const Vec3& n1, const Vec3& n2)
{
    return std::acos(std::min(1.0, std::abs(n1.normalized().dot(n2.normalized()))));
}

inline WedgeFrame wedge_frame(const MassModel& m)
{
    WedgeFrame f(m);
    const Vec3 r = m.sqrt_vec();
    f.h[0] = r / std::sqrt(m.partial(0));
    f.h[1] = Vec3(0.0, r[1], r[2]) / std::sqrt(m.partial(1));
    f.h[2] = Vec3(0.0, 0.0, 1.0);
    f.alpha1 = std::acos(f.h[0].dot(f.h[1]));
    f.alpha2 = std::acos(f.h[1].dot(f.h[2]));
    f.beta1 = plane_angle(plane_normal(f.h[0], f.h[2]), plane_normal(f.h[1], f.h[2]));
    f.beta2 = f.alpha2;
    return f;
}

struct SimplicityReport {
    double e12 = 0.0, e23 = 0.0, e13 = 0.0;
    double product_residual = 0.0; // <e1,e3> - <e1,e2><e2,e3>
    bool positive = false;
    bool simple = false;
};

inline SimplicityReport is_simple(const Vec3& e1, const Vec3& e2, const Vec3& e3, double tol = 1e-12)
{
    SimplicityReport r;
    r.e12 = e1.dot(e2);
    r.e23 = e2.dot(e3);
    r.e13 = e1.dot(e3);
    r.product_residual = r.e13 - r.e12 * r.e23;
    r.positive = r.e12 > 0.0 && r.e23 > 0.0;
    r.simple = r.positive && std::abs(r.product_residual) <= tol;
    return r;
}

inline SimplicityReport is_simple(const WedgeFrame& f, double tol = 1e-12) { return is_simple(f.h[0], f.h[1], f.h[2], tol); }

// Cosine of the interior angle at h1 between the faces span(h1,h2) and span(h1,h3).
inline double dihedral_angle(const MassModel& m)
{
    const WedgeFrame f = wedge_frame(m);
    const Vec3 u2 = f.h[1] - f.h[1].dot(f.h[0]) * f.h[0];
    const Vec3 u3 = f.h[2] - f.h[2].dot(f.h[0]) * f.h[0];
    if (!(u2.norm() > 1e-14 && u3.norm() > 1e-14))
        throw DegenerateGeometry("dihedral_angle: degenerate generators");
    return u2.dot(u3) / (u2.norm() * u3.norm());
}

// Residual of 2 sqrt(m1 m3) = sqrt(m1+m2) sqrt(m2+m3).
inline double special_mass_residual(const MassModel& m)
{
    return 2.0 * std::sqrt(m.m(0) * m.m(2)) - std::sqrt(m.m(0) + m.m(1)) * std::sqrt(m.m(1) + m.m(2));
}

// Unit normals of the simple-wedge faces, oriented into the wedge.
// Pair12 face q1 = q2 is span(h1,h3); Pair23 face q2 = q3 is span(h1,h2); the floor is x1 = 0.
inline Vec3 face_normal(const MassModel& m, EventKind face)
{
    const Vec3 r = m.sqrt_vec();
    Vec3 n;
    switch (face) {
    case EventKind::Floor01: n = Vec3(1, 0, 0); break;
    case EventKind::Pair12: n = Vec3(-1.0 / r[0], 1.0 / r[1], 0.0); break; // q2 - q1 >= 0
    case EventKind::Pair23: n = Vec3(0.0, -1.0 / r[1], 1.0 / r[2]); break;
    default: throw DegenerateGeometry("face_normal: no face for singular kinds");
    }
    return n.normalized();
}

inline Mat3 reflection(const Vec3& n)
{
    const Vec3 u = n.normalized();
    return Mat3::Identity() - 2.0 * u * u.transpose();
}

inline bool on_face(const PhaseState& s, EventKind face)
{
    const double tol = kContactTolerance * detail::contact_scale(s);
    switch (face) {
    case EventKind::Floor01: return std::abs(s.q[0]) <= tol;
    case EventKind::Pair12: return std::abs(s.q[0] - s.q[1]) <= tol;
    case EventKind::Pair23: return std::abs(s.q[1] - s.q[2]) <= tol;
    default: return false;
    }
}

// A contact is grazing when the velocity lies in the face, i.e. the two balls move together.
inline bool is_grazing(const MassModel& m, const PhaseState& s, EventKind face, double tol = 1e-12)
{
    if (!is_ball_ball(face))
        throw DegenerateGeometry("is_grazing: only the faces through h1 are considered");
    if (!on_face(s, face))
        throw SectionMismatch("is_grazing: state is not on the face");
    const WedgePoint p = to_wedge(m, s);
    const Vec3 r = m.sqrt_vec();
    const int i = face == EventKind::Pair12 ? 0 : 1;
    return std::abs(p.w[i] / r[i] - p.w[i + 1] / r[i + 1]) <= tol * (1.0 + s.v.cwiseAbs().maxCoeff());
}

// Largest distance from the face over a sampled flight segment of length t.
inline double segment_face_distance(const MassModel& m, const PhaseState& s, EventKind face, double t, int samples = 16)
{
    const Vec3 n = face_normal(m, face);
    const WedgePoint p0 = to_wedge(m, s);
    double worst = 0.0;
    for (int k = 0; k <= samples; ++k)
        worst = std::max(worst, std::abs(n.dot(wedge_flight(m, p0, t * k / samples).x)));
    return worst;
}

// Affine plane containing a flight segment.
struct PlanarSubspace {
    Vec3 point = Vec3::Zero();
    Vec3 normal = Vec3::UnitZ();
};

inline PlanarSubspace planar_subspace(const MassModel& m, const WedgePoint& p, double t1, double t2)
{
    const Vec3 d1 = wedge_flight(m, p, t1).w, d2 = wedge_flight(m, p, t2).w;
    const Vec3 n = d1.cross(d2);
    if (!(n.norm() > 1e-12 * d1.norm() * d2.norm() && n.norm() > 0.0))
        throw DegenerateGeometry("planar_subspace: parallel velocities");
    return {p.x, n.normalized()};
}

inline double plane_residual(const PlanarSubspace& P, const Vec3& x) { return P.normal.dot(x - P.point); }

// Parallel projection along h1 onto sqrt(m).x = d, in a 2-D orthonormal frame.
struct TriangleChart {
    double d = 1.0;
    Vec3 h1 = Vec3::Zero();
    Vec3 c2 = Vec3::Zero();
    Vec3 center = Vec3::Zero();
    Vec3 e1 = Vec3::Zero(); // toward the projection of h3 (a vertex)
    Vec3 e2 = Vec3::Zero();
    double sqrt_total = 1.0;
};

inline TriangleChart triangle_chart(const MassModel& m, double d = 1.0)
{
    if (!(d > 0.0))
        throw ConfigError("triangle_chart: offset must be positive");
    const WedgeFrame f = wedge_frame(m);
    TriangleChart c;
    c.d = d;
    c.h1 = f.h[0];
    c.c2 = gravity_vector(m);
    c.sqrt_total = std::sqrt(m.total());
    c.center = d * c.h1 / c.sqrt_total;
    const Vec3 u = f.h[2] - f.h[2].dot(c.h1) * c.h1;
    c.e1 = u.normalized();
    c.e2 = c.h1.cross(c.e1);
    return c;
}

inline Vec3 project_along_h1(const TriangleChart& c, const Vec3& x)
{
    return x + ((c.d - c.c2.dot(x)) / c.sqrt_total) * c.h1;
}

inline Eigen::Vector2d project_triangle(const TriangleChart& c, const Vec3& x)
{
    const Vec3 y = project_along_h1(c, x) - c.center;
    return {y.dot(c.e1), y.dot(c.e2)};
}

// Central projection onto the chart plane; the outer faces of the cone map onto straight edges.
inline Eigen::Vector2d project_triangle_central(const TriangleChart& c, const Vec3& x)
{
    const double s = c.c2.dot(x);
    if (!(s > 0.0))
        throw DegenerateGeometry("project_triangle_central: point at or below the apex");
    const Vec3 y = x * (c.d / s) - c.center;
    return {y.dot(c.e1), y.dot(c.e2)};
}

} // namespace wedgefall
