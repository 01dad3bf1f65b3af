#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "wedgefall/wedge.hpp"

namespace wedgefall {

// The six copies of the simple wedge obtained by reflecting in the two faces through h1.
// Copy k occupies G_k(W), G_k an element of the dihedral group generated by
// Ra (reflection in the (2,3) face) and Rb (reflection in the (1,2) face).
struct WideWedge {
    MassModel masses;
    Mat3 ra = Mat3::Identity();
    Mat3 rb = Mat3::Identity();
    std::array<Mat3, 6> group;
    std::array<Vec3, 3> g;         // generators of the wide wedge (images of h3)
    std::array<Vec3, 3> outer;     // inward unit normals of span(g_i, g_j), opposite g_k
    std::array<Vec3, 3> inner;     // unit normals of the three reflection planes through h1
    Vec3 h1 = Vec3::Zero();

    explicit WideWedge(const MassModel& m) : masses(m) {}

    int index_of(const Mat3& a, double tol = 1e-9) const
    {
        for (int k = 0; k < 6; ++k)
            if ((group[k] - a).cwiseAbs().maxCoeff() <= tol)
                return k;
        throw DegenerateGeometry("WideWedge: matrix is not a group element");
    }
    int compose(int k, const Mat3& r) const { return index_of(group[k] * r); }
};

inline WideWedge unfold(const MassModel& m, double tol = 1e-10)
{
    if (std::abs(dihedral_angle(m) - 0.5) > tol)
        throw DegenerateGeometry("unfold: masses are not special, the reflected copies overlap");
    WideWedge ww(m);
    const WedgeFrame f = wedge_frame(m);
    ww.h1 = f.h[0];
    ww.ra = reflection(face_normal(m, EventKind::Pair23));
    ww.rb = reflection(face_normal(m, EventKind::Pair12));
    ww.group = {Mat3::Identity(), ww.ra, ww.rb, ww.ra * ww.rb, ww.rb * ww.ra, ww.ra * ww.rb * ww.ra};
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < i; ++j)
            if ((ww.group[i] - ww.group[j]).cwiseAbs().maxCoeff() < 1e-6)
                throw DegenerateGeometry("unfold: reflection group collapsed");
    // h3 is fixed by Rb; its orbit has three points
    ww.g = {f.h[2], ww.ra * f.h[2], ww.rb * ww.ra * f.h[2]};
    for (int k = 0; k < 3; ++k) {
        Vec3 n = ww.g[(k + 1) % 3].cross(ww.g[(k + 2) % 3]).normalized();
        if (n.dot(ww.h1) < 0.0)
            n = -n;
        ww.outer[k] = n;
    }
    const Vec3 n12 = face_normal(m, EventKind::Pair12), n23 = face_normal(m, EventKind::Pair23);
    ww.inner = {n12, n23, ww.ra * n12};
    return ww;
}

inline bool is_wide(const WideWedge& ww)
{
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            if (!(ww.g[i].dot(ww.g[j]) < 0.0))
                return false;
    return true;
}

struct WideState {
    Vec3 x = Vec3::Zero();
    Vec3 w = Vec3::Zero();
    int copy = 0;
};

inline WideState unfold_state(const WideWedge& ww, const PhaseState& s, int copy = 0)
{
    const WedgePoint p = to_wedge(ww.masses, s);
    return {ww.group[copy] * p.x, ww.group[copy] * p.w, copy};
}

inline WedgePoint fold(const WideWedge& ww, const WideState& s)
{
    const Mat3& gk = ww.group[s.copy];
    return {gk.transpose() * s.x, gk.transpose() * s.w};
}

enum class WideEventKind { Outer, Inner12, Inner23, Corner };

struct WideEvent {
    WideEventKind kind = WideEventKind::Outer;
    double tau = 0.0;
    WideState state; // after the event
};

namespace detail {

// First positive root of s0 + b t - a t^2 with a > 0 and s0 >= 0.
inline double downward_root(double s0, double b, double a)
{
    s0 = std::max(s0, 0.0);
    const double disc = std::sqrt(b * b + 4.0 * a * s0);
    return b > 0.0 ? (b + disc) / (2.0 * a) : 2.0 * s0 / (disc - b);
}

} // namespace detail

// One event of the particle in the wide wedge: reflection at an outer face or a
// pass-through of an inner face (the latter only changes the copy index).
inline WideEvent wide_step(const WideWedge& ww, const WideState& s)
{
    const Vec3 c2 = gravity_vector(ww.masses);
    double t_out = std::numeric_limits<double>::infinity();
    int face = -1;
    for (int k = 0; k < 3; ++k) {
        const Vec3& n = ww.outer[k];
        const double s0 = n.dot(s.x), b = n.dot(s.w), a = 0.5 * n.dot(c2);
        if (s0 <= 0.0 && b <= 0.0)
            continue; // on this face and leaving it inward is impossible; already reflected
        const double t = detail::downward_root(s0, b, a);
        if (t < t_out) {
            t_out = t;
            face = k;
        }
    }
    // inner planes: distances are linear in time since c2 lies in every inner plane
    double t_in = std::numeric_limits<double>::infinity();
    int crossings = 0;
    std::array<double, 3> ti;
    for (int k = 0; k < 3; ++k) {
        const double s0 = ww.inner[k].dot(s.x), b = ww.inner[k].dot(s.w);
        // a point left on the plane by the previous event does not cross it again
        const bool on_plane = std::abs(s0) <= 1e-12 * (1.0 + s.x.norm());
        ti[k] = (!on_plane && s0 * b < 0.0) ? -s0 / b : std::numeric_limits<double>::infinity();
        t_in = std::min(t_in, ti[k]);
    }
    for (int k = 0; k < 3; ++k)
        if (std::isfinite(ti[k]) && detail::tie(ti[k], t_in))
            ++crossings;

    WideEvent ev;
    if (face < 0 && !std::isfinite(t_in))
        throw FlightOverrun("wide_step: no event ahead");
    if (t_out <= t_in) {
        ev.kind = WideEventKind::Outer;
        ev.tau = t_out;
        WideState r = s;
        r.x = s.x + t_out * s.w - 0.5 * t_out * t_out * c2;
        r.w = s.w - t_out * c2;
        const Vec3& n = ww.outer[face];
        r.x -= n.dot(r.x) * n;
        r.w -= 2.0 * n.dot(r.w) * n;
        ev.state = r;
        return ev;
    }
    ev.tau = t_in;
    WideState r = s;
    r.x = s.x + t_in * s.w - 0.5 * t_in * t_in * c2;
    r.w = s.w - t_in * c2;
    if (crossings >= 2) {
        // through the former triple-collision ray: continue into the opposite copy
        ev.kind = WideEventKind::Corner;
        r.copy = ww.compose(s.copy, ww.ra * ww.rb * ww.ra);
        // put the point exactly on the axis
        r.x = ww.h1.dot(r.x) * ww.h1;
    }
    else {
        // identify the face of the current copy being crossed
        const Mat3& gk = ww.group[s.copy];
        const Vec3 xf = gk.transpose() * r.x;
        const Vec3 n12 = face_normal(ww.masses, EventKind::Pair12), n23 = face_normal(ww.masses, EventKind::Pair23);
        const bool is12 = std::abs(n12.dot(xf)) < std::abs(n23.dot(xf));
        ev.kind = is12 ? WideEventKind::Inner12 : WideEventKind::Inner23;
        r.copy = ww.compose(s.copy, is12 ? ww.rb : ww.ra);
        for (const Vec3& n : ww.inner)
            if (std::abs(n.dot(r.x)) <= 1e-9 * (1.0 + r.x.norm()))
                r.x -= n.dot(r.x) * n;
    }
    ev.state = r;
    return ev;
}

inline EventKind folded_kind(WideEventKind k)
{
    switch (k) {
    case WideEventKind::Outer: return EventKind::Floor01;
    case WideEventKind::Inner12: return EventKind::Pair12;
    case WideEventKind::Inner23: return EventKind::Pair23;
    default: return EventKind::TripleSingular;
    }
}

// The FB orbit carried into the wide wedge: pair collisions become changes of copy.
struct WidePath {
    std::vector<WideState> states; // states[0] initial, states[k+1] after event k
    std::vector<EventKind> kinds;
    std::vector<double> times;
};

inline WidePath unfold_trajectory(const WideWedge& ww, const OrbitLog& log)
{
    WidePath p;
    int copy = 0;
    p.states.push_back(unfold_state(ww, log.initial, copy));
    for (const LogEntry& e : log.entries) {
        if (is_singular(e.kind))
            throw SingularEvent("unfold_trajectory: singular event in the log");
        if (e.kind == EventKind::Pair12)
            copy = ww.compose(copy, ww.rb);
        else if (e.kind == EventKind::Pair23)
            copy = ww.compose(copy, ww.ra);
        p.states.push_back(unfold_state(ww, e.state, copy));
        p.kinds.push_back(e.kind);
        p.times.push_back(e.time);
    }
    return p;
}

inline std::vector<PhaseState> fold_trajectory(const WideWedge& ww, const WidePath& p)
{
    std::vector<PhaseState> out;
    for (std::size_t k = 0; k < p.states.size(); ++k) {
        const Section sec = k == 0 ? Section::Interior : plus_section(p.kinds[k - 1]);
        out.push_back(from_wedge(ww.masses, fold(ww, p.states[k]), sec));
    }
    return out;
}

struct FoldCheckReport {
    std::size_t events = 0;
    std::size_t skipped = 0;     // singular FB steps
    std::size_t kind_mismatches = 0;
    double max_state_error = 0.0; // relative, per step
    double max_time_error = 0.0;
};

// Steps the FB map and the wide-wedge particle from the same state and compares the folded result.
// Comparison is per step: both are chaotic, so long independent runs separate at the Lyapunov rate.
inline FoldCheckReport fold_check(const WideWedge& ww, const PhaseState& x0, std::size_t n_events)
{
    FoldCheckReport r;
    PhaseState cur = x0;
    int copy = 0;
    for (std::size_t k = 0; k < n_events; ++k) {
        const MapResult fb = poincare_map(ww.masses, cur);
        WideState ws = unfold_state(ww, cur, copy);
        const WideEvent we = wide_step(ww, ws);
        if (fb.singular()) {
            ++r.skipped;
            cur = fb.branch().first;
            copy = 0;
            continue;
        }
        ++r.events;
        if (folded_kind(we.kind) != fb.event.kind)
            ++r.kind_mismatches;
        const WedgePoint folded = fold(ww, we.state);
        const WedgePoint direct = to_wedge(ww.masses, fb.state());
        const double scale = 1.0 + direct.x.norm() + direct.w.norm();
        r.max_state_error =
            std::max(r.max_state_error, ((folded.x - direct.x).norm() + (folded.w - direct.w).norm()) / scale);
        r.max_time_error = std::max(r.max_time_error, std::abs(we.tau - fb.event.tau) / (1.0 + fb.event.tau));
        cur = fb.state();
        copy = we.state.copy;
    }
    return r;
}

// Runs the wide-wedge particle alone for n events.
inline std::vector<WideEvent> wide_simulate(const WideWedge& ww, const WideState& s0, std::size_t n)
{
    std::vector<WideEvent> out;
    WideState s = s0;
    for (std::size_t k = 0; k < n; ++k) {
        out.push_back(wide_step(ww, s));
        s = out.back().state;
    }
    return out;
}

} // namespace wedgefall
