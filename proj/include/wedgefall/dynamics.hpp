#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "wedgefall/errors.hpp"
#include "wedgefall/masses.hpp"

namespace wedgefall {

enum class Section { M1Plus, M2Plus, M3Plus, M1Minus, M2Minus, M3Minus, Interior };

enum class EventKind { Floor01, Pair12, Pair23, TripleSingular, FloorPairSingular };

inline const char* to_string(EventKind k)
{
    switch (k) {
    case EventKind::Floor01: return "Floor01";
    case EventKind::Pair12: return "Pair12";
    case EventKind::Pair23: return "Pair23";
    case EventKind::TripleSingular: return "TripleSingular";
    case EventKind::FloorPairSingular: return "FloorPairSingular";
    }
    return "?";
}

inline const char* to_string(Section s)
{
    switch (s) {
    case Section::M1Plus: return "M1+";
    case Section::M2Plus: return "M2+";
    case Section::M3Plus: return "M3+";
    case Section::M1Minus: return "M1-";
    case Section::M2Minus: return "M2-";
    case Section::M3Minus: return "M3-";
    case Section::Interior: return "interior";
    }
    return "?";
}

inline bool is_singular(EventKind k)
{
    return k == EventKind::TripleSingular || k == EventKind::FloorPairSingular;
}

inline bool is_ball_ball(EventKind k) { return k == EventKind::Pair12 || k == EventKind::Pair23; }

inline Section plus_section(EventKind k)
{
    switch (k) {
    case EventKind::Floor01: return Section::M1Plus;
    case EventKind::Pair12: return Section::M2Plus;
    case EventKind::Pair23: return Section::M3Plus;
    default: throw SectionMismatch("singular kinds have no section");
    }
}

inline bool is_plus(Section s) { return s == Section::M1Plus || s == Section::M2Plus || s == Section::M3Plus; }
inline bool is_minus(Section s) { return s == Section::M1Minus || s == Section::M2Minus || s == Section::M3Minus; }

inline EventKind section_kind(Section s)
{
    switch (s) {
    case Section::M1Plus:
    case Section::M1Minus: return EventKind::Floor01;
    case Section::M2Plus:
    case Section::M2Minus: return EventKind::Pair12;
    case Section::M3Plus:
    case Section::M3Minus: return EventKind::Pair23;
    default: throw SectionMismatch("interior states carry no collision kind");
    }
}

inline Section flip_section(Section s)
{
    switch (s) {
    case Section::M1Plus: return Section::M1Minus;
    case Section::M2Plus: return Section::M2Minus;
    case Section::M3Plus: return Section::M3Minus;
    case Section::M1Minus: return Section::M1Plus;
    case Section::M2Minus: return Section::M2Plus;
    case Section::M3Minus: return Section::M3Plus;
    default: return s;
    }
}

struct PhaseState {
    Vec3 q = Vec3::Zero();
    Vec3 v = Vec3::Zero();
    Section section = Section::Interior;
};

inline double energy(const MassModel& m, const PhaseState& s)
{
    double h = 0.0;
    for (int i = 0; i < 3; ++i)
        h += m.m(i) * (0.5 * s.v[i] * s.v[i] + s.q[i]);
    return h;
}

inline double kinetic_energy(const MassModel& m, const Vec3& v)
{
    return 0.5 * (m.m(0) * v[0] * v[0] + m.m(1) * v[1] * v[1] + m.m(2) * v[2] * v[2]);
}

struct CollisionEvent {
    double tau = 0.0;
    EventKind kind = EventKind::Floor01;
};

inline constexpr double kTieTolerance = 1e-10;
inline constexpr double kContactTolerance = 1e-9;

namespace detail {

inline double contact_scale(const PhaseState& s) { return std::max(1.0, s.q[2]); }

// Larger root of q1 + v1 t - t^2/2 = 0, stable form when v1 < 0.
inline double floor_time(const Vec3& q, const Vec3& v)
{
    const double q1 = std::max(q[0], 0.0);
    const double d = std::sqrt(v[0] * v[0] + 2.0 * q1);
    if (v[0] >= 0.0)
        return v[0] + d;
    return 2.0 * q1 / (d - v[0]);
}

inline double pair_time(const Vec3& q, const Vec3& v, int i)
{
    const double rel = v[i] - v[i + 1];
    if (!(rel > 0.0))
        return std::numeric_limits<double>::infinity();
    return std::max(q[i + 1] - q[i], 0.0) / rel;
}

inline bool tie(double a, double b) { return std::abs(a - b) <= kTieTolerance * (1.0 + std::min(a, b)); }

inline PhaseState flight(const PhaseState& s, double t)
{
    if (t == 0.0)
        return s;
    PhaseState r;
    for (int i = 0; i < 3; ++i) {
        r.q[i] = -0.5 * t * t + t * s.v[i] + s.q[i];
        r.v[i] = s.v[i] - t;
    }
    r.section = Section::Interior;
    return r;
}

inline bool approaching(const PhaseState& s, EventKind k)
{
    switch (k) {
    case EventKind::Floor01: return s.v[0] < 0.0;
    case EventKind::Pair12: return s.v[0] > s.v[1];
    case EventKind::Pair23: return s.v[1] > s.v[2];
    default: return false;
    }
}

} // namespace detail

inline CollisionEvent next_event(const PhaseState& s)
{
    const double tf = detail::floor_time(s.q, s.v);
    const double t12 = detail::pair_time(s.q, s.v, 0);
    const double t23 = detail::pair_time(s.q, s.v, 1);
    const double tmin = std::min({tf, t12, t23});
    if (!std::isfinite(tmin) || tmin < 0.0)
        throw Error("no admissible event time from state");

    const bool f = detail::tie(tf, tmin);
    const bool p12 = std::isfinite(t12) && detail::tie(t12, tmin);
    const bool p23 = std::isfinite(t23) && detail::tie(t23, tmin);
    if (p12 && p23)
        return {tmin, EventKind::TripleSingular};
    if (f && p12)
        return {tmin, EventKind::FloorPairSingular};
    if (f && p23)
        return t23 < tf ? CollisionEvent{t23, EventKind::Pair23} : CollisionEvent{tf, EventKind::Floor01};
    if (f)
        return {tf, EventKind::Floor01};
    if (p12)
        return {t12, EventKind::Pair12};
    return {t23, EventKind::Pair23};
}

inline PhaseState free_flight(const PhaseState& s, double t)
{
    if (t < 0.0)
        throw FlightOverrun("negative flight time");
    if (t > 0.0) {
        const CollisionEvent ev = next_event(s);
        if (ev.tau < t - kTieTolerance * (1.0 + t))
            throw FlightOverrun(std::string("event ") + to_string(ev.kind) + " at tau=" + std::to_string(ev.tau) +
                                " inside flight of length " + std::to_string(t));
    }
    return detail::flight(s, t);
}

// Velocity part of a collision; each law is a linear involution.
inline Vec3 collision_law(const MassModel& m, const Vec3& v, EventKind kind)
{
    Vec3 r = v;
    switch (kind) {
    case EventKind::Floor01: r[0] = -v[0]; break;
    case EventKind::Pair12:
    case EventKind::Pair23: {
        const int i = kind == EventKind::Pair12 ? 0 : 1;
        const double g = m.gamma(i);
        r[i] = g * v[i] + (1.0 - g) * v[i + 1];
        r[i + 1] = (1.0 + g) * v[i] - g * v[i + 1];
        break;
    }
    default: throw SectionMismatch("collision law undefined for singular kinds");
    }
    return r;
}

inline PhaseState apply_collision(const MassModel& m, const PhaseState& s, EventKind kind)
{
    const double tol = kContactTolerance * detail::contact_scale(s);
    PhaseState r = s;
    switch (kind) {
    case EventKind::Floor01:
        if (std::abs(s.q[0]) > tol || s.v[0] > 0.0)
            throw SectionMismatch("state is not an incoming floor contact");
        r.q[0] = 0.0;
        r.q[1] = std::max(r.q[1], 0.0);
        break;
    case EventKind::Pair12:
    case EventKind::Pair23: {
        const int i = kind == EventKind::Pair12 ? 0 : 1;
        if (std::abs(s.q[i] - s.q[i + 1]) > tol || s.v[i] < s.v[i + 1])
            throw SectionMismatch(std::string("state is not an incoming ") + to_string(kind) + " contact");
        const double h = 0.5 * (s.q[i] + s.q[i + 1]);
        r.q[i] = h;
        r.q[i + 1] = h;
        break;
    }
    default: throw SectionMismatch("apply_collision cannot resolve a singular kind; use poincare_map");
    }
    r.v = collision_law(m, s.v, kind);
    r.section = plus_section(kind);
    return r;
}

struct Branch {
    PhaseState first;  // (1,2)-then-(2,3), or floor-then-(1,2)
    PhaseState second; // (2,3)-then-(1,2), or (1,2)-then-floor
    EventKind kind = EventKind::TripleSingular;
};

struct MapResult {
    CollisionEvent event;
    std::variant<PhaseState, Branch> image;

    bool singular() const { return std::holds_alternative<Branch>(image); }
    const PhaseState& state() const
    {
        if (singular())
            throw SingularEvent("map image is a branch");
        return std::get<PhaseState>(image);
    }
    const Branch& branch() const { return std::get<Branch>(image); }
};

namespace detail {

inline PhaseState resolve_pair(const MassModel& m, const PhaseState& a, EventKind k1, EventKind k2)
{
    PhaseState b = apply_collision(m, a, k1);
    if (approaching(b, k2))
        b = apply_collision(m, b, k2);
    return b;
}

} // namespace detail

inline MapResult poincare_map(const MassModel& m, const PhaseState& s)
{
    const CollisionEvent ev = next_event(s);
    PhaseState a = detail::flight(s, ev.tau);
    switch (ev.kind) {
    case EventKind::TripleSingular: {
        const double h = (a.q[0] + a.q[1] + a.q[2]) / 3.0;
        a.q = Vec3(h, h, h);
        Branch b{detail::resolve_pair(m, a, EventKind::Pair12, EventKind::Pair23),
                 detail::resolve_pair(m, a, EventKind::Pair23, EventKind::Pair12), ev.kind};
        return {ev, b};
    }
    case EventKind::FloorPairSingular: {
        a.q[0] = 0.0;
        a.q[1] = 0.0;
        Branch b{detail::resolve_pair(m, a, EventKind::Floor01, EventKind::Pair12),
                 detail::resolve_pair(m, a, EventKind::Pair12, EventKind::Floor01), ev.kind};
        return {ev, b};
    }
    default: return {ev, apply_collision(m, a, ev.kind)};
    }
}

// Time reversal with section bookkeeping: a post-collision state goes to the
// post-collision state of the reversed motion at the same contact.
inline PhaseState reverse_post(const MassModel& m, const PhaseState& x)
{
    PhaseState r = x;
    if (is_plus(x.section))
        r.v = -collision_law(m, x.v, section_kind(x.section));
    else if (is_minus(x.section)) {
        r.v = -x.v;
        r.section = flip_section(x.section);
    }
    else
        r.v = -x.v;
    return r;
}

inline MapResult poincare_inverse(const MassModel& m, const PhaseState& x)
{
    MapResult fwd = poincare_map(m, reverse_post(m, x));
    if (fwd.singular()) {
        const Branch& b = fwd.branch();
        return {fwd.event, Branch{reverse_post(m, b.first), reverse_post(m, b.second), b.kind}};
    }
    return {fwd.event, reverse_post(m, fwd.state())};
}

enum class BranchPolicy { Throw, First, Second };

struct LogEntry {
    EventKind kind;
    double time;
    PhaseState state;
};

struct OrbitLog {
    PhaseState initial;
    std::vector<LogEntry> entries;
    std::size_t collisions = 0;
};

inline MapResult step_or_branch(const MassModel& m, const PhaseState& x, BranchPolicy policy, PhaseState& out)
{
    MapResult r = poincare_map(m, x);
    if (!r.singular())
        out = r.state();
    else if (policy == BranchPolicy::First)
        out = r.branch().first;
    else if (policy == BranchPolicy::Second)
        out = r.branch().second;
    else
        throw SingularEvent(std::string("singular event ") + to_string(r.event.kind) + " without branch choice");
    return r;
}

inline OrbitLog simulate(const MassModel& m, const PhaseState& x, std::size_t n_events,
                         BranchPolicy policy = BranchPolicy::Throw)
{
    OrbitLog log;
    log.initial = x;
    log.entries.reserve(n_events);
    PhaseState cur = x;
    double t = 0.0;
    for (std::size_t k = 0; k < n_events; ++k) {
        PhaseState next;
        const MapResult r = step_or_branch(m, cur, policy, next);
        t += r.event.tau;
        log.entries.push_back({r.event.kind, t, next});
        log.collisions += r.singular() ? 2 : 1;
        cur = next;
    }
    return log;
}

} // namespace wedgefall
