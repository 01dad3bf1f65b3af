#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "wedgefall/dynamics.hpp"
#include "wedgefall/rng.hpp"

namespace wedgefall {

enum class Manifold { S12Minus, S31Minus, S12Plus, S31Plus };

inline const char* to_string(Manifold s)
{
    switch (s) {
    case Manifold::S12Minus: return "S12-";
    case Manifold::S31Minus: return "S31-";
    case Manifold::S12Plus: return "S12+";
    case Manifold::S31Plus: return "S31+";
    }
    return "?";
}

inline constexpr int kRejectionBudget = 10000;

namespace detail {

// q -> lambda^2 q, v -> lambda v scales H by lambda^2.
inline void renormalize_energy(const MassModel& m, PhaseState& s, double c)
{
    const double h = energy(m, s);
    if (!(h > 0.0))
        throw RejectionBudget("zero-energy proposal");
    const double lam = std::sqrt(c / h);
    s.q *= lam * lam;
    s.v *= lam;
}

inline void sort3(double& a, double& b, double& c)
{
    if (a > b) std::swap(a, b);
    if (b > c) std::swap(b, c);
    if (a > b) std::swap(a, b);
}

} // namespace detail

inline PhaseState sample_phase_point(const MassModel& m, double c, Section section, Rng& rng)
{
    if (!(c > 0.0))
        throw Error("energy must be positive");
    for (int attempt = 0; attempt < kRejectionBudget; ++attempt) {
        double a = rng.uniform(), b = rng.uniform(), d = rng.uniform();
        detail::sort3(a, b, d);
        PhaseState s;
        s.v = Vec3(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
        switch (section) {
        case Section::M1Plus:
            s.q = Vec3(0.0, b, d);
            s.v[0] = std::abs(s.v[0]);
            if (s.v[0] == 0.0 || b == 0.0) continue;
            break;
        case Section::M2Plus:
            s.q = Vec3(b, b, d);
            if (s.v[0] > s.v[1]) std::swap(s.v[0], s.v[1]);
            if (s.v[0] == s.v[1] || b == d) continue;
            break;
        case Section::M3Plus:
            s.q = Vec3(a, d, d);
            if (s.v[1] > s.v[2]) std::swap(s.v[1], s.v[2]);
            if (s.v[1] == s.v[2] || a == d) continue;
            break;
        case Section::Interior:
            s.q = Vec3(a, b, d);
            if (!(a > 0.0 && a < b && b < d)) continue;
            break;
        default: throw Error(std::string("sampling not supported for section ") + to_string(section));
        }
        s.section = section;
        detail::renormalize_energy(m, s, c);
        if (is_singular(next_event(s).kind))
            continue;
        return s;
    }
    throw RejectionBudget("sample_phase_point: rejection budget exceeded");
}

inline PhaseState sample_phase_point(const MassModel& m, double c, Section section, std::uint64_t seed,
                                     std::uint64_t index = 0)
{
    Rng rng(seed, index);
    return sample_phase_point(m, c, section, rng);
}

namespace detail {

// height_power > 1 concentrates S12- proposals near the floor.
inline PhaseState sample_minus(const MassModel& m, Manifold manifold, double c, Rng& rng, double height_power = 1.0)
{
    for (int attempt = 0; attempt < kRejectionBudget; ++attempt) {
        PhaseState s;
        if (manifold == Manifold::S12Minus) {
            const double h = std::pow(rng.uniform(), height_power);
            double a = rng.uniform(-1.0, 1.0), b = rng.uniform(-1.0, 1.0), d = rng.uniform(-1.0, 1.0);
            sort3(a, b, d);
            if (!(a < b && b < d) || h == 0.0) continue;
            s.q = Vec3(h, h, h);
            s.v = Vec3(a, b, d);
            s.section = Section::M3Plus;
            renormalize_energy(m, s, c);
            const CollisionEvent ev = next_event(s);
            if (ev.kind != EventKind::Floor01 || ev.tau <= 0.0) continue;
            return s;
        }
        // S31-: two lower balls on the floor, next event is a non-singular (2,3) collision
        const double q3 = rng.uniform();
        const double v1 = rng.uniform();
        const double v2 = rng.uniform(v1, 1.0);
        const double v3 = rng.uniform(-1.0, 1.0);
        if (!(v1 > 0.0 && v2 > v1 && q3 > 0.0)) continue;
        s.q = Vec3(0.0, 0.0, q3);
        s.v = Vec3(v1, v2, v3);
        s.section = Section::M2Plus;
        renormalize_energy(m, s, c);
        s.q[0] = 0.0;
        s.q[1] = 0.0;
        const CollisionEvent ev = next_event(s);
        if (ev.kind != EventKind::Pair23 || ev.tau <= 0.0) continue;
        return s;
    }
    throw RejectionBudget(std::string("sample_singular_point: rejection budget exceeded on ") + to_string(manifold));
}

} // namespace detail

// S12+/S31+ points are produced as time reversals of S12-/S31- samples:
// the reversed arrival at the following event flies back into the singularity.
inline PhaseState sample_singular_point(const MassModel& m, Manifold manifold, double c, Rng& rng,
                                        double height_power = 1.0)
{
    if (!(c > 0.0))
        throw Error("energy must be positive");
    switch (manifold) {
    case Manifold::S12Minus:
    case Manifold::S31Minus: return detail::sample_minus(m, manifold, c, rng, height_power);
    case Manifold::S12Plus:
    case Manifold::S31Plus: {
        const Manifold base = manifold == Manifold::S12Plus ? Manifold::S12Minus : Manifold::S31Minus;
        for (int attempt = 0; attempt < kRejectionBudget; ++attempt) {
            const PhaseState y = detail::sample_minus(m, base, c, rng, height_power);
            const CollisionEvent ev = next_event(y);
            PhaseState z = detail::flight(y, ev.tau);
            z.v = -z.v;
            z.section = plus_section(ev.kind);
            if (ev.kind == EventKind::Floor01)
                z.q[0] = 0.0;
            else {
                const int i = ev.kind == EventKind::Pair12 ? 0 : 1;
                const double h = 0.5 * (z.q[i] + z.q[i + 1]);
                z.q[i] = h;
                z.q[i + 1] = h;
            }
            if (!is_singular(next_event(z).kind)) continue;
            return z;
        }
        throw RejectionBudget("sample_singular_point: reversal did not reach the singularity");
    }
    }
    throw Error("unknown manifold");
}

inline PhaseState sample_singular_point(const MassModel& m, Manifold manifold, double c, std::uint64_t seed,
                                        std::uint64_t index = 0, double height_power = 1.0)
{
    Rng rng(seed, index);
    return sample_singular_point(m, manifold, c, rng, height_power);
}

enum class MomClass { Mom1, Mom2, Mom3 };

inline const char* to_string(MomClass c)
{
    switch (c) {
    case MomClass::Mom1: return "Mom1";
    case MomClass::Mom2: return "Mom2";
    case MomClass::Mom3: return "Mom3";
    }
    return "?";
}

inline bool is_triple_contact(const PhaseState& x)
{
    const double tol = kContactTolerance * detail::contact_scale(x);
    return std::abs(x.q[0] - x.q[1]) <= tol && std::abs(x.q[1] - x.q[2]) <= tol && x.v[0] <= x.v[1] &&
           x.v[1] <= x.v[2];
}

// Sign pattern of the velocities on arrival at the following floor event.
inline MomClass classify_arrival(const Vec3& arrival)
{
    if (arrival[1] >= 0.0)
        return MomClass::Mom1;
    if (arrival[2] >= 0.0)
        return MomClass::Mom2;
    return MomClass::Mom3;
}

inline MomClass classify_momenta(const PhaseState& x)
{
    if (!is_triple_contact(x))
        throw SectionMismatch("classify_momenta needs a triple contact with ordered velocities");
    const CollisionEvent ev = next_event(x);
    if (ev.kind != EventKind::Floor01)
        throw SectionMismatch("classify_momenta needs the next event to be the floor");
    return classify_arrival(x.v - Vec3::Constant(ev.tau));
}

// S12- point whose arrival at the following floor event lies in the given class.
// Built backwards: arrival velocities u with the class sign pattern, then a flight
// time tau in (0, -2 u1) so that the triple contact height is positive.
inline PhaseState sample_s12_in_class(const MassModel& m, MomClass cls, double c, Rng& rng)
{
    for (int attempt = 0; attempt < kRejectionBudget; ++attempt) {
        double u1 = -rng.uniform(), u2, u3;
        switch (cls) {
        case MomClass::Mom1:
            u2 = rng.uniform();
            u3 = rng.uniform();
            break;
        case MomClass::Mom2:
            u2 = -rng.uniform();
            u3 = rng.uniform();
            break;
        default:
            u2 = -rng.uniform();
            u3 = -rng.uniform();
            break;
        }
        detail::sort3(u1, u2, u3);
        if (!(u1 < u2 && u2 < u3 && u1 < 0.0))
            continue;
        const double tau = rng.uniform(0.0, -2.0 * u1);
        const double h = -u1 * tau - 0.5 * tau * tau;
        if (!(tau > 0.0 && h > 0.0))
            continue;
        PhaseState s;
        s.q = Vec3(h, h, h);
        s.v = Vec3(u1 + tau, u2 + tau, u3 + tau);
        s.section = Section::M3Plus;
        detail::renormalize_energy(m, s, c);
        const CollisionEvent ev = next_event(s);
        if (ev.kind != EventKind::Floor01 || classify_momenta(s) != cls)
            continue;
        return s;
    }
    throw RejectionBudget("sample_s12_in_class: rejection budget exceeded");
}

} // namespace wedgefall
