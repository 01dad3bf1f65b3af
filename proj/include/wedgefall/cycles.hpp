#pragma once

#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "wedgefall/unfolding.hpp"

namespace wedgefall {

enum class CycleCase { I, II, III, IV, Other, Singular };

inline const char* to_string(CycleCase c)
{
    switch (c) {
    case CycleCase::I: return "I";
    case CycleCase::II: return "II";
    case CycleCase::III: return "III";
    case CycleCase::IV: return "IV";
    case CycleCase::Other: return "Other";
    case CycleCase::Singular: return "Singular";
    }
    return "?";
}

struct CycleRecord {
    std::size_t start = 0;              // log index of the opening floor event
    std::vector<EventKind> kinds;       // interior events
    CycleCase label = CycleCase::Other;
    std::vector<double> differences;    // approach difference at each ball-ball collision
    std::vector<double> psi;            // angle between the planar subspace and the crossed face (case I)
    double time = 0.0;                  // time of the opening floor event
};

// Label of the interior sequence between two floor collisions.
inline CycleCase classify_cycle(const std::vector<EventKind>& interior)
{
    using K = EventKind;
    for (K k : interior)
        if (is_singular(k))
            return CycleCase::Singular;
    if (interior == std::vector<K>{K::Pair12, K::Pair23})
        return CycleCase::I;
    if (interior == std::vector<K>{K::Pair12, K::Pair23, K::Pair12})
        return CycleCase::II;
    if (interior == std::vector<K>{K::Pair23, K::Pair12})
        return CycleCase::III;
    if (interior == std::vector<K>{K::Pair23, K::Pair12, K::Pair23})
        return CycleCase::IV;
    return CycleCase::Other;
}

// True when both kinds of ball-ball collision occur, i.e. every ball takes part.
inline bool involves_all_balls(const std::vector<EventKind>& interior)
{
    bool a = false, b = false;
    for (EventKind k : interior) {
        a = a || k == EventKind::Pair12;
        b = b || k == EventKind::Pair23;
    }
    return a && b;
}

// Angle in [0, pi/2] between the planar subspace of a flight with velocity w (wedge
// coordinates) and the face through h1 with normal n.
inline double psi_angle(const MassModel& m, const Vec3& w, const Vec3& n)
{
    return plane_angle(w.cross(gravity_vector(m)), n);
}

namespace detail {

inline Vec3 pre_velocity(const PhaseState& prev, double dt) { return flight(prev, dt).v; }

} // namespace detail

// Splits a logged orbit into floor-to-floor cycles. Events before the first floor
// collision and after the last one are dropped.
inline std::vector<CycleRecord> extract_cycles(const MassModel& m, const OrbitLog& log)
{
    std::vector<CycleRecord> out;
    const auto& e = log.entries;
    std::size_t k = 0;
    while (k < e.size() && e[k].kind != EventKind::Floor01)
        ++k;
    while (k < e.size()) {
        CycleRecord c;
        c.start = k;
        c.time = e[k].time;
        std::size_t j = k + 1;
        while (j < e.size() && e[j].kind != EventKind::Floor01) {
            c.kinds.push_back(e[j].kind);
            if (is_ball_ball(e[j].kind)) {
                const Vec3 pre = detail::pre_velocity(e[j - 1].state, e[j].time - e[j - 1].time);
                const int i = e[j].kind == EventKind::Pair12 ? 0 : 1;
                c.differences.push_back(pre[i] - pre[i + 1]);
                c.psi.push_back(psi_angle(m, m.sqrt_vec().cwiseProduct(pre), face_normal(m, e[j].kind)));
            }
            ++j;
        }
        if (j == e.size())
            break; // unterminated
        c.label = classify_cycle(c.kinds);
        if (c.label != CycleCase::I)
            c.psi.clear();
        out.push_back(std::move(c));
        k = j;
    }
    return out;
}

struct PsiCheck {
    bool skipped = false;
    std::string diagnostic;
    double min_angle = std::numeric_limits<double>::infinity();
    std::size_t checked = 0;
    std::size_t below = 0; // angles under pi/6 - tol
};

inline void psi_check(const MassModel& m, const CycleRecord& r, PsiCheck& acc, double tol = 1e-9)
{
    if (!m.special()) {
        acc.skipped = true;
        acc.diagnostic = "psi check needs special masses, got " + m.str();
        return;
    }
    if (r.label != CycleCase::I)
        throw ConfigError("psi_check: record is not case I");
    const double bound = std::acos(-1.0) / 6.0;
    for (double a : r.psi) {
        ++acc.checked;
        acc.min_angle = std::min(acc.min_angle, a);
        if (a < bound - tol)
            ++acc.below;
    }
}

struct CycleCensus {
    std::size_t counts[6] = {0, 0, 0, 0, 0, 0};
    std::size_t total = 0;
    std::size_t all_balls = 0;       // cycles with both pair kinds
    std::size_t all_balls_other = 0; // of those, unmatched by I-IV
    std::vector<std::vector<EventKind>> other_examples; // first few unmatched sequences

    void add(const CycleRecord& r)
    {
        ++counts[static_cast<int>(r.label)];
        ++total;
        if (involves_all_balls(r.kinds)) {
            ++all_balls;
            if (r.label == CycleCase::Other)
                ++all_balls_other;
        }
        if (r.label == CycleCase::Other && other_examples.size() < 8)
            other_examples.push_back(r.kinds);
    }
    std::size_t count(CycleCase c) const { return counts[static_cast<int>(c)]; }
};

inline std::string sequence_string(const std::vector<EventKind>& ks)
{
    std::string s;
    for (EventKind k : ks) {
        if (!s.empty())
            s += ' ';
        s += to_string(k);
    }
    return s;
}

// ------------------------------------------------------------ chart checks

// At a (1,2) event the unfolded point projects onto a cevian half-line toward a vertex,
// at a (2,3) event onto one toward an edge midpoint (opposite a vertex).
struct ChartCheck {
    std::size_t checked = 0;
    std::size_t mismatches = 0;
    double max_offset = 0.0; // worst angular distance to the expected half-line
};

inline ChartCheck chart_check(const WideWedge& ww, const WidePath& path, const TriangleChart& chart)
{
    ChartCheck c;
    std::array<Eigen::Vector2d, 3> vert;
    for (int i = 0; i < 3; ++i)
        vert[i] = project_triangle(chart, ww.g[i]).normalized();
    for (std::size_t k = 0; k < path.kinds.size(); ++k) {
        const EventKind kind = path.kinds[k];
        if (!is_ball_ball(kind))
            continue;
        const Eigen::Vector2d p = project_triangle(chart, path.states[k + 1].x);
        if (p.norm() < 1e-12)
            continue;
        const Eigen::Vector2d u = p.normalized();
        const double sign = kind == EventKind::Pair12 ? 1.0 : -1.0;
        double best = 4.0;
        for (const auto& v : vert)
            best = std::min(best, (u - sign * v).norm());
        ++c.checked;
        c.max_offset = std::max(c.max_offset, best);
        if (best > 1e-6)
            ++c.mismatches;
    }
    return c;
}

// Rows cycle_id, case, x, y, t: chart coordinates of the unfolded event points.
inline void write_chart_csv(std::ostream& os, const MassModel& m, const OrbitLog& log, const TriangleChart& chart)
{
    const WideWedge ww = unfold(m);
    const WidePath path = unfold_trajectory(ww, log);
    const auto cycles = extract_cycles(m, log);
    os.precision(17);
    os << "cycle_id,case,x,y,t\n";
    for (std::size_t id = 0; id < cycles.size(); ++id) {
        const CycleRecord& c = cycles[id];
        for (std::size_t j = c.start; j <= c.start + c.kinds.size() + 1 && j < log.entries.size(); ++j) {
            const Eigen::Vector2d p = project_triangle(chart, path.states[j + 1].x);
            os << id << ',' << to_string(c.label) << ',' << p.x() << ',' << p.y() << ',' << log.entries[j].time << '\n';
        }
    }
}

} // namespace wedgefall
