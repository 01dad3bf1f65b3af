#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Eigenvalues>

#include "wedgefall/cones.hpp"
#include "wedgefall/sampling.hpp"

namespace wedgefall {

// ------------------------------------------------------------------ ansatz

struct AnsatzSample {
    PhaseState x;
    int vectors = 0;
    int crossed = 0;
    int max_crossing = -1; // slowest crossing among the vectors of this sample
};

struct AnsatzCensus {
    Manifold manifold = Manifold::S12Minus;
    TimeDirection direction = TimeDirection::Forward;
    std::vector<AnsatzSample> samples;
    int failures = 0;
    int max_crossing = -1;

    void merge(const AnsatzSample& s)
    {
        samples.push_back(s);
        if (s.crossed < s.vectors)
            ++failures;
        max_crossing = std::max(max_crossing, s.max_crossing);
    }
};

inline TimeDirection ansatz_direction(Manifold s)
{
    return (s == Manifold::S12Minus || s == Manifold::S31Minus) ? TimeDirection::Forward : TimeDirection::Backward;
}

// Closed-cone test vectors: the Lagrangian bases and random unit vectors with Q >= 0.
inline std::vector<Vec4> closed_cone_vectors(Rng& rng, int random_count)
{
    std::vector<Vec4> out;
    const LagrangianBasis b = lagrangian_basis();
    for (int i = 0; i < 2; ++i) {
        out.push_back(b.l1_reduced[i]);
        out.push_back(b.l2_reduced[i]);
    }
    while (static_cast<int>(out.size()) < 4 + random_count) {
        Vec4 v(rng.normal(), rng.normal(), rng.normal(), rng.normal());
        if (q_reduced(v) < 0.0)
            v.tail<2>() = -v.tail<2>();
        out.push_back(v.normalized());
    }
    return out;
}

// Traces closed-cone vectors at a point of the singularity manifold in the ansatz direction.
inline AnsatzSample ansatz_sample(const MassModel& m, const PhaseState& x, Manifold s, int N, double threshold,
                                  Rng& rng, int random_vectors = 16)
{
    AnsatzSample a;
    a.x = x;
    const TimeDirection dir = ansatz_direction(s);
    for (const Vec4& v : closed_cone_vectors(rng, random_vectors)) {
        ++a.vectors;
        const QTrace t = unboundedness_trace(m, x, v, N, dir, threshold);
        if (t.crossing >= 0) {
            ++a.crossed;
            a.max_crossing = std::max(a.max_crossing, t.crossing);
        }
    }
    return a;
}

// ------------------------------------------------------------------ Lambda

struct PairBlock {
    int index = 0;        // position of the first collision in the orbit
    EventKind first = EventKind::Pair12;
    double theta = 0.0;   // smaller of the two approach velocity differences
    double lambda = 0.0;  // min over unit eta of Q(block (0, eta))
    Eigen::Vector2d eta = Eigen::Vector2d::Zero();
};

inline double approach_difference(const Vec3& pre, EventKind k)
{
    const int i = k == EventKind::Pair12 ? 0 : 1;
    return pre[i] - pre[i + 1];
}

// Consecutive (1,2)(2,3) or (2,3)(1,2) collisions with both differences >= theta_min.
inline std::vector<PairBlock> detect_blocks(const ReducedOrbit& orb, double theta_min)
{
    std::vector<PairBlock> out;
    for (int k = 0; k + 1 < orb.size(); ++k) {
        const EventKind a = orb.kinds[k], b = orb.kinds[k + 1];
        if (!is_ball_ball(a) || !is_ball_ball(b) || a == b)
            continue;
        const double t = std::min(approach_difference(orb.pre_velocities[k], a),
                                  approach_difference(orb.pre_velocities[k + 1], b));
        if (t < theta_min)
            continue;
        PairBlock blk;
        blk.index = k;
        blk.first = a;
        blk.theta = t;
        const Mat4 r = orb.steps[k + 1] * orb.steps[k];
        const Mat4 sp = r.transpose() * q_matrix() * r;
        const Eigen::Matrix2d f2 = sp.bottomRightCorner<2, 2>();
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(0.5 * (f2 + f2.transpose()));
        blk.lambda = es.eigenvalues()(0);
        blk.eta = es.eigenvectors().col(0);
        out.push_back(blk);
    }
    return out;
}

struct LambdaEstimate {
    double lambda = std::numeric_limits<double>::infinity();
    double theta = std::numeric_limits<double>::infinity();
    Eigen::Vector2d eta = Eigen::Vector2d::Zero(); // minimizing unit eta
    std::size_t blocks = 0;

    void merge(const PairBlock& b)
    {
        ++blocks;
        theta = std::min(theta, b.theta);
        if (b.lambda < lambda) {
            lambda = b.lambda;
            eta = b.eta;
        }
    }
    void merge(const LambdaEstimate& o)
    {
        blocks += o.blocks;
        theta = std::min(theta, o.theta);
        if (o.lambda < lambda) {
            lambda = o.lambda;
            eta = o.eta;
        }
    }
};

inline LambdaEstimate lambda_estimate(const std::vector<ReducedOrbit>& orbits, double theta_min)
{
    LambdaEstimate e;
    for (const ReducedOrbit& o : orbits)
        for (const PairBlock& b : detect_blocks(o, theta_min))
            e.merge(b);
    if (e.blocks == 0)
        throw BudgetExhausted("lambda_estimate: no blocks detected");
    return e;
}

struct GainCheck {
    std::size_t checked = 0;
    std::size_t violations = 0;
    double worst_margin = std::numeric_limits<double>::infinity(); // min of gain - lambda |eta|^2, scaled
};

// Along an orbit, every detected block raises Q of a traced vector by at least lambda |eta|^2.
inline GainCheck block_gain_check(const ReducedOrbit& orb, const Vec4& v0, double lambda, double theta_min)
{
    GainCheck g;
    std::vector<Vec4> w(orb.size() + 1);
    w[0] = v0;
    for (int k = 0; k < orb.size(); ++k) {
        w[k + 1] = orb.steps[k] * w[k];
        const double s = w[k + 1].norm();
        if (s > 1e100)
            for (int j = 0; j <= k + 1; ++j)
                w[j] /= s;
    }
    for (const PairBlock& b : detect_blocks(orb, theta_min)) {
        const Vec4& before = w[b.index];
        const Vec4& after = w[b.index + 2];
        const double eta2 = before.tail<2>().squaredNorm();
        const double gain = q_reduced(after) - q_reduced(before);
        const double scale = std::max({1e-300, before.squaredNorm(), std::abs(q_reduced(after))});
        const double margin = (gain - lambda * eta2) / scale;
        ++g.checked;
        if (eta2 > 0.0 && margin < -1e-10)
            ++g.violations;
        g.worst_margin = std::min(g.worst_margin, margin);
    }
    return g;
}

// ---------------------------------------------------------------- Lyapunov

struct LyapunovOrbit {
    double exponent = 0.0; // per collision
    int collisions = 0;
};

// Largest exponent per collision by tangent growth with renormalization at every step.
inline LyapunovOrbit lyapunov_orbit(const MassModel& m, const PhaseState& x, int n, Rng& rng)
{
    if (n <= 0)
        throw ConfigError("lyapunov: horizon must be positive");
    Vec4 w(rng.normal(), rng.normal(), rng.normal(), rng.normal());
    w.normalize();
    PhaseState s = x;
    double acc = 0.0;
    for (int k = 0; k < n; ++k) {
        const Monodromy d = monodromy_step(m, s);
        w = d.reduced() * w;
        const double nr = w.norm();
        acc += std::log(nr);
        w /= nr;
        s = d.target;
    }
    return {acc / n, n};
}

struct LyapunovEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::size_t orbits = 0;
    std::size_t resampled = 0;
    std::vector<double> per_orbit;
};

inline LyapunovEstimate summarize_lyapunov(const std::vector<double>& xs, std::size_t resampled = 0)
{
    LyapunovEstimate e;
    e.per_orbit = xs;
    e.orbits = xs.size();
    e.resampled = resampled;
    if (xs.empty())
        throw BudgetExhausted("lyapunov: no non-singular orbits");
    double s = 0.0;
    for (double x : xs)
        s += x;
    e.mean = s / xs.size();
    if (xs.size() > 1) {
        double v = 0.0;
        for (double x : xs)
            v += (x - e.mean) * (x - e.mean);
        v /= (xs.size() - 1);
        e.stderr_ = std::sqrt(v / xs.size());
    }
    return e;
}

} // namespace wedgefall
