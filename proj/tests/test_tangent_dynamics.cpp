#include <cmath>

#include <gtest/gtest.h>

#include "wedgefall/sampling.hpp"
#include "wedgefall/tangent.hpp"
#include "wedgefall/xieta.hpp"

using namespace wedgefall;

namespace {

// Independent oracle: the return map with the event kind held fixed, written
// directly in (h, v) coordinates from the flight parabolas.
Vec6 fixed_kind_map(const MassModel& m, const Vec6& hv, EventKind kind)
{
    Vec3 q, v;
    for (int i = 0; i < 3; ++i) {
        v[i] = hv[3 + i];
        q[i] = hv[i] / m.m(i) - 0.5 * v[i] * v[i];
    }
    double tau;
    if (kind == EventKind::Floor01)
        tau = v[0] + std::sqrt(v[0] * v[0] + 2 * q[0]);
    else {
        const int i = kind == EventKind::Pair12 ? 0 : 1;
        tau = (q[i + 1] - q[i]) / (v[i] - v[i + 1]);
    }
    Vec3 q2, v2;
    for (int i = 0; i < 3; ++i) {
        q2[i] = q[i] + tau * v[i] - 0.5 * tau * tau;
        v2[i] = v[i] - tau;
    }
    v2 = collision_law(m, v2, kind);
    Vec6 out;
    for (int i = 0; i < 3; ++i) {
        out[i] = m.m(i) * (0.5 * v2[i] * v2[i] + q2[i]);
        out[3 + i] = v2[i];
    }
    return out;
}

Vec6 to_hv(const MassModel& m, const PhaseState& x)
{
    Vec6 r;
    for (int i = 0; i < 3; ++i) {
        r[i] = m.m(i) * (0.5 * x.v[i] * x.v[i] + x.q[i]);
        r[3 + i] = x.v[i];
    }
    return r;
}

Mat6 fd_jacobian(const MassModel& m, const PhaseState& x, EventKind kind)
{
    const Vec6 base = to_hv(m, x);
    Mat6 j;
    for (int c = 0; c < 6; ++c) {
        const double h = 1e-6 * (1.0 + std::abs(base[c]));
        Vec6 a = base, b = base;
        a[c] += h;
        b[c] -= h;
        j.col(c) = (fixed_kind_map(m, a, kind) - fixed_kind_map(m, b, kind)) / (2 * h);
    }
    return j;
}

TangentVector random_reduced(Rng& rng)
{
    TangentVector t;
    for (int i = 0; i < 3; ++i) {
        t.dh[i] = rng.normal();
        t.dv[i] = rng.normal();
    }
    t.dh.array() -= t.dh.mean();
    return t;
}

Section section_of(int k)
{
    const Section s[3] = {Section::M1Plus, Section::M2Plus, Section::M3Plus};
    return s[k % 3];
}

} // namespace

TEST(QForm, Examples)
{
    EXPECT_EQ(q_form({Vec3(0, 1, -1), Vec3(0, 1, 0)}), 1.0);
    EXPECT_EQ(q_form({Vec3(1, -1, 0), Vec3::Zero()}), 0.0);

    const MassModel m(3, 2, 1);
    PhaseState x;
    x.v = Vec3(-1, 0, 1);
    const Vec3 dq = Vec3::Zero(), dp(1, -2, 1);
    const TangentVector t = tangent_qp_to_hv(m, x, dq, dp);
    EXPECT_NEAR((t.dh - Vec3(-1, 0, 1)).norm(), 0.0, 1e-15);
    EXPECT_NEAR((t.dv - Vec3(1.0 / 3, -1, 1)).norm(), 0.0, 1e-15);
    EXPECT_NEAR(q_form(t), 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(q_form_qp(m, x, dq, dp), 2.0 / 3.0, 1e-15);
}

TEST(QForm, ConversionPreservesQ)
{
    const MassModel m(3, 2, 1);
    Rng rng(17);
    for (int k = 0; k < 1000; ++k) {
        PhaseState x;
        x.v = Vec3(rng.normal(), rng.normal(), rng.normal());
        const Vec3 dq(rng.normal(), rng.normal(), rng.normal()), dp(rng.normal(), rng.normal(), rng.normal());
        const TangentVector t = tangent_qp_to_hv(m, x, dq, dp);
        EXPECT_NEAR(q_form(t), q_form_qp(m, x, dq, dp), 1e-12 * (1 + std::abs(q_form(t))));
        const auto [dq2, dp2] = tangent_hv_to_qp(m, x, t);
        EXPECT_LE((dq2 - dq).norm() + (dp2 - dp).norm(), 1e-12);
    }
    const TangentVector d = tangent_qp_to_hv(m, PhaseState{}, Vec3(1, 2, 3), Vec3::Zero());
    EXPECT_EQ(d.dh, Vec3(3, 4, 3));
    EXPECT_EQ(d.dv, Vec3::Zero());
}

TEST(QForm, FlowQuotient)
{
    Rng rng(3);
    for (int k = 0; k < 100; ++k) {
        TangentVector t = random_reduced(rng);
        const double q0 = q_form(t);
        t.dv.array() += rng.normal();
        EXPECT_NEAR(q_form(t), q0, 1e-12 * (1 + std::abs(q0)));
        EXPECT_NEAR(q_reduced(to_reduced(t)), q0, 1e-12 * (1 + std::abs(q0)));
    }
}

TEST(Monodromy, FloorExample)
{
    const MassModel m(3, 2, 1);
    const Mat6 d = collision_jacobian(m, EventKind::Floor01, Vec3(-2, 0.3, 0.1));
    const TangentVector in{Vec3(1, -1, 0), Vec3::Zero()};
    const TangentVector out = TangentVector::from(d * in.vec());
    EXPECT_NEAR((out.dv - Vec3(1.0 / 6, -1.0 / 6, -1.0 / 6)).norm(), 0.0, 1e-15);
    EXPECT_EQ(out.dh, in.dh);
    EXPECT_NEAR(q_form(out), 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(beta_coefficient(m, Vec3(-2, 0, 0)), 1.0 / 3.0, 1e-15);
}

TEST(Monodromy, MatchesFiniteDifferences)
{
    const MassModel m(3, 2, 1);
    double worst = 0.0;
    for (std::uint64_t i = 0; i < 100; ++i) {
        const PhaseState x = sample_phase_point(m, 10.0, section_of(i), 31, i);
        const Monodromy d = monodromy_step(m, x);
        const Mat6 fd = fd_jacobian(m, x, d.kind);
        const double err = (fd - d.matrix).cwiseAbs().maxCoeff() / std::max(1.0, d.matrix.cwiseAbs().maxCoeff());
        worst = std::max(worst, err);
    }
    EXPECT_LE(worst, 1e-5);
}

TEST(Monodromy, SymplecticAndEnergyReducing)
{
    const MassModel m(4, 2, 1.2);
    Rng rng(8);
    for (std::uint64_t i = 0; i < 200; ++i) {
        const Monodromy d = monodromy_step(m, sample_phase_point(m, 10.0, section_of(i), 2, i));
        const TangentVector a = random_reduced(rng), b = random_reduced(rng);
        const double w0 = omega(a, b);
        const double w1 = omega(d.apply(a), d.apply(b));
        EXPECT_LE(std::abs(w1 - w0), 1e-9 * (1 + std::abs(w0)));
        EXPECT_LE(std::abs(d.apply(a).dh.sum()), 1e-12 * (1 + a.dh.norm()));
    }
}

TEST(Monodromy, QMonotone)
{
    const MassModel m(3, 2, 1);
    Rng rng(12);
    for (std::uint64_t i = 0; i < 2000; ++i) {
        const Monodromy d = monodromy_step(m, sample_phase_point(m, 10.0, section_of(i), 4, i));
        const TangentVector a = random_reduced(rng);
        const TangentVector b = d.apply(a);
        EXPECT_GE(q_form(b), q_form(a) - 1e-10);
        if (d.kind == EventKind::Floor01) {
            EXPECT_NEAR(q_form(b) - q_form(a), d.coeff * a.dh[0] * a.dh[0], 1e-10 * (1 + std::abs(q_form(b))));
        }
    }
}

TEST(Monodromy, SingularStepRejected)
{
    const MassModel m(3, 2, 1);
    PhaseState x;
    x.q = Vec3(0, 1, 2);
    x.v = Vec3(2, 1, 0);
    x.section = Section::M1Plus;
    EXPECT_THROW(monodromy_step(m, x), SingularEvent);
}

TEST(MonodromyProduct, ReducesAndAssociates)
{
    const MassModel m(3, 2, 1);
    const PhaseState x = sample_phase_point(m, 10.0, Section::M1Plus, 6);
    const MonodromyProduct p1 = monodromy_product(m, x, 1);
    EXPECT_EQ((p1.matrix - monodromy_step(m, x).matrix).cwiseAbs().maxCoeff(), 0.0);

    RenormPolicy off{false};
    const MonodromyProduct a = monodromy_product(m, x, 7, off);
    const MonodromyProduct b = monodromy_product(m, a.end, 5, off);
    const MonodromyProduct ab = monodromy_product(m, x, 12, off);
    EXPECT_EQ(ab.log_scale, 0.0);
    const Mat6 composed = b.matrix * a.matrix;
    EXPECT_LE((composed - ab.matrix).cwiseAbs().maxCoeff(), 1e-8 * ab.matrix.cwiseAbs().maxCoeff());

    const MonodromyProduct r = monodromy_product(m, x, 12);
    const Mat6 rescaled = std::exp(r.log_scale) * r.matrix;
    EXPECT_LE((rescaled - ab.matrix).cwiseAbs().maxCoeff(), 1e-8 * ab.matrix.cwiseAbs().maxCoeff());
}

TEST(MonodromyProduct, QAgreesAcrossCoordinates)
{
    const MassModel m(4, 2, 1.2);
    Rng rng(44);
    const PhaseState x = sample_phase_point(m, 10.0, Section::M1Plus, 44);
    const ReducedOrbit orb = reduced_orbit(m, x, 30);
    TangentVector t = random_reduced(rng);
    Vec4 r = to_reduced(t);
    for (int k = 0; k < orb.size(); ++k) {
        const Monodromy d = monodromy_step(m, orb.states[k]);
        t = d.apply(t);
        r = orb.steps[k] * r;
        const auto [dq, dp] = tangent_hv_to_qp(m, d.target, t);
        const double q = q_form(t);
        EXPECT_NEAR(q_reduced(r), q, 1e-9 * (1 + std::abs(q)));
        EXPECT_NEAR(q_form_qp(m, d.target, dq, dp), q, 1e-9 * (1 + std::abs(q)));
    }
}

TEST(ReducedSpace, SymplecticInverse)
{
    const MassModel m(3, 2, 1);
    const ReducedOrbit orb = reduced_orbit(m, sample_phase_point(m, 10.0, Section::M2Plus, 9), 20);
    for (const Mat4& s : orb.steps) {
        EXPECT_LE((symplectic_inverse(s) * s - Mat4::Identity()).cwiseAbs().maxCoeff(), 1e-10);
        EXPECT_LE((s.transpose() * omega_reduced() * s - omega_reduced()).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(XiEta, PrintedBlocks)
{
    const MassModel m(4, 2, 1.2);
    const XiEtaBlocks b = dphi_xieta(EventKind::Pair12, m, Vec3(1, -1, 0));
    Mat3 expect;
    expect << 1, 0, 0, 0, -1, 4.0 / 3.0, 0, 0, 1;
    EXPECT_LE((b.M1 - expect).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_NEAR(std::abs(b.alpha1), 16.0 / 9.0, 1e-15);
    EXPECT_LE((b.M1 * b.M1 - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LE((b.M2 * b.M2 - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_EQ(dphi_xieta(EventKind::Pair23, m, Vec3(0, 0.5, 0.5)).alpha2, 0.0);
    EXPECT_THROW(dphi_xieta(EventKind::Floor01, m, Vec3(1, 0, 0)), SectionMismatch);
}

TEST(XiEta, CalibrationFlipsAlphaOnly)
{
    const MassModel m(3, 2, 1);
    Rng rng(1);
    const SignCalibration s = calibrate_signs(m, rng);
    EXPECT_EQ(s.beta, 1);
    EXPECT_EQ(s.alpha1, -1);
    EXPECT_EQ(s.alpha2, -1);
}

TEST(XiEta, CalibratedBlocksReproduceNormativeQ)
{
    const MassModel m(4, 2, 1.2);
    Rng rng(2);
    const SignCalibration s = calibrate_signs(m, rng);
    const PhaseState x = sample_phase_point(m, 10.0, Section::M1Plus, 77);
    const ReducedOrbit orb = reduced_orbit(m, x, 40);
    TangentVector t = random_reduced(rng);
    Vec6 xe = to_xieta(t);
    PhaseState cur = x;
    for (int k = 0; k < orb.size(); ++k) {
        const Monodromy d = monodromy_step(m, cur);
        t = d.apply(t);
        xe = dphi_xieta(d.kind, m, d.pre_velocity, s).step(d.kind) * xe;
        cur = d.target;
        EXPECT_NEAR(q_xieta(xe), q_form(t), 1e-8 * (1 + std::abs(q_form(t))));
        // the non-flow coordinates agree exactly, not just Q
        const Vec6 ref = to_xieta(t);
        EXPECT_LE((ref.segment<2>(1) - xe.segment<2>(1)).norm(), 1e-8 * (1 + ref.norm()));
        EXPECT_LE((ref.tail<2>() - xe.tail<2>()).norm(), 1e-8 * (1 + ref.norm()));
    }
}

TEST(CwNorm, Examples)
{
    const MassModel m(3, 2, 1);
    EXPECT_EQ(cw_norm(Vec3(1, 1, 1), m), 0.0);
    EXPECT_NEAR(cw_norm(Vec3(0, 1, 0), m), std::sqrt(1.0 / 3 + 1.0 / 2), 1e-15);
    EXPECT_GT(cw_norm(Vec3(0, 0, 1), m), 0.0);
}

TEST(CwNorm, Invariance)
{
    Rng rng(10);
    double printed_m2_defect = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const double m1 = rng.uniform(1.5, 5.0), m2 = rng.uniform(0.5, m1 - 0.1), m3 = rng.uniform(0.2, m2);
        const MassModel m(m1, m2, m3);
        const XiEtaBlocks b = dphi_xieta(EventKind::Pair12, m, Vec3(1, 0, 0));
        const Vec3 xi(0.0, rng.normal(), rng.normal());
        const double n0 = cw_norm(xi, m), f0 = cw_norm_full(xi, m);
        EXPECT_NEAR(cw_norm(b.M1 * xi, m), n0, 1e-12 * (1 + n0));
        EXPECT_NEAR(cw_norm_full(b.M1 * xi, m), f0, 1e-12 * (1 + f0));
        EXPECT_NEAR(cw_norm_full(b.M2 * xi, m), f0, 1e-12 * (1 + f0));
        printed_m2_defect = std::max(printed_m2_defect, std::abs(cw_norm(b.M2 * xi, m) - n0));
    }
    // the two-term form is not preserved by M2
    EXPECT_GT(printed_m2_defect, 1e-3);
}

TEST(CwNorm, EquivalenceConstants)
{
    const MassModel m(3, 2, 1);
    const NormEquivalence c = cw_equivalence_constants(m);
    Rng rng(4);
    for (int k = 0; k < 2000; ++k) {
        const Vec3 xi(0.0, rng.uniform(-1, 1), rng.uniform(-1, 1));
        const double r = cw_norm(xi, m) / xi.cwiseAbs().maxCoeff();
        EXPECT_GE(r, c.d1 - 1e-12);
        EXPECT_LE(r, c.d2 + 1e-12);
    }
    EXPECT_GT(c.d1, 0.0);
}

TEST(AlphaBound, Census)
{
    const MassModel m(3, 2, 1);
    EXPECT_NEAR(alpha_bound(MassModel(3, 1, 1), 10.0), 4 * std::sqrt(20.0) * 27, 1e-12);
    EXPECT_NEAR(alpha_bound(MassModel(3, 1, 1), 10.0), 482.99, 0.01);
    const OrbitLog log = simulate(m, sample_phase_point(m, 10.0, Section::M1Plus, 1), 100000);
    const AlphaBoundReport r = alpha_bound_check(m, log, 10.0);
    EXPECT_TRUE(r.ok);
    EXPECT_LE(r.max_ratio, 1.0);
    EXPECT_GT(r.pair_events, 0u);
}
