#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

#include "wedgefall/alignment.hpp"
#include "wedgefall/cycles.hpp"
#include "wedgefall/experiments/config.hpp"
#include "wedgefall/experiments/result_table.hpp"
#include "wedgefall/hyperbolicity.hpp"

namespace wedgefall::experiments {

// Runs f(0..n-1) on a pool; results are written by index, so the merge order never
// depends on scheduling. The first exception (by index) is rethrown.
inline void parallel_for(int n, int threads, const std::function<void(int)>& f)
{
    if (n <= 0)
        return;
    int t = threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    t = std::min(t, n);
    std::vector<std::exception_ptr> errors(n);
    if (t == 1) {
        for (int i = 0; i < n; ++i) {
            try {
                f(i);
            }
            catch (...) {
                errors[i] = std::current_exception();
            }
        }
    }
    else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        for (int k = 0; k < t; ++k)
            pool.emplace_back([&] {
                for (int i = next++; i < n; i = next++) {
                    try {
                        f(i);
                    }
                    catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        for (auto& th : pool)
            th.join();
    }
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

inline Manifold parse_manifold(const std::string& s)
{
    if (s == "S12-")
        return Manifold::S12Minus;
    if (s == "S31-")
        return Manifold::S31Minus;
    if (s == "S12+")
        return Manifold::S12Plus;
    if (s == "S31+")
        return Manifold::S31Plus;
    throw ConfigError("unknown manifold '" + s + "'");
}

inline Section parse_section(const std::string& s)
{
    if (s == "M1+")
        return Section::M1Plus;
    if (s == "M2+")
        return Section::M2Plus;
    if (s == "M3+")
        return Section::M3Plus;
    if (s == "interior")
        return Section::Interior;
    throw ConfigError("unknown section '" + s + "'");
}

// Repeats body(rng) on the sample's own stream until it completes without meeting a
// singular event. The tangent map is undefined there, so every policy resamples here.
template <class F>
auto with_resampling(const ExperimentConfig& c, int index, int& resampled, F&& body)
{
    Rng rng(c.seed, static_cast<std::uint64_t>(index));
    for (int attempt = 0; attempt < c.max_resample; ++attempt) {
        try {
            return body(rng);
        }
        catch (const SingularEvent&) {
            ++resampled;
        }
    }
    throw BudgetExhausted("sample " + std::to_string(index) + ": " + std::to_string(c.max_resample) +
                          " consecutive singular orbits");
}

// Orbit logs under the configured singularity policy: one log, or two when both branches are followed.
inline std::vector<OrbitLog> policy_orbits(const MassModel& m, const PhaseState& x, int n, SingularityPolicy p)
{
    switch (p) {
    case SingularityPolicy::PickFirst: return {simulate(m, x, n, BranchPolicy::First)};
    case SingularityPolicy::AbortResample: return {simulate(m, x, n, BranchPolicy::Throw)};
    case SingularityPolicy::BranchBoth: {
        OrbitLog a = simulate(m, x, n, BranchPolicy::First);
        for (const LogEntry& e : a.entries)
            if (is_singular(e.kind))
                return {std::move(a), simulate(m, x, n, BranchPolicy::Second)};
        return {std::move(a)};
    }
    }
    return {};
}

inline ResultTable make_table(const ExperimentConfig& c, std::vector<std::string> columns)
{
    ResultTable t;
    t.experiment = c.experiment;
    t.columns = std::move(columns);
    const MassModel m = c.mass_model();
    t.provenance = {{"config_hash", config_hash(c)},
                    {"code_version", kCodeVersion},
                    {"seed", c.seed},
                    {"masses", {m.m(0), m.m(1), m.m(2)}},
                    {"singularity", to_string(c.singularity)}};
    return t;
}

// ------------------------------------------------------------------ growth

inline ResultTable run_growth(const ExperimentConfig& c)
{
    const MassModel m = c.mass_model();
    const Section sec = parse_section(c.section);
    struct Row {
        std::vector<QTrace> fwd, bwd;
    };
    std::vector<Row> rows(c.samples);
    std::vector<int> res(c.samples, 0);
    parallel_for(c.samples, c.threads, [&](int i) {
        rows[i] = with_resampling(c, i, res[i], [&](Rng& rng) {
            Row out;
            const PhaseState x = sample_phase_point(m, c.energy, sec, rng);
            for (const Vec4& v : closed_cone_vectors(rng, c.vectors - 4)) {
                out.fwd.push_back(unboundedness_trace(m, x, v, c.horizon, TimeDirection::Forward, c.threshold));
                out.bwd.push_back(unboundedness_trace(m, x, v, c.horizon, TimeDirection::Backward, c.threshold));
            }
            return out;
        });
    });
    ResultTable t = make_table(
        c, {"sample", "vector", "forward_crossing", "forward_monotone", "backward_crossing", "backward_monotone"});
    std::int64_t total = 0, fwd_ok = 0, bwd_ok = 0, mono_bad = 0, resampled = 0;
    std::int64_t max_f = -1, max_b = -1;
    for (int i = 0; i < c.samples; ++i) {
        resampled += res[i];
        for (std::size_t k = 0; k < rows[i].fwd.size(); ++k) {
            const QTrace &f = rows[i].fwd[k], &b = rows[i].bwd[k];
            t.add_row({std::int64_t(i), std::int64_t(k), std::int64_t(f.crossing), std::int64_t(f.monotone),
                       std::int64_t(b.crossing), std::int64_t(b.monotone)});
            ++total;
            fwd_ok += f.crossing >= 0;
            bwd_ok += b.crossing >= 0;
            mono_bad += !f.monotone + !b.monotone;
            max_f = std::max<std::int64_t>(max_f, f.crossing);
            max_b = std::max<std::int64_t>(max_b, b.crossing);
        }
    }
    t.summary = {{"traces", total},
                 {"forward_crossed_fraction", double(fwd_ok) / total},
                 {"backward_crossed_fraction", double(bwd_ok) / total},
                 {"max_forward_crossing", max_f},
                 {"max_backward_crossing", max_b},
                 {"monotonicity_violations", mono_bad},
                 {"resampled", resampled}};
    return t;
}

// ------------------------------------------------------------------- sigma

// sigma(n) curve up to n_max, and the first n <= horizon with sigma > 3. Every step is
// Q-monotone, so sigma is nondecreasing in n and the search stops at the first hit.
inline ResultTable run_sigma(const ExperimentConfig& c)
{
    const MassModel m = c.mass_model();
    const Section sec = parse_section(c.section);
    struct Row {
        std::vector<double> sigma;
        int first3 = -1;
    };
    std::vector<Row> rows(c.samples);
    std::vector<int> res(c.samples, 0);
    const int reach = std::max(c.n_max, c.horizon);
    parallel_for(c.samples, c.threads, [&](int i) {
        rows[i] = with_resampling(c, i, res[i], [&](Rng& rng) {
            Row out;
            PhaseState x = sample_phase_point(m, c.energy, sec, rng);
            Mat4 r = Mat4::Identity();
            for (int n = 1; n <= reach; ++n) {
                const Monodromy d = monodromy_step(m, x);
                r = d.reduced() * r;
                x = d.target;
                const double s = (n <= c.n_max || out.first3 < 0) ? sigma_pencil(r, n).value : 0.0;
                if (n <= c.n_max)
                    out.sigma.push_back(s);
                if (out.first3 < 0 && s > 3.0)
                    out.first3 = n;
                if (n >= c.n_max && out.first3 > 0)
                    break;
            }
            return out;
        });
    });
    ResultTable t = make_table(c, {"sample", "n", "sigma"});
    std::int64_t above3 = 0, above1 = 0, resampled = 0;
    double mean_first3 = 0.0;
    std::int64_t max_first3 = -1;
    nlohmann::json firsts = nlohmann::json::array();
    for (int i = 0; i < c.samples; ++i) {
        resampled += res[i];
        bool gt1 = false;
        for (int n = 1; n <= c.n_max; ++n) {
            const double s = rows[i].sigma[n - 1];
            t.add_row({std::int64_t(i), std::int64_t(n), s});
            gt1 = gt1 || s > 1.0;
        }
        above1 += gt1 || rows[i].first3 > 0;
        firsts.push_back(rows[i].first3);
        if (rows[i].first3 > 0) {
            ++above3;
            mean_first3 += rows[i].first3;
            max_first3 = std::max<std::int64_t>(max_first3, rows[i].first3);
        }
    }
    t.summary = {{"samples", c.samples},
                 {"horizon", reach},
                 {"sigma_above_3_fraction", double(above3) / c.samples},
                 {"sigma_above_1_fraction", double(above1) / c.samples},
                 {"mean_first_n_above_3", above3 ? mean_first3 / above3 : 0.0},
                 {"max_first_n_above_3", max_first3},
                 {"first_n_above_3", firsts},
                 {"resampled", resampled}};
    return t;
}

// ------------------------------------------------------------------ ansatz

inline ResultTable run_ansatz(const ExperimentConfig& c)
{
    const MassModel m = c.mass_model();
    const Manifold s = parse_manifold(c.manifold);
    std::vector<AnsatzSample> rows(c.samples);
    std::vector<int> res(c.samples, 0);
    parallel_for(c.samples, c.threads, [&](int i) {
        rows[i] = with_resampling(c, i, res[i], [&](Rng& rng) {
            const PhaseState x = sample_singular_point(m, s, c.energy, rng);
            return ansatz_sample(m, x, s, c.horizon, c.threshold, rng, c.vectors - 4);
        });
    });
    ResultTable t = make_table(c, {"sample", "vectors", "crossed", "max_crossing"});
    AnsatzCensus census;
    census.manifold = s;
    census.direction = ansatz_direction(s);
    std::int64_t resampled = 0;
    for (int i = 0; i < c.samples; ++i) {
        census.merge(rows[i]);
        resampled += res[i];
        t.add_row({std::int64_t(i), std::int64_t(rows[i].vectors), std::int64_t(rows[i].crossed),
                   std::int64_t(rows[i].max_crossing)});
    }
    t.summary = {{"manifold", to_string(s)},
                 {"direction", census.direction == TimeDirection::Forward ? "forward" : "backward"},
                 {"samples", c.samples},
                 {"failures", census.failures},
                 {"crossed_fraction", 1.0 - double(census.failures) / c.samples},
                 {"max_crossing", census.max_crossing},
                 {"resampled", resampled}};
    return t;
}

// ------------------------------------------------------------ align-census

struct AlignRow {
    std::string mode;
    MomClass cls = MomClass::Mom1;
    bool aligned = false;
    double q = 0.0;
    int first_member = -1;
    bool nested = true;
    int stays_aligned = -1; // -1 when not traced
};

inline AlignRow align_sample(const ExperimentConfig& c, const MassModel& m, const PhaseState& x, const std::string& mode)
{
    AlignRow r;
    r.mode = mode;
    r.cls = classify_momenta(x);
    const CharLine l = characteristic_line(m, x);
    r.q = l.q_value;
    r.aligned = alignment_status(l, c.tolerance) == Alignment::Aligned;
    const ANReport a = a_membership(m, x, c.horizon, c.tolerance);
    for (std::size_t n = 0; n < a.member.size(); ++n) {
        if (a.member[n] && r.first_member < 0)
            r.first_member = static_cast<int>(n) + 1;
        if (n > 0 && a.member[n - 1] && !a.member[n])
            r.nested = false;
    }
    if (r.aligned)
        r.stays_aligned = char_pushforward(m, x, 50).stays_aligned;
    return r;
}

inline ResultTable run_align_census(const ExperimentConfig& c)
{
    const MassModel m = c.mass_model();
    const std::vector<std::string> modes = {"uniform", "Mom1", "Mom2", "Mom3"};
    const int n = c.samples * static_cast<int>(modes.size());
    std::vector<AlignRow> rows(n);
    std::vector<int> res(n, 0);
    parallel_for(n, c.threads, [&](int i) {
        const int mode = i / c.samples;
        rows[i] = with_resampling(c, i, res[i], [&](Rng& rng) {
            const PhaseState x = mode == 0 ? sample_singular_point(m, Manifold::S12Minus, c.energy, rng)
                                           : sample_s12_in_class(m, static_cast<MomClass>(mode - 1), c.energy, rng);
            return align_sample(c, m, x, modes[mode]);
        });
    });
    ResultTable t = make_table(c, {"mode", "sample", "class", "aligned", "q_char", "first_n_in_A", "nested",
                                   "stays_aligned"});
    nlohmann::json counts = nlohmann::json::object();
    std::int64_t nested_bad = 0, stay_bad = 0, resampled = 0;
    for (int i = 0; i < n; ++i) {
        const AlignRow& r = rows[i];
        resampled += res[i];
        t.add_row({r.mode, std::int64_t(i % c.samples), std::string(to_string(r.cls)), std::int64_t(r.aligned), r.q,
                   std::int64_t(r.first_member), std::int64_t(r.nested), std::int64_t(r.stays_aligned)});
        auto& slot = counts[r.mode][to_string(r.cls)];
        if (slot.is_null())
            slot = {{"aligned", 0}, {"not_aligned", 0}, {"in_A", 0}};
        slot[r.aligned ? "aligned" : "not_aligned"] = slot[r.aligned ? "aligned" : "not_aligned"].get<int>() + 1;
        if (r.first_member > 0)
            slot["in_A"] = slot["in_A"].get<int>() + 1;
        nested_bad += !r.nested;
        stay_bad += r.stays_aligned == 0;
    }
    t.summary = {{"counts", counts},
                 {"nesting_violations", nested_bad},
                 {"alignment_lost", stay_bad},
                 {"A_horizon", c.horizon},
                 {"resampled", resampled}};
    return t;
}

// ------------------------------------------------------------------ lambda

inline ResultTable run_lambda(const ExperimentConfig& c)
{
    const MassModel m = c.mass_model();
    const Section sec = parse_section(c.section);
    std::vector<ReducedOrbit> orbits(c.orbits);
    std::vector<Vec4> probes(c.orbits);
    std::vector<int> res(c.orbits, 0);
    parallel_for(c.orbits, c.threads, [&](int i) {
        orbits[i] = with_resampling(c, i, res[i], [&](Rng& rng) {
            const PhaseState x = sample_phase_point(m, c.energy, sec, rng);
            auto v = closed_cone_vectors(rng, 1);
            probes[i] = v.back();
            return reduced_orbit(m, x, c.events);
        });
    });
    std::vector<LambdaEstimate> per(c.orbits);
    LambdaEstimate total;
    for (int i = 0; i < c.orbits; ++i) {
        for (const PairBlock& b : detect_blocks(orbits[i], c.theta_min))
            per[i].merge(b);
        total.merge(per[i]);
    }
    if (total.blocks == 0)
        throw BudgetExhausted("lambda: no blocks detected");
    std::vector<GainCheck> gains(c.orbits);
    parallel_for(c.orbits, c.threads,
                 [&](int i) { gains[i] = block_gain_check(orbits[i], probes[i], total.lambda, c.theta_min); });
    ResultTable t = make_table(c, {"orbit", "blocks", "lambda_min", "theta_min", "gain_checked", "gain_violations",
                                   "worst_margin"});
    std::int64_t checked = 0, violations = 0, resampled = 0;
    double worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i < c.orbits; ++i) {
        resampled += res[i];
        const bool any = per[i].blocks > 0;
        t.add_row({std::int64_t(i), std::int64_t(per[i].blocks), any ? per[i].lambda : 0.0,
                   any ? per[i].theta : 0.0, std::int64_t(gains[i].checked), std::int64_t(gains[i].violations),
                   gains[i].checked ? gains[i].worst_margin : 0.0});
        checked += gains[i].checked;
        violations += gains[i].violations;
        if (gains[i].checked)
            worst = std::min(worst, gains[i].worst_margin);
    }
    t.summary = {{"lambda_hat", total.lambda},
                 {"theta_hat", total.theta},
                 {"blocks", total.blocks},
                 {"minimizing_eta", {total.eta[0], total.eta[1]}},
                 {"gain_checked", checked},
                 {"gain_violations", violations},
                 {"worst_gain_margin", std::isfinite(worst) ? worst : 0.0},
                 {"resampled", resampled}};
    return t;
}

// ------------------------------------------------------------------- cases

struct CasesOutcome {
    CycleCensus census;
    PsiCheck psi;
    ChartCheck chart;
    std::size_t orbits = 0;
    std::size_t resampled = 0;
};

inline CasesOutcome cases_census(const ExperimentConfig& c)
{
    const MassModel m = c.mass_model();
    const Section sec = parse_section(c.section);
    const bool special = m.special();
    std::optional<WideWedge> ww;
    std::optional<TriangleChart> chart;
    if (special) {
        ww = unfold(m);
        chart = triangle_chart(m);
    }
    struct Orbit {
        std::vector<CycleRecord> cycles;
        ChartCheck chart;
        int resampled = 0;
    };
    CasesOutcome out;
    const int batch = 64;
    int empty_batches = 0;
    for (int start = 0; out.census.total < static_cast<std::size_t>(c.cycles); start += batch) {
        if (empty_batches > 16)
            throw BudgetExhausted("cases: orbits produce no complete floor-to-floor cycles");
        std::vector<Orbit> os(batch);
        parallel_for(batch, c.threads, [&](int j) {
            const int i = start + j;
            Orbit& o = os[j];
            o = with_resampling(c, i, o.resampled, [&](Rng& rng) {
                Orbit r;
                const PhaseState x = sample_phase_point(m, c.energy, sec, rng);
                for (const OrbitLog& log : policy_orbits(m, x, c.events, c.singularity)) {
                    auto cyc = extract_cycles(m, log);
                    r.cycles.insert(r.cycles.end(), cyc.begin(), cyc.end());
                    bool singular = false;
                    for (const LogEntry& e : log.entries)
                        singular = singular || is_singular(e.kind);
                    if (special && !singular) {
                        const ChartCheck cc = chart_check(*ww, unfold_trajectory(*ww, log), *chart);
                        r.chart.checked += cc.checked;
                        r.chart.mismatches += cc.mismatches;
                        r.chart.max_offset = std::max(r.chart.max_offset, cc.max_offset);
                    }
                }
                return r;
            });
        });
        const std::size_t before = out.census.total;
        for (Orbit& o : os) {
            if (out.census.total >= static_cast<std::size_t>(c.cycles))
                break;
            ++out.orbits;
            out.resampled += o.resampled;
            out.chart.checked += o.chart.checked;
            out.chart.mismatches += o.chart.mismatches;
            out.chart.max_offset = std::max(out.chart.max_offset, o.chart.max_offset);
            for (const CycleRecord& r : o.cycles) {
                if (out.census.total >= static_cast<std::size_t>(c.cycles))
                    break;
                out.census.add(r);
                if (r.label == CycleCase::I)
                    psi_check(m, r, out.psi);
            }
        }
        empty_batches = out.census.total == before ? empty_batches + 1 : 0;
    }
    if (!special) {
        out.psi.skipped = true;
        out.psi.diagnostic = "psi check needs special masses, got " + m.str();
    }
    return out;
}

inline ResultTable run_cases(const ExperimentConfig& c)
{
    const CasesOutcome o = cases_census(c);
    ResultTable t = make_table(c, {"case", "count", "fraction"});
    for (int k = 0; k < 6; ++k) {
        const auto cc = static_cast<CycleCase>(k);
        t.add_row({std::string(to_string(cc)), std::int64_t(o.census.count(cc)),
                   double(o.census.count(cc)) / o.census.total});
    }
    const std::size_t four = o.census.count(CycleCase::I) + o.census.count(CycleCase::II) +
                             o.census.count(CycleCase::III) + o.census.count(CycleCase::IV);
    nlohmann::json others = nlohmann::json::array();
    for (const auto& s : o.census.other_examples)
        others.push_back(sequence_string(s));
    t.summary = {{"cycles", o.census.total},
                 {"orbits", o.orbits},
                 {"four_cases_fraction", double(four) / o.census.total},
                 {"all_ball_cycles", o.census.all_balls},
                 {"all_ball_other", o.census.all_balls_other},
                 {"other_examples", others},
                 {"psi_skipped", o.psi.skipped},
                 {"psi_diagnostic", o.psi.diagnostic},
                 {"psi_checked", o.psi.checked},
                 {"psi_min", o.psi.checked ? o.psi.min_angle : 0.0},
                 {"psi_below_pi_over_6", o.psi.below},
                 {"chart_checked", o.chart.checked},
                 {"chart_mismatches", o.chart.mismatches},
                 {"resampled", o.resampled}};
    return t;
}

// ------------------------------------------------------------ wedge-report

inline ResultTable run_wedge_report(const ExperimentConfig& c)
{
    const MassModel m = c.mass_model();
    const WedgeFrame f = wedge_frame(m);
    const SimplicityReport s = is_simple(f, c.tolerance);
    ResultTable t = make_table(c, {"m1", "m2", "m3", "h12", "h13", "h23", "alpha1", "alpha2", "beta1", "beta2",
                                   "simple", "simplicity_residual", "dihedral_cos", "special_residual", "special",
                                   "wide", "max_g_inner"});
    double max_g = 0.0;
    bool wide = false;
    if (m.special()) {
        const WideWedge ww = unfold(m);
        wide = is_wide(ww);
        max_g = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < 3; ++i)
            for (int j = i + 1; j < 3; ++j)
                max_g = std::max(max_g, ww.g[i].dot(ww.g[j]));
    }
    t.add_row({m.m(0), m.m(1), m.m(2), s.e12, s.e13, s.e23, f.alpha1, f.alpha2, f.beta1, f.beta2,
               std::int64_t(s.simple), s.product_residual, dihedral_angle(m), special_mass_residual(m),
               std::int64_t(m.special()), std::int64_t(wide), max_g});
    t.summary = {{"dihedral_cos", dihedral_angle(m)}, {"simple", s.simple}, {"special", m.special()}, {"wide", wide}};
    return t;
}

// ---------------------------------------------------------------- lyapunov

inline ResultTable run_lyapunov(const ExperimentConfig& c)
{
    const MassModel m = c.mass_model();
    const Section sec = parse_section(c.section);
    std::vector<double> ex(c.orbits);
    std::vector<int> res(c.orbits, 0);
    parallel_for(c.orbits, c.threads, [&](int i) {
        ex[i] = with_resampling(c, i, res[i], [&](Rng& rng) {
            return lyapunov_orbit(m, sample_phase_point(m, c.energy, sec, rng), c.collisions, rng).exponent;
        });
    });
    std::size_t resampled = 0;
    for (int r : res)
        resampled += r;
    const LyapunovEstimate e = summarize_lyapunov(ex, resampled);
    ResultTable t = make_table(c, {"orbit", "exponent"});
    for (int i = 0; i < c.orbits; ++i)
        t.add_row({std::int64_t(i), ex[i]});
    t.summary = {{"mean", e.mean},
                 {"stderr", e.stderr_},
                 {"orbits", e.orbits},
                 {"collisions", c.collisions},
                 {"separation_sigmas", e.stderr_ > 0 ? e.mean / e.stderr_ : 0.0},
                 {"resampled", e.resampled}};
    return t;
}

// --------------------------------------------------------------- foldcheck

inline ResultTable run_foldcheck(const ExperimentConfig& c)
{
    const MassModel m = c.mass_model();
    if (!m.special())
        throw ConfigError("foldcheck needs special masses, got " + m.str());
    const WideWedge ww = unfold(m);
    const Section sec = parse_section(c.section);
    std::vector<FoldCheckReport> rep(c.orbits);
    std::vector<double> roundtrip(c.orbits, 0.0);
    parallel_for(c.orbits, c.threads, [&](int i) {
        Rng rng(c.seed, static_cast<std::uint64_t>(i));
        const PhaseState x = sample_phase_point(m, c.energy, sec, rng);
        rep[i] = fold_check(ww, x, c.events);
        const OrbitLog log = simulate(m, x, c.events, BranchPolicy::First);
        bool singular = false;
        for (const LogEntry& e : log.entries)
            singular = singular || is_singular(e.kind);
        if (!singular) {
            const auto folded = fold_trajectory(ww, unfold_trajectory(ww, log));
            for (std::size_t k = 0; k < log.entries.size(); ++k) {
                const PhaseState& s = log.entries[k].state;
                roundtrip[i] = std::max(roundtrip[i], ((folded[k + 1].q - s.q).norm() + (folded[k + 1].v - s.v).norm()) /
                                                          (1.0 + s.q.norm() + s.v.norm()));
            }
        }
    });
    ResultTable t = make_table(c, {"orbit", "events", "skipped", "kind_mismatches", "max_state_error",
                                   "max_time_error", "roundtrip_error"});
    std::int64_t events = 0, skipped = 0, mism = 0;
    double se = 0.0, te = 0.0, rt = 0.0;
    for (int i = 0; i < c.orbits; ++i) {
        const auto& r = rep[i];
        t.add_row({std::int64_t(i), std::int64_t(r.events), std::int64_t(r.skipped), std::int64_t(r.kind_mismatches),
                   r.max_state_error, r.max_time_error, roundtrip[i]});
        events += r.events;
        skipped += r.skipped;
        mism += r.kind_mismatches;
        se = std::max(se, r.max_state_error);
        te = std::max(te, r.max_time_error);
        rt = std::max(rt, roundtrip[i]);
    }
    t.summary = {{"events", events},
                 {"skipped", skipped},
                 {"kind_mismatches", mism},
                 {"max_state_error", se},
                 {"max_time_error", te},
                 {"max_roundtrip_error", rt}};
    return t;
}

// ---------------------------------------------------------------- dispatch

inline ResultTable run(const ExperimentConfig& c)
{
    validate(c);
    const std::string& e = c.experiment;
    if (e == "growth")
        return run_growth(c);
    if (e == "sigma")
        return run_sigma(c);
    if (e == "ansatz")
        return run_ansatz(c);
    if (e == "align-census")
        return run_align_census(c);
    if (e == "lambda")
        return run_lambda(c);
    if (e == "cases")
        return run_cases(c);
    if (e == "wedge-report")
        return run_wedge_report(c);
    if (e == "lyapunov")
        return run_lyapunov(c);
    if (e == "foldcheck")
        return run_foldcheck(c);
    throw ConfigError("unknown experiment '" + e + "'");
}

} // namespace wedgefall::experiments
