#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "wedgefall/experiments/runners.hpp"

using namespace wedgefall;
using namespace wedgefall::experiments;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitBudget = 3;

template <std::size_t N>
std::array<double, N> parse_list(const std::string& s, const char* what)
{
    std::array<double, N> r{};
    std::stringstream ss(s);
    std::string item;
    std::size_t k = 0;
    while (std::getline(ss, item, ',')) {
        if (k >= N)
            throw ConfigError(std::string(what) + " takes " + std::to_string(N) + " comma-separated numbers");
        try {
            std::size_t used = 0;
            r[k++] = std::stod(item, &used);
            if (used != item.size())
                throw std::invalid_argument(item);
        }
        catch (const std::logic_error&) {
            throw ConfigError(std::string(what) + ": cannot parse '" + item + "'");
        }
    }
    if (k != N)
        throw ConfigError(std::string(what) + " takes " + std::to_string(N) + " comma-separated numbers");
    return r;
}

void write_chart(const ExperimentConfig& c, const std::filesystem::path& dir)
{
    const MassModel m = c.mass_model();
    if (!m.special()) {
        std::cerr << "chart skipped: masses " << m.str() << " are not special\n";
        return;
    }
    Rng rng(c.seed, 0);
    const PhaseState x = sample_phase_point(m, c.energy, parse_section(c.section), rng);
    const OrbitLog log = simulate(m, x, c.events, BranchPolicy::First);
    std::ofstream f(dir / "chart.csv");
    write_chart_csv(f, m, log, triangle_chart(m));
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Falling balls / wedge experiments"};
    std::string experiment, config_path, masses, special, format, out, manifold, section, singularity;
    std::optional<double> energy, threshold, theta_min, tolerance;
    std::optional<std::uint64_t> seed;
    std::optional<int> samples, orbits, horizon, events, vectors, cycles, collisions, n_max, threads, max_resample;
    bool chart = false;

    std::string names;
    for (const auto& n : experiment_names())
        names += (names.empty() ? "" : ", ") + n;
    app.add_option("experiment", experiment, "one of: " + names);
    app.add_option("--config", config_path, "TOML config file")->check(CLI::ExistingFile);
    auto* mo = app.add_option("--masses", masses, "m1,m2,m3");
    app.add_option("--special", special, "m1,m2 (m3 solved from the special mass condition)")->excludes(mo);
    app.add_option("--energy", energy, "energy c > 0");
    app.add_option("--seed", seed);
    app.add_option("--out", out, "output directory");
    app.add_option("--format", format, "csv or json");
    app.add_option("--samples", samples);
    app.add_option("--orbits", orbits);
    app.add_option("--horizon", horizon, "tangent horizon N");
    app.add_option("--events", events, "events per orbit");
    app.add_option("--vectors", vectors, "closed-cone vectors per sample");
    app.add_option("--cycles", cycles);
    app.add_option("--collisions", collisions, "collisions per Lyapunov orbit");
    app.add_option("--n-max", n_max, "sigma horizon");
    app.add_option("--threshold", threshold, "Q threshold for unboundedness traces");
    app.add_option("--theta-min", theta_min, "approach-difference floor for blocks");
    app.add_option("--tolerance", tolerance);
    app.add_option("--manifold", manifold, "S12-, S31-, S12+ or S31+");
    app.add_option("--section", section, "M1+, M2+, M3+ or interior");
    app.add_option("--singularity", singularity, "branch-both, abort-resample or pick-first");
    app.add_option("--max-resample", max_resample);
    app.add_option("--threads", threads, "0 = hardware concurrency");
    app.add_flag("--chart", chart, "write chart.csv (cases at special masses)");

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    ExperimentConfig c;
    try {
        if (!config_path.empty())
            apply_toml_file(c, config_path);
        if (!experiment.empty())
            c.experiment = experiment;
        if (!masses.empty()) {
            c.masses = parse_list<3>(masses, "--masses");
            c.special.reset();
        }
        if (!special.empty())
            c.special = parse_list<2>(special, "--special");
        if (energy) c.energy = *energy;
        if (seed) c.seed = *seed;
        if (!out.empty()) c.out = out;
        if (!format.empty()) c.format = format;
        if (samples) c.samples = *samples;
        if (orbits) c.orbits = *orbits;
        if (horizon) c.horizon = *horizon;
        if (events) c.events = *events;
        if (vectors) c.vectors = *vectors;
        if (cycles) c.cycles = *cycles;
        if (collisions) c.collisions = *collisions;
        if (n_max) c.n_max = *n_max;
        if (threshold) c.threshold = *threshold;
        if (theta_min) c.theta_min = *theta_min;
        if (tolerance) c.tolerance = *tolerance;
        if (!manifold.empty()) c.manifold = manifold;
        if (!section.empty()) c.section = section;
        if (!singularity.empty()) c.singularity = parse_policy(singularity);
        if (max_resample) c.max_resample = *max_resample;
        if (threads) c.threads = *threads;
        if (chart) c.chart = true;
        validate(c);
    }
    catch (const Error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }

    try {
        const ResultTable t = run(c);
        const std::filesystem::path dir(c.out);
        std::filesystem::create_directories(dir);
        const std::string file = c.experiment + "." + c.format;
        if (c.format == "csv") {
            std::ostringstream os;
            write_csv(os, t);
            write_file((dir / file).string(), os.str());
        }
        else
            write_file((dir / file).string(), to_json(t).dump(2) + "\n");
        nlohmann::json summary = {{"experiment", t.experiment},
                                  {"summary", t.summary},
                                  {"provenance", t.provenance},
                                  {"config", canonical_json(c)},
                                  {"rows", t.rows.size()},
                                  {"output", file}};
        write_file((dir / "summary.json").string(), summary.dump(2) + "\n");
        if (c.chart && c.experiment == "cases")
            write_chart(c, dir);
        std::cout << t.summary.dump() << '\n';
    }
    catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    catch (const BudgetExhausted& e) {
        std::cerr << "budget exhausted: " << e.what() << '\n';
        return kExitBudget;
    }
    catch (const RejectionBudget& e) {
        std::cerr << "budget exhausted: " << e.what() << '\n';
        return kExitBudget;
    }
    catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
