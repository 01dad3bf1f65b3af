#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>
#include <toml.hpp>

#include "wedgefall/masses.hpp"

namespace wedgefall::experiments {

inline const std::vector<std::string>& experiment_names()
{
    static const std::vector<std::string> names = {"growth", "sigma",    "ansatz",   "align-census", "lambda",
                                                   "cases",  "wedge-report", "lyapunov", "foldcheck"};
    return names;
}

enum class SingularityPolicy { BranchBoth, AbortResample, PickFirst };

inline const char* to_string(SingularityPolicy p)
{
    switch (p) {
    case SingularityPolicy::BranchBoth: return "branch-both";
    case SingularityPolicy::AbortResample: return "abort-resample";
    case SingularityPolicy::PickFirst: return "pick-first";
    }
    return "?";
}

inline SingularityPolicy parse_policy(const std::string& s)
{
    if (s == "branch-both")
        return SingularityPolicy::BranchBoth;
    if (s == "abort-resample")
        return SingularityPolicy::AbortResample;
    if (s == "pick-first")
        return SingularityPolicy::PickFirst;
    throw ConfigError("unknown singularity policy '" + s + "'");
}

struct ExperimentConfig {
    std::string experiment;
    std::array<double, 3> masses{3.0, 2.0, 1.0};
    std::optional<std::array<double, 2>> special; // solve m3 from (m1, m2)
    double energy = 1.0;
    std::uint64_t seed = 1;

    int samples = 1000;
    int orbits = 100;
    int horizon = 300;     // tangent horizon N
    int events = 1000;     // events per simulated orbit
    int vectors = 20;      // closed-cone vectors per sample (includes the 4 Lagrangian basis vectors)
    int cycles = 100000;
    int collisions = 10000;
    int n_max = 20;        // sigma horizon
    double threshold = 1e3;
    double theta_min = 1e-3;
    double tolerance = 1e-12;
    std::string manifold = "S12-";
    std::string section = "M1+";
    SingularityPolicy singularity = SingularityPolicy::AbortResample;
    int max_resample = 100;

    // output, not part of the provenance hash
    int threads = 0;
    std::string out = ".";
    std::string format = "csv";
    bool chart = false;

    MassModel mass_model() const
    {
        if (special)
            return special_masses((*special)[0], (*special)[1]);
        return MassModel(masses[0], masses[1], masses[2]);
    }
};

// Everything that affects results, with sorted keys.
inline nlohmann::json canonical_json(const ExperimentConfig& c)
{
    nlohmann::json j;
    j["experiment"] = c.experiment;
    const MassModel m = c.mass_model();
    j["masses"] = {m.m(0), m.m(1), m.m(2)};
    j["energy"] = c.energy;
    j["seed"] = c.seed;
    j["samples"] = c.samples;
    j["orbits"] = c.orbits;
    j["horizon"] = c.horizon;
    j["events"] = c.events;
    j["vectors"] = c.vectors;
    j["cycles"] = c.cycles;
    j["collisions"] = c.collisions;
    j["n_max"] = c.n_max;
    j["threshold"] = c.threshold;
    j["theta_min"] = c.theta_min;
    j["tolerance"] = c.tolerance;
    j["manifold"] = c.manifold;
    j["section"] = c.section;
    j["singularity"] = to_string(c.singularity);
    j["max_resample"] = c.max_resample;
    return j;
}

inline std::uint64_t fnv1a(const std::string& s)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string config_hash(const ExperimentConfig& c)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canonical_json(c).dump())));
    return buf;
}

inline void validate(const ExperimentConfig& c)
{
    bool known = false;
    for (const auto& n : experiment_names())
        known = known || n == c.experiment;
    if (!known)
        throw ConfigError("unknown experiment '" + c.experiment + "'");
    try {
        (void)c.mass_model();
    }
    catch (const InvalidMass& e) {
        throw ConfigError(e.what());
    }
    if (!(c.energy > 0.0) || !std::isfinite(c.energy))
        throw ConfigError("energy must be positive");
    for (auto [name, v] : {std::pair{"samples", c.samples}, {"orbits", c.orbits}, {"horizon", c.horizon},
                           {"events", c.events}, {"cycles", c.cycles}, {"collisions", c.collisions},
                           {"n_max", c.n_max}, {"max_resample", c.max_resample}})
        if (v <= 0)
            throw ConfigError(std::string(name) + " must be positive");
    if (c.vectors < 4)
        throw ConfigError("vectors must be at least 4 (the Lagrangian bases)");
    if (!(c.threshold > 0.0))
        throw ConfigError("threshold must be positive");
    if (!(c.theta_min >= 0.0))
        throw ConfigError("theta_min must be non-negative");
    if (!(c.tolerance >= 0.0))
        throw ConfigError("tolerance must be non-negative");
    if (c.threads < 0)
        throw ConfigError("threads must be non-negative");
    if (c.format != "csv" && c.format != "json")
        throw ConfigError("format must be csv or json");
    static const std::vector<std::string> manifolds = {"S12-", "S31-", "S12+", "S31+"};
    if (std::find(manifolds.begin(), manifolds.end(), c.manifold) == manifolds.end())
        throw ConfigError("unknown manifold '" + c.manifold + "'");
    static const std::vector<std::string> sections = {"M1+", "M2+", "M3+", "interior"};
    if (std::find(sections.begin(), sections.end(), c.section) == sections.end())
        throw ConfigError("unknown section '" + c.section + "'");
}

namespace detail {

template <class T>
void read_key(const toml::table& t, const char* key, T& out)
{
    const toml::node* n = t.get(key);
    if (!n)
        return;
    if constexpr (std::is_same_v<T, std::string>) {
        auto v = n->value<std::string>();
        if (!v)
            throw ConfigError(std::string("config key '") + key + "' must be a string");
        out = *v;
    }
    else if constexpr (std::is_same_v<T, bool>) {
        auto v = n->value<bool>();
        if (!v)
            throw ConfigError(std::string("config key '") + key + "' must be a boolean");
        out = *v;
    }
    else if constexpr (std::is_floating_point_v<T>) {
        auto v = n->value<double>();
        if (!v)
            throw ConfigError(std::string("config key '") + key + "' must be a number");
        out = *v;
    }
    else {
        auto v = n->value<std::int64_t>();
        if (!v || *v < 0)
            throw ConfigError(std::string("config key '") + key + "' must be a non-negative integer");
        out = static_cast<T>(*v);
    }
}

template <std::size_t N>
std::array<double, N> read_array(const toml::node& n, const char* key)
{
    const toml::array* a = n.as_array();
    if (!a || a->size() != N)
        throw ConfigError(std::string("config key '") + key + "' must be an array of " + std::to_string(N) +
                          " numbers");
    std::array<double, N> r{};
    for (std::size_t i = 0; i < N; ++i) {
        auto v = (*a)[i].value<double>();
        if (!v)
            throw ConfigError(std::string("config key '") + key + "' must hold numbers");
        r[i] = *v;
    }
    return r;
}

} // namespace detail

// Applies the keys present in a TOML document on top of c.
inline void apply_toml(ExperimentConfig& c, const toml::table& t)
{
    static const std::vector<std::string> known = {
        "experiment", "masses", "special", "energy",    "seed",      "samples",   "orbits",    "horizon",
        "events",     "vectors", "cycles", "collisions", "n_max",    "threshold", "theta_min", "tolerance",
        "manifold",   "section", "singularity", "max_resample", "threads", "out", "format", "chart"};
    for (const auto& [k, v] : t)
        if (std::find(known.begin(), known.end(), std::string(k.str())) == known.end())
            throw ConfigError("unknown config key '" + std::string(k.str()) + "'");
    detail::read_key(t, "experiment", c.experiment);
    if (const toml::node* n = t.get("masses")) {
        c.masses = detail::read_array<3>(*n, "masses");
        c.special.reset();
    }
    if (const toml::node* n = t.get("special"))
        c.special = detail::read_array<2>(*n, "special");
    detail::read_key(t, "energy", c.energy);
    detail::read_key(t, "seed", c.seed);
    detail::read_key(t, "samples", c.samples);
    detail::read_key(t, "orbits", c.orbits);
    detail::read_key(t, "horizon", c.horizon);
    detail::read_key(t, "events", c.events);
    detail::read_key(t, "vectors", c.vectors);
    detail::read_key(t, "cycles", c.cycles);
    detail::read_key(t, "collisions", c.collisions);
    detail::read_key(t, "n_max", c.n_max);
    detail::read_key(t, "threshold", c.threshold);
    detail::read_key(t, "theta_min", c.theta_min);
    detail::read_key(t, "tolerance", c.tolerance);
    detail::read_key(t, "manifold", c.manifold);
    detail::read_key(t, "section", c.section);
    std::string pol;
    detail::read_key(t, "singularity", pol);
    if (!pol.empty())
        c.singularity = parse_policy(pol);
    detail::read_key(t, "max_resample", c.max_resample);
    detail::read_key(t, "threads", c.threads);
    detail::read_key(t, "out", c.out);
    detail::read_key(t, "format", c.format);
    detail::read_key(t, "chart", c.chart);
}

inline void apply_toml_text(ExperimentConfig& c, std::string_view text, std::string_view source = "config")
{
    try {
        apply_toml(c, toml::parse(text, source));
    }
    catch (const toml::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + std::string(e.description()));
    }
}

inline void apply_toml_file(ExperimentConfig& c, const std::string& path)
{
    try {
        apply_toml(c, toml::parse_file(path));
    }
    catch (const toml::parse_error& e) {
        throw ConfigError("config parse error in " + path + ": " + std::string(e.description()));
    }
}

} // namespace wedgefall::experiments
