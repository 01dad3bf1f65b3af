#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "wedgefall/errors.hpp"

namespace wedgefall::experiments {

inline constexpr const char* kCodeVersion = "wedgefall 0.1.0";

using Cell = std::variant<std::int64_t, double, std::string>;

struct ResultTable {
    std::string experiment;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    nlohmann::json summary = nlohmann::json::object();
    nlohmann::json provenance = nlohmann::json::object();

    void add_row(std::vector<Cell> row)
    {
        if (row.size() != columns.size())
            throw Error("ResultTable(" + experiment + "): row has " + std::to_string(row.size()) + " cells, schema has " +
                        std::to_string(columns.size()));
        for (const Cell& c : row)
            if (const double* d = std::get_if<double>(&c); d && !std::isfinite(*d))
                throw Error("ResultTable(" + experiment + "): non-finite value in a numeric column");
        rows.push_back(std::move(row));
    }

    bool operator==(const ResultTable& o) const
    {
        return experiment == o.experiment && columns == o.columns && rows == o.rows && summary == o.summary &&
               provenance == o.provenance;
    }
};

inline std::string format_double(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string format_cell(const Cell& c)
{
    if (const auto* i = std::get_if<std::int64_t>(&c))
        return std::to_string(*i);
    if (const auto* d = std::get_if<double>(&c))
        return format_double(*d);
    const std::string& s = std::get<std::string>(c);
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string q = "\"";
    for (char ch : s) {
        if (ch == '"')
            q += '"';
        q += ch;
    }
    return q + "\"";
}

inline void write_csv(std::ostream& os, const ResultTable& t)
{
    for (std::size_t i = 0; i < t.columns.size(); ++i)
        os << (i ? "," : "") << t.columns[i];
    os << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            os << (i ? "," : "") << format_cell(row[i]);
        os << '\n';
    }
}

inline nlohmann::json cell_json(const Cell& c)
{
    return std::visit([](const auto& v) { return nlohmann::json(v); }, c);
}

// Doubles are written by the library's shortest round-trip formatter (at most 17 significant digits).
inline nlohmann::json to_json(const ResultTable& t)
{
    nlohmann::json j;
    j["experiment"] = t.experiment;
    j["schema"] = t.columns;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : t.rows) {
        nlohmann::json r = nlohmann::json::array();
        for (const Cell& c : row)
            r.push_back(cell_json(c));
        rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);
    j["summary"] = t.summary;
    j["provenance"] = t.provenance;
    return j;
}

inline ResultTable from_json(const nlohmann::json& j)
{
    ResultTable t;
    try {
        t.experiment = j.at("experiment").get<std::string>();
        t.columns = j.at("schema").get<std::vector<std::string>>();
        for (const auto& r : j.at("rows")) {
            std::vector<Cell> row;
            for (const auto& c : r) {
                if (c.is_number_integer())
                    row.emplace_back(c.get<std::int64_t>());
                else if (c.is_number_float())
                    row.emplace_back(c.get<double>());
                else
                    row.emplace_back(c.get<std::string>());
            }
            t.add_row(std::move(row));
        }
        t.summary = j.at("summary");
        t.provenance = j.at("provenance");
    }
    catch (const nlohmann::json::exception& e) {
        throw Error(std::string("result table JSON: ") + e.what());
    }
    return t;
}

inline void write_file(const std::string& path, const std::string& content)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw Error("cannot open " + path + " for writing");
    f << content;
    if (!f)
        throw Error("write failed for " + path);
}

} // namespace wedgefall::experiments
