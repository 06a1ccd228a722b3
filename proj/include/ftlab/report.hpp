// Copyright 2026 The ftlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace ftlab::report {

inline constexpr const char *kToolVersion = "0.1.0";

enum class Format { Csv, Json };

inline Format parse_format(const std::string &s) {
    if (s == "csv") return Format::Csv;
    if (s == "json") return Format::Json;
    throw std::invalid_argument("unknown format '" + s + "'");
}

struct RunManifest {
    std::string command;
    std::map<std::string, std::string> parameters;
    std::uint64_t seed = 0;
    std::string tool_version = kToolVersion;

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["command"] = command;
        nlohmann::ordered_json params = nlohmann::ordered_json::object();
        for (const auto &[k, v] : parameters) params[k] = v;
        j["parameters"] = params;
        j["seed"] = seed;
        j["tool_version"] = tool_version;
        return j;
    }
};

/// 17 significant digits: exact round trip for doubles.
inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row) {
        if (row.size() != columns.size()) throw std::logic_error("row width does not match the header");
        rows.push_back(std::move(row));
    }
};

/// A result that can be rendered either way.
struct Report {
    RunManifest manifest;
    Table table;
    nlohmann::ordered_json result = nlohmann::ordered_json::object();
};

inline std::string render_csv(const Report &r) {
    std::string out = "# manifest: " + r.manifest.to_json().dump() + "\n";
    for (std::size_t i = 0; i < r.table.columns.size(); ++i) {
        out += (i ? "," : "") + r.table.columns[i];
    }
    out += "\n";
    for (const auto &row : r.table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + row[i];
        out += "\n";
    }
    return out;
}

inline std::string render_json(const Report &r) {
    nlohmann::ordered_json j;
    j["manifest"] = r.manifest.to_json();
    j["result"] = r.result;
    return j.dump(2) + "\n";
}

inline std::string render(const Report &r, Format f) { return f == Format::Csv ? render_csv(r) : render_json(r); }

/// "-" writes to stdout. Throws std::runtime_error when the path is not writable.
inline void write_output(const std::string &path, const std::string &content) {
    if (path == "-" || path.empty()) {
        std::cout << content << std::flush;
        return;
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open output file '" + path + "'");
    f << content;
    f.flush();
    if (!f) throw std::runtime_error("failed writing output file '" + path + "'");
}

inline void emit_report(const Report &r, Format f, const std::string &path) { write_output(path, render(r, f)); }

}  // namespace ftlab::report
