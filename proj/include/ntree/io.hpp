#pragma once

#include <cstdio>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ntree/errors.hpp"
#include "ntree/maze.hpp"
#include "ntree/walk.hpp"

namespace ntree {

inline constexpr int kSchemaVersion = 1;

// --- stable number formatting ---------------------------------------------

// Fixed 12-significant-digit shortest form; identical bytes for identical
// doubles, '.' decimal separator regardless of locale.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline std::string format_int(std::int64_t v) { return std::to_string(v); }

// --- tabular output ------------------------------------------------------

// Typed table with CSV and JSON renderings. CSV: header row, '.' decimal,
// '\n' line endings, no quoting (all fields numeric or simple tokens).
// JSON: {schema_version, rows: [{column: value, ...}]}.
class Table {
public:
    using Cell = std::variant<std::int64_t, double, std::string>;

    explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_row(std::vector<Cell> cells) { rows_.push_back(std::move(cells)); }

    std::string csv() const {
        std::string out = join_header();
        for (const auto& r : rows_) {
            out += '\n';
            for (std::size_t i = 0; i < r.size(); ++i) {
                if (i) out += ',';
                out += cell_text(r[i]);
            }
        }
        out += '\n';
        return out;
    }

    std::string json() const {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& r : rows_) {
            nlohmann::json row;
            for (std::size_t i = 0; i < r.size(); ++i)
                std::visit([&](const auto& v) { row[header_[i]] = v; }, r[i]);
            rows.push_back(std::move(row));
        }
        nlohmann::json j{{"schema_version", kSchemaVersion}, {"rows", rows}};
        return j.dump(2) + "\n";
    }

    std::string render(const std::string& format) const {
        if (format == "csv") return csv();
        if (format == "json") return json();
        throw ConfigError("unknown format: '" + format + "'");
    }

private:
    static std::string cell_text(const Cell& c) {
        if (std::holds_alternative<std::int64_t>(c))
            return format_int(std::get<std::int64_t>(c));
        if (std::holds_alternative<double>(c))
            return format_double(std::get<double>(c));
        return std::get<std::string>(c);
    }
    std::string join_header() const {
        std::string line;
        for (std::size_t i = 0; i < header_.size(); ++i) {
            if (i) line += ',';
            line += header_[i];
        }
        return line;
    }
    std::vector<std::string> header_;
    std::vector<std::vector<Cell>> rows_;
};

// Write to a file, or to stdout when the path is empty or "-".
inline void write_text(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open output path: " + path);
    out << content;
    if (!out) throw IoError("write failed: " + path);
}

// --- binary state snapshots ------------------------------------------------

// 16-byte header {magic, N, M, E} followed by the raw amplitude doubles.
inline constexpr std::uint32_t kSnapshotMagic = 0x4e545257;  // "NTRW"

inline void save_state(const std::string& path, const TreeMaze& maze,
                       const WalkState& state) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open snapshot path: " + path);
    const std::uint32_t header[4] = {
        kSnapshotMagic, static_cast<std::uint32_t>(maze.branching()),
        static_cast<std::uint32_t>(maze.depth()),
        static_cast<std::uint32_t>(maze.live_edge_count())};
    out.write(reinterpret_cast<const char*>(header), sizeof(header));
    out.write(reinterpret_cast<const char*>(state.amp.data()),
              static_cast<std::streamsize>(state.amp.size() * sizeof(double)));
    if (!out) throw IoError("snapshot write failed: " + path);
}

inline WalkState load_state(const std::string& path, const TreeMaze& maze) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open snapshot path: " + path);
    std::uint32_t header[4] = {};
    in.read(reinterpret_cast<char*>(header), sizeof(header));
    if (!in || header[0] != kSnapshotMagic)
        throw IoError("not a state snapshot: " + path);
    if (header[1] != static_cast<std::uint32_t>(maze.branching()) ||
        header[2] != static_cast<std::uint32_t>(maze.depth()) ||
        header[3] != static_cast<std::uint32_t>(maze.live_edge_count()))
        throw InvalidState("snapshot does not match this maze");
    WalkState state;
    state.amp.resize(2 * static_cast<std::size_t>(header[3]));
    in.read(reinterpret_cast<char*>(state.amp.data()),
            static_cast<std::streamsize>(state.amp.size() * sizeof(double)));
    if (!in) throw IoError("snapshot truncated: " + path);
    return state;
}

// --- maze descriptor -----------------------------------------------------

inline nlohmann::json maze_to_json(const TreeMaze& maze) {
    nlohmann::json j{{"n", maze.branching()},
                     {"m", maze.depth()},
                     {"f_leaf", maze.f_leaf()}};
    if (!maze.is_full()) j["frozen_root"] = maze.live_top();
    return j;
}

inline TreeMaze maze_from_json(const nlohmann::json& j) {
    TreeMaze maze(j.at("n").get<int>(), j.at("m").get<int>(),
                  j.at("f_leaf").get<std::int64_t>());
    if (j.contains("frozen_root")) {
        const NodeId top = j.at("frozen_root").get<NodeId>();
        if (top == 1) return maze;
        return maze.freeze_below(Edge{top});
    }
    return maze;
}

// --- run configuration ------------------------------------------------

struct Range {
    int lo = 0;
    int hi = 0;
    bool set() const { return hi >= lo && hi > 0; }
};

// A fully deterministic description of one CLI run; identical configs give
// byte-identical outputs.
struct RunConfig {
    std::string command;
    int n = 2;
    int m = 4;
    Range n_range;
    Range m_range;
    std::int64_t f_leaf = -1;  // -1 = random under `seed`
    std::uint64_t seed = 1;
    std::int64_t runs = 1000;
    std::int64_t steps = 0;  // 0 = auto (4x the scheduled peak)
    std::string out;         // empty = stdout
    std::string format;  // "csv", "json", or empty = the command's native format
    int threads = 1;
    std::vector<std::string> algorithms;  // empty = all
};

inline Range parse_range(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos)
        throw ConfigError("range must look like LO:HI, got '" + text + "'");
    try {
        Range r{std::stoi(text.substr(0, colon)), std::stoi(text.substr(colon + 1))};
        if (r.hi < r.lo) throw ConfigError("range upper bound below lower: " + text);
        return r;
    } catch (const std::logic_error&) {
        throw ConfigError("cannot parse range '" + text + "'");
    }
}

inline RunConfig config_from_json(const nlohmann::json& j) {
    RunConfig cfg;
    cfg.command = j.value("command", "");
    cfg.n = j.value("n", cfg.n);
    cfg.m = j.value("m", cfg.m);
    if (j.contains("n_range"))
        cfg.n_range = {j["n_range"].at(0).get<int>(), j["n_range"].at(1).get<int>()};
    if (j.contains("m_range"))
        cfg.m_range = {j["m_range"].at(0).get<int>(), j["m_range"].at(1).get<int>()};
    if (j.contains("f_leaf")) {
        if (j["f_leaf"].is_string()) {
            if (j["f_leaf"].get<std::string>() != "random")
                throw ConfigError("f_leaf must be an index or \"random\"");
            cfg.f_leaf = -1;
        } else {
            cfg.f_leaf = j["f_leaf"].get<std::int64_t>();
        }
    }
    cfg.seed = j.value("seed", cfg.seed);
    cfg.runs = j.value("runs", cfg.runs);
    cfg.steps = j.value("steps", cfg.steps);
    cfg.out = j.value("out", cfg.out);
    cfg.format = j.value("format", cfg.format);
    cfg.threads = j.value("threads", cfg.threads);
    if (j.contains("algorithms"))
        cfg.algorithms = j["algorithms"].get<std::vector<std::string>>();
    return cfg;
}

inline RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config file is not valid JSON: " + std::string(e.what()));
    }
    try {
        return config_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("bad config field: " + std::string(e.what()));
    }
}

}  // namespace ntree
