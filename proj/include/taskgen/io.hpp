#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "taskgen/parser.hpp"
#include "taskgen/puzzle.hpp"
#include "taskgen/scoring.hpp"
#include "taskgen/sketch.hpp"

namespace taskgen {

using Json = nlohmann::json;

inline Json delta_to_json(const Delta& d) {
    Json j;
    for (TokenKind a : d.actions) j["actions"].push_back(to_string(a));
    for (Condition b : d.booleans) j["booleans"].push_back(to_string(b));
    for (int it : d.iterators) j["iterators"].push_back(it);
    return j;
}

inline Delta delta_from_json(const Json& j) {
    Delta d;
    for (const auto& a : j.value("actions", Json::array())) {
        const TokenKind k = token_kind_from_string(a.get<std::string>());
        if (!is_action(k)) throw FormatError("'" + to_string(k) + "' is not an action");
        d.actions.insert(k);
    }
    for (const auto& b : j.value("booleans", Json::array()))
        d.booleans.insert(condition_from_string(b.get<std::string>()));
    for (const auto& it : j.value("iterators", Json::array())) {
        const int x = it.get<int>();
        if (x < kMinIterator || x > kMaxIterator) throw FormatError("iterator out of range");
        d.iterators.insert(x);
    }
    return d;
}

inline Json spec_to_json(const TaskSpec& s) {
    Json j;
    j["domain"] = to_string(s.domain);
    j["sketch"] = print_sketch(s.sketch);
    j["size"] = s.size;
    j["grid"] = save_grid(s.puzzleInit);
    j["delta"] = delta_to_json(s.delta);
    return j;
}

/// Reads a spec. "grid" may be replaced by "gridSide" (all-unknown square);
/// a missing "delta" means the domain's full token sets.
inline TaskSpec spec_from_json(const Json& j) {
    TaskSpec s;
    s.domain = domain_from_string(j.at("domain").get<std::string>());
    s.sketch = parse_sketch_text(j.at("sketch").get<std::string>(), s.domain);
    s.size = j.at("size").get<int>();
    if (j.contains("grid")) {
        s.puzzleInit = load_grid(j.at("grid").get<std::string>());
    } else {
        const int side = j.value("gridSide", 16);
        if (side <= 0) throw FormatError("gridSide must be positive");
        s.puzzleInit = Grid(side, side, Cell::Unknown);
    }
    s.delta = j.contains("delta") ? delta_from_json(j.at("delta")) : full_delta(s.domain);
    if (s.size < min_completion_nblock(s.sketch)) throw FormatError("size below the sketch's minimum");
    return s;
}

inline Json task_to_json(const Task& t) {
    Json j;
    j["domain"] = to_string(t.puzzle.domain);
    if (t.puzzle.domain == Domain::HoCMaze) {
        j["maze"] = save_grid(t.puzzle.maze);
    } else {
        j["pregrid"] = save_grid(t.puzzle.pregrid);
        j["postgrid"] = save_grid(t.puzzle.postgrid);
    }
    for (TokenKind k : t.store) j["store"].push_back(to_string(k));
    j["size"] = t.size;
    return j;
}

inline Task task_from_json(const Json& j) {
    Task t;
    t.puzzle.domain = domain_from_string(j.at("domain").get<std::string>());
    if (t.puzzle.domain == Domain::HoCMaze) {
        t.puzzle.maze = load_grid(j.at("maze").get<std::string>());
    } else {
        t.puzzle.pregrid = load_grid(j.at("pregrid").get<std::string>());
        t.puzzle.postgrid = load_grid(j.at("postgrid").get<std::string>());
    }
    for (const auto& k : j.at("store")) t.store.insert(token_kind_from_string(k.get<std::string>()));
    t.size = j.at("size").get<int>();
    return t;
}

inline Json score_to_json(const ScoreReport& r) {
    Json j;
    j["status"] = to_string(r.status);
    j["solved"] = r.solved;
    j["cov"] = r.cov;
    j["nocross"] = r.nocross;
    j["nocut"] = r.nocut;
    j["notred"] = r.notred;
    j["qual"] = r.qual;
    j["cutqual"] = r.cutqual;
    j["indicator"] = r.indicator;
    j["total"] = r.total;
    return j;
}

inline Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path.string());
    Json j;
    try {
        in >> j;
    } catch (const Json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    return j;
}

inline void write_json_file(const std::filesystem::path& path, const Json& j) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write " + path.string());
    out << text;
}

inline TaskSpec load_spec_file(const std::filesystem::path& path) {
    try {
        return spec_from_json(read_json_file(path));
    } catch (const Json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

inline Task load_task_file(const std::filesystem::path& path) {
    try {
        return task_from_json(read_json_file(path));
    } catch (const Json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

}  // namespace taskgen
