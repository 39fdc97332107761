#include "gridfold/merge_map.hpp"

#include <complex>
#include <fstream>
#include <json.hpp>

namespace gridfold {

using ordered_json = nlohmann::ordered_json;

LineComposition LineComposition::leaf(std::string id) {
    LineComposition c;
    c.kind = Kind::leaf;
    c.line_id = std::move(id);
    return c;
}

LineComposition LineComposition::series(std::vector<LineComposition> parts) {
    LineComposition c;
    c.kind = Kind::series;
    c.parts = std::move(parts);
    return c;
}

LineComposition LineComposition::parallel(std::vector<LineComposition> parts) {
    LineComposition c;
    c.kind = Kind::parallel;
    c.parts = std::move(parts);
    return c;
}

std::vector<std::string> LineComposition::flatten() const {
    std::vector<std::string> out;
    if (kind == Kind::leaf) {
        out.push_back(line_id);
        return out;
    }
    for (const auto& p : parts) {
        auto sub = p.flatten();
        out.insert(out.end(), sub.begin(), sub.end());
    }
    return out;
}

std::pair<double, double> LineComposition::evaluate(
    const std::map<std::string, std::pair<double, double>>& original_rx) const {
    switch (kind) {
    case Kind::leaf: {
        auto it = original_rx.find(line_id);
        if (it == original_rx.end())
            throw Error("composition references unknown original line '" + line_id + "'");
        return it->second;
    }
    case Kind::series: {
        double r = 0.0, x = 0.0;
        for (const auto& p : parts) {
            auto [pr, px] = p.evaluate(original_rx);
            r += pr;
            x += px;
        }
        return {r, x};
    }
    case Kind::parallel: {
        std::complex<double> y_sum(0.0, 0.0);
        for (const auto& p : parts) {
            auto [pr, px] = p.evaluate(original_rx);
            y_sum += 1.0 / std::complex<double>(pr, px);
        }
        std::complex<double> z = 1.0 / y_sum;
        return {z.real(), z.imag()};
    }
    }
    throw Error("corrupt composition node");
}

bool LineComposition::operator==(const LineComposition& other) const {
    return kind == other.kind && line_id == other.line_id && parts == other.parts;
}

bool MergeMap::operator==(const MergeMap& other) const {
    return bus_map == other.bus_map && line_composition == other.line_composition &&
           removed_lines == other.removed_lines && generator_bus == other.generator_bus &&
           storage_bus == other.storage_bus && load_bus == other.load_bus &&
           candidate_bus == other.candidate_bus;
}

namespace {

ordered_json comp_to_json(const LineComposition& c) {
    switch (c.kind) {
    case LineComposition::Kind::leaf:
        return c.line_id;
    case LineComposition::Kind::series: {
        ordered_json arr = ordered_json::array();
        for (const auto& p : c.parts) arr.push_back(comp_to_json(p));
        return ordered_json{{"series", std::move(arr)}};
    }
    case LineComposition::Kind::parallel: {
        ordered_json arr = ordered_json::array();
        for (const auto& p : c.parts) arr.push_back(comp_to_json(p));
        return ordered_json{{"parallel", std::move(arr)}};
    }
    }
    throw Error("corrupt composition node");
}

LineComposition comp_from_json(const ordered_json& j, const std::string& origin) {
    if (j.is_string()) return LineComposition::leaf(j.get<std::string>());
    if (j.is_object()) {
        const bool series = j.contains("series");
        const bool parallel = j.contains("parallel");
        if (series == parallel)
            throw Error(origin + ": composition node must have exactly one of 'series'/'parallel'");
        std::vector<LineComposition> parts;
        for (const auto& p : j.at(series ? "series" : "parallel"))
            parts.push_back(comp_from_json(p, origin));
        return series ? LineComposition::series(std::move(parts))
                      : LineComposition::parallel(std::move(parts));
    }
    throw Error(origin + ": composition node must be a string or object");
}

std::map<std::string, std::string> str_map_from_json(const ordered_json& j) {
    std::map<std::string, std::string> out;
    for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = it.value().get<std::string>();
    return out;
}

} // namespace

void save_merge_map(const MergeMap& mm, const std::filesystem::path& path) {
    ordered_json doc;
    doc["format"] = 1;
    doc["bus_map"] = mm.bus_map;
    ordered_json comp = ordered_json::object();
    for (const auto& [id, c] : mm.line_composition) comp[id] = comp_to_json(c);
    doc["line_composition"] = std::move(comp);
    doc["removed_lines"] = mm.removed_lines;
    doc["relocation"] = {{"generators", mm.generator_bus},
                         {"storage", mm.storage_bus},
                         {"loads", mm.load_bus},
                         {"candidates", mm.candidate_bus}};
    std::ofstream out(path);
    if (!out) throw Error("cannot write merge map file '" + path.string() + "'");
    out << doc.dump(2) << "\n";
}

MergeMap load_merge_map(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open merge map file '" + path.string() + "'");
    ordered_json doc;
    try {
        doc = ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(path.string() + ": parse error: " + e.what());
    }
    if (!doc.contains("format") || doc["format"].get<int>() != 1)
        throw Error(path.string() + ": unsupported merge map format (expected format: 1)");
    MergeMap mm;
    mm.bus_map = str_map_from_json(doc.at("bus_map"));
    for (auto it = doc.at("line_composition").begin(); it != doc.at("line_composition").end(); ++it)
        mm.line_composition[it.key()] = comp_from_json(it.value(), path.string());
    mm.removed_lines = doc.at("removed_lines").get<std::vector<std::string>>();
    const auto& rel = doc.at("relocation");
    mm.generator_bus = str_map_from_json(rel.at("generators"));
    mm.storage_bus = str_map_from_json(rel.at("storage"));
    mm.load_bus = str_map_from_json(rel.at("loads"));
    mm.candidate_bus = str_map_from_json(rel.at("candidates"));
    return mm;
}

} // namespace gridfold
