#pragma once

#include "gridfold/network.hpp"

#include <filesystem>
#include <map>
#include <vector>

namespace gridfold {

/// Provenance of a reduced line's electrical parameters: a leaf names an
/// original line; series/parallel nodes record how constituents were combined.
struct LineComposition {
    enum class Kind { leaf, series, parallel };
    Kind kind = Kind::leaf;
    std::string line_id;                 // leaf only
    std::vector<LineComposition> parts;  // series/parallel only

    static LineComposition leaf(std::string id);
    static LineComposition series(std::vector<LineComposition> parts);
    static LineComposition parallel(std::vector<LineComposition> parts);

    /// Original line ids in composition order (pair-line constituents precede
    /// the re-attached outer line for series merges).
    std::vector<std::string> flatten() const;

    /// Recomputes (r, x) bottom-up from per-original-line impedances.
    std::pair<double, double> evaluate(
        const std::map<std::string, std::pair<double, double>>& original_rx) const;

    bool operator==(const LineComposition& other) const;
};

struct MergeMap {
    // Original bus id -> reduced bus id. Total over original buses.
    std::map<std::string, std::string> bus_map;
    // Reduced line id -> composition. Only lines that absorbed others appear;
    // identity-carried lines and transformers are absent.
    std::map<std::string, LineComposition> line_composition;
    // Original line ids with no reduced counterpart, sorted.
    std::vector<std::string> removed_lines;
    // Element id -> reduced bus id, total per kind.
    std::map<std::string, std::string> generator_bus;
    std::map<std::string, std::string> storage_bus;
    std::map<std::string, std::string> load_bus;
    std::map<std::string, std::string> candidate_bus;

    bool operator==(const MergeMap& other) const;
};

MergeMap load_merge_map(const std::filesystem::path& path);
void save_merge_map(const MergeMap& mm, const std::filesystem::path& path);

} // namespace gridfold
