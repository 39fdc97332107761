#pragma once

#include "gridfold/network.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <utility>
#include <vector>

namespace gridfold {

/// One representative 24-hour day.
struct ScenarioDay {
    std::string id;
    double probability = 0.0; // in (0, 1], sums to 1 across a set
    std::map<std::string, std::array<double, 24>> availability;     // availability_key -> fraction
    std::map<std::string, std::array<double, 24>> load_multiplier;  // profile_key -> fraction
    std::map<std::string, double> hydro_budget_mwh;                 // generator id -> MWh/day

    bool operator==(const ScenarioDay&) const = default;
};

/// Loads `manifest` + day_<id>.tsv files. Probabilities must sum to 1 within
/// 1e-6 (then normalized exactly); every hourly key must cover hours 0..23.
std::vector<ScenarioDay> load_scenarios(const std::filesystem::path& dir);

void save_scenarios(std::span<const ScenarioDay> days, const std::filesystem::path& dir);

/// Knobs for the synthetic instance generator. Defaults give a meshed,
/// geo-clustered system with radial spurs whose reduction behavior is easy to
/// reason about (clusters far apart relative to their radius).
struct SynthKnobs {
    int n_clusters = 0;              // 0 = derive from bus count
    double cluster_radius_km = 2.0;  // buses scatter within this radius
    double cluster_spacing_km = 120.0;
    int candidates_per_cluster = 2;
    bool integer_candidates = true;  // include unit-sized techs (kept few for oracle use)
    int max_integer_units = 3;
    bool include_storage = true;
    bool include_transformers = false; // adds transformer-isolated leaf nodes
    double reinforcible_fraction = 0.4;
    double load_scale = 1.0;
};

/// Deterministic-by-seed network + scenario set. Existing generation covers
/// roughly 80% of system peak; availability is keyed per (tech, cluster) so
/// merging inside a cluster loses no availability information.
std::pair<Network, std::vector<ScenarioDay>> synth_instance(std::uint64_t seed, int n_buses,
                                                            int n_days,
                                                            const SynthKnobs& knobs = {});

} // namespace gridfold
