#pragma once

#include "gridfold/merge_map.hpp"
#include "gridfold/network.hpp"

#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>

namespace gridfold {

enum class ReductionMode { radial_only, full };

struct ReductionConfig {
    double distance_km = 0.0; // threshold D
    ReductionMode mode = ReductionMode::full;
    bool tighten = false;
};

/// Outcome of the primary-bus priority rules. `rule` records which rule fired
/// (1 substation, 2 previously merged, 3 higher degree, 4 "from" bus).
struct PrimaryChoice {
    std::string primary;
    std::string secondary;
    int rule = 0;
};

/// Applies the merge priority order to the pair (from_bus, to_bus) of the
/// triggering line. `merged` holds buses that already absorbed others.
PrimaryChoice select_primary_bus(const std::string& from_bus, const std::string& to_bus,
                                 const std::set<std::string>& merged, const Network& net);

struct EquivalentBranch {
    double r = 0.0;
    double x = 0.0;
    double rating = 0.0;
};

enum class SeriesRatingRule {
    keep_last, // rating of the final (outer, re-attached) element
    minimum,   // conservative rule for radial chains
};

/// Series composition: r and x add; rating per `rule`. Consecutive elements
/// must share a bus. Throws on an empty chain.
EquivalentBranch series_equivalent(std::span<const Branch> chain, SeriesRatingRule rule);

/// Parallel composition via complex admittance sum; ratings add. All elements
/// must share the same unordered endpoint pair. Throws on an empty group or a
/// member with r = x = 0.
EquivalentBranch parallel_equivalent(std::span<const Branch> group);

/// Appendix algorithm: Part I eliminates short radial lines to fixpoint; in
/// full mode Part II then merges remaining short meshed lines to fixpoint.
/// Lines are processed in ascending (distance, line id) order. Transformers
/// are never collapsed, only re-endpointed, and a bus pair bridged by a
/// transformer is not mergeable.
std::pair<Network, MergeMap> reduce_network(const Network& net, const ReductionConfig& cfg);

/// Caps each candidate's max_build at twice the summed ratings of the
/// original lines incident to the candidate's original bus.
Network tighten_candidates(const Network& reduced, const Network& original, const MergeMap& mm);

struct NetworkStats {
    std::size_t buses = 0;
    std::size_t lines = 0;
    std::size_t transformers = 0;
    std::size_t branches = 0;
    std::optional<double> min_r; // over branches; empty when there are none
    std::optional<double> min_x;
    std::size_t generators = 0;
    std::size_t storage = 0;
    std::size_t loads = 0;
    std::size_t candidates = 0;
};

struct ReductionStats {
    NetworkStats original;
    NetworkStats reduced;

    std::string to_string() const;
};

NetworkStats network_stats(const Network& net);
ReductionStats reduction_stats(const Network& original, const Network& reduced);

} // namespace gridfold
