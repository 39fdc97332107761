#include "gridfold/network.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace gridfold {

const Bus* Network::find_bus(const std::string& id) const {
    for (const auto& b : buses)
        if (b.id == id) return &b;
    return nullptr;
}

const Bus& Network::bus(const std::string& id) const {
    if (const Bus* b = find_bus(id)) return *b;
    throw Error("unknown bus id '" + id + "'");
}

const Branch* Network::find_branch(const std::string& id) const {
    for (const auto& br : branches)
        if (br.id == id) return &br;
    return nullptr;
}

const Candidate* Network::find_candidate(const std::string& id) const {
    for (const auto& c : candidates)
        if (c.id == id) return &c;
    return nullptr;
}

bool operator==(const Bus& a, const Bus& b) {
    return a.id == b.id && a.location.latitude == b.location.latitude &&
           a.location.longitude == b.location.longitude &&
           a.is_substation == b.is_substation && a.base_kv == b.base_kv;
}

bool operator==(const Branch& a, const Branch& b) {
    return a.id == b.id && a.from_bus == b.from_bus && a.to_bus == b.to_bus &&
           a.kind == b.kind && a.r == b.r && a.x == b.x && a.rating == b.rating &&
           a.reinforce_cost == b.reinforce_cost && a.reinforcible == b.reinforcible;
}

bool operator==(const Generator& a, const Generator& b) {
    return a.id == b.id && a.bus == b.bus && a.tech == b.tech && a.capacity == b.capacity &&
           a.variable_cost == b.variable_cost && a.is_renewable == b.is_renewable &&
           a.availability_key == b.availability_key && a.is_hydro_budgeted == b.is_hydro_budgeted;
}

bool operator==(const Storage& a, const Storage& b) {
    return a.id == b.id && a.bus == b.bus && a.power_capacity == b.power_capacity &&
           a.energy_capacity == b.energy_capacity &&
           a.round_trip_efficiency == b.round_trip_efficiency;
}

bool operator==(const Load& a, const Load& b) {
    return a.id == b.id && a.bus == b.bus && a.profile_key == b.profile_key && a.peak == b.peak;
}

bool operator==(const Candidate& a, const Candidate& b) {
    return a.id == b.id && a.bus == b.bus && a.kind == b.kind && a.tech == b.tech &&
           a.unit_size == b.unit_size && a.integrality == b.integrality &&
           a.max_build == b.max_build && a.capex == b.capex &&
           a.variable_cost == b.variable_cost && a.is_renewable == b.is_renewable &&
           a.availability_key == b.availability_key && a.duration_hours == b.duration_hours &&
           a.round_trip_efficiency == b.round_trip_efficiency;
}

bool operator==(const Network& a, const Network& b) {
    return a.name == b.name && a.buses == b.buses && a.branches == b.branches &&
           a.generators == b.generators && a.storage == b.storage && a.loads == b.loads &&
           a.candidates == b.candidates;
}

bool ValidationReport::ok() const { return error_count() == 0; }

std::size_t ValidationReport::error_count() const {
    std::size_t n = 0;
    for (const auto& v : items)
        if (v.severity == Violation::Severity::error) ++n;
    return n;
}

std::string ValidationReport::to_string() const {
    std::ostringstream out;
    for (const auto& v : items) {
        out << (v.severity == Violation::Severity::error ? "error" : "warning");
        out << " [" << v.code << "]: " << v.message << "\n";
    }
    return out.str();
}

bool valid_id(const std::string& id) {
    if (id.empty()) return false;
    for (char c : id) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '_' || c == '.' || c == '-';
        if (!ok) return false;
    }
    return true;
}

int bus_degree(const Network& net, const std::string& id) {
    if (!net.find_bus(id)) throw Error("bus_degree: unknown bus id '" + id + "'");
    int deg = 0;
    for (const auto& br : net.branches) {
        if (br.from_bus == id) ++deg;
        if (br.to_bus == id) ++deg;
    }
    return deg;
}

std::vector<std::string> radial_lines(const Network& net) {
    std::unordered_map<std::string, int> degree;
    for (const auto& b : net.buses) degree[b.id] = 0;
    for (const auto& br : net.branches) {
        degree[br.from_bus]++;
        degree[br.to_bus]++;
    }
    std::vector<std::string> out;
    for (const auto& br : net.branches) {
        if (br.kind != BranchKind::line) continue;
        if (degree[br.from_bus] == 1 || degree[br.to_bus] == 1) out.push_back(br.id);
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

void check_ids_unique(const std::vector<std::string>& ids, const char* kind,
                      ValidationReport& rep) {
    std::unordered_set<std::string> seen;
    for (const auto& id : ids) {
        if (!valid_id(id)) {
            rep.items.push_back({Violation::Severity::error, "bad-id",
                                 std::string(kind) + " id '" + id +
                                     "' is empty or contains characters outside [A-Za-z0-9_.-]"});
        }
        if (!seen.insert(id).second) {
            rep.items.push_back({Violation::Severity::error, "duplicate-id",
                                 std::string("duplicate ") + kind + " id '" + id + "'"});
        }
    }
}

} // namespace

ValidationReport validate_network(const Network& net) {
    ValidationReport rep;
    using S = Violation::Severity;

    std::vector<std::string> ids;
    ids.reserve(net.buses.size());
    for (const auto& b : net.buses) ids.push_back(b.id);
    check_ids_unique(ids, "bus", rep);
    std::unordered_set<std::string> bus_ids(ids.begin(), ids.end());

    for (const auto& b : net.buses) {
        if (!valid_coord(b.location))
            rep.items.push_back({S::error, "bad-coord",
                                 "bus '" + b.id + "' has latitude/longitude outside valid ranges"});
        if (!(b.base_kv > 0.0))
            rep.items.push_back({S::error, "bad-kv", "bus '" + b.id + "' base_kv must be > 0"});
    }

    ids.clear();
    for (const auto& br : net.branches) ids.push_back(br.id);
    check_ids_unique(ids, "branch", rep);

    for (const auto& br : net.branches) {
        if (!bus_ids.count(br.from_bus))
            rep.items.push_back({S::error, "dangling-ref",
                                 "branch '" + br.id + "' references missing bus '" + br.from_bus + "'"});
        if (!bus_ids.count(br.to_bus))
            rep.items.push_back({S::error, "dangling-ref",
                                 "branch '" + br.id + "' references missing bus '" + br.to_bus + "'"});
        if (br.from_bus == br.to_bus)
            rep.items.push_back({S::error, "self-loop",
                                 "branch '" + br.id + "' connects bus '" + br.from_bus + "' to itself"});
        if (!(br.x > 0.0))
            rep.items.push_back({S::error, "nonpositive-x",
                                 "branch '" + br.id + "' reactance x must be > 0"});
        if (br.r < 0.0)
            rep.items.push_back({S::error, "negative-r", "branch '" + br.id + "' resistance r must be >= 0"});
        if (!(br.rating > 0.0))
            rep.items.push_back({S::error, "bad-rating", "branch '" + br.id + "' rating must be > 0 MW"});
        if (br.reinforce_cost < 0.0)
            rep.items.push_back({S::error, "bad-cost", "branch '" + br.id + "' reinforce_cost must be >= 0"});
    }

    ids.clear();
    for (const auto& g : net.generators) ids.push_back(g.id);
    check_ids_unique(ids, "generator", rep);
    for (const auto& g : net.generators) {
        if (!bus_ids.count(g.bus))
            rep.items.push_back({S::error, "dangling-ref",
                                 "generator '" + g.id + "' references missing bus '" + g.bus + "'"});
        if (g.capacity < 0.0)
            rep.items.push_back({S::error, "bad-capacity", "generator '" + g.id + "' capacity must be >= 0"});
        if (g.variable_cost < 0.0)
            rep.items.push_back({S::error, "bad-cost", "generator '" + g.id + "' variable_cost must be >= 0"});
    }

    ids.clear();
    for (const auto& s : net.storage) ids.push_back(s.id);
    check_ids_unique(ids, "storage", rep);
    for (const auto& s : net.storage) {
        if (!bus_ids.count(s.bus))
            rep.items.push_back({S::error, "dangling-ref",
                                 "storage '" + s.id + "' references missing bus '" + s.bus + "'"});
        if (s.power_capacity < 0.0 || s.energy_capacity < 0.0)
            rep.items.push_back({S::error, "bad-capacity",
                                 "storage '" + s.id + "' capacities must be >= 0"});
        if (!(s.round_trip_efficiency > 0.0) || s.round_trip_efficiency > 1.0)
            rep.items.push_back({S::error, "bad-efficiency",
                                 "storage '" + s.id + "' round_trip_efficiency must be in (0, 1]"});
    }

    ids.clear();
    for (const auto& l : net.loads) ids.push_back(l.id);
    check_ids_unique(ids, "load", rep);
    for (const auto& l : net.loads) {
        if (!bus_ids.count(l.bus))
            rep.items.push_back({S::error, "dangling-ref",
                                 "load '" + l.id + "' references missing bus '" + l.bus + "'"});
        if (l.peak < 0.0)
            rep.items.push_back({S::error, "bad-peak", "load '" + l.id + "' peak must be >= 0"});
    }

    ids.clear();
    for (const auto& c : net.candidates) ids.push_back(c.id);
    check_ids_unique(ids, "candidate", rep);
    for (const auto& c : net.candidates) {
        if (!bus_ids.count(c.bus))
            rep.items.push_back({S::error, "dangling-ref",
                                 "candidate '" + c.id + "' references missing bus '" + c.bus + "'"});
        if (!(c.unit_size > 0.0))
            rep.items.push_back({S::error, "bad-unit", "candidate '" + c.id + "' unit_size must be > 0"});
        if (c.max_build < 0.0)
            rep.items.push_back({S::error, "bad-limit", "candidate '" + c.id + "' max_build must be >= 0"});
        if (c.capex < 0.0)
            rep.items.push_back({S::error, "bad-cost", "candidate '" + c.id + "' capex must be >= 0"});
        if (c.kind == CandidateKind::storage) {
            if (c.duration_hours < 0.0)
                rep.items.push_back({S::error, "bad-duration",
                                     "candidate '" + c.id + "' duration_hours must be >= 0"});
            if (!(c.round_trip_efficiency > 0.0) || c.round_trip_efficiency > 1.0)
                rep.items.push_back({S::error, "bad-efficiency",
                                     "candidate '" + c.id + "' round_trip_efficiency must be in (0, 1]"});
        }
    }

    // Connectivity over non-failed branches is reported, not required.
    if (!net.buses.empty()) {
        std::unordered_map<std::string, std::vector<const Branch*>> adj;
        for (const auto& br : net.branches) {
            if (bus_ids.count(br.from_bus) && bus_ids.count(br.to_bus)) {
                adj[br.from_bus].push_back(&br);
                adj[br.to_bus].push_back(&br);
            }
        }
        std::unordered_set<std::string> seen;
        std::vector<std::string> stack{net.buses.front().id};
        seen.insert(net.buses.front().id);
        while (!stack.empty()) {
            std::string cur = stack.back();
            stack.pop_back();
            for (const Branch* br : adj[cur]) {
                for (const std::string& nb : {br->from_bus, br->to_bus}) {
                    if (seen.insert(nb).second) stack.push_back(nb);
                }
            }
        }
        if (seen.size() < net.buses.size()) {
            rep.items.push_back({S::warning, "disconnected",
                                 "network has " + std::to_string(net.buses.size() - seen.size()) +
                                     " bus(es) unreachable from bus '" + net.buses.front().id + "'"});
        }
    }

    // A line in parallel with a transformer mixes voltage semantics and would
    // block the merge of its endpoints during reduction.
    {
        std::unordered_set<std::string> xfmr_pairs;
        for (const auto& br : net.branches) {
            if (br.kind != BranchKind::transformer) continue;
            const auto& a = std::min(br.from_bus, br.to_bus);
            const auto& b = std::max(br.from_bus, br.to_bus);
            xfmr_pairs.insert(a + "\x1f" + b);
        }
        for (const auto& br : net.branches) {
            if (br.kind != BranchKind::line) continue;
            const auto& a = std::min(br.from_bus, br.to_bus);
            const auto& b = std::max(br.from_bus, br.to_bus);
            if (xfmr_pairs.count(a + "\x1f" + b)) {
                rep.items.push_back({S::warning, "line-parallel-transformer",
                                     "line '" + br.id + "' parallels a transformer between buses '" +
                                         a + "' and '" + b + "'"});
            }
        }
    }

    return rep;
}

} // namespace gridfold
