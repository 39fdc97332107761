#pragma once

#include "gridfold/geo.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace gridfold {

/// Error type for all contract violations and I/O failures in the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

enum class BranchKind { line, transformer };
enum class CandidateKind { generation, storage };
enum class Integrality { integer_units, continuous };

struct Bus {
    std::string id;
    GeoCoord location;
    bool is_substation = false;
    double base_kv = 0.0;
};

struct Branch {
    std::string id;
    std::string from_bus;
    std::string to_bus;
    BranchKind kind = BranchKind::line;
    double r = 0.0;      // series resistance, p.u.
    double x = 0.0;      // series reactance, p.u.
    double rating = 0.0; // MW
    double reinforce_cost = 0.0; // $/yr
    bool reinforcible = false;
};

struct Generator {
    std::string id;
    std::string bus;
    std::string tech;
    double capacity = 0.0;      // MW
    double variable_cost = 0.0; // $/MWh
    bool is_renewable = false;
    std::string availability_key; // empty = available at 1.0 every hour
    bool is_hydro_budgeted = false;
};

struct Storage {
    std::string id;
    std::string bus;
    double power_capacity = 0.0;  // MW
    double energy_capacity = 0.0; // MWh
    double round_trip_efficiency = 1.0; // (0, 1]
};

struct Load {
    std::string id;
    std::string bus;
    std::string profile_key; // empty = flat at peak
    double peak = 0.0;       // MW
};

struct Candidate {
    std::string id;
    std::string bus;
    CandidateKind kind = CandidateKind::generation;
    std::string tech;
    double unit_size = 0.0; // MW, > 0
    Integrality integrality = Integrality::continuous;
    double max_build = 0.0; // MW land-use limit
    double capex = 0.0;     // $/MW-yr
    // Operating attributes mirroring Generator / Storage.
    double variable_cost = 0.0;
    bool is_renewable = false;
    std::string availability_key;
    double duration_hours = 0.0;        // storage candidates: MWh built = MW * duration
    double round_trip_efficiency = 1.0; // storage candidates
};

/// Immutable-by-convention nodal system. Reduction and tightening return new values.
struct Network {
    std::string name;
    std::vector<Bus> buses;
    std::vector<Branch> branches;
    std::vector<Generator> generators;
    std::vector<Storage> storage;
    std::vector<Load> loads;
    std::vector<Candidate> candidates;

    const Bus& bus(const std::string& id) const;
    const Bus* find_bus(const std::string& id) const;
    const Branch* find_branch(const std::string& id) const;
    const Candidate* find_candidate(const std::string& id) const;
};

bool operator==(const Bus&, const Bus&);
bool operator==(const Branch&, const Branch&);
bool operator==(const Generator&, const Generator&);
bool operator==(const Storage&, const Storage&);
bool operator==(const Load&, const Load&);
bool operator==(const Candidate&, const Candidate&);
bool operator==(const Network&, const Network&);

struct Violation {
    enum class Severity { error, warning };
    Severity severity = Severity::error;
    std::string code;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> items;

    bool ok() const; // no errors (warnings allowed)
    std::size_t error_count() const;
    std::string to_string() const;
};

/// Number of branches (lines and transformers) incident to bus `id`.
/// Throws on unknown bus id. Self-loops would count twice, but validated
/// networks contain none.
int bus_degree(const Network& net, const std::string& id);

/// Ids of lines with at least one degree-1 endpoint. Transformers are never
/// radial candidates, but they do count toward endpoint degrees.
std::vector<std::string> radial_lines(const Network& net);

ValidationReport validate_network(const Network& net);

/// True iff `id` is a legal element identifier: nonempty, [A-Za-z0-9_.-] only.
bool valid_id(const std::string& id);

} // namespace gridfold
