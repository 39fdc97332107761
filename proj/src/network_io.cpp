#include "gridfold/network_io.hpp"

#include <fstream>
#include <json.hpp>

namespace gridfold {

namespace {

using ordered_json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& origin, const std::string& what) {
    throw Error(origin + ": " + what);
}

std::string elem_label(const ordered_json& obj, const char* kind, std::size_t idx) {
    std::string label = std::string(kind) + "[" + std::to_string(idx) + "]";
    if (obj.is_object() && obj.contains("id") && obj["id"].is_string())
        label += " (id '" + obj["id"].get<std::string>() + "')";
    return label;
}

const ordered_json& require(const ordered_json& obj, const char* field, const std::string& where,
                            const std::string& origin) {
    if (!obj.contains(field)) fail(origin, where + ": missing required field '" + field + "'");
    return obj.at(field);
}

double require_num(const ordered_json& obj, const char* field, const std::string& where,
                   const std::string& origin) {
    const auto& v = require(obj, field, where, origin);
    if (!v.is_number()) fail(origin, where + ": field '" + field + "' must be a number");
    return v.get<double>();
}

std::string require_str(const ordered_json& obj, const char* field, const std::string& where,
                        const std::string& origin) {
    const auto& v = require(obj, field, where, origin);
    if (!v.is_string()) fail(origin, where + ": field '" + field + "' must be a string");
    return v.get<std::string>();
}

bool require_bool(const ordered_json& obj, const char* field, const std::string& where,
                  const std::string& origin) {
    const auto& v = require(obj, field, where, origin);
    if (!v.is_boolean()) fail(origin, where + ": field '" + field + "' must be a boolean");
    return v.get<bool>();
}

double opt_num(const ordered_json& obj, const char* field, double dflt) {
    if (!obj.contains(field)) return dflt;
    return obj.at(field).get<double>();
}

std::string opt_str(const ordered_json& obj, const char* field, const std::string& dflt) {
    if (!obj.contains(field)) return dflt;
    return obj.at(field).get<std::string>();
}

bool opt_bool(const ordered_json& obj, const char* field, bool dflt) {
    if (!obj.contains(field)) return dflt;
    return obj.at(field).get<bool>();
}

} // namespace

Network network_from_json_text(const std::string& text, const std::string& origin) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        fail(origin, std::string("parse error: ") + e.what());
    }
    if (!doc.is_object()) fail(origin, "top level must be an object");
    if (!doc.contains("format")) fail(origin, "missing required 'format' header");
    if (!doc["format"].is_number_integer() || doc["format"].get<int>() != 1)
        fail(origin, "unsupported format version (expected format: 1)");

    Network net;
    net.name = opt_str(doc, "name", "");

    const auto& buses = require(doc, "buses", "top level", origin);
    for (std::size_t i = 0; i < buses.size(); ++i) {
        const auto& jb = buses[i];
        const std::string where = elem_label(jb, "buses", i);
        Bus b;
        b.id = require_str(jb, "id", where, origin);
        const auto& loc = require(jb, "location", where, origin);
        b.location.latitude = require_num(loc, "latitude", where + ".location", origin);
        b.location.longitude = require_num(loc, "longitude", where + ".location", origin);
        b.is_substation = opt_bool(jb, "is_substation", false);
        b.base_kv = require_num(jb, "base_kv", where, origin);
        net.buses.push_back(std::move(b));
    }

    const auto& branches = require(doc, "branches", "top level", origin);
    for (std::size_t i = 0; i < branches.size(); ++i) {
        const auto& jb = branches[i];
        const std::string where = elem_label(jb, "branches", i);
        Branch br;
        br.id = require_str(jb, "id", where, origin);
        br.from_bus = require_str(jb, "from_bus", where, origin);
        br.to_bus = require_str(jb, "to_bus", where, origin);
        const std::string kind = require_str(jb, "kind", where, origin);
        if (kind == "line")
            br.kind = BranchKind::line;
        else if (kind == "transformer")
            br.kind = BranchKind::transformer;
        else
            fail(origin, where + ": kind must be 'line' or 'transformer'");
        br.r = require_num(jb, "r", where, origin);
        br.x = require_num(jb, "x", where, origin);
        br.rating = require_num(jb, "rating", where, origin);
        br.reinforce_cost = opt_num(jb, "reinforce_cost", 0.0);
        br.reinforcible = opt_bool(jb, "reinforcible", false);
        net.branches.push_back(std::move(br));
    }

    const auto& gens = require(doc, "generators", "top level", origin);
    for (std::size_t i = 0; i < gens.size(); ++i) {
        const auto& jg = gens[i];
        const std::string where = elem_label(jg, "generators", i);
        Generator g;
        g.id = require_str(jg, "id", where, origin);
        g.bus = require_str(jg, "bus", where, origin);
        g.tech = require_str(jg, "tech", where, origin);
        g.capacity = require_num(jg, "capacity", where, origin);
        g.variable_cost = require_num(jg, "variable_cost", where, origin);
        g.is_renewable = require_bool(jg, "is_renewable", where, origin);
        g.availability_key = opt_str(jg, "availability_key", "");
        g.is_hydro_budgeted = opt_bool(jg, "is_hydro_budgeted", false);
        net.generators.push_back(std::move(g));
    }

    const auto& stors = require(doc, "storage", "top level", origin);
    for (std::size_t i = 0; i < stors.size(); ++i) {
        const auto& js = stors[i];
        const std::string where = elem_label(js, "storage", i);
        Storage s;
        s.id = require_str(js, "id", where, origin);
        s.bus = require_str(js, "bus", where, origin);
        s.power_capacity = require_num(js, "power_capacity", where, origin);
        s.energy_capacity = require_num(js, "energy_capacity", where, origin);
        s.round_trip_efficiency = require_num(js, "round_trip_efficiency", where, origin);
        net.storage.push_back(std::move(s));
    }

    const auto& loads = require(doc, "loads", "top level", origin);
    for (std::size_t i = 0; i < loads.size(); ++i) {
        const auto& jl = loads[i];
        const std::string where = elem_label(jl, "loads", i);
        Load l;
        l.id = require_str(jl, "id", where, origin);
        l.bus = require_str(jl, "bus", where, origin);
        l.profile_key = opt_str(jl, "profile_key", "");
        l.peak = require_num(jl, "peak", where, origin);
        net.loads.push_back(std::move(l));
    }

    const auto& cands = require(doc, "candidates", "top level", origin);
    for (std::size_t i = 0; i < cands.size(); ++i) {
        const auto& jc = cands[i];
        const std::string where = elem_label(jc, "candidates", i);
        Candidate c;
        c.id = require_str(jc, "id", where, origin);
        c.bus = require_str(jc, "bus", where, origin);
        const std::string kind = require_str(jc, "kind", where, origin);
        if (kind == "generation")
            c.kind = CandidateKind::generation;
        else if (kind == "storage")
            c.kind = CandidateKind::storage;
        else
            fail(origin, where + ": kind must be 'generation' or 'storage'");
        c.tech = require_str(jc, "tech", where, origin);
        c.unit_size = require_num(jc, "unit_size", where, origin);
        const std::string integ = require_str(jc, "integrality", where, origin);
        if (integ == "integer")
            c.integrality = Integrality::integer_units;
        else if (integ == "continuous")
            c.integrality = Integrality::continuous;
        else
            fail(origin, where + ": integrality must be 'integer' or 'continuous'");
        c.max_build = require_num(jc, "max_build", where, origin);
        c.capex = require_num(jc, "capex", where, origin);
        c.variable_cost = opt_num(jc, "variable_cost", 0.0);
        c.is_renewable = opt_bool(jc, "is_renewable", false);
        c.availability_key = opt_str(jc, "availability_key", "");
        c.duration_hours = opt_num(jc, "duration_hours", 0.0);
        c.round_trip_efficiency = opt_num(jc, "round_trip_efficiency", 1.0);
        net.candidates.push_back(std::move(c));
    }

    return net;
}

std::string network_to_json_text(const Network& net) {
    ordered_json doc;
    doc["format"] = 1;
    if (!net.name.empty()) doc["name"] = net.name;

    doc["buses"] = ordered_json::array();
    for (const auto& b : net.buses) {
        ordered_json jb;
        jb["id"] = b.id;
        jb["location"] = {{"latitude", b.location.latitude}, {"longitude", b.location.longitude}};
        jb["is_substation"] = b.is_substation;
        jb["base_kv"] = b.base_kv;
        doc["buses"].push_back(std::move(jb));
    }

    doc["branches"] = ordered_json::array();
    for (const auto& br : net.branches) {
        ordered_json jb;
        jb["id"] = br.id;
        jb["from_bus"] = br.from_bus;
        jb["to_bus"] = br.to_bus;
        jb["kind"] = br.kind == BranchKind::line ? "line" : "transformer";
        jb["r"] = br.r;
        jb["x"] = br.x;
        jb["rating"] = br.rating;
        jb["reinforce_cost"] = br.reinforce_cost;
        jb["reinforcible"] = br.reinforcible;
        doc["branches"].push_back(std::move(jb));
    }

    doc["generators"] = ordered_json::array();
    for (const auto& g : net.generators) {
        ordered_json jg;
        jg["id"] = g.id;
        jg["bus"] = g.bus;
        jg["tech"] = g.tech;
        jg["capacity"] = g.capacity;
        jg["variable_cost"] = g.variable_cost;
        jg["is_renewable"] = g.is_renewable;
        jg["availability_key"] = g.availability_key;
        jg["is_hydro_budgeted"] = g.is_hydro_budgeted;
        doc["generators"].push_back(std::move(jg));
    }

    doc["storage"] = ordered_json::array();
    for (const auto& s : net.storage) {
        ordered_json js;
        js["id"] = s.id;
        js["bus"] = s.bus;
        js["power_capacity"] = s.power_capacity;
        js["energy_capacity"] = s.energy_capacity;
        js["round_trip_efficiency"] = s.round_trip_efficiency;
        doc["storage"].push_back(std::move(js));
    }

    doc["loads"] = ordered_json::array();
    for (const auto& l : net.loads) {
        ordered_json jl;
        jl["id"] = l.id;
        jl["bus"] = l.bus;
        jl["profile_key"] = l.profile_key;
        jl["peak"] = l.peak;
        doc["loads"].push_back(std::move(jl));
    }

    doc["candidates"] = ordered_json::array();
    for (const auto& c : net.candidates) {
        ordered_json jc;
        jc["id"] = c.id;
        jc["bus"] = c.bus;
        jc["kind"] = c.kind == CandidateKind::generation ? "generation" : "storage";
        jc["tech"] = c.tech;
        jc["unit_size"] = c.unit_size;
        jc["integrality"] = c.integrality == Integrality::integer_units ? "integer" : "continuous";
        jc["max_build"] = c.max_build;
        jc["capex"] = c.capex;
        jc["variable_cost"] = c.variable_cost;
        jc["is_renewable"] = c.is_renewable;
        jc["availability_key"] = c.availability_key;
        jc["duration_hours"] = c.duration_hours;
        jc["round_trip_efficiency"] = c.round_trip_efficiency;
        doc["candidates"].push_back(std::move(jc));
    }

    return doc.dump(2) + "\n";
}

Network load_network(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open network file '" + path.string() + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    Network net = network_from_json_text(text, path.string());
    ValidationReport rep = validate_network(net);
    if (!rep.ok())
        throw Error("network file '" + path.string() + "' failed validation:\n" + rep.to_string());
    return net;
}

void save_network(const Network& net, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write network file '" + path.string() + "'");
    out << network_to_json_text(net);
    if (!out) throw Error("write failed for network file '" + path.string() + "'");
}

} // namespace gridfold
