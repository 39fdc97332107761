#include "gridfold/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace gridfold {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kKmPerDegLat = 111.19492664455873; // 6371 km * pi / 180

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == '\t') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s, const std::string& where) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw Error(where + ": cannot parse number '" + s + "'");
    }
}

} // namespace

std::vector<ScenarioDay> load_scenarios(const std::filesystem::path& dir) {
    const auto manifest_path = dir / "manifest";
    std::ifstream manifest(manifest_path);
    if (!manifest) throw Error("cannot open scenario manifest '" + manifest_path.string() + "'");

    std::vector<ScenarioDay> days;
    std::string line;
    int lineno = 0;
    while (std::getline(manifest, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        auto cols = split_tabs(line);
        if (lineno == 1 && cols.size() >= 2 && cols[0] == "day") continue; // header
        if (cols.size() != 2)
            throw Error(manifest_path.string() + ":" + std::to_string(lineno) +
                        ": expected 'day<TAB>probability'");
        ScenarioDay d;
        d.id = cols[0];
        if (!valid_id(d.id))
            throw Error(manifest_path.string() + ":" + std::to_string(lineno) + ": bad day id '" +
                        d.id + "'");
        d.probability = parse_double(cols[1], manifest_path.string() + ":" + std::to_string(lineno));
        if (!(d.probability > 0.0) || d.probability > 1.0)
            throw Error(manifest_path.string() + ": day '" + d.id +
                        "' probability must be in (0, 1]");
        days.push_back(std::move(d));
    }
    if (days.empty()) throw Error(manifest_path.string() + ": no days listed");

    {
        std::set<std::string> seen;
        for (const auto& d : days)
            if (!seen.insert(d.id).second)
                throw Error(manifest_path.string() + ": duplicate day id '" + d.id + "'");
    }

    double total = 0.0;
    for (const auto& d : days) total += d.probability;
    if (std::abs(total - 1.0) > 1e-6)
        throw Error(manifest_path.string() + ": probabilities sum to " + fmt_double(total) +
                    ", expected 1 within 1e-6");
    for (auto& d : days) d.probability /= total;

    for (auto& d : days) {
        const auto day_path = dir / ("day_" + d.id + ".tsv");
        std::ifstream in(day_path);
        if (!in) throw Error("cannot open scenario day file '" + day_path.string() + "'");
        std::map<std::string, std::set<int>> hours_seen;
        int n = 0;
        while (std::getline(in, line)) {
            ++n;
            if (line.empty() || line[0] == '#') continue;
            auto cols = split_tabs(line);
            if (n == 1 && cols.size() >= 3 && cols[0] == "hour") continue; // header
            const std::string where = day_path.string() + ":" + std::to_string(n);
            if (cols.size() != 3) throw Error(where + ": expected 'hour<TAB>key<TAB>value'");
            const std::string& key = cols[1];
            const double value = parse_double(cols[2], where);
            if (key.rfind("hydro:", 0) == 0) {
                if (cols[0] != "day")
                    throw Error(where + ": hydro budgets are daily; hour column must be 'day'");
                const std::string gen = key.substr(6);
                if (!d.hydro_budget_mwh.emplace(gen, value).second)
                    throw Error(where + ": duplicate hydro budget for generator '" + gen + "'");
                continue;
            }
            const int hour = static_cast<int>(parse_double(cols[0], where));
            if (hour < 0 || hour > 23) throw Error(where + ": hour must be in 0..23");
            if (key.rfind("avail:", 0) == 0) {
                const std::string k = key.substr(6);
                if (!hours_seen["avail:" + k].insert(hour).second)
                    throw Error(where + ": duplicate hour " + std::to_string(hour) +
                                " for availability key '" + k + "'");
                d.availability[k][hour] = value;
            } else if (key.rfind("load:", 0) == 0) {
                const std::string k = key.substr(5);
                if (!hours_seen["load:" + k].insert(hour).second)
                    throw Error(where + ": duplicate hour " + std::to_string(hour) +
                                " for load key '" + k + "'");
                d.load_multiplier[k][hour] = value;
            } else {
                throw Error(where + ": key '" + key + "' must start with avail:, load: or hydro:");
            }
        }
        for (const auto& [key, hours] : hours_seen) {
            if (hours.size() != 24) {
                for (int h = 0; h < 24; ++h) {
                    if (!hours.count(h))
                        throw Error(day_path.string() + ": day '" + d.id + "' key '" + key +
                                    "' missing hour " + std::to_string(h));
                }
            }
        }
        for (const auto& [k, vals] : d.availability) {
            for (int h = 0; h < 24; ++h)
                if (vals[h] < 0.0 || vals[h] > 1.0)
                    throw Error(day_path.string() + ": availability '" + k + "' hour " +
                                std::to_string(h) + " outside [0, 1]");
        }
        for (const auto& [k, vals] : d.load_multiplier) {
            for (int h = 0; h < 24; ++h)
                if (vals[h] < 0.0)
                    throw Error(day_path.string() + ": load multiplier '" + k + "' hour " +
                                std::to_string(h) + " must be >= 0");
        }
    }
    return days;
}

void save_scenarios(std::span<const ScenarioDay> days, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::ofstream manifest(dir / "manifest");
    if (!manifest) throw Error("cannot write scenario manifest in '" + dir.string() + "'");
    manifest << "day\tprobability\n";
    for (const auto& d : days) {
        if (!valid_id(d.id)) throw Error("day id '" + d.id + "' is not a valid identifier");
        manifest << d.id << "\t" << fmt_double(d.probability) << "\n";
    }
    for (const auto& d : days) {
        std::ofstream out(dir / ("day_" + d.id + ".tsv"));
        if (!out) throw Error("cannot write scenario day file for '" + d.id + "'");
        out << "hour\tkey\tvalue\n";
        for (const auto& [k, vals] : d.availability)
            for (int h = 0; h < 24; ++h)
                out << h << "\tavail:" << k << "\t" << fmt_double(vals[h]) << "\n";
        for (const auto& [k, vals] : d.load_multiplier)
            for (int h = 0; h < 24; ++h)
                out << h << "\tload:" << k << "\t" << fmt_double(vals[h]) << "\n";
        for (const auto& [gen, budget] : d.hydro_budget_mwh)
            out << "day\thydro:" << gen << "\t" << fmt_double(budget) << "\n";
    }
}

namespace {

// Explicit draw helpers so sequences are reproducible across platforms
// (distribution classes in <random> are not bit-specified).
struct Rng {
    std::mt19937_64 gen;
    explicit Rng(std::uint64_t seed) : gen(seed) {}

    double uniform() { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    int uniform_int(int a, int b) { // inclusive
        return a + static_cast<int>(uniform() * (b - a + 1)) % (b - a + 1);
    }
};

} // namespace

std::pair<Network, std::vector<ScenarioDay>> synth_instance(std::uint64_t seed, int n_buses,
                                                            int n_days, const SynthKnobs& knobs) {
    if (n_buses < 2) throw Error("synth_instance: n_buses must be >= 2");
    if (n_days < 1) throw Error("synth_instance: n_days must be >= 1");
    if (knobs.cluster_radius_km < 0 || knobs.cluster_spacing_km <= 0 ||
        knobs.candidates_per_cluster < 0 || knobs.load_scale <= 0)
        throw Error("synth_instance: degenerate knobs");

    Rng rng(seed);
    Network net;
    net.name = "synth-" + std::to_string(seed) + "-" + std::to_string(n_buses);

    const int n_clusters =
        knobs.n_clusters > 0 ? std::min(knobs.n_clusters, n_buses) : std::max(2, n_buses / 5);
    const double spacing_deg = knobs.cluster_spacing_km / kKmPerDegLat;
    const double radius_deg = knobs.cluster_radius_km / kKmPerDegLat;

    // Cluster centers on a coarse grid around central California.
    std::vector<GeoCoord> centers;
    const int grid = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n_clusters))));
    for (int c = 0; c < n_clusters; ++c) {
        GeoCoord ctr;
        ctr.latitude = 34.0 + (c / grid) * spacing_deg;
        ctr.longitude = -120.0 + (c % grid) * spacing_deg;
        centers.push_back(ctr);
    }

    std::vector<std::vector<std::string>> cluster_buses(n_clusters);
    for (int b = 0; b < n_buses; ++b) {
        const int c = b % n_clusters;
        Bus bus;
        bus.id = "b" + std::to_string(b);
        const double ang = rng.uniform(0.0, 2.0 * kPi);
        const double rad = radius_deg * std::sqrt(rng.uniform());
        bus.location.latitude = centers[c].latitude + rad * std::cos(ang);
        bus.location.longitude = centers[c].longitude + rad * std::sin(ang);
        bus.is_substation = cluster_buses[c].empty();
        bus.base_kv = 230.0;
        cluster_buses[c].push_back(bus.id);
        net.buses.push_back(std::move(bus));
    }

    int branch_seq = 0;
    auto add_line = [&](const std::string& a, const std::string& b, double rating,
                        bool reinforcible) {
        Branch br;
        br.id = "L" + std::to_string(branch_seq++);
        br.from_bus = a;
        br.to_bus = b;
        br.kind = BranchKind::line;
        br.r = rng.uniform(0.005, 0.03);
        br.x = rng.uniform(0.05, 0.3);
        br.rating = rating;
        br.reinforcible = reinforcible;
        br.reinforce_cost = reinforcible ? rng.uniform(20000.0, 60000.0) : 0.0;
        net.branches.push_back(std::move(br));
    };

    // Intra-cluster: chain + one mesh edge; chain tails act as radial spurs.
    for (int c = 0; c < n_clusters; ++c) {
        const auto& members = cluster_buses[c];
        for (std::size_t i = 1; i < members.size(); ++i)
            add_line(members[i - 1], members[i], rng.uniform(60.0, 120.0), false);
        if (members.size() >= 3) add_line(members[0], members[2], rng.uniform(60.0, 120.0), false);
    }

    // Inter-cluster ring; departing from a non-substation member means the
    // merge priority rules route these lines through series re-attachment.
    for (int c = 0; c < n_clusters; ++c) {
        const int next = (c + 1) % n_clusters;
        if (n_clusters == 2 && c == 1) break; // avoid a duplicate pair in the 2-cluster case
        const bool reinf = rng.uniform() < knobs.reinforcible_fraction;
        const auto& from = cluster_buses[c];
        add_line(from[from.size() > 1 ? 1 : 0], cluster_buses[next][0], rng.uniform(25.0, 45.0),
                 reinf);
    }

    // Optional transformer-isolated leaves: the secondary bus has no lines, so
    // it can never merge with the core.
    if (knobs.include_transformers) {
        for (int c = 0; c < n_clusters; c += 2) {
            Bus sub;
            sub.id = "b" + std::to_string(n_buses + c);
            sub.location.latitude = centers[c].latitude + radius_deg * 0.5;
            sub.location.longitude = centers[c].longitude + radius_deg * 0.5;
            sub.base_kv = 115.0;
            net.buses.push_back(sub);
            Branch br;
            br.id = "X" + std::to_string(branch_seq++);
            br.from_bus = cluster_buses[c][0];
            br.to_bus = sub.id;
            br.kind = BranchKind::transformer;
            br.r = rng.uniform(0.001, 0.01);
            br.x = rng.uniform(0.05, 0.15);
            br.rating = rng.uniform(40.0, 80.0);
            net.branches.push_back(std::move(br));
            cluster_buses[c].push_back(sub.id); // participates in loads below
        }
    }

    // Loads: one per cluster plus a second on larger clusters.
    double total_peak = 0.0;
    int load_seq = 0;
    std::vector<double> cluster_peak(n_clusters, 0.0);
    for (int c = 0; c < n_clusters; ++c) {
        const auto& members = cluster_buses[c];
        const int n_loads = members.size() >= 4 ? 2 : 1;
        for (int i = 0; i < n_loads; ++i) {
            Load l;
            l.id = "d" + std::to_string(load_seq++);
            l.bus = members[rng.uniform_int(0, static_cast<int>(members.size()) - 1)];
            l.profile_key = "p_c" + std::to_string(c);
            l.peak = rng.uniform(20.0, 50.0) * knobs.load_scale;
            cluster_peak[c] += l.peak;
            total_peak += l.peak;
            net.loads.push_back(std::move(l));
        }
    }

    // Existing fleet sized to ~80% of system peak: thermal backbone plus one
    // renewable per cluster, and hydro in cluster 0.
    int gen_seq = 0;
    const double existing_target = 0.8 * total_peak;
    for (int c = 0; c < n_clusters; ++c) {
        const double share = existing_target * cluster_peak[c] / total_peak;
        Generator ng;
        ng.id = "g" + std::to_string(gen_seq++);
        ng.bus = cluster_buses[c][0];
        ng.tech = "NG";
        ng.capacity = share * 0.7;
        ng.variable_cost = rng.uniform(40.0, 60.0);
        ng.is_renewable = false;
        net.generators.push_back(std::move(ng));

        Generator ren;
        ren.id = "g" + std::to_string(gen_seq++);
        ren.bus = cluster_buses[c][rng.uniform_int(0, static_cast<int>(cluster_buses[c].size()) - 1)];
        const bool solar = c % 2 == 0;
        ren.tech = solar ? "solar" : "onshore-wind";
        ren.capacity = share * 0.3;
        ren.variable_cost = rng.uniform(0.0, 3.0);
        ren.is_renewable = true;
        ren.availability_key = (solar ? "solar_c" : "wind_c") + std::to_string(c);
        net.generators.push_back(std::move(ren));
    }
    {
        Generator hyd;
        hyd.id = "g" + std::to_string(gen_seq++);
        hyd.bus = cluster_buses[0][0];
        hyd.tech = "hydro";
        hyd.capacity = 0.15 * total_peak;
        hyd.variable_cost = 1.0;
        hyd.is_renewable = true;
        hyd.is_hydro_budgeted = true;
        net.generators.push_back(std::move(hyd));
    }

    if (knobs.include_storage) {
        Storage s;
        s.id = "s0";
        s.bus = cluster_buses[0][0];
        s.power_capacity = 0.1 * total_peak;
        s.energy_capacity = 0.4 * total_peak;
        s.round_trip_efficiency = 0.85;
        net.storage.push_back(std::move(s));
    }

    // Candidates rotate through the tech list so every instance sees at least
    // four technologies.
    struct TechSpec {
        const char* tech;
        CandidateKind kind;
        bool renewable;
        bool integer;
        const char* avail_prefix; // nullptr = flat availability
    };
    const TechSpec tech_list[] = {
        {"solar", CandidateKind::generation, true, false, "solar_c"},
        {"onshore-wind", CandidateKind::generation, true, false, "wind_c"},
        {"geothermal", CandidateKind::generation, true, false, nullptr},
        {"NG", CandidateKind::generation, false, true, nullptr},
        {"battery", CandidateKind::storage, false, false, nullptr},
    };
    int cand_seq = 0;
    for (int c = 0; c < n_clusters; ++c) {
        for (int j = 0; j < knobs.candidates_per_cluster; ++j) {
            const TechSpec& ts = tech_list[(c * knobs.candidates_per_cluster + j) % 5];
            if (ts.kind == CandidateKind::storage && !knobs.include_storage) continue;
            Candidate cd;
            cd.id = "c" + std::to_string(cand_seq++);
            cd.bus = cluster_buses[c][rng.uniform_int(0, static_cast<int>(cluster_buses[c].size()) - 1)];
            cd.kind = ts.kind;
            cd.tech = ts.tech;
            cd.is_renewable = ts.renewable;
            if (ts.integer && knobs.integer_candidates) {
                cd.integrality = Integrality::integer_units;
                cd.unit_size = 25.0;
                cd.max_build = 25.0 * rng.uniform_int(1, std::max(1, knobs.max_integer_units));
            } else {
                cd.integrality = Integrality::continuous;
                cd.unit_size = 1.0;
                cd.max_build = rng.uniform(30.0, 80.0);
            }
            if (ts.avail_prefix) cd.availability_key = ts.avail_prefix + std::to_string(c);
            switch (ts.kind) {
            case CandidateKind::generation:
                if (ts.renewable) {
                    cd.capex = rng.uniform(60000.0, 110000.0);
                    cd.variable_cost = rng.uniform(0.0, 4.0);
                } else {
                    cd.capex = rng.uniform(40000.0, 80000.0);
                    cd.variable_cost = rng.uniform(45.0, 65.0);
                }
                break;
            case CandidateKind::storage:
                cd.capex = rng.uniform(50000.0, 90000.0);
                cd.duration_hours = 4.0;
                cd.round_trip_efficiency = 0.85;
                break;
            }
            net.candidates.push_back(std::move(cd));
        }
    }

    // Scenario days: diurnal solar, smooth noisy wind, evening-peaking load.
    std::vector<ScenarioDay> days;
    for (int d = 0; d < n_days; ++d) {
        ScenarioDay day;
        day.id = "d" + std::to_string(d);
        day.probability = 1.0 / n_days;
        for (int c = 0; c < n_clusters; ++c) {
            const double solar_level = rng.uniform(0.65, 1.0);
            const double wind_phase = rng.uniform(0.0, 24.0);
            const double wind_level = rng.uniform(0.3, 0.7);
            const double load_level = rng.uniform(0.9, 1.1);
            auto& sol = day.availability["solar_c" + std::to_string(c)];
            auto& wnd = day.availability["wind_c" + std::to_string(c)];
            auto& lod = day.load_multiplier["p_c" + std::to_string(c)];
            for (int h = 0; h < 24; ++h) {
                const double sun = std::max(0.0, std::sin(kPi * (h - 6.0) / 12.0));
                sol[h] = std::clamp(solar_level * sun, 0.0, 1.0);
                wnd[h] = std::clamp(
                    wind_level + 0.3 * std::sin(2.0 * kPi * (h + wind_phase) / 24.0), 0.05, 1.0);
                const double shape = 0.5 - 0.5 * std::cos(2.0 * kPi * (h - 3.0) / 24.0);
                lod[h] = load_level * (0.6 + 0.4 * shape);
            }
        }
        for (const auto& g : net.generators) {
            if (g.is_hydro_budgeted)
                day.hydro_budget_mwh[g.id] = g.capacity * 24.0 * rng.uniform(0.25, 0.5);
        }
        days.push_back(std::move(day));
    }
    // Keep the in-memory probabilities summing to exactly 1.
    double head = 0.0;
    for (int d = 0; d + 1 < n_days; ++d) head += days[d].probability;
    days.back().probability = 1.0 - head;

    ValidationReport rep = validate_network(net);
    if (!rep.ok()) throw Error("synth_instance produced an invalid network:\n" + rep.to_string());
    return {std::move(net), std::move(days)};
}

} // namespace gridfold
