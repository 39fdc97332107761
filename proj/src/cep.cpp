#include "gridfold/cep.hpp"

#include "gridfold/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include <json.hpp>

namespace gridfold {

double default_loss_coefficient(const Network& net) {
    std::vector<double> rs;
    for (const auto& br : net.branches)
        if (br.kind == BranchKind::line && br.r > 0.0) rs.push_back(br.r);
    if (rs.empty()) return 0.0;
    std::sort(rs.begin(), rs.end());
    const double median = rs[rs.size() / 2];
    return median > 0.0 ? 0.02 / median : 0.0;
}

namespace {

std::string hour_tag(int h) { return "_h" + std::to_string(h); }

std::string sanitize(const std::string& s) {
    std::string out;
    for (char c : s) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '_' || c == '.' || c == '-';
        out += ok ? c : '_';
    }
    return out.empty() ? std::string("_") : out;
}

struct DayData {
    const ScenarioDay* day = nullptr;
    std::unordered_map<std::string, std::array<double, 24>> bus_load; // bus -> MW per hour
    double total_load_mwh = 0.0;
};

std::array<double, 24> availability_for(const std::string& key, const ScenarioDay& day) {
    if (key.empty()) {
        std::array<double, 24> flat;
        flat.fill(1.0);
        return flat;
    }
    auto it = day.availability.find(key);
    if (it == day.availability.end())
        throw Error("availability key '" + key + "' not present in scenario day '" + day.id + "'");
    return it->second;
}

DayData day_data(const Network& net, const ScenarioDay& day) {
    DayData dd;
    dd.day = &day;
    for (const auto& l : net.loads) {
        std::array<double, 24> mult;
        if (l.profile_key.empty()) {
            mult.fill(1.0);
        } else {
            auto it = day.load_multiplier.find(l.profile_key);
            if (it == day.load_multiplier.end())
                throw Error("load profile key '" + l.profile_key +
                            "' not present in scenario day '" + day.id + "'");
            mult = it->second;
        }
        auto& arr = dd.bus_load[l.bus];
        for (int h = 0; h < 24; ++h) {
            const double mw = l.peak * mult[h];
            arr[h] += mw;
            dd.total_load_mwh += mw;
        }
    }
    return dd;
}

struct BuildTerm {
    int var = -1;
    double mw_per_unit = 1.0; // build MW = mw_per_unit * var value
};

// Shared builder for the deterministic and extensive-form models.
MilpInstance build_cep(const Network& net, std::span<const ScenarioDay> days, const CepConfig& cfg,
                       const InvestmentFixing* fixing, bool stochastic) {
    if (days.empty()) throw Error("CEP build requires at least one scenario day");
    if (stochastic) {
        double total_p = 0.0;
        for (const auto& d : days) total_p += d.probability;
        if (std::abs(total_p - 1.0) > 1e-9)
            throw Error("scenario probabilities sum to " + std::to_string(total_p) +
                        ", expected 1 within 1e-9");
    }
    {
        double max_vc = 0.0;
        for (const auto& g : net.generators) max_vc = std::max(max_vc, g.variable_cost);
        for (const auto& c : net.candidates) max_vc = std::max(max_vc, c.variable_cost);
        if (!(cfg.shed_penalty > max_vc) || !(cfg.rps_penalty > max_vc))
            throw Error("shed/RPS penalties must exceed the largest variable cost (" +
                        std::to_string(max_vc) + ")");
    }
    if (cfg.rps_target < 0.0 || cfg.rps_target > 1.0)
        throw Error("rps_target must be in [0, 1]");
    if (!(cfg.reinforcement_multiplier > 1.0))
        throw Error("reinforcement_multiplier must be > 1");
    const double kappa = cfg.losses_enabled ? cfg.loss_coefficient : 0.0;
    if (kappa < 0.0) throw Error("loss_coefficient must be >= 0");
    if (cfg.losses_enabled) {
        for (const auto& br : net.branches)
            if (kappa * br.r >= 1.0)
                throw Error("loss fraction >= 1 on branch '" + br.id +
                            "' (kappa too large for this network)");
    }

    {
        std::unordered_map<std::string, bool> bus_ids;
        for (const auto& b : net.buses) bus_ids[b.id] = true;
        auto check_bus = [&](const std::string& kind, const std::string& id,
                             const std::string& bus) {
            if (!bus_ids.count(bus))
                throw Error(kind + " '" + id + "' references unknown bus '" + bus + "'");
        };
        for (const auto& g : net.generators) check_bus("generator", g.id, g.bus);
        for (const auto& s : net.storage) check_bus("storage", s.id, s.bus);
        for (const auto& l : net.loads) check_bus("load", l.id, l.bus);
        for (const auto& c : net.candidates) check_bus("candidate", c.id, c.bus);
        for (const auto& br : net.branches) {
            check_bus("branch", br.id, br.from_bus);
            check_bus("branch", br.id, br.to_bus);
        }
    }

    MilpInstance m;
    m.name = sanitize(net.name.empty() ? "cep" : net.name);

    // --- investment variables (shared across scenarios) ---
    std::unordered_map<std::string, BuildTerm> build_of; // candidate id -> term
    for (const auto& c : net.candidates) {
        const double* fixed = nullptr;
        if (fixing) {
            const auto& table = c.kind == CandidateKind::generation ? fixing->fixed_gen_build
                                                                    : fixing->fixed_storage_build;
            auto it = table.find(c.id);
            if (it != table.end()) fixed = &it->second;
        }
        BuildTerm bt;
        if (c.integrality == Integrality::integer_units) {
            MilpVariable v;
            v.name = "nun_" + c.id;
            v.kind = VarKind::integer_var;
            v.lower = 0.0;
            v.upper = std::floor(c.max_build / c.unit_size + 1e-9);
            v.objective = c.capex * c.unit_size;
            if (fixed) {
                const double units = *fixed / c.unit_size;
                if (std::abs(units - std::round(units)) > 1e-6)
                    throw Error("fixed build " + std::to_string(*fixed) + " MW for candidate '" +
                                c.id + "' is not a whole number of units");
                if (std::round(units) < v.lower - 1e-9 || std::round(units) > v.upper + 1e-9)
                    throw Error("fixed build for candidate '" + c.id + "' violates max_build");
                v.lower = v.upper = std::round(units);
            }
            bt.mw_per_unit = c.unit_size;
            bt.var = m.add_variable(std::move(v), {c.id, "units", "", -1});
        } else {
            MilpVariable v;
            v.name = "bld_" + c.id;
            v.lower = 0.0;
            v.upper = c.max_build;
            v.objective = c.capex;
            if (fixed) {
                if (*fixed < -1e-9 || *fixed > c.max_build + 1e-9)
                    throw Error("fixed build for candidate '" + c.id + "' violates max_build");
                v.lower = v.upper = *fixed;
            }
            bt.mw_per_unit = 1.0;
            bt.var = m.add_variable(std::move(v), {c.id, "build", "", -1});
        }
        build_of[c.id] = bt;
    }

    std::unordered_map<std::string, int> reinforce_of; // branch id -> binary index
    for (const auto& br : net.branches) {
        if (!br.reinforcible) continue;
        MilpVariable v;
        v.name = "rnf_" + br.id;
        v.kind = VarKind::binary;
        v.lower = 0.0;
        v.upper = 1.0;
        v.objective = br.reinforce_cost;
        if (fixing) {
            auto it = fixing->fixed_reinforce.find(br.id);
            if (it != fixing->fixed_reinforce.end()) {
                if (it->second != 0 && it->second != 1)
                    throw Error("fixed reinforcement for branch '" + br.id + "' must be 0 or 1");
                v.lower = v.upper = it->second;
            }
        }
        reinforce_of[br.id] = m.add_variable(std::move(v), {br.id, "reinforce", "", -1});
    }
    if (fixing) {
        for (const auto& [bid, y] : fixing->fixed_reinforce) {
            (void)y;
            if (!reinforce_of.count(bid))
                throw Error("fixed reinforcement for unknown or non-reinforcible branch '" + bid +
                            "'");
        }
        for (const auto& [cid, mw] : fixing->fixed_gen_build) {
            (void)mw;
            const Candidate* c = net.find_candidate(cid);
            if (!c || c->kind != CandidateKind::generation)
                throw Error("fixed generation build for unknown candidate '" + cid + "'");
        }
        for (const auto& [cid, mw] : fixing->fixed_storage_build) {
            (void)mw;
            const Candidate* c = net.find_candidate(cid);
            if (!c || c->kind != CandidateKind::storage)
                throw Error("fixed storage build for unknown candidate '" + cid + "'");
        }
    }

    // Group-total equalities (Map B / Map C), each with +-1e-6 MW slack.
    if (fixing) {
        int seq = 0;
        for (const auto& grp : fixing->equalities) {
            MilpRow& row = m.add_row("grp" + std::to_string(seq++) + "_" + sanitize(grp.name),
                                     RowSense::ge, grp.total_mw - 1e-6);
            row.range = 2e-6;
            for (const auto& cid : grp.candidate_ids) {
                auto it = build_of.find(cid);
                if (it == build_of.end())
                    throw Error("investment group '" + grp.name + "' references unknown candidate '" +
                                cid + "'");
                row.terms.emplace_back(it->second.var, it->second.mw_per_unit);
            }
        }
    }

    // --- per-scenario operations ---
    for (const auto& day : days) {
        const DayData dd = day_data(net, day);
        const std::string w = "_" + day.id;
        const double weight = (cfg.annualize ? 365.0 : 1.0) * (stochastic ? day.probability : 1.0);

        // Balance row per bus-hour, built up as variables are declared.
        std::vector<MilpRow> balance;
        std::unordered_map<std::string, int> bal_of; // bus id -> bus slot
        for (const auto& bus : net.buses) {
            bal_of[bus.id] = static_cast<int>(balance.size()) / 24;
            for (int h = 0; h < 24; ++h) {
                MilpRow row;
                row.name = "bal_" + bus.id + w + hour_tag(h);
                row.sense = RowSense::eq;
                auto it = dd.bus_load.find(bus.id);
                row.rhs = it == dd.bus_load.end() ? 0.0 : it->second[h];
                balance.push_back(std::move(row));
            }
        }
        auto bal = [&](const std::string& bus, int h) -> MilpRow& {
            return balance[static_cast<std::size_t>(bal_of.at(bus)) * 24 + h];
        };

        MilpRow rps_row;
        rps_row.name = "rps" + w;
        rps_row.sense = RowSense::ge;
        rps_row.rhs = cfg.rps_target * dd.total_load_mwh;

        int rps_viol = -1;
        {
            MilpVariable v;
            v.name = "rpsv" + w;
            v.lower = 0.0;
            v.objective = cfg.rps_penalty * weight;
            rps_viol = m.add_variable(std::move(v), {"", "rps_violation", day.id, -1});
            rps_row.terms.emplace_back(rps_viol, 1.0);
        }

        // Existing generators.
        for (const auto& g : net.generators) {
            const auto avail = availability_for(g.availability_key, day);
            std::vector<int> hourly(24);
            for (int h = 0; h < 24; ++h) {
                MilpVariable v;
                v.name = "gen_" + g.id + w + hour_tag(h);
                v.lower = 0.0;
                v.upper = avail[h] * g.capacity;
                v.objective = g.variable_cost * weight;
                const int idx = m.add_variable(std::move(v), {g.id, "dispatch", day.id, h});
                hourly[h] = idx;
                bal(g.bus, h).terms.emplace_back(idx, 1.0);
                if (g.is_renewable) rps_row.terms.emplace_back(idx, 1.0);
            }
            if (g.is_hydro_budgeted) {
                auto it = day.hydro_budget_mwh.find(g.id);
                if (it == day.hydro_budget_mwh.end())
                    throw Error("hydro generator '" + g.id + "' has no budget in scenario day '" +
                                day.id + "'");
                if (it->second < 0.0)
                    throw Error("hydro budget for '" + g.id + "' must be >= 0");
                MilpRow& row = m.add_row("hyd_" + g.id + w, RowSense::le, it->second);
                for (int h = 0; h < 24; ++h) row.terms.emplace_back(hourly[h], 1.0);
            }
        }

        // Candidate operations.
        for (const auto& c : net.candidates) {
            const BuildTerm bt = build_of.at(c.id);
            if (c.kind == CandidateKind::generation) {
                const auto avail = availability_for(c.availability_key, day);
                for (int h = 0; h < 24; ++h) {
                    MilpVariable v;
                    v.name = "cgn_" + c.id + w + hour_tag(h);
                    v.lower = 0.0;
                    v.upper = avail[h] * c.max_build;
                    v.objective = c.variable_cost * weight;
                    const int idx = m.add_variable(std::move(v), {c.id, "dispatch", day.id, h});
                    bal(c.bus, h).terms.emplace_back(idx, 1.0);
                    if (c.is_renewable) rps_row.terms.emplace_back(idx, 1.0);
                    // dispatch <= availability * built MW
                    MilpRow& row = m.add_row("cap_" + c.id + w + hour_tag(h), RowSense::le, 0.0);
                    row.terms.emplace_back(idx, 1.0);
                    row.terms.emplace_back(bt.var, -avail[h] * bt.mw_per_unit);
                }
            } else {
                const double sq = std::sqrt(c.round_trip_efficiency);
                std::vector<int> ch(24), di(24), so(24);
                for (int h = 0; h < 24; ++h) {
                    MilpVariable vc;
                    vc.name = "cch_" + c.id + w + hour_tag(h);
                    vc.lower = 0.0;
                    vc.upper = c.max_build;
                    ch[h] = m.add_variable(std::move(vc), {c.id, "charge", day.id, h});
                    MilpVariable vd;
                    vd.name = "cdi_" + c.id + w + hour_tag(h);
                    vd.lower = 0.0;
                    vd.upper = c.max_build;
                    di[h] = m.add_variable(std::move(vd), {c.id, "discharge", day.id, h});
                    MilpVariable vs;
                    vs.name = "cso_" + c.id + w + hour_tag(h);
                    vs.lower = 0.0;
                    vs.upper = c.max_build * c.duration_hours;
                    so[h] = m.add_variable(std::move(vs), {c.id, "soc", day.id, h});
                    bal(c.bus, h).terms.emplace_back(di[h], 1.0);
                    bal(c.bus, h).terms.emplace_back(ch[h], -1.0);
                }
                for (int h = 0; h < 24; ++h) {
                    // power and energy limited by the built size
                    MilpRow& pc = m.add_row("cpc_" + c.id + w + hour_tag(h), RowSense::le, 0.0);
                    pc.terms.emplace_back(ch[h], 1.0);
                    pc.terms.emplace_back(bt.var, -bt.mw_per_unit);
                    MilpRow& pd = m.add_row("cpd_" + c.id + w + hour_tag(h), RowSense::le, 0.0);
                    pd.terms.emplace_back(di[h], 1.0);
                    pd.terms.emplace_back(bt.var, -bt.mw_per_unit);
                    MilpRow& ec = m.add_row("cec_" + c.id + w + hour_tag(h), RowSense::le, 0.0);
                    ec.terms.emplace_back(so[h], 1.0);
                    ec.terms.emplace_back(bt.var, -bt.mw_per_unit * c.duration_hours);
                    // cyclic SOC recursion
                    MilpRow& sr = m.add_row("csoc_" + c.id + w + hour_tag(h), RowSense::eq, 0.0);
                    sr.terms.emplace_back(so[h], 1.0);
                    sr.terms.emplace_back(so[(h + 23) % 24], -1.0);
                    sr.terms.emplace_back(ch[h], -sq);
                    sr.terms.emplace_back(di[h], 1.0 / sq);
                }
            }
        }

        // Existing storage.
        for (const auto& s : net.storage) {
            const double sq = std::sqrt(s.round_trip_efficiency);
            std::vector<int> ch(24), di(24), so(24);
            for (int h = 0; h < 24; ++h) {
                MilpVariable vc;
                vc.name = "ch_" + s.id + w + hour_tag(h);
                vc.lower = 0.0;
                vc.upper = s.power_capacity;
                ch[h] = m.add_variable(std::move(vc), {s.id, "charge", day.id, h});
                MilpVariable vd;
                vd.name = "di_" + s.id + w + hour_tag(h);
                vd.lower = 0.0;
                vd.upper = s.power_capacity;
                di[h] = m.add_variable(std::move(vd), {s.id, "discharge", day.id, h});
                MilpVariable vs;
                vs.name = "so_" + s.id + w + hour_tag(h);
                vs.lower = 0.0;
                vs.upper = s.energy_capacity;
                so[h] = m.add_variable(std::move(vs), {s.id, "soc", day.id, h});
                bal(s.bus, h).terms.emplace_back(di[h], 1.0);
                bal(s.bus, h).terms.emplace_back(ch[h], -1.0);
            }
            for (int h = 0; h < 24; ++h) {
                MilpRow& sr = m.add_row("soc_" + s.id + w + hour_tag(h), RowSense::eq, 0.0);
                sr.terms.emplace_back(so[h], 1.0);
                sr.terms.emplace_back(so[(h + 23) % 24], -1.0);
                sr.terms.emplace_back(ch[h], -sq);
                sr.terms.emplace_back(di[h], 1.0 / sq);
            }
        }

        // Flows: a nonnegative pair per branch; the receiving end is credited
        // flow * (1 - kappa * r).
        for (const auto& br : net.branches) {
            const double delivered = 1.0 - kappa * br.r;
            const auto rit = reinforce_of.find(br.id);
            const bool reinf = rit != reinforce_of.end();
            const double cap = reinf ? br.rating * cfg.reinforcement_multiplier : br.rating;
            for (int h = 0; h < 24; ++h) {
                MilpVariable vf;
                vf.name = "ff_" + br.id + w + hour_tag(h);
                vf.lower = 0.0;
                vf.upper = cap;
                const int f_idx = m.add_variable(std::move(vf), {br.id, "flow_fwd", day.id, h});
                MilpVariable vr;
                vr.name = "fr_" + br.id + w + hour_tag(h);
                vr.lower = 0.0;
                vr.upper = cap;
                const int r_idx = m.add_variable(std::move(vr), {br.id, "flow_rev", day.id, h});

                bal(br.from_bus, h).terms.emplace_back(f_idx, -1.0);
                bal(br.to_bus, h).terms.emplace_back(f_idx, delivered);
                bal(br.to_bus, h).terms.emplace_back(r_idx, -1.0);
                bal(br.from_bus, h).terms.emplace_back(r_idx, delivered);

                if (reinf) {
                    const double slack_cap = br.rating * (cfg.reinforcement_multiplier - 1.0);
                    MilpRow& rf = m.add_row("flf_" + br.id + w + hour_tag(h), RowSense::le,
                                            br.rating);
                    rf.terms.emplace_back(f_idx, 1.0);
                    rf.terms.emplace_back(rit->second, -slack_cap);
                    MilpRow& rr = m.add_row("flr_" + br.id + w + hour_tag(h), RowSense::le,
                                            br.rating);
                    rr.terms.emplace_back(r_idx, 1.0);
                    rr.terms.emplace_back(rit->second, -slack_cap);
                }
            }
        }

        // Shed per bus-hour, bounded by that bus-hour's load.
        for (const auto& bus : net.buses) {
            auto it = dd.bus_load.find(bus.id);
            for (int h = 0; h < 24; ++h) {
                const double load = it == dd.bus_load.end() ? 0.0 : it->second[h];
                if (load <= 0.0) continue;
                MilpVariable v;
                v.name = "sh_" + bus.id + w + hour_tag(h);
                v.lower = 0.0;
                v.upper = load;
                v.objective = cfg.shed_penalty * weight;
                const int idx = m.add_variable(std::move(v), {bus.id, "shed", day.id, h});
                bal(bus.id, h).terms.emplace_back(idx, 1.0);
                // RPS is measured against served load.
                rps_row.terms.emplace_back(idx, cfg.rps_target);
            }
        }

        for (auto& row : balance) m.rows.push_back(std::move(row));
        m.rows.push_back(std::move(rps_row));
    }

    m.check_consistent();
    return m;
}

} // namespace

MilpInstance build_deterministic_cep(const Network& net, const ScenarioDay& day,
                                     const CepConfig& cfg, const InvestmentFixing* fixing) {
    return build_cep(net, std::span<const ScenarioDay>(&day, 1), cfg, fixing, false);
}

MilpInstance build_stochastic_cep(const Network& net, std::span<const ScenarioDay> days,
                                  const CepConfig& cfg, const InvestmentFixing* fixing) {
    return build_cep(net, days, cfg, fixing, true);
}

Portfolio extract_portfolio(const Network& net, const Solution& sol) {
    Portfolio x;
    x.network = net.name;
    for (const auto& c : net.candidates) {
        double mw;
        if (c.integrality == Integrality::integer_units) {
            mw = std::round(sol.value("nun_" + c.id)) * c.unit_size;
        } else {
            mw = std::clamp(sol.value("bld_" + c.id), 0.0, c.max_build);
            if (std::abs(mw) < 1e-9) mw = 0.0;
        }
        if (c.kind == CandidateKind::generation)
            x.gen_build[c.id] = mw;
        else
            x.storage_build[c.id] = mw;
    }
    for (const auto& br : net.branches) {
        if (!br.reinforcible) continue;
        x.line_reinforced[br.id] = sol.value("rnf_" + br.id) > 0.5 ? 1 : 0;
    }
    return x;
}

void save_portfolio(const Portfolio& x, double objective, const std::filesystem::path& path) {
    nlohmann::ordered_json doc;
    doc["format"] = 1;
    doc["network"] = x.network;
    doc["objective"] = objective;
    doc["gen_build"] = x.gen_build;
    doc["storage_build"] = x.storage_build;
    doc["line_reinforced"] = x.line_reinforced;
    std::ofstream out(path);
    if (!out) throw Error("cannot write portfolio file '" + path.string() + "'");
    out << doc.dump(2) << "\n";
}

Portfolio load_portfolio(const std::filesystem::path& path, double* objective) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open portfolio file '" + path.string() + "'");
    nlohmann::ordered_json doc;
    try {
        doc = nlohmann::ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(path.string() + ": parse error: " + e.what());
    }
    if (!doc.contains("format") || doc["format"].get<int>() != 1)
        throw Error(path.string() + ": unsupported portfolio format (expected format: 1)");
    Portfolio x;
    x.network = doc.value("network", std::string());
    for (auto it = doc.at("gen_build").begin(); it != doc.at("gen_build").end(); ++it)
        x.gen_build[it.key()] = it.value().get<double>();
    for (auto it = doc.at("storage_build").begin(); it != doc.at("storage_build").end(); ++it)
        x.storage_build[it.key()] = it.value().get<double>();
    for (auto it = doc.at("line_reinforced").begin(); it != doc.at("line_reinforced").end(); ++it)
        x.line_reinforced[it.key()] = it.value().get<int>();
    if (objective) *objective = doc.value("objective", 0.0);
    return x;
}

double portfolio_capex(const Network& net, const Portfolio& x) {
    double capex = 0.0;
    for (const auto& [cid, mw] : x.gen_build) capex += net.find_candidate(cid)->capex * mw;
    for (const auto& [cid, mw] : x.storage_build) capex += net.find_candidate(cid)->capex * mw;
    for (const auto& [bid, y] : x.line_reinforced)
        if (y) capex += net.find_branch(bid)->reinforce_cost;
    return capex;
}

void check_portfolio(const Network& net, const Portfolio& x) {
    if (!x.network.empty() && !net.name.empty() && x.network != net.name)
        throw Error("portfolio belongs to network '" + x.network + "', not '" + net.name + "'");
    auto check_build = [&](const std::map<std::string, double>& table, CandidateKind kind) {
        for (const auto& [cid, mw] : table) {
            const Candidate* c = net.find_candidate(cid);
            if (!c || c->kind != kind)
                throw Error("portfolio references unknown candidate '" + cid + "'");
            if (mw < -1e-9 || mw > c->max_build + 1e-6)
                throw Error("portfolio build " + std::to_string(mw) + " MW for candidate '" + cid +
                            "' violates [0, max_build]");
            if (c->integrality == Integrality::integer_units) {
                const double units = mw / c->unit_size;
                if (std::abs(units - std::round(units)) > 1e-6)
                    throw Error("portfolio build for integer candidate '" + cid +
                                "' is not a whole number of units");
            }
        }
    };
    check_build(x.gen_build, CandidateKind::generation);
    check_build(x.storage_build, CandidateKind::storage);
    for (const auto& [bid, y] : x.line_reinforced) {
        const Branch* br = net.find_branch(bid);
        if (!br || !br->reinforcible)
            throw Error("portfolio reinforces unknown or non-reinforcible branch '" + bid + "'");
        if (y != 0 && y != 1) throw Error("reinforcement for branch '" + bid + "' must be 0 or 1");
    }
}

ScenarioOperations scenario_operations(const Network& net, const ScenarioDay& day,
                                       const CepConfig& cfg, const Solution& sol) {
    ScenarioOperations ops;
    ops.day = day.id;
    ops.probability = day.probability;
    const DayData dd = day_data(net, day);
    ops.total_load_mwh = dd.total_load_mwh;
    const std::string w = "_" + day.id;

    for (const auto& bus : net.buses) {
        auto it = dd.bus_load.find(bus.id);
        if (it == dd.bus_load.end()) continue;
        for (int h = 0; h < 24; ++h) {
            if (it->second[h] <= 0.0) continue;
            const double shed = sol.value("sh_" + bus.id + w + hour_tag(h));
            ops.shed_mw[h] += shed;
            ops.shed_mwh += shed;
        }
    }
    double dispatch_cost = 0.0;
    for (const auto& g : net.generators) {
        for (int h = 0; h < 24; ++h) {
            const double p = sol.value("gen_" + g.id + w + hour_tag(h));
            dispatch_cost += p * g.variable_cost;
            if (g.is_renewable) ops.renewable_mwh += p;
        }
    }
    for (const auto& c : net.candidates) {
        if (c.kind != CandidateKind::generation) continue;
        for (int h = 0; h < 24; ++h) {
            const double p = sol.value("cgn_" + c.id + w + hour_tag(h));
            dispatch_cost += p * c.variable_cost;
            if (c.is_renewable) ops.renewable_mwh += p;
        }
    }
    ops.rps_violation_mwh = sol.value("rpsv" + w);
    ops.served_mwh = ops.total_load_mwh - ops.shed_mwh;
    ops.op_cost = dispatch_cost + cfg.shed_penalty * ops.shed_mwh +
                  cfg.rps_penalty * ops.rps_violation_mwh;
    return ops;
}

Evaluation evaluate_portfolio(const Network& net, const Portfolio& x,
                              std::span<const ScenarioDay> days, const CepConfig& cfg) {
    if (days.empty()) throw Error("evaluate_portfolio: empty scenario set");
    check_portfolio(net, x);

    InvestmentFixing fixing;
    for (const auto& c : net.candidates) {
        auto& table = c.kind == CandidateKind::generation ? fixing.fixed_gen_build
                                                          : fixing.fixed_storage_build;
        const auto& src = c.kind == CandidateKind::generation ? x.gen_build : x.storage_build;
        auto it = src.find(c.id);
        table[c.id] = it == src.end() ? 0.0 : it->second;
    }
    for (const auto& br : net.branches) {
        if (!br.reinforcible) continue;
        auto it = x.line_reinforced.find(br.id);
        fixing.fixed_reinforce[br.id] = it == x.line_reinforced.end() ? 0 : it->second;
    }

    Evaluation ev;
    ev.capex = portfolio_capex(net, x);
    const double scale = cfg.annualize ? 365.0 : 1.0;
    for (const auto& day : days) {
        MilpInstance m = build_deterministic_cep(net, day, cfg, &fixing);
        ContinuousSolve cs = solve_continuous(m, {});
        if (cs.status != LpStatus::optimal)
            throw Error("operational LP for day '" + day.id +
                        "' did not solve to optimality (shed slack should make it feasible)");
        Solution sol;
        sol.status = SolveStatus::optimal;
        sol.objective = cs.objective;
        for (std::size_t j = 0; j < m.vars.size(); ++j) sol.values[m.vars[j].name] = cs.x[j];
        ScenarioOperations ops = scenario_operations(net, day, cfg, sol);
        ev.expected_cost += day.probability * scale * ops.op_cost;
        ev.per_scenario.push_back(std::move(ops));
    }
    ev.expected_cost += ev.capex;
    return ev;
}

} // namespace gridfold
