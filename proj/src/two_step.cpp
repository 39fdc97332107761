#include "gridfold/two_step.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <set>
#include <unordered_set>

namespace gridfold {

namespace {

double build_of(const Portfolio& x, const Candidate& c) {
    const auto& table = c.kind == CandidateKind::generation ? x.gen_build : x.storage_build;
    auto it = table.find(c.id);
    return it == table.end() ? 0.0 : it->second;
}

struct GroupKey {
    std::string bus;  // empty for Map C
    std::string tech;
    CandidateKind kind;

    bool operator<(const GroupKey& o) const {
        if (bus != o.bus) return bus < o.bus;
        if (tech != o.tech) return tech < o.tech;
        return kind < o.kind;
    }
};

// Proportional-to-max_build split of `total` across continuous members.
// Never violates a site bound because total <= sum(max_build).
void apportion_continuous(const std::vector<const Candidate*>& members,
                          const std::vector<double>& builds, InvestmentFixing& out) {
    double total = 0.0, cap = 0.0;
    for (std::size_t i = 0; i < members.size(); ++i) {
        total += builds[i];
        cap += members[i]->max_build;
    }
    if (total > cap + 1e-6)
        throw Error("group total " + std::to_string(total) + " MW exceeds group capacity " +
                    std::to_string(cap));
    double assigned = 0.0;
    for (std::size_t i = 0; i < members.size(); ++i) {
        auto& table = members[i]->kind == CandidateKind::generation ? out.fixed_gen_build
                                                                    : out.fixed_storage_build;
        double share;
        if (i + 1 == members.size()) {
            share = total - assigned; // keep the sum exact
        } else {
            share = cap > 0.0 ? total * members[i]->max_build / cap : 0.0;
        }
        share = std::clamp(share, 0.0, members[i]->max_build);
        table[members[i]->id] = share;
        assigned += share;
    }
}

// Largest-remainder apportionment in whole units, capped per site, with
// overflow water-filled into remaining capacity. Deterministic: remainders
// break ties by candidate id.
void apportion_integer(const std::vector<const Candidate*>& members,
                       const std::vector<double>& builds, InvestmentFixing& out) {
    const double unit = members.front()->unit_size;
    long long total_units = 0;
    double cap_mw = 0.0;
    for (std::size_t i = 0; i < members.size(); ++i) {
        total_units += static_cast<long long>(std::llround(builds[i] / unit));
        cap_mw += members[i]->max_build;
    }
    std::vector<long long> caps(members.size());
    long long cap_units = 0;
    for (std::size_t i = 0; i < members.size(); ++i) {
        caps[i] = static_cast<long long>(std::floor(members[i]->max_build / unit + 1e-9));
        cap_units += caps[i];
    }
    if (total_units > cap_units)
        throw Error("integer group total exceeds site capacities for tech '" +
                    members.front()->tech + "'");

    std::vector<long long> units(members.size(), 0);
    std::vector<double> frac(members.size(), 0.0);
    long long placed = 0;
    for (std::size_t i = 0; i < members.size(); ++i) {
        const double quota =
            cap_mw > 0.0 ? static_cast<double>(total_units) * members[i]->max_build / cap_mw : 0.0;
        units[i] = std::min(static_cast<long long>(std::floor(quota + 1e-9)), caps[i]);
        frac[i] = quota - std::floor(quota + 1e-9);
        placed += units[i];
    }
    std::vector<std::size_t> order(members.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (frac[a] != frac[b]) return frac[a] > frac[b];
        return members[a]->id < members[b]->id;
    });
    while (placed < total_units) {
        bool progressed = false;
        for (std::size_t k = 0; k < order.size() && placed < total_units; ++k) {
            const std::size_t i = order[k];
            if (units[i] < caps[i]) {
                ++units[i];
                ++placed;
                progressed = true;
            }
        }
        if (!progressed) throw Error("integer apportionment stalled (capacity accounting bug)");
    }
    for (std::size_t i = 0; i < members.size(); ++i) {
        auto& table = members[i]->kind == CandidateKind::generation ? out.fixed_gen_build
                                                                    : out.fixed_storage_build;
        table[members[i]->id] = static_cast<double>(units[i]) * unit;
    }
}

} // namespace

InvestmentFixing map_investments(const Portfolio& x_tilde, const MergeMap& mm,
                                 GenStorageMap strategy, const Network& original) {
    InvestmentFixing out;

    std::map<GroupKey, std::vector<const Candidate*>> groups;
    for (const auto& c : original.candidates) {
        auto reloc = mm.candidate_bus.find(c.id);
        if (reloc == mm.candidate_bus.end())
            throw Error("candidate '" + c.id + "' has no relocation entry in the merge map");
        GroupKey key;
        key.tech = c.tech;
        key.kind = c.kind;
        if (strategy != GenStorageMap::map_c) key.bus = reloc->second;
        groups[key].push_back(&c);
    }

    for (const auto& [key, members] : groups) {
        double total = 0.0;
        std::vector<double> builds;
        for (const Candidate* c : members) {
            builds.push_back(build_of(x_tilde, *c));
            total += builds.back();
        }

        if (strategy == GenStorageMap::map_a) {
            // Apportion each integrality class separately so integer sites
            // stay on their unit lattice and sums remain exact.
            std::map<std::pair<int, double>, std::vector<std::size_t>> classes;
            for (std::size_t i = 0; i < members.size(); ++i) {
                const bool integer = members[i]->integrality == Integrality::integer_units;
                classes[{integer ? 1 : 0, integer ? members[i]->unit_size : 0.0}].push_back(i);
            }
            for (const auto& [ckey, idxs] : classes) {
                std::vector<const Candidate*> sub;
                std::vector<double> sub_builds;
                for (std::size_t i : idxs) {
                    sub.push_back(members[i]);
                    sub_builds.push_back(builds[i]);
                }
                if (ckey.first == 1)
                    apportion_integer(sub, sub_builds, out);
                else
                    apportion_continuous(sub, sub_builds, out);
            }
        } else {
            InvestmentFixing::GroupEquality eq;
            eq.name = (key.bus.empty() ? std::string() : key.bus + "_") + key.tech +
                      (key.kind == CandidateKind::storage ? "_storage" : "");
            for (const Candidate* c : members) eq.candidate_ids.push_back(c->id);
            eq.total_mw = total;
            out.equalities.push_back(std::move(eq));
        }
    }
    return out;
}

void map_transmission(const Portfolio& x_tilde, const MergeMap& mm, TransmissionMap mode,
                      const Network& original, InvestmentFixing& out) {
    if (mode == TransmissionMap::reinforce_all) {
        for (const auto& br : original.branches) {
            if (br.kind == BranchKind::line && br.reinforcible) out.fixed_reinforce[br.id] = 1;
        }
        return;
    }

    auto decision = [&](const std::string& reduced_id) {
        auto it = x_tilde.line_reinforced.find(reduced_id);
        return it == x_tilde.line_reinforced.end() ? 0 : it->second;
    };
    auto fix = [&](const std::string& orig_id, int y) {
        const Branch* br = original.find_branch(orig_id);
        if (!br) throw Error("merge map references unknown original branch '" + orig_id + "'");
        if (!br->reinforcible) return;
        auto [it, inserted] = out.fixed_reinforce.emplace(orig_id, y);
        if (!inserted) it->second = std::max(it->second, y); // reinforce wins on overlap
    };

    std::unordered_set<std::string> represented; // originals absorbed by compositions
    for (const auto& [rid, comp] : mm.line_composition) {
        const int y = decision(rid);
        for (const auto& cid : comp.flatten()) {
            represented.insert(cid);
            fix(cid, y);
        }
    }
    const std::set<std::string> removed(mm.removed_lines.begin(), mm.removed_lines.end());
    for (const auto& br : original.branches) {
        if (represented.count(br.id) || removed.count(br.id)) continue;
        // Identity-carried branch (line or transformer): its own decision maps.
        fix(br.id, decision(br.id));
    }
}

Solution solve_milp(const MilpInstance& m, const SolverSpec& solver, double gap,
                    double time_limit_s) {
    if (solver.use_oracle) {
        BruteforceLimits limits;
        limits.max_lattice = solver.oracle_max_lattice;
        limits.time_limit_s = time_limit_s;
        return solve_bruteforce(m, limits);
    }
    if (solver.solver_cmd.empty())
        throw Error("no solver command configured (set --solver-cmd or GRIDFOLD_SOLVER_CMD, "
                    "or use --oracle)");
    return solve_external(m, solver.solver_cmd, gap, time_limit_s);
}

namespace {

StepReport solve_step(const Network& net, std::span<const ScenarioDay> days,
                      const CepConfig& cfg, const InvestmentFixing* fixing,
                      const SolverSpec& solver, double gap, double time_limit,
                      const char* step_name) {
    using clock = std::chrono::steady_clock;
    StepReport rep;
    const auto t0 = clock::now();
    MilpInstance m = days.size() == 1 ? build_deterministic_cep(net, days.front(), cfg, fixing)
                                      : build_stochastic_cep(net, days, cfg, fixing);
    rep.build_s = std::chrono::duration<double>(clock::now() - t0).count();
    rep.solution = solve_milp(m, solver, gap, time_limit);
    rep.solve_s = rep.solution.wall_time_s > 0.0
                      ? rep.solution.wall_time_s
                      : std::chrono::duration<double>(clock::now() - t0).count() - rep.build_s;
    const Solution& sol = rep.solution;
    if (sol.status == SolveStatus::infeasible)
        throw Error(std::string(step_name) +
                    " reported infeasible, which the shed slack makes impossible; "
                    "solver or model defect");
    if (sol.status == SolveStatus::error)
        throw Error(std::string(step_name) + " failed: " + sol.message);
    if (sol.status == SolveStatus::time_limit && sol.values.empty())
        throw Error(std::string(step_name) + " hit the time limit with no incumbent");
    return rep;
}

} // namespace

TwoStepResult run_two_step(const Network& original, const ReductionConfig& rcfg,
                           std::span<const ScenarioDay> days, const CepConfig& cep_cfg,
                           const MappingStrategy& strategy, const SolverSpec& solver,
                           const Network* pre_reduced, const MergeMap* pre_mm) {
    if ((pre_reduced == nullptr) != (pre_mm == nullptr))
        throw Error("run_two_step: pre-reduced network and merge map must be given together");

    TwoStepResult res;
    if (pre_reduced) {
        res.reduced = *pre_reduced;
        res.mm = *pre_mm;
    } else {
        auto [reduced, mm] = reduce_network(original, rcfg);
        res.reduced = std::move(reduced);
        res.mm = std::move(mm);
        if (rcfg.tighten) res.reduced = tighten_candidates(res.reduced, original, res.mm);
    }
    res.stats = reduction_stats(original, res.reduced);

    res.step1 = solve_step(res.reduced, days, cep_cfg, nullptr, solver, cep_cfg.mip_gap_step1,
                           cep_cfg.time_limit_step1, "step 1");
    res.x_tilde = extract_portfolio(res.reduced, res.step1.solution);

    res.fixing = map_investments(res.x_tilde, res.mm, strategy.gen_storage, original);
    map_transmission(res.x_tilde, res.mm, strategy.transmission, original, res.fixing);

    res.step2 = solve_step(original, days, cep_cfg, &res.fixing, solver, cep_cfg.mip_gap_step2,
                           cep_cfg.time_limit_step2, "step 2");
    res.x_prime = extract_portfolio(original, res.step2.solution);
    res.f_xprime = res.step2.solution.objective;
    return res;
}

} // namespace gridfold
