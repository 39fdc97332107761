// Acceptance suite: one criterion per run_criterion call, one pass/fail line
// per criterion on stdout. Exit code 0 iff everything passed.

#include "gridfold/cep.hpp"
#include "gridfold/metrics.hpp"
#include "gridfold/network_io.hpp"
#include "gridfold/reduction.hpp"
#include "gridfold/scenario.hpp"
#include "gridfold/simplex.hpp"
#include "gridfold/solver.hpp"
#include "gridfold/two_step.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace gridfold;

namespace {

struct Harness {
    int failures = 0;

    void run(int number, const std::string& name, const std::function<void()>& body) {
        const auto t0 = std::chrono::steady_clock::now();
        std::string error;
        try {
            body();
        } catch (const std::exception& e) {
            error = e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (error.empty()) {
            std::printf("[PASS] criterion %2d: %s (%.1fs)\n", number, name.c_str(), secs);
        } else {
            std::printf("[FAIL] criterion %2d: %s (%.1fs)\n       %s\n", number, name.c_str(),
                        secs, error.c_str());
            ++failures;
        }
        std::fflush(stdout);
    }
};

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

void require(bool ok, const std::string& msg) {
    if (!ok) fail(msg);
}

CepConfig desk_cfg() {
    CepConfig cfg;
    cfg.rps_target = 0.2;
    cfg.annualize = false;
    return cfg;
}

SynthKnobs desk_knobs(int clusters) {
    SynthKnobs knobs;
    knobs.n_clusters = clusters;
    knobs.max_integer_units = 2;
    return knobs;
}

Solution oracle_solve(const MilpInstance& m) {
    const Solution sol = solve_bruteforce(m);
    if (sol.status != SolveStatus::optimal)
        fail("oracle solve did not reach optimality: " + sol.message);
    return sol;
}

double rel_tol(double reference, double eps = 1e-6) {
    return eps * std::abs(reference) + 1e-9;
}

// -------------------------------------------------------------------------

void criterion_fourbus() {
    const Network net = load_network(std::filesystem::path(FIXTURE_DIR) / "fourbus.json");
    ReductionConfig cfg;
    cfg.distance_km = 2.0;
    cfg.mode = ReductionMode::full;
    auto [reduced, mm] = reduce_network(net, cfg);

    require(mm.removed_lines == std::vector<std::string>{"B"}, "radial line B must be eliminated");
    require(reduced.buses.size() == 2, "expected 2 buses after the merge");
    require(mm.bus_map.at("b2") == "b1", "bus 2 must merge into bus 1");

    const Branch* line = nullptr;
    for (const auto& br : reduced.branches)
        if (br.kind == BranchKind::line) {
            require(line == nullptr, "expected exactly one line");
            line = &br;
        }
    require(line != nullptr, "merged line missing");
    require(line->r == 0.01 + 0.03, "series r must equal r_A + r_C exactly");
    require(line->x == 0.10 + 0.20, "series x must equal x_A + x_C exactly");
    require(mm.line_composition.count(line->id) == 1, "merged line must carry a composition");
    require(mm.line_composition.at(line->id).flatten() == std::vector<std::string>{"A", "C"},
            "line composition must be [A, C]");
}

void criterion_identity() {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto [net, days] = synth_instance(seed, 6 + static_cast<int>(seed % 3), 1, desk_knobs(2));
        ReductionConfig rcfg;
        rcfg.distance_km = 0.0;
        auto [reduced, mm] = reduce_network(net, rcfg);
        require(reduced == net, "D = 0 must be the identity (seed " + std::to_string(seed) + ")");
        for (const auto& [a, b] : mm.bus_map)
            require(a == b, "identity merge map expected (seed " + std::to_string(seed) + ")");

        const CepConfig cep = desk_cfg();
        const Solution base = oracle_solve(build_deterministic_cep(net, days[0], cep));
        MappingStrategy strat;
        strat.gen_storage = GenStorageMap::map_b;
        const TwoStepResult res =
            run_two_step(net, rcfg, days, cep, strat, SolverSpec{}, &reduced, &mm);
        const double e = ermm(res.f_xprime, base.objective);
        require(std::abs(e) <= 1e-6,
                "ERMM " + std::to_string(e) + "% exceeds 1e-6 (seed " + std::to_string(seed) + ")");
    }
}

void criterion_lower_bound() {
    // Availability keys are shared per (tech, cluster), satisfying the
    // uniform-availability caveat for merged buses.
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        const int buses = 6 + static_cast<int>(seed % 7);       // up to 12
        const int n_days = 1 + static_cast<int>(seed % 2);      // up to 2
        auto [net, days] = synth_instance(seed * 31 + 7, buses, n_days, desk_knobs(2));
        ReductionConfig rcfg;
        rcfg.distance_km = 10.0;
        auto [reduced, mm] = reduce_network(net, rcfg);
        (void)mm;
        require(reduced.buses.size() < net.buses.size(),
                "instance must actually reduce (seed " + std::to_string(seed) + ")");
        const CepConfig cep = desk_cfg();
        const Solution full = oracle_solve(build_stochastic_cep(net, days, cep));
        const Solution red = oracle_solve(build_stochastic_cep(reduced, days, cep));
        require(red.objective <= full.objective + rel_tol(full.objective),
                "reduced optimum " + std::to_string(red.objective) + " exceeds original " +
                    std::to_string(full.objective) + " (seed " + std::to_string(seed) + ")");
    }
}

void criterion_hierarchy() {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto [net, days] = synth_instance(seed * 17 + 3, 8, 1, desk_knobs(2));
        ReductionConfig rcfg;
        rcfg.distance_km = 10.0;
        auto [reduced, mm] = reduce_network(net, rcfg);
        const CepConfig cep = desk_cfg();
        const Solution base = oracle_solve(build_deterministic_cep(net, days[0], cep));

        std::map<char, double> f;
        const std::pair<char, GenStorageMap> maps[] = {{'A', GenStorageMap::map_a},
                                                       {'B', GenStorageMap::map_b},
                                                       {'C', GenStorageMap::map_c}};
        for (const auto& [label, g] : maps) {
            MappingStrategy strat;
            strat.gen_storage = g;
            const TwoStepResult res =
                run_two_step(net, rcfg, days, cep, strat, SolverSpec{}, &reduced, &mm);
            f[label] = res.f_xprime;
        }
        const std::string tag = " (seed " + std::to_string(seed) + ")";
        require(base.objective <= f['C'] + rel_tol(f['C']), "f(x*) > f(Map C)" + tag);
        require(f['C'] <= f['B'] + rel_tol(f['B']), "f(Map C) > f(Map B)" + tag);
        require(f['B'] <= f['A'] + rel_tol(f['A']), "f(Map B) > f(Map A)" + tag);
    }
}

void criterion_monotonicity() {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        SynthKnobs knobs;
        knobs.n_clusters = 6;
        knobs.include_transformers = seed % 2 == 0;
        auto [net, days] = synth_instance(seed * 13, 60, 1, knobs);
        (void)days;
        std::size_t prev_buses = net.buses.size() + 1;
        std::size_t prev_branches = net.branches.size() + 1;
        double prev_min_r = -1.0, prev_min_x = -1.0;
        for (double d : {0.0, 5.0, 60.0, 500.0}) {
            ReductionConfig rcfg;
            rcfg.distance_km = d;
            rcfg.mode = ReductionMode::full;
            auto [reduced, mm] = reduce_network(net, rcfg);
            (void)mm;
            const NetworkStats s = network_stats(reduced);
            const std::string tag =
                " (seed " + std::to_string(seed) + ", D = " + std::to_string(d) + ")";
            require(s.buses <= prev_buses, "bus count increased with D" + tag);
            require(s.branches <= prev_branches, "branch count increased with D" + tag);
            const double min_r = s.min_r.value_or(std::numeric_limits<double>::infinity());
            const double min_x = s.min_x.value_or(std::numeric_limits<double>::infinity());
            require(min_r >= prev_min_r - 1e-15, "min r decreased with D" + tag);
            require(min_x >= prev_min_x - 1e-15, "min x decreased with D" + tag);
            prev_buses = s.buses;
            prev_branches = s.branches;
            prev_min_r = min_r;
            prev_min_x = min_x;
        }
    }
}

void criterion_tightening() {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto [net, days] = synth_instance(seed * 19 + 1, 8, 1, desk_knobs(2));
        ReductionConfig rcfg;
        rcfg.distance_km = 10.0;
        auto [reduced, mm] = reduce_network(net, rcfg);
        const Network tightened = tighten_candidates(reduced, net, mm);
        const CepConfig cep = desk_cfg();
        const Solution plain = oracle_solve(build_deterministic_cep(reduced, days[0], cep));
        const Solution tight = oracle_solve(build_deterministic_cep(tightened, days[0], cep));
        require(tight.objective >= plain.objective - rel_tol(plain.objective),
                "tightened objective " + std::to_string(tight.objective) + " below untightened " +
                    std::to_string(plain.objective) + " (seed " + std::to_string(seed) + ")");
    }
}

void criterion_external_solver() {
    const std::string cmd = std::string(MPS_SOLVE_BIN) + " {mps} {sol} {gap} {timelimit}";
    std::vector<MilpInstance> instances;

    // CEP desk models.
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        auto [net, days] = synth_instance(seed * 23, 6, 1, desk_knobs(2));
        instances.push_back(build_deterministic_cep(net, days[0], desk_cfg()));
        instances.back().name = "cep" + std::to_string(seed);
    }
    // Random knapsacks and small bounded MILPs.
    std::mt19937_64 g(404);
    auto rnd = [&](double lo, double hi) { return lo + (hi - lo) * ((g() >> 11) * 0x1.0p-53); };
    for (int k = 0; k < 12; ++k) {
        MilpInstance m;
        m.name = "rand" + std::to_string(k);
        const int nb = 3 + k % 3;
        auto& row = m.add_row("cap", RowSense::le, 0.0);
        double total_w = 0.0;
        for (int j = 0; j < nb; ++j) {
            MilpVariable v;
            v.name = "x" + std::to_string(j);
            v.kind = j % 2 == 0 ? VarKind::binary : VarKind::integer_var;
            v.lower = 0.0;
            v.upper = v.kind == VarKind::binary ? 1.0 : 2.0;
            v.objective = rnd(-10.0, -1.0);
            const int idx = m.add_variable(std::move(v));
            const double w = rnd(1.0, 4.0);
            row.terms.emplace_back(idx, w);
            total_w += w;
        }
        row.rhs = total_w * 0.6;
        MilpVariable slack;
        slack.name = "y";
        slack.lower = 0.0;
        slack.upper = 3.0;
        slack.objective = rnd(0.5, 2.0);
        const int y = m.add_variable(std::move(slack));
        m.add_row("link", RowSense::ge, rnd(0.5, 1.5)).terms.emplace_back(y, 1.0);
        instances.push_back(std::move(m));
    }
    require(instances.size() == 20, "expected 20 generated MILPs");

    for (const auto& m : instances) {
        const Solution oracle = oracle_solve(m);
        const Solution ext = solve_external(m, cmd, 0.0, 120.0);
        require(ext.status == SolveStatus::optimal,
                "external solve failed on " + m.name + ": " + ext.message);
        const double tol = 0.0 * std::abs(oracle.objective) + 1e-6;
        require(std::abs(ext.objective - oracle.objective) <= tol,
                "external objective " + std::to_string(ext.objective) + " vs oracle " +
                    std::to_string(oracle.objective) + " on " + m.name);
    }
}

void criterion_metric_formulas() {
    require(ermm(105.0, 100.0) == 5.0, "ermm(105,100) must be exactly 5");
    require(ermm(100.0, 100.0) == 0.0, "ermm(100,100) must be exactly 0");
    require(ermm(99.0, 100.0) == -1.0, "ermm(99,100) must be exactly -1");

    using W = WeightedCost;
    require(std::abs(ermm_stochastic(std::vector<W>{{1.0, 105.0}},
                                     std::vector<W>{{1.0, 100.0}}) -
                     5.0) < 1e-12,
            "single-scenario stochastic ERMM must equal ermm");
    require(std::abs(ermm_stochastic(std::vector<W>{{0.5, 110.0}, {0.5, 90.0}},
                                     std::vector<W>{{0.5, 100.0}, {0.5, 100.0}})) < 1e-12,
            "equal means must give 0");
    require(std::abs(ermm_stochastic(std::vector<W>{{0.25, 120.0}, {0.75, 104.0}},
                                     std::vector<W>{{0.25, 100.0}, {0.75, 100.0}}) -
                     8.0) < 1e-12,
            "0.25*120 + 0.75*104 = 108 must give 8%");

    // Hand-computed reliability traces.
    ScenarioOperations clean;
    clean.day = "t0";
    clean.probability = 1.0;
    clean.renewable_mwh = 240.0;
    clean.served_mwh = 240.0;
    const ReliabilityReport r0 = reliability_metrics(std::vector<ScenarioOperations>{clean}, 1.0);
    require(r0.eue_mwh == 0.0 && r0.lolh_hours == 0 && r0.total_hours == 24,
            "clean trace must give EUE 0, LOLH 0/24");
    require(std::abs(r0.achieved_rps - 100.0) < 1e-12, "all-renewable trace must give RPS 100%");

    ScenarioOperations one_hour = clean;
    one_hour.renewable_mwh = 0.0;
    one_hour.shed_mw[11] = 2.0;
    one_hour.shed_mwh = 2.0;
    one_hour.served_mwh = 238.0;
    const ReliabilityReport r1 =
        reliability_metrics(std::vector<ScenarioOperations>{one_hour}, 5.0);
    require(std::abs(r1.eue_mwh - 10.0) < 1e-12, "EUE must scale: 2 MWh x 5");
    require(r1.lolh_hours == 1 && r1.total_hours == 24, "LOLH must be 1/24");

    ScenarioOperations half = clean;
    half.probability = 0.5;
    ScenarioOperations shedding;
    shedding.day = "t1";
    shedding.probability = 0.5;
    shedding.shed_mw[3] = 1.0;
    shedding.shed_mw[4] = 1.0;
    shedding.shed_mwh = 2.0;
    shedding.renewable_mwh = 100.0;
    shedding.served_mwh = 200.0;
    const ReliabilityReport r2 =
        reliability_metrics(std::vector<ScenarioOperations>{half, shedding}, 1.0);
    require(std::abs(r2.eue_mwh - 1.0) < 1e-12, "probability-weighted EUE must be 1 MWh");
    require(r2.lolh_hours == 2 && r2.total_hours == 48, "LOLH must be 2/48");
    // (0.5*240 + 0.5*100) / (0.5*240 + 0.5*200) = 170/220.
    require(std::abs(r2.achieved_rps - 100.0 * 170.0 / 220.0) < 1e-9,
            "weighted RPS must equal 170/220");
}

void criterion_conservation() {
    int checked = 0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        SynthKnobs knobs;
        knobs.n_clusters = 2 + static_cast<int>(seed % 3);
        knobs.include_transformers = seed % 2 == 0;
        auto [net, days] = synth_instance(seed * 7 + 2, 10 + static_cast<int>(seed % 8), 1, knobs);
        (void)days;
        ReductionConfig rcfg;
        rcfg.distance_km = seed % 3 == 0 ? 5.0 : (seed % 3 == 1 ? 50.0 : 1e6);
        rcfg.mode = seed % 4 == 0 ? ReductionMode::radial_only : ReductionMode::full;
        auto [reduced, mm] = reduce_network(net, rcfg);
        (void)mm;

        auto totals = [](const Network& n) {
            double load = 0.0, gen = 0.0, sp = 0.0, se = 0.0;
            std::size_t xf = 0;
            for (const auto& l : n.loads) load += l.peak;
            for (const auto& g : n.generators) gen += g.capacity;
            for (const auto& s : n.storage) {
                sp += s.power_capacity;
                se += s.energy_capacity;
            }
            for (const auto& br : n.branches)
                if (br.kind == BranchKind::transformer) ++xf;
            return std::tuple{load, gen, sp, se, xf};
        };
        const auto [l0, g0, p0, e0, x0] = totals(net);
        const auto [l1, g1, p1, e1, x1] = totals(reduced);
        const std::string tag = " (seed " + std::to_string(seed) + ")";
        require(l0 == l1, "total load changed" + tag);
        require(g0 == g1, "total existing capacity changed" + tag);
        require(p0 == p1 && e0 == e1, "storage totals changed" + tag);
        require(x0 == x1, "transformer count changed" + tag);
        require(net.generators.size() == reduced.generators.size() &&
                    net.storage.size() == reduced.storage.size() &&
                    net.loads.size() == reduced.loads.size() &&
                    net.candidates.size() == reduced.candidates.size(),
                "element counts changed" + tag);
        ++checked;
    }
    require(checked == 50, "expected 50 instances");
}

void criterion_stochastic_consistency() {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto [net, days] = synth_instance(seed * 11 + 5, 6 + static_cast<int>(seed % 3), 1,
                                          desk_knobs(2));
        const CepConfig cep = desk_cfg();
        const Solution det = oracle_solve(build_deterministic_cep(net, days[0], cep));
        const Solution sto = oracle_solve(build_stochastic_cep(net, days, cep));
        const std::string tag = " (seed " + std::to_string(seed) + ")";
        require(det.objective == sto.objective,
                "single-scenario extensive form must match deterministic exactly" + tag);
        require(extract_portfolio(net, det) == extract_portfolio(net, sto),
                "portfolios must match exactly" + tag);

        std::vector<ScenarioDay> twice{days[0], days[0]};
        twice[0].probability = 0.5;
        twice[1].probability = 0.5;
        twice[1].id = days[0].id + "b";
        const Solution dup = oracle_solve(build_stochastic_cep(net, twice, cep));
        require(std::abs(dup.objective - det.objective) <= rel_tol(det.objective, 1e-9),
                "duplicated-scenario objective diverged" + tag);
        const Portfolio pa = extract_portfolio(net, det);
        const Portfolio pb = extract_portfolio(net, dup);
        for (const auto& [cid, mw] : pa.gen_build)
            require(std::abs(mw - pb.gen_build.at(cid)) <= 1e-6,
                    "duplicated-scenario generation build diverged" + tag);
        for (const auto& [cid, mw] : pa.storage_build)
            require(std::abs(mw - pb.storage_build.at(cid)) <= 1e-6,
                    "duplicated-scenario storage build diverged" + tag);
        require(pa.line_reinforced == pb.line_reinforced,
                "duplicated-scenario reinforcement diverged" + tag);
    }
}

} // namespace

int main() {
    Harness h;
    h.run(1, "four-bus worked example: radial elimination, merge, series composition",
          criterion_fourbus);
    h.run(2, "identity sanity: D = 0 reduction and Map B ERMM = 0 on 10 instances",
          criterion_identity);
    h.run(3, "lower-bound property on 25 uniform-availability instances", criterion_lower_bound);
    h.run(4, "mapping hierarchy f(x*) <= Map C <= Map B <= Map A on 10 instances",
          criterion_hierarchy);
    h.run(5, "monotone counts and impedance floors over D on 5 sixty-bus instances",
          criterion_monotonicity);
    h.run(6, "tightening never lowers the step-1 objective on 10 instances", criterion_tightening);
    h.run(7, "external solver matches the oracle on 20 MILPs", criterion_external_solver);
    h.run(8, "metric formulas: ermm, stochastic ermm, reliability traces", criterion_metric_formulas);
    h.run(9, "conservation across 50 random reductions", criterion_conservation);
    h.run(10, "stochastic consistency: degenerate and duplicated scenario sets",
          criterion_stochastic_consistency);

    if (h.failures == 0) {
        std::printf("all 10 acceptance criteria passed\n");
        return 0;
    }
    std::printf("%d acceptance criteria FAILED\n", h.failures);
    return 1;
}
