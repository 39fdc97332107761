#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gridfold/cep.hpp"
#include "gridfold/reduction.hpp"
#include "gridfold/scenario.hpp"
#include "gridfold/simplex.hpp"
#include "gridfold/solver.hpp"

#include <cmath>

using namespace gridfold;

namespace {

ScenarioDay flat_day(double p = 1.0) {
    ScenarioDay d;
    d.id = "d0";
    d.probability = p;
    return d; // empty keys resolve to flat 1.0 profiles
}

CepConfig test_cfg() {
    CepConfig cfg;
    cfg.rps_target = 0.0;
    cfg.annualize = false;
    return cfg;
}

Network one_bus(double load_mw, double gen_mw, double varcost) {
    Network net;
    net.name = "onebus";
    net.buses = {{"b0", {37.0, -120.0}, true, 230.0}};
    if (gen_mw > 0.0) net.generators.push_back({"g0", "b0", "NG", gen_mw, varcost, false, "", false});
    net.loads.push_back({"d0", "b0", "", load_mw});
    return net;
}

Network two_bus_line(double rating, bool reinforcible, double reinforce_cost) {
    Network net;
    net.name = "twobus";
    net.buses = {{"b1", {37.0, -120.0}, true, 230.0}, {"b2", {37.5, -120.0}, false, 230.0}};
    Branch br;
    br.id = "l1";
    br.from_bus = "b1";
    br.to_bus = "b2";
    br.r = 0.01;
    br.x = 0.1;
    br.rating = rating;
    br.reinforcible = reinforcible;
    br.reinforce_cost = reinforce_cost;
    net.branches.push_back(br);
    net.loads.push_back({"d0", "b1", "", 10.0});
    net.generators.push_back({"g0", "b2", "NG", 10.0, 5.0, false, "", false});
    return net;
}

} // namespace

TEST_CASE("single bus, flat load, cheap generator: pure dispatch cost") {
    const Network net = one_bus(10.0, 20.0, 10.0);
    const ScenarioDay day = flat_day();
    MilpInstance m = build_deterministic_cep(net, day, test_cfg());
    const Solution sol = solve_bruteforce(m);
    REQUIRE(sol.status == SolveStatus::optimal);
    CHECK(sol.objective == doctest::Approx(2400.0).epsilon(1e-9)); // 24h * 10 MW * $10
}

TEST_CASE("reinforcement binary pays off against shed penalty") {
    Network net = two_bus_line(5.0, true, 100.0);
    CepConfig cfg = test_cfg();
    cfg.shed_penalty = 1000.0;
    cfg.rps_penalty = 900.0;
    const ScenarioDay day = flat_day();
    MilpInstance m = build_deterministic_cep(net, day, cfg);

    // Stated oracle: enumerate the single binary by hand, solving each branch
    // as an LP with the reinforcement fixed.
    std::vector<double> branch_objs;
    for (double y : {0.0, 1.0}) {
        std::vector<double> fixed(m.vars.size(), std::numeric_limits<double>::quiet_NaN());
        fixed[m.index_of("rnf_l1")] = y;
        const ContinuousSolve cs = solve_continuous(m, fixed);
        REQUIRE(cs.status == LpStatus::optimal);
        branch_objs.push_back(cs.objective);
    }
    // y=0: 5 MW served ($5) + 5 MW shed ($1000) per hour; y=1: all served + $100.
    CHECK(branch_objs[0] == doctest::Approx(24.0 * (5.0 * 5.0 + 5.0 * 1000.0)).epsilon(1e-9));
    CHECK(branch_objs[1] == doctest::Approx(100.0 + 24.0 * 10.0 * 5.0).epsilon(1e-9));

    const Solution sol = solve_bruteforce(m);
    REQUIRE(sol.status == SolveStatus::optimal);
    CHECK(sol.objective == doctest::Approx(std::min(branch_objs[0], branch_objs[1])).epsilon(1e-9));
    CHECK(sol.value("rnf_l1") == doctest::Approx(1.0));
    for (int h = 0; h < 24; ++h)
        CHECK(sol.value("sh_b1_d0_h" + std::to_string(h)) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("zero availability forces full shedding") {
    Network net = one_bus(7.0, 15.0, 10.0);
    net.generators[0].availability_key = "dead";
    ScenarioDay day = flat_day();
    day.availability["dead"].fill(0.0);
    CepConfig cfg = test_cfg();
    MilpInstance m = build_deterministic_cep(net, day, cfg);
    const Solution sol = solve_bruteforce(m);
    REQUIRE(sol.status == SolveStatus::optimal);
    CHECK(sol.objective == doctest::Approx(24.0 * 7.0 * cfg.shed_penalty).epsilon(1e-9));
}

TEST_CASE("unresolvable scenario keys are named in the error") {
    Network net = one_bus(5.0, 10.0, 10.0);
    net.generators[0].availability_key = "ghost";
    try {
        build_deterministic_cep(net, flat_day(), test_cfg());
        FAIL("expected error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("ghost") != std::string::npos);
    }
}

TEST_CASE("candidate at an unknown bus is rejected at build") {
    Network net = one_bus(5.0, 10.0, 10.0);
    Candidate c;
    c.id = "cx";
    c.bus = "nowhere";
    c.kind = CandidateKind::generation;
    c.tech = "solar";
    c.unit_size = 1.0;
    c.max_build = 5.0;
    net.candidates.push_back(c);
    try {
        build_deterministic_cep(net, flat_day(), test_cfg());
        FAIL("expected error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("nowhere") != std::string::npos);
    }
}

TEST_CASE("penalties must dominate variable costs") {
    Network net = one_bus(5.0, 10.0, 20000.0); // variable cost above the shed penalty
    CHECK_THROWS_AS(build_deterministic_cep(net, flat_day(), test_cfg()), Error);
}

TEST_CASE("stochastic with one scenario equals deterministic exactly") {
    auto [net, days] = synth_instance(42, 8, 1);
    CepConfig cfg = test_cfg();
    MilpInstance det = build_deterministic_cep(net, days[0], cfg);
    MilpInstance sto = build_stochastic_cep(net, days, cfg);
    const Solution a = solve_bruteforce(det);
    const Solution b = solve_bruteforce(sto);
    REQUIRE(a.status == SolveStatus::optimal);
    REQUIRE(b.status == SolveStatus::optimal);
    CHECK(a.objective == b.objective); // bitwise: identical models up to naming
    CHECK(extract_portfolio(net, a) == extract_portfolio(net, b));
}

TEST_CASE("duplicated scenarios do not change the answer") {
    auto [net, days] = synth_instance(43, 6, 1);
    CepConfig cfg = test_cfg();
    std::vector<ScenarioDay> twice = {days[0], days[0]};
    twice[0].probability = 0.5;
    twice[1].probability = 0.5;
    twice[1].id = "d0b";

    const Solution once = solve_bruteforce(build_stochastic_cep(net, days, cfg));
    const Solution dup = solve_bruteforce(build_stochastic_cep(net, twice, cfg));
    REQUIRE(once.status == SolveStatus::optimal);
    REQUIRE(dup.status == SolveStatus::optimal);
    CHECK(once.objective == doctest::Approx(dup.objective).epsilon(1e-9));
    const Portfolio a = extract_portfolio(net, once);
    const Portfolio b = extract_portfolio(net, dup);
    REQUIRE(a.gen_build.size() == b.gen_build.size());
    for (const auto& [cid, mw] : a.gen_build)
        CHECK(mw == doctest::Approx(b.gen_build.at(cid)).epsilon(1e-9).scale(1.0));
    for (const auto& [cid, mw] : a.storage_build)
        CHECK(mw == doctest::Approx(b.storage_build.at(cid)).epsilon(1e-9).scale(1.0));
    CHECK(a.line_reinforced == b.line_reinforced);
}

TEST_CASE("shared build covers the tighter of two scenarios") {
    // One bus, no existing generation; an integer candidate must cover load.
    Network net;
    net.name = "shared";
    net.buses = {{"b0", {37.0, -120.0}, true, 230.0}};
    net.loads.push_back({"d0", "b0", "pk", 1.0});
    Candidate c;
    c.id = "c0";
    c.bus = "b0";
    c.kind = CandidateKind::generation;
    c.tech = "NG";
    c.unit_size = 1.0;
    c.integrality = Integrality::integer_units;
    c.max_build = 10.0;
    c.capex = 50.0; // far below a single shed hour
    c.variable_cost = 5.0;
    net.candidates.push_back(c);

    ScenarioDay low = flat_day(0.5);
    low.load_multiplier["pk"].fill(5.0);
    ScenarioDay high = flat_day(0.5);
    high.id = "d1";
    high.load_multiplier["pk"].fill(8.0);
    const std::vector<ScenarioDay> days{low, high};

    CepConfig cfg = test_cfg();
    const Solution sol = solve_bruteforce(build_stochastic_cep(net, days, cfg));
    REQUIRE(sol.status == SolveStatus::optimal);
    // Frozen from enumerating n = 0..10 with per-scenario LPs: building 8
    // units serves both scenarios; fewer pays shed penalty in the tight one.
    CHECK(sol.value("nun_c0") == doctest::Approx(8.0));
}

TEST_CASE("scenario probability mismatch is rejected") {
    auto [net, days] = synth_instance(44, 6, 2);
    days[0].probability = 0.7;
    days[1].probability = 0.7;
    CHECK_THROWS_AS(build_stochastic_cep(net, days, test_cfg()), Error);
    CHECK_THROWS_AS(build_stochastic_cep(net, std::span<const ScenarioDay>{}, test_cfg()), Error);
}

TEST_CASE("evaluate_portfolio reproduces the solve objective") {
    auto [net, days] = synth_instance(45, 8, 2);
    CepConfig cfg = test_cfg();
    MilpInstance m = build_stochastic_cep(net, days, cfg);
    const Solution sol = solve_bruteforce(m);
    REQUIRE(sol.status == SolveStatus::optimal);
    const Portfolio x = extract_portfolio(net, sol);
    const Evaluation ev = evaluate_portfolio(net, x, days, cfg);
    CHECK(ev.expected_cost == doctest::Approx(sol.objective).epsilon(1e-7));
}

TEST_CASE("all-zero portfolio on a covered system is pure dispatch") {
    const Network net = one_bus(10.0, 20.0, 10.0);
    const std::vector<ScenarioDay> days{flat_day()};
    Portfolio x;
    x.network = net.name;
    const Evaluation ev = evaluate_portfolio(net, x, days, test_cfg());
    CHECK(ev.capex == doctest::Approx(0.0));
    CHECK(ev.expected_cost == doctest::Approx(2400.0).epsilon(1e-9));
}

TEST_CASE("portfolio violating max_build errors rather than clipping") {
    auto [net, days] = synth_instance(46, 8, 1);
    Portfolio x;
    x.network = net.name;
    REQUIRE_FALSE(net.candidates.empty());
    const Candidate& c = net.candidates.front();
    auto& table = c.kind == CandidateKind::generation ? x.gen_build : x.storage_build;
    table[c.id] = c.max_build + 5.0;
    CHECK_THROWS_AS(evaluate_portfolio(net, x, days, test_cfg()), Error);
}

TEST_CASE("flow conservation holds hourly with losses off") {
    Network net = two_bus_line(20.0, false, 0.0);
    const ScenarioDay day = flat_day();
    CepConfig cfg = test_cfg();
    MilpInstance m = build_deterministic_cep(net, day, cfg);
    const Solution sol = solve_bruteforce(m);
    REQUIRE(sol.status == SolveStatus::optimal);
    for (int h = 0; h < 24; ++h) {
        const std::string hh = "_d0_h" + std::to_string(h);
        const double gen = sol.value("gen_g0" + hh);
        const double shed = sol.value("sh_b1" + hh);
        CHECK(gen + shed == doctest::Approx(10.0).epsilon(1e-7)); // load balance, no storage
    }
}

TEST_CASE("losses deduct exactly kappa*r*flow from delivery") {
    Network net = two_bus_line(20.0, false, 0.0);
    CepConfig cfg = test_cfg();
    cfg.losses_enabled = true;
    cfg.loss_coefficient = 2.0; // kappa * r = 0.02 on the single line
    const ScenarioDay day = flat_day();
    MilpInstance m = build_deterministic_cep(net, day, cfg);
    const Solution sol = solve_bruteforce(m);
    REQUIRE(sol.status == SolveStatus::optimal);
    for (int h = 0; h < 24; ++h) {
        const std::string hh = "_d0_h" + std::to_string(h);
        const double gen = sol.value("gen_g0" + hh);
        const double flow = sol.value("ff_l1" + hh) + sol.value("fr_l1" + hh);
        const double shed = sol.value("sh_b1" + hh);
        const double delivered = flow * (1.0 - 0.02);
        CHECK(delivered + shed == doctest::Approx(10.0).epsilon(1e-6));
        CHECK(gen - delivered == doctest::Approx(0.02 * flow).epsilon(1e-6));
    }
    // kappa too large for the network is rejected at build time.
    cfg.loss_coefficient = 150.0;
    CHECK_THROWS_AS(build_deterministic_cep(net, day, cfg), Error);
}

TEST_CASE("relaxing the build limit never raises the optimum") {
    auto [net, days] = synth_instance(47, 8, 1);
    CepConfig cfg = test_cfg();
    const Solution tight = solve_bruteforce(build_deterministic_cep(net, days[0], cfg));
    Network loose = net;
    for (auto& c : loose.candidates) c.max_build *= 2.0;
    const Solution wide = solve_bruteforce(build_deterministic_cep(loose, days[0], cfg));
    REQUIRE(tight.status == SolveStatus::optimal);
    REQUIRE(wide.status == SolveStatus::optimal);
    CHECK(wide.objective <= tight.objective + 1e-6 * std::abs(tight.objective) + 1e-6);
}

TEST_CASE("reduction acts as a lower bound under shared cluster availability") {
    SynthKnobs knobs;
    knobs.n_clusters = 2;
    knobs.max_integer_units = 2;
    auto [net, days] = synth_instance(48, 8, 1, knobs);
    CepConfig cfg = test_cfg();
    ReductionConfig rcfg;
    rcfg.distance_km = 10.0;
    auto [reduced, mm] = reduce_network(net, rcfg);
    (void)mm;
    REQUIRE(reduced.buses.size() < net.buses.size());

    const Solution full = solve_bruteforce(build_deterministic_cep(net, days[0], cfg));
    const Solution red = solve_bruteforce(build_deterministic_cep(reduced, days[0], cfg));
    REQUIRE(full.status == SolveStatus::optimal);
    REQUIRE(red.status == SolveStatus::optimal);
    CHECK(red.objective <= full.objective * (1.0 + 1e-6) + 1e-6);
}

TEST_CASE("hydro budget caps daily energy") {
    Network net = one_bus(10.0, 0.0, 0.0);
    net.generators.push_back({"hy", "b0", "hydro", 10.0, 1.0, true, "", true});
    net.generators.push_back({"ng", "b0", "NG", 10.0, 50.0, false, "", false});
    ScenarioDay day = flat_day();
    day.hydro_budget_mwh["hy"] = 60.0;
    CepConfig cfg = test_cfg();
    const Solution sol = solve_bruteforce(build_deterministic_cep(net, day, cfg));
    REQUIRE(sol.status == SolveStatus::optimal);
    double hydro_total = 0.0;
    for (int h = 0; h < 24; ++h) hydro_total += sol.value("gen_hy_d0_h" + std::to_string(h));
    CHECK(hydro_total == doctest::Approx(60.0).epsilon(1e-7)); // cheap hydro runs to its budget
    // 60 MWh hydro at $1 + 180 MWh NG at $50.
    CHECK(sol.objective == doctest::Approx(60.0 + 180.0 * 50.0).epsilon(1e-9));

    day.hydro_budget_mwh.clear();
    CHECK_THROWS_AS(build_deterministic_cep(net, day, cfg), Error);
}

TEST_CASE("RPS violation is priced when renewables cannot reach the target") {
    Network net = one_bus(10.0, 20.0, 10.0); // NG only
    CepConfig cfg = test_cfg();
    cfg.rps_target = 0.6;
    cfg.rps_penalty = 500.0;
    const Solution sol = solve_bruteforce(build_deterministic_cep(net, flat_day(), cfg));
    REQUIRE(sol.status == SolveStatus::optimal);
    // Serving everything with NG: violation = 0.6 * 240 MWh = 144 MWh.
    CHECK(sol.value("rpsv_d0") == doctest::Approx(144.0).epsilon(1e-7));
    CHECK(sol.objective == doctest::Approx(2400.0 + 144.0 * 500.0).epsilon(1e-9));
}

TEST_CASE("storage shifts energy through the cyclic SOC recursion") {
    Network net = one_bus(10.0, 12.0, 10.0);
    net.generators[0].availability_key = "daytime";
    net.storage.push_back({"s0", "b0", 10.0, 40.0, 1.0});
    ScenarioDay day = flat_day();
    auto& av = day.availability["daytime"];
    av.fill(0.0);
    for (int h = 6; h < 18; ++h) av[h] = 1.0; // generator only available half the day
    CepConfig cfg = test_cfg();
    cfg.shed_penalty = 1000.0;
    cfg.rps_penalty = 900.0;
    const Solution sol = solve_bruteforce(build_deterministic_cep(net, day, cfg));
    REQUIRE(sol.status == SolveStatus::optimal);
    // 240 MWh load but only 12 MW * 12 h = 144 MWh of generation; storage
    // carries up to 40 MWh into the dark hours, the rest is shed.
    double shed = 0.0, charge = 0.0, discharge = 0.0;
    for (int h = 0; h < 24; ++h) {
        const std::string hh = "_d0_h" + std::to_string(h);
        shed += sol.value("sh_b0" + hh);
        charge += sol.value("ch_s0" + hh);
        discharge += sol.value("di_s0" + hh);
    }
    CHECK(discharge > 1.0);
    CHECK(charge == doctest::Approx(discharge).epsilon(1e-6)); // eta = 1, cyclic SOC
    CHECK(shed == doctest::Approx(240.0 - 144.0).epsilon(1e-6));
}

TEST_CASE("fixing investments through InvestmentFixing pins the solution") {
    auto [net, days] = synth_instance(49, 8, 1);
    CepConfig cfg = test_cfg();
    MilpInstance free_model = build_deterministic_cep(net, days[0], cfg);
    const Solution best = solve_bruteforce(free_model);
    REQUIRE(best.status == SolveStatus::optimal);
    const Portfolio x = extract_portfolio(net, best);

    InvestmentFixing fixing;
    for (const auto& [cid, mw] : x.gen_build) fixing.fixed_gen_build[cid] = mw;
    for (const auto& [cid, mw] : x.storage_build) fixing.fixed_storage_build[cid] = mw;
    for (const auto& [bid, y] : x.line_reinforced) fixing.fixed_reinforce[bid] = y;
    MilpInstance pinned = build_deterministic_cep(net, days[0], cfg, &fixing);
    const Solution re = solve_bruteforce(pinned);
    REQUIRE(re.status == SolveStatus::optimal);
    CHECK(re.objective == doctest::Approx(best.objective).epsilon(1e-9));
    CHECK(extract_portfolio(net, re) == x);
}
