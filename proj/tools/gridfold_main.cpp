// gridfold: spatial aggregation of nodal power networks, two-step CEP
// pipelines over the reduced models, and fidelity metrics for the mapping.

#include "gridfold/cep.hpp"
#include "gridfold/metrics.hpp"
#include "gridfold/network_io.hpp"
#include "gridfold/reduction.hpp"
#include "gridfold/scenario.hpp"
#include "gridfold/two_step.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

using namespace gridfold;
using ordered_json = nlohmann::ordered_json;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string solver_cmd;
    bool oracle = false;
    int jobs = 0; // 0 = logical cores - 1
    std::uint64_t seed = 0;
    ordered_json config; // parsed --config document (may be null)
};

void load_config(CommonOpts& opts) {
    if (opts.config_path.empty()) return;
    std::ifstream in(opts.config_path);
    if (!in) throw Error("cannot open config file '" + opts.config_path + "'");
    try {
        opts.config = ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(opts.config_path + ": parse error: " + e.what());
    }
}

template <typename T>
void config_default(const ordered_json& doc, const char* section, const char* key, T& value) {
    if (doc.is_null() || !doc.contains(section)) return;
    const auto& sec = doc.at(section);
    if (sec.contains(key)) value = sec.at(key).get<T>();
}

template <typename T>
void config_default(const ordered_json& doc, const char* key, T& value) {
    if (doc.is_null() || !doc.contains(key)) return;
    value = doc.at(key).get<T>();
}

SolverSpec resolve_solver(const CommonOpts& opts) {
    SolverSpec spec;
    std::string cmd = opts.solver_cmd;
    if (cmd.empty()) config_default(opts.config, "solver_cmd", cmd);
    if (cmd.empty()) {
        if (const char* env = std::getenv("GRIDFOLD_SOLVER_CMD")) cmd = env;
    }
    if (opts.oracle || cmd.empty()) {
        spec.use_oracle = true;
    } else {
        spec.use_oracle = false;
        spec.solver_cmd = cmd;
    }
    return spec;
}

CepConfig resolve_cep(const CommonOpts& opts, const Network* net = nullptr) {
    CepConfig cfg;
    const auto& doc = opts.config;
    config_default(doc, "cep", "rps_target", cfg.rps_target);
    config_default(doc, "cep", "rps_penalty", cfg.rps_penalty);
    config_default(doc, "cep", "shed_penalty", cfg.shed_penalty);
    config_default(doc, "cep", "losses_enabled", cfg.losses_enabled);
    config_default(doc, "cep", "loss_coefficient", cfg.loss_coefficient);
    config_default(doc, "cep", "reinforcement_multiplier", cfg.reinforcement_multiplier);
    config_default(doc, "cep", "mip_gap_step1", cfg.mip_gap_step1);
    config_default(doc, "cep", "mip_gap_step2", cfg.mip_gap_step2);
    config_default(doc, "cep", "time_limit_step1", cfg.time_limit_step1);
    config_default(doc, "cep", "time_limit_step2", cfg.time_limit_step2);
    config_default(doc, "cep", "annualize", cfg.annualize);
    if (cfg.losses_enabled && cfg.loss_coefficient == 0.0 && net)
        cfg.loss_coefficient = default_loss_coefficient(*net);
    return cfg;
}

int resolve_jobs(const CommonOpts& opts) {
    int jobs = opts.jobs;
    if (jobs <= 0) {
        const unsigned hw = std::thread::hardware_concurrency();
        jobs = hw > 1 ? static_cast<int>(hw) - 1 : 1;
    }
    return jobs;
}

ReductionMode parse_mode(const std::string& s) {
    if (s == "radial") return ReductionMode::radial_only;
    if (s == "full") return ReductionMode::full;
    throw Error("mode must be 'radial' or 'full', got '" + s + "'");
}

GenStorageMap parse_map(const std::string& s) {
    if (s == "A" || s == "a") return GenStorageMap::map_a;
    if (s == "B" || s == "b") return GenStorageMap::map_b;
    if (s == "C" || s == "c") return GenStorageMap::map_c;
    throw Error("map must be A, B or C, got '" + s + "'");
}

TransmissionMap parse_transmission(const std::string& s) {
    if (s == "components") return TransmissionMap::map_components;
    if (s == "all") return TransmissionMap::reinforce_all;
    throw Error("transmission must be 'components' or 'all', got '" + s + "'");
}

ordered_json stats_json(const NetworkStats& s) {
    ordered_json j;
    j["buses"] = s.buses;
    j["branches"] = s.branches;
    j["lines"] = s.lines;
    j["transformers"] = s.transformers;
    if (s.min_r) j["min_r"] = *s.min_r;
    if (s.min_x) j["min_x"] = *s.min_x;
    j["generators"] = s.generators;
    j["storage"] = s.storage;
    j["loads"] = s.loads;
    j["candidates"] = s.candidates;
    return j;
}

ordered_json solution_json(const Solution& sol) {
    ordered_json j;
    j["status"] = to_string(sol.status);
    j["objective"] = sol.objective;
    if (sol.best_bound) j["best_bound"] = *sol.best_bound;
    if (sol.mip_gap) j["mip_gap"] = *sol.mip_gap;
    j["wall_time_s"] = sol.wall_time_s;
    if (!sol.message.empty()) j["message"] = sol.message;
    return j;
}

struct TimingStats {
    double median_s = 0.0;
    double average_s = 0.0;
    int hit_time_limit = 0;
};

TimingStats timing_stats(std::vector<double> times, int hit_limit) {
    TimingStats ts;
    ts.hit_time_limit = hit_limit;
    if (times.empty()) return ts;
    for (double t : times) ts.average_s += t;
    ts.average_s /= static_cast<double>(times.size());
    std::sort(times.begin(), times.end());
    const std::size_t n = times.size();
    ts.median_s = n % 2 == 1 ? times[n / 2] : 0.5 * (times[n / 2 - 1] + times[n / 2]);
    return ts;
}

ordered_json timing_json(const TimingStats& ts) {
    return ordered_json{{"median_solve_s", ts.median_s},
                        {"average_solve_s", ts.average_s},
                        {"hit_time_limit", ts.hit_time_limit}};
}

// ---------------------------------------------------------------- synth ---

int cmd_synth(const CommonOpts& common, int n_buses, int n_days, const std::string& out_dir,
              int clusters, bool transformers) {
    SynthKnobs knobs;
    knobs.n_clusters = clusters;
    knobs.include_transformers = transformers;
    auto [net, days] = synth_instance(common.seed, n_buses, n_days, knobs);
    std::filesystem::create_directories(out_dir);
    save_network(net, std::filesystem::path(out_dir) / "network.json");
    save_scenarios(days, std::filesystem::path(out_dir) / "scenarios");
    std::cout << "wrote " << out_dir << "/network.json (" << net.buses.size() << " buses, "
              << net.branches.size() << " branches) and " << days.size() << " scenario day(s)\n";
    return 0;
}

// --------------------------------------------------------------- reduce ---

int cmd_reduce(const std::string& network_path, double distance_km, const std::string& mode_str,
               bool tighten, const std::string& original_path, const std::string& out_path,
               const std::string& mm_path, const std::string& stats_path) {
    const Network net = load_network(network_path);
    ReductionConfig cfg;
    cfg.distance_km = distance_km;
    cfg.mode = parse_mode(mode_str);

    auto [reduced, mm] = reduce_network(net, cfg);
    if (tighten) {
        const Network original =
            original_path.empty() || original_path == network_path ? net
                                                                   : load_network(original_path);
        reduced = tighten_candidates(reduced, original, mm);
    }
    save_network(reduced, out_path);
    if (!mm_path.empty()) save_merge_map(mm, mm_path);

    const ReductionStats stats = reduction_stats(net, reduced);
    std::cout << stats.to_string();
    if (!stats_path.empty()) {
        ordered_json j;
        j["original"] = stats_json(stats.original);
        j["reduced"] = stats_json(stats.reduced);
        std::ofstream out(stats_path);
        if (!out) throw Error("cannot write stats file '" + stats_path + "'");
        out << j.dump(2) << "\n";
    }
    return 0;
}

// ------------------------------------------------------------- baseline ---

int cmd_baseline(const CommonOpts& common, const std::string& network_path,
                 const std::string& scenario_dir, bool stochastic, const std::string& out_dir) {
    const Network net = load_network(network_path);
    const auto days = load_scenarios(scenario_dir);
    const CepConfig cep = resolve_cep(common, &net);
    const SolverSpec solver = resolve_solver(common);
    std::filesystem::create_directories(out_dir);

    ordered_json index;
    index["format"] = 1;
    index["network"] = net.name;
    index["mode"] = stochastic ? "stochastic" : "deterministic";
    bool all_ok = true;

    if (stochastic) {
        MilpInstance m = build_stochastic_cep(net, days, cep);
        Solution sol = solve_milp(m, solver, cep.mip_gap_step1, cep.time_limit_step1);
        all_ok = sol.usable();
        const Portfolio x = extract_portfolio(net, sol);
        save_portfolio(x, sol.objective, std::filesystem::path(out_dir) / "x_star.json");
        index["solution"] = solution_json(sol);
        index["portfolio"] = "x_star.json";
    } else {
        index["days"] = ordered_json::array();
        const int jobs = resolve_jobs(common);
        std::vector<std::pair<Solution, Portfolio>> results(days.size());
        std::vector<std::string> errors(days.size());
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= days.size()) return;
                try {
                    MilpInstance m = build_deterministic_cep(net, days[i], cep);
                    Solution sol = solve_milp(m, solver, cep.mip_gap_step1, cep.time_limit_step1);
                    Portfolio x = extract_portfolio(net, sol);
                    results[i] = {std::move(sol), std::move(x)};
                } catch (const std::exception& e) {
                    errors[i] = e.what();
                }
            }
        };
        std::vector<std::thread> pool;
        for (int t = 0; t < std::min<int>(jobs, static_cast<int>(days.size())); ++t)
            pool.emplace_back(worker);
        for (auto& t : pool) t.join();

        for (std::size_t i = 0; i < days.size(); ++i) {
            ordered_json entry;
            entry["day"] = days[i].id;
            if (!errors[i].empty()) {
                entry["error"] = errors[i];
                all_ok = false;
            } else {
                const auto& [sol, x] = results[i];
                const std::string pf = "x_star_" + days[i].id + ".json";
                save_portfolio(x, sol.objective, std::filesystem::path(out_dir) / pf);
                entry["solution"] = solution_json(sol);
                entry["portfolio"] = pf;
                if (!sol.usable()) all_ok = false;
            }
            index["days"].push_back(std::move(entry));
        }
    }

    std::ofstream out(std::filesystem::path(out_dir) / "baseline.json");
    out << index.dump(2) << "\n";
    std::cout << "baseline written to " << out_dir << "\n";
    return all_ok ? 0 : 1;
}

// ------------------------------------------------------------- two-step ---

struct DayRecord {
    std::string day;
    double probability = 0.0;
    std::string error;
    ordered_json step1, step2;
    double f_xprime = 0.0;
    double f_xstar = 0.0;
    double ermm_pct = 0.0;
    double step1_s = 0.0, step2_s = 0.0;
    bool step1_hit_limit = false, step2_hit_limit = false;
    bool usable = false;
    ScenarioOperations ops;
    InvestmentDelta delta;
};

int cmd_two_step(const CommonOpts& common, const std::string& network_path,
                 const std::string& scenario_dir, double distance_km, const std::string& mode_str,
                 bool tighten, const std::string& map_str, const std::string& transmission_str,
                 bool stochastic, const std::string& baseline_dir, const std::string& report_dir,
                 bool csv) {
    const Network net = load_network(network_path);
    const auto days = load_scenarios(scenario_dir);
    const CepConfig cep = resolve_cep(common, &net);
    const SolverSpec solver = resolve_solver(common);

    ReductionConfig rcfg;
    rcfg.distance_km = distance_km;
    rcfg.mode = parse_mode(mode_str);
    rcfg.tighten = tighten;

    MappingStrategy strategy;
    strategy.gen_storage = parse_map(map_str);
    strategy.transmission = parse_transmission(transmission_str);

    std::filesystem::create_directories(report_dir);
    const auto report_path = std::filesystem::path(report_dir);

    // Reduce once; every pipeline shares the immutable reduced network.
    auto [reduced, mm] = reduce_network(net, rcfg);
    if (tighten) reduced = tighten_candidates(reduced, net, mm);
    const ReductionStats stats = reduction_stats(net, reduced);
    save_network(reduced, report_path / "reduced_network.json");
    save_merge_map(mm, report_path / "merge_map.json");

    ordered_json report;
    report["format"] = 1;
    report["case"] = net.name;
    report["mode"] = stochastic ? "stochastic" : "deterministic";
    report["distance_km"] = distance_km;
    report["reduction_mode"] = mode_str;
    report["tightened"] = tighten;
    report["map"] = map_str;
    report["transmission"] = transmission_str;
    report["reduction"] = {{"original", stats_json(stats.original)},
                           {"reduced", stats_json(stats.reduced)}};

    bool all_ok = true;
    std::vector<ErmmEntry> ermm_entries;
    std::vector<ScenarioOperations> reliability_detail;
    std::vector<double> t1_times, t2_times;
    int t1_hits = 0, t2_hits = 0;
    std::map<std::string, double> delta_accum;
    double delta_total = 0.0;
    int delta_count = 0;
    const TechGrouping grouping = TechGrouping::defaults();
    const double scale = cep.annualize ? 365.0 : 1.0;

    if (stochastic) {
        TwoStepResult res = run_two_step(net, rcfg, days, cep, strategy, solver, &reduced, &mm);
        t1_times.push_back(res.step1.solve_s);
        t2_times.push_back(res.step2.solve_s);
        if (res.step1.solution.status == SolveStatus::time_limit) ++t1_hits;
        if (res.step2.solution.status == SolveStatus::time_limit) ++t2_hits;
        save_portfolio(res.x_prime, res.f_xprime, report_path / "x_prime.json");

        double f_xstar;
        Portfolio x_star;
        if (!baseline_dir.empty()) {
            x_star = load_portfolio(std::filesystem::path(baseline_dir) / "x_star.json", &f_xstar);
        } else {
            MilpInstance m = build_stochastic_cep(net, days, cep);
            Solution sol = solve_milp(m, solver, cep.mip_gap_step1, cep.time_limit_step1);
            if (!sol.usable() && sol.values.empty())
                throw Error("baseline stochastic solve failed: " + sol.message);
            x_star = extract_portfolio(net, sol);
            f_xstar = sol.objective;
            save_portfolio(x_star, f_xstar, report_path / "x_star.json");
        }

        // Eq-style expectation: per-scenario evaluation costs, probability weighted.
        const Evaluation ev_prime = evaluate_portfolio(net, res.x_prime, days, cep);
        const Evaluation ev_star = evaluate_portfolio(net, x_star, days, cep);
        std::vector<WeightedCost> wc_prime, wc_star;
        for (std::size_t i = 0; i < days.size(); ++i) {
            wc_prime.push_back({days[i].probability,
                                ev_prime.capex + scale * ev_prime.per_scenario[i].op_cost});
            wc_star.push_back({days[i].probability,
                               ev_star.capex + scale * ev_star.per_scenario[i].op_cost});
        }
        const double e = ermm_stochastic(wc_prime, wc_star);
        ermm_entries.push_back({"expected", e});
        reliability_detail = ev_prime.per_scenario;

        const InvestmentDelta delta = investment_delta(x_star, res.x_prime, net, grouping);
        for (const auto& row : delta.rows) delta_accum[row.group] += row.delta_mw;
        delta_total += delta.total_mw;
        delta_count = 1;

        ordered_json rec;
        rec["step1"] = solution_json(res.step1.solution);
        rec["step2"] = solution_json(res.step2.solution);
        rec["f_xprime"] = res.f_xprime;
        rec["f_xstar"] = f_xstar;
        rec["ermm_expected_pct"] = e;
        report["stochastic_result"] = std::move(rec);
        all_ok = res.step1.solution.usable() && res.step2.solution.usable();
    } else {
        // Per-day baselines, either loaded or solved here.
        std::map<std::string, std::pair<double, Portfolio>> baselines;
        if (!baseline_dir.empty()) {
            std::ifstream in(std::filesystem::path(baseline_dir) / "baseline.json");
            if (!in) throw Error("cannot open baseline index in '" + baseline_dir + "'");
            const auto idx = ordered_json::parse(in);
            for (const auto& entry : idx.at("days")) {
                if (entry.contains("error")) continue;
                double obj;
                Portfolio x = load_portfolio(std::filesystem::path(baseline_dir) /
                                                 entry.at("portfolio").get<std::string>(),
                                             &obj);
                baselines[entry.at("day").get<std::string>()] = {obj, std::move(x)};
            }
        }

        std::vector<DayRecord> records(days.size());
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= days.size()) return;
                DayRecord& rec = records[i];
                rec.day = days[i].id;
                rec.probability = days[i].probability;
                try {
                    const std::span<const ScenarioDay> one(&days[i], 1);
                    TwoStepResult res =
                        run_two_step(net, rcfg, one, cep, strategy, solver, &reduced, &mm);
                    rec.step1 = solution_json(res.step1.solution);
                    rec.step2 = solution_json(res.step2.solution);
                    rec.step1_s = res.step1.solve_s;
                    rec.step2_s = res.step2.solve_s;
                    rec.step1_hit_limit = res.step1.solution.status == SolveStatus::time_limit;
                    rec.step2_hit_limit = res.step2.solution.status == SolveStatus::time_limit;
                    rec.f_xprime = res.f_xprime;

                    double f_xstar;
                    Portfolio x_star;
                    auto it = baselines.find(days[i].id);
                    if (it != baselines.end()) {
                        f_xstar = it->second.first;
                        x_star = it->second.second;
                    } else {
                        MilpInstance m = build_deterministic_cep(net, days[i], cep);
                        Solution sol =
                            solve_milp(m, solver, cep.mip_gap_step1, cep.time_limit_step1);
                        if (!sol.usable() && sol.values.empty())
                            throw Error("baseline solve failed: " + sol.message);
                        f_xstar = sol.objective;
                        x_star = extract_portfolio(net, sol);
                    }
                    rec.f_xstar = f_xstar;
                    rec.ermm_pct = ermm(rec.f_xprime, rec.f_xstar);
                    rec.usable = res.step1.solution.usable() && res.step2.solution.usable();

                    const std::span<const ScenarioDay> day_span(&days[i], 1);
                    const Evaluation ev = evaluate_portfolio(net, res.x_prime, day_span, cep);
                    rec.ops = ev.per_scenario.front();
                    rec.ops.probability = days[i].probability;
                    rec.delta = investment_delta(x_star, res.x_prime, net, grouping);
                } catch (const std::exception& e) {
                    rec.error = e.what();
                }
            }
        };
        const int jobs = resolve_jobs(common);
        std::vector<std::thread> pool;
        for (int t = 0; t < std::min<int>(jobs, static_cast<int>(days.size())); ++t)
            pool.emplace_back(worker);
        for (auto& t : pool) t.join();

        // Merge per-day results in day order so output is reproducible under
        // any worker interleaving.
        report["scenarios"] = ordered_json::array();
        for (const auto& rec : records) {
            ordered_json j;
            j["day"] = rec.day;
            if (!rec.error.empty()) {
                j["error"] = rec.error;
                all_ok = false;
            } else {
                j["step1"] = rec.step1;
                j["step2"] = rec.step2;
                j["f_xprime"] = rec.f_xprime;
                j["f_xstar"] = rec.f_xstar;
                j["ermm_pct"] = rec.ermm_pct;
                ermm_entries.push_back({rec.day, rec.ermm_pct});
                t1_times.push_back(rec.step1_s);
                t2_times.push_back(rec.step2_s);
                if (rec.step1_hit_limit) ++t1_hits;
                if (rec.step2_hit_limit) ++t2_hits;
                if (!rec.usable) all_ok = false;
                reliability_detail.push_back(rec.ops);
                for (const auto& row : rec.delta.rows) delta_accum[row.group] += row.delta_mw;
                delta_total += rec.delta.total_mw;
                ++delta_count;
            }
            report["scenarios"].push_back(std::move(j));
        }
    }

    const ErmmReport ermm_rep = make_ermm_report(ermm_entries);
    report["ermm"] = {{"average_pct", ermm_rep.average},
                      {"median_pct", ermm_rep.median},
                      {"max_pct", ermm_rep.max},
                      {"any_negative_within_mip_tolerance", ermm_rep.any_negative}};
    report["timing"] = {{"step1", timing_json(timing_stats(t1_times, t1_hits))},
                        {"step2", timing_json(timing_stats(t2_times, t2_hits))}};

    if (!reliability_detail.empty()) {
        const ReliabilityReport rel = reliability_metrics(reliability_detail, scale);
        report["reliability"] = {{"eue_mwh", rel.eue_mwh},
                                 {"lolh_hours", rel.lolh_hours},
                                 {"total_hours", rel.total_hours},
                                 {"achieved_rps_pct", rel.achieved_rps}};
    }
    if (delta_count > 0) {
        ordered_json delta = ordered_json::array();
        for (const auto& [group, mw] : delta_accum)
            delta.push_back({{"group", group}, {"delta_mw", mw / delta_count}});
        report["investment_delta_avg_mw"] = std::move(delta);
        report["investment_delta_total_mw"] = delta_total / delta_count;
    }

    {
        std::ofstream out(report_path / "report.json");
        out << report.dump(2) << "\n";
    }
    {
        std::ofstream out(report_path / "report.txt");
        out << "case: " << net.name << " (D = " << distance_km << " km, " << mode_str
            << (tighten ? ", tightened" : "") << ", Map " << map_str << ", transmission "
            << transmission_str << ")\n";
        out << stats.to_string();
        out << ermm_rep.to_string();
        if (!reliability_detail.empty())
            out << reliability_metrics(reliability_detail, scale).to_string();
    }
    if (csv) {
        std::ofstream out(report_path / "ermm.csv");
        out << "case,ermm_pct,f_xprime,f_xstar\n";
        for (const auto& e : ermm_entries) {
            double fp = 0.0, fs = 0.0;
            if (!stochastic) {
                for (const auto& rec : report["scenarios"]) {
                    if (rec.contains("day") && rec["day"] == e.case_id && rec.contains("f_xprime")) {
                        fp = rec["f_xprime"].get<double>();
                        fs = rec["f_xstar"].get<double>();
                    }
                }
            } else {
                fp = report["stochastic_result"]["f_xprime"].get<double>();
                fs = report["stochastic_result"]["f_xstar"].get<double>();
            }
            out << e.case_id << "," << e.value << "," << fp << "," << fs << "\n";
        }
    }

    std::cout << "report written to " << report_dir << "\n";
    std::cout << ermm_rep.to_string();
    return all_ok ? 0 : 1;
}

// ------------------------------------------------------------- evaluate ---

int cmd_evaluate(const CommonOpts& common, const std::string& network_path,
                 const std::string& portfolio_path, const std::string& scenario_dir,
                 const std::string& report_file) {
    const Network net = load_network(network_path);
    const auto days = load_scenarios(scenario_dir);
    const CepConfig cep = resolve_cep(common, &net);
    const Portfolio x = load_portfolio(portfolio_path);
    const Evaluation ev = evaluate_portfolio(net, x, days, cep);
    const double scale = cep.annualize ? 365.0 : 1.0;
    const ReliabilityReport rel = reliability_metrics(ev.per_scenario, scale);

    std::cout << "f(x) = " << ev.expected_cost << " (capex " << ev.capex << ")\n"
              << rel.to_string();
    if (!report_file.empty()) {
        ordered_json j;
        j["expected_cost"] = ev.expected_cost;
        j["capex"] = ev.capex;
        j["reliability"] = {{"eue_mwh", rel.eue_mwh},
                            {"lolh_hours", rel.lolh_hours},
                            {"total_hours", rel.total_hours},
                            {"achieved_rps_pct", rel.achieved_rps}};
        j["per_scenario"] = ordered_json::array();
        for (const auto& ops : ev.per_scenario) {
            j["per_scenario"].push_back({{"day", ops.day},
                                         {"op_cost", ops.op_cost},
                                         {"shed_mwh", ops.shed_mwh},
                                         {"renewable_mwh", ops.renewable_mwh},
                                         {"served_mwh", ops.served_mwh},
                                         {"rps_violation_mwh", ops.rps_violation_mwh}});
        }
        std::ofstream out(report_file);
        out << j.dump(2) << "\n";
    }
    return 0;
}

// --------------------------------------------------------------- report ---

int cmd_report(const std::string& records_path, const std::string& out_txt,
               const std::string& out_csv) {
    std::ifstream in(records_path);
    if (!in) throw Error("cannot open report file '" + records_path + "'");
    const auto doc = ordered_json::parse(in);

    std::vector<ErmmEntry> entries;
    if (doc.contains("scenarios")) {
        for (const auto& rec : doc.at("scenarios"))
            if (rec.contains("ermm_pct"))
                entries.push_back({rec.at("day").get<std::string>(), rec.at("ermm_pct").get<double>()});
    } else if (doc.contains("stochastic_result")) {
        entries.push_back({"expected", doc.at("stochastic_result").at("ermm_expected_pct").get<double>()});
    }
    const ErmmReport rep = make_ermm_report(entries);
    std::cout << rep.to_string();
    if (!out_txt.empty()) std::ofstream(out_txt) << rep.to_string();
    if (!out_csv.empty()) {
        std::ofstream out(out_csv);
        out << "case,ermm_pct\n";
        for (const auto& e : rep.per_scenario) out << e.case_id << "," << e.value << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"gridfold: distance-threshold network reduction and two-step CEP"};
    app.require_subcommand(1);

    CommonOpts common;
    app.add_option("--config", common.config_path, "JSON run configuration (flags override)");
    app.add_option("--seed", common.seed, "seed for synthetic instances");
    app.add_option("--jobs", common.jobs, "parallel pipelines (default: cores - 1)");
    app.add_option("--solver-cmd", common.solver_cmd,
                   "external solver template with {mps} {sol} {gap} {timelimit}");
    app.add_flag("--oracle", common.oracle, "use the internal brute-force backend");

    // synth
    auto* synth = app.add_subcommand("synth", "generate a seeded synthetic instance");
    int n_buses = 12, n_days = 2, clusters = 0;
    bool transformers = false;
    std::string out_dir = "out";
    synth->add_option("--buses", n_buses);
    synth->add_option("--days", n_days);
    synth->add_option("--clusters", clusters);
    synth->add_flag("--transformers", transformers);
    synth->add_option("--out", out_dir)->required();

    // reduce
    auto* reduce = app.add_subcommand("reduce", "spatially aggregate a network");
    std::string network_path, original_path, out_path, mm_path, stats_path;
    double distance_km = 0.0;
    std::string mode_str = "full";
    bool tighten = false;
    reduce->add_option("--network", network_path)->required();
    reduce->add_option("--distance-km", distance_km)->required();
    reduce->add_option("--mode", mode_str)->check(CLI::IsMember({"radial", "full"}));
    reduce->add_flag("--tighten", tighten);
    reduce->add_option("--original", original_path);
    reduce->add_option("--out", out_path)->required();
    reduce->add_option("--merge-map", mm_path);
    reduce->add_option("--stats", stats_path);

    // baseline
    auto* baseline = app.add_subcommand("baseline", "solve CEP on the full network");
    std::string scenario_dir, baseline_out;
    bool stochastic = false;
    baseline->add_option("--network", network_path)->required();
    baseline->add_option("--scenarios", scenario_dir)->required();
    baseline->add_flag("--stochastic", stochastic);
    baseline->add_option("--out", baseline_out)->required();

    // two-step
    auto* two_step = app.add_subcommand("two-step", "reduce, solve, map back, re-solve");
    std::string map_str = "B", transmission_str = "components", baseline_dir, report_dir;
    bool csv = false;
    two_step->add_option("--network", network_path)->required();
    two_step->add_option("--scenarios", scenario_dir)->required();
    two_step->add_option("--distance-km", distance_km)->required();
    two_step->add_option("--mode", mode_str)->check(CLI::IsMember({"radial", "full"}));
    two_step->add_flag("--tighten", tighten);
    two_step->add_option("--map", map_str)->check(CLI::IsMember({"A", "B", "C", "a", "b", "c"}));
    two_step->add_option("--transmission", transmission_str)
        ->check(CLI::IsMember({"components", "all"}));
    two_step->add_flag("--stochastic", stochastic);
    two_step->add_option("--baseline", baseline_dir);
    two_step->add_option("--report", report_dir)->required();
    two_step->add_flag("--csv", csv);

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "price a fixed portfolio");
    std::string portfolio_path, eval_report;
    evaluate->add_option("--network", network_path)->required();
    evaluate->add_option("--portfolio", portfolio_path)->required();
    evaluate->add_option("--scenarios", scenario_dir)->required();
    evaluate->add_option("--report", eval_report);

    // report
    auto* report = app.add_subcommand("report", "re-emit tables from a stored report");
    std::string records_path, out_txt, out_csv;
    report->add_option("--records", records_path)->required();
    report->add_option("--out", out_txt);
    report->add_option("--csv", out_csv);

    CLI11_PARSE(app, argc, argv);

    try {
        load_config(common);
        if (common.config_path.size()) {
            // Config-file fallbacks for paths only when flags were not given.
            if (network_path.empty()) config_default(common.config, "network", network_path);
            if (scenario_dir.empty()) config_default(common.config, "scenarios", scenario_dir);
        }
        if (synth->parsed()) return cmd_synth(common, n_buses, n_days, out_dir, clusters, transformers);
        if (reduce->parsed())
            return cmd_reduce(network_path, distance_km, mode_str, tighten, original_path,
                              out_path, mm_path, stats_path);
        if (baseline->parsed())
            return cmd_baseline(common, network_path, scenario_dir, stochastic, baseline_out);
        if (two_step->parsed())
            return cmd_two_step(common, network_path, scenario_dir, distance_km, mode_str, tighten,
                                map_str, transmission_str, stochastic, baseline_dir, report_dir,
                                csv);
        if (evaluate->parsed())
            return cmd_evaluate(common, network_path, portfolio_path, scenario_dir, eval_report);
        if (report->parsed()) return cmd_report(records_path, out_txt, out_csv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
