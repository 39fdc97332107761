#pragma once

#include "gridfold/milp.hpp"
#include "gridfold/network.hpp"
#include "gridfold/scenario.hpp"
#include "gridfold/solver.hpp"

#include <array>
#include <filesystem>
#include <map>
#include <span>
#include <vector>

namespace gridfold {

struct CepConfig {
    double rps_target = 0.6;        // fraction of served load
    double rps_penalty = 500.0;     // $/MWh
    double shed_penalty = 10000.0;  // $/MWh
    bool losses_enabled = false;
    double loss_coefficient = 0.0;  // kappa; delivered = flow * (1 - kappa * r)
    double reinforcement_multiplier = 2.0;
    double mip_gap_step1 = 0.01;
    double mip_gap_step2 = 0.001;
    double time_limit_step1 = 14400.0;
    double time_limit_step2 = 3600.0;
    bool annualize = true; // scenario weight = probability * 365 (objectives in $/yr)
};

/// kappa such that the median-resistance line loses ~2% of its flow.
double default_loss_coefficient(const Network& net);

/// Investment decision vector on a specific network. Builds are MW (integer
/// candidates hold whole-unit multiples of unit_size).
struct Portfolio {
    std::string network;
    std::map<std::string, double> gen_build;     // candidate id -> MW
    std::map<std::string, double> storage_build; // candidate id -> MW
    std::map<std::string, int> line_reinforced;  // branch id -> 0/1 (reinforcible only)

    bool operator==(const Portfolio&) const = default;
};

/// Step (2) investment constraints produced by the mapping strategies.
struct InvestmentFixing {
    std::map<std::string, double> fixed_gen_build;     // candidate id -> MW
    std::map<std::string, double> fixed_storage_build; // candidate id -> MW
    struct GroupEquality {
        std::string name;
        std::vector<std::string> candidate_ids;
        double total_mw = 0.0;
    };
    std::vector<GroupEquality> equalities;      // each gets +-1e-6 MW slack
    std::map<std::string, int> fixed_reinforce; // branch id -> 0/1; absent = free
};

/// Single representative-day CEP MILP. The day's probability is ignored
/// (weight = 365 when annualized, else 1).
MilpInstance build_deterministic_cep(const Network& net, const ScenarioDay& day,
                                     const CepConfig& cfg,
                                     const InvestmentFixing* fixing = nullptr);

/// Extensive form: shared investment variables, one operations block per
/// scenario, objective weighted by p_omega (times 365 when annualized).
MilpInstance build_stochastic_cep(const Network& net, std::span<const ScenarioDay> days,
                                  const CepConfig& cfg, const InvestmentFixing* fixing = nullptr);

Portfolio extract_portfolio(const Network& net, const Solution& sol);

void save_portfolio(const Portfolio& x, double objective, const std::filesystem::path& path);
Portfolio load_portfolio(const std::filesystem::path& path, double* objective = nullptr);

double portfolio_capex(const Network& net, const Portfolio& x);

/// Throws unless x conforms to net (ids, bounds, unit multiples).
void check_portfolio(const Network& net, const Portfolio& x);

struct ScenarioOperations {
    std::string day;
    double probability = 0.0;
    double op_cost = 0.0; // unweighted $/day including penalty terms
    std::array<double, 24> shed_mw{}; // system shed per hour
    double shed_mwh = 0.0;
    double renewable_mwh = 0.0;
    double served_mwh = 0.0;
    double total_load_mwh = 0.0;
    double rps_violation_mwh = 0.0;
};

struct Evaluation {
    double expected_cost = 0.0; // capex + sum_w p_w * weight * op_cost_w
    double capex = 0.0;
    std::vector<ScenarioOperations> per_scenario;
};

/// Fixes all investments to x and solves each scenario's operational LP
/// independently with the internal simplex.
Evaluation evaluate_portfolio(const Network& net, const Portfolio& x,
                              std::span<const ScenarioDay> days, const CepConfig& cfg);

/// Operational detail extracted from a solved CEP (used by two-step reports).
ScenarioOperations scenario_operations(const Network& net, const ScenarioDay& day,
                                       const CepConfig& cfg, const Solution& sol);

} // namespace gridfold
