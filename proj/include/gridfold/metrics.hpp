#pragma once

#include "gridfold/cep.hpp"

#include <map>
#include <span>
#include <string>
#include <vector>

namespace gridfold {

/// ERMM = (f(x') - f(x*)) / f(x*) * 100. Throws when the baseline is not
/// positive. Negative values are legal under MIP gaps and reported as-is.
double ermm(double f_xprime, double f_xstar);

struct WeightedCost {
    double probability = 0.0;
    double cost = 0.0;
};

/// ERMM over probability-weighted expectations. Scenario sets must match in
/// size and probabilities (1e-9 tolerance).
double ermm_stochastic(std::span<const WeightedCost> mapped,
                       std::span<const WeightedCost> baseline);

struct ErmmEntry {
    std::string case_id;
    double value = 0.0; // percent
};

struct ErmmReport {
    std::vector<ErmmEntry> per_scenario;
    double average = 0.0;
    double median = 0.0;
    double max = 0.0;
    bool any_negative = false; // within combined MIP tolerance when solvers are gapped

    std::string to_string() const;
};

ErmmReport make_ermm_report(std::vector<ErmmEntry> entries);

struct ReliabilityReport {
    double eue_mwh = 0.0;       // probability-weighted shed, times `scaling`
    long long lolh_hours = 0;   // (scenario, hour) pairs with shed > 1e-6 MW
    long long total_hours = 0;  // |scenarios| * 24
    double achieved_rps = 0.0;  // percent of served load met by renewables

    std::string to_string() const;
};

/// `scaling` converts representative-day shed to the reporting horizon
/// (365 for annualized runs, 1 otherwise).
ReliabilityReport reliability_metrics(std::span<const ScenarioOperations> detail, double scaling);

/// Maps each technology to a reporting group. Defaults lump all solar and all
/// natural-gas variants; unknown techs map to themselves.
struct TechGrouping {
    std::map<std::string, std::string> tech_to_group;

    std::string group_of(const std::string& tech) const;
    static TechGrouping defaults();
};

struct DeltaRow {
    std::string group;
    double delta_mw = 0.0; // other - base
};

struct InvestmentDelta {
    std::vector<DeltaRow> rows; // sorted by group, total last
    double total_mw = 0.0;

    std::string to_string() const;
};

/// Per-group build difference (other - base) in MW; storage counted by power
/// capacity. Portfolios must live on the same candidate set.
InvestmentDelta investment_delta(const Portfolio& base, const Portfolio& other,
                                 const Network& net, const TechGrouping& grouping);

} // namespace gridfold
