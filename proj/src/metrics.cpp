#include "gridfold/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gridfold {

double ermm(double f_xprime, double f_xstar) {
    if (!(f_xstar > 0.0)) throw Error("ermm: baseline objective must be positive");
    return (f_xprime - f_xstar) / f_xstar * 100.0;
}

double ermm_stochastic(std::span<const WeightedCost> mapped,
                       std::span<const WeightedCost> baseline) {
    if (mapped.size() != baseline.size())
        throw Error("ermm_stochastic: scenario sets differ in size");
    double p_mapped = 0.0, p_base = 0.0, e_mapped = 0.0, e_base = 0.0;
    for (std::size_t i = 0; i < mapped.size(); ++i) {
        if (std::abs(mapped[i].probability - baseline[i].probability) > 1e-9)
            throw Error("ermm_stochastic: scenario probabilities do not match");
        p_mapped += mapped[i].probability;
        p_base += baseline[i].probability;
        e_mapped += mapped[i].probability * mapped[i].cost;
        e_base += baseline[i].probability * baseline[i].cost;
    }
    if (std::abs(p_mapped - 1.0) > 1e-9 || std::abs(p_base - 1.0) > 1e-9)
        throw Error("ermm_stochastic: probabilities must sum to 1");
    return ermm(e_mapped, e_base);
}

ErmmReport make_ermm_report(std::vector<ErmmEntry> entries) {
    ErmmReport rep;
    rep.per_scenario = std::move(entries);
    if (rep.per_scenario.empty()) return rep;
    std::vector<double> vals;
    for (const auto& e : rep.per_scenario) {
        vals.push_back(e.value);
        rep.average += e.value;
        if (e.value < 0.0) rep.any_negative = true;
    }
    rep.average /= static_cast<double>(vals.size());
    std::sort(vals.begin(), vals.end());
    const std::size_t n = vals.size();
    rep.median = n % 2 == 1 ? vals[n / 2] : 0.5 * (vals[n / 2 - 1] + vals[n / 2]);
    rep.max = vals.back();
    return rep;
}

std::string ErmmReport::to_string() const {
    std::ostringstream out;
    out << "ERMM over " << per_scenario.size() << " case(s): average " << average << "%, median "
        << median << "%, max " << max << "%\n";
    if (any_negative)
        out << "  note: negative values present; they sit within the combined MIP tolerance\n";
    return out.str();
}

ReliabilityReport reliability_metrics(std::span<const ScenarioOperations> detail, double scaling) {
    if (detail.empty()) throw Error("reliability_metrics: no operational detail");
    ReliabilityReport rep;
    double renewable = 0.0, served = 0.0;
    for (const auto& ops : detail) {
        rep.eue_mwh += ops.probability * ops.shed_mwh;
        for (int h = 0; h < 24; ++h)
            if (ops.shed_mw[h] > 1e-6) ++rep.lolh_hours;
        rep.total_hours += 24;
        renewable += ops.probability * ops.renewable_mwh;
        served += ops.probability * ops.served_mwh;
    }
    rep.eue_mwh *= scaling;
    rep.achieved_rps = served > 0.0 ? renewable / served * 100.0 : 0.0;
    return rep;
}

std::string ReliabilityReport::to_string() const {
    std::ostringstream out;
    out << "EUE " << eue_mwh << " MWh, LOLH " << lolh_hours << "h / " << total_hours
        << "h, achieved RPS " << achieved_rps << "%\n";
    return out.str();
}

std::string TechGrouping::group_of(const std::string& tech) const {
    auto it = tech_to_group.find(tech);
    return it == tech_to_group.end() ? tech : it->second;
}

TechGrouping TechGrouping::defaults() {
    TechGrouping g;
    g.tech_to_group = {
        {"solar", "solar-all"},        {"solar-pv", "solar-all"},
        {"solar-thermal", "solar-all"},
        {"NG", "ng-all"},              {"ng-cc", "ng-all"},
        {"ng-ct", "ng-all"},           {"ng-st", "ng-all"},
        {"ng-ice", "ng-all"},
    };
    return g;
}

InvestmentDelta investment_delta(const Portfolio& base, const Portfolio& other, const Network& net,
                                 const TechGrouping& grouping) {
    std::map<std::string, double> per_group;
    auto accumulate = [&](const std::map<std::string, double>& builds, double sign) {
        for (const auto& [cid, mw] : builds) {
            const Candidate* c = net.find_candidate(cid);
            if (!c) throw Error("investment_delta: candidate '" + cid + "' not in network");
            per_group[grouping.group_of(c->tech)] += sign * mw;
        }
    };
    accumulate(other.gen_build, 1.0);
    accumulate(other.storage_build, 1.0);
    accumulate(base.gen_build, -1.0);
    accumulate(base.storage_build, -1.0);

    InvestmentDelta delta;
    for (const auto& [group, mw] : per_group) {
        delta.rows.push_back({group, mw});
        delta.total_mw += mw;
    }
    return delta;
}

std::string InvestmentDelta::to_string() const {
    std::ostringstream out;
    out << "investment delta (MW):\n";
    for (const auto& row : rows) out << "  " << row.group << ": " << row.delta_mw << "\n";
    out << "  total: " << total_mw << "\n";
    return out.str();
}

} // namespace gridfold
