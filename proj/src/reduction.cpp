#include "gridfold/reduction.hpp"

#include "gridfold/geo.hpp"

#include <algorithm>
#include <cassert>
#include <complex>
#include <limits>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace gridfold {

namespace {

struct RuleInputs {
    bool is_substation = false;
    bool was_merged = false;
    int degree = 0;
};

// Priority order: substation > previously merged > higher degree > "from" bus.
int pick_primary(const RuleInputs& from, const RuleInputs& to) {
    if (from.is_substation != to.is_substation) return from.is_substation ? 1 : -1;
    if (from.was_merged != to.was_merged) return from.was_merged ? 2 : -2;
    if (from.degree != to.degree) return from.degree > to.degree ? 3 : -3;
    return 4;
}

} // namespace

PrimaryChoice select_primary_bus(const std::string& from_bus, const std::string& to_bus,
                                 const std::set<std::string>& merged, const Network& net) {
    if (from_bus == to_bus) throw Error("select_primary_bus: buses must be distinct");
    const Bus& f = net.bus(from_bus);
    const Bus& t = net.bus(to_bus);
    RuleInputs fi{f.is_substation, merged.count(from_bus) > 0, bus_degree(net, from_bus)};
    RuleInputs ti{t.is_substation, merged.count(to_bus) > 0, bus_degree(net, to_bus)};
    const int rule = pick_primary(fi, ti);
    PrimaryChoice out;
    out.rule = std::abs(rule);
    if (rule > 0) {
        out.primary = from_bus;
        out.secondary = to_bus;
    } else {
        out.primary = to_bus;
        out.secondary = from_bus;
    }
    return out;
}

EquivalentBranch series_equivalent(std::span<const Branch> chain, SeriesRatingRule rule) {
    if (chain.empty()) throw Error("series_equivalent: empty chain");
    for (std::size_t i = 1; i < chain.size(); ++i) {
        const Branch& a = chain[i - 1];
        const Branch& b = chain[i];
        const bool shares = a.from_bus == b.from_bus || a.from_bus == b.to_bus ||
                            a.to_bus == b.from_bus || a.to_bus == b.to_bus;
        if (!shares)
            throw Error("series_equivalent: branches '" + a.id + "' and '" + b.id +
                        "' do not share a bus");
    }
    EquivalentBranch out;
    double min_rating = std::numeric_limits<double>::infinity();
    for (const Branch& b : chain) {
        out.r += b.r;
        out.x += b.x;
        min_rating = std::min(min_rating, b.rating);
    }
    out.rating = rule == SeriesRatingRule::keep_last ? chain.back().rating : min_rating;
    return out;
}

EquivalentBranch parallel_equivalent(std::span<const Branch> group) {
    if (group.empty()) throw Error("parallel_equivalent: empty group");
    auto key = [](const Branch& b) {
        return std::minmax(b.from_bus, b.to_bus);
    };
    const auto endpoints = key(group.front());
    std::complex<double> y_sum(0.0, 0.0);
    EquivalentBranch out;
    for (const Branch& b : group) {
        if (key(b) != endpoints)
            throw Error("parallel_equivalent: branch '" + b.id + "' has different endpoints");
        if (b.r == 0.0 && b.x == 0.0)
            throw Error("parallel_equivalent: branch '" + b.id + "' has zero impedance");
        y_sum += 1.0 / std::complex<double>(b.r, b.x);
        out.rating += b.rating;
    }
    if (group.size() == 1) { // exact identity, no admittance round trip
        out.r = group.front().r;
        out.x = group.front().x;
        return out;
    }
    const std::complex<double> z = 1.0 / y_sum;
    // Passive branches give Re(z) >= 0 mathematically; rounding may dip a
    // hair below zero, which would fail validation on reload.
    out.r = std::max(z.real(), 0.0);
    out.x = z.imag();
    return out;
}

namespace {

// Mutable working copy of the network during reduction. Branch slots keep
// their position so output order is stable; removed slots are compacted at
// the end.
struct WorkState {
    struct Slot {
        Branch br;
        LineComposition comp; // meaningful for lines only
        bool alive = true;
    };

    std::vector<std::string> bus_order;
    std::unordered_map<std::string, Bus> buses;
    std::vector<Slot> slots;
    std::unordered_map<std::string, std::set<std::size_t>> incident; // bus -> slot indices
    std::set<std::string> merged;
    std::unordered_map<std::string, std::string> parent; // secondary -> primary
    std::vector<Generator> gens;
    std::vector<Storage> stor;
    std::vector<Load> loads;
    std::vector<Candidate> cands;

    explicit WorkState(const Network& net)
        : gens(net.generators), stor(net.storage), loads(net.loads), cands(net.candidates) {
        for (const auto& b : net.buses) {
            bus_order.push_back(b.id);
            buses.emplace(b.id, b);
        }
        slots.reserve(net.branches.size());
        for (const auto& br : net.branches) {
            Slot s;
            s.br = br;
            s.comp = LineComposition::leaf(br.id);
            slots.push_back(std::move(s));
        }
        for (std::size_t i = 0; i < slots.size(); ++i) {
            incident[slots[i].br.from_bus].insert(i);
            incident[slots[i].br.to_bus].insert(i);
        }
    }

    int degree(const std::string& bus) const {
        auto it = incident.find(bus);
        return it == incident.end() ? 0 : static_cast<int>(it->second.size());
    }

    double branch_distance(const Branch& br) const {
        return haversine_distance(buses.at(br.from_bus).location, buses.at(br.to_bus).location);
    }

    bool transformer_bridged(const std::string& a, const std::string& b) const {
        auto it = incident.find(a);
        if (it == incident.end()) return false;
        for (std::size_t i : it->second) {
            const Branch& br = slots[i].br;
            if (br.kind != BranchKind::transformer) continue;
            if ((br.from_bus == a && br.to_bus == b) || (br.from_bus == b && br.to_bus == a))
                return true;
        }
        return false;
    }

    void remove_slot(std::size_t i) {
        Slot& s = slots[i];
        assert(s.alive);
        incident[s.br.from_bus].erase(i);
        incident[s.br.to_bus].erase(i);
        s.alive = false;
    }

    void relocate_elements(const std::string& from, const std::string& to) {
        for (auto& g : gens)
            if (g.bus == from) g.bus = to;
        for (auto& s : stor)
            if (s.bus == from) s.bus = to;
        for (auto& l : loads)
            if (l.bus == from) l.bus = to;
        for (auto& c : cands)
            if (c.bus == from) c.bus = to;
    }

    void remove_bus(const std::string& id) {
        assert(degree(id) == 0);
        incident.erase(id);
        buses.erase(id);
        bus_order.erase(std::find(bus_order.begin(), bus_order.end(), id));
    }

    // Smallest (distance, id) radial line within D, or npos.
    std::size_t next_radial(double d_max) const {
        std::size_t best = npos;
        double best_dist = 0.0;
        for (std::size_t i = 0; i < slots.size(); ++i) {
            const Slot& s = slots[i];
            if (!s.alive || s.br.kind != BranchKind::line) continue;
            if (degree(s.br.from_bus) != 1 && degree(s.br.to_bus) != 1) continue;
            const double d = branch_distance(s.br);
            if (d > d_max) continue;
            if (best == npos || d < best_dist ||
                (d == best_dist && s.br.id < slots[best].br.id)) {
                best = i;
                best_dist = d;
            }
        }
        return best;
    }

    // Smallest (distance, id) meshed line within D whose endpoints are not
    // transformer-bridged, or npos.
    std::size_t next_meshed(double d_max) const {
        std::size_t best = npos;
        double best_dist = 0.0;
        for (std::size_t i = 0; i < slots.size(); ++i) {
            const Slot& s = slots[i];
            if (!s.alive || s.br.kind != BranchKind::line) continue;
            const double d = branch_distance(s.br);
            if (d > d_max) continue;
            if (transformer_bridged(s.br.from_bus, s.br.to_bus)) continue;
            if (best == npos || d < best_dist ||
                (d == best_dist && s.br.id < slots[best].br.id)) {
                best = i;
                best_dist = d;
            }
        }
        return best;
    }

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

void run_part_one(WorkState& st, double d_max) {
    for (;;) {
        const std::size_t i = st.next_radial(d_max);
        if (i == WorkState::npos) break;
        const Branch br = st.slots[i].br;
        // Appendix Part I step 1: primary keeps the meshed side.
        const std::string primary = st.degree(br.from_bus) > 1 ? br.from_bus : br.to_bus;
        const std::string secondary = primary == br.from_bus ? br.to_bus : br.from_bus;
        st.remove_slot(i);
        st.relocate_elements(secondary, primary);
        st.parent[secondary] = primary;
        st.merged.insert(primary);
        st.remove_bus(secondary);
    }
}

void run_part_two(WorkState& st, double d_max) {
    for (;;) {
        const std::size_t trigger = st.next_meshed(d_max);
        if (trigger == WorkState::npos) break;
        const Branch tb = st.slots[trigger].br;

        RuleInputs fi{st.buses.at(tb.from_bus).is_substation, st.merged.count(tb.from_bus) > 0,
                      st.degree(tb.from_bus)};
        RuleInputs ti{st.buses.at(tb.to_bus).is_substation, st.merged.count(tb.to_bus) > 0,
                      st.degree(tb.to_bus)};
        const bool from_primary = pick_primary(fi, ti) > 0;
        const std::string p = from_primary ? tb.from_bus : tb.to_bus;
        const std::string s = from_primary ? tb.to_bus : tb.from_bus;

        // Step 3: all parallel lines between the pair collapse into one.
        std::vector<std::size_t> group;
        for (std::size_t i : st.incident.at(s)) {
            const Branch& br = st.slots[i].br;
            if (br.kind != BranchKind::line) continue;
            if ((br.from_bus == p && br.to_bus == s) || (br.from_bus == s && br.to_bus == p))
                group.push_back(i);
        }
        std::sort(group.begin(), group.end(),
                  [&](std::size_t a, std::size_t b) { return st.slots[a].br.id < st.slots[b].br.id; });
        assert(!group.empty());

        std::vector<Branch> group_branches;
        for (std::size_t i : group) group_branches.push_back(st.slots[i].br);
        const EquivalentBranch pair_eq = parallel_equivalent(group_branches);

        Branch pair_line;
        pair_line.id = group_branches.front().id;
        pair_line.kind = BranchKind::line;
        pair_line.r = pair_eq.r;
        pair_line.x = pair_eq.x;
        pair_line.rating = pair_eq.rating;
        pair_line.reinforcible = false;
        double min_cost = std::numeric_limits<double>::infinity();
        for (const Branch& b : group_branches) {
            if (b.reinforcible) {
                pair_line.reinforcible = true;
                min_cost = std::min(min_cost, b.reinforce_cost);
            }
        }
        pair_line.reinforce_cost = pair_line.reinforcible ? min_cost : 0.0;

        LineComposition pair_comp;
        if (group.size() == 1) {
            pair_comp = st.slots[group.front()].comp;
        } else {
            std::vector<LineComposition> parts;
            for (std::size_t i : group) parts.push_back(st.slots[i].comp);
            pair_comp = LineComposition::parallel(std::move(parts));
        }

        for (std::size_t i : group) st.remove_slot(i);

        // Step 4: lines hanging only off the secondary.
        std::vector<std::size_t> attach;
        for (std::size_t i : st.incident.at(s)) {
            if (st.slots[i].br.kind == BranchKind::line) attach.push_back(i);
        }
        std::sort(attach.begin(), attach.end(),
                  [&](std::size_t a, std::size_t b) { return st.slots[a].br.id < st.slots[b].br.id; });

        // Step 5: each re-attached line absorbs the pair line in series,
        // keeping its own rating (and reinforcement attributes).
        for (std::size_t i : attach) {
            WorkState::Slot& slot = st.slots[i];
            st.incident[s].erase(i);
            Branch nb = slot.br;
            nb.r += pair_line.r;
            nb.x += pair_line.x;
            if (nb.from_bus == s)
                nb.from_bus = p;
            else
                nb.to_bus = p;
            slot.br = std::move(nb);
            slot.comp = LineComposition::series({pair_comp, std::move(slot.comp)});
            st.incident[p].insert(i);
        }

        // Step 7: transformers re-endpoint to the merged bus.
        std::vector<std::size_t> xfmrs(st.incident.at(s).begin(), st.incident.at(s).end());
        for (std::size_t i : xfmrs) {
            WorkState::Slot& slot = st.slots[i];
            assert(slot.br.kind == BranchKind::transformer);
            st.incident[s].erase(i);
            if (slot.br.from_bus == s) slot.br.from_bus = p;
            if (slot.br.to_bus == s) slot.br.to_bus = p;
            st.incident[p].insert(i);
        }

        st.relocate_elements(s, p);
        st.parent[s] = p;
        st.merged.insert(p);
        st.remove_bus(s);
    }
}

} // namespace

std::pair<Network, MergeMap> reduce_network(const Network& net, const ReductionConfig& cfg) {
    if (!(cfg.distance_km >= 0.0) || !std::isfinite(cfg.distance_km))
        throw Error("reduce_network: distance_km must be finite and >= 0");

    WorkState st(net);
    run_part_one(st, cfg.distance_km);
    if (cfg.mode == ReductionMode::full) run_part_two(st, cfg.distance_km);

    Network out;
    out.name = net.name;
    for (const auto& id : st.bus_order) out.buses.push_back(st.buses.at(id));
    for (const auto& slot : st.slots)
        if (slot.alive) out.branches.push_back(slot.br);
    out.generators = std::move(st.gens);
    out.storage = std::move(st.stor);
    out.loads = std::move(st.loads);
    out.candidates = std::move(st.cands);

    MergeMap mm;
    for (const auto& b : net.buses) {
        std::string cur = b.id;
        auto it = st.parent.find(cur);
        while (it != st.parent.end()) {
            cur = it->second;
            it = st.parent.find(cur);
        }
        mm.bus_map[b.id] = cur;
    }

    std::unordered_set<std::string> represented;
    for (const auto& slot : st.slots) {
        if (!slot.alive || slot.br.kind != BranchKind::line) continue;
        if (slot.comp.kind != LineComposition::Kind::leaf)
            mm.line_composition[slot.br.id] = slot.comp;
        for (const auto& id : slot.comp.flatten()) represented.insert(id);
    }
    for (const auto& br : net.branches) {
        if (br.kind == BranchKind::line && !represented.count(br.id))
            mm.removed_lines.push_back(br.id);
    }
    std::sort(mm.removed_lines.begin(), mm.removed_lines.end());

    for (const auto& g : out.generators) mm.generator_bus[g.id] = g.bus;
    for (const auto& s : out.storage) mm.storage_bus[s.id] = s.bus;
    for (const auto& l : out.loads) mm.load_bus[l.id] = l.bus;
    for (const auto& c : out.candidates) mm.candidate_bus[c.id] = c.bus;

    return {std::move(out), std::move(mm)};
}

Network tighten_candidates(const Network& reduced, const Network& original, const MergeMap& mm) {
    Network out = reduced;
    for (auto& cand : out.candidates) {
        const Candidate* orig = original.find_candidate(cand.id);
        if (!orig)
            throw Error("tighten_candidates: candidate '" + cand.id + "' not in original network");
        auto reloc = mm.candidate_bus.find(cand.id);
        if (reloc == mm.candidate_bus.end() || reloc->second != cand.bus)
            throw Error("tighten_candidates: merge map inconsistent for candidate '" + cand.id + "'");
        double incident_rating = 0.0;
        for (const auto& br : original.branches) {
            if (br.kind != BranchKind::line) continue;
            if (br.from_bus == orig->bus || br.to_bus == orig->bus) incident_rating += br.rating;
        }
        cand.max_build = std::min(cand.max_build, 2.0 * incident_rating);
    }
    return out;
}

NetworkStats network_stats(const Network& net) {
    NetworkStats s;
    s.buses = net.buses.size();
    s.branches = net.branches.size();
    for (const auto& br : net.branches) {
        if (br.kind == BranchKind::line)
            ++s.lines;
        else
            ++s.transformers;
        if (!s.min_r || br.r < *s.min_r) s.min_r = br.r;
        if (!s.min_x || br.x < *s.min_x) s.min_x = br.x;
    }
    s.generators = net.generators.size();
    s.storage = net.storage.size();
    s.loads = net.loads.size();
    s.candidates = net.candidates.size();
    return s;
}

ReductionStats reduction_stats(const Network& original, const Network& reduced) {
    return {network_stats(original), network_stats(reduced)};
}

std::string ReductionStats::to_string() const {
    std::ostringstream out;
    auto row = [&](const char* label, const NetworkStats& n) {
        out << label << ": buses " << n.buses << ", branches " << n.branches << " (" << n.lines
            << " lines, " << n.transformers << " transformers)";
        if (n.min_r) out << ", min r " << *n.min_r;
        if (n.min_x) out << ", min x " << *n.min_x;
        out << ", generators " << n.generators << ", storage " << n.storage << ", loads "
            << n.loads << ", candidates " << n.candidates << "\n";
    };
    row("original", original);
    row("reduced ", reduced);
    return out.str();
}

} // namespace gridfold
