// detection.hpp
// Photodetector click semantics, outcome enumeration and post-selection.

#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "photonloom/fock.hpp"

namespace photonloom {

enum class DetectorSemantics {
    exactly_one,   // number resolving; a herald click means exactly one photon
    at_least_one,  // threshold (bucket) detector
};

// A detector counts every photon in its modes, so a detector covering both
// polarizations of a port does not resolve polarization.
struct Detector {
    std::string name;
    std::vector<ModeId> modes;
};

using DetectorSet = std::vector<Detector>;

inline Detector port_detector(const std::string& port, std::vector<Polarization> pols) {
    Detector d{port, {}};
    for (auto p : pols) d.modes.push_back(mode(port, p));
    return d;
}

struct ClickPattern {
    std::vector<std::string> fired;  // in detector-set order
    std::vector<std::string> silent;

    std::string str() const {
        if (fired.empty()) return "none";
        std::string s;
        for (const auto& f : fired) s += (s.empty() ? "" : "+") + f;
        return s;
    }
    bool operator==(const ClickPattern&) const = default;
};

// One pure conditional atomic state and its absolute probability.
struct Branch {
    double weight = 0;
    HybridState atoms;      // unit norm
    Occupation occupation;  // the photonic record this branch is conditioned on
};

struct PostSelection {
    double probability = 0;
    std::vector<Branch> branches;  // several when undetected modes leave a mixture

    bool pure() const { return branches.size() <= 1; }
    // The conditional state; empty placeholder for zero-probability patterns.
    const HybridState& atoms() const {
        if (!pure()) throw StateError("conditional state is a mixture of " + std::to_string(branches.size()) + " branches");
        return branches.front().atoms;
    }
};

struct OutcomeRecord {
    ClickPattern pattern;
    double probability = 0;
    std::vector<Branch> branches;

    bool pure() const { return branches.size() == 1; }
    const HybridState& conditional_atoms() const {
        if (!pure()) throw StateError("outcome " + pattern.str() + " is not a pure conditional state");
        return branches.front().atoms;
    }
};

struct OutcomeTable {
    std::vector<OutcomeRecord> records;
    double discarded = 0;  // exactly-one semantics: some detector saw >= 2 photons

    double total() const {
        double t = discarded;
        for (const auto& r : records) t += r.probability;
        return t;
    }
};

namespace detail {

inline std::map<ModeId, std::size_t> detector_index(const DetectorSet& detectors) {
    std::map<ModeId, std::size_t> idx;
    std::set<std::string> names;
    for (std::size_t d = 0; d < detectors.size(); ++d) {
        if (!names.insert(detectors[d].name).second) throw StateError("duplicate detector " + detectors[d].name);
        for (const auto& m : detectors[d].modes) {
            if (!idx.emplace(m, d).second) throw StateError("mode " + m.str() + " watched by two detectors");
        }
    }
    return idx;
}

inline std::vector<int> detector_counts(const Occupation& occ, const std::map<ModeId, std::size_t>& idx,
                                        std::size_t n) {
    std::vector<int> counts(n, 0);
    for (const auto& [m, c] : occ) {
        auto it = idx.find(m);
        if (it != idx.end()) counts[it->second] += c;
    }
    return counts;
}

inline bool fires(int count, DetectorSemantics sem) {
    return sem == DetectorSemantics::exactly_one ? count == 1 : count >= 1;
}

// Splits a set of terms by full photonic occupation into pure branches.
inline std::vector<Branch> branches_of(const HybridState& s) {
    std::map<Occupation, HybridState> groups;
    for (const auto& [t, a] : s.terms()) {
        auto [it, inserted] = groups.try_emplace(t.occupation, s.atom_count());
        it->second.add(t, a);
    }
    std::vector<Branch> out;
    for (const auto& [occ, g] : groups) {
        double w = g.squared_norm();
        if (w == 0) continue;
        out.push_back(Branch{w, reduced_atomic_state(g.scaled(1.0 / std::sqrt(w))), occ});
    }
    return out;
}

inline ClickPattern make_pattern(const std::vector<bool>& fired, const DetectorSet& detectors) {
    ClickPattern p;
    for (std::size_t d = 0; d < detectors.size(); ++d) {
        (fired[d] ? p.fired : p.silent).push_back(detectors[d].name);
    }
    return p;
}

}  // namespace detail

// Groups all terms of s by the click pattern they would produce. Photons in
// modes that no detector watches are traced out.
inline OutcomeTable enumerate_outcomes(const HybridState& s, const DetectorSet& detectors, DetectorSemantics sem) {
    auto idx = detail::detector_index(detectors);
    std::map<std::vector<bool>, HybridState> by_pattern;
    OutcomeTable table;
    for (const auto& [t, a] : s.terms()) {
        auto counts = detail::detector_counts(t.occupation, idx, detectors.size());
        if (sem == DetectorSemantics::exactly_one &&
            std::any_of(counts.begin(), counts.end(), [](int c) { return c >= 2; })) {
            table.discarded += std::norm(a);
            continue;
        }
        std::vector<bool> fired(detectors.size());
        for (std::size_t d = 0; d < counts.size(); ++d) fired[d] = detail::fires(counts[d], sem);
        auto [it, inserted] = by_pattern.try_emplace(fired, s.atom_count());
        it->second.add(t, a);
    }
    // Canonical order: by the fired list, read in detector order.
    std::vector<std::pair<std::vector<bool>, HybridState>> ordered(by_pattern.begin(), by_pattern.end());
    std::sort(ordered.begin(), ordered.end(), [](const auto& x, const auto& y) {
        return std::lexicographical_compare(x.first.begin(), x.first.end(), y.first.begin(), y.first.end(),
                                            [](bool p, bool q) { return p > q; });
    });
    for (const auto& [fired, group] : ordered) {
        OutcomeRecord r;
        r.pattern = detail::make_pattern(fired, detectors);
        r.probability = group.squared_norm();
        r.branches = detail::branches_of(group);
        table.records.push_back(std::move(r));
    }
    return table;
}

namespace detail {

inline std::vector<int> pattern_requirement(const ClickPattern& pattern, const DetectorSet& detectors) {
    // +1 fired, 0 silent, -1 unassigned
    std::vector<int> req(detectors.size(), -1);
    auto assign = [&](const std::string& name, int v) {
        auto it = std::find_if(detectors.begin(), detectors.end(), [&](const Detector& d) { return d.name == name; });
        if (it == detectors.end()) throw StateError("pattern names unknown detector " + name);
        auto& slot = req[it - detectors.begin()];
        if (slot != -1) throw StateError("detector " + name + " listed twice in pattern");
        slot = v;
    };
    for (const auto& f : pattern.fired) assign(f, 1);
    for (const auto& f : pattern.silent) assign(f, 0);
    if (std::find(req.begin(), req.end(), -1) != req.end()) {
        throw StateError("pattern does not cover every detector");
    }
    return req;
}

inline PostSelection finish(const HybridState& kept) {
    PostSelection ps;
    ps.probability = kept.squared_norm();
    if (ps.probability == 0) {
        ps.branches.push_back(Branch{0, HybridState(kept.atom_count()), {}});
        return ps;
    }
    ps.branches = branches_of(kept);
    return ps;
}

}  // namespace detail

// Builds a pattern from the fired detector names; every other detector is silent.
inline ClickPattern pattern_of(const std::vector<std::string>& fired, const DetectorSet& detectors) {
    ClickPattern p;
    for (const auto& d : detectors) {
        bool on = std::find(fired.begin(), fired.end(), d.name) != fired.end();
        (on ? p.fired : p.silent).push_back(d.name);
    }
    if (p.fired.size() != fired.size()) throw StateError("pattern names unknown or repeated detectors");
    return p;
}

// Projects s onto one click pattern. Zero-probability patterns give a zero
// probability and an empty placeholder state rather than an error.
inline PostSelection post_select(const HybridState& s, const ClickPattern& pattern, const DetectorSet& detectors,
                                 DetectorSemantics sem) {
    auto idx = detail::detector_index(detectors);
    auto req = detail::pattern_requirement(pattern, detectors);
    HybridState kept = s.filtered([&](const BasisTerm& t) {
        auto counts = detail::detector_counts(t.occupation, idx, detectors.size());
        for (std::size_t d = 0; d < counts.size(); ++d) {
            if (req[d] == 1 ? !detail::fires(counts[d], sem) : counts[d] != 0) return false;
        }
        return true;
    });
    return detail::finish(kept);
}

// Applies the clicks one detector at a time, renormalizing after each, then
// projects the remaining detectors onto silence.
inline PostSelection sequential_project(const HybridState& s, const std::vector<std::string>& ordered_clicks,
                                        const DetectorSet& detectors, DetectorSemantics sem,
                                        const EngineConfig& cfg = {}) {
    auto idx = detail::detector_index(detectors);
    auto pattern = pattern_of(ordered_clicks, detectors);
    auto index_of = [&](const std::string& name) {
        return std::size_t(std::find_if(detectors.begin(), detectors.end(),
                                        [&](const Detector& d) { return d.name == name; }) -
                           detectors.begin());
    };
    double probability = s.squared_norm();
    HybridState current = s;
    auto step = [&](std::size_t d, bool want_click) {
        HybridState kept = current.filtered([&](const BasisTerm& t) {
            int c = detail::detector_counts(t.occupation, idx, detectors.size())[d];
            return want_click ? detail::fires(c, sem) : c == 0;
        });
        double before = current.squared_norm(), after = kept.squared_norm();
        if (after <= 0 || std::sqrt(after) <= cfg.norm_epsilon) {
            probability = 0;
            return false;
        }
        probability *= after / before;
        current = kept.scaled(1.0 / std::sqrt(after));
        return true;
    };
    if (probability <= 0) return detail::finish(HybridState(s.atom_count()));
    for (const auto& c : ordered_clicks) {
        if (!step(index_of(c), true)) return detail::finish(HybridState(s.atom_count()));
    }
    for (const auto& name : pattern.silent) {
        if (!step(index_of(name), false)) return detail::finish(HybridState(s.atom_count()));
    }
    PostSelection ps;
    ps.probability = probability;
    for (auto& b : detail::branches_of(current)) {
        b.weight *= probability;
        ps.branches.push_back(std::move(b));
    }
    return ps;
}

// Weighted fidelity of a (possibly mixed) conditional state to a target on
// a subset of the atoms.
inline double ensemble_fidelity(const std::vector<Branch>& branches, const HybridState& target,
                                const std::vector<std::size_t>& subset) {
    double w = 0, f = 0;
    for (const auto& b : branches) {
        w += b.weight;
        f += b.weight * subset_fidelity(target, b.atoms, subset);
    }
    return w > 0 ? f / w : 0.0;
}

}  // namespace photonloom
