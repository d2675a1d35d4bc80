// emission.hpp
// Post-QWP atom-photon state of a Lambda-atom in a one-sided cavity.

#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "photonloom/fock.hpp"

namespace photonloom {

struct CouplingParams {
    double lambda_l = 1.0;
    double lambda_r = 1.0;
    double theta = std::numbers::pi / 2;  // Omega * t

    double omega() const { return std::sqrt(lambda_l * lambda_l + lambda_r * lambda_r); }

    void validate() const {
        if (!(lambda_l > 0) || !(lambda_r > 0)) throw StateError("coupling constants must be positive");
        if (!std::isfinite(theta)) throw StateError("theta must be finite");
    }
};

struct EmissionConfig {
    CouplingParams coupling;
    bool keep_vacuum_term = false;
    std::string atom_index = "1";
    std::string output_port = "A";

    // Probability that the atom has emitted its photon.
    double emission_probability() const {
        double s = std::sin(coupling.theta);
        return s * s;
    }
};

// sin(theta) (lambda_l |g_l>|V> + lambda_r |g_r>|H>) / Omega on the output
// port, plus cos(theta) |e>|vac> when the vacuum term is kept.
inline HybridState emit(const EmissionConfig& cfg, const EngineConfig& engine = {}) {
    cfg.coupling.validate();
    const auto& c = cfg.coupling;
    double s = std::sin(c.theta), w = c.omega();
    HybridState out(1);
    out.add(BasisTerm{{AtomLevel::ground_l}, {{mode(cfg.output_port, Polarization::V), 1}}}, s * c.lambda_l / w);
    out.add(BasisTerm{{AtomLevel::ground_r}, {{mode(cfg.output_port, Polarization::H), 1}}}, s * c.lambda_r / w);
    if (cfg.keep_vacuum_term) out.add(BasisTerm{{AtomLevel::excited}, {}}, std::cos(c.theta));
    return out.pruned(engine.amplitude_epsilon);
}

// Ideal bunching of two factors into shared modes: atom lists concatenate,
// photon counts add, and the amplitude is the plain product. Each atomic
// configuration maps onto the normalized Fock ket of its photon counts, which
// is norm-preserving as long as the atomic configuration labels each term.
inline HybridState bunch_merge(const HybridState& s1, const HybridState& s2, const EngineConfig& engine = {}) {
    HybridState out(s1.atom_count() + s2.atom_count());
    for (const auto& [t, a] : s1.terms()) {
        for (const auto& [u, b] : s2.terms()) {
            auto atoms = t.atoms;
            atoms.insert(atoms.end(), u.atoms.begin(), u.atoms.end());
            Occupation occ = t.occupation;
            for (const auto& [m, n] : u.occupation) occ = with_added(std::move(occ), m, n);
            if (total_photons(occ) > engine.max_photons) throw StateError("bunch_merge: photon truncation exceeded");
            out.add(BasisTerm{std::move(atoms), std::move(occ)}, a * b);
        }
    }
    return out.pruned(engine.amplitude_epsilon);
}

// Tensor product of several emissions, or with shared_port set, all photons
// emitted into that one port through bunch_merge.
inline HybridState emit_all(const std::vector<EmissionConfig>& cfgs, const std::optional<std::string>& shared_port = {},
                            const EngineConfig& engine = {}) {
    if (cfgs.empty()) throw StateError("emit_all: no emitters");
    std::set<std::string> seen;
    for (const auto& c : cfgs) {
        if (!seen.insert(c.atom_index).second) throw StateError("emit_all: duplicate atom index " + c.atom_index);
    }
    HybridState s = HybridState::vacuum();
    for (const auto& c : cfgs) {
        if (shared_port) {
            EmissionConfig routed = c;
            routed.output_port = *shared_port;
            s = bunch_merge(s, emit(routed, engine), engine);
        } else {
            s = tensor(s, emit(c, engine), false, engine);
        }
    }
    return s;
}

}  // namespace photonloom
