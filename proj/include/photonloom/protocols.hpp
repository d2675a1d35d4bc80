// protocols.hpp
// End-to-end drivers for heralded GHZ and W preparation of three remote
// Lambda-atoms: emission, linear-optical network, detection, heralding.
//
// Setups
//   ghz         A,B,C -> PBS1(B,C -> c,d) -> PBS2(d,A -> a,b) -> FS-PBS on a,b,c.
//               Six detectors {a,b,c} x {F,S}; herald = one click on each port,
//               GHZ+ when the number of F clicks is odd, GHZ- otherwise.
//   w_direct    three photons ideally bunched into OUT -> PBS(OUT: H->b', V->a')
//               -> BS(a' -> a,b) and BS(b' -> c,d). Four port detectors;
//               herald = three distinct clicks, W when a and b both click,
//               W~ (l <-> r mirror) otherwise.
//   w_bunching  A,B -> BS1'(-> t', s'); t' and C -> BS(-> OUT, F2); OUT feeds
//               the w_direct detection stage. F2 optionally feeds a second
//               detection stage. The auxiliary arm sends s' and the photon of
//               atom 3' (port I'C) through an identical BS(-> OUT', F2').

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "photonloom/detection.hpp"
#include "photonloom/elements.hpp"
#include "photonloom/emission.hpp"
#include "photonloom/fock.hpp"
#include "photonloom/parallel.hpp"

namespace photonloom {

enum class Variant { ghz, w_direct, w_bunching, w_bunching_with_f2, w_bunching_with_f1_aux };

inline std::string variant_name(Variant v) {
    switch (v) {
        case Variant::ghz: return "ghz";
        case Variant::w_direct: return "w-direct";
        case Variant::w_bunching: return "w-bunching";
        case Variant::w_bunching_with_f2: return "w-bunching-f2";
        case Variant::w_bunching_with_f1_aux: return "w-bunching-f1-aux";
    }
    return "?";
}

inline std::optional<Variant> parse_variant(std::string s) {
    for (auto& c : s) {
        if (c == '_') c = '-';
    }
    if (s == "ghz") return Variant::ghz;
    if (s == "w-direct") return Variant::w_direct;
    if (s == "w-bunching") return Variant::w_bunching;
    if (s == "w-bunching-f2" || s == "w-bunching-with-f2") return Variant::w_bunching_with_f2;
    if (s == "w-bunching-f1-aux" || s == "w-bunching-with-f1-aux") return Variant::w_bunching_with_f1_aux;
    return std::nullopt;
}

struct ProtocolParams {
    CouplingParams coupling;
    DetectorSemantics semantics = DetectorSemantics::exactly_one;
    bool keep_vacuum_term = false;
    double bs_transmittance = 0.5;
    Variant variant = Variant::ghz;
    // Extension switches for the w_bunching family; the named variants imply
    // them (w_bunching_with_f1_aux enables both extensions).
    bool with_f2 = false;
    bool with_f1_aux = false;

    bool f2() const {
        return with_f2 || variant == Variant::w_bunching_with_f2 || variant == Variant::w_bunching_with_f1_aux;
    }
    bool f1_aux() const { return with_f1_aux || variant == Variant::w_bunching_with_f1_aux; }
    bool is_w_bunching() const {
        return variant == Variant::w_bunching || variant == Variant::w_bunching_with_f2 ||
               variant == Variant::w_bunching_with_f1_aux;
    }
};

// ---------------------------------------------------------------- targets

inline HybridState ghz_target(bool plus) {
    const double h = 1.0 / std::sqrt(2.0);
    return atomic_ket({{"lll", h}, {"rrr", plus ? h : -h}});
}

inline HybridState w_target(bool mirrored) {
    const double t = 1.0 / std::sqrt(3.0);
    if (mirrored) return atomic_ket({{"lrr", t}, {"rlr", t}, {"rrl", t}});
    return atomic_ket({{"llr", t}, {"lrl", t}, {"rll", t}});
}

// ---------------------------------------------------------------- setups

struct Herald {
    std::string target;
    HybridState target_state;
    std::vector<std::size_t> atoms;   // which atoms the target lives on
    std::vector<std::string> block;   // detectors whose record defines the herald
};

using HeraldRule = std::function<std::optional<Herald>(const std::vector<std::string>& fired)>;

struct Emitter {
    std::string atom;
    std::string port;
};

struct Setup {
    std::string name;
    std::vector<Emitter> emitters;
    std::optional<std::string> shared_port;  // ideal bunching of every photon into one port
    std::vector<ModeTransform> circuit;
    DetectorSet detectors;
    HeraldRule herald;
    std::vector<std::string> wiring;
};

namespace detail {

inline DetectorSet ghz_detectors() {
    DetectorSet d;
    for (std::string port : {"a", "b", "c"}) {
        for (auto pol : {Polarization::F, Polarization::S}) {
            d.push_back(Detector{port + pol_char(pol), {mode(port, pol)}});
        }
    }
    return d;
}

// One W detection stage fed from `in_port`: PBS, two beam splitters and four
// polarization-insensitive detectors named prefix+{a,b,c,d}.
inline std::vector<ModeTransform> w_detection_stage(const std::string& in_port, const std::string& prefix, double t) {
    const std::string ap = prefix + "a'", bp = prefix + "b'";
    return {
        pbs_split(in_port, bp, ap),
        bs(ap, ap + "~", prefix + "a", prefix + "b", t, PhaseConvention::plus_i),
        bs(bp, bp + "~", prefix + "c", prefix + "d", t, PhaseConvention::minus_i),
    };
}

inline DetectorSet w_detectors(const std::string& prefix) {
    DetectorSet d;
    for (std::string p : {"a", "b", "c", "d"}) {
        d.push_back(port_detector(prefix + p, {Polarization::V, Polarization::H}));
    }
    return d;
}

struct WBlock {
    std::string prefix;
    std::vector<std::size_t> atoms;
    std::string suffix;  // "'" for the auxiliary-arm targets
};

inline HeraldRule w_herald(std::vector<WBlock> blocks) {
    return [blocks](const std::vector<std::string>& fired) -> std::optional<Herald> {
        std::optional<Herald> found;
        for (const auto& b : blocks) {
            std::vector<std::string> names = {b.prefix + "a", b.prefix + "b", b.prefix + "c", b.prefix + "d"};
            std::vector<bool> on(4, false);
            int n = 0;
            for (int i = 0; i < 4; ++i) {
                on[i] = std::find(fired.begin(), fired.end(), names[i]) != fired.end();
                n += on[i];
            }
            if (n != 3) continue;
            if (found) return std::nullopt;
            bool w = on[0] && on[1];
            found = Herald{(w ? "W" : "W~") + b.suffix, w_target(!w), b.atoms, names};
        }
        return found;
    };
}

}  // namespace detail

inline Setup ghz_setup() {
    Setup s;
    s.name = "ghz";
    s.emitters = {{"1", "A"}, {"2", "B"}, {"3", "C"}};
    s.circuit = {pbs("B", "C", "c", "d"), pbs("d", "A", "a", "b"), fs_pbs("a", "a", "a"), fs_pbs("b", "b", "b"),
                 fs_pbs("c", "c", "c")};
    s.detectors = detail::ghz_detectors();
    s.herald = [](const std::vector<std::string>& fired) -> std::optional<Herald> {
        if (fired.size() != 3) return std::nullopt;
        int f_count = 0;
        for (char port : {'a', 'b', 'c'}) {
            int hits = 0;
            for (const auto& name : fired) {
                if (name[0] == port) {
                    ++hits;
                    f_count += name[1] == 'F';
                }
            }
            if (hits != 1) return std::nullopt;
        }
        bool plus = f_count % 2 == 1;
        return Herald{plus ? "GHZ+" : "GHZ-", ghz_target(plus), {0, 1, 2}, {"aF", "aS", "bF", "bS", "cF", "cS"}};
    };
    s.wiring = {"PBS1(B,C->c,d)", "PBS2(d,A->a,b)", "FS-PBS on a,b,c", "detectors {a,b,c}x{F,S}"};
    return s;
}

inline Setup w_direct_setup(double t = 0.5) {
    Setup s;
    s.name = "w-direct";
    s.emitters = {{"1", "A"}, {"2", "B"}, {"3", "C"}};
    s.shared_port = "OUT";
    s.circuit = detail::w_detection_stage("OUT", "", t);
    s.detectors = detail::w_detectors("");
    s.herald = detail::w_herald({{"", {0, 1, 2}, ""}});
    s.wiring = {"ideal bunching into OUT", "PBS(OUT: H->b', V->a')", "BS(a'->a,b; +i)", "BS(b'->c,d; -i)"};
    return s;
}

inline Setup w_bunching_setup(double t, bool f2, bool aux) {
    Setup s;
    s.name = "w-bunching";
    s.emitters = {{"1", "A"}, {"2", "B"}, {"3", "C"}};
    if (aux) s.emitters.push_back({"3'", "I'C"});
    s.circuit = {bs("A", "B", "t'", "s'", t), bs("t'", "C", "OUT", "F2", t)};
    if (aux) s.circuit.push_back(bs("s'", "I'C", "OUT'", "F2'", t));
    std::vector<detail::WBlock> blocks = {{"", {0, 1, 2}, ""}};
    auto add_stage = [&](const std::string& port, const std::string& prefix, std::vector<std::size_t> atoms,
                         const std::string& suffix) {
        for (auto& m : detail::w_detection_stage(port, prefix, t)) s.circuit.push_back(std::move(m));
        for (auto& d : detail::w_detectors(prefix)) s.detectors.push_back(std::move(d));
        blocks.push_back({prefix, std::move(atoms), suffix});
    };
    for (auto& m : detail::w_detection_stage("OUT", "", t)) s.circuit.push_back(std::move(m));
    s.detectors = detail::w_detectors("");
    if (f2) add_stage("F2", "f2.", {0, 1, 2}, "");
    if (aux) {
        add_stage("OUT'", "aux.", {0, 1, 3}, "'");
        if (f2) add_stage("F2'", "aux.f2.", {0, 1, 3}, "'");
    }
    s.herald = detail::w_herald(blocks);
    s.wiring = {"BS1'(A,B->t',s')", "BS(t',C->OUT,F2)", "detection stage on OUT"};
    if (f2) s.wiring.push_back("detection stage on F2 (prefix f2.)");
    if (aux) {
        s.wiring.push_back("BS(s',I'C->OUT',F2') with auxiliary atom 3'");
        s.wiring.push_back("detection stage on OUT' (prefix aux.)");
        if (f2) s.wiring.push_back("detection stage on F2' (prefix aux.f2.)");
    }
    if (!aux) s.wiring.push_back("s' undetected");
    if (!f2) s.wiring.push_back(aux ? "F2, F2' undetected" : "F2 undetected");
    return s;
}

inline Setup build_setup(const ProtocolParams& p) {
    switch (p.variant) {
        case Variant::ghz: return ghz_setup();
        case Variant::w_direct: return w_direct_setup(p.bs_transmittance);
        default: return w_bunching_setup(p.bs_transmittance, p.f2(), p.f1_aux());
    }
}

inline std::vector<EmissionConfig> emission_configs(const Setup& s, const ProtocolParams& p) {
    std::vector<EmissionConfig> cfgs;
    for (const auto& e : s.emitters) cfgs.push_back(EmissionConfig{p.coupling, p.keep_vacuum_term, e.atom, e.port});
    return cfgs;
}

inline HybridState prepare_input(const Setup& s, const ProtocolParams& p, const EngineConfig& engine = {}) {
    return emit_all(emission_configs(s, p), s.shared_port, engine);
}

// ---------------------------------------------------------------- reports

struct ReportedOutcome {
    OutcomeRecord record;
    bool heralded = false;
    std::string target;  // empty when not heralded
    double fidelity = std::numeric_limits<double>::quiet_NaN();
};

struct ProtocolReport {
    std::string variant;
    ProtocolParams params;
    std::vector<ReportedOutcome> outcomes;
    double total_success_probability = 0;
    std::map<std::string, double> per_target_yield;
    double discarded = 0;      // exactly-one semantics: some detector saw two or more photons
    double not_heralded = 0;   // click patterns that are not heralds, including no click
    double input_norm = 0;     // squared norm of the emitted state
    std::map<std::string, double> quantities;
    std::vector<std::string> notes;

    std::size_t herald_count() const {
        std::size_t n = 0;
        for (const auto& o : outcomes) n += o.heralded;
        return n;
    }
    double min_fidelity() const {
        double f = std::numeric_limits<double>::quiet_NaN();
        for (const auto& o : outcomes) {
            if (o.heralded && o.record.probability > 0) f = std::isnan(f) ? o.fidelity : std::min(f, o.fidelity);
        }
        return f;
    }
    double max_fidelity() const {
        double f = std::numeric_limits<double>::quiet_NaN();
        for (const auto& o : outcomes) {
            if (o.heralded && o.record.probability > 0) f = std::isnan(f) ? o.fidelity : std::max(f, o.fidelity);
        }
        return f;
    }
};

inline ProtocolReport run_setup(const Setup& setup, const ProtocolParams& p, const EngineConfig& engine = {}) {
    ProtocolReport r;
    r.variant = variant_name(p.variant);
    r.params = p;
    HybridState input = prepare_input(setup, p, engine);
    r.input_norm = input.squared_norm();
    HybridState final_state = apply_circuit(input, setup.circuit, engine);
    auto table = enumerate_outcomes(final_state, setup.detectors, p.semantics);
    r.discarded = table.discarded;
    for (auto& rec : table.records) {
        ReportedOutcome o;
        if (auto h = setup.herald(rec.pattern.fired)) {
            o.heralded = true;
            o.target = h->target;
            o.fidelity = ensemble_fidelity(rec.branches, h->target_state, h->atoms);
            r.total_success_probability += rec.probability;
            r.per_target_yield[h->target] += rec.probability;
        } else {
            r.not_heralded += rec.probability;
        }
        o.record = std::move(rec);
        r.outcomes.push_back(std::move(o));
    }
    for (const auto& w : setup.wiring) r.notes.push_back("wiring: " + w);
    return r;
}

namespace detail {

inline int port_photons(const Occupation& occ, const std::string& port) {
    int n = 0;
    for (const auto& [m, c] : occ) {
        if (m.port == port) n += c;
    }
    return n;
}

inline HybridState photon_branch(const CouplingParams& c, const std::string& atom, const std::string& port) {
    CouplingParams full = c;
    full.theta = std::numbers::pi / 2;
    return emit(EmissionConfig{full, false, atom, port});
}

// Keeps the terms whose photons at each listed port match the given count.
inline HybridState keep_port_counts(const HybridState& s, const std::vector<std::pair<std::string, int>>& counts) {
    return s.filtered([&](const BasisTerm& t) {
        for (const auto& [port, n] : counts) {
            if (port_photons(t.occupation, port) != n) return false;
        }
        return true;
    });
}

inline bool close(double a, double b, double tol = 1e-10) { return std::abs(a - b) <= tol; }

inline std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

}  // namespace detail

inline ProtocolReport run_ghz(ProtocolParams p, const EngineConfig& engine = {}) {
    p.variant = Variant::ghz;
    auto r = run_setup(ghz_setup(), p, engine);
    // Staged antibunching probabilities, conditioned on all photons emitted.
    const auto& c = p.coupling;
    HybridState bc = tensor(detail::photon_branch(c, "2", "B"), detail::photon_branch(c, "3", "C"), false, engine);
    bc = lift_apply(bc, pbs("B", "C", "c", "d"), engine);
    HybridState anti = detail::keep_port_counts(bc, {{"c", 1}, {"d", 1}});
    double p2 = anti.squared_norm();
    HybridState abc = tensor(detail::photon_branch(c, "1", "A"), normalize(anti, engine).first, false, engine);
    abc = lift_apply(abc, pbs("d", "A", "a", "b"), engine);
    double p3 = detail::keep_port_counts(abc, {{"a", 1}, {"b", 1}, {"c", 1}}).squared_norm();
    r.quantities["p_antibunch_pbs1"] = p2;
    r.quantities["p_antibunch_pbs2"] = p3;
    return r;
}

// Three-click probability of a normalized three-photon W-stage input.
inline double w_stage_herald_probability(const HybridState& bunched, const std::string& in_port, double t,
                                         DetectorSemantics sem, const EngineConfig& engine = {}) {
    HybridState out = apply_circuit(bunched, detail::w_detection_stage(in_port, "", t), engine);
    auto rule = detail::w_herald({{"", {0, 1, 2}, ""}});
    double p = 0;
    for (const auto& rec : enumerate_outcomes(out, detail::w_detectors(""), sem).records) {
        if (rule(rec.pattern.fired)) p += rec.probability;
    }
    return p;
}

inline ProtocolReport run_w_direct(ProtocolParams p, const EngineConfig& engine = {}) {
    p.variant = Variant::w_direct;
    Setup setup = w_direct_setup(p.bs_transmittance);
    auto r = run_setup(setup, p, engine);
    HybridState input = prepare_input(setup, p, engine);
    double three = input.filtered([](const BasisTerm& t) { return total_photons(t.occupation) == 3; }).squared_norm();
    r.quantities["p_prime"] = three > 0 ? r.total_success_probability / three : 0.0;
    const auto& c = p.coupling;
    double l2 = c.lambda_l * c.lambda_l, r2 = c.lambda_r * c.lambda_r, w4 = (l2 + r2) * (l2 + r2);
    r.quantities["closed_form_2ll_rr_over_omega4"] = 2 * l2 * r2 / w4;
    return r;
}

// Staged view of the w_bunching network, conditioned on every atom emitting:
// p_t  - both photons of atoms 1,2 leave BS1' through t'
// p_s  - given that, all three photons leave the second BS through OUT
// p_s_f2 - same for the F2 output
// p_prime - W herald probability of the normalized OUT-bunched state
struct BunchingStages {
    double p_t = 0, p_s_port = 0, p_s_out = 0, p_s_f2 = 0, p_prime = 0;
    HybridState bunched_out;
};

inline BunchingStages w_bunching_stages(const ProtocolParams& p, const EngineConfig& engine = {}) {
    const auto& c = p.coupling;
    const double t = p.bs_transmittance;
    BunchingStages st;
    HybridState ab = tensor(detail::photon_branch(c, "1", "A"), detail::photon_branch(c, "2", "B"), false, engine);
    ab = lift_apply(ab, bs("A", "B", "t'", "s'", t), engine);
    HybridState in_t = detail::keep_port_counts(ab, {{"t'", 2}});
    st.p_t = in_t.squared_norm();
    st.p_s_port = detail::keep_port_counts(ab, {{"s'", 2}}).squared_norm();
    HybridState abc = tensor(normalize(in_t, engine).first, detail::photon_branch(c, "3", "C"), false, engine);
    abc = lift_apply(abc, bs("t'", "C", "OUT", "F2", t), engine);
    HybridState out = detail::keep_port_counts(abc, {{"OUT", 3}});
    st.p_s_out = out.squared_norm();
    st.p_s_f2 = detail::keep_port_counts(abc, {{"F2", 3}}).squared_norm();
    st.bunched_out = normalize(out, engine).first;
    st.p_prime = w_stage_herald_probability(st.bunched_out, "OUT", t, p.semantics, engine);
    return st;
}

inline ProtocolReport run_w_bunching(ProtocolParams p, const EngineConfig& engine = {}) {
    if (!p.is_w_bunching()) p.variant = Variant::w_bunching;
    auto r = run_setup(w_bunching_setup(p.bs_transmittance, p.f2(), p.f1_aux()), p, engine);
    auto st = w_bunching_stages(p, engine);
    r.quantities["p_t"] = st.p_t;
    r.quantities["p_s_prime_arm"] = st.p_s_port;
    r.quantities["p_s"] = st.p_s_out;
    r.quantities["p_s_f2"] = st.p_s_f2;
    r.quantities["p_prime"] = st.p_prime;
    r.quantities["stage_product"] = st.p_t * st.p_s_out * st.p_prime;

    const auto& c = p.coupling;
    double l2 = c.lambda_l * c.lambda_l, r2 = c.lambda_r * c.lambda_r, w4 = (l2 + r2) * (l2 + r2);
    double x = l2 * r2;
    double pt_closed = w4 / (2 * w4 + 4 * x);
    double ps_a = w4 / (2 * w4 + 8 * x);
    double ps_b = w4 / (4 * w4 + 8 * x);
    r.quantities["closed_form_pt"] = pt_closed;
    r.quantities["closed_form_ps_a"] = ps_a;
    r.quantities["closed_form_ps_b"] = ps_b;
    auto verdict = [&](double v) { return detail::close(st.p_s_out, v) ? "matches" : "does not match"; };
    r.notes.push_back("p_s computed " + detail::fmt(st.p_s_out) + "; Omega^4/(2 Omega^4 + 8 l^2 r^2) = " +
                      detail::fmt(ps_a) + " (" + verdict(ps_a) + "); Omega^4/(4 Omega^4 + 8 l^2 r^2) = " +
                      detail::fmt(ps_b) + " (" + verdict(ps_b) + ")");
    r.notes.push_back("p_t computed " + detail::fmt(st.p_t) + "; Omega^4/(2 Omega^4 + 4 l^2 r^2) = " +
                      detail::fmt(pt_closed) + " (" + (detail::close(st.p_t, pt_closed) ? "matches" : "does not match") +
                      ")");
    return r;
}

inline ProtocolReport run_protocol(const ProtocolParams& p, const EngineConfig& engine = {}) {
    switch (p.variant) {
        case Variant::ghz: return run_ghz(p, engine);
        case Variant::w_direct: return run_w_direct(p, engine);
        default: return run_w_bunching(p, engine);
    }
}

// ---------------------------------------------------------------- sweeps

struct SweepRow {
    double parameter = 0;
    double total_probability = 0;
    double min_fidelity = 0;
    double max_fidelity = 0;
};

// lambda_l = ratio * lambda_r, with lambda_r taken from `base`.
inline std::vector<SweepRow> sweep_coupling_ratio(const ProtocolParams& base, const std::vector<double>& ratios,
                                                  unsigned threads = worker_count()) {
    for (double r : ratios) {
        if (!(r > 0)) throw StateError("sweep_coupling_ratio: ratios must be positive");
    }
    std::vector<SweepRow> rows(ratios.size());
    parallel_for(ratios.size(), threads, [&](std::size_t i) {
        ProtocolParams p = base;
        p.coupling.lambda_l = ratios[i] * base.coupling.lambda_r;
        auto rep = run_protocol(p);
        rows[i] = {ratios[i], rep.total_success_probability, rep.min_fidelity(), rep.max_fidelity()};
    });
    return rows;
}

inline std::vector<SweepRow> sweep_bs_imbalance(const ProtocolParams& base, const std::vector<double>& transmittances,
                                                unsigned threads = worker_count()) {
    for (double t : transmittances) {
        if (!(t >= 0 && t <= 1)) throw StateError("sweep_bs_imbalance: transmittance outside [0,1]");
    }
    std::vector<SweepRow> rows(transmittances.size());
    parallel_for(transmittances.size(), threads, [&](std::size_t i) {
        ProtocolParams p = base;
        p.bs_transmittance = transmittances[i];
        auto rep = run_protocol(p);
        rows[i] = {transmittances[i], rep.total_success_probability, rep.min_fidelity(), rep.max_fidelity()};
    });
    return rows;
}

}  // namespace photonloom
