// elements.hpp
// Linear-optical elements as linear maps on creation operators, and their
// second-quantized action on HybridState.

#pragma once

#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "photonloom/fock.hpp"

namespace photonloom {

// a^dag_in -> sum_out matrix(out, in) a^dag_out. Modes not listed in
// `inputs` pass through untouched.
struct ModeTransform {
    std::string name;
    std::vector<ModeId> inputs;
    std::vector<ModeId> outputs;
    Eigen::MatrixXcd matrix;  // outputs x inputs
    bool lossy = false;

    double isometry_error() const {
        Eigen::MatrixXcd g = matrix.adjoint() * matrix;
        return (g - Eigen::MatrixXcd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
    }

    void validate(double tol = 1e-12) const {
        if (matrix.rows() != static_cast<Eigen::Index>(outputs.size()) ||
            matrix.cols() != static_cast<Eigen::Index>(inputs.size())) {
            throw StateError(name + ": matrix shape does not match mode lists");
        }
        if (std::set<ModeId>(inputs.begin(), inputs.end()).size() != inputs.size()) {
            throw StateError(name + ": duplicate input modes");
        }
        if (std::set<ModeId>(outputs.begin(), outputs.end()).size() != outputs.size()) {
            throw StateError(name + ": duplicate output modes");
        }
        if (!lossy && !inputs.empty() && isometry_error() > tol) {
            throw StateError(name + ": matrix is not an isometry (error " + std::to_string(isometry_error()) + ")");
        }
    }
};

// Rewrites every creation operator on an input mode as the matching column
// of the transform and re-expands into normalized Fock kets.
inline HybridState lift_apply(const HybridState& s, const ModeTransform& t, const EngineConfig& cfg = {}) {
    t.validate();
    std::map<ModeId, Eigen::Index> in_index;
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(t.inputs.size()); ++i) in_index[t.inputs[i]] = i;

    HybridState out(s.atom_count());
    for (const auto& [term, amp] : s.terms()) {
        if (total_photons(term.occupation) > cfg.max_photons) {
            throw StateError(t.name + ": photon truncation exceeded");
        }
        // Polynomial in output creation operators: exponent vector -> coefficient.
        // Coefficients multiply unnormalized monomials prod (a^dag)^k |0>.
        std::map<Occupation, complex> poly;
        Occupation passthrough;
        double inv_norm = 1.0;
        std::vector<std::pair<Eigen::Index, int>> consumed;
        for (const auto& [m, n] : term.occupation) {
            for (int k = 2; k <= n; ++k) inv_norm /= std::sqrt(double(k));
            auto it = in_index.find(m);
            if (it == in_index.end()) {
                passthrough.emplace_back(m, n);
            } else {
                consumed.emplace_back(it->second, n);
            }
        }
        poly[passthrough] = amp * inv_norm;
        for (const auto& [col, n] : consumed) {
            for (int rep = 0; rep < n; ++rep) {
                std::map<Occupation, complex> next;
                for (const auto& [mono, c] : poly) {
                    for (Eigen::Index row = 0; row < t.matrix.rows(); ++row) {
                        complex u = t.matrix(row, col);
                        if (u == complex{}) continue;
                        next[with_added(mono, t.outputs[row], 1)] += c * u;
                    }
                }
                poly = std::move(next);
            }
        }
        for (const auto& [mono, c] : poly) {
            double fact = 1.0;
            for (const auto& [m, k] : mono) {
                for (int j = 2; j <= k; ++j) fact *= double(j);
            }
            out.add(BasisTerm{term.atoms, mono}, c * std::sqrt(fact));
        }
    }
    return out.pruned(cfg.amplitude_epsilon);
}

inline HybridState apply_circuit(HybridState s, const std::vector<ModeTransform>& circuit,
                                 const EngineConfig& cfg = {}) {
    for (const auto& t : circuit) s = lift_apply(s, t, cfg);
    return s;
}

inline ModeTransform identity_transform(const std::vector<ModeId>& modes) {
    ModeTransform t;
    t.name = "identity";
    t.inputs = modes;
    t.outputs = modes;
    t.matrix = Eigen::MatrixXcd::Identity(modes.size(), modes.size());
    return t;
}

namespace detail {

inline void require_distinct(const std::string& what, const std::vector<std::string>& ports) {
    if (std::set<std::string>(ports.begin(), ports.end()).size() != ports.size()) {
        throw StateError(what + ": duplicate ports");
    }
}

}  // namespace detail

// Polarizing beam splitter: transmits H, reflects V.
//   in1.H -> out_t.H   in1.V -> out_r.V
//   in2.H -> out_r.H   in2.V -> out_t.V
inline ModeTransform pbs(const std::string& in1, const std::string& in2, const std::string& out_t,
                         const std::string& out_r) {
    detail::require_distinct("pbs", {in1, in2, out_t, out_r});
    using P = Polarization;
    ModeTransform t;
    t.name = "pbs(" + in1 + "," + in2 + "->" + out_t + "," + out_r + ")";
    t.inputs = {mode(in1, P::H), mode(in1, P::V), mode(in2, P::H), mode(in2, P::V)};
    t.outputs = {mode(out_t, P::H), mode(out_r, P::V), mode(out_r, P::H), mode(out_t, P::V)};
    t.matrix = Eigen::MatrixXcd::Identity(4, 4);
    return t;
}

// Single-input PBS: in.H -> out_t.H, in.V -> out_r.V.
inline ModeTransform pbs_split(const std::string& in, const std::string& out_t, const std::string& out_r) {
    detail::require_distinct("pbs_split", {in, out_t, out_r});
    using P = Polarization;
    ModeTransform t;
    t.name = "pbs(" + in + "->" + out_t + "," + out_r + ")";
    t.inputs = {mode(in, P::H), mode(in, P::V)};
    t.outputs = {mode(out_t, P::H), mode(out_r, P::V)};
    t.matrix = Eigen::MatrixXcd::Identity(2, 2);
    return t;
}

// PBS in the rotated frame F/S = (V +- H)/sqrt(2). The output ports may
// reuse the input port name since F/S never coincide with V/H.
//   in.V -> (out_f.F + out_s.S)/sqrt(2)
//   in.H -> (out_f.F - out_s.S)/sqrt(2)
inline ModeTransform fs_pbs(const std::string& in, const std::string& out_f, const std::string& out_s) {
    using P = Polarization;
    ModeTransform t;
    t.name = "fs_pbs(" + in + "->" + out_f + "," + out_s + ")";
    t.inputs = {mode(in, P::V), mode(in, P::H)};
    t.outputs = {mode(out_f, P::F), mode(out_s, P::S)};
    const double h = 1.0 / std::sqrt(2.0);
    t.matrix.resize(2, 2);
    t.matrix << h, h, h, -h;
    t.validate();
    return t;
}

// Sign of the reflection phase: plus_i is the symmetric (1/sqrt2)[[1,i],[i,1]].
enum class PhaseConvention { plus_i, minus_i };

// Polarization-independent beam splitter with power transmittance t:
//   in1 -> sqrt(t) out1 + c sqrt(1-t) out2
//   in2 -> c sqrt(1-t) out1 + sqrt(t) out2,   c = +i or -i.
inline ModeTransform bs(const std::string& in1, const std::string& in2, const std::string& out1,
                        const std::string& out2, double transmittance = 0.5,
                        PhaseConvention convention = PhaseConvention::plus_i) {
    if (!(transmittance >= 0.0 && transmittance <= 1.0)) {
        throw StateError("bs: transmittance " + std::to_string(transmittance) + " outside [0,1]");
    }
    detail::require_distinct("bs", {in1, in2, out1, out2});
    const double tau = std::sqrt(transmittance), rho = std::sqrt(1.0 - transmittance);
    const complex c = convention == PhaseConvention::plus_i ? complex{0, 1} : complex{0, -1};
    ModeTransform t;
    t.name = "bs(" + in1 + "," + in2 + "->" + out1 + "," + out2 + ")";
    t.matrix = Eigen::MatrixXcd::Zero(4, 4);
    int k = 0;
    for (auto p : {Polarization::V, Polarization::H}) {
        t.inputs.push_back(mode(in1, p));
        t.inputs.push_back(mode(in2, p));
        t.outputs.push_back(mode(out1, p));
        t.outputs.push_back(mode(out2, p));
        t.matrix(k, k) = tau;
        t.matrix(k + 1, k) = c * rho;
        t.matrix(k, k + 1) = c * rho;
        t.matrix(k + 1, k + 1) = tau;
        k += 2;
    }
    return t;
}

// Quarter-wave plate mapping cavity circular polarizations onto the linear
// working basis: L -> V, R -> H.
inline ModeTransform qwp(const std::string& in, const std::string& out) {
    using P = Polarization;
    ModeTransform t;
    t.name = "qwp(" + in + "->" + out + ")";
    t.inputs = {mode(in, P::L), mode(in, P::R)};
    t.outputs = {mode(out, P::V), mode(out, P::H)};
    t.matrix = Eigen::MatrixXcd::Identity(2, 2);
    return t;
}

}  // namespace photonloom
