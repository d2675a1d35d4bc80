// oracle.hpp
// Dense brute-force reference for the sparse engine.
//
// Nothing here calls lift_apply, tensor, bunch_merge or emit. Linear-optical
// elements are lifted through permanents:
//   <m|U|n> = perm(M[rows of m, cols of n]) / sqrt(prod m! prod n!)
// where M is the single-photon map on the basis modes (identity on modes the
// transform does not consume). Inputs are built by enumerating every atomic
// emission choice directly.
//
// Canonical order of DenseBasis:
//   index = atom_index * photon_dim + photon_index
//   atom_index:   base-3 number over the atoms, first atom most significant,
//                 digit order l < r < e
//   photon_index: by total photon number, then lexicographic in the count
//                 vector (modes sorted), larger counts on earlier modes first

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "photonloom/detection.hpp"
#include "photonloom/fock.hpp"
#include "photonloom/protocols.hpp"

namespace photonloom {

inline constexpr std::size_t dense_basis_cap = 2'000'000;

class PhotonBasis {
public:
    PhotonBasis(std::vector<ModeId> modes, int max_photons, int min_photons = 0) : modes_(std::move(modes)) {
        std::sort(modes_.begin(), modes_.end());
        modes_.erase(std::unique(modes_.begin(), modes_.end()), modes_.end());
        if (min_photons < 0 || max_photons < min_photons) throw StateError("PhotonBasis: bad photon range");
        for (int n = min_photons; n <= max_photons; ++n) {
            std::vector<int> v(modes_.size(), 0);
            fill(v, 0, n);
        }
        for (std::size_t i = 0; i < states_.size(); ++i) index_[states_[i]] = i;
    }

    const std::vector<ModeId>& modes() const { return modes_; }
    std::size_t size() const { return states_.size(); }
    const std::vector<int>& counts(std::size_t i) const { return states_[i]; }

    std::optional<std::size_t> index_of(const std::vector<int>& counts) const {
        auto it = index_.find(counts);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    std::optional<std::size_t> mode_index(const ModeId& m) const {
        auto it = std::lower_bound(modes_.begin(), modes_.end(), m);
        if (it == modes_.end() || *it != m) return std::nullopt;
        return std::size_t(it - modes_.begin());
    }

    // Counts vector of an occupation; nullopt if it uses a mode outside the basis.
    std::optional<std::vector<int>> encode(const Occupation& occ) const {
        std::vector<int> v(modes_.size(), 0);
        for (const auto& [m, c] : occ) {
            auto k = mode_index(m);
            if (!k) return std::nullopt;
            v[*k] = c;
        }
        return v;
    }

    Occupation decode(const std::vector<int>& v) const {
        Occupation occ;
        for (std::size_t k = 0; k < v.size(); ++k) {
            if (v[k] > 0) occ.emplace_back(modes_[k], v[k]);
        }
        return occ;
    }

private:
    void fill(std::vector<int>& v, std::size_t pos, int left) {
        if (states_.size() > dense_basis_cap) throw StateError("PhotonBasis: exceeds dense cap");
        if (pos + 1 >= v.size()) {
            if (v.empty()) {
                if (left == 0) states_.push_back(v);
                return;
            }
            v[pos] = left;
            states_.push_back(v);
            v[pos] = 0;
            return;
        }
        for (int c = left; c >= 0; --c) {
            v[pos] = c;
            fill(v, pos + 1, left - c);
        }
        v[pos] = 0;
    }

    std::vector<ModeId> modes_;
    std::vector<std::vector<int>> states_;
    std::map<std::vector<int>, std::size_t> index_;
};

class DenseBasis {
public:
    DenseBasis(std::size_t atom_count, PhotonBasis photons) : atoms_(atom_count), photons_(std::move(photons)) {
        atom_dim_ = 1;
        for (std::size_t i = 0; i < atoms_; ++i) atom_dim_ *= 3;
        if (atom_dim_ * photons_.size() > dense_basis_cap) {
            throw StateError("DenseBasis: dimension " + std::to_string(atom_dim_ * photons_.size()) +
                             " exceeds cap");
        }
    }

    std::size_t atom_count() const { return atoms_; }
    std::size_t atom_dim() const { return atom_dim_; }
    const PhotonBasis& photons() const { return photons_; }
    std::size_t size() const { return atom_dim_ * photons_.size(); }

    std::size_t atom_index(const std::vector<AtomLevel>& a) const {
        std::size_t k = 0;
        for (auto l : a) k = k * 3 + static_cast<std::size_t>(l);
        return k;
    }

    std::vector<AtomLevel> atoms_at(std::size_t k) const {
        std::vector<AtomLevel> a(atoms_);
        for (std::size_t i = atoms_; i-- > 0;) {
            a[i] = static_cast<AtomLevel>(k % 3);
            k /= 3;
        }
        return a;
    }

private:
    std::size_t atoms_;
    std::size_t atom_dim_;
    PhotonBasis photons_;
};

inline Eigen::VectorXcd to_dense(const HybridState& s, const DenseBasis& basis) {
    if (s.atom_count() != basis.atom_count()) throw StateError("to_dense: atom count mismatch");
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(basis.size());
    const auto& pb = basis.photons();
    for (const auto& [t, a] : s.terms()) {
        auto counts = pb.encode(t.occupation);
        auto pi = counts ? pb.index_of(*counts) : std::nullopt;
        if (!pi) throw StateError("to_dense: term outside basis (" + occupation_str(t.occupation) + ")");
        v(basis.atom_index(t.atoms) * pb.size() + *pi) += a;
    }
    return v;
}

inline HybridState from_dense(const Eigen::VectorXcd& v, const DenseBasis& basis, double epsilon = 0.0) {
    if (static_cast<std::size_t>(v.size()) != basis.size()) throw StateError("from_dense: size mismatch");
    HybridState s(basis.atom_count());
    const auto& pb = basis.photons();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (v(i) == complex{} || std::abs(v(i)) < epsilon) continue;
        std::size_t ai = std::size_t(i) / pb.size(), pi = std::size_t(i) % pb.size();
        s.add(BasisTerm{basis.atoms_at(ai), pb.decode(pb.counts(pi))}, v(i));
    }
    return s;
}

// Permanent by Ryser's formula.
inline complex permanent(const Eigen::MatrixXcd& a) {
    const auto n = a.rows();
    if (n != a.cols()) throw StateError("permanent: matrix not square");
    if (n == 0) return 1.0;
    complex total{};
    for (unsigned long long subset = 1; subset < (1ULL << n); ++subset) {
        complex prod = 1.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            complex row{};
            for (Eigen::Index j = 0; j < n; ++j) {
                if (subset >> j & 1ULL) row += a(i, j);
            }
            prod *= row;
        }
        int bits = std::popcount(subset);
        total += ((n - bits) % 2 == 0 ? 1.0 : -1.0) * prod;
    }
    return total;
}

// Single-photon map of t on the basis modes; modes t does not consume map to themselves.
inline Eigen::MatrixXcd single_photon_map(const ModeTransform& t, const PhotonBasis& pb) {
    const auto n = static_cast<Eigen::Index>(pb.modes().size());
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(n, n);
    for (std::size_t i = 0; i < t.inputs.size(); ++i) {
        auto col = pb.mode_index(t.inputs[i]);
        if (!col) throw StateError("dense_lift: input mode " + t.inputs[i].str() + " outside basis");
        m.col(*col).setZero();
        for (std::size_t o = 0; o < t.outputs.size(); ++o) {
            auto row = pb.mode_index(t.outputs[o]);
            if (!row) throw StateError("dense_lift: output mode " + t.outputs[o].str() + " outside basis");
            m(*row, *col) += t.matrix(o, i);
        }
    }
    return m;
}

// Lifted operator on the photon basis; block diagonal in photon number.
inline Eigen::MatrixXcd dense_lift(const ModeTransform& t, const PhotonBasis& pb) {
    if (pb.size() * pb.size() > 64 * dense_basis_cap) throw StateError("dense_lift: matrix exceeds cap");
    Eigen::MatrixXcd m = single_photon_map(t, pb);
    const std::size_t dim = pb.size();
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(dim, dim);
    auto expand = [](const std::vector<int>& c) {
        std::vector<Eigen::Index> idx;
        for (std::size_t k = 0; k < c.size(); ++k) {
            for (int j = 0; j < c[k]; ++j) idx.push_back(Eigen::Index(k));
        }
        return idx;
    };
    auto fact = [](const std::vector<int>& c) {
        double f = 1;
        for (int n : c) {
            for (int j = 2; j <= n; ++j) f *= j;
        }
        return f;
    };
    std::vector<std::vector<Eigen::Index>> expanded(dim);
    std::vector<double> facts(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        expanded[i] = expand(pb.counts(i));
        facts[i] = fact(pb.counts(i));
    }
    for (std::size_t col = 0; col < dim; ++col) {
        const auto& in = expanded[col];
        for (std::size_t row = 0; row < dim; ++row) {
            const auto& out = expanded[row];
            if (out.size() != in.size()) continue;
            Eigen::MatrixXcd sub(out.size(), in.size());
            for (std::size_t i = 0; i < out.size(); ++i) {
                for (std::size_t j = 0; j < in.size(); ++j) sub(i, j) = m(out[i], in[j]);
            }
            u(row, col) = permanent(sub) / std::sqrt(facts[col] * facts[row]);
        }
    }
    return u;
}

inline Eigen::MatrixXcd dense_lift(const ModeTransform& t, const DenseBasis& basis) {
    return dense_lift(t, basis.photons());
}

// Applies a photon-space operator to every atomic block of a dense vector.
inline Eigen::VectorXcd apply_photon_operator(const Eigen::MatrixXcd& op, const Eigen::VectorXcd& v,
                                              const DenseBasis& basis) {
    const auto pd = static_cast<Eigen::Index>(basis.photons().size());
    Eigen::VectorXcd out(v.size());
    for (std::size_t a = 0; a < basis.atom_dim(); ++a) {
        out.segment(Eigen::Index(a) * pd, pd) = op * v.segment(Eigen::Index(a) * pd, pd);
    }
    return out;
}

// Applies t to a sparse state by dense multiplication over the modes t
// touches, with every other mode held as a spectator.
inline HybridState oracle_apply(const HybridState& s, const ModeTransform& t, int max_photons = 4) {
    std::vector<ModeId> local = t.inputs;
    local.insert(local.end(), t.outputs.begin(), t.outputs.end());
    PhotonBasis pb(local, max_photons);
    Eigen::MatrixXcd u = dense_lift(t, pb);
    std::set<ModeId> local_set(pb.modes().begin(), pb.modes().end());

    // (atoms, spectator occupation) -> local dense vector
    std::map<std::pair<std::vector<AtomLevel>, Occupation>, Eigen::VectorXcd> groups;
    for (const auto& [term, a] : s.terms()) {
        Occupation spectator, mine;
        for (const auto& e : term.occupation) (local_set.count(e.first) ? mine : spectator).push_back(e);
        if (total_photons(term.occupation) > max_photons) throw StateError("oracle_apply: truncation exceeded");
        auto key = std::make_pair(term.atoms, spectator);
        auto [it, inserted] = groups.try_emplace(key, Eigen::VectorXcd::Zero(pb.size()));
        it->second(*pb.index_of(*pb.encode(mine))) += a;
    }
    HybridState out(s.atom_count());
    for (const auto& [key, v] : groups) {
        Eigen::VectorXcd w = Eigen::VectorXcd::Zero(v.size());
        for (Eigen::Index j = 0; j < v.size(); ++j) {
            if (v(j) != complex{}) w += v(j) * u.col(j);
        }
        for (Eigen::Index i = 0; i < w.size(); ++i) {
            if (w(i) == complex{}) continue;
            Occupation occ = key.second;
            for (const auto& e : pb.decode(pb.counts(std::size_t(i)))) occ.push_back(e);
            std::sort(occ.begin(), occ.end());
            out.add(BasisTerm{key.first, std::move(occ)}, w(i));
        }
    }
    return out;
}

inline HybridState oracle_circuit(HybridState s, const std::vector<ModeTransform>& circuit, int max_photons = 4) {
    for (const auto& t : circuit) s = oracle_apply(s, t, max_photons);
    return s;
}

// Emission input by direct enumeration of every atom's branch: l with a V
// photon, r with an H photon, or (vacuum term kept) e with no photon.
// Photons of all atoms land on their own port, or all on shared_port.
inline HybridState oracle_input(const CouplingParams& c, bool keep_vacuum, const std::vector<std::string>& ports,
                                const std::optional<std::string>& shared_port = {}) {
    const double w = c.omega(), s = std::sin(c.theta);
    struct Choice {
        AtomLevel level;
        std::optional<Polarization> pol;
        double amp;
    };
    std::vector<Choice> choices = {{AtomLevel::ground_l, Polarization::V, s * c.lambda_l / w},
                                   {AtomLevel::ground_r, Polarization::H, s * c.lambda_r / w}};
    if (keep_vacuum) choices.push_back({AtomLevel::excited, std::nullopt, std::cos(c.theta)});
    HybridState out(ports.size());
    std::vector<std::size_t> pick(ports.size(), 0);
    while (true) {
        std::vector<AtomLevel> atoms;
        std::map<ModeId, int> counts;
        double amp = 1;
        for (std::size_t i = 0; i < ports.size(); ++i) {
            const auto& ch = choices[pick[i]];
            atoms.push_back(ch.level);
            amp *= ch.amp;
            if (ch.pol) ++counts[mode(shared_port.value_or(ports[i]), *ch.pol)];
        }
        if (amp != 0) out.add(BasisTerm{atoms, Occupation(counts.begin(), counts.end())}, amp);
        std::size_t k = 0;
        while (k < pick.size() && ++pick[k] == choices.size()) pick[k++] = 0;
        if (k == pick.size()) break;
    }
    return out;
}

// Click evaluation, written independently of detection.hpp.
struct DenseOutcomes {
    std::map<std::vector<bool>, double> probability;
    double discarded = 0;
};

inline DenseOutcomes oracle_outcomes(const HybridState& s, const DetectorSet& detectors, DetectorSemantics sem) {
    DenseOutcomes out;
    for (const auto& [t, a] : s.terms()) {
        std::vector<int> counts(detectors.size(), 0);
        for (std::size_t d = 0; d < detectors.size(); ++d) {
            for (const auto& m : detectors[d].modes) counts[d] += count_in(t.occupation, m);
        }
        bool bad = false;
        std::vector<bool> fired(detectors.size());
        for (std::size_t d = 0; d < counts.size(); ++d) {
            if (sem == DetectorSemantics::exactly_one && counts[d] > 1) bad = true;
            fired[d] = counts[d] > 0;
        }
        if (bad) {
            out.discarded += std::norm(a);
        } else {
            out.probability[fired] += std::norm(a);
        }
    }
    return out;
}

struct OracleReport {
    std::string variant;
    double max_amplitude_deviation = 0;
    double max_probability_deviation = 0;
    double max_fidelity_deviation = 0;
    double sparse_total = 0;
    double dense_total = 0;
    std::size_t terms_compared = 0;
    std::size_t patterns_compared = 0;
    // Staged bunching quantities (w_bunching family only).
    std::optional<double> dense_p_t, dense_p_s, dense_p_prime, dense_product;
    double ps_expr_a = 0, ps_expr_b = 0;  // Omega^4/(2 Omega^4 + 8x), Omega^4/(4 Omega^4 + 8x), x = l^2 r^2
    std::vector<std::string> notes;
    bool passed = false;
};

namespace detail {

inline double max_amplitude_gap(const HybridState& a, const HybridState& b, std::size_t& compared) {
    std::set<BasisTerm> keys;
    for (const auto& [t, v] : a.terms()) keys.insert(t);
    for (const auto& [t, v] : b.terms()) keys.insert(t);
    compared = keys.size();
    double gap = 0;
    for (const auto& k : keys) gap = std::max(gap, std::abs(a.amplitude(k) - b.amplitude(k)));
    return gap;
}

inline double port_mass(const HybridState& s, const std::string& port, int n) {
    double p = 0;
    for (const auto& [t, a] : s.terms()) {
        int c = 0;
        for (const auto& [m, k] : t.occupation) c += m.port == port ? k : 0;
        if (c == n) p += std::norm(a);
    }
    return p;
}

inline HybridState keep_port(const HybridState& s, const std::string& port, int n) {
    return s.filtered([&](const BasisTerm& t) {
        int c = 0;
        for (const auto& [m, k] : t.occupation) c += m.port == port ? k : 0;
        return c == n;
    });
}

inline HybridState unit(const HybridState& s) { return s.scaled(1.0 / std::sqrt(s.squared_norm())); }

}  // namespace detail

// Recomputes a protocol densely and compares it with the sparse engine.
inline OracleReport verify_protocol(const ProtocolParams& p, double tol = 1e-10, const EngineConfig& engine = {}) {
    OracleReport rep;
    rep.variant = variant_name(p.variant);
    Setup setup = build_setup(p);

    std::vector<std::string> ports;
    for (const auto& e : setup.emitters) ports.push_back(e.port);
    HybridState dense_in = oracle_input(p.coupling, p.keep_vacuum_term, ports, setup.shared_port);
    HybridState dense_out = oracle_circuit(dense_in, setup.circuit, engine.max_photons);

    HybridState sparse_in = prepare_input(setup, p, engine);
    HybridState sparse_out = apply_circuit(sparse_in, setup.circuit, engine);
    std::size_t n_in = 0;
    rep.max_amplitude_deviation = std::max(detail::max_amplitude_gap(sparse_in, dense_in, n_in),
                                           detail::max_amplitude_gap(sparse_out, dense_out, rep.terms_compared));

    auto dense = oracle_outcomes(dense_out, setup.detectors, p.semantics);
    auto sparse = enumerate_outcomes(sparse_out, setup.detectors, p.semantics);
    rep.max_probability_deviation = std::abs(dense.discarded - sparse.discarded);
    std::set<std::vector<bool>> seen;
    for (const auto& rec : sparse.records) {
        std::vector<bool> fired;
        for (const auto& d : setup.detectors) {
            fired.push_back(std::find(rec.pattern.fired.begin(), rec.pattern.fired.end(), d.name) !=
                            rec.pattern.fired.end());
        }
        seen.insert(fired);
        auto it = dense.probability.find(fired);
        double dp = it == dense.probability.end() ? 0.0 : it->second;
        rep.max_probability_deviation = std::max(rep.max_probability_deviation, std::abs(dp - rec.probability));
        ++rep.patterns_compared;
        if (auto h = setup.herald(rec.pattern.fired)) {
            rep.sparse_total += rec.probability;
            rep.dense_total += dp;
            // Dense conditional state: terms that realize this pattern.
            HybridState kept = dense_out.filtered([&](const BasisTerm& t) {
                for (std::size_t d = 0; d < setup.detectors.size(); ++d) {
                    int c = 0;
                    for (const auto& m : setup.detectors[d].modes) c += count_in(t.occupation, m);
                    if ((c > 0) != fired[d]) return false;
                    if (p.semantics == DetectorSemantics::exactly_one && c > 1) return false;
                }
                return true;
            });
            if (dp > 0) {
                double w = 0, f = 0;
                for (const auto& b : detail::branches_of(kept)) {
                    w += b.weight;
                    f += b.weight * subset_fidelity(h->target_state, b.atoms, h->atoms);
                }
                double dense_f = f / w;
                double sparse_f = ensemble_fidelity(rec.branches, h->target_state, h->atoms);
                rep.max_fidelity_deviation = std::max(rep.max_fidelity_deviation, std::abs(dense_f - sparse_f));
            }
        }
    }
    for (const auto& [fired, dp] : dense.probability) {
        if (!seen.count(fired)) rep.max_probability_deviation = std::max(rep.max_probability_deviation, dp);
    }

    if (p.is_w_bunching()) {
        const auto& c = p.coupling;
        CouplingParams full = c;
        full.theta = std::numbers::pi / 2;
        const double t = p.bs_transmittance;
        HybridState ab = oracle_circuit(oracle_input(full, false, {"A", "B"}), {bs("A", "B", "t'", "s'", t)});
        double pt = detail::port_mass(ab, "t'", 2);
        HybridState in_t = detail::unit(detail::keep_port(ab, "t'", 2));
        HybridState three(3);
        HybridState third = oracle_input(full, false, {"C"});
        for (const auto& [u, a] : in_t.terms()) {
            for (const auto& [v, b] : third.terms()) {
                auto atoms = u.atoms;
                atoms.push_back(v.atoms.front());
                Occupation occ = u.occupation;
                occ.insert(occ.end(), v.occupation.begin(), v.occupation.end());
                std::sort(occ.begin(), occ.end());
                three.add(BasisTerm{atoms, occ}, a * b);
            }
        }
        HybridState abc = oracle_circuit(three, {bs("t'", "C", "OUT", "F2", t)});
        double ps = detail::port_mass(abc, "OUT", 3);
        HybridState stage = oracle_circuit(detail::unit(detail::keep_port(abc, "OUT", 3)),
                                           detail::w_detection_stage("OUT", "", t));
        auto rule = detail::w_herald({{"", {0, 1, 2}, ""}});
        auto dets = detail::w_detectors("");
        double pprime = 0;
        for (const auto& [fired, prob] : oracle_outcomes(stage, dets, p.semantics).probability) {
            std::vector<std::string> names;
            for (std::size_t d = 0; d < dets.size(); ++d) {
                if (fired[d]) names.push_back(dets[d].name);
            }
            if (rule(names)) pprime += prob;
        }
        double l2 = c.lambda_l * c.lambda_l, r2 = c.lambda_r * c.lambda_r, w4 = (l2 + r2) * (l2 + r2);
        rep.ps_expr_a = w4 / (2 * w4 + 8 * l2 * r2);
        rep.ps_expr_b = w4 / (4 * w4 + 8 * l2 * r2);
        rep.dense_p_t = pt;
        rep.dense_p_s = ps;
        rep.dense_p_prime = pprime;
        rep.dense_product = pt * ps * pprime;
        auto verdict = [&](double v) { return std::abs(ps - v) <= tol ? "matches" : "does not match"; };
        rep.notes.push_back("p_s = " + detail::fmt(ps) + "; Omega^4/(2 Omega^4 + 8 l^2 r^2) = " +
                            detail::fmt(rep.ps_expr_a) + " (" + verdict(rep.ps_expr_a) +
                            "); Omega^4/(4 Omega^4 + 8 l^2 r^2) = " + detail::fmt(rep.ps_expr_b) + " (" +
                            verdict(rep.ps_expr_b) + ")");
        rep.notes.push_back("p_t = " + detail::fmt(pt) + ", p_prime = " + detail::fmt(pprime) +
                            ", product = " + detail::fmt(*rep.dense_product));
    }
    rep.passed = rep.max_amplitude_deviation <= tol && rep.max_probability_deviation <= tol &&
                 rep.max_fidelity_deviation <= tol && std::abs(rep.sparse_total - rep.dense_total) <= tol;
    return rep;
}

}  // namespace photonloom
