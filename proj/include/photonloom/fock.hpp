// fock.hpp
// Sparse hybrid atom-photon states over a truncated bosonic Fock basis.
//
// A HybridState is a superposition of basis terms. Each term pairs an ordered
// list of atomic levels (one per tracked atom) with a photonic occupation
// (mode -> photon count, zero counts never stored). Photonic kets are the
// standard normalized Fock kets |n_1, n_2, ...>.
//
// States are values. Every operation returns a new state; nothing mutates a
// state after it has been handed out.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <compare>
#include <cstdint>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace photonloom {

using complex = std::complex<double>;

class StateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct EngineConfig {
    int max_photons = 4;
    double amplitude_epsilon = 1e-14;
    double norm_epsilon = 1e-14;
};

// Declaration order fixes the canonical ordering of basis terms.
enum class AtomLevel : std::uint8_t { ground_l, ground_r, excited };

inline char level_char(AtomLevel a) {
    switch (a) {
        case AtomLevel::ground_l: return 'l';
        case AtomLevel::ground_r: return 'r';
        case AtomLevel::excited: return 'e';
    }
    return '?';
}

inline AtomLevel level_from_char(char c) {
    switch (c) {
        case 'l': return AtomLevel::ground_l;
        case 'r': return AtomLevel::ground_r;
        case 'e': return AtomLevel::excited;
        default: throw StateError(std::string("unknown atom level '") + c + "'");
    }
}

enum class Polarization : std::uint8_t { L, R, H, V, F, S };

inline char pol_char(Polarization p) {
    constexpr char names[] = {'L', 'R', 'H', 'V', 'F', 'S'};
    return names[static_cast<int>(p)];
}

inline Polarization pol_from_char(char c) {
    switch (c) {
        case 'L': return Polarization::L;
        case 'R': return Polarization::R;
        case 'H': return Polarization::H;
        case 'V': return Polarization::V;
        case 'F': return Polarization::F;
        case 'S': return Polarization::S;
        default: throw StateError(std::string("unknown polarization '") + c + "'");
    }
}

struct ModeId {
    std::string port;
    Polarization pol = Polarization::H;

    auto operator<=>(const ModeId&) const = default;
    bool operator==(const ModeId&) const = default;

    // "port.P", e.g. "a'.V"
    std::string str() const { return port + "." + pol_char(pol); }

    static ModeId parse(const std::string& text) {
        auto dot = text.rfind('.');
        if (dot == std::string::npos || dot + 2 != text.size() || dot == 0) {
            throw StateError("malformed mode id '" + text + "'");
        }
        return ModeId{text.substr(0, dot), pol_from_char(text.back())};
    }
};

inline ModeId mode(std::string port, Polarization pol) { return ModeId{std::move(port), pol}; }

// Sorted by mode, no zero counts.
using Occupation = std::vector<std::pair<ModeId, int>>;

inline int total_photons(const Occupation& occ) {
    int n = 0;
    for (const auto& [m, c] : occ) n += c;
    return n;
}

inline int count_in(const Occupation& occ, const ModeId& m) {
    auto it = std::lower_bound(occ.begin(), occ.end(), m,
                               [](const auto& entry, const ModeId& key) { return entry.first < key; });
    return (it != occ.end() && it->first == m) ? it->second : 0;
}

// Adds delta photons to m (delta may be negative); keeps the sorted/no-zero form.
inline Occupation with_added(Occupation occ, const ModeId& m, int delta) {
    auto it = std::lower_bound(occ.begin(), occ.end(), m,
                               [](const auto& entry, const ModeId& key) { return entry.first < key; });
    if (it != occ.end() && it->first == m) {
        it->second += delta;
        if (it->second < 0) throw StateError("negative occupation in mode " + m.str());
        if (it->second == 0) occ.erase(it);
    } else {
        if (delta < 0) throw StateError("negative occupation in mode " + m.str());
        if (delta > 0) occ.insert(it, {m, delta});
    }
    return occ;
}

struct BasisTerm {
    std::vector<AtomLevel> atoms;
    Occupation occupation;

    auto operator<=>(const BasisTerm&) const = default;
    bool operator==(const BasisTerm&) const = default;
};

inline std::string atoms_str(const std::vector<AtomLevel>& atoms) {
    std::string s;
    for (auto a : atoms) s += level_char(a);
    return s;
}

inline std::string occupation_str(const Occupation& occ) {
    std::string s;
    for (const auto& [m, c] : occ) {
        if (!s.empty()) s += ',';
        s += m.str() + ":" + std::to_string(c);
    }
    return s;
}

class HybridState {
public:
    using TermMap = std::map<BasisTerm, complex>;

    HybridState() = default;
    explicit HybridState(std::size_t atom_count) : atom_count_(atom_count) {}

    // Zero-atom photonic vacuum with amplitude 1; the identity of tensor().
    static HybridState vacuum() {
        HybridState s(0);
        s.terms_[BasisTerm{}] = 1.0;
        return s;
    }

    std::size_t atom_count() const { return atom_count_; }
    const TermMap& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }

    complex amplitude(const BasisTerm& t) const {
        auto it = terms_.find(t);
        return it == terms_.end() ? complex{} : it->second;
    }

    double squared_norm() const {
        double n = 0;
        for (const auto& [t, a] : terms_) n += std::norm(a);
        return n;
    }

    // Accumulates amplitude onto a term; used by builders.
    void add(BasisTerm term, complex amp) {
        if (term.atoms.size() != atom_count_) {
            throw StateError("term has " + std::to_string(term.atoms.size()) + " atoms, state has " +
                             std::to_string(atom_count_));
        }
        terms_[std::move(term)] += amp;
    }

    HybridState pruned(double epsilon) const {
        HybridState out(atom_count_);
        for (const auto& [t, a] : terms_) {
            if (std::abs(a) >= epsilon) out.terms_.emplace_hint(out.terms_.end(), t, a);
        }
        return out;
    }

    HybridState scaled(complex factor) const {
        HybridState out(atom_count_);
        for (const auto& [t, a] : terms_) out.terms_.emplace_hint(out.terms_.end(), t, a * factor);
        return out;
    }

    // Keeps the terms for which pred(term) is true.
    template <typename Pred>
    HybridState filtered(Pred pred) const {
        HybridState out(atom_count_);
        for (const auto& [t, a] : terms_) {
            if (pred(t)) out.terms_.emplace_hint(out.terms_.end(), t, a);
        }
        return out;
    }

    int max_photons() const {
        int n = 0;
        for (const auto& [t, a] : terms_) n = std::max(n, total_photons(t.occupation));
        return n;
    }

private:
    std::size_t atom_count_ = 0;
    TermMap terms_;
};

inline HybridState new_product_state(const std::vector<AtomLevel>& atoms) {
    if (atoms.empty()) throw StateError("new_product_state: empty atom list");
    HybridState s(atoms.size());
    s.add(BasisTerm{atoms, {}}, 1.0);
    return s;
}

// Raises the occupation of `m` in every term by one: amplitude gains sqrt(n+1).
inline HybridState apply_creation(const HybridState& s, const ModeId& m, const EngineConfig& cfg = {}) {
    HybridState out(s.atom_count());
    for (const auto& [t, a] : s.terms()) {
        if (total_photons(t.occupation) + 1 > cfg.max_photons) {
            throw StateError("apply_creation: photon truncation " + std::to_string(cfg.max_photons) +
                             " exceeded in mode " + m.str());
        }
        int n = count_in(t.occupation, m);
        out.add(BasisTerm{t.atoms, with_added(t.occupation, m, 1)}, a * std::sqrt(double(n + 1)));
    }
    return out.pruned(cfg.amplitude_epsilon);
}

// Tensor product. Atom lists concatenate. Photonic factors must live on
// disjoint modes unless shared_ports is set, in which case the second
// factor's photons are created on top of the first's by creation-operator
// composition, so sqrt(n!) bosonic factors appear where modes coincide.
inline HybridState tensor(const HybridState& s1, const HybridState& s2, bool shared_ports = false,
                          const EngineConfig& cfg = {}) {
    HybridState out(s1.atom_count() + s2.atom_count());
    for (const auto& [t1, a1] : s1.terms()) {
        for (const auto& [t2, a2] : s2.terms()) {
            std::vector<AtomLevel> atoms = t1.atoms;
            atoms.insert(atoms.end(), t2.atoms.begin(), t2.atoms.end());
            Occupation occ = t1.occupation;
            double factor = 1.0;
            for (const auto& [m, c] : t2.occupation) {
                int before = count_in(occ, m);
                if (before > 0) {
                    if (!shared_ports) throw StateError("tensor: mode " + m.str() + " occupied in both factors");
                    // (a^dag)^c / sqrt(c!) acting on |before>
                    for (int k = 1; k <= c; ++k) factor *= std::sqrt(double(before + k) / double(k));
                }
                occ = with_added(std::move(occ), m, c);
            }
            if (total_photons(occ) > cfg.max_photons) {
                throw StateError("tensor: photon truncation " + std::to_string(cfg.max_photons) + " exceeded");
            }
            out.add(BasisTerm{std::move(atoms), std::move(occ)}, a1 * a2 * factor);
        }
    }
    return out.pruned(cfg.amplitude_epsilon);
}

// <s1|s2>, conjugate-linear in s1.
inline complex inner_product(const HybridState& s1, const HybridState& s2) {
    if (s1.atom_count() != s2.atom_count()) {
        throw StateError("inner_product: atom count mismatch (" + std::to_string(s1.atom_count()) + " vs " +
                         std::to_string(s2.atom_count()) + ")");
    }
    const auto& small = s1.size() <= s2.size() ? s1 : s2;
    const auto& large = s1.size() <= s2.size() ? s2 : s1;
    complex acc{};
    for (const auto& [t, a] : small.terms()) {
        auto b = large.amplitude(t);
        if (b == complex{}) continue;
        acc += (&small == &s1) ? std::conj(a) * b : std::conj(b) * a;
    }
    return acc;
}

// Returns the unit state together with the original squared norm.
inline std::pair<HybridState, double> normalize(const HybridState& s, const EngineConfig& cfg = {}) {
    double n2 = s.squared_norm();
    if (std::sqrt(n2) <= cfg.norm_epsilon) throw StateError("normalize: state has effectively zero norm");
    return {s.scaled(1.0 / std::sqrt(n2)), n2};
}

// Strips a photonic factor shared by every term.
inline HybridState reduced_atomic_state(const HybridState& s) {
    HybridState out(s.atom_count());
    if (s.empty()) return out;
    const Occupation& first = s.terms().begin()->first.occupation;
    for (const auto& [t, a] : s.terms()) {
        if (t.occupation != first) {
            throw StateError("reduced_atomic_state: photonic occupations differ across terms (" +
                             occupation_str(first) + " vs " + occupation_str(t.occupation) + ")");
        }
        out.add(BasisTerm{t.atoms, {}}, a);
    }
    return out;
}

// |<target|s>|^2 for unit states; both arguments are normalized first so
// callers may pass unnormalized kets.
inline double fidelity(const HybridState& target, const HybridState& s) {
    double nt = target.squared_norm(), ns = s.squared_norm();
    if (nt == 0 || ns == 0) return 0.0;
    return std::norm(inner_product(target, s)) / (nt * ns);
}

// <target| Tr_rest(|s><s|) |target> where target lives on the atoms listed
// in `subset` (in order) and s is purely atomic. Both are normalized first.
inline double subset_fidelity(const HybridState& target, const HybridState& s, const std::vector<std::size_t>& subset) {
    if (target.atom_count() != subset.size()) throw StateError("subset_fidelity: subset size mismatch");
    for (auto i : subset) {
        if (i >= s.atom_count()) throw StateError("subset_fidelity: atom index out of range");
    }
    double nt = target.squared_norm(), ns = s.squared_norm();
    if (nt == 0 || ns == 0) return 0.0;
    // Group s's amplitudes by the levels of the atoms outside the subset.
    std::map<std::pair<std::vector<AtomLevel>, Occupation>, complex> overlap;
    for (const auto& [t, a] : s.terms()) {
        std::vector<AtomLevel> sub, rest;
        for (std::size_t i = 0; i < t.atoms.size(); ++i) {
            if (std::find(subset.begin(), subset.end(), i) != subset.end()) continue;
            rest.push_back(t.atoms[i]);
        }
        for (auto i : subset) sub.push_back(t.atoms[i]);
        auto tgt = target.amplitude(BasisTerm{sub, {}});
        if (tgt == complex{}) continue;
        overlap[{rest, t.occupation}] += std::conj(tgt) * a;
    }
    double f = 0;
    for (const auto& [k, v] : overlap) f += std::norm(v);
    return f / (nt * ns);
}

// One line per term in canonical order:
//   <atom levels> | <mode:count,...> | <re> <im>
inline std::string serialize(const HybridState& s) {
    std::ostringstream os;
    os << std::setprecision(17);
    for (const auto& [t, a] : s.terms()) {
        os << atoms_str(t.atoms) << " | " << occupation_str(t.occupation) << " | " << a.real() << ' ' << a.imag()
           << '\n';
    }
    return os.str();
}

inline HybridState deserialize(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    std::vector<std::pair<BasisTerm, complex>> parsed;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto p1 = line.find(" | ");
        auto p2 = p1 == std::string::npos ? p1 : line.find(" | ", p1 + 3);
        if (p2 == std::string::npos) throw StateError("deserialize: line " + std::to_string(lineno) + " malformed");
        BasisTerm term;
        for (char c : line.substr(0, p1)) term.atoms.push_back(level_from_char(c));
        std::string occ = line.substr(p1 + 3, p2 - p1 - 3);
        std::istringstream os(occ);
        std::string item;
        while (std::getline(os, item, ',')) {
            auto colon = item.rfind(':');
            if (colon == std::string::npos) {
                throw StateError("deserialize: line " + std::to_string(lineno) + " bad occupation '" + item + "'");
            }
            term.occupation = with_added(std::move(term.occupation), ModeId::parse(item.substr(0, colon)),
                                         std::stoi(item.substr(colon + 1)));
        }
        std::istringstream amp(line.substr(p2 + 3));
        double re = 0, im = 0;
        if (!(amp >> re >> im)) throw StateError("deserialize: line " + std::to_string(lineno) + " bad amplitude");
        parsed.emplace_back(std::move(term), complex{re, im});
    }
    HybridState s(parsed.empty() ? 0 : parsed.front().first.atoms.size());
    for (auto& [t, a] : parsed) s.add(std::move(t), a);
    return s;
}

// Convenience builder for purely atomic kets such as GHZ and W targets:
// each string is a level word ("llr"), each paired with an amplitude.
inline HybridState atomic_ket(const std::vector<std::pair<std::string, complex>>& words) {
    if (words.empty()) throw StateError("atomic_ket: no terms");
    HybridState s(words.front().first.size());
    for (const auto& [w, a] : words) {
        BasisTerm t;
        for (char c : w) t.atoms.push_back(level_from_char(c));
        s.add(std::move(t), a);
    }
    return s;
}

}  // namespace photonloom
