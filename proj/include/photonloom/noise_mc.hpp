// noise_mc.hpp
// Monte Carlo estimates of herald yield and heralded fidelity under
// imperfect excitation, photon loss, detector inefficiency, dark counts and
// coincidence-window misses.
//
// Each trial is a pure-state trajectory:
//   1. per atom: excited with p_excitation (otherwise left in g_l, no photon);
//      emits with sin^2(theta) (otherwise stays in e);
//      its photon survives collection and the coincidence window with
//      p_collect * p_window. A lost photon is traced out by letting the
//      environment record its polarization, which collapses the atom onto
//      g_l or g_r with probabilities lambda_l^2/Omega^2, lambda_r^2/Omega^2.
//   2. the surviving photons run through the ideal network, and the photon
//      number of every output mode is sampled (detectors measure commuting
//      number operators, so this is exact).
//   3. each detector keeps each photon with p_detect and adds
//      Poisson(dark_rate) dark counts.
// A herald whose detected counts differ from the true photon counts on its
// detectors is a false herald; its fidelity is kept out of mean_fidelity.

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "photonloom/detection.hpp"
#include "photonloom/protocols.hpp"

namespace photonloom {

struct NoiseParams {
    double p_excitation = 1.0;
    double p_collect = 1.0;
    double p_detect = 1.0;
    double dark_rate = 0.0;
    double p_window = 1.0;
    std::uint64_t seed = 0;

    void validate() const {
        auto prob = [](double v, const char* name) {
            if (!(v >= 0 && v <= 1)) throw StateError(std::string(name) + " must lie in [0,1]");
        };
        prob(p_excitation, "p_excitation");
        prob(p_collect, "p_collect");
        prob(p_detect, "p_detect");
        prob(p_window, "p_window");
        if (!(dark_rate >= 0) || !std::isfinite(dark_rate)) throw StateError("dark_rate must be >= 0");
    }
};

struct TrialRecord {
    bool heralded = false;
    ClickPattern pattern;  // detected clicks
    std::string target;
    double fidelity = std::numeric_limits<double>::quiet_NaN();
    bool false_herald = false;
};

struct Estimate {
    std::size_t trials = 0;
    std::size_t heralds = 0;
    std::size_t false_heralds = 0;
    double yield = 0;
    double mean_fidelity = std::numeric_limits<double>::quiet_NaN();  // genuine heralds only
    double fidelity_ci95 = std::numeric_limits<double>::quiet_NaN();
    double false_herald_rate = 0;  // false heralds per trial
};

class TrialSampler {
public:
    TrialSampler(ProtocolParams params, NoiseParams noise, EngineConfig engine = {})
        : params_(std::move(params)), noise_(noise), engine_(engine), setup_(build_setup(params_)) {
        params_.coupling.validate();
        noise_.validate();
    }

    const Setup& setup() const { return setup_; }

    TrialRecord sample(std::uint64_t trial_index) const {
        std::seed_seq seq{static_cast<std::uint32_t>(noise_.seed), static_cast<std::uint32_t>(noise_.seed >> 32),
                          static_cast<std::uint32_t>(trial_index), static_cast<std::uint32_t>(trial_index >> 32)};
        std::mt19937_64 rng(seq);
        std::uniform_real_distribution<double> uni(0.0, 1.0);

        const auto& c = params_.coupling;
        const double p_emit = std::pow(std::sin(c.theta), 2);
        const double p_survive = noise_.p_collect * noise_.p_window;
        const double p_left = c.lambda_l * c.lambda_l / (c.omega() * c.omega());
        std::vector<Prep> key(setup_.emitters.size());
        for (auto& k : key) {
            if (uni(rng) >= noise_.p_excitation) {
                k = Prep::unexcited;
            } else if (uni(rng) >= p_emit) {
                k = Prep::no_emission;
            } else if (uni(rng) >= p_survive) {
                k = uni(rng) < p_left ? Prep::lost_l : Prep::lost_r;
            } else {
                k = Prep::emits;
            }
        }
        const auto& dist = distribution(key);

        // Sample the full output occupation.
        double u = uni(rng), acc = 0;
        std::size_t pick = dist.size() - 1;
        for (std::size_t i = 0; i < dist.size(); ++i) {
            acc += dist[i].weight;
            if (u < acc) {
                pick = i;
                break;
            }
        }
        const auto& outcome = dist[pick];

        TrialRecord rec;
        const auto& dets = setup_.detectors;
        std::vector<int> detected(dets.size());
        std::vector<bool> fired(dets.size());
        bool discard = false;
        std::poisson_distribution<int> dark(noise_.dark_rate);
        for (std::size_t d = 0; d < dets.size(); ++d) {
            int n = outcome.counts[d];
            int k = 0;
            if (n > 0) k = std::binomial_distribution<int>(n, noise_.p_detect)(rng);
            if (noise_.dark_rate > 0) k += std::min(dark(rng), engine_.max_photons);
            detected[d] = k;
            fired[d] = k > 0 && (params_.semantics == DetectorSemantics::at_least_one || k == 1);
            if (params_.semantics == DetectorSemantics::exactly_one && k >= 2) discard = true;
        }
        rec.pattern = detail::make_pattern(fired, dets);
        if (discard) return rec;
        auto h = setup_.herald(rec.pattern.fired);
        if (!h) return rec;
        rec.heralded = true;
        rec.target = h->target;
        rec.fidelity = outcome.branch.weight > 0 ? subset_fidelity(h->target_state, outcome.branch.atoms, h->atoms) : 0.0;
        for (std::size_t d = 0; d < dets.size(); ++d) {
            if (std::find(h->block.begin(), h->block.end(), dets[d].name) == h->block.end()) continue;
            if (detected[d] != outcome.counts[d]) rec.false_herald = true;
        }
        return rec;
    }

    Estimate estimate(std::size_t trials, unsigned threads = worker_count()) const {
        if (trials == 0) throw StateError("estimate: trials must be >= 1");
        constexpr std::size_t chunk = 1024;
        struct Partial {
            std::size_t heralds = 0, genuine = 0, false_heralds = 0;
            double fid = 0, fid2 = 0;
        };
        std::size_t chunks = (trials + chunk - 1) / chunk;
        std::vector<Partial> parts(chunks);
        parallel_for(chunks, threads, [&](std::size_t ci) {
            Partial p;
            for (std::size_t i = ci * chunk; i < std::min(trials, (ci + 1) * chunk); ++i) {
                auto r = sample(i);
                if (!r.heralded) continue;
                ++p.heralds;
                if (r.false_herald) {
                    ++p.false_heralds;
                } else {
                    ++p.genuine;
                    p.fid += r.fidelity;
                    p.fid2 += r.fidelity * r.fidelity;
                }
            }
            parts[ci] = p;
        });
        Partial total;
        for (const auto& p : parts) {
            total.heralds += p.heralds;
            total.genuine += p.genuine;
            total.false_heralds += p.false_heralds;
            total.fid += p.fid;
            total.fid2 += p.fid2;
        }
        Estimate e;
        e.trials = trials;
        e.heralds = total.heralds;
        e.false_heralds = total.false_heralds;
        e.yield = double(total.heralds) / double(trials);
        e.false_herald_rate = double(total.false_heralds) / double(trials);
        if (total.genuine > 0) {
            double n = double(total.genuine);
            e.mean_fidelity = total.fid / n;
            double var = std::max(0.0, total.fid2 / n - e.mean_fidelity * e.mean_fidelity);
            e.fidelity_ci95 = 1.96 * std::sqrt(var / n);
        }
        return e;
    }

private:
    enum class Prep : std::uint8_t { emits, unexcited, no_emission, lost_l, lost_r };

    struct OutputOutcome {
        std::vector<int> counts;  // photons per detector
        Branch branch;
        double weight = 0;
    };

    using Distribution = std::vector<OutputOutcome>;

    const Distribution& distribution(const std::vector<Prep>& key) const {
        std::lock_guard lock(cache_mutex_);
        auto it = cache_.find(key);
        if (it != cache_.end()) return *it->second;
        auto dist = std::make_unique<Distribution>(build(key));
        return *cache_.emplace(key, std::move(dist)).first->second;
    }

    Distribution build(const std::vector<Prep>& key) const {
        HybridState s = HybridState::vacuum();
        for (std::size_t i = 0; i < key.size(); ++i) {
            HybridState one(1);
            switch (key[i]) {
                case Prep::emits: one = detail::photon_branch(params_.coupling, setup_.emitters[i].atom,
                                                              setup_.shared_port.value_or(setup_.emitters[i].port));
                    break;
                case Prep::unexcited: one = new_product_state({AtomLevel::ground_l}); break;
                case Prep::no_emission: one = new_product_state({AtomLevel::excited}); break;
                case Prep::lost_l: one = new_product_state({AtomLevel::ground_l}); break;
                case Prep::lost_r: one = new_product_state({AtomLevel::ground_r}); break;
            }
            s = setup_.shared_port ? bunch_merge(s, one, engine_) : tensor(s, one, false, engine_);
        }
        s = apply_circuit(s, setup_.circuit, engine_);
        auto idx = detail::detector_index(setup_.detectors);
        Distribution dist;
        for (auto& b : detail::branches_of(s)) {
            OutputOutcome o;
            o.counts = detail::detector_counts(b.occupation, idx, setup_.detectors.size());
            o.weight = b.weight;
            o.branch = std::move(b);
            dist.push_back(std::move(o));
        }
        return dist;
    }

    ProtocolParams params_;
    NoiseParams noise_;
    EngineConfig engine_;
    Setup setup_;
    mutable std::mutex cache_mutex_;
    mutable std::map<std::vector<Prep>, std::unique_ptr<Distribution>> cache_;
};

inline TrialRecord sample_trial(const ProtocolParams& p, const NoiseParams& n, std::uint64_t trial_index) {
    return TrialSampler(p, n).sample(trial_index);
}

inline Estimate estimate(const ProtocolParams& p, const NoiseParams& n, std::size_t trials,
                         unsigned threads = worker_count()) {
    return TrialSampler(p, n).estimate(trials, threads);
}

}  // namespace photonloom
