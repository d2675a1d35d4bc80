// cli.hpp
// Command-line front end. Kept as a header so tests can drive it in-process.
//
// Exit codes: 0 success, 2 usage or configuration error, 1 invariant violation.

#pragma once

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "photonloom/photonloom.hpp"

namespace photonloom::cli {

namespace detail {

inline std::vector<double> parse_values(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = photonloom::detail::trim(item);
        if (item.empty()) continue;
        out.push_back(photonloom::detail::parse_real(item));
    }
    if (out.empty()) throw ConfigError(0, "values", "empty value list");
    return out;
}

// Writes through `out` unless a path is set, in which case the file gets it.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : os_(&fallback) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) throw ConfigError(0, "out", "cannot open '" + path + "' for writing");
            os_ = file_.get();
        }
    }
    std::ostream& operator*() { return *os_; }
    bool to_file() const { return file_ != nullptr; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* os_;
};

// Cross-checks a report before it is printed.
inline void check_report(const ProtocolReport& r) {
    double sum = 0;
    for (const auto& o : r.outcomes) {
        if (o.heralded) sum += o.record.probability;
        if (o.record.probability < -1e-15 || o.record.probability > 1 + 1e-12) {
            throw StateError("outcome probability out of range for " + o.record.pattern.str());
        }
    }
    if (std::abs(sum - r.total_success_probability) > 1e-12) throw StateError("heralded probabilities do not add up");
    double ledger = r.total_success_probability + r.not_heralded + r.discarded;
    if (std::abs(ledger - r.input_norm) > 1e-10) throw StateError("probability ledger does not close");
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Heralded GHZ and W state preparation of three remote atoms", "photonloom"};
    app.require_subcommand(1);
    app.fallthrough();

    std::optional<double> lambda_l, lambda_r, theta;
    std::string semantics, config_path, out_path;
    bool keep_vacuum = false;
    app.add_option("--lambda-l", lambda_l, "left coupling constant (> 0)");
    app.add_option("--lambda-r", lambda_r, "right coupling constant (> 0)");
    app.add_option("--theta", theta, "Omega * t in radians (default pi/2)");
    app.add_option("--semantics", semantics, "detector semantics")->check(CLI::IsMember({"exact1", "threshold"}));
    app.add_flag("--keep-vacuum", keep_vacuum, "keep the no-emission term of every atom");
    app.add_option("--config", config_path, "run configuration file");
    app.add_option("--out", out_path, "write CSV to this path instead of a table to stdout");

    auto* ghz = app.add_subcommand("ghz", "GHZ setup");
    auto* wdirect = app.add_subcommand("w-direct", "W setup with an ideally bunched input");
    auto* wbunch = app.add_subcommand("w-bunching", "W setup with beam-splitter bunching");
    bool f2 = false, f1_aux = false;
    wbunch->add_flag("--f2", f2, "add the detection stage on F2");
    wbunch->add_flag("--f1-aux", f1_aux, "add the auxiliary atom arm");

    auto* run_cmd = app.add_subcommand("run", "run the variant named in the configuration");

    auto* sweep = app.add_subcommand("sweep", "parameter sweep");
    std::string sweep_param, sweep_values, sweep_variant;
    sweep->add_option("--param", sweep_param, "ratio or bs-t")->required()->check(CLI::IsMember({"ratio", "bs-t"}));
    sweep->add_option("--values", sweep_values, "comma-separated values")->required();
    sweep->add_option("--variant", sweep_variant, "protocol variant (default ghz for ratio, w-direct for bs-t)");

    auto* mc = app.add_subcommand("mc", "Monte Carlo estimate under noise");
    std::optional<std::size_t> trials;
    std::optional<std::uint64_t> seed;
    std::optional<double> p_exc, p_col, p_det, dark, p_win;
    std::string mc_variant, trial_csv;
    mc->add_option("--trials", trials, "number of trials");
    mc->add_option("--seed", seed, "64-bit seed");
    mc->add_option("--variant", mc_variant, "protocol variant (default from config, else ghz)");
    mc->add_option("--p-excitation", p_exc, "probability of correct initial excitation");
    mc->add_option("--p-collect", p_col, "photon collection probability");
    mc->add_option("--p-detect", p_det, "detector efficiency");
    mc->add_option("--dark-rate", dark, "mean dark counts per detector per window");
    mc->add_option("--p-window", p_win, "probability a photon lands in the coincidence window");
    mc->add_option("--trial-csv", trial_csv, "write per-trial records to this path");

    auto* verify = app.add_subcommand("verify", "compare the sparse engine with the dense reference");
    std::string verify_variant = "ghz";
    verify->add_option("--variant", verify_variant, "protocol variant");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        RunConfig cfg;
        if (!config_path.empty()) cfg = load_config(config_path);
        auto& p = cfg.protocol;
        if (lambda_l) p.coupling.lambda_l = *lambda_l;
        if (lambda_r) p.coupling.lambda_r = *lambda_r;
        if (theta) p.coupling.theta = *theta;
        if (!semantics.empty()) p.semantics = parse_semantics(semantics);
        if (keep_vacuum) p.keep_vacuum_term = true;
        if (!out_path.empty()) cfg.out = out_path;
        if (!(p.coupling.lambda_l > 0)) throw ConfigError(0, "lambda_l", "must be > 0");
        if (!(p.coupling.lambda_r > 0)) throw ConfigError(0, "lambda_r", "must be > 0");
        if (!std::isfinite(p.coupling.theta)) throw ConfigError(0, "theta", "must be finite");

        auto variant_or = [](const std::string& name, Variant fallback) {
            if (name.empty()) return fallback;
            auto v = parse_variant(name);
            if (!v) throw ConfigError(0, "variant", "unknown variant '" + name + "'");
            return *v;
        };

        auto emit_report = [&](const ProtocolReport& r) {
            detail::check_report(r);
            detail::Sink sink(cfg.out, out);
            if (sink.to_file()) {
                write_outcome_csv(*sink, r);
            } else {
                write_report_table(*sink, r);
            }
        };

        if (ghz->parsed() || wdirect->parsed() || wbunch->parsed() || run_cmd->parsed()) {
            if (ghz->parsed()) p.variant = Variant::ghz;
            if (wdirect->parsed()) p.variant = Variant::w_direct;
            if (wbunch->parsed()) {
                if (!p.is_w_bunching()) p.variant = Variant::w_bunching;
                p.with_f2 = p.with_f2 || f2;
                p.with_f1_aux = p.with_f1_aux || f1_aux;
            }
            emit_report(run_protocol(p));
            return 0;
        }

        if (sweep->parsed()) {
            auto values = detail::parse_values(sweep_values);
            p.variant = variant_or(sweep_variant, sweep_param == "ratio" ? Variant::ghz : Variant::w_direct);
            std::vector<SweepRow> rows;
            std::string column;
            if (sweep_param == "ratio") {
                for (double v : values) {
                    if (!(v > 0)) throw ConfigError(0, "values", "ratios must be > 0");
                }
                rows = sweep_coupling_ratio(p, values);
                column = "ratio";
            } else {
                for (double v : values) {
                    if (!(v >= 0 && v <= 1)) throw ConfigError(0, "values", "transmittances must lie in [0,1]");
                }
                rows = sweep_bs_imbalance(p, values);
                column = "bs_t";
            }
            // Sweeps are CSV in both destinations.
            detail::Sink sink(cfg.out, out);
            write_sweep_csv(*sink, column, variant_name(p.variant), rows);
            return 0;
        }

        if (mc->parsed()) {
            auto& n = cfg.noise;
            if (trials) cfg.trials = *trials;
            if (seed) n.seed = *seed;
            if (p_exc) n.p_excitation = *p_exc;
            if (p_col) n.p_collect = *p_col;
            if (p_det) n.p_detect = *p_det;
            if (dark) n.dark_rate = *dark;
            if (p_win) n.p_window = *p_win;
            if (!trial_csv.empty()) cfg.trial_csv = trial_csv;
            p.variant = variant_or(mc_variant, p.variant);
            if (cfg.trials == 0) throw ConfigError(0, "trials", "must be >= 1");
            try {
                n.validate();
            } catch (const StateError& e) {
                throw ConfigError(0, "noise", e.what());
            }
            TrialSampler sampler(p, n);
            auto e = sampler.estimate(cfg.trials);
            out << estimate_summary(variant_name(p.variant), e) << '\n';
            if (!cfg.trial_csv.empty()) {
                detail::Sink sink(cfg.trial_csv, out);
                write_trial_csv_header(*sink);
                for (std::size_t i = 0; i < cfg.trials; ++i) write_trial_csv_row(*sink, i, sampler.sample(i));
            }
            return 0;
        }

        if (verify->parsed()) {
            p.variant = variant_or(verify_variant, Variant::ghz);
            auto r = verify_protocol(p);
            write_oracle_report(out, r);
            return r.passed ? 0 : 1;
        }
        return 2;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return 2;
    } catch (const StateError& e) {
        err << "invariant violation: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace photonloom::cli
