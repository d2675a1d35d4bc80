// report_io.hpp
// CSV and table writers. CSV carries 17 significant digits, tables 8 decimals.

#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "photonloom/noise_mc.hpp"
#include "photonloom/oracle.hpp"
#include "photonloom/protocols.hpp"

namespace photonloom {

inline std::string csv_real(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string table_real(double v) {
    if (std::isnan(v)) return "-";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.8f", v);
    return buf;
}

inline void write_outcome_csv(std::ostream& os, const ProtocolReport& r) {
    const auto& c = r.params.coupling;
    os << "variant,lambda_l,lambda_r,theta,bs_t,pattern,probability,target,fidelity\n";
    for (const auto& o : r.outcomes) {
        os << r.variant << ',' << csv_real(c.lambda_l) << ',' << csv_real(c.lambda_r) << ',' << csv_real(c.theta)
           << ',' << csv_real(r.params.bs_transmittance) << ',' << o.record.pattern.str() << ','
           << csv_real(o.record.probability) << ',' << o.target << ',' << (o.heralded ? csv_real(o.fidelity) : "")
           << '\n';
    }
}

// Detection-level table: pattern,probability,target,fidelity.
inline void write_detection_csv(std::ostream& os, const ProtocolReport& r) {
    os << "pattern,probability,target,fidelity\n";
    for (const auto& o : r.outcomes) {
        os << o.record.pattern.str() << ',' << csv_real(o.record.probability) << ',' << o.target << ','
           << (o.heralded ? csv_real(o.fidelity) : "") << '\n';
    }
}

inline void write_report_table(std::ostream& os, const ProtocolReport& r) {
    const auto& c = r.params.coupling;
    os << "variant            " << r.variant << '\n'
       << "lambda_l           " << table_real(c.lambda_l) << '\n'
       << "lambda_r           " << table_real(c.lambda_r) << '\n'
       << "theta              " << table_real(c.theta) << '\n'
       << "bs_transmittance   " << table_real(r.params.bs_transmittance) << '\n'
       << "semantics          " << (r.params.semantics == DetectorSemantics::exactly_one ? "exact1" : "threshold")
       << "\n\n";
    os << "heralded outcomes\n";
    char line[256];
    std::snprintf(line, sizeof line, "  %-40s %12s  %-6s %12s\n", "pattern", "probability", "target", "fidelity");
    os << line;
    for (const auto& o : r.outcomes) {
        if (!o.heralded) continue;
        std::snprintf(line, sizeof line, "  %-40s %12s  %-6s %12s\n", o.record.pattern.str().c_str(),
                      table_real(o.record.probability).c_str(), o.target.c_str(), table_real(o.fidelity).c_str());
        os << line;
    }
    os << '\n';
    os << "total probability  " << table_real(r.total_success_probability) << '\n';
    for (const auto& [t, y] : r.per_target_yield) {
        std::snprintf(line, sizeof line, "  yield %-10s  %s\n", t.c_str(), table_real(y).c_str());
        os << line;
    }
    os << "not heralded       " << table_real(r.not_heralded) << '\n';
    os << "discarded          " << table_real(r.discarded) << '\n';
    os << "input norm         " << table_real(r.input_norm) << '\n';
    if (!r.quantities.empty()) {
        os << "\nquantities\n";
        for (const auto& [k, v] : r.quantities) {
            std::snprintf(line, sizeof line, "  %-32s %s\n", k.c_str(), table_real(v).c_str());
            os << line;
        }
    }
    if (!r.notes.empty()) {
        os << "\nnotes\n";
        for (const auto& n : r.notes) os << "  " << n << '\n';
    }
}

inline void write_sweep_csv(std::ostream& os, const std::string& param, const std::string& variant,
                            const std::vector<SweepRow>& rows) {
    os << "variant," << param << ",total_probability,min_fidelity,max_fidelity\n";
    for (const auto& r : rows) {
        os << variant << ',' << csv_real(r.parameter) << ',' << csv_real(r.total_probability) << ','
           << csv_real(r.min_fidelity) << ',' << csv_real(r.max_fidelity) << '\n';
    }
}

inline void write_sweep_table(std::ostream& os, const std::string& param, const std::string& variant,
                              const std::vector<SweepRow>& rows) {
    char line[160];
    os << "variant " << variant << '\n';
    std::snprintf(line, sizeof line, "%12s %18s %14s %14s\n", param.c_str(), "total_probability", "min_fidelity",
                  "max_fidelity");
    os << line;
    for (const auto& r : rows) {
        std::snprintf(line, sizeof line, "%12s %18s %14s %14s\n", table_real(r.parameter).c_str(),
                      table_real(r.total_probability).c_str(), table_real(r.min_fidelity).c_str(),
                      table_real(r.max_fidelity).c_str());
        os << line;
    }
}

inline void write_trial_csv_header(std::ostream& os) { os << "trial,heralded,pattern,fidelity,false_herald\n"; }

inline void write_trial_csv_row(std::ostream& os, std::uint64_t trial, const TrialRecord& r) {
    os << trial << ',' << (r.heralded ? 1 : 0) << ',' << r.pattern.str() << ','
       << (r.heralded ? csv_real(r.fidelity) : "") << ',' << (r.false_herald ? 1 : 0) << '\n';
}

inline std::string estimate_summary(const std::string& variant, const Estimate& e) {
    return "variant=" + variant + " trials=" + std::to_string(e.trials) + " heralds=" + std::to_string(e.heralds) +
           " yield=" + table_real(e.yield) + " mean_fidelity=" + table_real(e.mean_fidelity) +
           " fidelity_ci95=" + table_real(e.fidelity_ci95) + " false_herald_rate=" + table_real(e.false_herald_rate);
}

inline void write_oracle_report(std::ostream& os, const OracleReport& r) {
    os << "variant                    " << r.variant << '\n'
       << "terms compared             " << r.terms_compared << '\n'
       << "patterns compared          " << r.patterns_compared << '\n'
       << "max amplitude deviation    " << csv_real(r.max_amplitude_deviation) << '\n'
       << "max probability deviation  " << csv_real(r.max_probability_deviation) << '\n'
       << "max fidelity deviation     " << csv_real(r.max_fidelity_deviation) << '\n'
       << "sparse total probability   " << table_real(r.sparse_total) << '\n'
       << "dense total probability    " << table_real(r.dense_total) << '\n';
    if (r.dense_p_t) {
        os << "dense p_t                  " << table_real(*r.dense_p_t) << '\n'
           << "dense p_s                  " << table_real(*r.dense_p_s) << '\n'
           << "dense p_prime              " << table_real(*r.dense_p_prime) << '\n'
           << "dense stage product        " << table_real(*r.dense_product) << '\n';
    }
    for (const auto& n : r.notes) os << "note: " << n << '\n';
    os << "result                     " << (r.passed ? "agree" : "DISAGREE") << '\n';
}

}  // namespace photonloom
