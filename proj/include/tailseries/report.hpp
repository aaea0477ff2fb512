#ifndef TAILSERIES_REPORT_HPP
#define TAILSERIES_REPORT_HPP

#include <cstdio>
#include <string>
#include <vector>

#include "tailseries/config.hpp"
#include "tailseries/estimation.hpp"
#include "tailseries/theory.hpp"

namespace tailseries {

// Deterministic number formatting; %.17g round-trips doubles, which is what
// makes byte-identical re-runs a meaningful promise.
inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string fmt(std::uint64_t v) { return std::to_string(v); }

inline std::string fmt(const std::vector<double>& vs) {
    std::string out;
    for (std::size_t i = 0; i < vs.size(); ++i) out += (i ? " " : "") + fmt(vs[i]);
    return out;
}

// Canonical re-parseable echo of the resolved configuration. Every report
// embeds this, so a report file is itself a runnable config.
inline std::string experiment_config::echo() const {
    std::string s;
    s += "[experiment]\n";
    s += "seed = " + std::to_string(seed) + "\n";
    s += "n_sims = " + std::to_string(n_sims) + "\n";
    s += "workers = " + std::to_string(workers) + "\n";
    s += "u_quantiles = " + fmt(u_quantiles) + "\n";
    if (!u_grid_explicit.empty()) s += "u_grid = " + fmt(u_grid_explicit) + "\n";
    s += "\n[noise]\n";
    s += "family = " + std::string(to_string(family)) + "\n";
    s += "alpha = " + fmt(alpha) + "\n";
    s += "scale = " + fmt(scale) + "\n";
    s += "mean_mode = " + std::string(to_string(mode)) + "\n";
    s += "atoms =";
    for (const auto& a : atoms) {
        s += " ";
        if (a.direction.size() == 1) {
            s += fmt(a.direction[0]);
        } else {
            s += "[";
            for (std::size_t k = 0; k < a.direction.size(); ++k)
                s += (k ? "," : "") + fmt(a.direction[k]);
            s += "]";
        }
        s += ":" + fmt(a.weight);
    }
    s += "\n";
    s += "\n[model]\n";
    s += "kind = " + model_kind + "\n";
    if (!coeff_spec.empty()) s += "coeffs = " + coeff_spec + "\n";
    if (!m_law_spec.empty()) s += "m_law = " + m_law_spec + "\n";
    if (!n_law_spec.empty()) s += "n_law = " + n_law_spec + "\n";
    if (!iid_law_specs.empty()) {
        s += "laws =";
        for (const auto& l : iid_law_specs) s += " " + l;
        s += "\n";
    }
    if (!schedule_spec.empty()) {
        s += "schedule = " + schedule_spec + "\n";
        s += "horizon = " + std::to_string(ps_horizon) + "\n";
        s += "max_lag = " + std::to_string(ps_max_lag) + "\n";
    }
    if (model_kind == "renewal-reward") {
        s += "interarrival = " + interarrival_spec + "\n";
        s += "h_path = " + h_path_spec + "\n";
        s += "T = " + fmt(renewal_t) + "\n";
    }
    s += "truncation = ";
    s += trunc.is_fixed() ? "fixed:" + std::to_string(trunc.fixed_n()) : "budget:" + fmt(trunc.budget());
    s += "\n";
    if (epsilon > 0.0) s += "epsilon = " + fmt(epsilon) + "\n";
    if (nonzero_mean_declared) s += "nonzero_mean_declared = true\n";
    if (gate_override) s += "gate_override = true\n";
    s += "\n[tail_set]\n";
    s += "radius = " + fmt(ts_radius) + "\n";
    s += "region = " + ts_region + "\n";
    s += "\n[check]\n";
    s += "cap = " + fmt(cap) + "\n";
    s += "mc_draws = " + std::to_string(check_mc_draws) + "\n";
    s += "\n[compare]\n";
    s += "rel_tol = " + fmt(rel_tol) + "\n";
    if (constant_override) s += "constant = " + fmt(*constant_override) + "\n";
    s += "theory_draws = " + std::to_string(theory_draws) + "\n";
    s += "\n[probe]\n";
    s += "n_list =";
    for (int n : probe_n_list) s += " " + std::to_string(n);
    s += "\n";
    s += "taus = " + fmt(probe_taus) + "\n";
    s += "u_quantile = " + fmt(probe_u_quantile) + "\n";
    s += std::string("hill = ") + (probe_hill ? "true" : "false") + "\n";
    s += "hill_samples = " + std::to_string(hill_samples) + "\n";
    return s;
}

// -- CSV emitters (fixed column sets) ---------------------------------------

inline std::string csv_tail_ratio(const tail_ratio_estimate& est, const limit_constant* theory) {
    std::string s = "u,exceedances,n_sims,ratio,stderr,theory,z\n";
    for (std::size_t i = 0; i < est.u_grid.size(); ++i) {
        s += fmt(est.u_grid[i]) + "," + std::to_string(est.exceedances[i]) + "," +
             std::to_string(est.n_sims) + "," + fmt(est.ratios[i]) + "," + fmt(est.stderrs[i]);
        if (theory) {
            const double z =
                est.stderrs[i] > 0.0 ? (est.ratios[i] - theory->value) / est.stderrs[i] : 0.0;
            s += "," + fmt(theory->value) + "," + fmt(z);
        } else {
            s += ",,";
        }
        s += "\n";
    }
    return s;
}

inline std::string csv_plot(const tail_ratio_estimate& est, const limit_constant* theory) {
    std::string s = "u,ratio,stderr,theory\n";
    for (std::size_t i = 0; i < est.u_grid.size(); ++i) {
        s += fmt(est.u_grid[i]) + "," + fmt(est.ratios[i]) + "," + fmt(est.stderrs[i]) + "," +
             (theory ? fmt(theory->value) : std::string()) + "\n";
    }
    return s;
}

inline std::string csv_remainder(const remainder_probe_result& res) {
    std::string s = "kind,param,exceedances,n_sims,ratio,stderr\n";
    for (std::size_t i = 0; i < res.n_list.size(); ++i) {
        s += "suffix," + std::to_string(res.n_list[i]) + "," + std::to_string(res.counts[i]) + "," +
             std::to_string(res.n_sims) + "," + fmt(res.ratios[i]) + "," + fmt(res.stderrs[i]) + "\n";
    }
    for (std::size_t t = 0; t < res.taus.size(); ++t) {
        s += "small-noise," + fmt(res.taus[t]) + "," + std::to_string(res.tau_counts[t]) + "," +
             std::to_string(res.n_sims) + "," + fmt(res.tau_ratios[t]) + ",\n";
    }
    return s;
}

// -- structured-text report blocks ------------------------------------------

inline std::string report_moment_rows(const moment_report& rep) {
    std::string s;
    s += "[report.check]\n";
    s += "alpha = " + fmt(rep.alpha) + "\n";
    s += "epsilon = " + fmt(rep.epsilon) + "\n";
    s += "regime = " + std::string(to_string(rep.regime)) + "\n";
    s += "cap = " + fmt(rep.cap) + "\n";
    s += std::string("pass = ") + (rep.pass() ? "true" : "false") + "\n";
    for (const auto& row : rep.rows) {
        s += "condition." + row.id + " = " + (row.pass ? "pass" : "fail") + " value=" +
             fmt(row.value);
        if (row.stderr_ > 0.0) s += " stderr=" + fmt(row.stderr_);
        s += std::string(" mode=") + to_string(row.mode);
        if (!row.required) s += " informational";
        s += " # " + row.detail + "\n";
    }
    return s;
}

inline std::string report_constant(const limit_constant& c, const std::string& source) {
    std::string s;
    s += "[report.theory]\n";
    s += "constant = " + fmt(c.value) + "\n";
    if (c.provenance == constant_provenance::monte_carlo) {
        s += "provenance = monte-carlo\n";
        s += "stderr = " + fmt(c.stderr_) + "\n";
        s += "n_draws = " + std::to_string(c.n_draws) + "\n";
    } else {
        s += "provenance = closed-form\n";
    }
    s += "source = " + source + "\n";
    s += "tail_set = " + c.tail_set_key + "\n";
    return s;
}

inline std::string report_verdict(const verdict_report& v) {
    std::string s;
    s += "[report.verdict]\n";
    s += std::string("pass = ") + (v.pass ? "true" : "false") + "\n";
    s += "constant = " + fmt(v.constant) + "\n";
    s += "used_u = " + fmt(v.used_u) + "\n";
    s += "ratio = " + fmt(v.ratio) + "\n";
    s += "stderr = " + fmt(v.stderr_) + "\n";
    s += "tolerance = " + fmt(v.tolerance) + "\n";
    s += "rule = max(3*stderr, " + fmt(v.rel_tol) + "*constant), deepest u with >= " +
         std::to_string(v.min_exceedances) + " exceedances\n";
    s += "z_scores = " + fmt(v.z_scores) + "\n";
    s += "seed = " + std::to_string(v.seed) + "\n";
    s += "runtime_seconds = " + fmt(v.runtime_seconds) + "\n";
    s += "model = " + v.model_id + "\n";
    s += "tail_set = " + v.tail_set_key + "\n";
    return s;
}

}  // namespace tailseries

#endif  // TAILSERIES_REPORT_HPP
