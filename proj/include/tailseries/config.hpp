#ifndef TAILSERIES_CONFIG_HPP
#define TAILSERIES_CONFIG_HPP

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tailseries/errors.hpp"
#include "tailseries/estimation.hpp"
#include "tailseries/limit_measure.hpp"
#include "tailseries/models.hpp"
#include "tailseries/regvar.hpp"

namespace tailseries {

// ---------------------------------------------------------------------------
// Line-oriented config text: [section] headers and key = value pairs.
// Parse failures carry the offending line number. Sections named
// [report.*] are result blocks emitted by this tool and are skipped, which
// lets any emitted report be fed back in as a config.
// ---------------------------------------------------------------------------

class config_text {
  public:
    static config_text parse(const std::string& text, const std::string& origin = "<config>") {
        config_text cfg;
        cfg.origin_ = origin;
        std::istringstream in(text);
        std::string line, section;
        int lineno = 0;
        bool skipping_report = false;
        while (std::getline(in, line)) {
            ++lineno;
            const std::string t = strip(line);
            if (t.empty() || t[0] == '#' || t[0] == ';') continue;
            if (t.front() == '[') {
                require(t.back() == ']', errc::parse_error,
                        cfg.at_line(lineno) + "unterminated section header");
                section = strip(t.substr(1, t.size() - 2));
                require(!section.empty(), errc::parse_error,
                        cfg.at_line(lineno) + "empty section name");
                skipping_report = section.rfind("report.", 0) == 0 || section == "report";
                continue;
            }
            if (skipping_report) continue;
            const auto eq = t.find('=');
            require(eq != std::string::npos, errc::parse_error,
                    cfg.at_line(lineno) + "expected 'key = value'");
            std::string key = strip(t.substr(0, eq));
            std::string value = strip(t.substr(eq + 1));
            require(!key.empty(), errc::parse_error, cfg.at_line(lineno) + "empty key");
            require(!section.empty(), errc::parse_error,
                    cfg.at_line(lineno) + "key before any [section]");
            const std::string full = section + "." + key;
            require(!cfg.entries_.count(full), errc::parse_error,
                    cfg.at_line(lineno) + "duplicate key '" + full + "'");
            cfg.entries_[full] = {value, lineno};
        }
        return cfg;
    }

    static config_text parse_file(const std::string& path) {
        std::ifstream in(path);
        require(in.good(), errc::parse_error, "cannot open config file '" + path + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse(ss.str(), path);
    }

    bool has(const std::string& full_key) const { return entries_.count(full_key) > 0; }

    std::string get_string(const std::string& key, std::optional<std::string> fallback = {}) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) {
            require(fallback.has_value(), errc::parse_error,
                    origin_ + ": missing required key '" + key + "'");
            return *fallback;
        }
        it->second.consumed = true;
        return it->second.value;
    }

    double get_double(const std::string& key, std::optional<double> fallback = {}) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) {
            require(fallback.has_value(), errc::parse_error,
                    origin_ + ": missing required key '" + key + "'");
            return *fallback;
        }
        it->second.consumed = true;
        return parse_double(it->second.value, it->second.line);
    }

    std::uint64_t get_u64(const std::string& key, std::optional<std::uint64_t> fallback = {}) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) {
            require(fallback.has_value(), errc::parse_error,
                    origin_ + ": missing required key '" + key + "'");
            return *fallback;
        }
        it->second.consumed = true;
        try {
            std::size_t pos = 0;
            const double asd = std::stod(it->second.value, &pos);
            require(pos == it->second.value.size() && asd >= 0 && asd == std::floor(asd),
                    errc::parse_error, at_line(it->second.line) + "expected a nonnegative integer");
            return static_cast<std::uint64_t>(asd);
        } catch (const error&) {
            throw;
        } catch (...) {
            fail(errc::parse_error, at_line(it->second.line) + "expected a nonnegative integer");
        }
    }

    bool get_bool(const std::string& key, std::optional<bool> fallback = {}) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) {
            require(fallback.has_value(), errc::parse_error,
                    origin_ + ": missing required key '" + key + "'");
            return *fallback;
        }
        it->second.consumed = true;
        const std::string& v = it->second.value;
        if (v == "true" || v == "yes" || v == "1") return true;
        if (v == "false" || v == "no" || v == "0") return false;
        fail(errc::parse_error, at_line(it->second.line) + "expected a boolean");
    }

    std::vector<double> get_doubles(const std::string& key,
                                    std::optional<std::vector<double>> fallback = {}) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) {
            require(fallback.has_value(), errc::parse_error,
                    origin_ + ": missing required key '" + key + "'");
            return *fallback;
        }
        it->second.consumed = true;
        std::vector<double> out;
        for (const auto& tok : tokens(it->second.value))
            out.push_back(parse_double(tok, it->second.line));
        require(!out.empty(), errc::parse_error, at_line(it->second.line) + "expected numbers");
        return out;
    }

    int line_of(const std::string& key) const {
        auto it = entries_.find(key);
        return it == entries_.end() ? 0 : it->second.line;
    }

    // "Parses totally": any key never consumed by the schema is an error.
    void reject_unconsumed() const {
        for (const auto& [key, entry] : entries_)
            require(entry.consumed, errc::parse_error,
                    at_line(entry.line) + "unknown key '" + key + "'");
    }

    std::string at_line(int lineno) const {
        return origin_ + ":" + std::to_string(lineno) + ": ";
    }

    double parse_double(const std::string& tok, int lineno) const {
        try {
            std::size_t pos = 0;
            const double v = std::stod(tok, &pos);
            require(pos == tok.size(), errc::parse_error,
                    at_line(lineno) + "trailing characters in number '" + tok + "'");
            return v;
        } catch (const error&) {
            throw;
        } catch (...) {
            fail(errc::parse_error, at_line(lineno) + "expected a number, got '" + tok + "'");
        }
    }

    static std::string strip(const std::string& s) {
        std::size_t a = s.find_first_not_of(" \t\r\n");
        if (a == std::string::npos) return "";
        std::size_t b = s.find_last_not_of(" \t\r\n");
        return s.substr(a, b - a + 1);
    }

    static std::vector<std::string> tokens(const std::string& s) {
        std::vector<std::string> out;
        std::istringstream in(s);
        std::string tok;
        while (in >> tok) out.push_back(tok);
        return out;
    }

    static std::vector<std::string> split(const std::string& s, char sep) {
        std::vector<std::string> out;
        std::string cur;
        for (char c : s) {
            if (c == sep) {
                out.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        out.push_back(cur);
        return out;
    }

  private:
    struct entry {
        std::string value;
        int line = 0;
        mutable bool consumed = false;
    };
    std::map<std::string, entry> entries_;
    std::string origin_;
};

// ---------------------------------------------------------------------------
// Typed experiment configuration
// ---------------------------------------------------------------------------

struct experiment_config {
    // [experiment]
    std::uint64_t seed = 0;
    std::uint64_t n_sims = 1000000;
    int workers = 0;
    std::vector<double> u_quantiles = {1e-2, 1e-3, 1e-4};
    std::vector<double> u_grid_explicit;  // overrides quantiles when nonempty

    // [noise]
    law_family family = law_family::pareto_polar;
    double alpha = 1.5;
    double scale = 1.0;
    mean_mode mode = mean_mode::none;
    std::vector<spectral_atom> atoms;

    // [model]
    std::string model_kind = "noise-only";
    std::string coeff_spec;   // linear: list:/geometric:/power:
    std::string m_law_spec;   // sre
    std::string n_law_spec;   // random-sum
    std::vector<std::string> iid_law_specs;
    std::string schedule_spec;  // partial-sum
    int ps_horizon = 1;
    int ps_max_lag = 0;
    std::string interarrival_spec;
    std::string h_path_spec;
    double renewal_t = 1.0;
    truncation_policy trunc = truncation_policy::tail_budget(1e-6);
    double epsilon = -1.0;
    bool nonzero_mean_declared = false;
    bool gate_override = false;

    // [tail_set]
    double ts_radius = 1.0;
    std::string ts_region = "whole";

    // [check]
    double cap = 1e6;
    std::uint64_t check_mc_draws = 0;

    // [compare]
    double rel_tol = 0.10;
    std::optional<double> constant_override;
    std::uint64_t theory_draws = 20000;

    // [probe]
    std::vector<int> probe_n_list = {0, 2, 4, 8, 16};
    std::vector<double> probe_taus = {0.5, 0.1, 0.01};
    double probe_u_quantile = 1e-3;
    bool probe_hill = true;
    std::uint64_t hill_samples = 100000;

    regvar_law make_noise() const { return regvar_law::make(alpha, atoms, family, scale, mode); }

    coefficient_process make_coefficients(const regvar_law& noise) const;
    series_model make_model() const;
    tail_set make_tail_set(int dim) const;

    std::vector<double> resolve_u_grid(const regvar_law& noise) const {
        if (!u_grid_explicit.empty()) return u_grid_explicit;
        return quantile_grid(noise, u_quantiles);
    }

    std::string echo() const;
};

namespace detail {

inline law_family parse_family(const std::string& s, const std::string& where) {
    if (s == "pareto-polar") return law_family::pareto_polar;
    if (s == "symmetrized-pareto-1d") return law_family::symmetrized_pareto_1d;
    if (s == "centered-pareto-1d") return law_family::centered_pareto_1d;
    fail(errc::parse_error, where + "unknown noise family '" + s + "'");
}

inline mean_mode parse_mean_mode(const std::string& s, const std::string& where) {
    if (s == "none") return mean_mode::none;
    if (s == "zero-forced") return mean_mode::zero_forced;
    fail(errc::parse_error, where + "unknown mean_mode '" + s + "'");
}

// "dir:weight" tokens; dir is +1 / -1 or [c1,c2,...].
inline std::vector<spectral_atom> parse_atoms(const config_text& cfg, const std::string& raw,
                                              int line) {
    std::vector<spectral_atom> out;
    for (const auto& tok : config_text::tokens(raw)) {
        const auto colon = tok.rfind(':');
        require(colon != std::string::npos, errc::parse_error,
                cfg.at_line(line) + "atom must be 'direction:weight'");
        const std::string dir = tok.substr(0, colon);
        const double w = cfg.parse_double(tok.substr(colon + 1), line);
        spectral_atom a;
        a.weight = w;
        if (!dir.empty() && dir.front() == '[') {
            require(dir.back() == ']', errc::parse_error, cfg.at_line(line) + "unterminated '['");
            for (const auto& c : config_text::split(dir.substr(1, dir.size() - 2), ','))
                a.direction.push_back(cfg.parse_double(config_text::strip(c), line));
        } else {
            a.direction.push_back(cfg.parse_double(dir, line));
        }
        out.push_back(std::move(a));
    }
    require(!out.empty(), errc::parse_error, cfg.at_line(line) + "empty atom list");
    return out;
}

// "name:a,b,..." payload splitter.
struct spec_payload {
    std::string name;
    std::vector<double> args;
};

inline spec_payload parse_spec(const config_text& cfg, const std::string& raw, int line) {
    spec_payload p;
    const auto colon = raw.find(':');
    p.name = raw.substr(0, colon);
    if (colon != std::string::npos && colon + 1 < raw.size()) {
        for (const auto& tok : config_text::split(raw.substr(colon + 1), ','))
            p.args.push_back(cfg.parse_double(config_text::strip(tok), line));
    }
    return p;
}

inline matrix_law parse_matrix_law(const config_text& cfg, const std::string& raw, int line) {
    const auto p = parse_spec(cfg, raw, line);
    if (p.name == "constant") {
        require(p.args.size() == 1, errc::parse_error, cfg.at_line(line) + "constant:v");
        return matrix_law::constant_scalar(p.args[0]);
    }
    if (p.name == "uniform") {
        require(p.args.size() == 2, errc::parse_error, cfg.at_line(line) + "uniform:lo,hi");
        return matrix_law::uniform_scalar(p.args[0], p.args[1]);
    }
    if (p.name == "two-point") {
        require(p.args.size() == 3, errc::parse_error, cfg.at_line(line) + "two-point:v1,v2,p1");
        return matrix_law::two_point_scalar(p.args[0], p.args[1], p.args[2]);
    }
    fail(errc::parse_error, cfg.at_line(line) + "unknown matrix law '" + p.name + "'");
}

inline count_law parse_count_law(const config_text& cfg, const std::string& raw, int line) {
    const auto p = parse_spec(cfg, raw, line);
    require(p.args.size() == 1, errc::parse_error, cfg.at_line(line) + "count law takes one argument");
    if (p.name == "constant") return count_law::constant(static_cast<std::uint64_t>(p.args[0]));
    if (p.name == "geometric") return count_law::geometric(p.args[0]);
    if (p.name == "zeta") return count_law::zeta(p.args[0]);
    fail(errc::parse_error, cfg.at_line(line) + "unknown count law '" + p.name + "'");
}

}  // namespace detail

inline coefficient_process experiment_config::make_coefficients(const regvar_law& noise) const {
    const config_text dummy = config_text::parse("");  // for uniform error formatting
    const int d = noise.dimension();
    if (model_kind == "noise-only") return coefficient_process::deterministic({mat::identity(d)});
    if (model_kind == "linear") {
        // matrix terms: one "mat:[r1c1,r1c2;r2c1,r2c2]" token per coefficient
        if (coeff_spec.rfind("mat:", 0) == 0) {
            std::vector<mat> mats;
            for (const auto& tok : config_text::tokens(coeff_spec)) {
                require(tok.rfind("mat:[", 0) == 0 && tok.back() == ']', errc::parse_error,
                        "matrix coefficient syntax is mat:[a,b;c,d]");
                const auto rows = config_text::split(tok.substr(5, tok.size() - 6), ';');
                const auto first = config_text::split(rows.front(), ',');
                mat a(static_cast<int>(rows.size()), static_cast<int>(first.size()));
                for (std::size_t r = 0; r < rows.size(); ++r) {
                    const auto cells = config_text::split(rows[r], ',');
                    require(cells.size() == first.size(), errc::parse_error,
                            "ragged matrix coefficient");
                    for (std::size_t c = 0; c < cells.size(); ++c)
                        a(static_cast<int>(r), static_cast<int>(c)) =
                            dummy.parse_double(config_text::strip(cells[c]), 0);
                }
                mats.push_back(std::move(a));
            }
            return coefficient_process::deterministic(std::move(mats));
        }
        const auto p = detail::parse_spec(dummy, coeff_spec, 0);
        if (p.name == "list") {
            std::vector<mat> mats;
            for (double v : p.args) mats.push_back(mat::scalar(v));
            require(!mats.empty(), errc::parse_error, "linear list coefficients empty");
            return coefficient_process::deterministic(std::move(mats));
        }
        if (p.name == "geometric") {
            require(p.args.size() == 2, errc::parse_error, "geometric:c,rho");
            return coefficient_process::geometric(mat::scalar(p.args[0]), p.args[1]);
        }
        if (p.name == "power") {
            require(p.args.size() == 2, errc::parse_error, "power:c,exponent");
            return coefficient_process::power(mat::scalar(p.args[0]), p.args[1]);
        }
        fail(errc::parse_error, "unknown linear coefficient spec '" + p.name + "'");
    }
    if (model_kind == "sre") return coefficient_process::sre(detail::parse_matrix_law(dummy, m_law_spec, 0));
    if (model_kind == "random-sum")
        return coefficient_process::random_sum(detail::parse_count_law(dummy, n_law_spec, 0), d);
    if (model_kind == "iid-random") {
        std::vector<matrix_law> laws;
        for (const auto& s : iid_law_specs) laws.push_back(detail::parse_matrix_law(dummy, s, 0));
        return coefficient_process::iid(std::move(laws));
    }
    if (model_kind == "partial-sum") {
        const auto p = detail::parse_spec(dummy, schedule_spec, 0);
        if (p.name == "pulse") {
            auto sched = [](int, int j) { return j == 0 ? mat::scalar(1.0) : mat::scalar(0.0); };
            return partial_sum_coefficients(sched, ps_horizon, ps_max_lag);
        }
        if (p.name == "geometric") {
            require(p.args.size() == 1, errc::parse_error, "schedule geometric:rho");
            const double rho = p.args[0];
            auto sched = [rho](int, int j) { return mat::scalar(std::pow(rho, j)); };
            return partial_sum_coefficients(sched, ps_horizon, ps_max_lag);
        }
        fail(errc::parse_error, "unknown partial-sum schedule '" + p.name + "'");
    }
    if (model_kind == "renewal-reward") {
        const auto gap = detail::parse_spec(dummy, interarrival_spec, 0);
        interarrival_law arr = gap.name == "exp" ? interarrival_law::exponential(gap.args.at(0))
                                                 : interarrival_law::constant(gap.args.at(0));
        require(gap.name == "exp" || gap.name == "constant", errc::parse_error,
                "unknown interarrival law '" + gap.name + "'");
        const auto hp = detail::parse_spec(dummy, h_path_spec.empty() ? "identity" : h_path_spec, 0);
        h_path h = h_path::identity(d);
        if (hp.name == "exp-decay")
            h = h_path::exp_decay(hp.args.at(0), d);
        else
            require(hp.name == "identity", errc::parse_error, "unknown h_path '" + hp.name + "'");
        return coefficient_process::renewal(std::move(h), arr, renewal_t);
    }
    fail(errc::parse_error, "unknown model kind '" + model_kind + "'");
}

inline series_model experiment_config::make_model() const {
    regvar_law noise = make_noise();
    coefficient_process coeffs = make_coefficients(noise);
    series_model m(std::move(noise), std::move(coeffs), trunc, epsilon);
    m.nonzero_mean_declared = nonzero_mean_declared;
    m.gate_override = gate_override;
    m.id = model_kind + "/" + m.coeffs.describe() + "/" + m.noise.describe();
    return m;
}

inline tail_set experiment_config::make_tail_set(int dim) const {
    const config_text dummy = config_text::parse("");
    if (ts_region == "whole") return tail_set::whole(ts_radius);
    if (ts_region == "ray-positive") {
        require(dim == 1, errc::parse_error, "ray regions are one-dimensional");
        return tail_set::ray_positive(ts_radius);
    }
    if (ts_region == "ray-negative") {
        require(dim == 1, errc::parse_error, "ray regions are one-dimensional");
        return tail_set::ray_negative(ts_radius);
    }
    // one or more cap:[c1,..]:min_cos tokens
    std::vector<spherical_cap> caps;
    for (const auto& tok : config_text::tokens(ts_region)) {
        require(tok.rfind("cap:", 0) == 0, errc::parse_error,
                "unknown tail-set region '" + tok + "'");
        const auto rest = tok.substr(4);
        const auto close = rest.find(']');
        require(rest.front() == '[' && close != std::string::npos, errc::parse_error,
                "cap syntax is cap:[c1,c2]:min_cos");
        spherical_cap cap;
        for (const auto& c : config_text::split(rest.substr(1, close - 1), ','))
            cap.center.push_back(dummy.parse_double(config_text::strip(c), 0));
        require(rest.size() > close + 2 && rest[close + 1] == ':', errc::parse_error,
                "cap syntax is cap:[c1,c2]:min_cos");
        cap.min_cos = dummy.parse_double(rest.substr(close + 2), 0);
        caps.push_back(std::move(cap));
    }
    return tail_set::caps(ts_radius, std::move(caps));
}

// ---------------------------------------------------------------------------
// Schema: config_text -> experiment_config
// ---------------------------------------------------------------------------

inline experiment_config load_experiment(const config_text& cfg) {
    experiment_config ec;
    ec.seed = cfg.get_u64("experiment.seed", std::uint64_t{0});
    ec.n_sims = cfg.get_u64("experiment.n_sims", std::uint64_t{1000000});
    ec.workers = static_cast<int>(cfg.get_u64("experiment.workers", std::uint64_t{0}));
    ec.u_quantiles = cfg.get_doubles("experiment.u_quantiles", {{1e-2, 1e-3, 1e-4}});
    ec.u_grid_explicit = cfg.get_doubles("experiment.u_grid", {{}});

    ec.alpha = cfg.get_double("noise.alpha");
    ec.scale = cfg.get_double("noise.scale", 1.0);
    ec.family = detail::parse_family(cfg.get_string("noise.family"), "noise.family: ");
    ec.mode = detail::parse_mean_mode(cfg.get_string("noise.mean_mode", std::string("none")),
                                      "noise.mean_mode: ");
    ec.atoms =
        detail::parse_atoms(cfg, cfg.get_string("noise.atoms"), cfg.line_of("noise.atoms"));

    ec.model_kind = cfg.get_string("model.kind", std::string("noise-only"));
    ec.coeff_spec = cfg.get_string("model.coeffs", std::string(""));
    ec.m_law_spec = cfg.get_string("model.m_law", std::string(""));
    ec.n_law_spec = cfg.get_string("model.n_law", std::string(""));
    for (const auto& tok : config_text::tokens(cfg.get_string("model.laws", std::string(""))))
        ec.iid_law_specs.push_back(tok);
    ec.schedule_spec = cfg.get_string("model.schedule", std::string(""));
    ec.ps_horizon = static_cast<int>(cfg.get_u64("model.horizon", std::uint64_t{1}));
    ec.ps_max_lag = static_cast<int>(cfg.get_u64("model.max_lag", std::uint64_t{0}));
    ec.interarrival_spec = cfg.get_string("model.interarrival", std::string("constant:1"));
    ec.h_path_spec = cfg.get_string("model.h_path", std::string("identity"));
    ec.renewal_t = cfg.get_double("model.T", 1.0);
    {
        const std::string tr = cfg.get_string("model.truncation", std::string("budget:1e-6"));
        const int line = cfg.line_of("model.truncation");
        const auto p = detail::parse_spec(cfg, tr, line);
        if (p.name == "budget")
            ec.trunc = truncation_policy::tail_budget(p.args.at(0));
        else if (p.name == "fixed")
            ec.trunc = truncation_policy::fixed(static_cast<int>(p.args.at(0)));
        else
            fail(errc::parse_error, cfg.at_line(line) + "truncation is budget:DELTA or fixed:N");
    }
    ec.epsilon = cfg.get_double("model.epsilon", -1.0);
    ec.nonzero_mean_declared = cfg.get_bool("model.nonzero_mean_declared", false);
    ec.gate_override = cfg.get_bool("model.gate_override", false);

    ec.ts_radius = cfg.get_double("tail_set.radius", 1.0);
    ec.ts_region = cfg.get_string("tail_set.region", std::string("whole"));

    ec.cap = cfg.get_double("check.cap", 1e6);
    ec.check_mc_draws = cfg.get_u64("check.mc_draws", std::uint64_t{0});

    ec.rel_tol = cfg.get_double("compare.rel_tol", 0.10);
    if (cfg.has("compare.constant")) ec.constant_override = cfg.get_double("compare.constant");
    ec.theory_draws = cfg.get_u64("compare.theory_draws", std::uint64_t{20000});

    {
        auto ns = cfg.get_doubles("probe.n_list", {{0, 2, 4, 8, 16}});
        ec.probe_n_list.clear();
        for (double v : ns) ec.probe_n_list.push_back(static_cast<int>(v));
    }
    ec.probe_taus = cfg.get_doubles("probe.taus", {{0.5, 0.1, 0.01}});
    ec.probe_u_quantile = cfg.get_double("probe.u_quantile", 1e-3);
    ec.probe_hill = cfg.get_bool("probe.hill", true);
    ec.hill_samples = cfg.get_u64("probe.hill_samples", std::uint64_t{100000});

    cfg.reject_unconsumed();
    return ec;
}

inline experiment_config load_experiment_file(const std::string& path) {
    return load_experiment(config_text::parse_file(path));
}

inline experiment_config load_experiment_string(const std::string& text) {
    return load_experiment(config_text::parse(text));
}

}  // namespace tailseries

#endif  // TAILSERIES_CONFIG_HPP
