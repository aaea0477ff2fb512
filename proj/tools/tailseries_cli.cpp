// Config-driven experiment runner: define a model, gate it on the moment
// conditions, compute the theoretical tail-limit constant, simulate, compare,
// and emit tables. Exit codes: 0 ok, 1 usage/parse, 2 analytic or verdict
// failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tailseries/tailseries.hpp"

namespace ts = tailseries;
namespace fs = std::filesystem;

namespace {

struct cli_options {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
};

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    ts::require(out.good(), ts::errc::parse_error, "cannot write '" + path.string() + "'");
    out << content;
}

ts::experiment_config load(const cli_options& cli) {
    ts::experiment_config ec = ts::load_experiment_file(cli.config_path);
    if (cli.seed) ec.seed = *cli.seed;
    if (cli.workers) ec.workers = *cli.workers;
    fs::create_directories(cli.out_dir);
    return ec;
}

enum class region_1d { whole, positive_ray, negative_ray, other };

region_1d classify_region(const ts::tail_set& b, int dim) {
    if (b.whole_sphere()) return region_1d::whole;
    if (dim != 1 || b.cap_list().size() != 1) return region_1d::other;
    return b.cap_list().front().center[0] > 0.0 ? region_1d::positive_ray
                                                : region_1d::negative_ray;
}

// Closed forms where the model admits them, Monte Carlo otherwise.
ts::limit_constant resolve_theory_constant(const ts::experiment_config& ec,
                                           const ts::series_model& model, const ts::tail_set& b,
                                           std::string& source) {
    ts::limit_constant c;
    c.tail_set_key = b.key();
    c.model_id = model.id;
    if (ec.constant_override) {
        c.value = *ec.constant_override;
        source = "config-override";
        return c;
    }
    const double alpha = model.noise.alpha();
    const ts::limit_measure mu = ts::limit_measure::from_law(model.noise);
    const auto kind = model.coeffs.kind();

    if (kind == ts::coeff_kind::random_sum_indicator) {
        c.value = ts::random_sum_constant(model.coeffs.counts().mean()) * mu.eval(b);
        source = "tail-wald EN*mu(B)";
        return c;
    }
    if (kind == ts::coeff_kind::sre_product && model.dim() == 1 &&
        model.coeffs.multiplier().is_scalar()) {
        const auto region = classify_region(b, 1);
        if (region != region_1d::other) {
            const double w = mu.one_d_weights().first;
            const auto rays = ts::sre_constants(model.coeffs.multiplier(), alpha, w);
            double v = 0.0;
            if (region == region_1d::whole)
                v = rays.positive + rays.negative;
            else
                v = region == region_1d::positive_ray ? rays.positive : rays.negative;
            c.value = v * std::pow(b.radius(), -alpha);
            source = "sre closed form";
            return c;
        }
    }
    if (model.coeffs.deterministic_coeffs()) {
        c = ts::limit_constant_mc(model, b, 0, ec.seed);
        c.model_id = model.id;
        source = "deterministic pushforward series";
        return c;
    }
    c = ts::limit_constant_mc(model, b, ec.theory_draws, ec.seed);
    c.model_id = model.id;
    source = "monte-carlo expected pushforward";
    return c;
}

int run_check(const cli_options& cli) {
    const auto ec = load(cli);
    ts::series_model model = ec.make_model();
    ts::moment_check_params params(model.noise.alpha(), model.epsilon);
    params.cap = ec.cap;
    params.mc_draws = ec.check_mc_draws;
    params.seed = ec.seed;
    const auto rep = ts::gate_model(model, params);
    const std::string body = ts::report_moment_rows(rep);
    std::cout << body;
    write_file(fs::path(cli.out_dir) / "check_report.txt",
               "# tailseries check report\n" + body + "\n" + ec.echo());
    return rep.pass() ? 0 : 2;
}

int run_theory(const cli_options& cli) {
    const auto ec = load(cli);
    ts::series_model model = ec.make_model();
    ts::gate_model(model, ec.cap);
    if (!model.sampling_allowed()) {
        std::cerr << "theory: model failed the moment-condition gate\n";
        return 2;
    }
    const ts::tail_set b = ec.make_tail_set(model.dim());
    std::string source;
    const auto c = resolve_theory_constant(ec, model, b, source);
    const std::string body = ts::report_constant(c, source);
    std::cout << body;
    write_file(fs::path(cli.out_dir) / "theory_report.txt",
               "# tailseries theory report\n" + body + "\n" + ec.echo());
    return 0;
}

int run_estimate(const cli_options& cli) {
    const auto ec = load(cli);
    ts::series_model model = ec.make_model();
    const auto gate = ts::gate_model(model, ec.cap);
    if (!model.sampling_allowed()) {
        std::cerr << "estimate: model failed the moment-condition gate\n"
                  << ts::report_moment_rows(gate);
        return 2;
    }
    const ts::tail_set b = ec.make_tail_set(model.dim());
    std::string source;
    const auto constant = resolve_theory_constant(ec, model, b, source);

    ts::estimate_options opts;
    opts.n_sims = ec.n_sims;
    opts.seed = ec.seed;
    opts.workers = ec.workers;
    const auto grid = ec.resolve_u_grid(model.noise);
    const auto est = ts::estimate_tail_ratio(model, b, grid, opts);
    ts::compare_rule rule;
    rule.rel_tol = ec.rel_tol;
    const auto verdict = ts::compare_to_theory(est, constant, rule);

    write_file(fs::path(cli.out_dir) / "tail_ratio.csv", ts::csv_tail_ratio(est, &constant));
    write_file(fs::path(cli.out_dir) / "plot.csv", ts::csv_plot(est, &constant));
    std::string diag = "[report.diagnostics]\n";
    diag += "max_n_used = " + std::to_string(est.max_n_used) + "\n";
    diag += "remainder_bound = " + ts::fmt(est.remainder_bound) + "\n";
    diag += "n_sims = " + std::to_string(est.n_sims) + "\n";
    const std::string body = ts::report_verdict(verdict) + "\n" +
                             ts::report_constant(constant, source) + "\n" + diag + "\n" +
                             ts::report_moment_rows(gate);
    write_file(fs::path(cli.out_dir) / "estimate_report.txt",
               "# tailseries estimate report\n" + body + "\n" + ec.echo());
    std::cout << body;
    std::cout << (verdict.pass ? "verdict: PASS\n" : "verdict: FAIL\n");
    return verdict.pass ? 0 : 2;
}

int run_probe(const cli_options& cli) {
    const auto ec = load(cli);
    ts::series_model model = ec.make_model();
    const auto gate = ts::gate_model(model, ec.cap);
    if (!model.sampling_allowed()) {
        std::cerr << "probe: model failed the moment-condition gate\n"
                  << ts::report_moment_rows(gate);
        return 2;
    }
    ts::estimate_options opts;
    opts.n_sims = ec.n_sims;
    opts.seed = ec.seed;
    opts.workers = ec.workers;
    const double u = model.noise.tail_quantile(ec.probe_u_quantile);
    const auto res = ts::remainder_decay_probe(model, ec.probe_n_list, u, ec.probe_taus, opts);

    std::string body = "[report.probe]\n";
    body += "u = " + ts::fmt(u) + "\n";
    body += "denominator = " + ts::fmt(res.denominator) + "\n";
    body += "horizon = " + std::to_string(res.horizon) + "\n";
    for (std::size_t i = 0; i < res.n_list.size(); ++i)
        body += "suffix." + std::to_string(res.n_list[i]) + " = " + ts::fmt(res.ratios[i]) +
                " stderr=" + ts::fmt(res.stderrs[i]) + "\n";
    for (std::size_t t = 0; t < res.taus.size(); ++t)
        body += "small_noise." + ts::fmt(res.taus[t]) + " = " + ts::fmt(res.tau_ratios[t]) + "\n";
    if (ec.probe_hill) {
        const auto norms = ts::sample_norms(model, ec.hill_samples, ec.seed);
        const std::size_t k = ts::hill_default_k(norms.size());
        body += "hill.k = " + std::to_string(k) + "\n";
        body += "hill.alpha_hat = " + ts::fmt(ts::hill_estimate(norms, k)) + "\n";
    }
    if (model.noise.alpha() > 1.0 && model.noise.mode() != ts::mean_mode::zero_forced) {
        const auto probe = ts::nonzero_mean_probe(model, ec.resolve_u_grid(model.noise), 20000,
                                                  ec.seed);
        body += std::string("nonzero_mean.consistent_with_vanishing = ") +
                (probe.consistent_with_vanishing ? "true" : "false") + "\n";
        body += "nonzero_mean.note = " + probe.note + "\n";
        for (std::size_t i = 0; i < probe.u_grid.size(); ++i)
            body += "nonzero_mean.ratio." + ts::fmt(probe.u_grid[i]) + " = " +
                    ts::fmt(probe.ratios[i]) + "\n";
    }
    write_file(fs::path(cli.out_dir) / "remainder.csv", ts::csv_remainder(res));
    write_file(fs::path(cli.out_dir) / "probe_report.txt",
               "# tailseries probe report\n" + body + "\n" + ec.echo());
    std::cout << body;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tailseries: tail asymptotics of randomly weighted heavy-tailed series"};
    app.require_subcommand(1);

    cli_options cli;
    std::uint64_t seed_flag = 0;
    int workers_flag = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", cli.config_path, "experiment config file")->required();
        sub->add_option("--out", cli.out_dir, "output directory (default .)");
        sub->add_option("--seed", seed_flag, "override the config seed");
        sub->add_option("--workers", workers_flag, "override worker count (0 = hardware)");
    };

    auto* c_check = app.add_subcommand("check", "evaluate the moment-condition gate");
    auto* c_theory = app.add_subcommand("theory", "compute the theoretical tail-limit constant");
    auto* c_estimate = app.add_subcommand("estimate", "simulate tail ratios and compare to theory");
    auto* c_probe = app.add_subcommand("probe", "remainder-decay and tail-index diagnostics");
    for (auto* sub : {c_check, c_theory, c_estimate, c_probe}) add_common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    for (auto* sub : {c_check, c_theory, c_estimate, c_probe}) {
        if (!app.got_subcommand(sub)) continue;
        if (sub->count("--seed") > 0) cli.seed = seed_flag;
        if (sub->count("--workers") > 0) cli.workers = workers_flag;
    }

    try {
        if (app.got_subcommand(c_check)) return run_check(cli);
        if (app.got_subcommand(c_theory)) return run_theory(cli);
        if (app.got_subcommand(c_estimate)) return run_estimate(cli);
        if (app.got_subcommand(c_probe)) return run_probe(cli);
    } catch (const ts::error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.code() == ts::errc::parse_error ? 1 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
