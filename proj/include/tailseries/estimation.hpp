#ifndef TAILSERIES_ESTIMATION_HPP
#define TAILSERIES_ESTIMATION_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include "tailseries/errors.hpp"
#include "tailseries/limit_measure.hpp"
#include "tailseries/models.hpp"
#include "tailseries/rng.hpp"
#include "tailseries/theory.hpp"

namespace tailseries {

struct estimate_options {
    std::uint64_t n_sims = 1000000;
    std::uint64_t seed = 0;
    int workers = 0;  // 0 = hardware concurrency
    std::uint64_t block_size = 1u << 16;
    std::uint64_t min_expected_exceedances = 100;
};

namespace detail {

// Runs `fn(block_index, block_n)` over fixed-size blocks on a small worker
// pool. The block layout depends only on (n_sims, block_size), and results
// are combined in block order, so the outcome is worker-count invariant.
template <typename BlockResult, typename BlockFn>
std::vector<BlockResult> run_blocks(std::uint64_t n_sims, std::uint64_t block_size, int workers,
                                    const BlockFn& fn) {
    const std::uint64_t n_blocks = (n_sims + block_size - 1) / block_size;
    std::vector<BlockResult> results(n_blocks);
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    const unsigned n_workers =
        std::min<std::uint64_t>(n_blocks, workers > 0 ? static_cast<unsigned>(workers) : hw);
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr first_error;
    std::atomic<bool> failed{false};

    auto work = [&]() {
        try {
            for (;;) {
                const std::uint64_t b = next.fetch_add(1);
                if (b >= n_blocks || failed.load()) break;
                const std::uint64_t lo = b * block_size;
                const std::uint64_t n = std::min(block_size, n_sims - lo);
                results[b] = fn(b, n);
            }
        } catch (...) {
            if (!failed.exchange(true)) first_error = std::current_exception();
        }
    };

    if (n_workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (unsigned i = 0; i < n_workers; ++i) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);
    return results;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Tail-ratio estimation
// ---------------------------------------------------------------------------

struct tail_ratio_estimate {
    std::vector<double> u_grid;
    std::vector<std::uint64_t> exceedances;
    std::vector<double> denominators;  // exact P(|Z| > u)
    std::vector<double> ratios;
    std::vector<double> stderrs;  // binomial, numerator only
    std::uint64_t n_sims = 0;
    std::uint64_t seed = 0;
    std::string tail_set_key;
    std::string model_id;
    std::uint64_t max_n_used = 0;
    double remainder_bound = 0.0;
    double elapsed_seconds = 0.0;
};

// Single-pass crude Monte Carlo with common random numbers across the grid:
// every simulated X is tested against all u, and the denominator is the
// noise law's exact tail. Counting is integer per block, so repeated runs
// with any worker count agree bit for bit.
inline tail_ratio_estimate estimate_tail_ratio(const series_model& model, const tail_set& b,
                                               const std::vector<double>& u_grid,
                                               const estimate_options& opts = {}) {
    require(!u_grid.empty(), errc::invalid_parameter, "empty u grid");
    for (std::size_t i = 0; i < u_grid.size(); ++i) {
        require(u_grid[i] > 0.0, errc::invalid_parameter, "u grid must be positive");
        require(i == 0 || u_grid[i] > u_grid[i - 1], errc::invalid_parameter,
                "u grid must be strictly increasing");
        model.noise.tail_prob(u_grid[i]);  // whole grid must sit in the exact-tail domain
    }
    const double deepest = model.noise.tail_prob(u_grid.back());
    require(static_cast<double>(opts.n_sims) * deepest >=
                static_cast<double>(opts.min_expected_exceedances),
            errc::grid_too_deep,
            "expected exceedances at the deepest u fall below " +
                std::to_string(opts.min_expected_exceedances) +
                "; raise n_sims or shrink the grid");

    const auto t0 = std::chrono::steady_clock::now();
    const int d = model.dim();
    const double cap_radius = b.radius();
    const std::size_t n_u = u_grid.size();

    struct block_counts {
        std::vector<std::uint64_t> hits;
        std::uint64_t max_n_used = 0;
    };

    const auto blocks = detail::run_blocks<block_counts>(
        opts.n_sims, opts.block_size, opts.workers,
        [&](std::uint64_t blk, std::uint64_t n) {
            rng_stream coeff(opts.seed, {stream_tag::block, blk, stream_tag::coefficients});
            rng_stream noise(opts.seed, {stream_tag::block, blk, stream_tag::noise});
            series_sampler sampler(model);
            block_counts out;
            out.hits.assign(n_u, 0);
            std::vector<double> x(static_cast<std::size_t>(d));
            for (std::uint64_t i = 0; i < n; ++i) {
                const auto diag = sampler.draw(coeff, noise, x.data());
                out.max_n_used = std::max(out.max_n_used, diag.n_used);
                const double norm = euclidean_norm(x.data(), d);
                if (norm <= cap_radius * u_grid.front()) continue;
                bool in_region = b.whole_sphere();
                if (!in_region) {
                    for (const auto& cap : b.cap_list()) {
                        double dot = 0.0;
                        for (int k = 0; k < d; ++k)
                            dot += x[static_cast<std::size_t>(k)] * cap.center[static_cast<std::size_t>(k)];
                        if (dot >= cap.min_cos * norm) {
                            in_region = true;
                            break;
                        }
                    }
                }
                if (!in_region) continue;
                for (std::size_t j = 0; j < n_u; ++j) {
                    if (norm > cap_radius * u_grid[j])
                        ++out.hits[j];
                    else
                        break;
                }
            }
            return out;
        });

    tail_ratio_estimate est;
    est.u_grid = u_grid;
    est.exceedances.assign(n_u, 0);
    est.n_sims = opts.n_sims;
    est.seed = opts.seed;
    est.tail_set_key = b.key();
    est.model_id = model.id;
    est.remainder_bound = series_sampler(model).remainder_bound();
    for (const auto& blk : blocks) {
        for (std::size_t j = 0; j < n_u; ++j) est.exceedances[j] += blk.hits[j];
        est.max_n_used = std::max(est.max_n_used, blk.max_n_used);
    }
    for (std::size_t j = 0; j < n_u; ++j) {
        const double denom = model.noise.tail_prob(u_grid[j]);
        const double p = static_cast<double>(est.exceedances[j]) / static_cast<double>(opts.n_sims);
        est.denominators.push_back(denom);
        est.ratios.push_back(p / denom);
        est.stderrs.push_back(std::sqrt(p * (1.0 - p) / static_cast<double>(opts.n_sims)) / denom);
    }
    est.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return est;
}

// Default evaluation grid: |Z|-quantiles at the given exceedance levels.
inline std::vector<double> quantile_grid(const regvar_law& noise,
                                         const std::vector<double>& levels = {1e-2, 1e-3, 1e-4}) {
    std::vector<double> grid;
    grid.reserve(levels.size());
    for (double q : levels) grid.push_back(noise.tail_quantile(q));
    std::sort(grid.begin(), grid.end());
    return grid;
}

// ---------------------------------------------------------------------------
// Hill estimator
// ---------------------------------------------------------------------------

inline std::size_t hill_default_k(std::size_t n) {
    const auto k = static_cast<std::size_t>(std::ceil(std::pow(static_cast<double>(n), 2.0 / 3.0)));
    return std::min(k, n / 10);
}

// alpha_hat = k / sum_{i<=k} log(X_(i) / X_(k+1)) on the upper order
// statistics of |samples|.
inline double hill_estimate(const std::vector<double>& samples, std::size_t k) {
    const std::size_t n = samples.size();
    require(k >= 10, errc::invalid_parameter, "hill estimator needs k >= 10");
    require(k < n, errc::invalid_parameter, "hill estimator needs k < n");
    std::vector<double> a(n);
    for (std::size_t i = 0; i < n; ++i) a[i] = std::fabs(samples[i]);
    std::nth_element(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(k), a.end(),
                     std::greater<double>());
    std::sort(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(k + 1), std::greater<double>());
    const double threshold = a[k];
    require(threshold > 0.0, errc::degenerate_sample, "order statistic X_(k+1) is zero");
    double acc = 0.0;
    for (std::size_t i = 0; i < k; ++i) acc += std::log(a[i] / threshold);
    require(acc > 0.0, errc::degenerate_sample, "ties at the k+1 threshold");
    return static_cast<double>(k) / acc;
}

// ---------------------------------------------------------------------------
// Verdicts against theory
// ---------------------------------------------------------------------------

struct compare_rule {
    double rel_tol = 0.10;  // allowance for second-order bias at finite u
    std::uint64_t min_exceedances = 100;
};

struct verdict_report {
    bool pass = false;
    double constant = 0.0;
    double used_u = 0.0;
    double ratio = 0.0;
    double stderr_ = 0.0;
    double tolerance = 0.0;
    std::vector<double> z_scores;
    double rel_tol = 0.0;
    std::uint64_t min_exceedances = 0;
    std::uint64_t seed = 0;
    double runtime_seconds = 0.0;
    std::string model_id;
    std::string tail_set_key;
};

inline verdict_report compare_to_theory(const tail_ratio_estimate& est, const limit_constant& c,
                                        const compare_rule& rule = {}) {
    require(est.tail_set_key == c.tail_set_key, errc::incomparable,
            "estimate and constant refer to different tail sets");
    require(c.model_id.empty() || est.model_id == c.model_id, errc::incomparable,
            "estimate and constant refer to different models");
    verdict_report v;
    v.constant = c.value;
    v.rel_tol = rule.rel_tol;
    v.min_exceedances = rule.min_exceedances;
    v.seed = est.seed;
    v.runtime_seconds = est.elapsed_seconds;
    v.model_id = est.model_id;
    v.tail_set_key = est.tail_set_key;
    for (std::size_t i = 0; i < est.u_grid.size(); ++i)
        v.z_scores.push_back(est.stderrs[i] > 0.0 ? (est.ratios[i] - c.value) / est.stderrs[i] : 0.0);

    std::ptrdiff_t pick = -1;
    for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(est.u_grid.size()) - 1; i >= 0; --i) {
        if (est.exceedances[static_cast<std::size_t>(i)] >= rule.min_exceedances) {
            pick = i;
            break;
        }
    }
    require(pick >= 0, errc::grid_too_deep,
            "no grid point collected the required number of exceedances");
    const auto i = static_cast<std::size_t>(pick);
    v.used_u = est.u_grid[i];
    v.ratio = est.ratios[i];
    v.stderr_ = est.stderrs[i];
    v.tolerance = std::fmax(3.0 * v.stderr_, rule.rel_tol * std::fabs(c.value));
    v.pass = std::fabs(v.ratio - c.value) <= v.tolerance;
    return v;
}

// ---------------------------------------------------------------------------
// Remainder decay probe
// ---------------------------------------------------------------------------

struct remainder_probe_result {
    double u = 0.0;
    double denominator = 0.0;
    std::uint64_t n_sims = 0;
    int horizon = 0;
    std::vector<int> n_list;
    std::vector<std::uint64_t> counts;
    std::vector<double> ratios;
    std::vector<double> stderrs;
    std::vector<double> taus;
    std::vector<std::uint64_t> tau_counts;
    std::vector<double> tau_ratios;
};

// Empirical P(|sum_{j>n} A_j Z_j| > u) / P(|Z| > u) for each n, plus the
// small-noise variant that keeps the whole sum but truncates every noise
// term to |Z_j| <= tau u. Suffix sums share one set of draws per simulation.
inline remainder_probe_result remainder_decay_probe(const series_model& model,
                                                    std::vector<int> n_list, double u,
                                                    std::vector<double> taus,
                                                    const estimate_options& opts = {}) {
    require(!n_list.empty(), errc::invalid_parameter, "empty n list");
    std::sort(n_list.begin(), n_list.end());
    require(n_list.front() >= 0, errc::invalid_parameter, "n must be >= 0");
    const double denom = model.noise.tail_prob(u);

    // Infinite-tail kinds draw up to the model's truncation horizon (at least
    // covering the deepest requested suffix); finite-support kinds emit their
    // full realization regardless of this cap.
    const int horizon_cap =
        std::max(model.coeffs.finite_support() ? 0 : model.resolve_truncation().horizon,
                 n_list.back() + 1);
    const int d = model.dim();
    const std::size_t n_probe = n_list.size();
    const std::size_t n_tau = taus.size();

    struct block_counts {
        std::vector<std::uint64_t> suffix_hits;
        std::vector<std::uint64_t> tau_hits;
    };

    const auto blocks = detail::run_blocks<block_counts>(
        opts.n_sims, opts.block_size, opts.workers,
        [&](std::uint64_t blk, std::uint64_t n) {
            rng_stream coeff(opts.seed, {stream_tag::probe, blk, stream_tag::coefficients});
            rng_stream noise(opts.seed, {stream_tag::probe, blk, stream_tag::noise});
            series_sampler sampler(model);
            block_counts out;
            out.suffix_hits.assign(n_probe, 0);
            out.tau_hits.assign(n_tau, 0);
            std::vector<double> terms, znorms;
            std::vector<double> acc(static_cast<std::size_t>(d));
            std::vector<double> tau_acc(static_cast<std::size_t>(n_tau * d));
            for (std::uint64_t i = 0; i < n; ++i) {
                sampler.draw_terms(coeff, noise, horizon_cap, terms, znorms);
                const int m = static_cast<int>(znorms.size());  // terms j = 0..m-1
                // suffixes over j > n, scanning j downward
                std::fill(acc.begin(), acc.end(), 0.0);
                auto probe_it = static_cast<std::ptrdiff_t>(n_probe) - 1;
                for (int j = std::max(m - 1, n_list.back() + 1); j >= 1; --j) {
                    if (j < m)
                        for (int k = 0; k < d; ++k)
                            acc[static_cast<std::size_t>(k)] += terms[static_cast<std::size_t>(j * d + k)];
                    while (probe_it >= 0 && n_list[static_cast<std::size_t>(probe_it)] == j - 1) {
                        if (euclidean_norm(acc.data(), d) > u)
                            ++out.suffix_hits[static_cast<std::size_t>(probe_it)];
                        --probe_it;
                    }
                }
                if (n_tau > 0) {
                    std::fill(tau_acc.begin(), tau_acc.end(), 0.0);
                    for (int j = 0; j < m; ++j)
                        for (std::size_t t = 0; t < n_tau; ++t)
                            if (znorms[static_cast<std::size_t>(j)] <= taus[t] * u)
                                for (int k = 0; k < d; ++k)
                                    tau_acc[t * static_cast<std::size_t>(d) + static_cast<std::size_t>(k)] +=
                                        terms[static_cast<std::size_t>(j * d + k)];
                    for (std::size_t t = 0; t < n_tau; ++t)
                        if (euclidean_norm(tau_acc.data() + t * static_cast<std::size_t>(d), d) > u)
                            ++out.tau_hits[t];
                }
            }
            return out;
        });

    remainder_probe_result res;
    res.u = u;
    res.denominator = denom;
    res.n_sims = opts.n_sims;
    res.horizon = horizon_cap;
    res.n_list = n_list;
    res.counts.assign(n_probe, 0);
    res.tau_counts.assign(n_tau, 0);
    res.taus = taus;
    for (const auto& blk : blocks) {
        for (std::size_t i = 0; i < n_probe; ++i) res.counts[i] += blk.suffix_hits[i];
        for (std::size_t t = 0; t < n_tau; ++t) res.tau_counts[t] += blk.tau_hits[t];
    }
    const double n = static_cast<double>(opts.n_sims);
    for (std::size_t i = 0; i < n_probe; ++i) {
        const double p = static_cast<double>(res.counts[i]) / n;
        res.ratios.push_back(p / denom);
        res.stderrs.push_back(std::sqrt(p * (1.0 - p) / n) / denom);
    }
    for (std::size_t t = 0; t < n_tau; ++t)
        res.tau_ratios.push_back(static_cast<double>(res.tau_counts[t]) / n / denom);
    return res;
}

// Draws |X| samples for tail-index diagnostics.
inline std::vector<double> sample_norms(const series_model& model, std::uint64_t n,
                                        std::uint64_t seed) {
    series_sampler sampler(model);
    rng_stream coeff(seed, {stream_tag::probe, 101, stream_tag::coefficients});
    rng_stream noise(seed, {stream_tag::probe, 101, stream_tag::noise});
    std::vector<double> out;
    out.reserve(n);
    std::vector<double> x(static_cast<std::size_t>(model.dim()));
    for (std::uint64_t i = 0; i < n; ++i) {
        sampler.draw(coeff, noise, x.data());
        out.push_back(euclidean_norm(x.data(), model.dim()));
    }
    return out;
}

}  // namespace tailseries

#endif  // TAILSERIES_ESTIMATION_HPP
