#ifndef TAILSERIES_MODELS_HPP
#define TAILSERIES_MODELS_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "tailseries/errors.hpp"
#include "tailseries/matrix.hpp"
#include "tailseries/regvar.hpp"
#include "tailseries/rng.hpp"

namespace tailseries {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Default Theorem-tolerance exponent: any 0 < eps < alpha works, so pick one
// well clear of the regime boundaries.
inline double default_epsilon(double alpha) {
    if (alpha == 1.0 || alpha == 2.0) return alpha / 8.0;
    const double gap = std::fmin(std::fmin(alpha, std::fabs(alpha - 1.0)),
                                 std::fmin(std::fabs(alpha - 2.0), 1.0));
    return gap / 4.0;
}

// ---------------------------------------------------------------------------
// Random matrix laws (SRE multipliers, iid coefficient entries)
// ---------------------------------------------------------------------------

class matrix_law {
  public:
    static matrix_law constant(mat m) {
        matrix_law l;
        l.kind_ = kind::constant;
        l.mat_ = std::move(m);
        return l;
    }
    static matrix_law constant_scalar(double v) { return constant(mat::scalar(v)); }

    // Uniform scalar on (lo, hi].
    static matrix_law uniform_scalar(double lo, double hi) {
        require(hi > lo, errc::invalid_parameter, "uniform law needs hi > lo");
        matrix_law l;
        l.kind_ = kind::uniform;
        l.lo_ = lo;
        l.hi_ = hi;
        return l;
    }

    // P(M = v1) = p1, P(M = v2) = 1 - p1.
    static matrix_law two_point_scalar(double v1, double v2, double p1) {
        require(p1 >= 0.0 && p1 <= 1.0, errc::invalid_parameter, "two-point probability in [0,1]");
        matrix_law l;
        l.kind_ = kind::two_point;
        l.v1_ = v1;
        l.v2_ = v2;
        l.p1_ = p1;
        return l;
    }

    bool is_scalar() const { return kind_ != kind::constant || (mat_.rows() == 1 && mat_.cols() == 1); }
    int rows() const { return kind_ == kind::constant ? mat_.rows() : 1; }
    int cols() const { return kind_ == kind::constant ? mat_.cols() : 1; }
    bool is_deterministic() const { return kind_ == kind::constant; }

    mat sample(rng_stream& s) const {
        switch (kind_) {
            case kind::constant: return mat_;
            case kind::uniform: return mat::scalar(s.uniform(lo_, hi_));
            case kind::two_point: return mat::scalar(s.unit() < p1_ ? v1_ : v2_);
        }
        return mat_;
    }

    double sample_scalar(rng_stream& s) const {
        switch (kind_) {
            case kind::constant: return mat_(0, 0);
            case kind::uniform: return s.uniform(lo_, hi_);
            case kind::two_point: return s.unit() < p1_ ? v1_ : v2_;
        }
        return 0.0;
    }

    // E ||M||^q, exact for every built-in law.
    double norm_moment(double q) const {
        switch (kind_) {
            case kind::constant: return std::pow(operator_norm(mat_), q);
            case kind::uniform: {
                // E|M|^q over uniform(lo,hi); split at zero when lo < 0.
                const double width = hi_ - lo_;
                auto piece = [&](double a, double b) {
                    return (std::pow(b, q + 1.0) - std::pow(a, q + 1.0)) / ((q + 1.0) * width);
                };
                if (lo_ >= 0.0) return piece(lo_, hi_);
                if (hi_ <= 0.0) return piece(-hi_, -lo_);
                return piece(0.0, -lo_) + piece(0.0, hi_);
            }
            case kind::two_point:
                return p1_ * std::pow(std::fabs(v1_), q) + (1.0 - p1_) * std::pow(std::fabs(v2_), q);
        }
        return 0.0;
    }

    // E[(M^+)^q] and E[(M^-)^q] for scalar laws (SRE closed-form constants).
    double signed_part_moment(double q, bool positive) const {
        require(is_scalar(), errc::unsupported, "signed moments need a scalar law");
        switch (kind_) {
            case kind::constant: {
                const double v = mat_(0, 0);
                const bool match = positive ? v > 0.0 : v < 0.0;
                return match ? std::pow(std::fabs(v), q) : 0.0;
            }
            case kind::uniform: {
                const double width = hi_ - lo_;
                auto piece = [&](double a, double b) {
                    if (b <= a) return 0.0;
                    return (std::pow(b, q + 1.0) - std::pow(a, q + 1.0)) / ((q + 1.0) * width);
                };
                if (positive) return piece(std::fmax(0.0, lo_), std::fmax(0.0, hi_));
                return piece(std::fmax(0.0, -hi_), std::fmax(0.0, -lo_));
            }
            case kind::two_point: {
                double r = 0.0;
                auto add = [&](double v, double p) {
                    const bool match = positive ? v > 0.0 : v < 0.0;
                    if (match) r += p * std::pow(std::fabs(v), q);
                };
                add(v1_, p1_);
                add(v2_, 1.0 - p1_);
                return r;
            }
        }
        return 0.0;
    }

    std::string describe() const {
        switch (kind_) {
            case kind::constant:
                return is_scalar() ? "constant(" + std::to_string(mat_(0, 0)) + ")" : "constant-matrix";
            case kind::uniform:
                return "uniform(" + std::to_string(lo_) + "," + std::to_string(hi_) + ")";
            case kind::two_point:
                return "two-point(" + std::to_string(v1_) + "," + std::to_string(v2_) + ";p=" +
                       std::to_string(p1_) + ")";
        }
        return "?";
    }

  private:
    enum class kind { constant, uniform, two_point };
    matrix_law() : mat_(mat::scalar(0.0)) {}

    kind kind_ = kind::constant;
    mat mat_;
    double lo_ = 0.0, hi_ = 1.0;
    double v1_ = 0.0, v2_ = 0.0, p1_ = 1.0;
};

// ---------------------------------------------------------------------------
// Positive integer laws for random sums
// ---------------------------------------------------------------------------

class count_law {
  public:
    static count_law constant(std::uint64_t n) {
        require(n >= 1, errc::invalid_parameter, "count must be >= 1");
        count_law l;
        l.kind_ = kind::constant;
        l.n0_ = n;
        return l;
    }

    // Geometric on {1, 2, ...} with the given mean.
    static count_law geometric(double mean) {
        require(mean >= 1.0, errc::invalid_parameter, "geometric mean must be >= 1");
        count_law l;
        l.kind_ = kind::geometric;
        l.theta_ = 1.0 / mean;
        return l;
    }

    // P(N = k) proportional to k^{-(beta+1)}: tail index beta, so E N^q is
    // finite exactly for q < beta.
    static count_law zeta(double beta) {
        require(beta > 0.0, errc::invalid_parameter, "zeta tail index must be positive");
        count_law l;
        l.kind_ = kind::zeta;
        l.beta_ = beta;
        l.zeta_norm_ = riemann_zeta(beta + 1.0);
        return l;
    }

    std::uint64_t sample(rng_stream& s) const {
        switch (kind_) {
            case kind::constant: return n0_;
            case kind::geometric: {
                if (theta_ >= 1.0) return 1;
                const double u = s.unit_pos();
                return 1 + static_cast<std::uint64_t>(std::floor(std::log(u) / std::log1p(-theta_)));
            }
            case kind::zeta: {
                // Exact sequential inversion; P(N=1) = 1/zeta(beta+1) keeps
                // the expected loop length small.
                const double u = s.unit() * zeta_norm_;
                double acc = 0.0;
                for (std::uint64_t k = 1; k < (1ULL << 40); ++k) {
                    acc += std::pow(static_cast<double>(k), -beta_ - 1.0);
                    if (u < acc) return k;
                }
                fail(errc::invalid_parameter, "zeta inversion overflow");
            }
        }
        return 1;
    }

    double mean() const {
        switch (kind_) {
            case kind::constant: return static_cast<double>(n0_);
            case kind::geometric: return 1.0 / theta_;
            case kind::zeta:
                return beta_ > 1.0 ? riemann_zeta(beta_) / zeta_norm_ : kInf;
        }
        return 1.0;
    }

    // Largest q with E N^q < infinity (infinite for light-tailed laws).
    double max_finite_moment() const { return kind_ == kind::zeta ? beta_ : kInf; }

    // E N^q; infinity when the moment diverges.
    double moment(double q) const {
        switch (kind_) {
            case kind::constant: return std::pow(static_cast<double>(n0_), q);
            case kind::geometric: {
                if (theta_ >= 1.0) return 1.0;
                double acc = 0.0;
                double lp = 1.0;  // (1-theta)^{k-1}
                for (std::uint64_t k = 1; k < (1ULL << 32); ++k) {
                    const double term = std::pow(static_cast<double>(k), q) * lp * theta_;
                    acc += term;
                    lp *= 1.0 - theta_;
                    if (term < 1e-17 * acc && static_cast<double>(k) * theta_ > q + 4.0) break;
                }
                return acc;
            }
            case kind::zeta:
                if (q >= beta_) return kInf;
                return riemann_zeta(beta_ + 1.0 - q) / zeta_norm_;
        }
        return 1.0;
    }

    // E (N - n)^+ = sum_{j > n} P(N >= j); the truncation remainder driver.
    double mean_excess(std::uint64_t n) const {
        switch (kind_) {
            case kind::constant: return n0_ > n ? static_cast<double>(n0_ - n) : 0.0;
            case kind::geometric: return std::pow(1.0 - theta_, static_cast<double>(n)) / theta_;
            case kind::zeta: {
                if (beta_ <= 1.0) return kInf;
                // sum_{j>n} P(N >= j) with an incrementally maintained pmf
                // head; the leftover tails decay like j^{-beta} and get an
                // integral-rule correction.
                double head = 0.0;  // sum_{k <= j-1} pmf-numerator
                double acc = 0.0;
                std::uint64_t j = 1;
                for (; j <= n + 2000000; ++j) {
                    const double t = 1.0 - head / zeta_norm_;  // P(N >= j)
                    if (j > n) {
                        acc += t;
                        if (t < 1e-14 * std::fmax(acc, 1e-300)) return acc;
                    }
                    head += std::pow(static_cast<double>(j), -beta_ - 1.0);
                }
                const double j0 = static_cast<double>(j);
                return acc + std::pow(j0, -beta_) * j0 / ((beta_ - 1.0) * beta_ * zeta_norm_);
            }
        }
        return 0.0;
    }

    // P(N > u).
    double tail(double u) const {
        if (u < 1.0) return 1.0;
        switch (kind_) {
            case kind::constant: return u < static_cast<double>(n0_) ? 1.0 : 0.0;
            case kind::geometric: return std::pow(1.0 - theta_, std::floor(u));
            case kind::zeta: {
                const auto ku = static_cast<std::uint64_t>(std::floor(u));
                double head = 0.0;
                for (std::uint64_t k = 1; k <= ku && k <= (1ULL << 22); ++k)
                    head += std::pow(static_cast<double>(k), -beta_ - 1.0);
                if (ku > (1ULL << 22))
                    return std::pow(u, -beta_) / (beta_ * zeta_norm_);  // integral approximation
                return 1.0 - head / zeta_norm_;
            }
        }
        return 0.0;
    }

    std::string describe() const {
        switch (kind_) {
            case kind::constant: return "constant(" + std::to_string(n0_) + ")";
            case kind::geometric: return "geometric(mean=" + std::to_string(1.0 / theta_) + ")";
            case kind::zeta: return "zeta(beta=" + std::to_string(beta_) + ")";
        }
        return "?";
    }

    // zeta(s) for s > 1 by Euler-Maclaurin: partial sum plus the first
    // correction terms; accurate well past 1e-12 for s >= 1.05.
    static double riemann_zeta(double s) {
        require(s > 1.0, errc::invalid_parameter, "zeta(s) needs s > 1");
        const double n = 64.0;
        double acc = 0.0;
        for (double k = 1.0; k < n; ++k) acc += std::pow(k, -s);
        const double ns = std::pow(n, -s);
        acc += ns * n / (s - 1.0) + 0.5 * ns + s * ns / (12.0 * n) -
               s * (s + 1.0) * (s + 2.0) * ns / (720.0 * n * n * n);
        return acc;
    }

  private:
    enum class kind { constant, geometric, zeta };
    count_law() = default;

    kind kind_ = kind::constant;
    std::uint64_t n0_ = 1;
    double theta_ = 1.0;
    double beta_ = 2.0;
    double zeta_norm_ = 1.0;
};

// ---------------------------------------------------------------------------
// Predictable integrand paths and interarrival laws (renewal-reward models)
// ---------------------------------------------------------------------------

class h_path {
  public:
    static h_path identity(int dim) {
        h_path h;
        h.kind_ = kind::identity;
        h.dim_ = dim;
        return h;
    }
    static h_path exp_decay(double rate, int dim = 1) {
        require(rate >= 0.0, errc::invalid_parameter, "decay rate must be nonnegative");
        h_path h;
        h.kind_ = kind::exp_decay;
        h.rate_ = rate;
        h.dim_ = dim;
        return h;
    }
    static h_path constant(mat m) {
        h_path h;
        h.kind_ = kind::constant;
        h.mat_ = std::move(m);
        h.dim_ = h.mat_.rows();
        return h;
    }

    int out_dim() const { return kind_ == kind::constant ? mat_.rows() : dim_; }
    int in_dim() const { return kind_ == kind::constant ? mat_.cols() : dim_; }
    bool is_identity() const { return kind_ == kind::identity; }

    mat eval(double t) const {
        switch (kind_) {
            case kind::identity: return mat::identity(dim_);
            case kind::exp_decay: return mat::identity(dim_) * std::exp(-rate_ * t);
            case kind::constant: return mat_;
        }
        return mat_;
    }

    double max_norm() const {
        switch (kind_) {
            case kind::identity:
            case kind::exp_decay: return 1.0;
            case kind::constant: return operator_norm(mat_);
        }
        return 1.0;
    }

  private:
    enum class kind { identity, exp_decay, constant };
    h_path() : mat_(mat::scalar(1.0)) {}
    kind kind_ = kind::identity;
    int dim_ = 1;
    double rate_ = 0.0;
    mat mat_;
};

class interarrival_law {
  public:
    static interarrival_law constant(double dt) {
        require(dt > 0.0, errc::invalid_parameter, "interarrival gap must be positive");
        interarrival_law l;
        l.exponential_ = false;
        l.param_ = dt;
        return l;
    }
    static interarrival_law exponential(double rate) {
        require(rate > 0.0, errc::invalid_parameter, "arrival rate must be positive");
        interarrival_law l;
        l.exponential_ = true;
        l.param_ = rate;
        return l;
    }

    double sample(rng_stream& s) const {
        return exponential_ ? -std::log(s.unit_pos()) / param_ : param_;
    }
    double mean() const { return exponential_ ? 1.0 / param_ : param_; }
    bool is_exponential() const { return exponential_; }
    double rate() const { return param_; }

  private:
    interarrival_law() = default;
    bool exponential_ = false;
    double param_ = 1.0;
};

// ---------------------------------------------------------------------------
// Coefficient processes
// ---------------------------------------------------------------------------

enum class coeff_kind {
    deterministic,
    iid_random,
    sre_product,
    random_sum_indicator,
    partial_sum,
    renewal_reward
};

inline const char* to_string(coeff_kind k) {
    switch (k) {
        case coeff_kind::deterministic: return "deterministic";
        case coeff_kind::iid_random: return "iid-random";
        case coeff_kind::sre_product: return "sre-product";
        case coeff_kind::random_sum_indicator: return "random-sum-indicator";
        case coeff_kind::partial_sum: return "partial-sum";
        case coeff_kind::renewal_reward: return "renewal-reward";
    }
    return "?";
}

struct moment_sum {
    double value = 0.0;  // +inf when divergent
    bool finite = true;
    bool exact = true;  // false when only an upper bound is available
};

// Generator of predictable coefficient sequences together with the declared
// norm envelope the condition checker consumes. The generator only ever reads
// the coefficient stream, so predictability with respect to the noise stream
// holds by construction.
class coefficient_process {
  public:
    // -- constructors ------------------------------------------------------
    static coefficient_process deterministic(std::vector<mat> mats) {
        require(!mats.empty(), errc::invalid_parameter, "empty coefficient list");
        coefficient_process p;
        p.kind_ = coeff_kind::deterministic;
        p.out_dim_ = mats.front().rows();
        p.in_dim_ = mats.front().cols();
        for (const auto& m : mats)
            require(m.rows() == p.out_dim_ && m.cols() == p.in_dim_, errc::invalid_parameter,
                    "coefficient matrices of mixed shape");
        p.fixed_ = std::move(mats);
        return p;
    }

    // A_j = base * ratio^j, |ratio| < 1.
    static coefficient_process geometric(mat base, double ratio) {
        require(std::fabs(ratio) < 1.0, errc::convergence_condition_failed,
                "geometric coefficient ratio must satisfy |ratio| < 1");
        coefficient_process p;
        p.kind_ = coeff_kind::deterministic;
        p.out_dim_ = base.rows();
        p.in_dim_ = base.cols();
        p.geo_base_ = std::move(base);
        p.geo_ratio_ = ratio;
        p.schedule_ = schedule::geometric;
        return p;
    }

    // A_0 = base, A_j = base * j^{-exponent} for j >= 1.
    static coefficient_process power(mat base, double exponent) {
        require(exponent > 0.0, errc::invalid_parameter, "power exponent must be positive");
        coefficient_process p;
        p.kind_ = coeff_kind::deterministic;
        p.out_dim_ = base.rows();
        p.in_dim_ = base.cols();
        p.geo_base_ = std::move(base);
        p.power_exp_ = exponent;
        p.schedule_ = schedule::power;
        return p;
    }

    static coefficient_process iid(std::vector<matrix_law> laws) {
        require(!laws.empty(), errc::invalid_parameter, "empty law list");
        coefficient_process p;
        p.kind_ = coeff_kind::iid_random;
        p.out_dim_ = laws.front().rows();
        p.in_dim_ = laws.front().cols();
        p.iid_laws_ = std::move(laws);
        return p;
    }

    static coefficient_process sre(matrix_law m) {
        require(m.rows() == m.cols(), errc::invalid_parameter, "SRE multiplier must be square");
        coefficient_process p;
        p.kind_ = coeff_kind::sre_product;
        p.out_dim_ = p.in_dim_ = m.rows();
        p.m_law_ = std::move(m);
        return p;
    }

    static coefficient_process random_sum(count_law n, int dim) {
        coefficient_process p;
        p.kind_ = coeff_kind::random_sum_indicator;
        p.out_dim_ = p.in_dim_ = dim;
        p.n_law_ = std::move(n);
        return p;
    }

    static coefficient_process renewal(h_path h, interarrival_law gap, double horizon) {
        require(horizon > 0.0, errc::invalid_parameter, "renewal horizon T must be positive");
        coefficient_process p;
        p.kind_ = coeff_kind::renewal_reward;
        p.out_dim_ = h.out_dim();
        p.in_dim_ = h.in_dim();
        p.h_ = std::move(h);
        p.gap_ = gap;
        p.horizon_t_ = horizon;
        // With exponential gaps there can be no renewal before T at all.
        p.nonzero_declared_ = !gap.is_exponential();
        return p;
    }

    // -- queries -----------------------------------------------------------
    coeff_kind kind() const { return kind_; }
    int out_dim() const { return out_dim_; }
    int in_dim() const { return in_dim_; }
    bool nonzero_declared() const { return nonzero_declared_; }
    void set_kind_label(coeff_kind k) { kind_ = k; }  // partial-sum results

    const count_law& counts() const { return n_law_.value(); }
    const matrix_law& multiplier() const { return m_law_.value(); }
    const std::vector<matrix_law>& iid_laws() const { return iid_laws_; }
    double renewal_horizon() const { return horizon_t_; }
    const h_path& integrand() const { return h_.value(); }
    const interarrival_law& gaps() const { return gap_.value(); }

    bool deterministic_coeffs() const {
        return kind_ == coeff_kind::deterministic || kind_ == coeff_kind::partial_sum;
    }

    // Coefficient support is finite almost surely (truncation-free kinds).
    bool finite_support() const {
        switch (kind_) {
            case coeff_kind::deterministic:
            case coeff_kind::partial_sum: return schedule_ == schedule::none;
            case coeff_kind::iid_random: return true;
            case coeff_kind::random_sum_indicator: return true;
            case coeff_kind::renewal_reward: return true;
            case coeff_kind::sre_product: return false;
        }
        return false;
    }

    // ||A_j|| for deterministic schedules.
    double deterministic_norm(std::size_t j) const {
        switch (schedule_) {
            case schedule::none:
                return j < fixed_.size() ? operator_norm(fixed_[j]) : 0.0;
            case schedule::geometric:
                return operator_norm(geo_base_) * std::pow(std::fabs(geo_ratio_), static_cast<double>(j));
            case schedule::power:
                return operator_norm(geo_base_) *
                       (j == 0 ? 1.0 : std::pow(static_cast<double>(j), -power_exp_));
        }
        return 0.0;
    }

    // sum_{j >= from} E ||A_j||^q. Exact where the envelope is exact, an
    // upper bound for matrix SRE chains (submultiplicative norm).
    moment_sum sum_norm_moment(double q, std::size_t from = 0) const {
        switch (kind_) {
            case coeff_kind::deterministic:
            case coeff_kind::partial_sum: {
                if (schedule_ == schedule::geometric) {
                    const double rq = std::pow(std::fabs(geo_ratio_), q);
                    const double cq = std::pow(operator_norm(geo_base_), q);
                    return {cq * std::pow(rq, static_cast<double>(from)) / (1.0 - rq), true, true};
                }
                if (schedule_ == schedule::power) {
                    const double cq = std::pow(operator_norm(geo_base_), q);
                    const double s = power_exp_ * q;
                    if (s <= 1.0) return {kInf, false, true};
                    double acc = from == 0 ? cq : 0.0;
                    const std::size_t j0 = std::max<std::size_t>(1, from);
                    std::size_t j = j0;
                    for (; j < j0 + 2000000; ++j) {
                        const double t = cq * std::pow(static_cast<double>(j), -s);
                        acc += t;
                        if (t < 1e-16 * std::fmax(acc, 1e-300)) break;
                    }
                    acc += cq * std::pow(static_cast<double>(j), 1.0 - s) / (s - 1.0);
                    return {acc, true, true};
                }
                double acc = 0.0;
                for (std::size_t j = from; j < fixed_.size(); ++j)
                    acc += std::pow(operator_norm(fixed_[j]), q);
                return {acc, true, true};
            }
            case coeff_kind::iid_random: {
                double acc = 0.0;
                for (std::size_t j = from; j < iid_laws_.size(); ++j)
                    acc += iid_laws_[j].norm_moment(q);
                return {acc, true, true};
            }
            case coeff_kind::sre_product: {
                // E||A_j||^q <= (E||M||^q)^j, equality for scalar chains.
                const double r = m_law_->norm_moment(q);
                const bool exact = m_law_->is_scalar();
                if (r >= 1.0) return {kInf, false, exact};
                return {std::pow(r, static_cast<double>(from)) / (1.0 - r), true, exact};
            }
            case coeff_kind::random_sum_indicator: {
                // ||A_j|| = 1{1 <= j <= N}: the sum is E(N - max(from-1,0))^+.
                const std::uint64_t n = from == 0 ? 0 : static_cast<std::uint64_t>(from - 1);
                const double v = n_law_->mean_excess(n);
                return {v, std::isfinite(v), true};
            }
            case coeff_kind::renewal_reward: {
                const double hq = std::pow(h_->max_norm(), q);
                if (!gap_->is_exponential()) {
                    const double n_t = std::floor(horizon_t_ / gap_->mean());
                    const double excess = std::fmax(0.0, n_t - (from == 0 ? 0.0 : static_cast<double>(from - 1)));
                    return {hq * excess, true, h_->is_identity()};
                }
                // Poisson(rate*T) count: E(N - n)^+ by direct summation.
                const double lambda = gap_->rate() * horizon_t_;
                const std::uint64_t n = from == 0 ? 0 : static_cast<std::uint64_t>(from - 1);
                double pmf = std::exp(-lambda), acc = 0.0;
                for (std::uint64_t k = 0; k < 100000; ++k) {
                    if (k > n) acc += static_cast<double>(k - n) * pmf;
                    pmf *= lambda / static_cast<double>(k + 1);
                    if (static_cast<double>(k) > lambda + 40.0 * std::sqrt(lambda) + 40.0) break;
                }
                return {hq * acc, true, false};
            }
        }
        return {kInf, false, false};
    }

    // Materialize one coefficient sequence A_0..A_n (horizon used only for
    // kinds without almost-surely finite support). Not the sampling hot path.
    std::vector<mat> draw_coefficients(rng_stream& coeff, int horizon) const {
        std::vector<mat> out;
        switch (kind_) {
            case coeff_kind::deterministic:
            case coeff_kind::partial_sum: {
                if (schedule_ == schedule::none) {
                    out = fixed_;
                } else {
                    out.reserve(static_cast<std::size_t>(horizon) + 1);
                    for (int j = 0; j <= horizon; ++j) {
                        if (schedule_ == schedule::geometric)
                            out.push_back(geo_base_ * std::pow(geo_ratio_, j));
                        else
                            out.push_back(geo_base_ * (j == 0 ? 1.0 : std::pow(double(j), -power_exp_)));
                    }
                }
                break;
            }
            case coeff_kind::iid_random:
                out.reserve(iid_laws_.size());
                for (const auto& law : iid_laws_) out.push_back(law.sample(coeff));
                break;
            case coeff_kind::sre_product: {
                out.reserve(static_cast<std::size_t>(horizon) + 1);
                mat prod = mat::identity(out_dim_);
                out.push_back(prod);
                for (int j = 1; j <= horizon; ++j) {
                    prod = prod * m_law_->sample(coeff);
                    out.push_back(prod);
                }
                break;
            }
            case coeff_kind::random_sum_indicator: {
                const std::uint64_t n = n_law_->sample(coeff);
                out.reserve(n + 1);
                out.push_back(mat(out_dim_, in_dim_));  // A_0 = 0
                for (std::uint64_t j = 1; j <= n; ++j) out.push_back(mat::identity(out_dim_));
                break;
            }
            case coeff_kind::renewal_reward: {
                out.push_back(mat(out_dim_, in_dim_));  // A_0 = 0
                double t = gap_->sample(coeff);
                while (t <= horizon_t_) {
                    out.push_back(h_->eval(t));
                    t += gap_->sample(coeff);
                }
                break;
            }
        }
        return out;
    }

    std::string describe() const {
        std::string s = to_string(kind_);
        switch (kind_) {
            case coeff_kind::sre_product: s += "[" + m_law_->describe() + "]"; break;
            case coeff_kind::random_sum_indicator: s += "[" + n_law_->describe() + "]"; break;
            default: break;
        }
        return s;
    }

  private:
    enum class schedule { none, geometric, power };
    coefficient_process() = default;

    coeff_kind kind_ = coeff_kind::deterministic;
    int out_dim_ = 1, in_dim_ = 1;
    bool nonzero_declared_ = true;

    std::vector<mat> fixed_;
    schedule schedule_ = schedule::none;
    mat geo_base_;
    double geo_ratio_ = 0.0;
    double power_exp_ = 0.0;

    std::optional<matrix_law> m_law_;
    std::vector<matrix_law> iid_laws_;
    std::optional<count_law> n_law_;
    std::optional<h_path> h_;
    std::optional<interarrival_law> gap_;
    double horizon_t_ = 0.0;

    friend class series_sampler;
};

// B_{n,i} = sum_{k = max(1,i)}^{n} A_{k,k-i} rewritten as the one-sided
// coefficient list A'_j = B_{n,n-j}. The schedule is a deterministic array
// A_{k,j} with lags 0..max_lag.
template <typename Schedule>
coefficient_process partial_sum_coefficients(const Schedule& a, int n, int max_lag, int rows = 1,
                                             int cols = 1) {
    require(n >= 1, errc::invalid_parameter, "horizon must be >= 1");
    require(max_lag >= 0, errc::invalid_parameter, "max lag must be >= 0");
    std::vector<mat> coeffs;
    // j = n - i runs from 0 (i = n) to n - 1 + max_lag (i = 1 - max_lag).
    for (int j = 0; j <= n - 1 + max_lag; ++j) {
        const int i = n - j;
        mat b(rows, cols);
        const int k_lo = std::max(1, i);
        const int k_hi = std::min(n, i + max_lag);
        for (int k = k_lo; k <= k_hi; ++k) {
            const mat term = a(k, k - i);
            for (int r = 0; r < rows; ++r)
                for (int c = 0; c < cols; ++c) b(r, c) += term(r, c);
        }
        coeffs.push_back(std::move(b));
    }
    while (coeffs.size() > 1 && coeffs.back().is_zero()) coeffs.pop_back();
    auto p = coefficient_process::deterministic(std::move(coeffs));
    p.set_kind_label(coeff_kind::partial_sum);
    return p;
}

// ---------------------------------------------------------------------------
// Truncation policy and the series model
// ---------------------------------------------------------------------------

class truncation_policy {
  public:
    static truncation_policy fixed(int n) {
        require(n >= 0, errc::invalid_parameter, "truncation index must be >= 0");
        truncation_policy t;
        t.fixed_n_ = n;
        return t;
    }
    static truncation_policy tail_budget(double delta) {
        require(delta > 0.0, errc::invalid_parameter, "tail budget must be positive");
        truncation_policy t;
        t.budget_ = delta;
        return t;
    }

    bool is_fixed() const { return fixed_n_ >= 0; }
    int fixed_n() const { return fixed_n_; }
    double budget() const { return budget_; }

  private:
    truncation_policy() = default;
    int fixed_n_ = -1;
    double budget_ = 0.0;
};

struct truncation_resolution {
    int horizon = 0;          // keep terms j = 0..horizon
    double remainder_bound = 0.0;
    double exponent = 1.0;    // moment order used in the bound
};

struct series_model {
    regvar_law noise;
    coefficient_process coeffs;
    truncation_policy trunc;
    double epsilon;
    bool gate_passed = false;
    bool gate_override = false;
    // Remark-3.2 route: noise mean nonzero but the S_A tail condition is
    // declared (checked separately by the nonzero-mean probe).
    bool nonzero_mean_declared = false;
    std::string id;

    int dim() const { return coeffs.out_dim(); }

    series_model(regvar_law z, coefficient_process a, truncation_policy t,
                 double eps = -1.0)
        : noise(std::move(z)), coeffs(std::move(a)), trunc(t),
          epsilon(eps > 0.0 ? eps : default_epsilon(noise.alpha())) {
        require(epsilon < noise.alpha(), errc::invalid_parameter, "epsilon must satisfy 0 < eps < alpha");
        require(coeffs.in_dim() == noise.dimension(), errc::invalid_parameter,
                "coefficient/noise dimension mismatch");
    }

    bool sampling_allowed() const { return gate_passed || gate_override; }

    // Zero-mean contract of the main theorem: alpha > 1 requires a zero-forced
    // noise unless the model runs on a declared nonzero-mean route (SRE chains
    // and models with a declared S_A tail bound).
    bool zero_mean_contract_ok() const {
        if (noise.alpha() <= 1.0) return true;
        if (noise.mode() == mean_mode::zero_forced) return true;
        if (coeffs.kind() == coeff_kind::sre_product) return true;
        return nonzero_mean_declared;
    }

    // Remainder-bound moment order: subadditivity below order one, the
    // triangle inequality at order one, the L2 isometry above alpha = 2.
    double truncation_exponent() const {
        const double a = noise.alpha();
        return a > 2.0 ? 2.0 : std::fmin(a - epsilon, 1.0);
    }

    truncation_resolution resolve_truncation() const {
        truncation_resolution r;
        r.exponent = truncation_exponent();
        if (coeffs.finite_support()) {
            r.horizon = 0;
            r.remainder_bound = 0.0;
            return r;
        }
        if (trunc.is_fixed()) {
            r.horizon = trunc.fixed_n();
            const auto s = coeffs.sum_norm_moment(r.exponent, static_cast<std::size_t>(r.horizon));
            r.remainder_bound = s.value;
            return r;
        }
        const double target = noise.alpha() > 2.0 ? trunc.budget() * trunc.budget() : trunc.budget();
        for (int n = 0; n < 100000; ++n) {
            const auto s = coeffs.sum_norm_moment(r.exponent, static_cast<std::size_t>(n));
            require(s.finite, errc::convergence_condition_failed,
                    "tail-budget truncation needs a summable norm envelope");
            if (s.value <= target) {
                r.horizon = n;
                r.remainder_bound = s.value;
                return r;
            }
        }
        fail(errc::convergence_condition_failed, "tail budget unattainable within 1e5 terms");
    }
};

// -- named model constructors (the catalogue of worked examples) ------------

inline series_model linear_process(std::vector<mat> a_list, regvar_law noise,
                                   truncation_policy t = truncation_policy::fixed(0),
                                   double eps = -1.0) {
    series_model m(std::move(noise), coefficient_process::deterministic(std::move(a_list)), t, eps);
    return m;
}

inline void validate_linear_envelope(const series_model& m) {
    const double a = m.noise.alpha();
    const double q = a > 2.0 ? 2.0 : a - m.epsilon;
    const auto s = m.coeffs.sum_norm_moment(q);
    require(s.finite, errc::convergence_condition_failed,
            "declared coefficient envelope diverges at order " + std::to_string(q));
}

inline series_model linear_process_geometric(mat base, double ratio, regvar_law noise,
                                             truncation_policy t, double eps = -1.0) {
    series_model m(std::move(noise), coefficient_process::geometric(std::move(base), ratio), t, eps);
    validate_linear_envelope(m);
    return m;
}

inline series_model linear_process_power(mat base, double exponent, regvar_law noise,
                                         truncation_policy t, double eps = -1.0) {
    series_model m(std::move(noise), coefficient_process::power(std::move(base), exponent), t, eps);
    validate_linear_envelope(m);
    return m;
}

inline series_model sre_model(matrix_law mlaw, regvar_law noise, truncation_policy t,
                              double eps = -1.0) {
    series_model m(std::move(noise), coefficient_process::sre(std::move(mlaw)), t, eps);
    const double q = m.noise.alpha() + m.epsilon;
    const double r = m.coeffs.multiplier().norm_moment(q);
    require(r < 1.0, errc::sre_noncontractive,
            "E||M||^(alpha+eps) = " + std::to_string(r) + " >= 1");
    return m;
}

inline series_model random_sum_model(count_law n, regvar_law noise,
                                     truncation_policy t = truncation_policy::fixed(0),
                                     double eps = -1.0) {
    series_model m(noise, coefficient_process::random_sum(std::move(n), noise.dimension()), t, eps);
    const double a = m.noise.alpha();
    const double beta = m.coeffs.counts().max_finite_moment();
    // Conditions on N by regime: EN for alpha in (0,1) u (1,2), EN^{1+tau}
    // at the boundary alphas, EN^{alpha/2+tau} above 2.
    bool ok;
    if (a == 1.0 || a == 2.0)
        ok = beta > 1.0;
    else if (a < 2.0)
        ok = std::isfinite(m.coeffs.counts().mean()) && beta >= 1.0;
    else
        ok = beta > a / 2.0;
    require(ok, errc::convergence_condition_failed,
            "count law lacks the moment required for alpha = " + std::to_string(a));
    return m;
}

inline series_model renewal_reward_integral_model(h_path h, interarrival_law gap, regvar_law jumps,
                                                  double horizon_t,
                                                  truncation_policy t = truncation_policy::fixed(0),
                                                  double eps = -1.0) {
    series_model m(std::move(jumps), coefficient_process::renewal(std::move(h), gap, horizon_t), t,
                   eps);
    return m;
}

// The one-term convenience model X = Z.
inline series_model noise_only_model(regvar_law noise) {
    const int d = noise.dimension();
    return linear_process({mat::identity(d)}, std::move(noise));
}

// ---------------------------------------------------------------------------
// Sampler
// ---------------------------------------------------------------------------

struct series_draw_diag {
    std::uint64_t n_used = 0;
    double remainder_bound = 0.0;
};

// Draws X = sum_{j<=n} A_j Z_j without allocating per draw. Coefficient
// randomness and noise randomness come from two separate streams, which is
// what realizes the predictability contract.
class series_sampler {
  public:
    explicit series_sampler(const series_model& m) : model_(&m) {
        require(m.sampling_allowed(), errc::refuse_to_sample,
                "model has not passed the condition check (or an explicit override)");
        require(m.zero_mean_contract_ok(), errc::refuse_to_sample,
                "alpha > 1 requires zero-forced noise or a declared nonzero-mean route");
        const auto res = m.resolve_truncation();
        horizon_ = res.horizon;
        remainder_ = res.remainder_bound;
        zbuf_.assign(static_cast<std::size_t>(m.noise.dimension()), 0.0);
        if (m.coeffs.kind() == coeff_kind::sre_product && m.dim() > 1)
            prod_ = mat::identity(m.dim());
    }

    int horizon() const { return horizon_; }
    double remainder_bound() const { return remainder_; }

    series_draw_diag draw(rng_stream& coeff, rng_stream& noise, double* out) {
        const auto& cp = model_->coeffs;
        const int d = model_->dim();
        for (int k = 0; k < d; ++k) out[k] = 0.0;
        series_draw_diag diag;
        diag.remainder_bound = remainder_;

        switch (cp.kind_) {
            case coeff_kind::deterministic:
            case coeff_kind::partial_sum: {
                if (cp.schedule_ == coefficient_process::schedule::none) {
                    for (const auto& a : cp.fixed_) {
                        model_->noise.sample_into(noise, zbuf_.data());
                        a.apply_accumulate(zbuf_.data(), out);
                    }
                    diag.n_used = cp.fixed_.empty() ? 0 : cp.fixed_.size() - 1;
                    diag.remainder_bound = 0.0;
                } else if (cp.schedule_ == coefficient_process::schedule::geometric) {
                    double scale = 1.0;
                    for (int j = 0; j <= horizon_; ++j) {
                        model_->noise.sample_into(noise, zbuf_.data());
                        cp.geo_base_.apply_accumulate(zbuf_.data(), out, scale);
                        scale *= cp.geo_ratio_;
                    }
                    diag.n_used = static_cast<std::uint64_t>(horizon_);
                } else {
                    for (int j = 0; j <= horizon_; ++j) {
                        const double scale = j == 0 ? 1.0 : std::pow(double(j), -cp.power_exp_);
                        model_->noise.sample_into(noise, zbuf_.data());
                        cp.geo_base_.apply_accumulate(zbuf_.data(), out, scale);
                    }
                    diag.n_used = static_cast<std::uint64_t>(horizon_);
                }
                break;
            }
            case coeff_kind::iid_random: {
                for (const auto& law : cp.iid_laws_) {
                    const mat a = law.sample(coeff);
                    model_->noise.sample_into(noise, zbuf_.data());
                    a.apply_accumulate(zbuf_.data(), out);
                }
                diag.n_used = cp.iid_laws_.size() - 1;
                diag.remainder_bound = 0.0;
                break;
            }
            case coeff_kind::sre_product: {
                if (d == 1) {
                    model_->noise.sample_into(noise, zbuf_.data());
                    out[0] = zbuf_[0];
                    double prod = 1.0;
                    for (int j = 1; j <= horizon_; ++j) {
                        prod *= cp.m_law_->sample_scalar(coeff);
                        model_->noise.sample_into(noise, zbuf_.data());
                        out[0] += prod * zbuf_[0];
                    }
                } else {
                    model_->noise.sample_into(noise, zbuf_.data());
                    for (int k = 0; k < d; ++k) out[k] = zbuf_[static_cast<std::size_t>(k)];
                    prod_ = mat::identity(d);
                    for (int j = 1; j <= horizon_; ++j) {
                        prod_ = prod_ * cp.m_law_->sample(coeff);
                        model_->noise.sample_into(noise, zbuf_.data());
                        prod_.apply_accumulate(zbuf_.data(), out);
                    }
                }
                diag.n_used = static_cast<std::uint64_t>(horizon_);
                break;
            }
            case coeff_kind::random_sum_indicator: {
                const std::uint64_t n = cp.n_law_->sample(coeff);
                for (std::uint64_t j = 1; j <= n; ++j) {
                    model_->noise.sample_into(noise, zbuf_.data());
                    for (int k = 0; k < d; ++k) out[k] += zbuf_[static_cast<std::size_t>(k)];
                }
                diag.n_used = n;
                diag.remainder_bound = 0.0;
                break;
            }
            case coeff_kind::renewal_reward: {
                double t = cp.gap_->sample(coeff);
                std::uint64_t n = 0;
                while (t <= cp.horizon_t_) {
                    const mat a = cp.h_->eval(t);
                    model_->noise.sample_into(noise, zbuf_.data());
                    a.apply_accumulate(zbuf_.data(), out);
                    ++n;
                    t += cp.gap_->sample(coeff);
                }
                diag.n_used = n;
                diag.remainder_bound = 0.0;
                break;
            }
        }
        return diag;
    }

    // Fills `terms` with the individual summands A_j Z_j (d doubles per term)
    // and `znorms` with the noise norms |Z_j|. Kinds with almost-surely finite
    // support emit their full realization, growing the buffers as needed;
    // infinite-tail kinds emit horizon_cap + 1 terms. Remainder probes
    // consume these; the vectors keep their capacity across draws.
    std::uint64_t draw_terms(rng_stream& coeff, rng_stream& noise, int horizon_cap,
                             std::vector<double>& terms, std::vector<double>& znorms) {
        const auto& cp = model_->coeffs;
        const int d = model_->dim();
        terms.clear();
        znorms.clear();
        auto put = [&](const mat& a, double scale = 1.0) {
            model_->noise.sample_into(noise, zbuf_.data());
            znorms.push_back(euclidean_norm(zbuf_.data(), model_->noise.dimension()));
            terms.resize(terms.size() + static_cast<std::size_t>(d), 0.0);
            a.apply_accumulate(zbuf_.data(), terms.data() + terms.size() - static_cast<std::size_t>(d),
                               scale);
        };
        auto put_zero = [&]() {
            znorms.push_back(0.0);
            terms.resize(terms.size() + static_cast<std::size_t>(d), 0.0);
        };
        switch (cp.kind_) {
            case coeff_kind::deterministic:
            case coeff_kind::partial_sum: {
                if (cp.schedule_ == coefficient_process::schedule::none) {
                    for (const auto& a : cp.fixed_) put(a);
                    return cp.fixed_.size() - 1;
                }
                double scale = 1.0;
                for (int j = 0; j <= horizon_cap; ++j) {
                    if (cp.schedule_ == coefficient_process::schedule::geometric) {
                        put(cp.geo_base_, scale);
                        scale *= cp.geo_ratio_;
                    } else {
                        put(cp.geo_base_, j == 0 ? 1.0 : std::pow(double(j), -cp.power_exp_));
                    }
                }
                return static_cast<std::uint64_t>(horizon_cap);
            }
            case coeff_kind::iid_random: {
                for (const auto& law : cp.iid_laws_) put(law.sample(coeff));
                return cp.iid_laws_.size() - 1;
            }
            case coeff_kind::sre_product: {
                if (d == 1) {
                    double prod = 1.0;
                    for (int j = 0; j <= horizon_cap; ++j) {
                        if (j > 0) prod *= cp.m_law_->sample_scalar(coeff);
                        const double z = model_->noise.sample_scalar(noise);
                        terms.push_back(prod * z);
                        znorms.push_back(std::fabs(z));
                    }
                } else {
                    prod_ = mat::identity(d);
                    for (int j = 0; j <= horizon_cap; ++j) {
                        if (j > 0) prod_ = prod_ * cp.m_law_->sample(coeff);
                        put(prod_);
                    }
                }
                return static_cast<std::uint64_t>(horizon_cap);
            }
            case coeff_kind::random_sum_indicator: {
                const std::uint64_t n = cp.n_law_->sample(coeff);
                const mat id = mat::identity(d);
                put_zero();  // A_0 = 0
                for (std::uint64_t j = 1; j <= n; ++j) put(id);
                return n;
            }
            case coeff_kind::renewal_reward: {
                put_zero();  // A_0 = 0
                double t = cp.gap_->sample(coeff);
                std::uint64_t n = 0;
                while (t <= cp.horizon_t_) {
                    ++n;
                    put(cp.h_->eval(t));
                    t += cp.gap_->sample(coeff);
                }
                return n;
            }
        }
        return 0;
    }

  private:
    const series_model* model_;
    int horizon_ = 0;
    double remainder_ = 0.0;
    vec zbuf_;
    mat prod_;
};

}  // namespace tailseries

#endif  // TAILSERIES_MODELS_HPP
