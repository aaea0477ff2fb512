#ifndef TAILSERIES_REGVAR_HPP
#define TAILSERIES_REGVAR_HPP

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "tailseries/detail/quadrature.hpp"
#include "tailseries/errors.hpp"
#include "tailseries/matrix.hpp"
#include "tailseries/rng.hpp"

namespace tailseries {

struct spectral_atom {
    vec direction;  // unit vector
    double weight;  // >= 0; weights over a law sum to 1
};

enum class law_family { pareto_polar, symmetrized_pareto_1d, centered_pareto_1d };
enum class mean_mode { none, zero_forced };

inline const char* to_string(law_family f) {
    switch (f) {
        case law_family::pareto_polar: return "pareto-polar";
        case law_family::symmetrized_pareto_1d: return "symmetrized-pareto-1d";
        case law_family::centered_pareto_1d: return "centered-pareto-1d";
    }
    return "?";
}

inline const char* to_string(mean_mode m) {
    return m == mean_mode::none ? "none" : "zero-forced";
}

// A sampleable law with a polar decomposition Z = R * S - m, where S is a
// direction drawn from discrete spectral atoms, R is exactly Pareto(alpha)
// above `scale`, and m is an analytic centering shift (zero unless the law
// is zero-forced). The exceedance function P(|Z| > u) is exact in closed
// form for every member, which is what makes simulated tail ratios cheap to
// normalize.
class regvar_law {
  public:
    static regvar_law make(double alpha, std::vector<spectral_atom> atoms, law_family family,
                           double scale, mean_mode mode = mean_mode::none) {
        require(alpha > 0.0, errc::invalid_parameter, "alpha must be positive");
        require(scale > 0.0, errc::invalid_parameter, "scale must be positive");
        require(!atoms.empty(), errc::invalid_spectral_measure, "spectral atom list is empty");

        double total = 0.0;
        const std::size_t d = atoms.front().direction.size();
        for (auto& a : atoms) {
            require(a.weight >= 0.0, errc::invalid_spectral_measure, "negative spectral weight");
            require(a.direction.size() == d, errc::invalid_spectral_measure,
                    "spectral directions of mixed dimension");
            const double n = euclidean_norm(a.direction);
            require(n > 0.0, errc::invalid_spectral_measure, "zero spectral direction");
            for (double& c : a.direction) c /= n;
            total += a.weight;
        }
        require(total > 0.0, errc::invalid_spectral_measure, "all spectral weights are zero");
        for (auto& a : atoms) a.weight /= total;

        regvar_law law;
        law.alpha_ = alpha;
        law.scale_ = scale;
        law.family_ = family;
        law.atoms_ = std::move(atoms);
        law.dim_ = static_cast<int>(d);

        switch (family) {
            case law_family::symmetrized_pareto_1d:
                require(law.dim_ == 1, errc::invalid_parameter, "symmetrized family is one-dimensional");
                require(std::fabs(law.positive_weight() - 0.5) <= 1e-12, errc::invalid_parameter,
                        "symmetrized family needs equal +/- spectral weights");
                break;
            case law_family::centered_pareto_1d:
                require(law.dim_ == 1, errc::invalid_parameter, "centered family is one-dimensional");
                require(alpha > 1.0, errc::invalid_parameter,
                        "centered family needs alpha > 1 for a finite mean");
                mode = mean_mode::zero_forced;
                break;
            case law_family::pareto_polar:
                break;
        }
        law.mode_ = mode;

        // Analytic centering: subtract the exact polar mean
        // (alpha/(alpha-1)) * scale * sum_i w_i s_i. Balanced atom sets need
        // no shift; one-sided or lopsided sets need alpha > 1.
        law.shift_.assign(d, 0.0);
        if (mode == mean_mode::zero_forced) {
            vec sbar(d, 0.0);
            for (const auto& a : law.atoms_)
                for (std::size_t k = 0; k < d; ++k) sbar[k] += a.weight * a.direction[k];
            if (euclidean_norm(sbar) > 1e-14) {
                require(alpha > 1.0, errc::cannot_center,
                        "zero-forced mean needs alpha > 1 or balanced spectral atoms");
                const double m = alpha / (alpha - 1.0) * scale;
                for (std::size_t k = 0; k < d; ++k) law.shift_[k] = m * sbar[k];
            }
        }

        law.cum_weights_.reserve(law.atoms_.size());
        double acc = 0.0;
        for (const auto& a : law.atoms_) {
            acc += a.weight;
            law.cum_weights_.push_back(acc);
        }
        law.cum_weights_.back() = 1.0;
        law.shift_norm2_ = 0.0;
        for (double v : law.shift_) law.shift_norm2_ += v * v;
        return law;
    }

    // One-sided Pareto(alpha) on [scale, inf).
    static regvar_law pareto(double alpha, double scale = 1.0) {
        return make(alpha, {{{1.0}, 1.0}}, law_family::pareto_polar, scale);
    }

    // Two-sided with P(Z > u)/P(|Z| > u) -> w.
    static regvar_law two_sided(double alpha, double w, double scale = 1.0) {
        require(w >= 0.0 && w <= 1.0, errc::invalid_parameter, "w must lie in [0,1]");
        return make(alpha, {{{1.0}, w}, {{-1.0}, 1.0 - w}}, law_family::pareto_polar, scale);
    }

    static regvar_law symmetrized(double alpha, double scale = 1.0) {
        return make(alpha, {{{1.0}, 0.5}, {{-1.0}, 0.5}}, law_family::symmetrized_pareto_1d, scale,
                    mean_mode::zero_forced);
    }

    static regvar_law centered(double alpha, double scale = 1.0) {
        return make(alpha, {{{1.0}, 1.0}}, law_family::centered_pareto_1d, scale,
                    mean_mode::zero_forced);
    }

    double alpha() const { return alpha_; }
    double scale() const { return scale_; }
    int dimension() const { return dim_; }
    law_family family() const { return family_; }
    mean_mode mode() const { return mode_; }
    const std::vector<spectral_atom>& atoms() const { return atoms_; }
    const vec& shift() const { return shift_; }
    bool is_shifted() const { return shift_norm2_ > 0.0; }

    // Spectral mass on the positive half-line (one-dimensional laws).
    double positive_weight() const {
        require(dim_ == 1, errc::unsupported, "positive_weight needs a one-dimensional law");
        double w = 0.0;
        for (const auto& a : atoms_)
            if (a.direction[0] > 0.0) w += a.weight;
        return w;
    }

    // Exact P(|Z| > u) for u >= scale.
    double tail_prob(double u) const {
        require(u >= scale_, errc::out_of_domain, "tail function valid for u >= scale");
        if (!is_shifted()) return std::pow(u / scale_, -alpha_);
        double p = 0.0;
        for (std::size_t i = 0; i < atoms_.size(); ++i) p += atoms_[i].weight * shifted_atom_tail(i, u);
        return p;
    }

    // Inverse of tail_prob. Exact power inversion for unshifted laws,
    // bisection on the closed form otherwise.
    double tail_quantile(double q) const {
        require(q > 0.0 && q <= 1.0, errc::invalid_parameter, "quantile level must be in (0,1]");
        if (!is_shifted()) return scale_ * std::pow(q, -1.0 / alpha_);
        double lo = scale_, hi = 2.0 * scale_;
        int guard = 0;
        while (tail_prob(hi) > q) {
            hi *= 2.0;
            require(++guard < 2000, errc::invalid_parameter, "quantile bracket overflow");
        }
        for (int it = 0; it < 200 && (hi - lo) > 1e-15 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            (tail_prob(mid) > q ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }

    void sample_into(rng_stream& s, double* out) const {
        const spectral_atom& a = atoms_.size() == 1 ? atoms_.front() : pick_atom(s.unit());
        const double r = scale_ * std::pow(s.unit_pos(), -1.0 / alpha_);
        for (int k = 0; k < dim_; ++k) out[k] = r * a.direction[k] - shift_[static_cast<std::size_t>(k)];
    }

    double sample_scalar(rng_stream& s) const {
        require(dim_ == 1, errc::unsupported, "scalar sampling needs a one-dimensional law");
        double z;
        sample_into(s, &z);
        return z;
    }

    std::vector<vec> sample(rng_stream& s, std::size_t n) const {
        require(n >= 1, errc::invalid_parameter, "sample count must be positive");
        std::vector<vec> out(n, vec(static_cast<std::size_t>(dim_)));
        for (auto& z : out) sample_into(s, z.data());
        return out;
    }

    // E |Z|^p I{|Z| <= x}. Closed form when |Z| is exactly the Pareto radius;
    // adaptive quadrature on the exact density for shifted laws.
    double truncated_abs_moment(double p, double x) const {
        require(p > 0.0, errc::invalid_parameter, "moment order must be positive");
        require(x >= scale_, errc::out_of_domain, "truncation level below scale");
        if (!is_shifted()) return radius_truncated_moment(p, x);
        require(dim_ == 1, errc::unsupported, "shifted truncated moments only implemented in d=1");
        const double m = shift_[0];
        double total = 0.0;
        for (const auto& a : atoms_) {
            if (a.weight == 0.0) continue;
            const double s = a.direction[0];
            // Z = s*R - m on this branch; R has density alpha*scale^alpha*r^{-alpha-1}.
            auto dens = [&](double z) {
                const double r = (z + m) / s;  // s = +-1
                return alpha_ * std::pow(scale_, alpha_) * std::pow(r, -alpha_ - 1.0);
            };
            // Branch support in z: s=+1 -> [scale-m, inf); s=-1 -> (-inf, -scale-m].
            double lo, hi;
            if (s > 0.0) {
                lo = std::fmax(scale_ - m, -x);
                hi = x;
            } else {
                lo = -x;
                hi = std::fmin(-scale_ - m, x);
            }
            if (lo >= hi) continue;
            auto f = [&](double z) { return std::pow(std::fabs(z), p) * dens(z); };
            double part = 0.0;
            if (lo < 0.0 && hi > 0.0) {
                part = detail::integrate(f, lo, 0.0, 1e-13) + detail::integrate(f, 0.0, hi, 1e-13);
            } else {
                part = detail::integrate(f, lo, hi, 1e-13);
            }
            total += a.weight * part;
        }
        return total;
    }

    // Karamata first-order approximation alpha/(p-alpha) * x^p * P(|Z| > x)
    // to the truncated moment of order p > alpha.
    double karamata_asymptote(double p, double x) const {
        require(p > alpha_, errc::invalid_parameter,
                "karamata asymptote needs p > alpha (tail-dominated moment)");
        require(x >= scale_, errc::out_of_domain, "evaluation point below scale");
        return alpha_ / (p - alpha_) * std::pow(x, p) * tail_prob(x);
    }

    // E R for the polar radius (finite for alpha > 1).
    double mean_radius() const {
        require(alpha_ > 1.0, errc::invalid_parameter, "radius mean infinite for alpha <= 1");
        return alpha_ / (alpha_ - 1.0) * scale_;
    }

    std::string describe() const {
        std::string s = std::string(to_string(family_)) + "(alpha=" + std::to_string(alpha_) +
                        ", scale=" + std::to_string(scale_) + ", atoms=" +
                        std::to_string(atoms_.size()) + ", mean=" + to_string(mode_) + ")";
        return s;
    }

  private:
    regvar_law() = default;

    const spectral_atom& pick_atom(double u) const {
        std::size_t i = 0;
        while (i + 1 < cum_weights_.size() && u >= cum_weights_[i]) ++i;
        return atoms_[i];
    }

    // P(|R s_i - m| > u) for the Pareto radius R; the quadratic in R
    // R^2 - 2 <s_i, m> R + (|m|^2 - u^2) > 0 has closed-form roots.
    double shifted_atom_tail(std::size_t i, double u) const {
        double c = 0.0;
        for (int k = 0; k < dim_; ++k)
            c += atoms_[i].direction[static_cast<std::size_t>(k)] * shift_[static_cast<std::size_t>(k)];
        const double disc = c * c - shift_norm2_ + u * u;
        if (disc < 0.0) return 1.0;
        const double root = std::sqrt(disc);
        const double rlo = c - root, rhi = c + root;
        double p = 0.0;
        if (rlo > scale_) p += 1.0 - std::pow(rlo / scale_, -alpha_);
        if (rhi > scale_)
            p += std::pow(rhi / scale_, -alpha_);
        else
            p += 1.0;
        return p;
    }

    double radius_truncated_moment(double p, double x) const {
        if (std::fabs(p - alpha_) < 1e-14) return alpha_ * std::pow(scale_, alpha_) * std::log(x / scale_);
        return alpha_ / (p - alpha_) *
               (std::pow(x, p - alpha_) * std::pow(scale_, alpha_) - std::pow(scale_, p));
    }

    double alpha_ = 1.0;
    double scale_ = 1.0;
    int dim_ = 1;
    law_family family_ = law_family::pareto_polar;
    mean_mode mode_ = mean_mode::none;
    std::vector<spectral_atom> atoms_;
    std::vector<double> cum_weights_;
    vec shift_;
    double shift_norm2_ = 0.0;
};

// Level pairing h(x) with  int_x^inf y dP = int_{-inf}^{-h(x)} |y| dP,
// defined for one-dimensional two-sided laws with alpha > 1. The pairing
// makes the two-sided truncated mean vanish, so martingale bounds apply to
// noise truncated to [-h(y), y].
class balancing_function {
  public:
    explicit balancing_function(const regvar_law& law) : law_(law) {
        require(law.dimension() == 1, errc::balancing_undefined, "balancing needs a 1-d law");
        require(law.alpha() > 1.0, errc::invalid_parameter, "balancing needs alpha > 1");
        require(!law.is_shifted(), errc::unsupported,
                "balancing implemented for the unshifted polar families");
        wpos_ = law.positive_weight();
        require(wpos_ > 0.0 && wpos_ < 1.0, errc::balancing_undefined,
                "limit measure must charge both half-lines");
        const double a = law.alpha(), s = law.scale();
        coef_ = a * std::pow(s, a) / (a - 1.0);
        // B = total negative-side mean mass; domain starts where G(x) <= B/2.
        b_total_ = (1.0 - wpos_) * a * s / (a - 1.0);
        k_ = s * std::pow(2.0 * wpos_ / (1.0 - wpos_), 1.0 / (a - 1.0));
        // Tight two-sided bound on h(x)/x, padded for the root-finder's
        // 1e-10 relative bracket.
        const double ratio = std::pow((1.0 - wpos_) / wpos_, 1.0 / (a - 1.0));
        c_ = std::fmax(ratio, 1.0 / ratio) * (1.0 + 1e-9);
    }

    double lower_bound() const { return k_; }
    double bound_constant() const { return c_; }

    // Positive-side tail mean G(x) = int_x^inf y dP, x >= scale.
    double positive_tail_mean(double x) const { return wpos_ * coef_ * std::pow(x, 1.0 - law_.alpha()); }
    // Negative-side tail mean H(t) = int_{-inf}^{-t} |y| dP, t >= scale.
    double negative_tail_mean(double t) const {
        if (t <= law_.scale()) return b_total_;
        return (1.0 - wpos_) * coef_ * std::pow(t, 1.0 - law_.alpha());
    }

    double operator()(double x) const {
        require(x >= k_ * (1.0 - 1e-12), errc::out_of_domain,
                "balancing defined for x >= K");
        if (wpos_ == 0.5) return x;  // G == H, the root is exact
        const double target = positive_tail_mean(x);
        double lo = law_.scale(), hi = 2.0 * law_.scale();
        int guard = 0;
        while (negative_tail_mean(hi) > target) {
            hi *= 2.0;
            require(++guard < 400, errc::invalid_parameter, "balancing bracket overflow");
        }
        while ((hi - lo) > 1e-10 * hi) {
            const double mid = 0.5 * (lo + hi);
            (negative_tail_mean(mid) > target ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }

    // Relative residual of the balance identity at the returned level.
    double residual(double x) const {
        const double h = (*this)(x);
        const double g = positive_tail_mean(x);
        return std::fabs(negative_tail_mean(h) - g) / g;
    }

  private:
    regvar_law law_;
    double wpos_, coef_, b_total_, k_, c_;
};

inline double balancing_h(const regvar_law& law, double x) { return balancing_function(law)(x); }

}  // namespace tailseries

#endif  // TAILSERIES_REGVAR_HPP
