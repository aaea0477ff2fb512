#ifndef TAILSERIES_LIMIT_MEASURE_HPP
#define TAILSERIES_LIMIT_MEASURE_HPP

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <string>
#include <vector>

#include "tailseries/errors.hpp"
#include "tailseries/matrix.hpp"
#include "tailseries/regvar.hpp"

namespace tailseries {

struct spherical_cap {
    vec center;      // unit vector
    double min_cos;  // membership: <s, center> >= min_cos
};

// {x : |x| > radius, x/|x| in region}; the region is the whole sphere or a
// finite union of spherical caps. In d=1 caps degenerate to the two rays.
class tail_set {
  public:
    static tail_set whole(double radius) { return tail_set(radius, {}); }

    static tail_set caps(double radius, std::vector<spherical_cap> cs) {
        require(!cs.empty(), errc::invalid_parameter, "empty cap list; use whole()");
        for (auto& c : cs) {
            require(c.min_cos >= -1.0 && c.min_cos <= 1.0, errc::invalid_parameter,
                    "cap min-cosine outside [-1,1]");
            const double n = euclidean_norm(c.center);
            require(n > 0.0, errc::invalid_parameter, "zero cap center");
            for (double& v : c.center) v /= n;
        }
        return tail_set(radius, std::move(cs));
    }

    static tail_set ray_positive(double radius) { return caps(radius, {{{1.0}, 0.0}}); }
    static tail_set ray_negative(double radius) { return caps(radius, {{{-1.0}, 0.0}}); }

    double radius() const { return radius_; }
    bool whole_sphere() const { return caps_.empty(); }
    const std::vector<spherical_cap>& cap_list() const { return caps_; }

    tail_set scaled(double u) const {
        require(u > 0.0, errc::invalid_parameter, "scaling factor must be positive");
        return tail_set(radius_ * u, caps_);
    }

    // Membership of a concrete point (strict radial exceedance).
    bool contains(const double* x, int d) const {
        const double n = euclidean_norm(x, d);
        if (!(n > radius_)) return false;
        if (caps_.empty()) return true;
        for (const auto& c : caps_) {
            double dot = 0.0;
            for (int k = 0; k < d; ++k) dot += x[k] * c.center[static_cast<std::size_t>(k)];
            if (dot >= c.min_cos * n) return true;
        }
        return false;
    }

    // Membership of a unit direction; exact boundary contact is an error
    // because cap boundaries are required to avoid spectral atoms.
    bool direction_in_region(const vec& dir) const {
        if (caps_.empty()) return true;
        for (const auto& c : caps_) {
            require(dir.size() == c.center.size(), errc::invalid_parameter,
                    "tail set dimension mismatch");
            double dot = 0.0;
            for (std::size_t k = 0; k < dir.size(); ++k) dot += dir[k] * c.center[k];
            require(std::fabs(dot - c.min_cos) > 1e-12, errc::boundary_tie,
                    "spectral atom on a cap boundary");
            if (dot > c.min_cos) return true;
        }
        return false;
    }

    std::string key() const {
        char buf[64];
        std::string s;
        std::snprintf(buf, sizeof buf, "r=%.17g", radius_);
        s += buf;
        if (caps_.empty()) {
            s += "|whole";
            return s;
        }
        for (const auto& c : caps_) {
            s += "|cap[";
            for (std::size_t k = 0; k < c.center.size(); ++k) {
                std::snprintf(buf, sizeof buf, "%s%.17g", k ? "," : "", c.center[k]);
                s += buf;
            }
            std::snprintf(buf, sizeof buf, "]>=%.17g", c.min_cos);
            s += buf;
        }
        return s;
    }

  private:
    tail_set(double radius, std::vector<spherical_cap> cs) : radius_(radius), caps_(std::move(cs)) {
        require(radius > 0.0, errc::invalid_parameter, "tail set radius must be positive");
    }

    double radius_;
    std::vector<spherical_cap> caps_;
};

struct measure_atom {
    vec direction;
    double mass;
};

// alpha-homogeneous Radon measure carried by finitely many rays. Evaluation
// on a tail set is a finite sum: each unit atom s contributes
// mass * radius^{-alpha} when s lies in the angular region, because the
// radial integral of alpha r^{-alpha-1} from `radius` to infinity is exactly
// radius^{-alpha}.
class limit_measure {
  public:
    limit_measure(double alpha, std::vector<measure_atom> atoms)
        : alpha_(alpha), atoms_(std::move(atoms)) {
        require(alpha > 0.0, errc::invalid_parameter, "alpha must be positive");
        for (auto& a : atoms_) {
            require(a.mass >= 0.0, errc::invalid_parameter, "negative atom mass");
            const double n = euclidean_norm(a.direction);
            require(n > 0.0, errc::invalid_parameter, "zero atom direction");
            for (double& v : a.direction) v /= n;
        }
    }

    static limit_measure from_law(const regvar_law& law) {
        std::vector<measure_atom> atoms;
        atoms.reserve(law.atoms().size());
        for (const auto& a : law.atoms()) atoms.push_back({a.direction, a.weight});
        return limit_measure(law.alpha(), std::move(atoms));
    }

    double alpha() const { return alpha_; }
    const std::vector<measure_atom>& atoms() const { return atoms_; }
    std::size_t dropped_atoms() const { return dropped_atoms_; }

    double total_mass() const {
        double s = 0.0;
        for (const auto& a : atoms_) s += a.mass;
        return s;
    }

    bool normalized(double tol = 1e-9) const { return std::fabs(total_mass() - 1.0) <= tol; }

    double eval(const tail_set& b) const {
        const double scale = std::pow(b.radius(), -alpha_);
        double s = 0.0;
        for (const auto& a : atoms_)
            if (b.direction_in_region(a.direction)) s += a.mass;
        return s * scale;
    }

    // Image measure under x -> Ax: atom (s, m) maps to (As/|As|, m |As|^alpha).
    // Atoms mapped to the origin are dropped; the origin is outside the space
    // the measure lives on, so that mass is lost (and counted).
    limit_measure pushforward(const mat& a) const {
        std::vector<measure_atom> out;
        out.reserve(atoms_.size());
        std::size_t dropped = dropped_atoms_;
        for (const auto& atom : atoms_) {
            vec img = a.apply(atom.direction);
            const double n = euclidean_norm(img);
            if (n == 0.0) {
                ++dropped;
                continue;
            }
            for (double& v : img) v /= n;
            out.push_back({std::move(img), atom.mass * std::pow(n, alpha_)});
        }
        limit_measure m(alpha_, std::move(out));
        m.dropped_atoms_ = dropped;
        return m;
    }

    static limit_measure mix(const std::vector<limit_measure>& measures,
                             const std::vector<double>& weights) {
        require(!measures.empty(), errc::invalid_parameter, "nothing to mix");
        require(measures.size() == weights.size(), errc::invalid_parameter,
                "measure/weight count mismatch");
        const double alpha = measures.front().alpha_;
        std::vector<measure_atom> atoms;
        std::size_t dropped = 0;
        for (std::size_t i = 0; i < measures.size(); ++i) {
            require(std::fabs(measures[i].alpha_ - alpha) <= 1e-12, errc::incompatible_measures,
                    "mixing measures of different homogeneity order");
            require(weights[i] >= 0.0, errc::invalid_parameter, "negative mixing weight");
            for (const auto& a : measures[i].atoms_)
                atoms.push_back({a.direction, a.mass * weights[i]});
            dropped += measures[i].dropped_atoms_;
        }
        limit_measure m(alpha, std::move(atoms));
        m.dropped_atoms_ = dropped;
        return m;
    }

    // (w, 1-w) of the one-dimensional polar density parametrization.
    std::pair<double, double> one_d_weights() const {
        for (const auto& a : atoms_)
            require(a.direction.size() == 1, errc::unsupported, "one_d_weights needs d = 1");
        require(normalized(), errc::must_normalize_first,
                "one_d_weights requires a measure of total mass 1");
        double w = 0.0;
        for (const auto& a : atoms_)
            if (a.direction[0] > 0.0) w += a.mass;
        return {w, 1.0 - w};
    }

  private:
    double alpha_;
    std::vector<measure_atom> atoms_;
    std::size_t dropped_atoms_ = 0;
};

}  // namespace tailseries

#endif  // TAILSERIES_LIMIT_MEASURE_HPP
