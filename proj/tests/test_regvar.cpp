#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "tailseries/detail/quadrature.hpp"
#include "tailseries/regvar.hpp"

using namespace tailseries;

namespace {

double empirical_tail(const regvar_law& law, double u, std::size_t n, std::uint64_t seed) {
    rng_stream s(seed, {stream_tag::noise, 11});
    std::vector<double> z(static_cast<std::size_t>(law.dimension()));
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) {
        law.sample_into(s, z.data());
        if (euclidean_norm(z) > u) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(n);
}

}  // namespace

TEST(RegVarLaw, OneSidedParetoConstruction) {
    const auto law = regvar_law::pareto(1.5, 1.0);
    EXPECT_DOUBLE_EQ(law.tail_prob(4.0), 0.125);  // 4^{-1.5}
    EXPECT_DOUBLE_EQ(law.tail_prob(1.0), 1.0);
    EXPECT_DOUBLE_EQ(law.positive_weight(), 1.0);
}

TEST(RegVarLaw, TwoSidedSpectralWeights) {
    const auto law = regvar_law::two_sided(1.0, 0.7);
    EXPECT_DOUBLE_EQ(law.positive_weight(), 0.7);
    EXPECT_DOUBLE_EQ(law.tail_prob(2.0), 0.5);
}

TEST(RegVarLaw, WeightsRenormalizedAndDirectionsUnit) {
    const auto law = regvar_law::make(2.0, {{{3.0, 0.0}, 2.0}, {{0.0, -5.0}, 2.0}},
                                      law_family::pareto_polar, 1.0);
    for (const auto& a : law.atoms()) {
        EXPECT_NEAR(euclidean_norm(a.direction), 1.0, 1e-12);
        EXPECT_DOUBLE_EQ(a.weight, 0.5);
    }
}

TEST(RegVarLaw, ConstructionErrors) {
    EXPECT_THROW(regvar_law::pareto(-1.0), error);
    EXPECT_THROW(regvar_law::make(1.5, {{{1.0}, 1.0}}, law_family::pareto_polar, 0.0), error);
    try {
        regvar_law::make(1.5, {{{1.0}, 0.0}, {{-1.0}, 0.0}}, law_family::pareto_polar, 1.0);
        FAIL() << "all-zero weights accepted";
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::invalid_spectral_measure);
    }
    try {
        regvar_law::pareto(1.5).tail_prob(0.5);
        FAIL() << "tail below scale accepted";
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::out_of_domain);
    }
    // Centering one-sided mass needs a finite mean.
    EXPECT_THROW(regvar_law::make(0.8, {{{1.0}, 1.0}}, law_family::pareto_polar, 1.0,
                                  mean_mode::zero_forced),
                 error);
}

TEST(RegVarLaw, CenteredFamilyShiftAndTail) {
    const auto law = regvar_law::centered(1.5, 1.0);
    // shift = alpha/(alpha-1) * scale = 3
    ASSERT_TRUE(law.is_shifted());
    EXPECT_DOUBLE_EQ(law.shift()[0], 3.0);
    // Right branch: P(|Z| > u) = ((u+3))^{-1.5} once u exceeds the left support.
    EXPECT_NEAR(law.tail_prob(97.0), std::pow(100.0, -1.5), 1e-18);
    // Left branch contributes on [scale, 2): P(Z < -u) = 1 - (3-u)^{-1.5}.
    const double u = 1.5;
    const double expected = std::pow(u + 3.0, -1.5) + 1.0 - std::pow(3.0 - u, -1.5);
    EXPECT_NEAR(law.tail_prob(u), expected, 1e-15);
    // Quantile inverts the closed form.
    const double q = law.tail_prob(37.0);
    EXPECT_NEAR(law.tail_quantile(q), 37.0, 1e-9 * 37.0);
}

TEST(RegVarLaw, EmpiricalTailMatchesExactTail) {
    const std::size_t n = 1000000;
    struct case_t {
        regvar_law law;
        double u;
    };
    const case_t cases[] = {
        {regvar_law::pareto(1.5), 4.0},
        {regvar_law::symmetrized(1.5), 10.0},
        {regvar_law::two_sided(1.0, 0.7), 2.0},
        {regvar_law::centered(1.5), 9.0},
        {regvar_law::make(2.0, {{{1.0, 0.0}, 0.5}, {{0.0, 1.0}, 0.5}}, law_family::pareto_polar,
                          1.0),
         3.0},
    };
    std::uint64_t seed = 1234;
    for (const auto& c : cases) {
        const double exact = c.law.tail_prob(c.u);
        const double emp = empirical_tail(c.law, c.u, n, seed++);
        const double se = std::sqrt(exact * (1.0 - exact) / static_cast<double>(n));
        EXPECT_NEAR(emp, exact, 4.0 * se) << c.law.describe() << " at u=" << c.u;
    }
}

TEST(RegVarLaw, MarginalDirectionsSplitEqually) {
    const auto law = regvar_law::make(2.0, {{{1.0, 0.0}, 0.5}, {{0.0, 1.0}, 0.5}},
                                      law_family::pareto_polar, 1.0);
    rng_stream s(5, {stream_tag::noise});
    const std::size_t n = 200000;
    std::size_t along_e1 = 0;
    double z[2];
    for (std::size_t i = 0; i < n; ++i) {
        law.sample_into(s, z);
        if (z[0] > 0.0) ++along_e1;
    }
    const double frac = static_cast<double>(along_e1) / static_cast<double>(n);
    EXPECT_NEAR(frac, 0.5, 4.0 * std::sqrt(0.25 / static_cast<double>(n)));
}

TEST(RegVarLaw, ZeroForcedCenteredMeanIsZero) {
    const auto law = regvar_law::centered(2.0, 1.0);
    rng_stream s(99, {stream_tag::noise});
    const std::size_t n = 1000000;
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double z = law.sample_scalar(s);
        sum += z;
        sum2 += z * z;
    }
    const double mean = sum / static_cast<double>(n);
    const double sd = std::sqrt(sum2 / static_cast<double>(n) - mean * mean);
    EXPECT_NEAR(mean, 0.0, 4.0 * sd / std::sqrt(static_cast<double>(n)));
}

TEST(RegVarLaw, SymmetrizedBalance) {
    const auto law = regvar_law::symmetrized(1.5);
    rng_stream s(7, {stream_tag::noise});
    const std::size_t n = 1000000;
    std::size_t pos = 0;
    for (std::size_t i = 0; i < n; ++i) pos += law.sample_scalar(s) > 0.0;
    const double frac = static_cast<double>(pos) / static_cast<double>(n);
    EXPECT_NEAR(frac, 0.5, 4.0 * std::sqrt(0.25 / static_cast<double>(n)));
}

TEST(RegVarLaw, SamplingReproducible) {
    const auto law = regvar_law::two_sided(1.5, 0.7);
    rng_stream a(31, {stream_tag::noise, 4});
    rng_stream b(31, {stream_tag::noise, 4});
    for (int i = 0; i < 1000; ++i) ASSERT_EQ(law.sample_scalar(a), law.sample_scalar(b));
}

// -- truncated moments -------------------------------------------------------

TEST(TruncatedMoment, ClosedForms) {
    EXPECT_NEAR(regvar_law::pareto(0.5).truncated_abs_moment(1.0, 100.0), 9.0, 1e-12);
    EXPECT_DOUBLE_EQ(regvar_law::pareto(1.5).truncated_abs_moment(1.0, 1.0), 0.0);
    EXPECT_NEAR(regvar_law::pareto(1.5).truncated_abs_moment(2.0, 4.0), 3.0, 1e-12);
}

TEST(TruncatedMoment, QuadratureOracleAgreement) {
    // Independent route: integrate the exact density directly.
    const double alpha = 1.5, scale = 1.0, p = 2.0, x = 7.0;
    const auto law = regvar_law::two_sided(alpha, 0.6, scale);
    auto integrand = [&](double r) {
        return std::pow(r, p) * alpha * std::pow(scale, alpha) * std::pow(r, -alpha - 1.0);
    };
    const double oracle = detail::integrate(integrand, scale, x, 1e-13);
    EXPECT_NEAR(law.truncated_abs_moment(p, x), oracle, 1e-10 * oracle);
}

TEST(TruncatedMoment, CenteredFamilyMatchesMonteCarlo) {
    const auto law = regvar_law::centered(1.5, 1.0);
    const double p = 1.0, x = 10.0;
    const double exact = law.truncated_abs_moment(p, x);
    rng_stream s(17, {stream_tag::noise});
    const std::size_t n = 2000000;
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double z = std::fabs(law.sample_scalar(s));
        const double v = z <= x ? std::pow(z, p) : 0.0;
        sum += v;
        sum2 += v * v;
    }
    const double mean = sum / static_cast<double>(n);
    const double se = std::sqrt((sum2 / static_cast<double>(n) - mean * mean) /
                                static_cast<double>(n));
    EXPECT_NEAR(exact, mean, 4.0 * se);
}

TEST(TruncatedMoment, OrderEqualToAlphaIsLogarithmic) {
    const auto law = regvar_law::pareto(1.0);
    EXPECT_NEAR(law.truncated_abs_moment(1.0, std::exp(1.0)), 1.0, 1e-12);
}

// -- Karamata ----------------------------------------------------------------

TEST(Karamata, AsymptoteValues) {
    EXPECT_NEAR(regvar_law::pareto(0.5).karamata_asymptote(1.0, 100.0), 10.0, 1e-12);
    EXPECT_NEAR(regvar_law::pareto(1.0).karamata_asymptote(2.0, 10.0), 10.0, 1e-12);
}

TEST(Karamata, RatioApproachesOne) {
    const auto law = regvar_law::pareto(0.5);
    const double x = 1e6;
    const double ratio = law.truncated_abs_moment(1.0, x) / law.karamata_asymptote(1.0, x);
    EXPECT_NEAR(ratio, 1.0, 0.002);
    // monotone approach along x = 10^k
    double prev_err = 1e9;
    for (int k = 2; k <= 6; ++k) {
        const double xx = std::pow(10.0, k);
        const double err =
            std::fabs(law.truncated_abs_moment(1.0, xx) / law.karamata_asymptote(1.0, xx) - 1.0);
        EXPECT_LT(err, prev_err);
        prev_err = err;
    }
}

TEST(TruncatedMoment, RejectsLevelBelowScale) {
    try {
        regvar_law::pareto(1.5).truncated_abs_moment(1.0, 0.5);
        FAIL() << "x below scale accepted";
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::out_of_domain);
    }
}

TEST(Karamata, RejectsNonTailDominatedOrder) {
    try {
        regvar_law::pareto(1.5).karamata_asymptote(1.0, 10.0);
        FAIL() << "p <= alpha accepted";
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::invalid_parameter);
    }
}

// -- Potter-type ratio bound --------------------------------------------------

TEST(PotterBound, HoldsOnLogGrid) {
    const double eps = 0.1;
    struct case_t {
        regvar_law law;
        double c;
        double x0;
    };
    const case_t cases[] = {
        {regvar_law::pareto(1.5), 1.0 + 1e-12, 1.0},
        {regvar_law::symmetrized(0.8), 1.0 + 1e-12, 1.0},
        {regvar_law::centered(1.5), 1.2, 30.0},  // shift m = 3: (1 + m/x0)^alpha < 1.2
    };
    for (const auto& c : cases) {
        const double alpha = c.law.alpha();
        for (double x = c.x0; x <= 1e6; x *= 10.0) {
            for (double y = 1.0; y >= 1.0 / 1024.0; y *= 0.5) {
                const double ratio = c.law.tail_prob(x / y) / c.law.tail_prob(x);
                EXPECT_LE(ratio, c.c * std::pow(y, alpha - eps))
                    << c.law.describe() << " x=" << x << " y=" << y;
            }
        }
    }
}

// -- truncated-mean bound (alpha < 1) -----------------------------------------

TEST(TruncatedMeanBound, SmallAlphaGrid) {
    const double alpha = 0.5, eps = 0.1, w = 0.7;
    const auto law = regvar_law::two_sided(alpha, w);
    // E[Z 1{|Z| <= t}] = (2w - 1) E[R 1{R <= t}]
    const double c_bound = alpha / (1.0 - alpha) * (1.0 + 1e-9);
    for (double x = 10.0; x <= 1e6; x *= 10.0) {
        for (double y = 1.0; y >= 1.0 / 256.0; y *= 0.5) {
            const double tm = (2.0 * w - 1.0) * law.truncated_abs_moment(1.0, x / y);
            const double lhs = std::fabs(tm) / (x * law.tail_prob(x));
            const double envelope =
                std::fmax(std::pow(y, alpha - 1.0 + eps), std::pow(y, alpha - 1.0 - eps));
            EXPECT_LE(lhs, c_bound * envelope) << "x=" << x << " y=" << y;
        }
    }
}

// -- balancing function --------------------------------------------------------

TEST(Balancing, SymmetricIsIdentity) {
    const auto law = regvar_law::symmetrized(1.5);
    const balancing_function h(law);
    EXPECT_NEAR(h.lower_bound(), 4.0, 1e-12);  // (2w/(1-w))^{1/(alpha-1)} = 2^2
    for (double x : {4.0, 5.0, 50.0, 5000.0}) EXPECT_DOUBLE_EQ(h(x), x);
}

TEST(Balancing, TwoSidedClosedForm) {
    // alpha = 2, w = 2/3: h(x)/x = ((1-w)/w)^{1/(alpha-1)} = 1/2
    const auto law = regvar_law::two_sided(2.0, 2.0 / 3.0);
    const balancing_function h(law);
    EXPECT_NEAR(h.lower_bound(), 4.0, 1e-12);
    EXPECT_NEAR(h(10.0), 5.0, 1e-8 * 5.0);
    for (double x = 4.0; x <= 4096.0; x *= 2.0) {
        EXPECT_NEAR(h(x) / x, 0.5, 1e-8);
        EXPECT_LT(h.residual(x), 1e-8);
    }
}

TEST(Balancing, IdentityVerifiedByQuadrature) {
    const double alpha = 1.5, w = 0.55;
    const auto law = regvar_law::two_sided(alpha, w);
    const balancing_function h(law);
    const double x = 2.0 * h.lower_bound();
    const double hx = h(x);
    // Independent route: log-substitution quadrature of the exact density;
    // the integrand decays like y^{1-alpha-1} = y^{-alpha}, so s_max = 90
    // leaves a relative tail below e^{-45}.
    auto pos_dens = [&](double y) { return w * alpha * std::pow(y, -alpha - 1.0); };
    auto neg_dens = [&](double y) { return (1.0 - w) * alpha * std::pow(y, -alpha - 1.0); };
    const double g = detail::integrate_log_tail([&](double y) { return y * pos_dens(y); }, x);
    const double hh = detail::integrate_log_tail([&](double y) { return y * neg_dens(y); }, hx);
    EXPECT_NEAR(hh, g, 1e-8 * g);
    // h/x stays within the reported bound constant
    EXPECT_LE(hx / x, h.bound_constant() * (1.0 + 1e-12));
    EXPECT_GE(hx / x, 1.0 / h.bound_constant() * (1.0 - 1e-12));
    // scale invariance of the pure two-sided family
    EXPECT_NEAR(h(2.0 * x) / (2.0 * x), hx / x, 1e-9);
}

TEST(Balancing, Errors) {
    try {
        balancing_h(regvar_law::pareto(1.5), 10.0);
        FAIL() << "one-sided law accepted";
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::balancing_undefined);
    }
    const auto law = regvar_law::two_sided(2.0, 2.0 / 3.0);
    try {
        balancing_h(law, 3.0);  // K = 4
        FAIL() << "x below K accepted";
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::out_of_domain);
    }
}
