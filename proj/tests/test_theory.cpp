#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "tailseries/models.hpp"
#include "tailseries/theory.hpp"

using namespace tailseries;

namespace {

const condition_row& find_row(const moment_report& rep, const std::string& id) {
    for (const auto& r : rep.rows)
        if (r.id == id) return r;
    throw std::runtime_error("row not found: " + id);
}

}  // namespace

TEST(MomentCheck, GeometricDeterministicPasses) {
    const auto cp = coefficient_process::geometric(mat::scalar(1.0), 0.5);
    const moment_check_params params(1.5, 0.25);
    const auto rep = check_moment_conditions(cp, params);
    EXPECT_TRUE(rep.pass());
    EXPECT_EQ(rep.regime, alpha_regime::low);
    // geometric sums, computed from the closed form as the oracle
    const double low = 1.0 / (1.0 - std::pow(0.5, 1.25));
    const double high = 1.0 / (1.0 - std::pow(0.5, 1.75));
    EXPECT_NEAR(find_row(rep, "3.7a").value, low, 1e-12);
    EXPECT_NEAR(find_row(rep, "3.7b").value, high, 1e-12);
}

TEST(MomentCheck, SrePassesViaJensenBound) {
    const auto cp = coefficient_process::sre(matrix_law::uniform_scalar(0.0, 0.9));
    const moment_check_params params(1.5, 0.25);
    const auto rep = check_moment_conditions(cp, params);
    EXPECT_TRUE(rep.pass());
    // direct route: exact scalar-chain sums sum_j (E|M|^q)^j
    const double r_low = std::pow(0.9, 1.25) / 2.25;
    EXPECT_NEAR(find_row(rep, "3.7a").value, 1.0 / (1.0 - r_low), 1e-12);
    EXPECT_EQ(find_row(rep, "3.7a").mode, value_mode::closed_form);  // scalar chain is exact
    // Jensen route from the contraction moment alone:
    // sum_j q^{j(alpha-eps)/(alpha+eps)} with q = E||M||^{alpha+eps}
    const double q = std::pow(0.9, 1.75) / 2.75;
    const auto& jr = find_row(rep, "C3.3");
    EXPECT_NEAR(jr.value, 1.0 / (1.0 - std::pow(q, 1.25 / 1.75)), 1e-12);
    EXPECT_TRUE(jr.pass);
    // the Jensen bound dominates the exact value
    EXPECT_GE(jr.value, find_row(rep, "3.7a").value);
}

TEST(MomentCheck, HarmonicPowerFails) {
    const auto cp = coefficient_process::power(mat::scalar(1.0), 1.0 / 1.5);
    const moment_check_params params(1.5, 0.25);
    const auto rep = check_moment_conditions(cp, params);
    EXPECT_FALSE(rep.pass());
    EXPECT_FALSE(find_row(rep, "3.7a").pass);
}

TEST(MomentCheck, BoundaryAlphaDispatchesToCompositeCondition) {
    const auto cp = coefficient_process::geometric(mat::scalar(1.0), 0.5);
    for (double alpha : {1.0, 2.0}) {
        const auto rep = check_moment_conditions(cp, moment_check_params(alpha));
        EXPECT_EQ(rep.regime, alpha_regime::boundary);
        EXPECT_NO_THROW(find_row(rep, "3.8"));
        EXPECT_THROW(find_row(rep, "3.7a"), std::runtime_error);
        EXPECT_THROW(find_row(rep, "3.9"), std::runtime_error);
        EXPECT_TRUE(rep.pass());
    }
    // just off the boundary: back to the paired sums
    const auto rep = check_moment_conditions(cp, moment_check_params(1.999, 0.0005));
    EXPECT_EQ(rep.regime, alpha_regime::low);
    EXPECT_NO_THROW(find_row(rep, "3.7a"));
}

TEST(MomentCheck, HighAlphaUsesSquareFunction) {
    const auto cp = coefficient_process::geometric(mat::scalar(1.0), 0.5);
    const auto rep = check_moment_conditions(cp, moment_check_params(3.0, 0.5));
    EXPECT_EQ(rep.regime, alpha_regime::high);
    const auto& row = find_row(rep, "3.9");
    // E(sum 0.25^j)^{(3.5)/2} = (4/3)^{1.75}
    EXPECT_NEAR(row.value, std::pow(4.0 / 3.0, 1.75), 1e-12);
    EXPECT_TRUE(rep.pass());
}

TEST(MomentCheck, RandomSumUsesCountConditions) {
    const auto cp = coefficient_process::random_sum(count_law::geometric(4.0), 1);
    {
        const auto rep = check_moment_conditions(cp, moment_check_params(1.5));
        EXPECT_TRUE(find_row(rep, "3.13").pass);
        EXPECT_NEAR(find_row(rep, "3.13").value, 4.0, 1e-9);
    }
    {
        const auto rep = check_moment_conditions(cp, moment_check_params(2.0));
        EXPECT_NO_THROW(find_row(rep, "3.14"));
        EXPECT_TRUE(rep.pass());
    }
    {
        const auto rep = check_moment_conditions(cp, moment_check_params(3.0));
        EXPECT_NO_THROW(find_row(rep, "3.15"));
        EXPECT_TRUE(rep.pass());
    }
    // heavy count laws fail exactly when the tail index is too small
    const auto heavy = coefficient_process::random_sum(count_law::zeta(1.3), 1);
    EXPECT_TRUE(check_moment_conditions(heavy, moment_check_params(1.5)).pass());
    EXPECT_FALSE(check_moment_conditions(heavy, moment_check_params(3.0)).pass());
}

TEST(MomentCheck, EpsilonValidation) {
    EXPECT_THROW(moment_check_params(1.5, 2.0), error);
    EXPECT_THROW(moment_check_params(1.5, 1.5), error);
    // nonpositive epsilon selects the default rule
    EXPECT_NEAR(moment_check_params(1.5).epsilon, 0.125, 1e-15);
    EXPECT_NEAR(moment_check_params(2.0).epsilon, 0.25, 1e-15);
}

TEST(MomentCheck, MonteCarloCrossCheckRow) {
    const auto cp = coefficient_process::sre(matrix_law::uniform_scalar(0.0, 0.9));
    moment_check_params params(1.5, 0.25);
    params.mc_draws = 2000;
    params.mc_horizon = 64;
    params.seed = 7;
    const auto rep = check_moment_conditions(cp, params);
    const auto& row = find_row(rep, "3.7-mc");
    EXPECT_EQ(row.mode, value_mode::monte_carlo);
    EXPECT_GT(row.stderr_, 0.0);
    EXPECT_TRUE(row.pass);
    // The Monte Carlo estimate of E sum ||A_j||^{alpha-eps} sits below the
    // Jensen upper bound.
    EXPECT_LT(row.value, find_row(rep, "3.7a").value + 3.0 * row.stderr_);
}

// -- limit constants -----------------------------------------------------------

TEST(LimitConstant, DeterministicIdentityIsExactlyOne) {
    auto m = noise_only_model(regvar_law::symmetrized(1.5));
    gate_model(m);
    const auto c = limit_constant_mc(m, tail_set::whole(1.0), 0, 0);
    EXPECT_EQ(c.provenance, constant_provenance::closed_form);
    EXPECT_DOUBLE_EQ(c.value, 1.0);
}

TEST(LimitConstant, RandomSumMatchesTailWald) {
    auto m = random_sum_model(count_law::geometric(4.0), regvar_law::symmetrized(1.5));
    gate_model(m);
    const auto c = limit_constant_mc(m, tail_set::whole(1.0), 20000, 42);
    EXPECT_EQ(c.provenance, constant_provenance::monte_carlo);
    EXPECT_NEAR(c.value, 4.0, 3.0 * c.stderr_);
    EXPECT_GT(c.stderr_, 0.0);
}

TEST(LimitConstant, GeometricLinearMatchesClosedForm) {
    auto m = linear_process_geometric(mat::scalar(1.0), 0.5, regvar_law::centered(1.5),
                                      truncation_policy::tail_budget(1e-6));
    gate_model(m);
    const auto c = limit_constant_mc(m, tail_set::ray_positive(1.0), 0, 0);
    const double expect = 1.0 / (1.0 - std::pow(0.5, 1.5));
    EXPECT_NEAR(c.value, expect, 1e-12);
    EXPECT_NEAR(c.value, linear_limit_geometric_1d(1.0, 0.5, 1.0, 1.5), 1e-12);
}

TEST(LimitConstant, RefusesUncheckedModel) {
    auto m = random_sum_model(count_law::geometric(4.0), regvar_law::symmetrized(1.5));
    EXPECT_THROW(limit_constant_mc(m, tail_set::whole(1.0), 100, 0), error);
}

TEST(LinearLimit, FiniteLists) {
    EXPECT_DOUBLE_EQ(linear_limit_1d({1.0}, 0.7, 1.5), 0.7);
    EXPECT_DOUBLE_EQ(linear_limit_1d({-1.0}, 0.7, 1.5), 0.3);
    EXPECT_DOUBLE_EQ(linear_limit_1d({-1.0}, 0.7, 1.5, false), 0.7);  // negative ray swaps
    EXPECT_NEAR(linear_limit_1d({1.0, -0.5}, 0.6, 2.0), 0.6 + 0.4 * 0.25, 1e-15);
}

TEST(LinearLimit, GeometricClosedForm) {
    EXPECT_NEAR(linear_limit_geometric_1d(1.0, 0.5, 1.0, 1.5), 1.0 / (1.0 - std::pow(0.5, 1.5)),
                1e-14);
    // alternating signs: even terms positive, odd negative
    const double r = std::pow(0.5, 1.5);
    const double expect = 0.7 / (1.0 - r * r) + 0.3 * r / (1.0 - r * r);
    EXPECT_NEAR(linear_limit_geometric_1d(1.0, -0.5, 0.7, 1.5), expect, 1e-14);
    EXPECT_THROW(linear_limit_geometric_1d(1.0, 1.0, 0.5, 1.5), error);
}

TEST(RandomSumConstant, Values) {
    EXPECT_DOUBLE_EQ(random_sum_constant(1.0), 1.0);
    EXPECT_DOUBLE_EQ(random_sum_constant(4.0), 4.0);
    EXPECT_DOUBLE_EQ(random_sum_constant(3.0), 3.0);
    EXPECT_THROW(random_sum_constant(kInf), error);
}

TEST(SreConstant, ClosedFormValues) {
    EXPECT_NEAR(sre_constant_1d(1.0, 0.25, 0.0), 4.0 / 3.0, 1e-15);
    EXPECT_NEAR(sre_constant_1d(0.5, 0.3, 0.2), 1.0, 1e-15);
    for (double w : {0.0, 0.3, 1.0}) EXPECT_DOUBLE_EQ(sre_constant_1d(w, 0.0, 0.0), w);
    try {
        sre_constant_1d(0.5, 0.6, 0.5);
        FAIL() << "noncontractive chain accepted";
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::noncontractive_chain);
    }
}

TEST(SreConstant, SeriesOracleAgreement) {
    // closed form vs the truncated double series at K = 200
    const double ws[] = {0.0, 0.3, 0.5, 0.7, 1.0};
    const double abs_[][2] = {{0.0, 0.0}, {0.25, 0.0}, {0.5, 0.2}, {0.3, 0.3}, {0.1, 0.6}};
    for (double w : ws)
        for (const auto& ab : abs_) {
            const double cf = sre_constant_1d(w, ab[0], ab[1]);
            const double series = sre_constant_series_1d(w, ab[0], ab[1], 200);
            EXPECT_NEAR(cf, series, 1e-10 * std::fmax(1.0, cf)) << w << " " << ab[0] << " " << ab[1];
        }
}

TEST(SreConstant, RayConstantsFromMultiplierLaw) {
    const auto rays = sre_constants(matrix_law::constant_scalar(0.5), 1.5, 0.7);
    EXPECT_NEAR(rays.plus_moment, std::pow(0.5, 1.5), 1e-15);
    EXPECT_DOUBLE_EQ(rays.minus_moment, 0.0);
    EXPECT_NEAR(rays.positive, 0.7 / (1.0 - std::pow(0.5, 1.5)), 1e-13);
    EXPECT_NEAR(rays.negative, 0.3 / (1.0 - std::pow(0.5, 1.5)), 1e-13);
}

// -- contraction and Lyapunov ---------------------------------------------------

TEST(Contraction, ClosedFormVerdicts) {
    const auto v1 = sre_contraction_check(matrix_law::constant_scalar(0.5), 1.5, 0.25);
    EXPECT_NEAR(v1.value, std::pow(0.5, 1.75), 1e-12);
    EXPECT_TRUE(v1.pass);
    const auto v2 = sre_contraction_check(matrix_law::constant_scalar(1.0), 1.5, 0.25);
    EXPECT_DOUBLE_EQ(v2.value, 1.0);
    EXPECT_FALSE(v2.pass);
    const auto v3 = sre_contraction_check(matrix_law::uniform_scalar(0.0, 0.9), 1.5, 0.25);
    EXPECT_NEAR(v3.value, std::pow(0.9, 1.75) / 2.75, 1e-12);
    EXPECT_TRUE(v3.pass);
}

TEST(Contraction, MonteCarloVerdictAgreesWithClosedForm) {
    const auto mc = sre_contraction_check(matrix_law::uniform_scalar(0.0, 0.9), 1.5, 0.25, 50000, 3);
    EXPECT_EQ(mc.mode, value_mode::monte_carlo);
    EXPECT_NEAR(mc.value, std::pow(0.9, 1.75) / 2.75, 4.0 * mc.stderr_);
    EXPECT_TRUE(mc.pass);
}

TEST(Lyapunov, ConstantScalarIsExact) {
    rng_stream s(1, {stream_tag::theory});
    const auto r = lyapunov_estimate(matrix_law::constant_scalar(0.5), 20, 8, s);
    EXPECT_NEAR(r.gamma_hat, std::log(0.5), 1e-14);
    EXPECT_NEAR(r.stderr_, 0.0, 1e-14);
}

TEST(Lyapunov, BalancedTwoPointIsZeroOnAverage) {
    rng_stream s(5, {stream_tag::theory});
    const auto r = lyapunov_estimate(matrix_law::two_point_scalar(0.5, 2.0, 0.5), 100, 400, s);
    EXPECT_GT(r.stderr_, 0.0);
    EXPECT_NEAR(r.gamma_hat, 0.0, 4.0 * r.stderr_);
}

TEST(Lyapunov, RotationIsExactlyZero) {
    mat rot(2, 2);
    const double th = 0.7;
    rot(0, 0) = std::cos(th);
    rot(0, 1) = -std::sin(th);
    rot(1, 0) = std::sin(th);
    rot(1, 1) = std::cos(th);
    rng_stream s(2, {stream_tag::theory});
    const auto r = lyapunov_estimate(matrix_law::constant(rot), 12, 4, s);
    EXPECT_NEAR(r.gamma_hat, 0.0, 1e-10);
}

// -- nonzero-mean probe ----------------------------------------------------------

TEST(NonzeroMeanProbe, DeterministicFiniteSumVanishesBeyondItsNorm) {
    auto m = linear_process({mat::scalar(1.0), mat::scalar(0.5)}, regvar_law::two_sided(1.5, 0.7));
    const auto res = nonzero_mean_probe(m, {2.0, 4.0, 8.0});
    for (double r : res.ratios) EXPECT_DOUBLE_EQ(r, 0.0);  // ||S_A|| = 1.5 < 2
    EXPECT_TRUE(res.consistent_with_vanishing);
    EXPECT_NE(res.note.find("heuristic"), std::string::npos);
}

TEST(NonzeroMeanProbe, GeometricCountVanishesAgainstParetoTail) {
    auto m = random_sum_model(count_law::geometric(4.0), regvar_law::two_sided(1.5, 0.7));
    const auto res = nonzero_mean_probe(m, {10.0, 40.0, 120.0});
    EXPECT_TRUE(res.consistent_with_vanishing);
    for (std::size_t i = 1; i < res.ratios.size(); ++i)
        EXPECT_LT(res.ratios[i], res.ratios[i - 1]);
}

TEST(NonzeroMeanProbe, HeavyCountDiverges) {
    // N with tail index alpha/2: P(N > u)/P(|Z| > u) grows like u^{alpha/2}.
    series_model m(regvar_law::two_sided(1.5, 0.7),
                   coefficient_process::random_sum(count_law::zeta(0.75), 1),
                   truncation_policy::fixed(0));
    const auto res = nonzero_mean_probe(m, {10.0, 40.0, 120.0});
    EXPECT_FALSE(res.consistent_with_vanishing);
    EXPECT_GT(res.ratios.back(), res.ratios.front());
}

// -- gate --------------------------------------------------------------------------

TEST(Gate, StampsModelAndAddsZeroMeanRow) {
    auto m = random_sum_model(count_law::geometric(4.0), regvar_law::symmetrized(1.5));
    const auto rep = gate_model(m);
    EXPECT_TRUE(m.gate_passed);
    EXPECT_TRUE(find_row(rep, "3.1").pass);
    auto bad = random_sum_model(count_law::geometric(4.0), regvar_law::two_sided(1.5, 0.7));
    const auto rep2 = gate_model(bad);
    EXPECT_FALSE(bad.gate_passed);
    EXPECT_FALSE(find_row(rep2, "3.1").pass);
}
