#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#ifndef TAILSERIES_CLI_PATH
#define TAILSERIES_CLI_PATH "tailseries"
#endif

namespace fs = std::filesystem;

namespace {

struct run_result {
    int exit_code;
};

fs::path scratch_dir() {
    static const fs::path base =
        fs::temp_directory_path() / ("tailseries_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(base);
    return base;
}

void write(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

run_result run_cli(const std::string& args) {
    const std::string cmd = std::string(TAILSERIES_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int raw = std::system(cmd.c_str());
    return {WEXITSTATUS(raw)};
}

const char* kNoiseOnly = R"(
[experiment]
seed = 7
n_sims = 200000
u_quantiles = 1e-2 1e-3

[noise]
family = symmetrized-pareto-1d
alpha = 1.5
atoms = +1:0.5 -1:0.5
mean_mode = zero-forced
)";

const char* kRandomSum2 = R"(
[experiment]
seed = 7
n_sims = 400000
u_quantiles = 1e-2 1e-3

[noise]
family = symmetrized-pareto-1d
alpha = 1.5
atoms = +1:0.5 -1:0.5
mean_mode = zero-forced

[model]
kind = random-sum
n_law = geometric:2
)";

}  // namespace

TEST(Cli, CheckExitCodes) {
    const auto dir = scratch_dir();
    write(dir / "good.cfg", kNoiseOnly);
    EXPECT_EQ(run_cli("check --config " + (dir / "good.cfg").string() + " --out " +
                      (dir / "o1").string())
                  .exit_code,
              0);

    // harmonic-power coefficients diverge: analytic failure
    std::string harmonic = std::string(kNoiseOnly) + R"(
[model]
kind = linear
coeffs = power:1,0.6666666666666666
)";
    write(dir / "harmonic.cfg", harmonic);
    EXPECT_EQ(run_cli("check --config " + (dir / "harmonic.cfg").string() + " --out " +
                      (dir / "o2").string())
                  .exit_code,
              2);

    write(dir / "bad.cfg", "[noise\nfamily=\n");
    EXPECT_EQ(run_cli("check --config " + (dir / "bad.cfg").string()).exit_code, 1);
    EXPECT_EQ(run_cli("definitely-not-a-subcommand").exit_code, 1);
    EXPECT_EQ(run_cli("check --config " + (dir / "does_not_exist.cfg").string()).exit_code, 1);
}

TEST(Cli, TheoryClosedForms) {
    const auto dir = scratch_dir();
    // SRE: w/(1 - E M^alpha) on the positive ray
    std::string sre = R"(
[experiment]
seed = 1

[noise]
family = pareto-polar
alpha = 1.5
atoms = +1:0.7 -1:0.3

[model]
kind = sre
m_law = constant:0.5

[tail_set]
region = ray-positive
)";
    write(dir / "sre.cfg", sre);
    ASSERT_EQ(run_cli("theory --config " + (dir / "sre.cfg").string() + " --out " +
                      (dir / "t1").string())
                  .exit_code,
              0);
    const std::string rep = slurp(dir / "t1" / "theory_report.txt");
    EXPECT_NE(rep.find("constant = 1.0828"), std::string::npos) << rep;
    EXPECT_NE(rep.find("sre closed form"), std::string::npos);

    write(dir / "rs.cfg", std::string(kRandomSum2));
    ASSERT_EQ(run_cli("theory --config " + (dir / "rs.cfg").string() + " --out " +
                      (dir / "t2").string())
                  .exit_code,
              0);
    const std::string rep2 = slurp(dir / "t2" / "theory_report.txt");
    EXPECT_NE(rep2.find("constant = 2\n"), std::string::npos) << rep2;

    // geometric linear process with one-sided centered noise:
    // 1/(1 - 0.5^1.5) = 1.5469...
    std::string lin = R"(
[noise]
family = centered-pareto-1d
alpha = 1.5
atoms = +1:1
mean_mode = zero-forced

[model]
kind = linear
coeffs = geometric:1,0.5

[tail_set]
region = ray-positive
)";
    write(dir / "lin.cfg", lin);
    ASSERT_EQ(run_cli("theory --config " + (dir / "lin.cfg").string() + " --out " +
                      (dir / "t3").string())
                  .exit_code,
              0);
    const std::string rep3 = slurp(dir / "t3" / "theory_report.txt");
    EXPECT_NE(rep3.find("constant = 1.5469"), std::string::npos) << rep3;
}

TEST(Cli, EstimatePassAndDeliberateFail) {
    const auto dir = scratch_dir();
    write(dir / "rs.cfg", kRandomSum2);
    EXPECT_EQ(run_cli("estimate --config " + (dir / "rs.cfg").string() + " --out " +
                      (dir / "e1").string())
                  .exit_code,
              0);
    EXPECT_TRUE(fs::exists(dir / "e1" / "tail_ratio.csv"));
    EXPECT_TRUE(fs::exists(dir / "e1" / "plot.csv"));
    const std::string csv = slurp(dir / "e1" / "tail_ratio.csv");
    EXPECT_EQ(csv.rfind("u,exceedances,n_sims,ratio,stderr,theory,z\n", 0), 0u);

    // deliberately wrong declared constant: 3 against a true 2
    std::string wrong = std::string(kRandomSum2) + "\n[compare]\nconstant = 3\n";
    write(dir / "wrong.cfg", wrong);
    EXPECT_EQ(run_cli("estimate --config " + (dir / "wrong.cfg").string() + " --out " +
                      (dir / "e2").string())
                  .exit_code,
              2);
}

TEST(Cli, ReproducibleAcrossWorkersAndFromReport) {
    const auto dir = scratch_dir();
    write(dir / "rs.cfg", kRandomSum2);
    ASSERT_EQ(run_cli("estimate --config " + (dir / "rs.cfg").string() + " --workers 1 --out " +
                      (dir / "w1").string())
                  .exit_code,
              0);
    ASSERT_EQ(run_cli("estimate --config " + (dir / "rs.cfg").string() + " --workers 4 --out " +
                      (dir / "w4").string())
                  .exit_code,
              0);
    EXPECT_EQ(slurp(dir / "w1" / "tail_ratio.csv"), slurp(dir / "w4" / "tail_ratio.csv"));
    EXPECT_EQ(slurp(dir / "w1" / "plot.csv"), slurp(dir / "w4" / "plot.csv"));

    // the emitted report is itself a config; re-running it reproduces outputs
    ASSERT_EQ(run_cli("estimate --config " + (dir / "w1" / "estimate_report.txt").string() +
                      " --out " + (dir / "w5").string())
                  .exit_code,
              0);
    EXPECT_EQ(slurp(dir / "w1" / "tail_ratio.csv"), slurp(dir / "w5" / "tail_ratio.csv"));
}

TEST(Cli, SeedFlagOverridesConfig) {
    const auto dir = scratch_dir();
    write(dir / "rs2.cfg", kRandomSum2);
    ASSERT_EQ(run_cli("estimate --config " + (dir / "rs2.cfg").string() + " --seed 1000 --out " +
                      (dir / "s1").string())
                  .exit_code,
              0);
    ASSERT_EQ(run_cli("estimate --config " + (dir / "rs2.cfg").string() + " --seed 2000 --out " +
                      (dir / "s2").string())
                  .exit_code,
              0);
    EXPECT_NE(slurp(dir / "s1" / "tail_ratio.csv"), slurp(dir / "s2" / "tail_ratio.csv"));
    // the overridden seed is embedded in the report
    EXPECT_NE(slurp(dir / "s1" / "estimate_report.txt").find("seed = 1000"), std::string::npos);
}

TEST(Cli, ProbeRunsAndEmitsTables) {
    const auto dir = scratch_dir();
    std::string cfg = std::string(R"(
[experiment]
seed = 3
n_sims = 150000

[noise]
family = symmetrized-pareto-1d
alpha = 1.5
atoms = +1:0.5 -1:0.5
mean_mode = zero-forced

[model]
kind = sre
m_law = constant:0.5

[probe]
n_list = 0 2 4
u_quantile = 1e-2
hill_samples = 50000
)");
    write(dir / "probe.cfg", cfg);
    ASSERT_EQ(run_cli("probe --config " + (dir / "probe.cfg").string() + " --out " +
                      (dir / "p1").string())
                  .exit_code,
              0);
    const std::string csv = slurp(dir / "p1" / "remainder.csv");
    EXPECT_EQ(csv.rfind("kind,param,exceedances,n_sims,ratio,stderr\n", 0), 0u);
    EXPECT_NE(csv.find("suffix,0,"), std::string::npos);
    const std::string rep = slurp(dir / "p1" / "probe_report.txt");
    EXPECT_NE(rep.find("hill.alpha_hat"), std::string::npos);
}

TEST(Cli, GateBlocksEstimateWithExitTwo) {
    const auto dir = scratch_dir();
    // alpha > 1, lopsided uncentered noise, no declared route: the gate fails
    std::string cfg = R"(
[noise]
family = pareto-polar
alpha = 1.5
atoms = +1:0.7 -1:0.3

[model]
kind = random-sum
n_law = geometric:2
)";
    write(dir / "gate.cfg", cfg);
    EXPECT_EQ(run_cli("estimate --config " + (dir / "gate.cfg").string() + " --out " +
                      (dir / "g1").string())
                  .exit_code,
              2);
}
