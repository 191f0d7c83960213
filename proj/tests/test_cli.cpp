#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <string>

namespace {

struct Run {
    int status;
    std::string out;
};

Run run(const std::string& args)
{
    const std::string cmd = std::string(DFAF_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return {-1, {}};
    std::string out;
    std::array<char, 4096> buf{};
    while (const auto n = std::fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), n);
    const int raw = pclose(pipe);
    return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, out};
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST(Cli, PresetsList)
{
    const auto r = run("presets list");
    EXPECT_EQ(r.status, 0);
    EXPECT_NE(r.out.find("fig3_nakagami_3relay"), std::string::npos);
    EXPECT_NE(r.out.find("fig8_alpha_sweep"), std::string::npos);
}

TEST(Cli, ConfigErrorsExitTwo)
{
    EXPECT_EQ(run("analytic --scenario fig7_mrc_compare").status, 2);
    EXPECT_EQ(run("analytic --scenario no_such_preset").status, 2);
    EXPECT_EQ(run("analytic").status, 2);
    EXPECT_EQ(run("bogus-command").status, 2);
    EXPECT_EQ(run("simulate --scenario fig7_mrc_compare --trials 10").status, 2);
    EXPECT_EQ(run("presets show").status, 2);
}

TEST(Cli, AnalyticCsv)
{
    const auto r = run("analytic --scenario fig2_rayleigh_K1");
    ASSERT_EQ(r.status, 0);
    EXPECT_EQ(first_line(r.out),
              "snr_db,scheme,combiner,outage_analytic,outage_asymptotic,outage_mc,mc_ci_low,mc_ci_high,trials,failures");
    // 11 grid points x 3 schemes + header.
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 34);
}

TEST(Cli, GroupPresetSections)
{
    const auto r = run("analytic --scenario fig4_varyK");
    ASSERT_EQ(r.status, 0);
    EXPECT_EQ(first_line(r.out), "# fig4_varyK_K1");
    EXPECT_NE(r.out.find("# fig4_varyK_K4"), std::string::npos);
}

TEST(Cli, SimulateDeterministicAcrossWorkers)
{
    const std::string args = "simulate --scenario fig7_mrc_compare --trials 20000 --seed 5";
    const auto a = run(args + " --workers 1");
    const auto b = run(args + " --workers 3");
    ASSERT_EQ(a.status, 0);
    EXPECT_EQ(a.out, b.out);
    EXPECT_NE(a.out, run("simulate --scenario fig7_mrc_compare --trials 20000 --seed 6").out);
}

TEST(Cli, FitDiversity)
{
    const auto r = run("fit-diversity --scenario fig4_varyK_K3 --window 35 45");
    ASSERT_EQ(r.status, 0);
    EXPECT_EQ(first_line(r.out), "scenario,scheme,window_lo_db,window_hi_db,points,fitted_slope,theoretical_d,residual");
    EXPECT_NE(r.out.find("fig4_varyK_K3,DFAF,35,45,11,3."), std::string::npos) << r.out;
}

TEST(Cli, SweepAlpha)
{
    const auto r = run("sweep-alpha --scenario fig8_alpha_sweep --trials 2000");
    ASSERT_EQ(r.status, 0);
    EXPECT_EQ(first_line(r.out), "alpha,scheme,combiner,outage_mc,mc_ci_low,mc_ci_high,trials,failures");
    EXPECT_EQ(run("sweep-alpha --scenario fig3_nakagami_3relay").status, 2);
}

TEST(Cli, ScenarioFileRoundTrip)
{
    const auto shown = run("presets show fig3_nakagami_3relay");
    ASSERT_EQ(shown.status, 0);
    const std::string path = ::testing::TempDir() + "dfaf_cli_fig3.scn";
    FILE* f = std::fopen(path.c_str(), "w");
    ASSERT_NE(f, nullptr);
    std::fwrite(shown.out.data(), 1, shown.out.size(), f);
    std::fclose(f);
    EXPECT_EQ(run("asymptotic --scenario " + path).out, run("asymptotic --scenario fig3_nakagami_3relay").out);
}
