#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "dfaf/experiments.hpp"

using namespace dfaf;

namespace {

Scenario small_mc(Scenario s, std::vector<double> grid, std::uint64_t trials)
{
    s.snr_grid_db = std::move(grid);
    s.trials = trials;
    return s;
}

std::string csv_of(const ResultTable& t)
{
    std::ostringstream os;
    write_csv(t, os);
    return os.str();
}

}  // namespace

TEST(Presets, ListAndExpand)
{
    const auto names = presets::list();
    EXPECT_EQ(names.size(), 8u);
    for (const auto& p : names) EXPECT_FALSE(presets::expand(p.name).empty()) << p.name;
    EXPECT_EQ(presets::expand("fig4_varyK").size(), 4u);
    EXPECT_EQ(presets::expand("fig6_diversity_surface").size(), 36u);
    EXPECT_EQ(presets::expand("fig6_g1_1p5_g2_0p5").front().network.relays[1].first_hop.m, 1.5);
    EXPECT_THROW(presets::expand("fig9"), config_error);
}

TEST(Presets, PinnedContents)
{
    const auto f3 = presets::expand("fig3_nakagami_3relay").front();
    EXPECT_EQ(f3.network, NetworkSpec::nakagami(0.5, {1, 1, 2}, {1, 1, 1}));
    EXPECT_EQ(f3.rate, RateSpec::from_rate(1.0));
    EXPECT_EQ(f3.snr_grid_db.size(), 11u);
    EXPECT_EQ(f3.snr_grid_db.back(), 50.0);
    EXPECT_TRUE(f3.wants(Output::bounds));

    const auto f4 = presets::expand("fig4_varyK_K3").front();
    EXPECT_EQ(f4.network.direct.m, 0.8);
    EXPECT_EQ(f4.network.relays.size(), 3u);

    const auto f7 = presets::expand("fig7_mrc_compare").front();
    EXPECT_EQ(f7.combiners, std::vector<Combiner>{Combiner::mrc});
    EXPECT_EQ(f7.snr_grid_db.back(), 25.0);

    const auto f8 = presets::expand("fig8_alpha_sweep").front();
    EXPECT_EQ(f8.alphas, (std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}));
    EXPECT_EQ(f8.total_power_db, 10.0);
    for (const auto& p : presets::list()) {
        for (const auto& s : presets::expand(p.name)) EXPECT_NO_THROW(s.validate()) << s.name;
    }
}

TEST(ScenarioFormat, WriteParseRoundTrip)
{
    for (const auto& p : presets::list()) {
        for (const auto& s : presets::expand(p.name)) {
            std::stringstream ss;
            write_scenario(s, ss);
            EXPECT_EQ(parse_scenario(ss), s) << s.name;
        }
    }
}

TEST(ScenarioFormat, RepositoryFilesMatchPresets)
{
    std::size_t seen = 0;
    for (const auto& entry : std::filesystem::directory_iterator(DFAF_SCENARIO_DIR)) {
        if (entry.path().extension() != ".scn") continue;
        const auto s = parse_scenario_file(entry.path().string());
        const auto preset = presets::expand(s.name);
        ASSERT_EQ(preset.size(), 1u);
        EXPECT_EQ(s, preset.front()) << entry.path();
        ++seen;
    }
    EXPECT_GE(seen, 8u);
}

TEST(ScenarioFormat, Ranges)
{
    std::istringstream in("name = x\nm0 = 1\nm1 = 1\nm2 = 1\nrate = 1\nsnr_db = 0:2.5:10 # comment\n");
    const auto s = parse_scenario(in);
    EXPECT_EQ(s.snr_grid_db, (std::vector<double>{0, 2.5, 5, 7.5, 10}));
    EXPECT_EQ(s.rate.delta, 3.0);
}

TEST(ScenarioFormat, Errors)
{
    const std::string base = "name = x\nm0 = 1\nm1 = 1\nm2 = 1\nrate = 1\nsnr_db = 0 5\n";
    auto parse = [](const std::string& text) {
        std::istringstream in(text);
        return parse_scenario(in);
    };
    EXPECT_NO_THROW(parse(base));
    EXPECT_THROW(parse("m0 = 1\n"), config_error);
    EXPECT_THROW(parse(base + "colour = red\n"), config_error);
    EXPECT_THROW(parse(base + "m0 = 2\n"), config_error);
    EXPECT_THROW(parse(base + "seed = -1\n"), config_error);
    EXPECT_THROW(parse(base + "junk\n"), config_error);
    EXPECT_THROW(parse("name = x\nm0 = 1\nm1 = 1 2\nm2 = 1\nrate = 1\nsnr_db = 0\n"), config_error);
    EXPECT_THROW(parse("name = x\nm0 = 0.2\nm1 = 1\nm2 = 1\nrate = 1\nsnr_db = 0\n"), config_error);
    EXPECT_THROW(parse("name = x\nm0 = 1\nm1 = 1\nm2 = 1\nrate = 1\nsnr_db = 5 0\n"), config_error);
    EXPECT_THROW(parse(base + "combiners = mrc\n"), config_error);
    EXPECT_THROW(parse(base + "outputs = bounds\n"), config_error);
    EXPECT_THROW(parse(base + "outputs = montecarlo\ntrials = 10\n"), config_error);
    EXPECT_THROW(parse(base + "schemes = xf\n"), config_error);
    EXPECT_THROW(parse_scenario_file("/nonexistent/file.scn"), config_error);
}

TEST(ScenarioValidate, AlphaSweepRules)
{
    auto s = presets::fig8_alpha();
    EXPECT_NO_THROW(s.validate());
    s.alphas = {0.5, 1.0};
    EXPECT_THROW(s.validate(), config_error);
    s = presets::fig8_alpha();
    s.combiners = {Combiner::sc};
    EXPECT_THROW(s.validate(), config_error);
    EXPECT_THROW(run_scenario(presets::fig8_alpha()), config_error);
    EXPECT_THROW(sweep_alpha(presets::fig7_mrc()), config_error);
}

TEST(ResultCsv, RoundTripIsExact)
{
    auto s = small_mc(presets::fig3_nakagami(), {0.0, 7.5, 30.0}, 5000);
    s.mc_max_snr_db = 10.0;
    const auto table = run_scenario(s, {1, 1024});
    ASSERT_EQ(table.rows.size(), 3u * 5u);
    std::istringstream in(csv_of(table));
    const auto back = parse_csv(in);
    EXPECT_EQ(back.rows, table.rows);
    // MC cells are blank above mc_max_snr_db; AF rows have no asymptote.
    const auto& last = table.rows[10];
    EXPECT_EQ(last.snr_db, 30.0);
    EXPECT_FALSE(last.outage_mc);
    EXPECT_TRUE(last.outage_analytic);
    EXPECT_TRUE(table.rows[0].outage_mc);
    EXPECT_FALSE(table.rows[2].outage_asymptotic);
    EXPECT_EQ(table.rows[3].scheme, "AF_LOWER");
    EXPECT_EQ(table.rows[4].scheme, "AF_UPPER");
    EXPECT_EQ(csv_of(table).substr(0, kCurveCsvHeader.size()), kCurveCsvHeader);
}

TEST(ResultCsv, RejectsBadHeader)
{
    std::istringstream in("snr,scheme\n1,DF\n");
    EXPECT_THROW(parse_csv(in), config_error);
    std::istringstream in2(std::string(kAlphaCsvHeader) + "\n0.5,DF,MRC,0.1\n");
    EXPECT_THROW(parse_alpha_csv(in2), config_error);
}

TEST(RunScenario, ByteIdenticalAcrossRunsAndWorkers)
{
    const auto s = small_mc(presets::fig7_mrc(), {0.0, 5.0, 10.0}, 40'000);
    const auto a = csv_of(run_scenario(s, {1, 4096}));
    const auto b = csv_of(run_scenario(s, {1, 4096}));
    const auto c = csv_of(run_scenario(s, {3, 4096}));
    EXPECT_EQ(a, b);
    EXPECT_EQ(a, c);
    auto t = s;
    t.seed = 2;
    EXPECT_NE(a, csv_of(run_scenario(t, {1, 4096})));
}

TEST(RunScenario, AnalyticInsideMonteCarloInterval)
{
    const auto s = small_mc(presets::fig2_rayleigh(2), {10.0}, 1'000'000);
    const auto table = run_scenario(s);
    EXPECT_EQ(table.dominance_violations, 0u);
    for (const auto& r : table.rows) {
        ASSERT_TRUE(r.outage_analytic && r.outage_mc);
        EXPECT_GE(*r.outage_analytic, *r.mc_ci_low) << r.scheme;
        EXPECT_LE(*r.outage_analytic, *r.mc_ci_high) << r.scheme;
    }
}

TEST(RunScenario, WarnsOnFewFailures)
{
    auto s = small_mc(presets::fig2_rayleigh(3), {25.0}, 1000);
    const auto table = run_scenario(s);
    EXPECT_FALSE(table.warnings.empty());
}

TEST(SweepAlpha, RowsAndCsvRoundTrip)
{
    auto s = presets::fig8_alpha();
    s.alphas = {0.2, 0.5};
    s.trials = 20'000;
    const auto table = sweep_alpha(s, {2, 4096});
    ASSERT_EQ(table.rows.size(), 6u);
    EXPECT_EQ(table.dominance_violations, 0u);
    EXPECT_LE(table.at(0.5, Protocol::dfaf).failures, table.at(0.5, Protocol::af).failures);
    std::ostringstream os;
    write_csv(table, os);
    std::istringstream in(os.str());
    EXPECT_EQ(parse_alpha_csv(in).rows, table.rows);
    EXPECT_THROW(table.at(0.3, Protocol::df), config_error);
}

TEST(FitDiversity, ExactPowerLaw)
{
    std::vector<CurveSample> curve;
    for (double db = 20.0; db <= 50.0; db += 1.0) curve.push_back({db, 7.0 * std::pow(10.0, -2.0 * db / 10.0)});
    const auto fit = fit_diversity(curve, 35.0, 45.0, 2.0);
    EXPECT_NEAR(fit.fitted_slope, 2.0, 1e-12);
    EXPECT_EQ(fit.points, 11u);
    EXPECT_LT(fit.residual, 1e-12);
    EXPECT_EQ(fit.theoretical_d, 2.0);
}

TEST(FitDiversity, Errors)
{
    std::vector<CurveSample> curve{{35.0, 1e-3}, {40.0, 0.0}, {45.0, 1e-5}};
    EXPECT_THROW(fit_diversity(curve, 35.0, 45.0), domain_error);
    curve[1].outage = 1e-4;
    EXPECT_THROW(fit_diversity(curve, 36.0, 45.0), config_error);
    EXPECT_NO_THROW(fit_diversity(curve, 35.0, 45.0));
}

TEST(FitDiversity, AnalyticCurveSlope)
{
    const auto s = presets::fig4_vary_k(3);
    const auto fit = fit_diversity(analytic_curve(s, Protocol::dfaf, 35.0, 45.0), 35.0, 45.0);
    EXPECT_NEAR(theoretical_diversity(s.network, Protocol::dfaf), 3.8, 1e-15);
    EXPECT_NEAR(fit.fitted_slope, 3.8, 0.15);
}

TEST(FitDiversity, SurfaceTracksMinimumShape)
{
    for (const auto& s : presets::expand("fig6_diversity_surface")) {
        const double g1 = s.network.relays[0].first_hop.m;
        const double g2 = s.network.relays[0].second_hop.m;
        const double d = 0.5 + 2.0 * std::min(g1, g2);
        EXPECT_EQ(theoretical_diversity(s.network, Protocol::dfaf), d);
        const auto fit = fit_diversity(analytic_curve(s, Protocol::dfaf, 40.0, 50.0), 40.0, 50.0);
        EXPECT_NEAR(fit.fitted_slope, d, 0.05 * d) << s.name;
    }
}
