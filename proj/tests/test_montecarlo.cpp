#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "dfaf/analytic.hpp"
#include "dfaf/montecarlo.hpp"

using namespace dfaf;

namespace {

const RateSpec kRate = RateSpec::from_rate(1.0);
constexpr Scheme kDfafSc{Protocol::dfaf, Combiner::sc};
constexpr Scheme kDfSc{Protocol::df, Combiner::sc};

NetworkSpec fig3() { return NetworkSpec::nakagami(0.5, {1, 1, 2}, {1, 1, 1}); }

}  // namespace

TEST(EvaluateTrial, ZeroGainIsOutage)
{
    const ChannelDraw draw{0.0, {0.0, 0.0}, {0.0, 0.0}};
    for (auto p : {Protocol::dfaf, Protocol::df, Protocol::af}) {
        for (auto c : {Combiner::sc, Combiner::mrc}) {
            EXPECT_TRUE(evaluate_trial(draw, kRate, {p, c}).outage);
        }
    }
}

TEST(EvaluateTrial, DecodedSingleRelay)
{
    const ChannelDraw draw{0.0, {10.0 * kRate.delta}, {5.0 * kRate.gamma_th}};
    const auto out = evaluate_trial(draw, kRate, kDfafSc);
    EXPECT_TRUE(out.relays[0].decoded);
    ASSERT_TRUE(out.selected);
    EXPECT_EQ(*out.selected, 0u);
    EXPECT_EQ(out.combined_snr, 5.0 * kRate.gamma_th);
    EXPECT_FALSE(out.outage);
}

TEST(EvaluateTrial, AllDecodedDfafEqualsDf)
{
    const ChannelDraw draw{1.0, {4.0, 9.0, 30.0}, {2.0, 7.5, 6.0}};
    for (auto c : {Combiner::sc, Combiner::mrc}) {
        const auto a = evaluate_trial(draw, kRate, {Protocol::dfaf, c});
        const auto b = evaluate_trial(draw, kRate, {Protocol::df, c});
        EXPECT_EQ(a.selected, b.selected);
        EXPECT_EQ(a.combined_snr, b.combined_snr);
        EXPECT_EQ(*a.selected, 1u);
    }
}

TEST(EvaluateTrial, MixedDecodingPicksLargestEquivalentSnr)
{
    // Relay 0 undecoded with strong second hop; relay 1 decoded with weak one.
    const ChannelDraw draw{0.5, {2.9, 3.5}, {100.0, 1.0}};
    const auto out = evaluate_trial(draw, kRate, kDfafSc);
    EXPECT_FALSE(out.relays[0].decoded);
    EXPECT_DOUBLE_EQ(out.relays[0].equivalent_snr, af_path_snr(2.9, 100.0));
    EXPECT_EQ(*out.selected, 0u);
    const auto df = evaluate_trial(draw, kRate, kDfSc);
    EXPECT_EQ(*df.selected, 1u);
    EXPECT_EQ(df.combined_snr, 1.0);
}

TEST(EvaluateTrial, DfWithoutDecodingFallsBackToDirect)
{
    const ChannelDraw draw{2.0, {1.0, 2.5}, {50.0, 80.0}};
    for (auto c : {Combiner::sc, Combiner::mrc}) {
        const auto out = evaluate_trial(draw, kRate, {Protocol::df, c});
        EXPECT_FALSE(out.selected);
        EXPECT_EQ(out.combined_snr, 2.0);
        EXPECT_TRUE(out.outage);
    }
    // MRC adds the AF path for DF-AF.
    const auto mrc = evaluate_trial(draw, kRate, {Protocol::dfaf, Combiner::mrc});
    EXPECT_DOUBLE_EQ(mrc.combined_snr, 2.0 + af_path_snr(2.5, 80.0));
    EXPECT_FALSE(mrc.outage);
}

TEST(EvaluateTrial, TiesGoToLowestIndex)
{
    const ChannelDraw draw{0.0, {5.0, 5.0, 5.0}, {4.0, 4.0, 4.0}};
    EXPECT_EQ(*evaluate_trial(draw, kRate, kDfafSc).selected, 0u);
}

TEST(EvaluateTrial, NoRelaysIsDirectTransmission)
{
    const ChannelDraw draw{3.5, {}, {}};
    const auto out = evaluate_trial(draw, kRate, {Protocol::dfaf, Combiner::mrc});
    EXPECT_FALSE(out.selected);
    EXPECT_EQ(out.combined_snr, 3.5);
    EXPECT_FALSE(out.outage);
}

TEST(RunTrial, DrawsEveryLink)
{
    RandomStream rng(4);
    const auto out = run_trial(fig3(), PowerSpec::equal(10.0), kRate, kDfafSc, rng);
    EXPECT_EQ(out.relays.size(), 3u);
    for (const auto& r : out.relays) {
        EXPECT_GT(r.gamma1, 0.0);
        EXPECT_GT(r.gamma2, 0.0);
        EXPECT_EQ(r.decoded, r.gamma1 >= kRate.delta);
    }
}

TEST(LoggedTrials, SelectionMaximisesEquivalentSnr)
{
    const auto trials = log_trials(fig3(), PowerSpec::equal(5.0), kRate, kDfafSc, 50'000, 8);
    for (const auto& t : trials) {
        ASSERT_TRUE(t.selected);
        for (const auto& r : t.relays) {
            const double expected = r.decoded ? r.gamma2 : af_path_snr(r.gamma1, r.gamma2);
            EXPECT_EQ(r.equivalent_snr, expected);
            EXPECT_GE(t.relays[*t.selected].equivalent_snr, r.equivalent_snr);
        }
    }
}

TEST(LoggedTrials, AfPathSqueezeBound)
{
    const auto trials = log_trials(fig3(), PowerSpec::equal(3.0), kRate, {Protocol::af, Combiner::sc}, 50'000, 9);
    std::size_t lower_checked = 0;
    for (const auto& t : trials) {
        for (const auto& r : t.relays) {
            // g1 g2 / (g1 + g2 + 1) = harmonic half-mean * s / (s + 1), s = g1 + g2,
            // and the harmonic half-mean lies in [min / 2, min].
            const double lo = std::min(r.gamma1, r.gamma2);
            const double sum = r.gamma1 + r.gamma2;
            EXPECT_LT(r.equivalent_snr, lo);
            EXPECT_GT(r.equivalent_snr, 0.0);
            if (lo >= 1.0) {
                EXPECT_GE(r.equivalent_snr * (1.0 + 1e-12), 0.5 * lo * sum / (sum + 1.0));
                ++lower_checked;
            }
        }
    }
    EXPECT_GT(lower_checked, 10'000u);
}

TEST(LoggedTrials, CoupledDfafDominatesPerTrial)
{
    for (auto c : {Combiner::sc, Combiner::mrc}) {
        const auto power = PowerSpec::split(10.0, 0.3, 1.0);
        const auto a = log_trials(fig3(), power, kRate, {Protocol::dfaf, c}, 20'000, 10);
        const auto d = log_trials(fig3(), power, kRate, {Protocol::df, c}, 20'000, 10);
        const auto f = log_trials(fig3(), power, kRate, {Protocol::af, c}, 20'000, 10);
        for (std::size_t i = 0; i < a.size(); ++i) {
            ASSERT_EQ(a[i].gamma0, d[i].gamma0);
            EXPECT_GE(a[i].combined_snr, d[i].combined_snr);
            EXPECT_GE(a[i].combined_snr, f[i].combined_snr);
        }
    }
}

TEST(Wilson, KnownIntervalAndQuantile)
{
    EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-12);
    EXPECT_NEAR(normal_quantile(0.995), 2.5758293035489, 1e-12);
    const auto [lo, hi] = wilson_interval(10, 100, 0.95);
    EXPECT_NEAR(lo, 0.05523, 1e-5);
    EXPECT_NEAR(hi, 0.17437, 1e-5);
    const auto [zlo, zhi] = wilson_interval(0, 1000, 0.99);
    EXPECT_EQ(zlo, 0.0);
    EXPECT_GT(zhi, 0.0);
    const auto [flo, fhi] = wilson_interval(1000, 1000, 0.99);
    EXPECT_EQ(fhi, 1.0);
    EXPECT_LT(flo, 1.0);
}

TEST(Wilson, ContainsPointEstimate)
{
    for (std::uint64_t n : {1000ULL, 12345ULL, 1000000ULL}) {
        for (std::uint64_t f = 0; f <= n; f += n / 37 + 1) {
            const auto e = make_estimate(f, n, 0.99, 0);
            EXPECT_LE(e.ci_low, e.probability);
            EXPECT_GE(e.ci_high, e.probability);
            EXPECT_EQ(e.probability, static_cast<double>(f) / n);
        }
    }
}

TEST(EstimateOutage, CoversHandValue)
{
    const auto est = estimate_outage(NetworkSpec::rayleigh(1), PowerSpec::equal(10.0), kRate, kDfafSc, 1'000'000, 1);
    EXPECT_EQ(est.trials, 1'000'000u);
    EXPECT_TRUE(est.covers(0.1169398));
    EXPECT_EQ(est.master_seed, 1u);
    EXPECT_EQ(est.confidence, 0.99);
}

TEST(EstimateOutage, DfAndDfafAgreeUnderSc)
{
    const auto power = PowerSpec::equal(std::pow(10.0, 0.5));
    const auto a = estimate_outage(fig3(), power, kRate, kDfafSc, 1'000'000, 2);
    const auto b = estimate_outage(fig3(), power, kRate, kDfSc, 1'000'000, 2);
    EXPECT_FALSE(disjoint(a, b));
    // Uncoupled runs use independent streams.
    EXPECT_NE(a.failures, b.failures);
}

TEST(EstimateOutage, IndependentOfWorkerCount)
{
    EngineOptions one{1, 4096};
    EngineOptions many{4, 4096};
    const auto power = PowerSpec::equal(3.0);
    const auto a = estimate_outage(fig3(), power, kRate, kDfafSc, 50'000, 77, 0.99, one);
    const auto b = estimate_outage(fig3(), power, kRate, kDfafSc, 50'000, 77, 0.99, many);
    EXPECT_EQ(a.failures, b.failures);
    const auto c = estimate_outage(fig3(), power, kRate, kDfafSc, 50'000, 78, 0.99, many);
    EXPECT_NE(a.failures, c.failures);
}

TEST(EstimateOutage, RejectsTinyRuns)
{
    EXPECT_THROW(estimate_outage(fig3(), PowerSpec::equal(1.0), kRate, kDfafSc, 999, 1), config_error);
}

TEST(EstimateCoupled, MrcOrderingAtTenDb)
{
    const Scheme schemes[] = {{Protocol::dfaf, Combiner::mrc}, {Protocol::df, Combiner::mrc},
                              {Protocol::af, Combiner::mrc}};
    const auto c = estimate_coupled(fig3(), PowerSpec::equal(10.0), kRate, schemes, 200'000, 3);
    EXPECT_EQ(c.dominance_violations, 0u);
    EXPECT_EQ(c.dominance_checks, 400'000u);
    const auto& dfaf = c.at(schemes[0]);
    EXPECT_LE(dfaf.failures, c.at(schemes[1]).failures);
    EXPECT_LE(dfaf.failures, c.at(schemes[2]).failures);
    EXPECT_LT(dfaf.probability, c.at(schemes[1]).probability);
}

TEST(EstimateCurve, MonotoneAndOrderedByRelayCount)
{
    const std::vector<double> grid{0.0, 5.0, 10.0, 15.0};
    std::vector<std::vector<CurvePoint>> curves;
    for (std::size_t k = 1; k <= 3; ++k) {
        curves.push_back(estimate_curve(NetworkSpec::rayleigh(k), kRate, kDfafSc, grid, 1'000'000, 4));
    }
    for (const auto& curve : curves) {
        ASSERT_EQ(curve.size(), grid.size());
        for (std::size_t i = 1; i < curve.size(); ++i) {
            EXPECT_LE(curve[i].estimate.ci_low, curve[i - 1].estimate.ci_high);
        }
    }
    // At 15 dB more relays give strictly lower outage.
    EXPECT_LT(curves[1].back().estimate.ci_high, curves[0].back().estimate.ci_low);
    EXPECT_LT(curves[2].back().estimate.ci_high, curves[1].back().estimate.ci_low);
}

TEST(EstimateCurve, PointsUseDisjointStreams)
{
    // Nearly equal SNRs, so only the stream keys differ.
    const std::vector<double> grid{10.0, 10.000001};
    const auto c = estimate_curve(NetworkSpec::rayleigh(1), kRate, kDfafSc, grid, 100'000, 5);
    EXPECT_NE(c[0].estimate.failures, c[1].estimate.failures);
    EXPECT_THROW(estimate_curve(NetworkSpec::rayleigh(1), kRate, kDfafSc, std::vector<double>{5.0, 5.0}, 1000, 1),
                 config_error);
    EXPECT_THROW(estimate_curve(NetworkSpec::rayleigh(1), kRate, kDfafSc, std::vector<double>{}, 1000, 1),
                 config_error);
}

TEST(EstimateCurve, MatchesAnalyticPointwise)
{
    const std::vector<double> grid{0.0, 5.0, 10.0};
    const auto net = fig3();
    const auto curve = estimate_curve(net, kRate, kDfafSc, grid, 1'000'000, 6);
    for (const auto& pt : curve) {
        EXPECT_TRUE(pt.estimate.covers(outage_dfaf_sc(net, kRate, db_to_linear(pt.snr_db)))) << pt.snr_db;
        EXPECT_FALSE(pt.low_failures);
    }
}
