#ifndef DFAF_MONTECARLO_HPP
#define DFAF_MONTECARLO_HPP

///
/// \file montecarlo.hpp
///
/// Trial-level simulation of opportunistic DF-AF, DF and AF relaying with
/// selection or maximal-ratio combining at the destination.
///
/// Trials are grouped into fixed-size blocks. Every block owns one random
/// stream per link, seeded from (master seed, grid point, salt, block, link),
/// so failure counts do not depend on how blocks are spread over workers.
///

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "dfaf/analytic.hpp"
#include "dfaf/channel.hpp"
#include "dfaf/errors.hpp"

namespace dfaf {

enum class Protocol { dfaf, df, af };
enum class Combiner { sc, mrc };

struct Scheme {
    Protocol protocol = Protocol::dfaf;
    Combiner combiner = Combiner::sc;
    friend bool operator==(const Scheme&, const Scheme&) = default;
};

inline std::string_view to_string(Protocol p)
{
    switch (p) {
    case Protocol::dfaf: return "DFAF";
    case Protocol::df: return "DF";
    case Protocol::af: return "AF";
    }
    return "?";
}

inline std::string_view to_string(Combiner c) { return c == Combiner::sc ? "SC" : "MRC"; }

inline Protocol parse_protocol(std::string_view s)
{
    if (s == "DFAF" || s == "dfaf") return Protocol::dfaf;
    if (s == "DF" || s == "df") return Protocol::df;
    if (s == "AF" || s == "af") return Protocol::af;
    throw config_error("unknown scheme '" + std::string(s) + "' (expected dfaf, df or af)");
}

inline Combiner parse_combiner(std::string_view s)
{
    if (s == "SC" || s == "sc") return Combiner::sc;
    if (s == "MRC" || s == "mrc") return Combiner::mrc;
    throw config_error("unknown combiner '" + std::string(s) + "' (expected sc or mrc)");
}

/// Instantaneous SNRs of every link for one trial.
struct ChannelDraw {
    double gamma0 = 0.0;
    std::vector<double> gamma1;
    std::vector<double> gamma2;
};

struct RelayOutcome {
    double gamma1;
    double gamma2;
    bool decoded;           // gamma1 >= delta
    double equivalent_snr;  // path SNR under the scheme's forwarding rule
};

struct TrialOutcome {
    double gamma0 = 0.0;
    std::vector<RelayOutcome> relays;
    std::optional<std::size_t> selected;  // empty: no usable relay path
    double combined_snr = 0.0;
    bool outage = true;
};

/// g1 g2 / (g1 + g2 + 1)
inline double af_path_snr(double g1, double g2) { return g1 * g2 / (g1 + g2 + 1.0); }

/// Path SNR of one relay under a protocol. DF-AF: g2 when the relay decoded,
/// the AF value otherwise. DF: g2 when decoded, 0 otherwise. AF: the AF value.
inline double relay_path_snr(Protocol p, double g1, double g2, double delta)
{
    const bool decoded = g1 >= delta;
    switch (p) {
    case Protocol::dfaf: return decoded ? g2 : af_path_snr(g1, g2);
    case Protocol::df: return decoded ? g2 : 0.0;
    case Protocol::af: return af_path_snr(g1, g2);
    }
    return 0.0;
}

/// Apply selection and combining to a fixed channel draw. Ties go to the
/// lowest relay index.
inline void evaluate_trial(const ChannelDraw& draw, const RateSpec& rs, Scheme scheme, TrialOutcome& out)
{
    const std::size_t k = draw.gamma1.size();
    out.gamma0 = draw.gamma0;
    out.relays.resize(k);
    out.selected.reset();
    double best = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double g1 = draw.gamma1[i];
        const double g2 = draw.gamma2[i];
        const double path = relay_path_snr(scheme.protocol, g1, g2, rs.delta);
        out.relays[i] = {g1, g2, g1 >= rs.delta, path};
        if (!out.selected || path > best) {
            best = path;
            out.selected = i;
        }
    }
    // DF with no decoding relay: the destination relies on the direct link.
    if (out.selected && scheme.protocol == Protocol::df && !out.relays[*out.selected].decoded) {
        out.selected.reset();
        best = 0.0;
    }
    out.combined_snr = scheme.combiner == Combiner::sc ? std::max(draw.gamma0, best) : draw.gamma0 + best;
    out.outage = out.combined_snr < rs.gamma_th;
}

inline TrialOutcome evaluate_trial(const ChannelDraw& draw, const RateSpec& rs, Scheme scheme)
{
    TrialOutcome out;
    evaluate_trial(draw, rs, scheme, out);
    return out;
}

/// One random stream per link: index 0 is S->D, then (S->R_i, R_i->D) pairs.
class LinkStreams {
public:
    LinkStreams(std::uint64_t master_seed, std::uint64_t point, std::uint64_t salt, std::uint64_t block,
                std::size_t relays)
    {
        streams_.reserve(1 + 2 * relays);
        for (std::uint64_t link = 0; link < 1 + 2 * relays; ++link) {
            streams_.emplace_back(derive_seed(master_seed, {point, salt, block, link}));
        }
    }

    RandomStream& direct() { return streams_[0]; }
    RandomStream& first_hop(std::size_t i) { return streams_[1 + 2 * i]; }
    RandomStream& second_hop(std::size_t i) { return streams_[2 + 2 * i]; }

private:
    std::vector<RandomStream> streams_;
};

inline void draw_channels(const NetworkSnr& snr, LinkStreams& streams, ChannelDraw& out)
{
    const std::size_t k = snr.relays.size();
    out.gamma1.resize(k);
    out.gamma2.resize(k);
    out.gamma0 = sample_snr(snr.direct, streams.direct());
    for (std::size_t i = 0; i < k; ++i) {
        out.gamma1[i] = sample_snr(snr.relays[i].first_hop, streams.first_hop(i));
        out.gamma2[i] = sample_snr(snr.relays[i].second_hop, streams.second_hop(i));
    }
}

/// Draw all 2K + 1 link SNRs from one stream and evaluate the scheme.
inline TrialOutcome run_trial(const NetworkSpec& net, const PowerSpec& power, const RateSpec& rs, Scheme scheme,
                              RandomStream& rng)
{
    const auto snr = link_budget(net, power);
    ChannelDraw draw;
    draw.gamma0 = sample_snr(snr.direct, rng);
    for (const auto& r : snr.relays) {
        draw.gamma1.push_back(sample_snr(r.first_hop, rng));
        draw.gamma2.push_back(sample_snr(r.second_hop, rng));
    }
    return evaluate_trial(draw, rs, scheme);
}

// ---------------------------------------------------------------------------
// Estimation
// ---------------------------------------------------------------------------

/// Standard normal quantile, by bisection on erfc.
inline double normal_quantile(double p)
{
    if (!(p > 0.0 && p < 1.0)) throw domain_error("normal_quantile: p must lie in (0, 1)");
    double lo = -40.0;
    double hi = 40.0;
    for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double cdf = 0.5 * std::erfc(-mid / std::numbers::sqrt2);
        (cdf < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Wilson score interval for a binomial proportion.
inline std::pair<double, double> wilson_interval(std::uint64_t failures, std::uint64_t trials, double confidence)
{
    if (trials == 0) throw domain_error("wilson_interval: no trials");
    if (!(confidence > 0.0 && confidence < 1.0)) throw domain_error("wilson_interval: confidence must lie in (0, 1)");
    const double z = normal_quantile(1.0 - 0.5 * (1.0 - confidence));
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(failures) / n;
    const double z2n = z * z / n;
    const double denom = 1.0 + z2n;
    const double center = (p + 0.5 * z2n) / denom;
    const double half = z / denom * std::sqrt(p * (1.0 - p) / n + 0.25 * z2n / n);
    return {std::clamp(std::min(center - half, p), 0.0, 1.0), std::clamp(std::max(center + half, p), 0.0, 1.0)};
}

struct OutageEstimate {
    double probability = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t failures = 0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double confidence = 0.99;
    std::uint64_t master_seed = 0;

    bool covers(double p) const { return ci_low <= p && p <= ci_high; }
};

inline OutageEstimate make_estimate(std::uint64_t failures, std::uint64_t trials, double confidence,
                                    std::uint64_t seed)
{
    const auto [lo, hi] = wilson_interval(failures, trials, confidence);
    return {static_cast<double>(failures) / static_cast<double>(trials), trials, failures, lo, hi, confidence, seed};
}

/// True when the two intervals share no point.
inline bool disjoint(const OutageEstimate& a, const OutageEstimate& b)
{
    return a.ci_high < b.ci_low || b.ci_high < a.ci_low;
}

struct EngineOptions {
    unsigned workers = 0;  // 0: hardware concurrency
    std::uint64_t block_size = 1U << 15;
};

inline constexpr double kDefaultConfidence = 0.99;
inline constexpr std::uint64_t kMinTrials = 1000;
inline constexpr std::uint64_t kMinReliableFailures = 30;

/// Outcome of running several schemes on shared channel draws.
struct CoupledEstimate {
    std::vector<Scheme> schemes;
    std::vector<OutageEstimate> estimates;
    /// Trials where DF-AF's combined SNR fell below DF's or AF's under the
    /// same combiner.
    std::uint64_t dominance_violations = 0;
    /// Number of (trial, DF-AF vs other) comparisons made.
    std::uint64_t dominance_checks = 0;

    const OutageEstimate& at(Scheme s) const
    {
        for (std::size_t i = 0; i < schemes.size(); ++i) {
            if (schemes[i] == s) return estimates[i];
        }
        throw config_error("scheme not part of this coupled run");
    }
};

namespace detail {

struct BlockTally {
    std::vector<std::uint64_t> failures;
    std::uint64_t violations = 0;
    std::uint64_t checks = 0;
};

template <typename Fn>
void for_each_block(std::uint64_t blocks, unsigned workers, Fn&& fn)
{
    if (workers == 0) workers = std::max(1U, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, blocks));
    if (workers <= 1) {
        for (std::uint64_t b = 0; b < blocks; ++b) fn(b);
        return;
    }
    std::atomic<std::uint64_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::uint64_t b = next++; b < blocks; b = next++) fn(b);
        });
    }
}

inline constexpr std::uint64_t kCoupledSalt = 0;

inline std::uint64_t uncoupled_salt(Scheme s)
{
    return 1 + static_cast<std::uint64_t>(s.protocol) * 2 + static_cast<std::uint64_t>(s.combiner);
}

inline CoupledEstimate run_engine(const NetworkSnr& snr, const RateSpec& rs, std::span<const Scheme> schemes,
                                  std::uint64_t trials, std::uint64_t seed, std::uint64_t point,
                                  std::uint64_t salt, double confidence, const EngineOptions& opts)
{
    if (trials < kMinTrials) throw config_error("Monte Carlo runs need at least 1000 trials");
    if (schemes.empty()) throw config_error("no schemes requested");
    if (opts.block_size == 0) throw config_error("block size must be positive");
    const std::uint64_t blocks = (trials + opts.block_size - 1) / opts.block_size;
    std::vector<BlockTally> tallies(blocks);

    // Index of the DF-AF scheme per combiner, for the dominance check.
    std::optional<std::size_t> dfaf_index[2];
    for (std::size_t s = 0; s < schemes.size(); ++s) {
        if (schemes[s].protocol == Protocol::dfaf) dfaf_index[static_cast<int>(schemes[s].combiner)] = s;
    }

    for_each_block(blocks, opts.workers, [&](std::uint64_t b) {
        const std::uint64_t first = b * opts.block_size;
        const std::uint64_t count = std::min(opts.block_size, trials - first);
        LinkStreams streams(seed, point, salt, b, snr.relays.size());
        ChannelDraw draw;
        std::vector<TrialOutcome> outcomes(schemes.size());
        BlockTally tally{std::vector<std::uint64_t>(schemes.size(), 0), 0, 0};
        for (std::uint64_t t = 0; t < count; ++t) {
            draw_channels(snr, streams, draw);
            for (std::size_t s = 0; s < schemes.size(); ++s) {
                evaluate_trial(draw, rs, schemes[s], outcomes[s]);
                tally.failures[s] += outcomes[s].outage ? 1 : 0;
            }
            for (std::size_t s = 0; s < schemes.size(); ++s) {
                const auto ref = dfaf_index[static_cast<int>(schemes[s].combiner)];
                if (!ref || *ref == s) continue;
                ++tally.checks;
                if (outcomes[*ref].combined_snr < outcomes[s].combined_snr) ++tally.violations;
            }
        }
        tallies[b] = std::move(tally);
    });

    CoupledEstimate out;
    out.schemes.assign(schemes.begin(), schemes.end());
    std::vector<std::uint64_t> failures(schemes.size(), 0);
    for (const auto& t : tallies) {
        for (std::size_t s = 0; s < schemes.size(); ++s) failures[s] += t.failures[s];
        out.dominance_violations += t.violations;
        out.dominance_checks += t.checks;
    }
    for (auto f : failures) out.estimates.push_back(make_estimate(f, trials, confidence, seed));
    return out;
}

}  // namespace detail

/// Monte Carlo outage estimate for one scheme with its own random streams.
inline OutageEstimate estimate_outage(const NetworkSpec& net, const PowerSpec& power, const RateSpec& rs,
                                      Scheme scheme, std::uint64_t trials, std::uint64_t seed,
                                      double confidence = kDefaultConfidence, const EngineOptions& opts = {},
                                      std::uint64_t point = 0)
{
    rs.validate();
    const auto snr = link_budget(net, power);
    const Scheme one[] = {scheme};
    return detail::run_engine(snr, rs, one, trials, seed, point, detail::uncoupled_salt(scheme), confidence, opts)
        .estimates.front();
}

/// Run several schemes on the same channel draws (paired comparison).
inline CoupledEstimate estimate_coupled(const NetworkSpec& net, const PowerSpec& power, const RateSpec& rs,
                                        std::span<const Scheme> schemes, std::uint64_t trials, std::uint64_t seed,
                                        double confidence = kDefaultConfidence, const EngineOptions& opts = {},
                                        std::uint64_t point = 0)
{
    rs.validate();
    const auto snr = link_budget(net, power);
    return detail::run_engine(snr, rs, schemes, trials, seed, point, detail::kCoupledSalt, confidence, opts);
}

struct CurvePoint {
    double snr_db;
    OutageEstimate estimate;
    bool low_failures;  // fewer than kMinReliableFailures outages observed
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

/// Outage estimates over an equal-power SNR grid in dB. Each grid point
/// uses its own streams.
inline std::vector<CurvePoint> estimate_curve(const NetworkSpec& net, const RateSpec& rs, Scheme scheme,
                                              std::span<const double> snr_grid_db, std::uint64_t trials,
                                              std::uint64_t seed, double confidence = kDefaultConfidence,
                                              const EngineOptions& opts = {})
{
    if (snr_grid_db.empty()) throw config_error("estimate_curve: empty SNR grid");
    for (std::size_t i = 1; i < snr_grid_db.size(); ++i) {
        if (!(snr_grid_db[i] > snr_grid_db[i - 1])) throw config_error("estimate_curve: grid must be strictly increasing");
    }
    std::vector<CurvePoint> out;
    for (std::size_t i = 0; i < snr_grid_db.size(); ++i) {
        const auto est = estimate_outage(net, PowerSpec::equal(db_to_linear(snr_grid_db[i])), rs, scheme, trials,
                                         seed, confidence, opts, i);
        out.push_back({snr_grid_db[i], est, est.failures < kMinReliableFailures});
    }
    return out;
}

/// Full per-trial outcomes for inspection and invariant checks. Uses the same
/// per-link stream layout as the engine (single block).
inline std::vector<TrialOutcome> log_trials(const NetworkSpec& net, const PowerSpec& power, const RateSpec& rs,
                                            Scheme scheme, std::uint64_t trials, std::uint64_t seed)
{
    const auto snr = link_budget(net, power);
    LinkStreams streams(seed, 0, detail::kCoupledSalt, 0, snr.relays.size());
    ChannelDraw draw;
    std::vector<TrialOutcome> out(trials);
    for (auto& o : out) {
        draw_channels(snr, streams, draw);
        evaluate_trial(draw, rs, scheme, o);
    }
    return out;
}

}  // namespace dfaf

#endif  // DFAF_MONTECARLO_HPP
