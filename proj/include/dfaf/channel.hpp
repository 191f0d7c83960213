#ifndef DFAF_CHANNEL_HPP
#define DFAF_CHANNEL_HPP

///
/// \file channel.hpp
///
/// Nakagami-m link model. The instantaneous SNR of a link with shape m and
/// mean SNR gbar is gamma distributed with shape m and scale gbar/m.
///

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <string>
#include <vector>

#include "dfaf/errors.hpp"
#include "dfaf/specfun.hpp"

namespace dfaf {

/// One Nakagami-m link: shape m and spread omega = E[|h|^2].
struct ChannelSpec {
    double m = 1.0;
    double omega = 1.0;

    void validate() const
    {
        if (!(m >= 0.5)) throw domain_error("ChannelSpec: Nakagami shape must satisfy m >= 0.5");
        if (!(omega > 0.0)) throw domain_error("ChannelSpec: spread must be positive");
    }
    friend bool operator==(const ChannelSpec&, const ChannelSpec&) = default;
};

struct RelayLinks {
    ChannelSpec first_hop;   // S -> R_i
    ChannelSpec second_hop;  // R_i -> D
    friend bool operator==(const RelayLinks&, const RelayLinks&) = default;
};

/// Direct link plus K two-hop relay paths.
struct NetworkSpec {
    ChannelSpec direct;
    std::vector<RelayLinks> relays;

    std::size_t relay_count() const { return relays.size(); }

    void validate() const
    {
        direct.validate();
        for (const auto& r : relays) {
            r.first_hop.validate();
            r.second_hop.validate();
        }
    }

    /// Same spread everywhere; shapes given per link.
    static NetworkSpec nakagami(double m0, const std::vector<double>& m1, const std::vector<double>& m2,
                                double omega = 1.0)
    {
        if (m1.size() != m2.size()) throw config_error("NetworkSpec: m1 and m2 must have equal length");
        NetworkSpec net{{m0, omega}, {}};
        for (std::size_t i = 0; i < m1.size(); ++i) {
            net.relays.push_back({{m1[i], omega}, {m2[i], omega}});
        }
        net.validate();
        return net;
    }

    static NetworkSpec rayleigh(std::size_t relays) { return nakagami(1.0, std::vector<double>(relays, 1.0), std::vector<double>(relays, 1.0)); }

    friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

/// Which transmit power the S->D link sees when source and relay powers differ.
enum class DirectLinkPower { source, total };

/// Transmit powers and noise level, all linear.
struct PowerSpec {
    double source_power = 1.0;
    double relay_power = 1.0;
    double noise_variance = 1.0;
    DirectLinkPower direct_power = DirectLinkPower::source;

    /// Equal power P at source and relays, N0 = 1, so the transmit SNR is P.
    static PowerSpec equal(double snr_linear) { return {snr_linear, snr_linear, 1.0, DirectLinkPower::source}; }

    /// P_s = alpha * total, P_r = (1 - alpha) * total.
    static PowerSpec split(double total, double alpha, double noise, DirectLinkPower direct = DirectLinkPower::source)
    {
        if (!(alpha > 0.0 && alpha < 1.0)) throw config_error("PowerSpec: alpha must lie in (0, 1)");
        if (!(total > 0.0)) throw config_error("PowerSpec: total power must be positive");
        return {alpha * total, (1.0 - alpha) * total, noise, direct};
    }

    double alpha() const { return source_power / (source_power + relay_power); }
    bool is_equal_power() const { return source_power == relay_power; }
    /// Transmit SNR in the equal-power regime.
    double transmit_snr() const { return source_power / noise_variance; }
    double direct_link_power() const
    {
        return direct_power == DirectLinkPower::source ? source_power : source_power + relay_power;
    }

    void validate() const
    {
        if (!(source_power > 0.0) || !(relay_power > 0.0) || !(noise_variance > 0.0)) {
            throw domain_error("PowerSpec: powers and noise variance must be positive");
        }
    }
};

/// Mean SNR of one link and the gamma rate m / mean_snr.
struct LinkSnr {
    double mean_snr;
    double m;

    double rate() const { return m / mean_snr; }
};

inline LinkSnr link_snr(const ChannelSpec& ch, double tx_power, double n0)
{
    ch.validate();
    if (!(tx_power > 0.0)) throw domain_error("link_snr: transmit power must be positive");
    if (!(n0 > 0.0)) throw domain_error("link_snr: noise variance must be positive");
    return {ch.omega * (tx_power / n0), ch.m};
}

/// CDF of the instantaneous link SNR: P(m, m y / mean_snr).
inline double snr_cdf(const LinkSnr& link, double y)
{
    if (!(y >= 0.0)) throw domain_error("snr_cdf: threshold must be nonnegative");
    return specfun::reg_lower_gamma(link.m, link.rate() * y);
}

struct RelaySnr {
    LinkSnr first_hop;
    LinkSnr second_hop;
};

/// Per-link mean SNRs of a whole network under a power allocation.
struct NetworkSnr {
    LinkSnr direct;
    std::vector<RelaySnr> relays;
};

inline NetworkSnr link_budget(const NetworkSpec& net, const PowerSpec& power)
{
    net.validate();
    power.validate();
    const double n0 = power.noise_variance;
    NetworkSnr out{link_snr(net.direct, power.direct_link_power(), n0), {}};
    out.relays.reserve(net.relays.size());
    for (const auto& r : net.relays) {
        out.relays.push_back(
            {link_snr(r.first_hop, power.source_power, n0), link_snr(r.second_hop, power.relay_power, n0)});
    }
    return out;
}

/// Mix a master seed with a list of keys into a stream seed (splitmix64 chain).
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys)
{
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    std::uint64_t h = mix(master);
    for (auto k : keys) h = mix(h ^ mix(k));
    return h;
}

/// Seedable random stream with platform-independent variate generation.
///
/// std::mt19937_64 output is fully specified by the standard; the
/// distributions below are implemented here because the std:: ones are
/// implementation-defined.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on the open interval (0, 1).
    double uniform()
    {
        for (;;) {
            const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
            if (u > 0.0) return u;
        }
    }

    /// Standard normal (Marsaglia polar method).
    double normal()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        for (;;) {
            const double u = 2.0 * uniform() - 1.0;
            const double v = 2.0 * uniform() - 1.0;
            const double s = u * u + v * v;
            if (s >= 1.0 || s == 0.0) continue;
            const double f = std::sqrt(-2.0 * std::log(s) / s);
            spare_ = v * f;
            has_spare_ = true;
            return u * f;
        }
    }

    /// Gamma(shape, 1). Marsaglia-Tsang squeeze for shape >= 1; shape < 1 is
    /// boosted through Gamma(shape + 1) * U^(1/shape).
    double gamma(double shape)
    {
        if (shape < 1.0) {
            const double g = gamma(shape + 1.0);
            return g * std::pow(uniform(), 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x;
            double v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform();
            const double x2 = x * x;
            if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
            if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Draw one instantaneous SNR: gamma with shape m and scale mean_snr / m.
inline double sample_snr(const LinkSnr& link, RandomStream& rng)
{
    return rng.gamma(link.m) * (link.mean_snr / link.m);
}

}  // namespace dfaf

#endif  // DFAF_CHANNEL_HPP
