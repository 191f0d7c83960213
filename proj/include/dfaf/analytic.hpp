#ifndef DFAF_ANALYTIC_HPP
#define DFAF_ANALYTIC_HPP

///
/// \file analytic.hpp
///
/// Closed-form and high-SNR outage expressions for opportunistic relaying
/// with selection combining at the destination:
///
///  - DF-AF selection relaying (each relay forwards with DF when it decoded,
///    AF otherwise) and opportunistic DF share one exact expression;
///  - opportunistic AF, using the CDF of the AF path SNR
///    g1 g2 / (g1 + g2 + 1) in closed form (integer shapes) or by quadrature;
///  - the high-SNR asymptote, coding gain and diversity order;
///  - squeeze bounds on the AF path CDF.
///
/// The DF-AF expression is exact when gamma_th >= delta (the default binding
/// is gamma_th = delta): an undecoded relay then can never lift the path
/// above threshold.
///

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "dfaf/channel.hpp"
#include "dfaf/errors.hpp"
#include "dfaf/quadrature.hpp"
#include "dfaf/specfun.hpp"

namespace dfaf {

/// Target rate R, relay decoding threshold delta = 2^(2R) - 1 and
/// destination threshold gamma_th.
struct RateSpec {
    double rate = 1.0;
    double delta = 3.0;
    double gamma_th = 3.0;

    static double delta_for(double rate) { return std::exp2(2.0 * rate) - 1.0; }

    /// gamma_th bound to delta.
    static RateSpec from_rate(double rate)
    {
        if (!(rate > 0.0)) throw domain_error("RateSpec: rate must be positive");
        const double d = delta_for(rate);
        return {rate, d, d};
    }

    static RateSpec with_threshold(double rate, double gamma_th)
    {
        auto rs = from_rate(rate);
        if (!(gamma_th > 0.0)) throw domain_error("RateSpec: gamma_th must be positive");
        rs.gamma_th = gamma_th;
        return rs;
    }

    void validate() const
    {
        if (!(rate > 0.0) || !(gamma_th > 0.0)) throw domain_error("RateSpec: rate and gamma_th must be positive");
        if (delta != delta_for(rate)) throw domain_error("RateSpec: delta must equal 2^(2R) - 1");
    }

    friend bool operator==(const RateSpec&, const RateSpec&) = default;
};

/// Which link dominates a relay path at high SNR.
enum class RelayBranch {
    second_hop,  // m1 > m2
    first_hop,   // m1 < m2
    balanced,    // m1 == m2, both hops contribute equally
};

struct RelayFactor {
    RelayBranch branch;
    double exponent;     // SNR exponent contributed by this relay
    double coefficient;  // SNR-independent factor (eta_i)
};

struct AsymptoticResult {
    double coding_gain;
    double diversity_order;
    std::vector<RelayFactor> per_relay_factors;
};

struct AfBounds {
    double lower;
    double upper;
    double m;      // min(m1, m2)
    double omega;  // spread of the link attaining the minimum (first hop on ties)
};

namespace detail {

inline bool is_integer_shape(double m) { return m >= 1.0 && std::floor(m) == m && m < 1e6; }

// (m thr / omega)^m / (m Gamma(m)): the SNR-independent part of P(m, m thr / (omega SNR)).
inline double small_snr_coefficient(double m, double threshold, double omega)
{
    return specfun::reg_lower_gamma_small_x(m, m * threshold / omega);
}

inline double direct_outage(const NetworkSnr& snr, const RateSpec& rs) { return snr_cdf(snr.direct, rs.gamma_th); }

inline void require_equal_power(const PowerSpec& power, const char* who)
{
    if (!power.is_equal_power()) {
        throw config_error(std::string(who) + ": asymptotic expressions require equal source and relay power");
    }
}

inline double ln_binomial(int n, int k)
{
    return specfun::ln_gamma(n + 1.0) - specfun::ln_gamma(k + 1.0) - specfun::ln_gamma(n - k + 1.0);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Exact outage, selection combining
// ---------------------------------------------------------------------------

/// Exact outage of opportunistic DF-AF selection relaying under SC.
inline double outage_dfaf_sc(const NetworkSpec& net, const PowerSpec& power, const RateSpec& rs)
{
    rs.validate();
    const auto snr = link_budget(net, power);
    double p = detail::direct_outage(snr, rs);
    for (const auto& r : snr.relays) {
        const double undecoded = snr_cdf(r.first_hop, rs.delta);
        const double decoded = specfun::reg_upper_gamma(r.first_hop.m, r.first_hop.rate() * rs.delta);
        p *= decoded * snr_cdf(r.second_hop, rs.gamma_th) + undecoded;
    }
    return std::clamp(p, 0.0, 1.0);
}

inline double outage_dfaf_sc(const NetworkSpec& net, const RateSpec& rs, double snr)
{
    return outage_dfaf_sc(net, PowerSpec::equal(snr), rs);
}

/// Opportunistic DF under SC has the same outage as DF-AF.
inline double outage_df_sc(const NetworkSpec& net, const PowerSpec& power, const RateSpec& rs)
{
    return outage_dfaf_sc(net, power, rs);
}

inline double outage_df_sc(const NetworkSpec& net, const RateSpec& rs, double snr)
{
    return outage_df_sc(net, PowerSpec::equal(snr), rs);
}

// ---------------------------------------------------------------------------
// AF path SNR distribution
// ---------------------------------------------------------------------------

/// CDF of g1 g2 / (g1 + g2 + 1) as a finite Bessel-K sum. Integer shapes only.
inline double af_path_cdf_closed(const LinkSnr& hop1, const LinkSnr& hop2, double y)
{
    if (!detail::is_integer_shape(hop1.m) || !detail::is_integer_shape(hop2.m)) {
        throw closed_form_unavailable(
            "af_path_cdf_closed: shapes must be positive integers; use af_path_cdf_quadrature");
    }
    if (!(y >= 0.0)) throw domain_error("af_path_cdf_closed: threshold must be nonnegative");
    if (y == 0.0) return 0.0;

    const int m1 = static_cast<int>(hop1.m);
    const int m2 = static_cast<int>(hop2.m);
    const double a1 = hop1.rate();
    const double a2 = hop2.rate();
    const double la1 = std::log(a1);
    const double la2 = std::log(a2);
    const double ly = std::log(y);
    const double ly1 = std::log1p(y);
    const double z = 2.0 * std::sqrt(a1 * a2 * y * (y + 1.0));

    // Orders j - k - 1 range over [-m2, m1 - 1]; K is even in the order.
    const int max_order = std::max(m1, m2);
    std::vector<double> bessel(max_order + 1);
    for (int v = 0; v <= max_order; ++v) bessel[v] = specfun::bessel_k_int(v, z);

    // 2 a2^m2 (m1-1)! / (Gamma(m1) Gamma(m2)) e^{-(a1+a2) y}
    const double ln_prefactor = std::numbers::ln2 + m2 * la2 - specfun::ln_gamma(m2) - (a1 + a2) * y;

    double sum = 0.0;
    for (int n = 0; n < m1; ++n) {
        const double ln_nfact = specfun::ln_gamma(n + 1.0);
        for (int j = 0; j <= n; ++j) {
            const double ln_cnj = detail::ln_binomial(n, j);
            for (int k = 0; k < m2; ++k) {
                const double ln_term = ln_prefactor - ln_nfact + ln_cnj + detail::ln_binomial(m2 - 1, k) +
                                       0.5 * (2 * n - j + k + 1) * la1 + 0.5 * (j - k - 1) * la2 +
                                       0.5 * (j + k + 1) * ly1 + 0.5 * (2 * n + 2 * m2 - j - k - 1) * ly;
                sum += std::exp(ln_term) * bessel[std::abs(j - k - 1)];
            }
        }
    }
    return std::clamp(1.0 - sum, 0.0, 1.0);
}

/// CDF of g1 g2 / (g1 + g2 + 1) by direct integration over g1:
///   F(y) = F1(y) + int_y^inf f1(x) F2(y (x + 1) / (x - y)) dx.
/// Valid for any shapes m >= 0.5.
inline double af_path_cdf_quadrature(const LinkSnr& hop1, const LinkSnr& hop2, double y)
{
    if (!(y >= 0.0)) throw domain_error("af_path_cdf_quadrature: threshold must be nonnegative");
    if (y == 0.0) return 0.0;

    const double m1 = hop1.m;
    const double a1 = hop1.rate();
    const double ln_norm = m1 * std::log(a1) - specfun::ln_gamma(m1);
    auto integrand = [&](double x) {
        const double gap = x - y;
        if (!(gap > 0.0)) return 0.0;
        const double density = std::exp(ln_norm + (m1 - 1.0) * std::log(x) - a1 * x);
        if (density == 0.0) return 0.0;
        const double threshold = y * (x + 1.0) / gap;
        const double f2 = std::isfinite(threshold) ? snr_cdf(hop2, threshold) : 1.0;
        return density * f2;
    };
    quadrature::Options opts;
    opts.abs_tol = 1e-13;
    opts.rel_tol = 1e-12;
    // F2 falls from 1 to 0 where y (x + 1) / (x - y) crosses the second
    // hop's scale; with a strong second hop that happens just above x = y.
    std::vector<double> cuts{y};
    for (double c : {200.0, 50.0, 20.0, 10.0, 5.0, 2.0, 1.0, 0.5, 0.1}) {
        const double t = c / hop2.rate();
        if (t <= y) continue;
        const double x = y + y * (y + 1.0) / (t - y);
        if (x > cuts.back()) cuts.push_back(x);
    }
    double value = 0.0;
    double error = 0.0;
    for (std::size_t i = 1; i < cuts.size(); ++i) {
        const auto piece = quadrature::integrate(integrand, cuts[i - 1], cuts[i], opts);
        value += piece.value;
        error += piece.error;
    }
    const auto tail = quadrature::integrate_to_infinity(integrand, cuts.back(), std::max(hop1.mean_snr, y), opts);
    value += tail.value;
    error += tail.error;
    if (error > 1e-10) throw convergence_error("af_path_cdf_quadrature: tolerance not met");
    return std::clamp(snr_cdf(hop1, y) + value, 0.0, 1.0);
}

/// Closed form when both shapes are integers, quadrature otherwise.
inline double af_path_cdf(const LinkSnr& hop1, const LinkSnr& hop2, double y)
{
    if (detail::is_integer_shape(hop1.m) && detail::is_integer_shape(hop2.m)) {
        return af_path_cdf_closed(hop1, hop2, y);
    }
    return af_path_cdf_quadrature(hop1, hop2, y);
}

/// Exact outage of opportunistic AF under SC: independent relay paths,
/// so the per-relay AF CDFs multiply.
inline double outage_af_sc(const NetworkSpec& net, const PowerSpec& power, const RateSpec& rs)
{
    rs.validate();
    const auto snr = link_budget(net, power);
    double p = detail::direct_outage(snr, rs);
    for (const auto& r : snr.relays) {
        p *= af_path_cdf(r.first_hop, r.second_hop, rs.gamma_th);
    }
    return std::clamp(p, 0.0, 1.0);
}

inline double outage_af_sc(const NetworkSpec& net, const RateSpec& rs, double snr)
{
    return outage_af_sc(net, PowerSpec::equal(snr), rs);
}

// ---------------------------------------------------------------------------
// High-SNR behaviour
// ---------------------------------------------------------------------------

/// Per-relay high-SNR factor eta_i and its SNR exponent.
inline RelayFactor relay_factor(const RelayLinks& r, const RateSpec& rs)
{
    const auto& h1 = r.first_hop;
    const auto& h2 = r.second_hop;
    if (h1.m > h2.m) {
        return {RelayBranch::second_hop, h2.m, detail::small_snr_coefficient(h2.m, rs.gamma_th, h2.omega)};
    }
    const double c = detail::small_snr_coefficient(h1.m, rs.delta, h1.omega);
    if (h1.m < h2.m) return {RelayBranch::first_hop, h1.m, c};
    return {RelayBranch::balanced, h1.m, 2.0 * c};
}

/// Coding gain g and diversity order d of DF-AF (and DF) under SC, with
/// P_out ~ g SNR^-d.
inline AsymptoticResult coding_gain_dfaf(const NetworkSpec& net, const RateSpec& rs)
{
    net.validate();
    rs.validate();
    AsymptoticResult out{detail::small_snr_coefficient(net.direct.m, rs.gamma_th, net.direct.omega), net.direct.m,
                         {}};
    for (const auto& r : net.relays) {
        const auto f = relay_factor(r, rs);
        out.coding_gain *= f.coefficient;
        out.diversity_order += f.exponent;
        out.per_relay_factors.push_back(f);
    }
    return out;
}

/// High-SNR outage of DF-AF under SC at transmit SNR `snr` (equal power).
inline double asymptotic_outage_dfaf(const NetworkSpec& net, const RateSpec& rs, double snr)
{
    if (!(snr > 0.0)) throw domain_error("asymptotic_outage_dfaf: SNR must be positive");
    const auto res = coding_gain_dfaf(net, rs);
    // Each factor carries its own SNR power; accumulate in log space.
    double ln_p = std::log(detail::small_snr_coefficient(net.direct.m, rs.gamma_th, net.direct.omega)) -
                  net.direct.m * std::log(snr);
    for (const auto& f : res.per_relay_factors) ln_p += std::log(f.coefficient) - f.exponent * std::log(snr);
    return std::exp(ln_p);
}

inline double asymptotic_outage_dfaf(const NetworkSpec& net, const PowerSpec& power, const RateSpec& rs)
{
    detail::require_equal_power(power, "asymptotic_outage_dfaf");
    return asymptotic_outage_dfaf(net, rs, power.transmit_snr());
}

/// High-SNR squeeze bounds L <= F_AF(gamma_th) <= U for one relay path.
inline AfBounds af_bounds(const ChannelSpec& hop1, const ChannelSpec& hop2, const RateSpec& rs, double snr)
{
    hop1.validate();
    hop2.validate();
    if (!(snr > 0.0)) throw domain_error("af_bounds: SNR must be positive");
    const auto& weak = hop1.m <= hop2.m ? hop1 : hop2;
    const double m = weak.m;
    const double lower = specfun::reg_lower_gamma_small_x(m, m * rs.gamma_th / (weak.omega * snr));
    return {lower, lower * std::exp2(m), m, weak.omega};
}

/// Asymptotic lower/upper envelopes of the opportunistic AF outage:
/// direct-link asymptote times the product of per-relay L_i (resp. U_i).
inline std::pair<double, double> asymptotic_af_bounds(const NetworkSpec& net, const RateSpec& rs, double snr)
{
    net.validate();
    rs.validate();
    const double direct =
        detail::small_snr_coefficient(net.direct.m, rs.gamma_th, net.direct.omega) * std::pow(snr, -net.direct.m);
    double lo = direct;
    double hi = direct;
    for (const auto& r : net.relays) {
        const auto b = af_bounds(r.first_hop, r.second_hop, rs, snr);
        lo *= b.lower;
        hi *= b.upper;
    }
    return {lo, hi};
}

/// Diversity order of opportunistic AF: m0 + sum_i min(m1i, m2i).
inline double diversity_order_af(const NetworkSpec& net)
{
    net.validate();
    double d = net.direct.m;
    for (const auto& r : net.relays) d += std::min(r.first_hop.m, r.second_hop.m);
    return d;
}

}  // namespace dfaf

#endif  // DFAF_ANALYTIC_HPP
