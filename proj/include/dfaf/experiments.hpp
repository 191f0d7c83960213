#ifndef DFAF_EXPERIMENTS_HPP
#define DFAF_EXPERIMENTS_HPP

///
/// \file experiments.hpp
///
/// Scenario bundles (network, rate, SNR grid or power split, schemes and
/// requested outputs), the built-in figure presets, the scenario text format,
/// CSV tables, diversity-slope fitting and power-allocation sweeps.
///

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "dfaf/analytic.hpp"
#include "dfaf/channel.hpp"
#include "dfaf/errors.hpp"
#include "dfaf/montecarlo.hpp"

namespace dfaf {

enum class Output { analytic, asymptotic, montecarlo, bounds };

inline std::string_view to_string(Output o)
{
    switch (o) {
    case Output::analytic: return "analytic";
    case Output::asymptotic: return "asymptotic";
    case Output::montecarlo: return "montecarlo";
    case Output::bounds: return "bounds";
    }
    return "?";
}

inline Output parse_output(std::string_view s)
{
    if (s == "analytic") return Output::analytic;
    if (s == "asymptotic") return Output::asymptotic;
    if (s == "montecarlo") return Output::montecarlo;
    if (s == "bounds") return Output::bounds;
    throw config_error("unknown output '" + std::string(s) + "' (expected analytic, asymptotic, montecarlo or bounds)");
}

inline std::string_view to_string(DirectLinkPower d) { return d == DirectLinkPower::source ? "source" : "total"; }

inline DirectLinkPower parse_direct_power(std::string_view s)
{
    if (s == "source") return DirectLinkPower::source;
    if (s == "total") return DirectLinkPower::total;
    throw config_error("direct_power must be 'source' or 'total'");
}

/// A named experiment. With an empty `alphas` list the scenario runs over
/// an equal-power SNR grid; otherwise it is a power-allocation sweep at fixed
/// total power.
struct Scenario {
    std::string name;
    NetworkSpec network;
    RateSpec rate = RateSpec::from_rate(1.0);

    std::vector<double> snr_grid_db;
    /// Monte Carlo is only run at grid points up to this SNR.
    double mc_max_snr_db = 25.0;

    std::vector<double> alphas;
    double total_power_db = 10.0;
    double noise_variance = 1.0;
    DirectLinkPower direct_power = DirectLinkPower::source;

    std::vector<Protocol> protocols{Protocol::dfaf};
    std::vector<Combiner> combiners{Combiner::sc};
    std::vector<Output> outputs{Output::analytic};

    std::uint64_t trials = 1'000'000;
    std::uint64_t seed = 1;
    double confidence = kDefaultConfidence;
    bool coupled = true;

    bool is_alpha_sweep() const { return !alphas.empty(); }
    bool wants(Output o) const { return std::find(outputs.begin(), outputs.end(), o) != outputs.end(); }
    bool uses(Protocol p) const { return std::find(protocols.begin(), protocols.end(), p) != protocols.end(); }
    bool uses(Combiner c) const { return std::find(combiners.begin(), combiners.end(), c) != combiners.end(); }

    std::vector<Scheme> schemes() const
    {
        std::vector<Scheme> out;
        for (auto p : protocols) {
            for (auto c : combiners) out.push_back({p, c});
        }
        return out;
    }

    void validate() const
    {
        const std::string who = "scenario '" + name + "': ";
        try {
            network.validate();
            rate.validate();
        } catch (const domain_error& e) {
            throw config_error(who + e.what());
        }
        if (protocols.empty() || combiners.empty()) throw config_error(who + "needs at least one scheme and combiner");
        if (outputs.empty()) throw config_error(who + "no outputs requested");
        if (uses(Combiner::mrc) && (wants(Output::analytic) || wants(Output::asymptotic))) {
            throw config_error(who + "MRC outage has no closed form; request only montecarlo output with MRC");
        }
        if (wants(Output::bounds) && (!uses(Protocol::af) || !uses(Combiner::sc))) {
            throw config_error(who + "bounds output requires the AF scheme with SC");
        }
        if (wants(Output::montecarlo)) {
            if (trials < kMinTrials) throw config_error(who + "Monte Carlo needs at least 1000 trials");
            if (!(confidence > 0.0 && confidence < 1.0)) throw config_error(who + "confidence must lie in (0, 1)");
        }
        if (is_alpha_sweep()) {
            for (double a : alphas) {
                if (!(a > 0.0 && a < 1.0)) throw config_error(who + "alpha values must lie in (0, 1)");
            }
            if (combiners != std::vector<Combiner>{Combiner::mrc}) {
                throw config_error(who + "power-allocation sweeps use MRC only");
            }
            if (outputs != std::vector<Output>{Output::montecarlo}) {
                throw config_error(who + "power-allocation sweeps produce montecarlo output only");
            }
            if (!(noise_variance > 0.0)) throw config_error(who + "noise variance must be positive");
        } else {
            if (snr_grid_db.empty()) throw config_error(who + "empty SNR grid");
            for (std::size_t i = 1; i < snr_grid_db.size(); ++i) {
                if (!(snr_grid_db[i] > snr_grid_db[i - 1])) throw config_error(who + "SNR grid must be strictly increasing");
            }
        }
    }

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// lo, lo + step, ... up to and including hi (index-based, no accumulation).
inline std::vector<double> linear_grid(double lo, double step, double hi)
{
    if (!(step > 0.0) || hi < lo) throw config_error("grid must have positive step and hi >= lo");
    std::vector<double> out;
    const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long i = 0; i <= n; ++i) out.push_back(lo + static_cast<double>(i) * step);
    return out;
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

namespace presets {

inline Scenario base(std::string name, NetworkSpec net)
{
    Scenario s;
    s.name = std::move(name);
    s.network = std::move(net);
    s.rate = RateSpec::from_rate(1.0);
    s.snr_grid_db = linear_grid(0.0, 5.0, 50.0);
    return s;
}

inline NetworkSpec fig3_network() { return NetworkSpec::nakagami(0.5, {1, 1, 2}, {1, 1, 1}); }

inline Scenario fig2_rayleigh(std::size_t k)
{
    auto s = base("fig2_rayleigh_K" + std::to_string(k), NetworkSpec::rayleigh(k));
    s.protocols = {Protocol::dfaf, Protocol::df, Protocol::af};
    s.outputs = {Output::analytic, Output::asymptotic, Output::montecarlo};
    return s;
}

inline Scenario fig3_nakagami()
{
    auto s = base("fig3_nakagami_3relay", fig3_network());
    s.protocols = {Protocol::dfaf, Protocol::df, Protocol::af};
    s.outputs = {Output::analytic, Output::asymptotic, Output::montecarlo, Output::bounds};
    return s;
}

inline Scenario fig4_vary_k(std::size_t k)
{
    auto s = base("fig4_varyK_K" + std::to_string(k),
                  NetworkSpec::nakagami(0.8, std::vector<double>(k, 1.0), std::vector<double>(k, 1.0)));
    s.outputs = {Output::analytic, Output::asymptotic};
    return s;
}

inline const std::vector<double>& fig6_shapes()
{
    static const std::vector<double> shapes{0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
    return shapes;
}

inline std::string shape_label(double g)
{
    std::ostringstream os;
    os << g;
    auto s = os.str();
    std::replace(s.begin(), s.end(), '.', 'p');
    return s;
}

inline Scenario fig6_surface_point(double g1, double g2)
{
    auto s = base("fig6_g1_" + shape_label(g1) + "_g2_" + shape_label(g2),
                  NetworkSpec::nakagami(0.5, {g1, g1}, {g2, g2}));
    s.snr_grid_db = linear_grid(30.0, 1.0, 50.0);
    s.outputs = {Output::analytic};
    return s;
}

inline Scenario fig7_mrc()
{
    auto s = base("fig7_mrc_compare", fig3_network());
    s.snr_grid_db = linear_grid(0.0, 5.0, 25.0);
    s.protocols = {Protocol::dfaf, Protocol::df, Protocol::af};
    s.combiners = {Combiner::mrc};
    s.outputs = {Output::montecarlo};
    return s;
}

inline Scenario fig8_alpha()
{
    auto s = base("fig8_alpha_sweep", fig3_network());
    s.snr_grid_db.clear();
    s.alphas = linear_grid(0.1, 0.1, 0.9);
    for (auto& a : s.alphas) a = std::round(a * 10.0) / 10.0;
    s.total_power_db = 10.0;
    s.noise_variance = 1.0;
    s.protocols = {Protocol::dfaf, Protocol::df, Protocol::af};
    s.combiners = {Combiner::mrc};
    s.outputs = {Output::montecarlo};
    return s;
}

struct PresetInfo {
    std::string name;
    std::string description;
};

inline std::vector<PresetInfo> list()
{
    return {
        {"fig2_rayleigh_K1", "Rayleigh, 1 relay: DF-AF/DF/AF under SC, analytic + asymptotic + MC"},
        {"fig2_rayleigh_K2", "Rayleigh, 2 relays: DF-AF/DF/AF under SC, analytic + asymptotic + MC"},
        {"fig2_rayleigh_K3", "Rayleigh, 3 relays: DF-AF/DF/AF under SC, analytic + asymptotic + MC"},
        {"fig3_nakagami_3relay", "m0=0.5, m1=[1 1 2], m2=[1 1 1]: all schemes under SC, with AF bounds"},
        {"fig4_varyK", "m0=0.8, Rayleigh relays, K=1..4: DF-AF analytic + asymptotic (4 members)"},
        {"fig6_diversity_surface", "m0=0.5, 2 symmetric relays m1=[g1 g1], m2=[g2 g2] (36 members)"},
        {"fig7_mrc_compare", "m0=0.5, m1=[1 1 2], m2=[1 1 1]: all schemes under MRC, MC only"},
        {"fig8_alpha_sweep", "as fig7, total power 10 dB, N0=1, alpha=0.1..0.9 under MRC"},
    };
}

/// Resolve a preset or preset-group name to its member scenarios.
inline std::vector<Scenario> expand(std::string_view name)
{
    if (name == "fig2_rayleigh_K1") return {fig2_rayleigh(1)};
    if (name == "fig2_rayleigh_K2") return {fig2_rayleigh(2)};
    if (name == "fig2_rayleigh_K3") return {fig2_rayleigh(3)};
    if (name == "fig3_nakagami_3relay") return {fig3_nakagami()};
    if (name == "fig7_mrc_compare") return {fig7_mrc()};
    if (name == "fig8_alpha_sweep") return {fig8_alpha()};
    if (name == "fig4_varyK") {
        std::vector<Scenario> out;
        for (std::size_t k = 1; k <= 4; ++k) out.push_back(fig4_vary_k(k));
        return out;
    }
    if (name == "fig6_diversity_surface") {
        std::vector<Scenario> out;
        for (double g1 : fig6_shapes()) {
            for (double g2 : fig6_shapes()) out.push_back(fig6_surface_point(g1, g2));
        }
        return out;
    }
    for (auto group : {"fig4_varyK", "fig6_diversity_surface"}) {
        for (auto& s : expand(group)) {
            if (s.name == name) return {s};
        }
    }
    throw config_error("unknown preset '" + std::string(name) + "' (see 'presets list')");
}

}  // namespace presets

// ---------------------------------------------------------------------------
// Number formatting
// ---------------------------------------------------------------------------

/// Shortest decimal that round-trips to the same double.
inline std::string format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s)
{
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw config_error("not a number: '" + std::string(s) + "'");
    }
    return v;
}

inline std::uint64_t parse_uint(std::string_view s)
{
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw config_error("not a nonnegative integer: '" + std::string(s) + "'");
    }
    return v;
}

// ---------------------------------------------------------------------------
// Scenario text format
// ---------------------------------------------------------------------------

namespace detail {

inline std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_words(std::string_view s)
{
    std::vector<std::string> out;
    std::istringstream is{std::string(s)};
    std::string w;
    while (is >> w) out.push_back(w);
    return out;
}

// Either a whitespace list of numbers or a single "lo:step:hi" range.
inline std::vector<double> parse_number_list(std::string_view s)
{
    const auto words = split_words(s);
    if (words.size() == 1 && std::count(words[0].begin(), words[0].end(), ':') == 2) {
        const auto& w = words[0];
        const auto c1 = w.find(':');
        const auto c2 = w.find(':', c1 + 1);
        return linear_grid(parse_double(std::string_view(w).substr(0, c1)),
                           parse_double(std::string_view(w).substr(c1 + 1, c2 - c1 - 1)),
                           parse_double(std::string_view(w).substr(c2 + 1)));
    }
    std::vector<double> out;
    for (const auto& w : words) out.push_back(parse_double(w));
    return out;
}

inline std::string join_numbers(const std::vector<double>& v)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ' ';
        out += format_double(v[i]);
    }
    return out;
}

template <typename T>
std::string join_names(const std::vector<T>& v, bool lower = true)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ' ';
        std::string w(to_string(v[i]));
        if (lower) std::transform(w.begin(), w.end(), w.begin(), [](unsigned char c) { return std::tolower(c); });
        out += w;
    }
    return out;
}

inline bool parse_bool(std::string_view s)
{
    if (s == "true" || s == "yes" || s == "1") return true;
    if (s == "false" || s == "no" || s == "0") return false;
    throw config_error("expected true or false, got '" + std::string(s) + "'");
}

}  // namespace detail

/// Parse the `key = value` scenario format. '#' starts a comment.
inline Scenario parse_scenario(std::istream& in)
{
    std::map<std::string, std::string, std::less<>> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view view = line;
        if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
        view = detail::trim(view);
        if (view.empty()) continue;
        const auto eq = view.find('=');
        if (eq == std::string_view::npos) {
            throw config_error("scenario line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key(detail::trim(view.substr(0, eq)));
        if (kv.contains(key)) throw config_error("scenario line " + std::to_string(lineno) + ": duplicate key " + key);
        kv[key] = std::string(detail::trim(view.substr(eq + 1)));
    }

    auto take = [&](std::string_view key) -> std::optional<std::string> {
        const auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        auto v = it->second;
        kv.erase(it);
        return v;
    };
    auto require = [&](std::string_view key) {
        auto v = take(key);
        if (!v) throw config_error("scenario: missing required key '" + std::string(key) + "'");
        return *v;
    };

    Scenario s;
    s.name = require("name");
    const double m0 = parse_double(require("m0"));
    const double omega0 = kv.contains("omega0") ? parse_double(*take("omega0")) : 1.0;
    const auto m1 = detail::parse_number_list(take("m1").value_or(""));
    const auto m2 = detail::parse_number_list(take("m2").value_or(""));
    if (m1.size() != m2.size()) throw config_error("scenario: m1 and m2 must list the same number of relays");
    auto omega_list = [&](std::string_view key) {
        auto v = take(key);
        if (!v) return std::vector<double>(m1.size(), 1.0);
        auto out = detail::parse_number_list(*v);
        if (out.size() != m1.size()) throw config_error("scenario: " + std::string(key) + " must have one entry per relay");
        return out;
    };
    const auto omega1 = omega_list("omega1");
    const auto omega2 = omega_list("omega2");
    s.network.direct = {m0, omega0};
    for (std::size_t i = 0; i < m1.size(); ++i) s.network.relays.push_back({{m1[i], omega1[i]}, {m2[i], omega2[i]}});

    const double rate = parse_double(require("rate"));
    if (!(rate > 0.0)) throw config_error("scenario: rate must be positive");
    s.rate = RateSpec::from_rate(rate);
    if (auto g = take("gamma_th")) {
        s.rate.gamma_th = parse_double(*g);
    }

    if (auto v = take("snr_db")) s.snr_grid_db = detail::parse_number_list(*v);
    if (auto v = take("mc_max_snr_db")) s.mc_max_snr_db = parse_double(*v);
    if (auto v = take("alpha")) s.alphas = detail::parse_number_list(*v);
    if (auto v = take("total_power_db")) s.total_power_db = parse_double(*v);
    if (auto v = take("noise_variance")) s.noise_variance = parse_double(*v);
    if (auto v = take("direct_power")) s.direct_power = parse_direct_power(*v);
    if (auto v = take("schemes")) {
        s.protocols.clear();
        for (const auto& w : detail::split_words(*v)) s.protocols.push_back(parse_protocol(w));
    }
    if (auto v = take("combiners")) {
        s.combiners.clear();
        for (const auto& w : detail::split_words(*v)) s.combiners.push_back(parse_combiner(w));
    }
    if (auto v = take("outputs")) {
        s.outputs.clear();
        for (const auto& w : detail::split_words(*v)) s.outputs.push_back(parse_output(w));
    }
    if (auto v = take("trials")) s.trials = parse_uint(*v);
    if (auto v = take("seed")) s.seed = parse_uint(*v);
    if (auto v = take("confidence")) s.confidence = parse_double(*v);
    if (auto v = take("coupled")) s.coupled = detail::parse_bool(*v);

    if (!kv.empty()) throw config_error("scenario: unknown key '" + kv.begin()->first + "'");
    s.validate();
    return s;
}

inline Scenario parse_scenario_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw config_error("cannot open scenario file '" + path + "'");
    return parse_scenario(in);
}

/// Write a scenario in the text format; parse_scenario reads it back to an
/// equal Scenario.
inline void write_scenario(const Scenario& s, std::ostream& os)
{
    std::vector<double> m1, m2, w1, w2;
    for (const auto& r : s.network.relays) {
        m1.push_back(r.first_hop.m);
        m2.push_back(r.second_hop.m);
        w1.push_back(r.first_hop.omega);
        w2.push_back(r.second_hop.omega);
    }
    os << "name = " << s.name << '\n';
    os << "m0 = " << format_double(s.network.direct.m) << '\n';
    os << "omega0 = " << format_double(s.network.direct.omega) << '\n';
    os << "m1 = " << detail::join_numbers(m1) << '\n';
    os << "m2 = " << detail::join_numbers(m2) << '\n';
    os << "omega1 = " << detail::join_numbers(w1) << '\n';
    os << "omega2 = " << detail::join_numbers(w2) << '\n';
    os << "rate = " << format_double(s.rate.rate) << '\n';
    os << "gamma_th = " << format_double(s.rate.gamma_th) << '\n';
    if (s.is_alpha_sweep()) {
        os << "alpha = " << detail::join_numbers(s.alphas) << '\n';
        os << "total_power_db = " << format_double(s.total_power_db) << '\n';
        os << "noise_variance = " << format_double(s.noise_variance) << '\n';
        os << "direct_power = " << to_string(s.direct_power) << '\n';
    } else {
        os << "snr_db = " << detail::join_numbers(s.snr_grid_db) << '\n';
        os << "mc_max_snr_db = " << format_double(s.mc_max_snr_db) << '\n';
    }
    os << "schemes = " << detail::join_names(s.protocols) << '\n';
    os << "combiners = " << detail::join_names(s.combiners) << '\n';
    os << "outputs = " << detail::join_names(s.outputs, false) << '\n';
    os << "trials = " << s.trials << '\n';
    os << "seed = " << s.seed << '\n';
    os << "confidence = " << format_double(s.confidence) << '\n';
    os << "coupled = " << (s.coupled ? "true" : "false") << '\n';
}

/// A scenario argument is either an existing file or a preset name.
inline std::vector<Scenario> resolve_scenarios(const std::string& arg)
{
    if (std::ifstream probe(arg); probe.good()) return {parse_scenario(probe)};
    return presets::expand(arg);
}

// ---------------------------------------------------------------------------
// Result tables
// ---------------------------------------------------------------------------

inline constexpr std::string_view kCurveCsvHeader =
    "snr_db,scheme,combiner,outage_analytic,outage_asymptotic,outage_mc,mc_ci_low,mc_ci_high,trials,failures";
inline constexpr std::string_view kAlphaCsvHeader =
    "alpha,scheme,combiner,outage_mc,mc_ci_low,mc_ci_high,trials,failures";

struct ResultRow {
    double snr_db = 0.0;
    std::string scheme;
    std::string combiner;
    std::optional<double> outage_analytic;
    std::optional<double> outage_asymptotic;
    std::optional<double> outage_mc;
    std::optional<double> mc_ci_low;
    std::optional<double> mc_ci_high;
    std::optional<std::uint64_t> trials;
    std::optional<std::uint64_t> failures;
    friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

struct ResultTable {
    std::vector<ResultRow> rows;
    std::vector<std::string> warnings;
    std::uint64_t dominance_violations = 0;
};

struct AlphaRow {
    double alpha = 0.0;
    std::string scheme;
    std::string combiner;
    double outage_mc = 0.0;
    double mc_ci_low = 0.0;
    double mc_ci_high = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t failures = 0;
    friend bool operator==(const AlphaRow&, const AlphaRow&) = default;
};

struct AlphaTable {
    std::vector<AlphaRow> rows;
    std::vector<std::string> warnings;
    std::uint64_t dominance_violations = 0;

    const AlphaRow& at(double alpha, Protocol p) const
    {
        for (const auto& r : rows) {
            if (r.alpha == alpha && r.scheme == to_string(p)) return r;
        }
        throw config_error("no row for alpha " + format_double(alpha));
    }
};

namespace detail {

template <typename T>
std::string cell(const std::optional<T>& v)
{
    if (!v) return {};
    if constexpr (std::is_floating_point_v<T>) {
        return format_double(*v);
    } else {
        return std::to_string(*v);
    }
}

inline std::vector<std::string_view> split_csv(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) return out;
        start = comma + 1;
    }
}

inline std::optional<double> opt_double(std::string_view s)
{
    if (s.empty()) return std::nullopt;
    return parse_double(s);
}

inline std::optional<std::uint64_t> opt_uint(std::string_view s)
{
    if (s.empty()) return std::nullopt;
    return parse_uint(s);
}

inline std::string_view strip_cr(std::string_view s)
{
    return !s.empty() && s.back() == '\r' ? s.substr(0, s.size() - 1) : s;
}

}  // namespace detail

inline void write_csv(const ResultTable& table, std::ostream& os)
{
    os << kCurveCsvHeader << '\n';
    for (const auto& r : table.rows) {
        os << format_double(r.snr_db) << ',' << r.scheme << ',' << r.combiner << ',' << detail::cell(r.outage_analytic)
           << ',' << detail::cell(r.outage_asymptotic) << ',' << detail::cell(r.outage_mc) << ','
           << detail::cell(r.mc_ci_low) << ',' << detail::cell(r.mc_ci_high) << ',' << detail::cell(r.trials) << ','
           << detail::cell(r.failures) << '\n';
    }
}

inline ResultTable parse_csv(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line) || detail::strip_cr(line) != kCurveCsvHeader) {
        throw config_error("CSV: unexpected header");
    }
    ResultTable table;
    while (std::getline(is, line)) {
        const auto text = detail::strip_cr(line);
        if (text.empty()) continue;
        const auto f = detail::split_csv(text);
        if (f.size() != 10) throw config_error("CSV: expected 10 columns");
        table.rows.push_back({parse_double(f[0]), std::string(f[1]), std::string(f[2]), detail::opt_double(f[3]),
                              detail::opt_double(f[4]), detail::opt_double(f[5]), detail::opt_double(f[6]),
                              detail::opt_double(f[7]), detail::opt_uint(f[8]), detail::opt_uint(f[9])});
    }
    return table;
}

inline void write_csv(const AlphaTable& table, std::ostream& os)
{
    os << kAlphaCsvHeader << '\n';
    for (const auto& r : table.rows) {
        os << format_double(r.alpha) << ',' << r.scheme << ',' << r.combiner << ',' << format_double(r.outage_mc) << ','
           << format_double(r.mc_ci_low) << ',' << format_double(r.mc_ci_high) << ',' << r.trials << ','
           << r.failures << '\n';
    }
}

inline AlphaTable parse_alpha_csv(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line) || detail::strip_cr(line) != kAlphaCsvHeader) {
        throw config_error("CSV: unexpected header");
    }
    AlphaTable table;
    while (std::getline(is, line)) {
        const auto text = detail::strip_cr(line);
        if (text.empty()) continue;
        const auto f = detail::split_csv(text);
        if (f.size() != 8) throw config_error("CSV: expected 8 columns");
        table.rows.push_back({parse_double(f[0]), std::string(f[1]), std::string(f[2]), parse_double(f[3]),
                              parse_double(f[4]), parse_double(f[5]), parse_uint(f[6]), parse_uint(f[7])});
    }
    return table;
}

// ---------------------------------------------------------------------------
// Running scenarios
// ---------------------------------------------------------------------------

namespace detail {

inline double analytic_outage(Protocol p, const NetworkSpec& net, const RateSpec& rs, double snr)
{
    return p == Protocol::af ? outage_af_sc(net, rs, snr) : outage_dfaf_sc(net, rs, snr);
}

inline void note_low_failures(std::vector<std::string>& warnings, const std::string& where, Scheme s,
                              const OutageEstimate& e)
{
    if (e.failures < kMinReliableFailures) {
        warnings.push_back(where + " " + std::string(to_string(s.protocol)) + "/" + std::string(to_string(s.combiner)) +
                           ": only " + std::to_string(e.failures) + " outages observed; estimate unreliable");
    }
}

}  // namespace detail

/// Evaluate every requested output at every grid point. Rows are ordered by
/// SNR, then scheme, then combiner, as listed in the scenario; AF bound rows
/// (scheme AF_LOWER / AF_UPPER, value in outage_asymptotic) follow each
/// grid point's scheme rows.
inline ResultTable run_scenario(const Scenario& s, const EngineOptions& opts = {})
{
    s.validate();
    if (s.is_alpha_sweep()) throw config_error("scenario '" + s.name + "' is a power-allocation sweep; use sweep-alpha");
    ResultTable table;
    const auto schemes = s.schemes();
    for (std::size_t i = 0; i < s.snr_grid_db.size(); ++i) {
        const double snr_db = s.snr_grid_db[i];
        const double snr = db_to_linear(snr_db);
        const auto power = PowerSpec::equal(snr);

        std::vector<std::optional<OutageEstimate>> mc(schemes.size());
        if (s.wants(Output::montecarlo) && snr_db <= s.mc_max_snr_db) {
            if (s.coupled) {
                const auto c = estimate_coupled(s.network, power, s.rate, schemes, s.trials, s.seed, s.confidence,
                                                opts, i);
                table.dominance_violations += c.dominance_violations;
                for (std::size_t k = 0; k < schemes.size(); ++k) mc[k] = c.estimates[k];
            } else {
                for (std::size_t k = 0; k < schemes.size(); ++k) {
                    mc[k] = estimate_outage(s.network, power, s.rate, schemes[k], s.trials, s.seed, s.confidence,
                                            opts, i);
                }
            }
        }

        for (std::size_t k = 0; k < schemes.size(); ++k) {
            const auto sch = schemes[k];
            ResultRow row;
            row.snr_db = snr_db;
            row.scheme = to_string(sch.protocol);
            row.combiner = to_string(sch.combiner);
            if (s.wants(Output::analytic)) row.outage_analytic = detail::analytic_outage(sch.protocol, s.network, s.rate, snr);
            if (s.wants(Output::asymptotic) && sch.protocol != Protocol::af) {
                row.outage_asymptotic = asymptotic_outage_dfaf(s.network, s.rate, snr);
            }
            if (mc[k]) {
                const auto& e = *mc[k];
                row.outage_mc = e.probability;
                row.mc_ci_low = e.ci_low;
                row.mc_ci_high = e.ci_high;
                row.trials = e.trials;
                row.failures = e.failures;
                detail::note_low_failures(table.warnings, s.name + " @" + format_double(snr_db) + " dB", sch, e);
            }
            table.rows.push_back(std::move(row));
        }

        if (s.wants(Output::bounds)) {
            const auto [lo, hi] = asymptotic_af_bounds(s.network, s.rate, snr);
            for (auto [label, value] : {std::pair{"AF_LOWER", lo}, std::pair{"AF_UPPER", hi}}) {
                ResultRow row;
                row.snr_db = snr_db;
                row.scheme = label;
                row.combiner = "SC";
                row.outage_asymptotic = value;
                table.rows.push_back(std::move(row));
            }
        }
    }
    return table;
}

/// Monte Carlo outage over the scenario's alpha grid at fixed total power.
/// All schemes share channel draws at each alpha.
inline AlphaTable sweep_alpha(const Scenario& s, const EngineOptions& opts = {})
{
    s.validate();
    if (!s.is_alpha_sweep()) throw config_error("scenario '" + s.name + "' has no alpha list");
    AlphaTable table;
    const auto schemes = s.schemes();
    const double total = db_to_linear(s.total_power_db);
    for (std::size_t i = 0; i < s.alphas.size(); ++i) {
        const double alpha = s.alphas[i];
        const auto power = PowerSpec::split(total, alpha, s.noise_variance, s.direct_power);
        const auto c = estimate_coupled(s.network, power, s.rate, schemes, s.trials, s.seed, s.confidence, opts, i);
        table.dominance_violations += c.dominance_violations;
        for (std::size_t k = 0; k < schemes.size(); ++k) {
            const auto& e = c.estimates[k];
            table.rows.push_back({alpha, std::string(to_string(schemes[k].protocol)),
                                  std::string(to_string(schemes[k].combiner)), e.probability, e.ci_low, e.ci_high,
                                  e.trials, e.failures});
            detail::note_low_failures(table.warnings, s.name + " @alpha=" + format_double(alpha), schemes[k], e);
        }
    }
    return table;
}

// ---------------------------------------------------------------------------
// Diversity fitting
// ---------------------------------------------------------------------------

struct DiversityFit {
    double fitted_slope;
    std::optional<double> theoretical_d;
    double window_lo_db;
    double window_hi_db;
    double residual;  // RMS of log10 residuals
    std::size_t points;
};

struct CurveSample {
    double snr_db;
    double outage;
};

/// Negated least-squares slope of log10(outage) against log10(SNR) over the
/// points inside [lo_db, hi_db].
inline DiversityFit fit_diversity(std::span<const CurveSample> curve, double lo_db, double hi_db,
                                  std::optional<double> theoretical_d = std::nullopt)
{
    std::vector<std::pair<double, double>> pts;
    for (const auto& c : curve) {
        if (c.snr_db < lo_db || c.snr_db > hi_db) continue;
        if (!(c.outage > 0.0)) {
            throw domain_error("fit_diversity: zero outage at " + format_double(c.snr_db) + " dB");
        }
        pts.emplace_back(c.snr_db / 10.0, std::log10(c.outage));
    }
    if (pts.size() < 3) throw config_error("fit_diversity: fewer than 3 points inside the window");
    const double n = static_cast<double>(pts.size());
    double mx = 0.0;
    double my = 0.0;
    for (auto [x, y] : pts) {
        mx += x;
        my += y;
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (auto [x, y] : pts) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    const double slope = sxy / sxx;
    double rss = 0.0;
    for (auto [x, y] : pts) {
        const double r = y - (my + slope * (x - mx));
        rss += r * r;
    }
    return {-slope, theoretical_d, lo_db, hi_db, std::sqrt(rss / n), pts.size()};
}

enum class CurveSource { analytic, asymptotic };

/// Closed-form (or asymptotic) curve of one protocol under SC on a 1 dB grid
/// spanning the window.
inline std::vector<CurveSample> analytic_curve(const Scenario& s, Protocol p, double lo_db, double hi_db,
                                               CurveSource source = CurveSource::analytic)
{
    if (source == CurveSource::asymptotic && p == Protocol::af) {
        throw config_error("no asymptotic expression for opportunistic AF (only bounds)");
    }
    std::vector<CurveSample> out;
    for (double db : linear_grid(lo_db, 1.0, hi_db)) {
        const double snr = db_to_linear(db);
        const double v = source == CurveSource::analytic ? detail::analytic_outage(p, s.network, s.rate, snr)
                                                         : asymptotic_outage_dfaf(s.network, s.rate, snr);
        out.push_back({db, v});
    }
    return out;
}

inline double theoretical_diversity(const NetworkSpec& net, Protocol p)
{
    return p == Protocol::af ? diversity_order_af(net) : coding_gain_dfaf(net, RateSpec::from_rate(1.0)).diversity_order;
}

}  // namespace dfaf

#endif  // DFAF_EXPERIMENTS_HPP
