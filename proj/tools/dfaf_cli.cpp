// Command-line front end: analytic / asymptotic / Monte Carlo outage curves,
// diversity fitting and power-allocation sweeps for opportunistic relaying.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dfaf/dfaf.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct GlobalOptions {
    std::string scenario;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> trials;
    std::optional<double> confidence;
    std::string out;
    unsigned workers = 0;
};

std::vector<dfaf::Scenario> load(const GlobalOptions& g)
{
    if (g.scenario.empty()) throw dfaf::config_error("--scenario <file|preset> is required");
    auto scenarios = dfaf::resolve_scenarios(g.scenario);
    for (auto& s : scenarios) {
        if (g.seed) s.seed = *g.seed;
        if (g.trials) s.trials = *g.trials;
        if (g.confidence) s.confidence = *g.confidence;
    }
    return scenarios;
}

// One scenario: --out is a file. Several: --out is a directory of
// <name>.csv, stdout gets '# <name>' separated sections.
template <typename Writer>
void emit(const std::vector<dfaf::Scenario>& scenarios, const std::string& out, Writer&& write_one)
{
    if (scenarios.size() == 1) {
        if (out.empty()) {
            write_one(scenarios.front(), std::cout);
        } else {
            std::ofstream os(out);
            if (!os) throw dfaf::config_error("cannot write '" + out + "'");
            write_one(scenarios.front(), os);
        }
        return;
    }
    if (!out.empty()) std::filesystem::create_directories(out);
    for (const auto& s : scenarios) {
        if (out.empty()) {
            std::cout << "# " << s.name << '\n';
            write_one(s, std::cout);
        } else {
            const auto path = std::filesystem::path(out) / (s.name + ".csv");
            std::ofstream os(path);
            if (!os) throw dfaf::config_error("cannot write '" + path.string() + "'");
            write_one(s, os);
        }
    }
}

void print_warnings(const std::vector<std::string>& warnings)
{
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

int run_curves(const GlobalOptions& g, std::optional<std::vector<dfaf::Output>> forced)
{
    auto scenarios = load(g);
    for (auto& s : scenarios) {
        if (s.is_alpha_sweep()) throw dfaf::config_error("scenario '" + s.name + "' is an alpha sweep; use sweep-alpha");
        if (forced) {
            auto outputs = *forced;
            // Keep AF bounds alongside asymptotic curves when the scenario asked for them.
            if (s.wants(dfaf::Output::bounds) && outputs == std::vector{dfaf::Output::asymptotic}) {
                outputs.push_back(dfaf::Output::bounds);
            }
            s.outputs = outputs;
        }
        s.validate();
    }
    dfaf::EngineOptions opts;
    opts.workers = g.workers;
    emit(scenarios, g.out, [&](const dfaf::Scenario& s, std::ostream& os) {
        const auto table = dfaf::run_scenario(s, opts);
        print_warnings(table.warnings);
        dfaf::write_csv(table, os);
    });
    return 0;
}

int run_sweep(const GlobalOptions& g)
{
    const auto scenarios = load(g);
    dfaf::EngineOptions opts;
    opts.workers = g.workers;
    emit(scenarios, g.out, [&](const dfaf::Scenario& s, std::ostream& os) {
        const auto table = dfaf::sweep_alpha(s, opts);
        print_warnings(table.warnings);
        dfaf::write_csv(table, os);
    });
    return 0;
}

int run_fit(const GlobalOptions& g, double lo, double hi, const std::string& source_name)
{
    const auto scenarios = load(g);
    dfaf::CurveSource source;
    if (source_name == "analytic") {
        source = dfaf::CurveSource::analytic;
    } else if (source_name == "asymptotic") {
        source = dfaf::CurveSource::asymptotic;
    } else {
        throw dfaf::config_error("--source must be analytic or asymptotic");
    }

    std::ofstream file;
    if (!g.out.empty()) {
        file.open(g.out);
        if (!file) throw dfaf::config_error("cannot write '" + g.out + "'");
    }
    std::ostream& os = g.out.empty() ? std::cout : file;
    os << "scenario,scheme,window_lo_db,window_hi_db,points,fitted_slope,theoretical_d,residual\n";
    for (const auto& s : scenarios) {
        s.validate();
        for (auto p : s.protocols) {
            if (source == dfaf::CurveSource::asymptotic && p == dfaf::Protocol::af) continue;
            const auto curve = dfaf::analytic_curve(s, p, lo, hi, source);
            const auto fit = dfaf::fit_diversity(curve, lo, hi, dfaf::theoretical_diversity(s.network, p));
            os << s.name << ',' << dfaf::to_string(p) << ',' << dfaf::format_double(lo) << ','
               << dfaf::format_double(hi) << ',' << fit.points << ',' << dfaf::format_double(fit.fitted_slope) << ','
               << dfaf::format_double(*fit.theoretical_d) << ',' << dfaf::format_double(fit.residual) << '\n';
        }
    }
    return 0;
}

int run_presets(const std::string& action, const std::string& name)
{
    if (action == "list") {
        for (const auto& p : dfaf::presets::list()) std::cout << p.name << "\t" << p.description << '\n';
        return 0;
    }
    if (action == "show") {
        if (name.empty()) throw dfaf::config_error("presets show <name>");
        const auto scenarios = dfaf::presets::expand(name);
        for (std::size_t i = 0; i < scenarios.size(); ++i) {
            if (i) std::cout << '\n';
            dfaf::write_scenario(scenarios[i], std::cout);
        }
        return 0;
    }
    throw dfaf::config_error("presets: expected 'list' or 'show <name>'");
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Outage analysis of opportunistic DF-AF selection relaying over Nakagami-m fading"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions g;
    app.add_option("--scenario", g.scenario, "Scenario file or preset name");
    app.add_option("--seed", g.seed, "Master seed for Monte Carlo streams");
    app.add_option("--trials", g.trials, "Monte Carlo trials per point");
    app.add_option("--confidence", g.confidence, "Wilson interval confidence level");
    app.add_option("--out", g.out, "Output file (directory for multi-member presets)");
    app.add_option("--workers", g.workers, "Worker threads (0 = all cores)");

    auto* analytic = app.add_subcommand("analytic", "Exact closed-form outage under SC");
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo outage estimates");
    auto* asymptotic = app.add_subcommand("asymptotic", "High-SNR asymptote (and AF bounds when requested)");
    auto* compare = app.add_subcommand("compare", "All outputs requested by the scenario");

    auto* fit = app.add_subcommand("fit-diversity", "Fit the diversity slope of closed-form curves");
    std::vector<double> window{35.0, 45.0};
    std::string source = "analytic";
    fit->add_option("--window", window, "SNR window in dB (lo hi)")->expected(2);
    fit->add_option("--source", source, "analytic or asymptotic");

    auto* sweep = app.add_subcommand("sweep-alpha", "Power-allocation sweep under MRC");

    auto* presets = app.add_subcommand("presets", "List or show built-in presets");
    std::string preset_action = "list";
    std::string preset_name;
    presets->add_option("action", preset_action, "list | show");
    presets->add_option("name", preset_name, "Preset to show");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*analytic) return run_curves(g, std::vector{dfaf::Output::analytic});
        if (*simulate) return run_curves(g, std::vector{dfaf::Output::montecarlo});
        if (*asymptotic) return run_curves(g, std::vector{dfaf::Output::asymptotic});
        if (*compare) return run_curves(g, std::nullopt);
        if (*fit) return run_fit(g, window[0], window[1], source);
        if (*sweep) return run_sweep(g);
        if (*presets) return run_presets(preset_action, preset_name);
    } catch (const dfaf::config_error& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const dfaf::domain_error& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const dfaf::convergence_error& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    }
    return 0;
}
