// Command-line front end: closed-form scaling curves and grids, Monte Carlo
// optimizer sweeps, and config validation against a quick Monte Carlo check.

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bdris/experiment.hpp"
#include "bdris/rng.hpp"
#include "bdris/scaling.hpp"
#include "bdris/units.hpp"

namespace {

using namespace bdris;

struct McStats {
    double mean = 0.0;
    double stderr_mean = 0.0;
};

// Sample mean of the per-realization SISO optimum at unit transmit power.
McStats mc_best_power(const Scenario& s, bool fully_connected, const FadingSpec& fading,
                      int trials) {
    double sum = 0.0, sum2 = 0.0;
    for (int t = 0; t < trials; ++t) {
        const FadingSpec f{fading.kind,
                           derive_seed(fading.rng_seed, static_cast<std::uint64_t>(t))};
        const ChannelSet c = draw_channels(s, f, 1, 1);
        const double p = fully_connected ? siso_best_power_fc(c, 1.0)
                                         : siso_best_power_sc(c, 1.0);
        sum += p;
        sum2 += p * p;
    }
    McStats r;
    r.mean = sum / trials;
    const double var = std::max(0.0, (sum2 - sum * sum / trials) / (trials - 1));
    r.stderr_mean = std::sqrt(var / trials);
    return r;
}

void write_output(const std::string& content, const std::string& path) {
    if (path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open output file: " + path);
    f << content;
    if (!f) throw std::runtime_error("write failed: " + path);
}

std::vector<double> parse_values(const std::string& csv) {
    std::vector<double> out;
    std::istringstream is(csv);
    std::string item;
    while (std::getline(is, item, ','))
        if (!item.empty()) out.push_back(std::stod(item));
    if (out.empty()) throw std::invalid_argument("empty value list");
    return out;
}

int run_scaling(const std::string& curve, int n, const std::string& values,
                const std::string& out) {
    std::ostringstream os;
    if (curve == "exponent") {
        const auto pts = gain_vs_exponent(static_cast<std::size_t>(n), parse_values(values));
        os << "a,g_dis_db,g_sc_db,g_sc_approx_db,g_fc_db\n";
        for (const auto& p : pts)
            os << format_double(p.a) << ',' << format_double(linear_to_db(p.g_dis)) << ','
               << format_double(linear_to_db(p.g_sc)) << ','
               << format_double(linear_to_db(p.g_sc_approx)) << ','
               << format_double(linear_to_db(p.g_fc)) << '\n';
    } else if (curve == "loc") {
        os << "n,g_loc\n";
        for (int k = 1; k <= n; ++k)
            os << k << ',' << format_double(gain_loc(k)) << '\n';
    } else {
        throw std::invalid_argument("scaling: unknown curve '" + curve + "'");
    }
    write_output(os.str(), out);
    return 0;
}

int run_grid(int n, double a, int nx, int ny, const std::string& out) {
    const GainGrid g = receiver_grid(static_cast<std::size_t>(n), a, -10.0, 70.0, nx,
                                     -40.0, 40.0, ny);
    write_output(grid_to_csv(g), out);
    return 0;
}

int run_sweep(const std::string& config_path, std::uint64_t seed, bool seed_set,
              int trials, const std::string& format, const std::string& out) {
    ExperimentConfig cfg = load_experiment_file(config_path);
    if (seed_set) cfg.seed = seed;
    if (trials > 0) cfg.trials = trials;
    const ResultTable table = run_experiment(cfg);
    if (out.empty())
        std::cout << (format == "json" ? table_to_json(table) : table_to_csv(table));
    else
        emit(table, format, out);
    return 0;
}

int run_validate(const std::string& config_path, int trials, std::uint64_t seed) {
    const ExperimentConfig cfg = load_experiment_file(config_path);
    const Scenario s = (cfg.layout == RisLayout::Localized)
                           ? make_localized_scenario(static_cast<std::size_t>(cfg.n))
                           : make_distributed_scenario(static_cast<std::size_t>(cfg.n));
    const ScalingInputs in = scaling_inputs_from_scenario(s);
    const bool loc = (cfg.layout == RisLayout::Localized);

    std::ostringstream os;
    os << "{\"config\": \"" << config_path << "\", \"checks\": [\n";
    bool ok = true;
    const struct {
        const char* name;
        bool fc;
    } checks[] = {{"single-connected", false}, {"fully-connected", true}};
    for (std::size_t i = 0; i < 2; ++i) {
        const double closed =
            checks[i].fc ? (loc ? expected_power_loc_fc(in) : expected_power_dis_fc(in))
                         : (loc ? expected_power_loc_sc(in) : expected_power_dis_sc(in));
        const McStats mc = mc_best_power(s, checks[i].fc, {cfg.fading, seed}, trials);
        const double z = (mc.mean - closed) / mc.stderr_mean;
        // 4 SE: loose enough for a quick check, tight enough to flag a bug.
        const bool pass = std::abs(z) < 4.0;
        ok = ok && pass;
        os << "  {\"architecture\": \"" << checks[i].name
           << "\", \"closed_form\": " << format_double(closed)
           << ", \"mc_mean\": " << format_double(mc.mean)
           << ", \"mc_stderr\": " << format_double(mc.stderr_mean)
           << ", \"z\": " << format_double(z) << ", \"pass\": " << (pass ? "true" : "false")
           << "}" << (i == 0 ? ",\n" : "\n");
    }
    os << "], \"pass\": " << (ok ? "true" : "false") << "}\n";
    std::cout << os.str();
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Scaling laws and circuit-level optimization of localized and "
                 "distributed reconfigurable surfaces"};
    app.require_subcommand(1);

    std::string out, config_path, format = "csv";
    std::uint64_t seed = 1;
    int trials = 0;

    auto* scaling = app.add_subcommand("scaling", "closed-form gain curves");
    std::string curve = "exponent", values = "2,2.5,3,3.5,4,4.5,5";
    int n = 64;
    scaling->add_option("--curve", curve, "exponent | loc");
    scaling->add_option("--n", n, "number of elements");
    scaling->add_option("--values", values, "comma-separated path-loss exponents");
    scaling->add_option("--out", out, "output path (default stdout)");

    auto* grid = app.add_subcommand("grid", "closed-form gain heatmap over receiver positions");
    double a = 4.0;
    int nx = 33, ny = 33;
    grid->add_option("--n", n, "number of elements");
    grid->add_option("--a", a, "path-loss exponent");
    grid->add_option("--nx", nx, "grid columns");
    grid->add_option("--ny", ny, "grid rows");
    grid->add_option("--out", out, "output path (default stdout)");

    auto* sweep = app.add_subcommand("sweep", "seeded Monte Carlo optimizer sweep");
    sweep->add_option("--config", config_path, "experiment config file")->required();
    auto* seed_opt = sweep->add_option("--seed", seed, "override config seed");
    sweep->add_option("--trials", trials, "override config trial count");
    sweep->add_option("--format", format, "csv | json");
    sweep->add_option("--out", out, "output path (default stdout)");

    auto* validate = app.add_subcommand("validate", "config check + quick closed-form vs MC");
    int v_trials = 10000;
    validate->add_option("--config", config_path, "experiment config file")->required();
    validate->add_option("--trials", v_trials, "Monte Carlo trials");
    validate->add_option("--seed", seed, "Monte Carlo seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (scaling->parsed()) return run_scaling(curve, n, values, out);
        if (grid->parsed()) return run_grid(n, a, nx, ny, out);
        if (sweep->parsed())
            return run_sweep(config_path, seed, seed_opt->count() > 0, trials, format, out);
        if (validate->parsed()) return run_validate(config_path, v_trials, seed);
    } catch (const std::exception& e) {
        std::cout << "{\"error\": \"" << e.what() << "\"}\n";
        return 1;
    }
    return 2;
}
