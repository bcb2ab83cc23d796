#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bdris/channel.hpp"
#include "bdris/circuit.hpp"
#include "bdris/optimizer.hpp"
#include "bdris/scaling.hpp"

namespace bdris {

// One optimized architecture of a sweep: interconnection family plus circuit
// model kind. HalfWaveLossy with alpha = 0 is the lossless special case.
struct ArchSpec {
    std::string name;
    TopologyFamily family = TopologyFamily::SingleConnected;
    ModelKind kind = ModelKind::HalfWaveLossy;
};

// "sc", "tridiagonal"/"tri", "fully-connected"/"fc"; throws on anything else.
ArchSpec parse_architecture(const std::string& name);

enum class SweepVariable { N, AlphaDbPerM, PathlossExponent };

// Sweep-tuned optimizer budget: the interval criteria the sweeps feed are
// insensitive to the last ~0.01 dB, so trade tail convergence for runtime.
inline OptimizerConfig experiment_optimizer_defaults() {
    OptimizerConfig oc;
    oc.max_outer_iters = 6;
    oc.qn_max_iters = 300;
    oc.restarts = 1;
    return oc;
}

struct ExperimentConfig {
    RisLayout layout = RisLayout::Localized;
    int n = 64;
    FadingKind fading = FadingKind::Rayleigh;
    SweepVariable sweep = SweepVariable::AlphaDbPerM;
    std::vector<double> values;
    std::vector<ArchSpec> architectures;
    int trials = 200;
    std::uint64_t seed = 1;
    double alpha_db_per_m = 0.0;  // used when the sweep variable is not alpha
    OptimizerConfig opt = experiment_optimizer_defaults();

    void validate() const;
};

ExperimentConfig experiment_from_config(const std::string& text);
ExperimentConfig load_experiment_file(const std::string& path);

// Builds the interconnection network for a scenario: edge lengths are the
// inter-element distances snapped to the nearest half-wavelength multiple.
AdmittanceModel model_for_scenario(const Scenario& s, TopologyFamily family,
                                   ModelKind kind, double alpha_db_per_m,
                                   const LineParams& line = LineParams{});

// Per-trial received powers at one sweep value. Row 0 is always the
// conventional-RIS baseline (single-connected, lossless); rows 1.. follow
// the configured architectures. NaN marks an excluded (failed) trial.
struct SweepPoint {
    double sweep_value = 0.0;
    Eigen::MatrixXd p_r_w;      // (1 + n_arch) x trials
    std::vector<int> failures;  // per row
};

// Monte Carlo over trials with common random numbers across architectures.
// Deterministic given the config; trials run on a worker pool sized by
// BDRIS_WORKERS (default: hardware concurrency).
std::vector<SweepPoint> run_sweep_points(const ExperimentConfig& cfg);

struct ResultRow {
    double sweep_value = 0.0;
    std::string architecture;
    double p_r_dbw = 0.0;
    double gain_db = 0.0;    // paired against the conventional baseline
    double stderr_db = 0.0;
    int trials = 0;          // successful trials
    std::uint64_t seed = 0;
};

struct ResultTable {
    std::vector<ResultRow> rows;
};

// Throws when any architecture loses more than 10% of its trials.
ResultTable summarize(const std::vector<SweepPoint>& points, const ExperimentConfig& cfg);

ResultTable run_experiment(const ExperimentConfig& cfg);

// 9 significant digits; shared by the CSV and JSON emitters so both carry
// identical numeric text.
std::string format_double(double v);

std::string table_to_csv(const ResultTable& t);
std::string table_to_json(const ResultTable& t);
ResultTable table_from_csv(const std::string& text);

// format: "csv" or "json". Throws std::runtime_error on I/O failure.
void emit(const ResultTable& t, const std::string& format, const std::string& path);

// Per-realization optima of the SISO received power (blocked direct path):
// the conventional bound (sum of per-element amplitude products, squared)
// and the fully-connected bound P_T ||h_R||^2 ||h_T||^2.
double siso_best_power_sc(const ChannelSet& c, double p_t);
double siso_best_power_fc(const ChannelSet& c, double p_t);

// Closed-form gain curves vs path-loss exponent for a paired
// distributed/localized geometry (no Monte Carlo).
struct GainCurvePoint {
    double a = 0.0;
    double g_dis = 0.0;
    double g_sc = 0.0;
    double g_sc_approx = 0.0;
    double g_fc = 0.0;
};
std::vector<GainCurvePoint> gain_vs_exponent(std::size_t n,
                                             const std::vector<double>& a_values);

// Closed-form gain heatmaps over receiver positions at z = 0.
struct GainGrid {
    std::vector<double> x;
    std::vector<double> y;
    Eigen::MatrixXd g_dis_db;  // y.size() rows, x.size() cols
    Eigen::MatrixXd g_sc_db;
    Eigen::MatrixXd g_fc_db;
};
GainGrid receiver_grid(std::size_t n, double a, double x0, double x1, int nx,
                       double y0, double y1, int ny);

std::string grid_to_csv(const GainGrid& g);

// Row-major [re, im] pairs.
std::string matrix_to_json(const CMatrix& m);
std::string result_to_json(const OptimizationResult& r);

// Worker-pool width: BDRIS_WORKERS override, else hardware concurrency.
int worker_count();

}  // namespace bdris
