#include "bdris/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "bdris/rng.hpp"
#include "bdris/units.hpp"

namespace bdris {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string item;
    while (std::getline(is, item, sep)) out.push_back(trim(item));
    return out;
}

}  // namespace

ArchSpec parse_architecture(const std::string& name) {
    ArchSpec a;
    a.name = name;
    a.kind = ModelKind::HalfWaveLossy;
    if (name == "sc" || name == "single-connected" || name == "conventional") {
        a.family = TopologyFamily::SingleConnected;
    } else if (name == "tri" || name == "tridiagonal") {
        a.family = TopologyFamily::Tridiagonal;
    } else if (name == "fc" || name == "fully-connected") {
        a.family = TopologyFamily::FullyConnected;
    } else {
        throw std::invalid_argument("unknown architecture '" + name + "'");
    }
    return a;
}

void ExperimentConfig::validate() const {
    if (values.empty()) throw std::invalid_argument("ExperimentConfig: empty value list");
    if (architectures.empty())
        throw std::invalid_argument("ExperimentConfig: no architectures");
    if (trials < 1) throw std::invalid_argument("ExperimentConfig: trials must be >= 1");
    if (n < 1) throw std::invalid_argument("ExperimentConfig: n must be >= 1");
    if (sweep == SweepVariable::N)
        for (double v : values)
            if (v < 1.0 || v != std::floor(v))
                throw std::invalid_argument("ExperimentConfig: N values must be integers >= 1");
    if (sweep == SweepVariable::AlphaDbPerM)
        for (double v : values)
            if (v < 0.0)
                throw std::invalid_argument("ExperimentConfig: alpha must be >= 0");
}

ExperimentConfig experiment_from_config(const std::string& text) {
    ExperimentConfig c;
    c.architectures.clear();
    c.values.clear();
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("Experiment config: missing '=' in '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key == "layout")
            c.layout = (val == "distributed") ? RisLayout::Distributed : RisLayout::Localized;
        else if (key == "n") c.n = std::stoi(val);
        else if (key == "fading")
            c.fading = (val == "los") ? FadingKind::LoS : FadingKind::Rayleigh;
        else if (key == "sweep") {
            if (val == "n") c.sweep = SweepVariable::N;
            else if (val == "alpha_db_per_m") c.sweep = SweepVariable::AlphaDbPerM;
            else if (val == "pathloss_exponent") c.sweep = SweepVariable::PathlossExponent;
            else throw std::invalid_argument("Experiment config: unknown sweep '" + val + "'");
        } else if (key == "values") {
            for (const std::string& v : split(val, ','))
                if (!v.empty()) c.values.push_back(std::stod(v));
        } else if (key == "architectures") {
            for (const std::string& v : split(val, ','))
                if (!v.empty()) c.architectures.push_back(parse_architecture(v));
        } else if (key == "trials") c.trials = std::stoi(val);
        else if (key == "seed") c.seed = std::stoull(val);
        else if (key == "alpha_db_per_m") c.alpha_db_per_m = std::stod(val);
        else if (key == "opt_restarts") c.opt.restarts = std::stoi(val);
        else if (key == "opt_max_outer_iters") c.opt.max_outer_iters = std::stoi(val);
        else if (key == "opt_qn_max_iters") c.opt.qn_max_iters = std::stoi(val);
        else if (key == "opt_outer_tol") c.opt.outer_tol = std::stod(val);
        else if (key == "opt_qn_grad_tol") c.opt.qn_grad_tol = std::stod(val);
        else
            throw std::invalid_argument("Experiment config: unknown key '" + key + "'");
    }
    c.validate();
    return c;
}

ExperimentConfig load_experiment_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open experiment file: " + path);
    std::ostringstream os;
    os << f.rdbuf();
    return experiment_from_config(os.str());
}

AdmittanceModel model_for_scenario(const Scenario& s, TopologyFamily family,
                                   ModelKind kind, double alpha_db_per_m,
                                   const LineParams& line) {
    AdmittanceModel m;
    m.kind = kind;
    m.line = line;
    m.line.alpha_np_per_m = db_per_m_to_np_per_m(alpha_db_per_m);
    const int n = static_cast<int>(s.n_elements());
    m.topology.n = n;
    m.topology.family = family;
    const double lambda = m.line.lambda_m();
    auto add_edge = [&](int i, int j) {
        const auto [len, k] = snap_to_half_wave(
            distance(s.ris_positions[static_cast<std::size_t>(i)],
                     s.ris_positions[static_cast<std::size_t>(j)]),
            lambda);
        m.topology.edges.push_back({i, j, len, k});
    };
    switch (family) {
        case TopologyFamily::SingleConnected:
            break;
        case TopologyFamily::Tridiagonal:
            for (int i = 0; i + 1 < n; ++i) add_edge(i, i + 1);
            break;
        case TopologyFamily::FullyConnected:
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j) add_edge(i, j);
            break;
        case TopologyFamily::Custom:
            throw std::invalid_argument("model_for_scenario: custom topology not derivable");
    }
    m.validate();
    return m;
}

int worker_count() {
    if (const char* env = std::getenv("BDRIS_WORKERS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

std::vector<SweepPoint> run_sweep_points(const ExperimentConfig& cfg) {
    cfg.validate();
    const int n_rows = 1 + static_cast<int>(cfg.architectures.size());
    std::vector<SweepPoint> points;

    for (std::size_t vi = 0; vi < cfg.values.size(); ++vi) {
        const double value = cfg.values[vi];
        int n = cfg.n;
        double alpha_db = cfg.alpha_db_per_m;
        double pathloss = 0.0;
        if (cfg.sweep == SweepVariable::N) n = static_cast<int>(value);
        if (cfg.sweep == SweepVariable::AlphaDbPerM) alpha_db = value;

        Scenario s = (cfg.layout == RisLayout::Localized)
                         ? make_localized_scenario(static_cast<std::size_t>(n))
                         : make_distributed_scenario(static_cast<std::size_t>(n));
        if (cfg.sweep == SweepVariable::PathlossExponent) {
            pathloss = value;
            s.pathloss_exponent = pathloss;
        }

        std::vector<AdmittanceModel> models;
        models.push_back(model_for_scenario(s, TopologyFamily::SingleConnected,
                                            ModelKind::HalfWaveLossy, 0.0));
        for (const ArchSpec& a : cfg.architectures)
            models.push_back(model_for_scenario(s, a.family, a.kind, alpha_db));

        SweepPoint pt;
        pt.sweep_value = value;
        pt.p_r_w = Eigen::MatrixXd::Constant(n_rows, cfg.trials,
                                             std::numeric_limits<double>::quiet_NaN());
        pt.failures.assign(static_cast<std::size_t>(n_rows), 0);
        std::vector<std::atomic<int>> fail_counts(static_cast<std::size_t>(n_rows));
        for (auto& f : fail_counts) f.store(0);

        std::atomic<int> next{0};
        auto worker = [&]() {
            for (;;) {
                const int t = next.fetch_add(1);
                if (t >= cfg.trials) break;
                const FadingSpec fading{cfg.fading, derive_seed(cfg.seed, static_cast<std::uint64_t>(t))};
                const ChannelSet channels = draw_channels(s, fading, 1, 1);
                for (int r = 0; r < n_rows; ++r) {
                    OptimizerConfig oc = cfg.opt;
                    oc.rng_seed = derive_seed(cfg.seed,
                                              1000003ull * static_cast<std::uint64_t>(t) +
                                                  static_cast<std::uint64_t>(r) + 1);
                    try {
                        const OptimizationResult res =
                            optimize(channels, models[static_cast<std::size_t>(r)],
                                     s.tx_power_w, oc);
                        pt.p_r_w(r, t) = res.p_r_watts;
                    } catch (const std::exception&) {
                        fail_counts[static_cast<std::size_t>(r)].fetch_add(1);
                    }
                }
            }
        };
        const int n_workers = std::min(worker_count(), cfg.trials);
        std::vector<std::thread> threads;
        threads.reserve(static_cast<std::size_t>(n_workers));
        for (int i = 0; i < n_workers; ++i) threads.emplace_back(worker);
        for (auto& th : threads) th.join();

        for (int r = 0; r < n_rows; ++r)
            pt.failures[static_cast<std::size_t>(r)] = fail_counts[static_cast<std::size_t>(r)].load();
        points.push_back(std::move(pt));
    }
    return points;
}

ResultTable summarize(const std::vector<SweepPoint>& points, const ExperimentConfig& cfg) {
    ResultTable table;
    for (const SweepPoint& pt : points) {
        const int trials = static_cast<int>(pt.p_r_w.cols());
        for (std::size_t a = 0; a < cfg.architectures.size(); ++a) {
            const int row = static_cast<int>(a) + 1;
            if (pt.failures[static_cast<std::size_t>(row)] * 10 > trials ||
                pt.failures[0] * 10 > trials)
                throw std::runtime_error("experiment: >10% optimizer failures for '" +
                                         cfg.architectures[a].name + "'");
            double sum_p = 0.0, sum_p2 = 0.0, sum_gain = 0.0;
            int n_ok = 0, n_pair = 0;
            for (int t = 0; t < trials; ++t) {
                const double p = pt.p_r_w(row, t);
                if (std::isfinite(p)) {
                    sum_p += p;
                    sum_p2 += p * p;
                    ++n_ok;
                }
                const double base = pt.p_r_w(0, t);
                if (std::isfinite(p) && std::isfinite(base) && base > 0.0) {
                    sum_gain += p / base;
                    ++n_pair;
                }
            }
            if (n_ok == 0 || n_pair == 0)
                throw std::runtime_error("experiment: no successful trials for '" +
                                         cfg.architectures[a].name + "'");
            const double mean = sum_p / n_ok;
            const double var = std::max(0.0, (sum_p2 - sum_p * sum_p / n_ok) /
                                                 std::max(1, n_ok - 1));
            const double se = std::sqrt(var / n_ok);
            ResultRow r;
            r.sweep_value = pt.sweep_value;
            r.architecture = cfg.architectures[a].name;
            r.p_r_dbw = linear_to_db(mean);
            r.gain_db = linear_to_db(sum_gain / n_pair);
            r.stderr_db = (mean > 0.0) ? kDbPerNeper * se / mean : 0.0;
            r.trials = n_ok;
            r.seed = cfg.seed;
            table.rows.push_back(std::move(r));
        }
    }
    return table;
}

ResultTable run_experiment(const ExperimentConfig& cfg) {
    return summarize(run_sweep_points(cfg), cfg);
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::string table_to_csv(const ResultTable& t) {
    std::ostringstream os;
    os << "sweep_var,architecture,p_r_dbw,gain_db,stderr_db,trials,seed\n";
    for (const ResultRow& r : t.rows)
        os << format_double(r.sweep_value) << ',' << r.architecture << ','
           << format_double(r.p_r_dbw) << ',' << format_double(r.gain_db) << ','
           << format_double(r.stderr_db) << ',' << r.trials << ',' << r.seed << '\n';
    return os.str();
}

std::string table_to_json(const ResultTable& t) {
    std::ostringstream os;
    os << "[\n";
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const ResultRow& r = t.rows[i];
        os << "  {\"sweep_var\": " << format_double(r.sweep_value)
           << ", \"architecture\": \"" << r.architecture << "\""
           << ", \"p_r_dbw\": " << format_double(r.p_r_dbw)
           << ", \"gain_db\": " << format_double(r.gain_db)
           << ", \"stderr_db\": " << format_double(r.stderr_db)
           << ", \"trials\": " << r.trials << ", \"seed\": " << r.seed << "}"
           << (i + 1 < t.rows.size() ? ",\n" : "\n");
    }
    os << "]\n";
    return os.str();
}

ResultTable table_from_csv(const std::string& text) {
    ResultTable t;
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) ||
        trim(line) != "sweep_var,architecture,p_r_dbw,gain_db,stderr_db,trials,seed")
        throw std::invalid_argument("table_from_csv: bad header");
    while (std::getline(is, line)) {
        line = trim(line);
        if (line.empty()) continue;
        const std::vector<std::string> f = split(line, ',');
        if (f.size() != 7) throw std::invalid_argument("table_from_csv: bad row '" + line + "'");
        ResultRow r;
        r.sweep_value = std::stod(f[0]);
        r.architecture = f[1];
        r.p_r_dbw = std::stod(f[2]);
        r.gain_db = std::stod(f[3]);
        r.stderr_db = std::stod(f[4]);
        r.trials = std::stoi(f[5]);
        r.seed = std::stoull(f[6]);
        t.rows.push_back(std::move(r));
    }
    return t;
}

void emit(const ResultTable& t, const std::string& format, const std::string& path) {
    if (t.rows.empty()) throw std::invalid_argument("emit: empty table");
    std::string content;
    if (format == "csv") content = table_to_csv(t);
    else if (format == "json") content = table_to_json(t);
    else throw std::invalid_argument("emit: unknown format '" + format + "'");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("emit: cannot open '" + path + "'");
    f << content;
    if (!f) throw std::runtime_error("emit: write failed for '" + path + "'");
}

double siso_best_power_sc(const ChannelSet& c, double p_t) {
    if (c.h_r.rows() != 1 || c.h_t.cols() != 1)
        throw std::invalid_argument("siso_best_power_sc: channels must be SISO");
    double amp = std::abs(c.h_rt(0, 0));
    for (Eigen::Index i = 0; i < c.h_r.cols(); ++i)
        amp += std::abs(c.h_r(0, i)) * std::abs(c.h_t(i, 0));
    return p_t * amp * amp;
}

double siso_best_power_fc(const ChannelSet& c, double p_t) {
    if (c.h_r.rows() != 1 || c.h_t.cols() != 1)
        throw std::invalid_argument("siso_best_power_fc: channels must be SISO");
    const double amp = std::abs(c.h_rt(0, 0)) + c.h_r.norm() * c.h_t.norm();
    return p_t * amp * amp;
}

namespace {

ScalingInputs paired_inputs(std::size_t n, double a, const Vec3& rx) {
    Scenario dis = make_distributed_scenario(n);
    dis.rx_position = rx;
    dis.pathloss_exponent = a;
    ScalingInputs in = scaling_inputs_from_scenario(dis);
    // Scalar distances reference the localized deployment site.
    const Scenario loc = make_localized_scenario(n);
    const Vec3 c = ris_center(loc);
    in.d_r = distance(c, rx);
    in.d_t = distance(c, dis.tx_position);
    return in;
}

}  // namespace

std::vector<GainCurvePoint> gain_vs_exponent(std::size_t n,
                                             const std::vector<double>& a_values) {
    std::vector<GainCurvePoint> out;
    out.reserve(a_values.size());
    const Vec3 rx{20.0, 0.0, 0.0};
    for (double a : a_values) {
        const ScalingInputs in = paired_inputs(n, a, rx);
        GainCurvePoint p;
        p.a = a;
        p.g_dis = gain_dis(in).gain;
        const GainSC sc = gain_sc(in);
        p.g_sc = sc.gain;
        p.g_sc_approx = sc.approx;
        p.g_fc = gain_fc(in).gain;
        out.push_back(p);
    }
    return out;
}

GainGrid receiver_grid(std::size_t n, double a, double x0, double x1, int nx,
                       double y0, double y1, int ny) {
    if (nx < 2 || ny < 2) throw std::invalid_argument("receiver_grid: need >= 2 samples");
    GainGrid g;
    g.x.resize(static_cast<std::size_t>(nx));
    g.y.resize(static_cast<std::size_t>(ny));
    for (int i = 0; i < nx; ++i) g.x[static_cast<std::size_t>(i)] = x0 + (x1 - x0) * i / (nx - 1);
    for (int j = 0; j < ny; ++j) g.y[static_cast<std::size_t>(j)] = y0 + (y1 - y0) * j / (ny - 1);
    g.g_dis_db.resize(ny, nx);
    g.g_sc_db.resize(ny, nx);
    g.g_fc_db.resize(ny, nx);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const Vec3 rx{g.x[static_cast<std::size_t>(i)], g.y[static_cast<std::size_t>(j)], 0.0};
            const ScalingInputs in = paired_inputs(n, a, rx);
            g.g_dis_db(j, i) = linear_to_db(gain_dis(in).gain);
            g.g_sc_db(j, i) = linear_to_db(gain_sc(in).gain);
            g.g_fc_db(j, i) = linear_to_db(gain_fc(in).gain);
        }
    }
    return g;
}

std::string grid_to_csv(const GainGrid& g) {
    std::ostringstream os;
    os << "x,y,g_dis_db,g_sc_db,g_fc_db\n";
    for (std::size_t j = 0; j < g.y.size(); ++j)
        for (std::size_t i = 0; i < g.x.size(); ++i)
            os << format_double(g.x[i]) << ',' << format_double(g.y[j]) << ','
               << format_double(g.g_dis_db(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i))) << ','
               << format_double(g.g_sc_db(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i))) << ','
               << format_double(g.g_fc_db(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i))) << '\n';
    return os.str();
}

std::string matrix_to_json(const CMatrix& m) {
    std::ostringstream os;
    os << "{\"rows\": " << m.rows() << ", \"cols\": " << m.cols() << ", \"data\": [";
    bool first = true;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (!first) os << ", ";
            first = false;
            os << '[' << format_double(m(i, j).real()) << ", "
               << format_double(m(i, j).imag()) << ']';
        }
    }
    os << "]}";
    return os.str();
}

std::string result_to_json(const OptimizationResult& r) {
    std::ostringstream os;
    os << "{\"p_r_watts\": " << format_double(r.p_r_watts)
       << ", \"theta\": " << matrix_to_json(r.theta)
       << ", \"g\": " << matrix_to_json(r.g)
       << ", \"w\": " << matrix_to_json(r.w) << ", \"trace\": [";
    for (std::size_t i = 0; i < r.trace.size(); ++i)
        os << (i ? ", " : "") << format_double(r.trace[i]);
    os << "], \"x_ground\": [";
    for (Eigen::Index i = 0; i < r.reactances.x_ground.size(); ++i)
        os << (i ? ", " : "") << format_double(r.reactances.x_ground(i));
    os << "], \"x_branch\": [";
    bool first = true;
    for (const auto& [pp, x] : r.reactances.x_branch) {
        if (!first) os << ", ";
        first = false;
        os << "{\"n\": " << pp.first << ", \"m\": " << pp.second
           << ", \"x\": " << format_double(x) << '}';
    }
    os << "]}";
    return os.str();
}

}  // namespace bdris
