#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "bdris/channel.hpp"
#include "bdris/circuit.hpp"

namespace bdris {

struct OptimizerConfig {
    int max_outer_iters = 50;
    double outer_tol = 1e-6;      // relative objective change
    int qn_max_iters = 500;
    double qn_grad_tol = 1e-8;    // on the normalized objective
    double fd_step = 1e-6;        // finite-difference step (gradient checks)
    int restarts = 2;             // random restarts beyond the zero start
    std::uint64_t rng_seed = 0;
};

// Real symmetric auxiliary variable of the lossy reparametrization; zeros on
// absent edges.
struct AuxiliaryMatrix {
    Eigen::MatrixXd a;
};

struct OptimizationResult {
    CMatrix theta;
    CRowVector g;
    CVector w;
    ReactanceAssignment reactances;
    double p_r_watts = 0.0;
    std::vector<double> trace;  // objective after each outer iteration
};

// Channels collapsed onto fixed precoder/combiner.
struct EffectiveSiso {
    Complex h_rt{0.0, 0.0};
    CRowVector h_r;
    CVector h_t;
};

EffectiveSiso effective_siso(const ChannelSet& c, const CRowVector& g, const CVector& w);

// P_T |h_rt + h_r (I + Z0 Y)^{-1} (I - Z0 Y) h_t|^2. Returns NaN when
// I + Z0 Y is numerically singular (line search treats that as failure).
double power_from_admittance(const CMatrix& y, const EffectiveSiso& eff,
                             double z0_ref_ohm, double p_t);

// Lossless inner objective over the susceptance matrix B (Y = jB).
double lossless_inner_objective(const Eigen::MatrixXd& b, const EffectiveSiso& eff,
                                double z0_ref_ohm, double p_t);

// Elementwise map A -> Y of the lossy half-wave model; degenerates to
// Y = jA when every edge radius is infinite.
CMatrix admittance_from_aux(const AuxiliaryMatrix& aux, const AdmittanceModel& model);

double lossy_inner_objective(const AuxiliaryMatrix& aux, const EffectiveSiso& eff,
                             const AdmittanceModel& model, double p_t);

// Flattened parameter order: diagonal entries 0..N-1, then topology edges.
Eigen::VectorXd pack_symmetric(const Eigen::MatrixXd& s, const CircuitTopology& topo);
Eigen::MatrixXd unpack_symmetric(const Eigen::VectorXd& x, const CircuitTopology& topo);

struct QnResult {
    Eigen::VectorXd x;
    double f = 0.0;
    bool line_search_failed = false;
    int iterations = 0;
};

using Objective = std::function<double(const Eigen::VectorXd&)>;
using Gradient = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// BFGS ascent with Armijo backtracking. Throws if the objective is not
// finite at x0; otherwise returns the best point seen (f >= f(x0)).
QnResult quasi_newton_maximize(const Objective& f, const Gradient& grad,
                               const Eigen::VectorXd& x0, const OptimizerConfig& cfg);

// Analytic gradients of the two inner objectives in packed coordinates.
Eigen::VectorXd lossless_inner_gradient(const Eigen::VectorXd& x, const EffectiveSiso& eff,
                                        const CircuitTopology& topo, double z0_ref_ohm,
                                        double p_t);
Eigen::VectorXd lossy_inner_gradient(const Eigen::VectorXd& x, const EffectiveSiso& eff,
                                     const AdmittanceModel& model, double p_t);

// Dominant singular pair of the composed channel; deterministic phase
// convention (first nonzero component of w made real positive).
std::pair<CRowVector, CVector> update_g_w(const ChannelSet& c, const CMatrix& theta);

// Alternating maximization of the received power. Conventional RIS
// (single-connected, lossless kinds) uses the closed-form phase alignment
// for the inner step; otherwise quasi-Newton on B or A by model kind.
OptimizationResult optimize(const ChannelSet& channels, const AdmittanceModel& model,
                            double p_t, const OptimizerConfig& cfg);

}  // namespace bdris
