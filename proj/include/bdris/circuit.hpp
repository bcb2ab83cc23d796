#pragma once

#include <Eigen/Dense>
#include <complex>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bdris/channel.hpp"

namespace bdris {

struct CircuitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// Quarter-wave inversion, X_m = 0, singular (I + Z0 Y), ...
struct SingularityError : CircuitError {
    using CircuitError::CircuitError;
};
// Target admittance not reachable under the requested model kind.
struct RealizabilityError : CircuitError {
    using CircuitError::CircuitError;
};

using PortPair = std::pair<int, int>;  // stored with first < second

struct Edge {
    int n = 0;
    int m = 0;          // n < m
    double length_m = 0.0;
    int half_waves = 1;  // K_{n,m}; used by the half-wave model kinds
};

enum class TopologyFamily { SingleConnected, Tridiagonal, FullyConnected, Custom };

// Interconnection graph of the reconfigurable network.
struct CircuitTopology {
    int n = 0;
    TopologyFamily family = TopologyFamily::SingleConnected;
    std::vector<Edge> edges;

    bool has_edge(int a, int b) const;
    const Edge& edge(int a, int b) const;
    // N grounded impedances plus one per edge (tridiagonal: 2N-1).
    int component_count() const { return n + static_cast<int>(edges.size()); }
    void validate() const;
};

CircuitTopology make_single_connected(int n);
// Adjacent-element interconnections, all with the given length.
CircuitTopology make_tridiagonal(int n, double length_m, int half_waves = 1);
CircuitTopology make_fully_connected(int n, double length_m, int half_waves = 1);

// Snaps a length to the nearest positive multiple of lambda/2; returns the
// snapped length and K. Used when a geometry's spacing is not engineered.
std::pair<double, int> snap_to_half_wave(double length_m, double lambda_m);

struct LineParams {
    double alpha_np_per_m = 0.0;
    double beta_rad_per_m = 2.0 * 3.14159265358979323846 / 0.1;  // lambda = 0.1 m
    double z0_line_ohm = 50.0;
    double z0_ref_ohm = 50.0;

    double lambda_m() const { return 2.0 * 3.14159265358979323846 / beta_rad_per_m; }
    std::complex<double> gamma() const { return {alpha_np_per_m, beta_rad_per_m}; }
    void validate() const;
};

struct ReactanceAssignment {
    Eigen::VectorXd x_ground;            // X_m, ohms
    std::map<PortPair, double> x_branch; // X_{n,m}, ohms; absent edge = open circuit
};

enum class ModelKind { General, HalfWaveLossy, Lossless, HalfWaveLossless };

struct AdmittanceModel {
    ModelKind kind = ModelKind::General;
    LineParams line;
    CircuitTopology topology;

    // Half-wave kinds require beta*l = pi*K on every edge (1e-9 relative).
    void validate() const;
};

// Single interconnection under the general lossy model:
// [Y]_{n,m} = -2 / (jX (e^{gl}+e^{-gl}) + Z0 (e^{gl}-e^{-gl}))
Complex offdiag_admittance_general(double x_branch_ohm, double length_m,
                                   const LineParams& line);

// [Y]_{m,m} = 1/(jX_m) - sum_n cosh(g l_{n,m}) [Y]_{n,m}
Complex diag_admittance_general(double x_ground_ohm,
                                const std::vector<std::pair<double, Complex>>& incident,
                                const LineParams& line);

// r = 1/(2 Z0 sinh(alpha l)); +infinity when alpha l = 0.
double circle_radius(double alpha_np_per_m, double length_m, double z0_ohm);

CMatrix assemble_admittance(const AdmittanceModel& model, const ReactanceAssignment& x);

// Theta = (I + Z0 Y)^{-1} (I - Z0 Y)
CMatrix scattering_from_admittance(const CMatrix& y, double z0_ref_ohm);

// Inverse of the Cayley map: Y = (1/Z0) (I + Theta)^{-1} (I - Theta)
CMatrix admittance_from_scattering(const CMatrix& theta, double z0_ref_ohm);

// P_av = (1/2) v^T Re(Y) v*
double dissipated_power(const CMatrix& y, const CVector& v);

// Inverts the model entry formulas; assemble_admittance on the result
// reproduces y_target within 1e-9 S per entry.
ReactanceAssignment extract_reactances(const CMatrix& y_target, const AdmittanceModel& model);

}  // namespace bdris
