#pragma once

#include <Eigen/Dense>

#include "bdris/scenario.hpp"

namespace bdris {

// Inputs to the closed-form expected-power scaling laws. Localized laws use
// the scalar distances d_r/d_t; distributed laws use the per-element vectors.
struct ScalingInputs {
    int n = 1;
    double a = 4.0;       // path-loss exponent
    double c0 = 1e-3;     // linear reference gain
    double d_r = 0.0;
    double d_t = 0.0;
    Eigen::VectorXd dvec_r;
    Eigen::VectorXd dvec_t;
};

// Builds ScalingInputs from a scenario: scalars from the array center,
// vectors from the individual elements.
ScalingInputs scaling_inputs_from_scenario(const Scenario& s);

// M_p(xi) = (sum xi^p / N)^(1/p), p != 0, entries > 0.
double generalized_mean(const Eigen::VectorXd& xi, double p);

struct MeanBounds {
    double lower = 0.0;  // min(xi)
    double value = 0.0;  // M_{-p}(xi)
    double upper = 0.0;  // N^(1/p) * min(xi)
    bool strict = true;  // false when duplicate entries make the bounds non-strict
};

// min(xi) < M_{-p}(xi) < N^(1/p) min(xi) for distinct positive entries, p > 0.
MeanBounds generalized_mean_bounds(const Eigen::VectorXd& xi, double p);

double expected_power_loc_sc(const ScalingInputs& in);
double expected_power_loc_fc(const ScalingInputs& in);
double expected_power_dis_sc(const ScalingInputs& in);
double expected_power_dis_fc(const ScalingInputs& in);

enum class Architecture { LocSC, LocFC, DisSC, DisFC };

// Expected powers under line-of-sight fading; the FC laws are unchanged,
// Loc-SC equals Loc-FC, and Dis-SC collapses to a squared sum.
double expected_power_los(const ScalingInputs& in, Architecture arch);

// G_Loc = N / (1 + (pi^2/16)(N-1)), in [1, 16/pi^2).
double gain_loc(int n);

struct GainDis {
    double gain = 0.0;         // exact ratio Dis-FC / Dis-SC
    double lower_bound = 0.0;  // (min(dR.*dT) / (N^(2/a) min dR min dT))^a
};
GainDis gain_dis(const ScalingInputs& in);

struct GainSC {
    double gain = 0.0;    // exact ratio Dis-SC / Loc-SC
    double approx = 0.0;  // (d_R d_T / M_{-a/2}(dR.*dT))^a
    bool sufficient = false;  // d_R d_T > N^(2/a) min(dR.*dT)
    bool necessary = false;   // d_R d_T > min(dR.*dT)
};
GainSC gain_sc(const ScalingInputs& in);

struct GainFC {
    double gain = 0.0;  // exact ratio Dis-FC / Loc-FC
    bool sufficient = false;  // d_R d_T > N^(2/a) min(dR) min(dT)
    bool necessary = false;   // d_R d_T > min(dR) min(dT)
};
GainFC gain_fc(const ScalingInputs& in);

}  // namespace bdris
