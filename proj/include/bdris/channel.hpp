#pragma once

#include <Eigen/Dense>
#include <complex>

#include "bdris/scenario.hpp"

namespace bdris {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using CRowVector = Eigen::RowVectorXcd;

// The three channel matrices of one fading realization.
struct ChannelSet {
    CMatrix h_rt;  // N_R x N_T
    CMatrix h_r;   // N_R x N
    CMatrix h_t;   // N  x N_T
};

struct ElementDistances {
    Eigen::VectorXd d_r;  // element -> receiver
    Eigen::VectorXd d_t;  // element -> transmitter
    double d_rt = 0.0;    // transmitter -> receiver
};

// C0 * d^(-a), C0 linear from c0_db. Throws std::domain_error for d <= 0.
double path_gain(double distance_m, double c0_db, double pathloss_exponent);

ElementDistances element_distances(const Scenario& s);

// Draws one fading realization. The seed in `fading` fully determines the
// output; h_rt, h_r, h_t use separate substreams.
ChannelSet draw_channels(const Scenario& s, const FadingSpec& fading,
                         int n_t, int n_r);

// H = H_RT + H_R * Theta * H_T
CMatrix compose_channel(const ChannelSet& c, const CMatrix& theta);

// P_R = P_T * |g (H_RT + H_R Theta H_T) w|^2, with unit-norm g, w.
double received_power(const ChannelSet& c, const CMatrix& theta,
                      const CRowVector& g, const CVector& w, double p_t);

}  // namespace bdris
