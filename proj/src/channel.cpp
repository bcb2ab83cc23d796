#include "bdris/channel.hpp"

#include <cmath>
#include <stdexcept>

#include "bdris/rng.hpp"
#include "bdris/units.hpp"

namespace bdris {

double path_gain(double distance_m, double c0_db, double pathloss_exponent) {
    if (distance_m <= 0.0)
        throw std::domain_error("path_gain: distance must be > 0");
    return db_to_linear(c0_db) * std::pow(distance_m, -pathloss_exponent);
}

ElementDistances element_distances(const Scenario& s) {
    s.validate();
    const auto n = static_cast<Eigen::Index>(s.n_elements());
    ElementDistances d;
    d.d_r.resize(n);
    d.d_t.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        d.d_r(i) = distance(s.ris_positions[static_cast<std::size_t>(i)], s.rx_position);
        d.d_t(i) = distance(s.ris_positions[static_cast<std::size_t>(i)], s.tx_position);
    }
    d.d_rt = distance(s.tx_position, s.rx_position);
    return d;
}

namespace {

Complex unit_cscg(Rng& rng) {
    // (x + jy)/sqrt(2), x,y standard normal: unit-variance CSCG.
    const double x = rng.normal();
    const double y = rng.normal();
    return {x / std::sqrt(2.0), y / std::sqrt(2.0)};
}

// Fills rows x cols; entry (i,j) gets amplitude sqrt(rho(i,j)).
template <typename RhoFn>
CMatrix draw_matrix(Rng& rng, FadingKind kind, Eigen::Index rows,
                    Eigen::Index cols, RhoFn rho) {
    CMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) {
            const double amp = std::sqrt(rho(i, j));
            if (kind == FadingKind::Rayleigh) {
                m(i, j) = amp * unit_cscg(rng);
            } else {
                const double phi = 2.0 * kPi * rng.uniform();
                m(i, j) = amp * Complex{std::cos(phi), std::sin(phi)};
            }
        }
    }
    return m;
}

}  // namespace

ChannelSet draw_channels(const Scenario& s, const FadingSpec& fading,
                         int n_t, int n_r) {
    if (n_t < 1 || n_r < 1)
        throw std::invalid_argument("draw_channels: dimensions must be >= 1");
    const ElementDistances dist = element_distances(s);
    const auto n = static_cast<Eigen::Index>(s.n_elements());

    // Per-element path gains; localized layouts use the array center distance
    // for every element.
    Eigen::VectorXd rho_r(n), rho_t(n);
    if (s.layout == RisLayout::Localized) {
        const Vec3 c = ris_center(s);
        const double rr = path_gain(distance(c, s.rx_position), s.c0_db, s.pathloss_exponent);
        const double rt = path_gain(distance(c, s.tx_position), s.c0_db, s.pathloss_exponent);
        rho_r.setConstant(rr);
        rho_t.setConstant(rt);
    } else {
        for (Eigen::Index i = 0; i < n; ++i) {
            rho_r(i) = path_gain(dist.d_r(i), s.c0_db, s.pathloss_exponent);
            rho_t(i) = path_gain(dist.d_t(i), s.c0_db, s.pathloss_exponent);
        }
    }

    ChannelSet cs;
    {
        Rng rng(fading.rng_seed, 0);
        if (s.direct_blocked) {
            cs.h_rt = CMatrix::Zero(n_r, n_t);
        } else {
            const double rho_rt = path_gain(dist.d_rt, s.c0_db, s.pathloss_exponent);
            cs.h_rt = draw_matrix(rng, fading.kind, n_r, n_t,
                                  [&](Eigen::Index, Eigen::Index) { return rho_rt; });
        }
    }
    {
        Rng rng(fading.rng_seed, 1);
        cs.h_r = draw_matrix(rng, fading.kind, n_r, n,
                             [&](Eigen::Index, Eigen::Index j) { return rho_r(j); });
    }
    {
        Rng rng(fading.rng_seed, 2);
        cs.h_t = draw_matrix(rng, fading.kind, n, n_t,
                             [&](Eigen::Index i, Eigen::Index) { return rho_t(i); });
    }
    return cs;
}

CMatrix compose_channel(const ChannelSet& c, const CMatrix& theta) {
    if (theta.rows() != c.h_r.cols() || theta.cols() != c.h_t.rows() ||
        c.h_rt.rows() != c.h_r.rows() || c.h_rt.cols() != c.h_t.cols())
        throw std::invalid_argument("compose_channel: dimension mismatch");
    return c.h_rt + c.h_r * theta * c.h_t;
}

double received_power(const ChannelSet& c, const CMatrix& theta,
                      const CRowVector& g, const CVector& w, double p_t) {
    if (std::abs(g.norm() - 1.0) > 1e-12 || std::abs(w.norm() - 1.0) > 1e-12)
        throw std::invalid_argument("received_power: g and w must be unit norm");
    const Complex amp = g * compose_channel(c, theta) * w;
    return p_t * std::norm(amp);
}

}  // namespace bdris
