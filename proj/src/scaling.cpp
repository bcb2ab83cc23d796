#include "bdris/scaling.hpp"

#include <cmath>
#include <stdexcept>

#include "bdris/channel.hpp"
#include "bdris/units.hpp"

namespace bdris {

ScalingInputs scaling_inputs_from_scenario(const Scenario& s) {
    const ElementDistances d = element_distances(s);
    const Vec3 c = ris_center(s);
    ScalingInputs in;
    in.n = static_cast<int>(s.n_elements());
    in.a = s.pathloss_exponent;
    in.c0 = db_to_linear(s.c0_db);
    in.d_r = distance(c, s.rx_position);
    in.d_t = distance(c, s.tx_position);
    in.dvec_r = d.d_r;
    in.dvec_t = d.d_t;
    return in;
}

double generalized_mean(const Eigen::VectorXd& xi, double p) {
    if (xi.size() == 0) throw std::domain_error("generalized_mean: empty vector");
    if (p == 0.0) throw std::domain_error("generalized_mean: p must be nonzero");
    if ((xi.array() <= 0.0).any())
        throw std::domain_error("generalized_mean: entries must be > 0");
    // Factor out an extremal entry so xi^p stays bounded for large |p|.
    const double m = (p > 0.0) ? xi.maxCoeff() : xi.minCoeff();
    const double mean = ((xi.array() / m).pow(p)).mean();
    return m * std::pow(mean, 1.0 / p);
}

MeanBounds generalized_mean_bounds(const Eigen::VectorXd& xi, double p) {
    if (xi.size() < 1) throw std::domain_error("generalized_mean_bounds: empty vector");
    if (p <= 0.0) throw std::domain_error("generalized_mean_bounds: p must be > 0");
    MeanBounds b;
    b.lower = xi.minCoeff();
    b.value = generalized_mean(xi, -p);
    b.upper = std::pow(static_cast<double>(xi.size()), 1.0 / p) * b.lower;
    // Strictness fails exactly when entries repeat (all-equal gives value == lower).
    b.strict = true;
    for (Eigen::Index i = 0; i < xi.size() && b.strict; ++i)
        for (Eigen::Index j = i + 1; j < xi.size(); ++j)
            if (xi(i) == xi(j)) { b.strict = false; break; }
    return b;
}

namespace {
const double kPi2Over16 = kPi * kPi / 16.0;
}

double expected_power_loc_sc(const ScalingInputs& in) {
    const double n = in.n;
    return (n + kPi2Over16 * n * (n - 1.0)) * in.c0 * in.c0 *
           std::pow(in.d_r, -in.a) * std::pow(in.d_t, -in.a);
}

double expected_power_loc_fc(const ScalingInputs& in) {
    const double n = in.n;
    return n * n * in.c0 * in.c0 * std::pow(in.d_r, -in.a) * std::pow(in.d_t, -in.a);
}

double expected_power_dis_sc(const ScalingInputs& in) {
    const Eigen::ArrayXd prod = in.dvec_r.array() * in.dvec_t.array();
    const Eigen::ArrayXd half = prod.pow(-in.a / 2.0);
    double diag = prod.pow(-in.a).sum();
    // sum over n != m of (dRn dTn dRm dTm)^(-a/2) = (sum half)^2 - sum half^2
    const double s = half.sum();
    double cross = s * s - (half * half).sum();
    return in.c0 * in.c0 * (diag + kPi2Over16 * cross);
}

double expected_power_dis_fc(const ScalingInputs& in) {
    const double sr = in.dvec_r.array().pow(-in.a).sum();
    const double st = in.dvec_t.array().pow(-in.a).sum();
    return in.c0 * in.c0 * sr * st;
}

double expected_power_los(const ScalingInputs& in, Architecture arch) {
    switch (arch) {
        case Architecture::LocSC:
        case Architecture::LocFC:
            return expected_power_loc_fc(in);
        case Architecture::DisFC:
            return expected_power_dis_fc(in);
        case Architecture::DisSC: {
            const double s = (in.dvec_r.array() * in.dvec_t.array()).pow(-in.a / 2.0).sum();
            return in.c0 * in.c0 * s * s;
        }
    }
    throw std::logic_error("expected_power_los: bad architecture");
}

double gain_loc(int n) {
    if (n < 1) throw std::domain_error("gain_loc: n must be >= 1");
    return n / (1.0 + kPi2Over16 * (n - 1.0));
}

GainDis gain_dis(const ScalingInputs& in) {
    GainDis g;
    g.gain = expected_power_dis_fc(in) / expected_power_dis_sc(in);
    const double min_prod = (in.dvec_r.array() * in.dvec_t.array()).minCoeff();
    const double denom = std::pow(static_cast<double>(in.n), 2.0 / in.a) *
                         in.dvec_r.minCoeff() * in.dvec_t.minCoeff();
    g.lower_bound = std::pow(min_prod / denom, in.a);
    return g;
}

GainSC gain_sc(const ScalingInputs& in) {
    GainSC g;
    g.gain = expected_power_dis_sc(in) / expected_power_loc_sc(in);
    const Eigen::VectorXd prod = (in.dvec_r.array() * in.dvec_t.array()).matrix();
    const double m = generalized_mean(prod, -in.a / 2.0);
    g.approx = std::pow(in.d_r * in.d_t / m, in.a);
    const double min_prod = prod.minCoeff();
    const double n_fac = std::pow(static_cast<double>(in.n), 2.0 / in.a);
    g.sufficient = in.d_r * in.d_t > n_fac * min_prod;
    g.necessary = in.d_r * in.d_t > min_prod;
    return g;
}

GainFC gain_fc(const ScalingInputs& in) {
    GainFC g;
    g.gain = expected_power_dis_fc(in) / expected_power_loc_fc(in);
    const double min_r = in.dvec_r.minCoeff();
    const double min_t = in.dvec_t.minCoeff();
    const double n_fac = std::pow(static_cast<double>(in.n), 2.0 / in.a);
    g.sufficient = in.d_r * in.d_t > n_fac * min_r * min_t;
    g.necessary = in.d_r * in.d_t > min_r * min_t;
    return g;
}

}  // namespace bdris
