#include "doctest.h"

#include <cmath>

#include "bdris/experiment.hpp"
#include "bdris/optimizer.hpp"
#include "bdris/rng.hpp"
#include "bdris/scaling.hpp"
#include "bdris/units.hpp"
#include "oracle.hpp"

using namespace bdris;

namespace {
const Complex kJ{0.0, 1.0};
}

TEST_CASE("nodal oracle: no edges is the grounded-reactance diagonal") {
    CircuitTopology t = make_single_connected(3);
    ReactanceAssignment x;
    x.x_ground.resize(3);
    x.x_ground << 10.0, -20.0, 5.0;
    const CMatrix y = oracle::nodal_port_admittance(t, x, LineParams{});
    for (int i = 0; i < 3; ++i)
        CHECK(std::abs(y(i, i) - 1.0 / (kJ * x.x_ground(i))) < 1e-15);
    CHECK(std::abs(y(0, 1)) == 0.0);
}

TEST_CASE("nodal oracle: single full-wave lossless edge") {
    // N=2, alpha=0, beta*l = 2*pi (K = 2), X = 10: the no-transmission-line
    // regime, off-diagonal -1/(jX) = j0.1.
    CircuitTopology t = make_tridiagonal(2, 0.1, 2);
    ReactanceAssignment x;
    x.x_ground = Eigen::VectorXd::Constant(2, 5.0);
    x.x_branch[{0, 1}] = 10.0;
    LineParams lp;
    // Nudge beta*l off the exact resonance where the line stamps blow up;
    // the limit is approached smoothly.
    lp.beta_rad_per_m = (2.0 * kPi + 1e-7) / 0.1;
    const CMatrix y = oracle::nodal_port_admittance(t, x, lp);
    CHECK(std::abs(y(0, 1) - kJ * 0.1) < 1e-5);
    CHECK(std::abs(y(0, 0) - (1.0 / (kJ * 5.0) - kJ * 0.1)) < 1e-5);
    CHECK(std::abs(y(0, 1) - y(1, 0)) < 1e-14);
}

TEST_CASE("nodal oracle matches the closed-form general model") {
    Rng rng(404);
    int done = 0;
    while (done < 30) {
        const int n = 2 + static_cast<int>(rng.uniform() * 3.0);
        AdmittanceModel m;
        m.kind = ModelKind::General;
        const double len = 0.03 + 0.12 * rng.uniform();
        m.topology = (rng.uniform() < 0.5) ? make_tridiagonal(n, len)
                                           : make_fully_connected(n, len);
        m.line.alpha_np_per_m = 2.0 * rng.uniform();
        // Keep beta*l away from the line resonances the oracle cannot stamp.
        const double bl = m.line.beta_rad_per_m * len;
        if (std::abs(std::sin(bl)) < 1e-3) continue;

        ReactanceAssignment x;
        x.x_ground.resize(n);
        for (int i = 0; i < n; ++i) x.x_ground(i) = 5.0 + 95.0 * rng.uniform();
        for (const Edge& e : m.topology.edges)
            x.x_branch[{e.n, e.m}] =
                (rng.uniform() < 0.5 ? -1.0 : 1.0) * (5.0 + 95.0 * rng.uniform());

        const CMatrix closed = assemble_admittance(m, x);
        const CMatrix nodal = oracle::nodal_port_admittance(m.topology, x, m.line);
        CHECK((closed - nodal).cwiseAbs().maxCoeff() < 1e-10);
        ++done;
    }
}

TEST_CASE("grid search: degenerate channel") {
    ChannelSet c;
    c.h_rt = CMatrix::Constant(1, 1, Complex{2.0, -1.0});
    c.h_r = CMatrix::Constant(1, 1, Complex{0.3, 0.1});
    c.h_t = CMatrix::Zero(1, 1);
    AdmittanceModel m;
    m.kind = ModelKind::Lossless;
    m.topology = make_single_connected(1);
    oracle::GridSpec spec;
    spec.points_per_dim = 31;
    spec.polish_rounds = 2;
    CHECK(oracle::grid_search_power(c, m, 10.0, spec) ==
          doctest::Approx(10.0 * std::norm(c.h_rt(0, 0))).epsilon(1e-12));
}

TEST_CASE("grid search: 1-D phase alignment optimum") {
    const Scenario s = make_localized_scenario(1);
    const ChannelSet c = draw_channels(s, {FadingKind::Rayleigh, 6}, 1, 1);
    AdmittanceModel m;
    m.kind = ModelKind::Lossless;
    m.topology = make_single_connected(1);
    const double best = oracle::grid_search_power(c, m, 10.0);
    const double bound = siso_best_power_sc(c, 10.0);
    CHECK(best <= bound * (1.0 + 1e-9));
    CHECK(best >= bound * 0.999);
}

TEST_CASE("grid search: budget guards") {
    ChannelSet c;
    c.h_rt = CMatrix::Zero(1, 1);
    c.h_r = CMatrix::Ones(1, 4);
    c.h_t = CMatrix::Ones(4, 1);
    AdmittanceModel m;
    m.kind = ModelKind::Lossless;
    m.topology = make_single_connected(4);
    CHECK_THROWS_AS(oracle::grid_search_power(c, m, 10.0), std::invalid_argument);
}

TEST_CASE("monte carlo estimator hits the single-element closed form") {
    const Scenario s = make_localized_scenario(1);
    const ScalingInputs in = scaling_inputs_from_scenario(s);
    const oracle::McResult mc =
        oracle::monte_carlo_expectation(s, Architecture::LocFC, {FadingKind::Rayleigh, 1}, 20000);
    const double target = expected_power_loc_fc(in);
    CHECK(std::abs(mc.mean - target) < 4.0 * mc.stderr_mean);
    CHECK(std::abs(mc.mean - target) / target < 0.05);
    CHECK_THROWS_AS(
        oracle::monte_carlo_expectation(s, Architecture::LocFC, {FadingKind::Rayleigh, 1}, 10),
        std::invalid_argument);
}

TEST_CASE("monte carlo estimator, LoS distributed single-connected") {
    const Scenario s = make_distributed_scenario(4);
    const ScalingInputs in = scaling_inputs_from_scenario(s);
    const oracle::McResult mc =
        oracle::monte_carlo_expectation(s, Architecture::DisSC, {FadingKind::LoS, 2}, 2000);
    const double target = expected_power_los(in, Architecture::DisSC);
    // LoS amplitudes are deterministic: the estimator is exact per trial.
    CHECK(mc.mean == doctest::Approx(target).epsilon(1e-9));
}
