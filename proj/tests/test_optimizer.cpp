#include "doctest.h"

#include <cmath>

#include "bdris/experiment.hpp"
#include "bdris/optimizer.hpp"
#include "bdris/rng.hpp"
#include "bdris/units.hpp"

using namespace bdris;

namespace {

const Complex kJ{0.0, 1.0};

ChannelSet siso_channels(int n, std::uint64_t seed) {
    const Scenario s = make_localized_scenario(static_cast<std::size_t>(n));
    return draw_channels(s, {FadingKind::Rayleigh, seed}, 1, 1);
}

AdmittanceModel lossless_tri(int n) {
    AdmittanceModel m;
    m.kind = ModelKind::Lossless;
    m.topology = make_tridiagonal(n, 0.05, 1);
    return m;
}

AdmittanceModel lossy_model(int n, TopologyFamily family, double alpha_db_per_m) {
    const Scenario s = make_localized_scenario(static_cast<std::size_t>(n));
    return model_for_scenario(s, family, ModelKind::HalfWaveLossy, alpha_db_per_m);
}

Eigen::VectorXd central_fd(const Objective& f, const Eigen::VectorXd& x, double step) {
    Eigen::VectorXd g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        Eigen::VectorXd xp = x, xm = x;
        const double h = step * std::max(1.0, std::abs(x(i)));
        xp(i) += h;
        xm(i) -= h;
        g(i) = (f(xp) - f(xm)) / (2.0 * h);
    }
    return g;
}

}  // namespace

TEST_CASE("effective_siso") {
    const Scenario s = make_localized_scenario(3);
    const ChannelSet c = draw_channels(s, {FadingKind::Rayleigh, 2}, 2, 2);
    CRowVector g = CRowVector::Zero(2);
    g(1) = 1.0;
    CVector w = CVector::Zero(2);
    w(0) = 1.0;
    const EffectiveSiso eff = effective_siso(c, g, w);
    CHECK(eff.h_rt == c.h_rt(1, 0));
    CHECK(eff.h_r == c.h_r.row(1));
    CHECK(eff.h_t == c.h_t.col(0));
    CHECK_THROWS_AS(effective_siso(c, (2.0 * g).eval(), w), std::invalid_argument);
}

TEST_CASE("lossless inner objective") {
    const ChannelSet c = siso_channels(3, 8);
    CRowVector g(1);
    g << 1.0;
    CVector w(1);
    w << 1.0;
    const EffectiveSiso eff = effective_siso(c, g, w);

    // B = 0 gives Theta = I.
    const double p0 = lossless_inner_objective(Eigen::MatrixXd::Zero(3, 3), eff, 50.0, 10.0);
    CHECK(p0 == doctest::Approx(10.0 * std::norm(eff.h_rt + (eff.h_r * eff.h_t)(0)))
                    .epsilon(1e-12));

    // Random B equals the full Y -> Theta -> received_power pipeline.
    Rng rng(12);
    Eigen::MatrixXd b(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) b(i, j) = b(j, i) = 0.05 * rng.normal();
    const CMatrix theta = scattering_from_admittance(kJ * b.cast<Complex>(), 50.0);
    CHECK(lossless_inner_objective(b, eff, 50.0, 10.0) ==
          doctest::Approx(received_power(c, theta, g, w, 10.0)).epsilon(1e-10));
}

TEST_CASE("lossy auxiliary map") {
    AdmittanceModel m = lossy_model(2, TopologyFamily::Tridiagonal, 5.0);
    const double r = circle_radius(m.line.alpha_np_per_m, 0.05, 50.0);
    AuxiliaryMatrix aux{Eigen::MatrixXd::Zero(2, 2)};
    aux.a(0, 0) = 0.3;
    aux.a(1, 1) = -0.2;

    // A_nm = 0: off-diagonal entry vanishes entirely (on-circle at the apex).
    CMatrix y = admittance_from_aux(aux, m);
    CHECK(std::abs(y(0, 1)) == 0.0);
    CHECK(y(0, 0) == Complex{0.0, 0.3});

    // Large |A|: semicircle endpoints Im -> +-r, |Re| -> r.
    aux.a(0, 1) = aux.a(1, 0) = 1e9;
    y = admittance_from_aux(aux, m);
    CHECK(y(0, 1).imag() == doctest::Approx(r).epsilon(1e-6));
    CHECK(std::abs(y(0, 1).real()) == doctest::Approx(r).epsilon(1e-3));

    // Generic point lies on the circle centered at -(-1)^K r (K = 1 here).
    aux.a(0, 1) = aux.a(1, 0) = 0.04;
    y = admittance_from_aux(aux, m);
    CHECK(std::abs(std::abs(y(0, 1) - Complex{r, 0.0}) - r) < 1e-12 * r);
    CHECK(y(0, 1).real() > 0.0);  // odd K
    const double ch = std::cosh(m.line.alpha_np_per_m * 0.05);
    CHECK(y(0, 0).real() == doctest::Approx(ch * std::abs(y(0, 1).real())).epsilon(1e-12));
}

TEST_CASE("lossy objective degenerates to lossless at alpha = 0, bit for bit") {
    const ChannelSet c = siso_channels(4, 31);
    CRowVector g(1);
    g << 1.0;
    CVector w(1);
    w << 1.0;
    const EffectiveSiso eff = effective_siso(c, g, w);
    AdmittanceModel m = lossy_model(4, TopologyFamily::Tridiagonal, 0.0);
    Rng rng(3);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4, 4);
    for (int i = 0; i < 4; ++i) a(i, i) = 0.1 * rng.normal();
    for (int i = 0; i + 1 < 4; ++i) a(i, i + 1) = a(i + 1, i) = 0.1 * rng.normal();
    const double lossy = lossy_inner_objective({a}, eff, m, 10.0);
    const double lossless = lossless_inner_objective(a, eff, 50.0, 10.0);
    CHECK(lossy == lossless);
}

TEST_CASE("pack/unpack round trip") {
    const CircuitTopology t = make_tridiagonal(3, 0.05, 1);
    Eigen::MatrixXd s(3, 3);
    s << 1, 4, 0, 4, 2, 5, 0, 5, 3;
    const Eigen::VectorXd x = pack_symmetric(s, t);
    CHECK(x.size() == 5);
    CHECK(x(0) == 1);
    CHECK(x(3) == 4);  // first edge after the three diagonals
    CHECK(unpack_symmetric(x, t) == s);
}

TEST_CASE("quasi-Newton on a concave quadratic") {
    Eigen::VectorXd c(5);
    c << 1.0, -2.0, 0.5, 3.0, -1.5;
    const Objective f = [&](const Eigen::VectorXd& x) { return -(x - c).squaredNorm(); };
    const Gradient g = [&](const Eigen::VectorXd& x) {
        return (-2.0 * (x - c)).eval();
    };
    OptimizerConfig cfg;
    const QnResult r = quasi_newton_maximize(f, g, Eigen::VectorXd::Zero(5), cfg);
    CHECK((r.x - c).norm() < 1e-8);
    CHECK_FALSE(r.line_search_failed);

    const Objective bad = [](const Eigen::VectorXd&) {
        return std::numeric_limits<double>::quiet_NaN();
    };
    CHECK_THROWS_AS(quasi_newton_maximize(bad, g, Eigen::VectorXd::Zero(5), cfg),
                    std::runtime_error);
}

TEST_CASE("quasi-Newton recovers the phase-aligned single-element optimum") {
    const ChannelSet c = siso_channels(1, 9);
    CRowVector g(1);
    g << 1.0;
    CVector w(1);
    w << 1.0;
    const EffectiveSiso eff = effective_siso(c, g, w);
    const CircuitTopology topo = make_single_connected(1);
    const Objective f = [&](const Eigen::VectorXd& x) {
        return lossless_inner_objective(unpack_symmetric(x, topo), eff, 50.0, 10.0);
    };
    const Gradient gr = [&](const Eigen::VectorXd& x) {
        return lossless_inner_gradient(x, eff, topo, 50.0, 10.0);
    };
    OptimizerConfig cfg;
    const QnResult r = quasi_newton_maximize(f, gr, Eigen::VectorXd::Zero(1), cfg);
    CHECK(r.f == doctest::Approx(siso_best_power_sc(c, 10.0)).epsilon(1e-4));
}

TEST_CASE("analytic gradients match central finite differences") {
    Rng rng(55);
    const ChannelSet c = siso_channels(3, 14);
    CRowVector g(1);
    g << 1.0;
    CVector w(1);
    w << 1.0;
    const EffectiveSiso eff = effective_siso(c, g, w);
    const AdmittanceModel lossy = lossy_model(3, TopologyFamily::Tridiagonal, 8.0);
    const CircuitTopology topo = lossy.topology;
    const double p_t = 10.0;
    // Normalize so the objective is O(1) and the FD comparison meaningful.
    const double scale =
        p_t * std::pow(eff.h_r.norm() * eff.h_t.norm() + std::abs(eff.h_rt), 2);

    const Objective f_lossless = [&](const Eigen::VectorXd& x) {
        return lossless_inner_objective(unpack_symmetric(x, topo), eff, 50.0, p_t) / scale;
    };
    const Objective f_lossy = [&](const Eigen::VectorXd& x) {
        return lossy_inner_objective({unpack_symmetric(x, topo)}, eff, lossy, p_t) / scale;
    };

    for (int trial = 0; trial < 20; ++trial) {
        Eigen::VectorXd x(5);
        for (int i = 0; i < 5; ++i) x(i) = 0.05 * rng.normal();
        const Eigen::VectorXd ga =
            lossless_inner_gradient(x, eff, topo, 50.0, p_t) / scale;
        const Eigen::VectorXd gf = central_fd(f_lossless, x, 1e-6);
        CHECK((ga - gf).norm() / std::max(1e-12, gf.norm()) < 1e-5);

        const Eigen::VectorXd la = lossy_inner_gradient(x, eff, lossy, p_t) / scale;
        const Eigen::VectorXd lf = central_fd(f_lossy, x, 1e-6);
        CHECK((la - lf).norm() / std::max(1e-12, lf.norm()) < 1e-5);
    }
}

TEST_CASE("update_g_w") {
    // Rank-1 channel: recovers the outer-product factors.
    CVector u(3);
    u << Complex{0.6, 0.0}, Complex{0.0, 0.8}, Complex{0.0, 0.0};
    CVector v(2);
    v << Complex{1.0 / std::sqrt(2.0), 0.0}, Complex{0.5, 0.5};
    ChannelSet c;
    c.h_rt = 3.0 * u * v.adjoint();
    c.h_r = CMatrix::Zero(3, 2);
    c.h_t = CMatrix::Zero(2, 2);
    const auto [g, w] = update_g_w(c, CMatrix::Zero(2, 2));
    const double p = received_power(c, CMatrix::Zero(2, 2), g, w, 1.0);
    CHECK(p == doctest::Approx(9.0).epsilon(1e-12));

    // Power matches the dominant eigenvalue of H^H H on a random instance.
    const Scenario s = make_localized_scenario(4);
    const ChannelSet cr = draw_channels(s, {FadingKind::Rayleigh, 88}, 4, 4);
    const CMatrix h = compose_channel(cr, CMatrix::Identity(4, 4));
    const auto [g2, w2] = update_g_w(cr, CMatrix::Identity(4, 4));
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(h.adjoint() * h);
    CHECK(received_power(cr, CMatrix::Identity(4, 4), g2, w2, 1.0) ==
          doctest::Approx(eig.eigenvalues().maxCoeff()).epsilon(1e-10));

    ChannelSet zero;
    zero.h_rt = CMatrix::Zero(1, 1);
    zero.h_r = CMatrix::Zero(1, 2);
    zero.h_t = CMatrix::Zero(2, 1);
    CHECK_THROWS_AS(update_g_w(zero, CMatrix::Zero(2, 2)), std::invalid_argument);
}

TEST_CASE("optimize: lossless reaches the closed-form bound") {
    OptimizerConfig cfg;
    cfg.rng_seed = 5;
    for (int seed = 0; seed < 5; ++seed) {
        const ChannelSet c = siso_channels(4, 100 + seed);
        const double bound = siso_best_power_fc(c, 10.0);

        AdmittanceModel fc;
        fc.kind = ModelKind::Lossless;
        fc.topology = make_fully_connected(4, 0.05, 1);
        const OptimizationResult rf = optimize(c, fc, 10.0, cfg);
        CHECK(rf.p_r_watts >= bound * 0.999);
        CHECK(rf.p_r_watts <= bound * (1.0 + 1e-9));
        CHECK((rf.theta.adjoint() * rf.theta - CMatrix::Identity(4, 4))
                  .cwiseAbs()
                  .maxCoeff() < 1e-10);

        const OptimizationResult rt = optimize(c, lossless_tri(4), 10.0, cfg);
        CHECK(rt.p_r_watts >= bound * 0.999);

        // Trace is monotone (up to the minimum-norm regularizer's O(1e-8)
        // relative slack) and the reported power is self-consistent.
        for (std::size_t i = 1; i < rt.trace.size(); ++i)
            CHECK(rt.trace[i] >= rt.trace[i - 1] * (1.0 - 1e-7));
        CHECK(received_power(c, rt.theta, rt.g, rt.w, 10.0) ==
              doctest::Approx(rt.p_r_watts).epsilon(1e-9));
    }
}

TEST_CASE("optimize: single-connected closed form matches the amplitude bound") {
    OptimizerConfig cfg;
    for (int seed = 0; seed < 5; ++seed) {
        const ChannelSet c = siso_channels(6, 300 + seed);
        AdmittanceModel sc;
        sc.kind = ModelKind::Lossless;
        sc.topology = make_single_connected(6);
        const OptimizationResult r = optimize(c, sc, 10.0, cfg);
        CHECK(r.p_r_watts == doctest::Approx(siso_best_power_sc(c, 10.0)).epsilon(1e-6));
    }
}

TEST_CASE("optimize: lossy path at alpha = 0 equals lossless bit for bit") {
    OptimizerConfig cfg;
    cfg.rng_seed = 11;
    const ChannelSet c = siso_channels(4, 44);
    AdmittanceModel lossless;
    lossless.kind = ModelKind::Lossless;
    lossless.topology = make_tridiagonal(4, 0.05, 1);
    AdmittanceModel lossy = lossless;
    lossy.kind = ModelKind::HalfWaveLossy;
    const OptimizationResult a = optimize(c, lossless, 10.0, cfg);
    const OptimizationResult b = optimize(c, lossy, 10.0, cfg);
    CHECK(a.p_r_watts == b.p_r_watts);
    CHECK(a.theta == b.theta);
}

TEST_CASE("optimize: lossy semicircle restriction holds at the optimum") {
    OptimizerConfig cfg;
    cfg.rng_seed = 19;
    const ChannelSet c = siso_channels(3, 77);
    const AdmittanceModel m = lossy_model(3, TopologyFamily::Tridiagonal, 40.0);
    const double r = circle_radius(m.line.alpha_np_per_m, 0.05, 50.0);
    const OptimizationResult res = optimize(c, m, 10.0, cfg);
    const CMatrix y = admittance_from_scattering(res.theta, 50.0);
    for (int i = 0; i + 1 < 3; ++i) {
        CHECK(std::abs(y(i, i + 1).real()) <= r * (1.0 + 1e-9));
        CHECK(y(i, i + 1).real() >= -1e-12);  // K = 1 (odd): positive real part
    }
    // Losses can only hurt relative to the lossless upper bound.
    CHECK(res.p_r_watts <= siso_best_power_fc(c, 10.0) * (1.0 + 1e-9));
}

TEST_CASE("optimize: general lossy model is rejected") {
    const ChannelSet c = siso_channels(2, 1);
    AdmittanceModel m;
    m.kind = ModelKind::General;
    m.topology = make_tridiagonal(2, 0.05, 1);
    m.line.alpha_np_per_m = 0.1;
    CHECK_THROWS_AS(optimize(c, m, 10.0, OptimizerConfig{}), std::invalid_argument);
}
