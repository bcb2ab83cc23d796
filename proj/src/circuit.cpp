#include "bdris/circuit.hpp"

#include "bdris/units.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <sstream>

namespace bdris {

namespace {
const Complex kJ{0.0, 1.0};

int parity_sign(int k) { return (k % 2 == 0) ? 1 : -1; }

std::string entry_name(int n, int m) {
    std::ostringstream os;
    os << "(" << n << "," << m << ")";
    return os.str();
}
}  // namespace

bool CircuitTopology::has_edge(int a, int b) const {
    if (a > b) std::swap(a, b);
    return std::any_of(edges.begin(), edges.end(),
                       [&](const Edge& e) { return e.n == a && e.m == b; });
}

const Edge& CircuitTopology::edge(int a, int b) const {
    if (a > b) std::swap(a, b);
    for (const Edge& e : edges)
        if (e.n == a && e.m == b) return e;
    throw std::invalid_argument("CircuitTopology: no edge " + entry_name(a, b));
}

void CircuitTopology::validate() const {
    if (n < 1) throw std::invalid_argument("CircuitTopology: n must be >= 1");
    for (const Edge& e : edges) {
        if (e.n < 0 || e.m >= n || e.n >= e.m)
            throw std::invalid_argument("CircuitTopology: bad edge " + entry_name(e.n, e.m));
        if (e.length_m <= 0.0)
            throw std::invalid_argument("CircuitTopology: edge length must be > 0");
    }
    switch (family) {
        case TopologyFamily::SingleConnected:
            if (!edges.empty())
                throw std::invalid_argument("SingleConnected topology must have no edges");
            break;
        case TopologyFamily::Tridiagonal:
            if (static_cast<int>(edges.size()) != n - 1)
                throw std::invalid_argument("Tridiagonal topology must have N-1 edges");
            for (const Edge& e : edges)
                if (e.m != e.n + 1)
                    throw std::invalid_argument("Tridiagonal edges must join adjacent ports");
            break;
        case TopologyFamily::FullyConnected:
            if (static_cast<int>(edges.size()) != n * (n - 1) / 2)
                throw std::invalid_argument("FullyConnected topology must have all pairs");
            break;
        case TopologyFamily::Custom:
            break;
    }
}

CircuitTopology make_single_connected(int n) {
    CircuitTopology t;
    t.n = n;
    t.family = TopologyFamily::SingleConnected;
    t.validate();
    return t;
}

CircuitTopology make_tridiagonal(int n, double length_m, int half_waves) {
    CircuitTopology t;
    t.n = n;
    t.family = TopologyFamily::Tridiagonal;
    for (int i = 0; i + 1 < n; ++i)
        t.edges.push_back({i, i + 1, length_m, half_waves});
    t.validate();
    return t;
}

CircuitTopology make_fully_connected(int n, double length_m, int half_waves) {
    CircuitTopology t;
    t.n = n;
    t.family = TopologyFamily::FullyConnected;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            t.edges.push_back({i, j, length_m, half_waves});
    t.validate();
    return t;
}

std::pair<double, int> snap_to_half_wave(double length_m, double lambda_m) {
    if (length_m <= 0.0 || lambda_m <= 0.0)
        throw std::invalid_argument("snap_to_half_wave: lengths must be > 0");
    const double half = lambda_m / 2.0;
    const int k = std::max(1, static_cast<int>(std::lround(length_m / half)));
    return {k * half, k};
}

void LineParams::validate() const {
    if (alpha_np_per_m < 0.0) throw std::invalid_argument("LineParams: alpha must be >= 0");
    if (beta_rad_per_m <= 0.0) throw std::invalid_argument("LineParams: beta must be > 0");
    if (z0_line_ohm <= 0.0 || z0_ref_ohm <= 0.0)
        throw std::invalid_argument("LineParams: impedances must be > 0");
}

void AdmittanceModel::validate() const {
    line.validate();
    topology.validate();
    if (kind == ModelKind::HalfWaveLossy || kind == ModelKind::HalfWaveLossless) {
        for (const Edge& e : topology.edges) {
            if (e.half_waves < 1)
                throw std::invalid_argument("half-wave model: K must be >= 1 on edge " +
                                            entry_name(e.n, e.m));
            const double bl = line.beta_rad_per_m * e.length_m;
            const double target = kPi * e.half_waves;
            if (std::abs(bl - target) > 1e-9 * target)
                throw std::invalid_argument("half-wave model: beta*l != pi*K on edge " +
                                            entry_name(e.n, e.m));
        }
    }
}

Complex offdiag_admittance_general(double x_branch_ohm, double length_m,
                                   const LineParams& line) {
    const Complex gl = line.gamma() * length_m;
    const Complex ep = std::exp(gl);
    const Complex em = std::exp(-gl);
    const Complex denom = kJ * x_branch_ohm * (ep + em) + line.z0_line_ohm * (ep - em);
    if (std::abs(denom) < 1e-15)
        throw SingularityError("offdiag_admittance_general: singular denominator");
    return -2.0 / denom;
}

Complex diag_admittance_general(double x_ground_ohm,
                                const std::vector<std::pair<double, Complex>>& incident,
                                const LineParams& line) {
    if (x_ground_ohm == 0.0)
        throw SingularityError("diag_admittance_general: X_m = 0");
    Complex y = 1.0 / (kJ * x_ground_ohm);
    for (const auto& [length_m, y_nm] : incident)
        y -= std::cosh(line.gamma() * length_m) * y_nm;
    return y;
}

double circle_radius(double alpha_np_per_m, double length_m, double z0_ohm) {
    const double al = alpha_np_per_m * length_m;
    if (al == 0.0) return std::numeric_limits<double>::infinity();
    return 1.0 / (2.0 * z0_ohm * std::sinh(al));
}

namespace {

Complex offdiag_entry(const AdmittanceModel& model, const Edge& e, double x) {
    const LineParams& lp = model.line;
    switch (model.kind) {
        case ModelKind::General:
            return offdiag_admittance_general(x, e.length_m, lp);
        case ModelKind::HalfWaveLossy: {
            const double al = lp.alpha_np_per_m * e.length_m;
            const Complex denom = kJ * x * std::cosh(al) + lp.z0_line_ohm * std::sinh(al);
            if (std::abs(denom) < 1e-15)
                throw SingularityError("half-wave lossy off-diagonal: singular denominator");
            return -static_cast<double>(parity_sign(e.half_waves)) / denom;
        }
        case ModelKind::Lossless: {
            const double bl = lp.beta_rad_per_m * e.length_m;
            const double denom = x * std::cos(bl) + lp.z0_line_ohm * std::sin(bl);
            if (std::abs(denom) < 1e-15)
                throw SingularityError("lossless off-diagonal: singular denominator");
            return -1.0 / (kJ * denom);
        }
        case ModelKind::HalfWaveLossless: {
            if (x == 0.0)
                throw SingularityError("half-wave lossless off-diagonal: X = 0");
            return -static_cast<double>(parity_sign(e.half_waves)) / (kJ * x);
        }
    }
    throw std::logic_error("offdiag_entry: bad kind");
}

// Weight applied to [Y]_{n,m} in the diagonal Kirchhoff sum.
Complex diag_weight(const AdmittanceModel& model, const Edge& e) {
    const LineParams& lp = model.line;
    switch (model.kind) {
        case ModelKind::General:
            return std::cosh(lp.gamma() * e.length_m);
        case ModelKind::HalfWaveLossy:
            return static_cast<double>(parity_sign(e.half_waves)) *
                   std::cosh(lp.alpha_np_per_m * e.length_m);
        case ModelKind::Lossless:
            return std::cos(lp.beta_rad_per_m * e.length_m);
        case ModelKind::HalfWaveLossless:
            return static_cast<double>(parity_sign(e.half_waves));
    }
    throw std::logic_error("diag_weight: bad kind");
}

}  // namespace

CMatrix assemble_admittance(const AdmittanceModel& model, const ReactanceAssignment& x) {
    model.validate();
    const int n = model.topology.n;
    if (x.x_ground.size() != n)
        throw std::invalid_argument("assemble_admittance: x_ground size mismatch");
    CMatrix y = CMatrix::Zero(n, n);
    try {
        for (const Edge& e : model.topology.edges) {
            const auto it = x.x_branch.find({e.n, e.m});
            if (it == x.x_branch.end())
                throw std::invalid_argument("assemble_admittance: missing X for edge " +
                                            entry_name(e.n, e.m));
            const Complex ynm = offdiag_entry(model, e, it->second);
            y(e.n, e.m) = ynm;
            y(e.m, e.n) = ynm;  // circuit reciprocity
        }
        for (int m = 0; m < n; ++m) {
            if (x.x_ground(m) == 0.0)
                throw SingularityError("assemble_admittance: X_m = 0 at port " +
                                       std::to_string(m));
            Complex d = 1.0 / (kJ * x.x_ground(m));
            for (const Edge& e : model.topology.edges) {
                if (e.n != m && e.m != m) continue;
                const int other = (e.n == m) ? e.m : e.n;
                d -= diag_weight(model, e) * y(m, other);
            }
            y(m, m) = d;
        }
    } catch (const SingularityError& err) {
        throw SingularityError(std::string(err.what()) + " [assembling Y]");
    }
    return y;
}

CMatrix scattering_from_admittance(const CMatrix& y, double z0_ref_ohm) {
    const auto n = y.rows();
    // Lossless case, Y = jB with real symmetric B: diagonalize B orthogonally
    // and map each eigenvalue through (1 - j Z0 b)/(1 + j Z0 b). Each factor
    // has unit modulus, so Theta is unitary to the accuracy of the
    // eigenbasis (~1e-14) instead of the LU solve (~cond * eps).
    if (y.real().cwiseAbs().maxCoeff() == 0.0 &&
        (y.imag() - y.imag().transpose()).cwiseAbs().maxCoeff() == 0.0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(y.imag());
        if (es.info() == Eigen::Success) {
            const Eigen::MatrixXd& v = es.eigenvectors();
            CVector d(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                const Complex den{1.0, z0_ref_ohm * es.eigenvalues()(i)};
                d(i) = std::conj(den) / den;
            }
            return v.cast<Complex>() * d.asDiagonal() * v.transpose().cast<Complex>();
        }
    }
    const CMatrix m = CMatrix::Identity(n, n) + z0_ref_ohm * y;
    Eigen::PartialPivLU<CMatrix> lu(m);
    const double rcond = lu.rcond();
    if (!(rcond > 1e-15))
        throw SingularityError("scattering_from_admittance: I + Z0 Y is singular");
    if (rcond < 1e-12)
        std::cerr << "warning: I + Z0 Y ill-conditioned (rcond " << rcond << ")\n";
    return lu.solve(CMatrix::Identity(n, n) - z0_ref_ohm * y);
}

CMatrix admittance_from_scattering(const CMatrix& theta, double z0_ref_ohm) {
    const auto n = theta.rows();
    const CMatrix m = CMatrix::Identity(n, n) + theta;
    Eigen::PartialPivLU<CMatrix> lu(m);
    if (!(lu.rcond() > 1e-15))
        throw SingularityError("admittance_from_scattering: I + Theta is singular");
    return lu.solve((CMatrix::Identity(n, n) - theta) / z0_ref_ohm);
}

double dissipated_power(const CMatrix& y, const CVector& v) {
    const Eigen::MatrixXd g = y.real();
    const Complex q = v.transpose() * (g * v.conjugate());
    return 0.5 * q.real();
}

ReactanceAssignment extract_reactances(const CMatrix& y_target, const AdmittanceModel& model) {
    model.validate();
    const int n = model.topology.n;
    if (y_target.rows() != n || y_target.cols() != n)
        throw std::invalid_argument("extract_reactances: size mismatch");

    // Structural check: entries off the topology must be zero.
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (!model.topology.has_edge(i, j) && std::abs(y_target(i, j)) > 1e-12)
                throw RealizabilityError("extract_reactances: nonzero entry off topology at " +
                                         entry_name(i, j));

    const LineParams& lp = model.line;
    ReactanceAssignment x;
    x.x_ground.resize(n);

    for (const Edge& e : model.topology.edges) {
        const Complex ynm = y_target(e.n, e.m);
        if (std::abs(ynm) < 1e-15)
            throw RealizabilityError("extract_reactances: zero admittance on edge " +
                                     entry_name(e.n, e.m) + " requires an open circuit");
        double xv = 0.0;
        switch (model.kind) {
            case ModelKind::General: {
                const Complex gl = lp.gamma() * e.length_m;
                const Complex ch = std::cosh(gl);
                if (std::abs(ch) < 1e-12)
                    throw SingularityError("extract_reactances: quarter-wave edge " +
                                           entry_name(e.n, e.m));
                const Complex z = (-1.0 / ynm - lp.z0_line_ohm * std::sinh(gl)) / ch;
                xv = z.imag();
                break;
            }
            case ModelKind::HalfWaveLossy: {
                const double al = lp.alpha_np_per_m * e.length_m;
                const Complex z = -static_cast<double>(parity_sign(e.half_waves)) / ynm;
                xv = (z.imag()) / std::cosh(al);
                break;
            }
            case ModelKind::Lossless: {
                const double bl = lp.beta_rad_per_m * e.length_m;
                const double c = std::cos(bl);
                if (std::abs(c) < 1e-12)
                    throw SingularityError("extract_reactances: quarter-wave edge " +
                                           entry_name(e.n, e.m));
                const double b = ynm.imag();
                if (b == 0.0)
                    throw RealizabilityError("extract_reactances: zero susceptance on edge " +
                                             entry_name(e.n, e.m));
                xv = 1.0 / (c * b) - lp.z0_line_ohm * std::tan(bl);
                break;
            }
            case ModelKind::HalfWaveLossless: {
                const double b = ynm.imag();
                if (b == 0.0)
                    throw RealizabilityError("extract_reactances: zero susceptance on edge " +
                                             entry_name(e.n, e.m));
                xv = static_cast<double>(parity_sign(e.half_waves)) / b;
                break;
            }
        }
        x.x_branch[{e.n, e.m}] = xv;
    }

    for (int m = 0; m < n; ++m) {
        // Residual 1/(jX_m) after removing the interconnection contributions.
        Complex resid = y_target(m, m);
        for (const Edge& e : model.topology.edges) {
            if (e.n != m && e.m != m) continue;
            const int other = (e.n == m) ? e.m : e.n;
            resid += diag_weight(model, e) * y_target(m, other);
        }
        if (std::abs(resid.imag()) < 1e-15)
            throw RealizabilityError("extract_reactances: diagonal " + std::to_string(m) +
                                     " requires X_m = infinity");
        x.x_ground(m) = -1.0 / resid.imag();
    }

    // Self-check: the inversion is only valid for on-model targets.
    const CMatrix back = assemble_admittance(model, x);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (std::abs(back(i, j) - y_target(i, j)) > 1e-9)
                throw RealizabilityError("extract_reactances: target not realizable at " +
                                         entry_name(i, j));
    return x;
}

}  // namespace bdris
