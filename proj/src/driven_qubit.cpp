#include "pbg/driven_qubit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <unsupported/Eigen/KroneckerProduct>

#include "pbg/bound_state.hpp"

namespace pbg {

TransmonLadder TransmonLadder::from_transitions(const std::vector<double>& transitions,
                                                const std::vector<double>& rates) {
    TransmonLadder l;
    l.level_freqs.assign(1, 0.0);
    for (double t : transitions) l.level_freqs.push_back(l.level_freqs.back() + t);
    l.decay_rates = rates.empty() ? std::vector<double>(transitions.size(), 0.0) : rates;
    validate(l);
    return l;
}

void validate(const TransmonLadder& l) {
    if (l.level_freqs.size() < 2) throw DomainError("ladder needs at least two levels");
    if (l.decay_rates.size() + 1 != l.level_freqs.size()) throw DomainError("one decay rate per transition");
    for (double r : l.decay_rates)
        if (!(r >= 0.0)) throw DomainError("decay rates must be >= 0");
    for (int n = 0; n + 2 < l.size(); ++n)
        if (!(l.transition(n) > l.transition(n + 1))) throw DomainError("transition frequencies must decrease up the ladder");
}

std::vector<double> transmon_transitions(int n_levels, double omega01, double e_c, double omega12,
                                         double correction) {
    if (n_levels < 2) throw DomainError("ladder needs at least two levels");
    std::vector<double> t{omega01};
    for (int n = 1; n + 1 < n_levels; ++n) {
        if (n == 1) t.push_back(omega12 > 0.0 ? omega12 : omega01 - e_c);
        else t.push_back(omega01 - n * e_c - (n - 1) * correction);
    }
    return t;
}

Eigen::MatrixXd dressed_hamiltonian(const TransmonLadder& ladder, const DriveConfig& drive) {
    validate(ladder);
    if (!(drive.omega_rabi0 >= 0.0)) throw DomainError("Rabi rate must be >= 0");
    const int n = ladder.size();
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < n; ++k) h(k, k) = ladder.level_freqs[k] - k * drive.omega_d;
    for (int k = 0; k + 1 < n; ++k) h(k, k + 1) = h(k + 1, k) = std::sqrt(k + 1.0) * drive.omega_rabi0 / 2.0;
    return h;
}

DressedSpectrum diagonalize(const Eigen::MatrixXd& h) {
    const int n = static_cast<int>(h.rows());
    DressedSpectrum s;
    if (h.isDiagonal(0.0)) {
        std::vector<int> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return h(a, a) < h(b, b); });
        s.eigenvalues.resize(n);
        s.eigenvectors = Eigen::MatrixXd::Zero(n, n);
        for (int i = 0; i < n; ++i) {
            s.eigenvalues(i) = h(idx[i], idx[i]);
            s.eigenvectors(idx[i], i) = 1.0;
        }
        return s;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    if (es.info() != Eigen::Success) throw SolverError("dressed Hamiltonian diagonalization failed");
    s.eigenvalues = es.eigenvalues();
    s.eigenvectors = es.eigenvectors();
    return s;
}

namespace {

Eigen::MatrixXd lowering(int n) {
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k + 1 < n; ++k) b(k, k + 1) = std::sqrt(k + 1.0);
    return b;
}

}  // namespace

std::vector<DressedTransition> dressed_transitions(const DressedSpectrum& spec, const TransmonLadder& ladder,
                                                   const DriveConfig& drive, double weight_floor) {
    const int n = ladder.size();
    if (spec.eigenvalues.size() != n) throw DomainError("spectrum and ladder dimensions differ");
    const Eigen::MatrixXd bd = spec.eigenvectors.transpose() * lowering(n) * spec.eigenvectors;
    std::vector<DressedTransition> out;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double w = bd(i, j) * bd(i, j);
            if (w >= weight_floor)
                out.push_back({drive.omega_d + spec.eigenvalues(j) - spec.eigenvalues(i), w, i, j});
        }
    return out;
}

MixingAngle mixing_angle(double delta_a, double omega_rabi0) {
    const double omega = std::hypot(omega_rabi0, delta_a);
    if (omega == 0.0) throw DegenerateError("mixing angle undefined without drive or detuning");
    const double c2 = std::clamp(0.5 + delta_a / (2.0 * omega), 0.0, 1.0);
    return {std::acos(std::sqrt(c2)), omega};
}

CoolingRates cooling_rates(const BandModel& band, double omega_l, double omega, double g, double gamma_phi,
                           double theta) {
    if (!(omega > 0.0)) throw DomainError("generalized Rabi rate must be > 0");
    if (gamma_phi < 0.0 || g < 0.0) throw DomainError("rates need g >= 0 and gamma_phi >= 0");
    const double k = kTwoPi * g * g;
    CoolingRates r;
    r.gamma_0 = k * density_of_states(band, omega_l);
    r.gamma_minus = k * density_of_states(band, omega_l - omega);
    r.gamma_plus = k * density_of_states(band, omega_l + omega);
    r.theta = theta;
    r.gamma_phi = gamma_phi;
    return r;
}

DressedPopulations dressed_steady_state(const CoolingRates& r) {
    const double s = std::sin(r.theta), c = std::cos(r.theta);
    const double pump = r.gamma_phi * std::pow(std::sin(2.0 * r.theta), 2);
    const double down = r.gamma_plus * std::pow(c, 4) + pump;
    const double up = r.gamma_minus * std::pow(s, 4) + pump;
    if (!(down + up > 0.0)) throw SolverError("steady state undefined: all dressed rates vanish");
    return {down / (down + up), up / (down + up)};
}

Eigen::MatrixXcd liouvillian(const Eigen::MatrixXcd& h, const std::vector<CollapseOp>& ops) {
    using Eigen::kroneckerProduct;
    const Eigen::Index n = h.rows();
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
    const cplx j{0.0, 1.0};
    // Row-major vec: vec(A rho B) = (A kron B^T) vec(rho).
    Eigen::MatrixXcd L = -j * (kroneckerProduct(h, id) - kroneckerProduct(id, h.transpose())).eval();
    for (const auto& c : ops) {
        if (c.rate == 0.0) continue;
        const Eigen::MatrixXcd cdc = c.op.adjoint() * c.op;
        L += c.rate * (kroneckerProduct(c.op, c.op.conjugate()) - 0.5 * kroneckerProduct(cdc, id) -
                       0.5 * kroneckerProduct(id, cdc.transpose()))
                          .eval();
    }
    return L;
}

Eigen::MatrixXcd lindblad_steady_state(const Eigen::MatrixXcd& h, const std::vector<CollapseOp>& ops) {
    const Eigen::Index n = h.rows();
    if (n < 1 || n > 16 || h.cols() != n) throw DomainError("Hamiltonian must be square with dimension <= 16");
    if (!h.isApprox(h.adjoint(), 1e-12)) throw DomainError("Hamiltonian is not Hermitian");
    for (const auto& c : ops)
        if (c.op.rows() != n || c.op.cols() != n || !(c.rate >= 0.0)) throw DomainError("bad collapse operator");

    const Eigen::MatrixXcd L = liouvillian(h, ops);
    const double lnorm = L.norm();
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(L);
    lu.setThreshold(1e-10);
    const Eigen::Index kernel = L.cols() - lu.rank();
    if (kernel > 1) throw NonUniqueSteadyState("Liouvillian null space is degenerate");
    if (kernel < 1) throw SolverError("Liouvillian has no null vector within tolerance");

    // Replace one population row (linearly dependent by trace preservation) with Tr(rho) = 1.
    Eigen::MatrixXcd A = L;
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n * n);
    A.row(0).setZero();
    for (Eigen::Index i = 0; i < n; ++i) A(0, i * n + i) = 1.0;
    rhs(0) = 1.0;
    const Eigen::VectorXcd v = A.fullPivLu().solve(rhs);

    Eigen::MatrixXcd rho(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index k = 0; k < n; ++k) rho(i, k) = v(i * n + k);
    if ((L * v).norm() > 1e-8 * std::max(lnorm, 1.0)) throw SolverError("steady state residual too large");
    if ((rho - rho.adjoint()).norm() > 1e-10) throw SolverError("steady state is not Hermitian");
    rho = 0.5 * (rho + rho.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
    if (es.eigenvalues().minCoeff() < -1e-10) throw SolverError("steady state is not positive");
    return rho;
}

std::vector<CollapseOp> ladder_collapse_ops(const TransmonLadder& ladder) {
    const int n = ladder.size();
    std::vector<CollapseOp> ops;
    for (int k = 0; k + 1 < n; ++k) {
        Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(n, n);
        c(k, k + 1) = 1.0;
        ops.push_back({c, ladder.decay_rates[k]});
    }
    return ops;
}

std::vector<CollapseOp> dressed_collapse_ops(const CoolingRates& r) {
    const double s = std::sin(r.theta), c = std::cos(r.theta);
    const double pump = r.gamma_phi * std::pow(std::sin(2.0 * r.theta), 2);
    Eigen::MatrixXcd sm = Eigen::MatrixXcd::Zero(2, 2), sp = Eigen::MatrixXcd::Zero(2, 2);
    sm(0, 1) = 1.0;  // |+> -> |->
    sp(1, 0) = 1.0;
    Eigen::MatrixXcd sz = Eigen::MatrixXcd::Zero(2, 2);
    sz(0, 0) = -1.0;
    sz(1, 1) = 1.0;
    return {{sm, r.gamma_plus * std::pow(c, 4)},
            {sp, r.gamma_minus * std::pow(s, 4)},
            {sz, r.gamma_0 * s * s * c * c},
            {sm, pump},
            {sp, pump}};
}

Eigen::VectorXd dressed_populations(const Eigen::MatrixXcd& rho, const DressedSpectrum& spec) {
    const Eigen::MatrixXcd v = spec.eigenvectors.cast<cplx>();
    return (v.adjoint() * rho * v).diagonal().real();
}

cplx driven_transmission_factor(const Eigen::VectorXd& populations, const std::vector<DressedTransition>& lines,
                                double f, const std::vector<double>& linewidths) {
    if (linewidths.size() != lines.size()) throw DomainError("one linewidth per transition");
    if (std::abs(populations.sum() - 1.0) > 1e-8) throw DomainError("populations must be normalized");
    const cplx j{0.0, 1.0};
    cplx t{1.0};
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto& l = lines[i];
        const double hw = 0.5 * linewidths[i];
        const double dp = populations(l.from) - populations(l.to);
        if (dp == 0.0 || l.weight == 0.0) continue;
        t -= l.weight * dp * hw / (j * (f - l.freq) + hw);
    }
    return t;
}

double dressed_bound_state(const BandModel& band, double g, double theta, double sideband_freq) {
    double c2 = std::pow(std::cos(theta), 2);
    if (c2 < 1e-12) c2 = 0.0;
    QubitParams q;
    q.omega_q = sideband_freq;
    q.g = g * c2;
    return solve_bound_state(q, band).detuning_edge;
}

}  // namespace pbg
