#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "pbg/driven_qubit.hpp"
#include "pbg/bound_state.hpp"
#include "test_util.hpp"

using namespace pbg;

namespace {

std::vector<double> line_freqs(const std::vector<DressedTransition>& lines) {
    std::vector<double> f;
    for (const auto& l : lines) f.push_back(l.freq);
    std::sort(f.begin(), f.end());
    f.erase(std::unique(f.begin(), f.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }), f.end());
    return f;
}

Eigen::MatrixXcd random_density(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Eigen::MatrixXcd a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = {g(rng), g(rng)};
    Eigen::MatrixXcd rho = a * a.adjoint();
    return rho / rho.trace();
}

}  // namespace

TEST(Ladder, TransitionsAndValidation) {
    const auto t = transmon_transitions(4, 7.206, 0.385, 7.008, 0.01);
    ASSERT_EQ(t.size(), 3u);
    EXPECT_DOUBLE_EQ(t[1], 7.008);
    EXPECT_NEAR(t[2], 7.206 - 2 * 0.385 - 0.01, 1e-15);
    const auto l = TransmonLadder::from_transitions(t);
    EXPECT_NEAR(l.transition(1), 7.008, 1e-12);
    EXPECT_THROW(TransmonLadder::from_transitions({7.0, 7.1}), DomainError);
}

TEST(Mollow, ResonantTwoLevelLinesExact) {
    const auto ladder = TransmonLadder::from_transitions({7.2});
    for (double rabi : {0.01, 0.05, 0.3}) {
        const DriveConfig d{7.2, rabi};
        const auto f = line_freqs(dressed_transitions(diagonalize(dressed_hamiltonian(ladder, d)), ladder, d));
        ASSERT_EQ(f.size(), 3u);
        EXPECT_NEAR(f[0], 7.2 - rabi, 1e-10);
        EXPECT_NEAR(f[1], 7.2, 1e-10);
        EXPECT_NEAR(f[2], 7.2 + rabi, 1e-10);
    }
}

TEST(Mollow, UndrivenLadderHasBareLines) {
    const auto ladder = TransmonLadder::from_transitions({7.206, 7.008, 6.821});
    const DriveConfig d{7.206, 0.0};
    const auto lines = dressed_transitions(diagonalize(dressed_hamiltonian(ladder, d)), ladder, d);
    const auto f = line_freqs(lines);
    ASSERT_EQ(f.size(), 3u);
    EXPECT_NEAR(f[0], 6.821, 1e-12);
    EXPECT_NEAR(f[1], 7.008, 1e-12);
    EXPECT_NEAR(f[2], 7.206, 1e-12);
    double total = 0.0;  // |<n|b|n+1>|^2 = n + 1
    for (const auto& l : lines) total += l.weight;
    EXPECT_NEAR(total, 1.0 + 2.0 + 3.0, 1e-12);
}

TEST(AutlerTownes, DoubletSpacingPerturbative) {
    const auto ladder = TransmonLadder::from_transitions({7.206, 7.008});
    for (double rabi : {0.005, 0.01, 0.02}) {
        const DriveConfig d{7.008, rabi};
        const auto lines = dressed_transitions(diagonalize(dressed_hamiltonian(ladder, d)), ladder, d);
        std::vector<double> near;
        for (const auto& l : lines)
            if (std::abs(l.freq - 7.206) < 2 * rabi && l.from == 0) near.push_back(l.freq);
        ASSERT_EQ(near.size(), 2u);
        EXPECT_NEAR(std::abs(near[1] - near[0]) / (std::sqrt(2.0) * rabi), 1.0, 0.01);
    }
}

TEST(Diagonalize, DiagonalInputKeepsBasis) {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(3, 3);
    h(0, 0) = 0.3;
    h(1, 1) = 0.3;
    h(2, 2) = -1.0;
    const DressedSpectrum s = diagonalize(h);
    EXPECT_EQ(s.eigenvectors(2, 0), 1.0);
    EXPECT_EQ(s.eigenvectors(0, 1), 1.0);
    EXPECT_EQ(s.eigenvectors(1, 2), 1.0);
}

TEST(MixingAngle, Conventions) {
    const MixingAngle m = mixing_angle(0.0, 0.2);
    EXPECT_NEAR(m.theta, std::numbers::pi / 4, 1e-15);
    for (double d : {-0.3, -0.05, 0.1, 0.4}) {
        const MixingAngle a = mixing_angle(d, 0.2);
        EXPECT_NEAR(std::cos(2 * a.theta), d / a.omega, 1e-12);
        EXPECT_NEAR(std::sin(2 * a.theta), 0.2 / a.omega, 1e-12);
    }
    EXPECT_THROW(mixing_angle(0.0, 0.0), DegenerateError);
}

TEST(Lindblad, DecayEndsInGround) {
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(3, 3);
    h(1, 1) = 1.0;
    h(2, 2) = 2.1;
    std::vector<CollapseOp> ops;
    for (int k = 0; k < 2; ++k) {
        Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(3, 3);
        c(k, k + 1) = 1.0;
        ops.push_back({c, 0.01 * (k + 1)});
    }
    const Eigen::MatrixXcd rho = lindblad_steady_state(h, ops);
    EXPECT_NEAR(rho(0, 0).real(), 1.0, 1e-12);
}

TEST(Lindblad, ResonanceFluorescence) {
    // rho_ee = (W^2/4) / (d^2 + gamma^2/4 + W^2/2) for a driven, decaying two-level atom
    const double gamma = 0.004;
    for (double det : {0.0, 0.003, -0.01})
        for (double rabi : {0.001, 0.01, 0.1}) {
            const auto ladder = TransmonLadder::from_transitions({7.2}, {gamma});
            const DriveConfig d{7.2 + det, rabi};
            const Eigen::MatrixXcd rho =
                lindblad_steady_state(dressed_hamiltonian(ladder, d).cast<cplx>(), ladder_collapse_ops(ladder));
            const double ref = rabi * rabi / 4 / (det * det + gamma * gamma / 4 + rabi * rabi / 2);
            EXPECT_NEAR(rho(1, 1).real(), ref, 1e-9);
        }
}

TEST(Lindblad, TracePreservingAndPositive) {
    std::mt19937_64 rng(1);
    const auto ladder = TransmonLadder::from_transitions({7.206, 7.008, 6.821}, {0.004, 0.009, 0.013});
    const Eigen::MatrixXcd h = dressed_hamiltonian(ladder, {7.206, 0.05}).cast<cplx>();
    const auto ops = ladder_collapse_ops(ladder);
    const Eigen::MatrixXcd L = liouvillian(h, ops);
    for (int i = 0; i < 20; ++i) {
        const Eigen::MatrixXcd rho = random_density(4, rng);
        Eigen::VectorXcd v(16);
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) v(a * 4 + b) = rho(a, b);
        const Eigen::VectorXcd dv = L * v;
        cplx tr = 0.0;
        for (int a = 0; a < 4; ++a) tr += dv(a * 4 + a);
        EXPECT_LT(std::abs(tr), 1e-12);
    }
    const Eigen::MatrixXcd ss = lindblad_steady_state(h, ops);
    EXPECT_NEAR(ss.trace().real(), 1.0, 1e-12);
    EXPECT_LT((ss - ss.adjoint()).norm(), 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(ss);
    EXPECT_GT(es.eigenvalues().minCoeff(), -1e-10);
}

TEST(Lindblad, NoDissipationIsNonUnique) {
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(2, 2);
    h(1, 1) = 1.0;
    EXPECT_THROW(lindblad_steady_state(h, {}), NonUniqueSteadyState);
    Eigen::MatrixXcd bad = Eigen::MatrixXcd::Zero(2, 2);
    bad(0, 1) = 1.0;
    EXPECT_THROW(lindblad_steady_state(bad, {}), DomainError);
}

TEST(Cooling, ClosedFormMatchesLindblad) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> r(0.001, 1.0), th(0.05, 1.5);
    for (int i = 0; i < 200; ++i) {
        CoolingRates c;
        c.gamma_plus = r(rng);
        c.gamma_minus = r(rng);
        c.gamma_0 = r(rng);
        c.theta = th(rng);
        c.gamma_phi = i % 2 ? 0.0 : r(rng);
        Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(2, 2);
        h(0, 0) = -0.1;
        h(1, 1) = 0.1;
        const Eigen::MatrixXcd rho = lindblad_steady_state(h, dressed_collapse_ops(c));
        EXPECT_NEAR(rho(0, 0).real(), dressed_steady_state(c).rho_minus, 1e-9);
    }
}

TEST(Cooling, QuarterPiLimitAndSymmetry) {
    CoolingRates c;
    c.gamma_plus = 0.7;
    c.gamma_minus = 0.1;
    EXPECT_NEAR(dressed_steady_state(c).rho_minus, 0.7 / 0.8, 1e-15);
    c.gamma_minus = 0.7;
    EXPECT_NEAR(dressed_steady_state(c).rho_minus, 0.5, 1e-15);
    c.gamma_plus = c.gamma_minus = 0.0;
    EXPECT_THROW(dressed_steady_state(c), SolverError);
}

TEST(Cooling, RatesFollowDensityOfStates) {
    const BandModel b = pbg::testing::device_config().band;
    const CoolingRates r = cooling_rates(b, b.omega0, 0.25, 4.5, 0.0);
    EXPECT_GT(r.gamma_plus, 20.0 * r.gamma_minus);
    EXPECT_NEAR(r.gamma_plus / r.gamma_0, density_of_states(b, b.omega0 + 0.25) / density_of_states(b, b.omega0), 1e-12);
    EXPECT_THROW(cooling_rates(b, 7.7, 0.0, 4.5, 0.0), DomainError);
}

TEST(TransmissionFactor, SingleLine) {
    Eigen::VectorXd p(2);
    p << 0.8, 0.2;
    const std::vector<DressedTransition> lines{{7.2, 1.0, 0, 1}};
    EXPECT_NEAR(std::abs(driven_transmission_factor(p, lines, 7.2, {0.01}) - cplx(1.0 - 0.6)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(driven_transmission_factor(p, lines, 9.0, {0.01})), 1.0, 1e-4);
    p(0) = 0.9;
    EXPECT_THROW(driven_transmission_factor(p, lines, 7.2, {0.01}), DomainError);
}

TEST(DoublyDressed, QuarterScaling) {
    const BandModel b = pbg::testing::device_config().band;
    const double g = calibrate_g(0.25, b.alpha);
    const double split = dressed_bound_state(b, g, std::numbers::pi / 4, b.omega0);
    EXPECT_NEAR(split, std::pow(0.25, 2.0 / 3.0) * 0.25, 1e-9);
}
