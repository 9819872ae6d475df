#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pbg/bound_state.hpp"
#include "test_util.hpp"

using namespace pbg;

namespace {

BandModel band() { return pbg::testing::device_config().band; }

// With s = sqrt(w0 - wb) the bound-state condition is the depressed cubic s^3 + p s - c = 0,
// p = wq - w0, c = pi g^2 / alpha (angular units). Cardano for the single positive root.
double cardano_omega_b(double wq, double g, double w0, double alpha) {
    const double p = angular(wq) - angular(w0);
    const double c = std::numbers::pi * angular(g) * angular(g) / alpha;
    const double disc = c * c / 4.0 + p * p * p / 27.0;
    double s;
    if (disc >= 0.0) {
        s = std::cbrt(c / 2.0 + std::sqrt(disc)) + std::cbrt(c / 2.0 - std::sqrt(disc));
    } else {
        const double r = std::sqrt(-p / 3.0);
        s = 2.0 * r * std::cos(std::acos(c / (2.0 * r * r * r)) / 3.0);
    }
    return ordinary(angular(w0) - s * s);
}

}  // namespace

TEST(BoundState, ResonantPoint) {
    const BandModel b = band();
    QubitParams q;
    q.omega_q = b.omega0;
    q.g = calibrate_g(0.25, b.alpha);
    const BoundStateSolution s = solve_bound_state(q, b);
    EXPECT_NEAR(s.detuning_edge, 0.25, 1e-9);
    EXPECT_NEAR(s.qubit_weight, 2.0 / 3.0, 1e-9);
    EXPECT_NEAR(s.tan2_theta, 0.5, 1e-9);
}

TEST(BoundState, MatchesCardano) {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> wq(5.0, 9.0), g(0.01, 8.0), w0(6.0, 9.0), alpha(200.0, 5000.0);
    for (int i = 0; i < 500; ++i) {
        BandModel b;
        b.omega0 = w0(rng);
        b.alpha = alpha(rng);
        QubitParams q;
        q.omega_q = wq(rng);
        q.g = g(rng);
        const BoundStateSolution s = solve_bound_state(q, b);
        const double ref = cardano_omega_b(q.omega_q, q.g, b.omega0, b.alpha);
        EXPECT_NEAR(s.omega_b, ref, 1e-9 * std::max(1.0, std::abs(b.omega0 - ref)));
        EXPECT_LT(s.omega_b, std::min(q.omega_q, b.omega0));
    }
}

TEST(BoundState, WeightFormulasAgree) {
    for (double wb : {6.0, 7.0, 7.4, 7.69}) {
        const double wq = 7.7, w0 = 7.7;
        EXPECT_NEAR(qubit_weight(wq, wb, w0), 1.0 / (1.0 + tan2_theta(wq, wb, w0)), 1e-14);
    }
    EXPECT_THROW(qubit_weight(7.0, 7.8, 7.7), DomainError);
    EXPECT_THROW(tan2_theta(7.0, 7.7, 7.7), DomainError);
}

TEST(BoundState, MonotoneInQubitFrequency) {
    const BandModel b = band();
    QubitParams q = pbg::testing::device_config().qubit;
    double last_wb = -1e9, last_pq = 2.0, last_l = 0.0;
    for (double wq = 6.5; wq <= 9.0; wq += 0.05) {
        q.omega_q = wq;
        const BoundStateSolution s = solve_bound_state(q, b);
        EXPECT_GT(s.omega_b, last_wb);
        EXPECT_LT(s.qubit_weight, last_pq);
        EXPECT_GT(s.loc_length, last_l);
        last_wb = s.omega_b;
        last_pq = s.qubit_weight;
        last_l = s.loc_length;
    }
}

TEST(BoundState, UncoupledLimits) {
    const BandModel b = band();
    QubitParams q;
    q.g = 0.0;
    q.omega_q = 7.2;
    EXPECT_DOUBLE_EQ(solve_bound_state(q, b).omega_b, 7.2);
    q.omega_q = 8.0;
    EXPECT_THROW(solve_bound_state(q, b), NoBoundStateError);
}

TEST(BoundState, LocalizationLength) {
    EXPECT_TRUE(std::isinf(localization_length(1300.0, 0.0)));
    EXPECT_TRUE(std::isinf(localization_length(1300.0, -0.1)));
    EXPECT_NEAR(localization_length(1300.0, 0.25), std::sqrt(1300.0 / (kTwoPi * 0.25)), 1e-12);
}

TEST(BoundState, ShiftAndCalibrationInvert) {
    for (double d : {0.01, 0.1, 0.25, 1.0}) EXPECT_NEAR(resonant_shift(calibrate_g(d, 1234.0), 1234.0), d, 1e-12);
    EXPECT_THROW(calibrate_g(0.1, -1.0), DomainError);
}

TEST(BoundState, EnvelopeDecays) {
    BoundStateSolution s;
    s.loc_length = 20.0;
    EXPECT_DOUBLE_EQ(photon_envelope(s, 0.0), 1.0);
    EXPECT_NEAR(photon_envelope(s, -20.0), std::exp(-1.0), 1e-15);
}

TEST(LengthFit, SelfInversion) {
    std::vector<LengthSample> v;
    for (int i = 0; i < 10; ++i) {
        const double x = 0.01 + 0.007 * i;
        v.push_back({linewidth_model(1.0 / x, 126.0, 0.8), x});
    }
    const LengthFit f = fit_effective_length(v);
    EXPECT_NEAR(f.d_fit, 126.0, 1e-9);
    EXPECT_NEAR(f.gamma_ext, 0.8, 1e-12);
    EXPECT_NEAR(f.r2, 1.0, 1e-12);
}

TEST(LengthFit, Errors) {
    EXPECT_THROW(fit_effective_length({{0.1, 0.01}, {0.2, 0.02}}), FitError);
    EXPECT_THROW(fit_effective_length({{0.1, 0.01}, {0.2, 0.01}, {0.3, 0.01}}), FitError);
    EXPECT_THROW(fit_effective_length({{0.1, 0.01}, {-0.2, 0.02}, {0.3, 0.03}}), FitError);
}

TEST(LengthFit, NoisyDataStaysClose) {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> n(0.0, 0.02);
    std::vector<LengthSample> v;
    for (int i = 0; i < 40; ++i) {
        const double x = 0.01 + 0.002 * i;
        v.push_back({linewidth_model(1.0 / x, 126.0, 0.8) * std::exp(n(rng)), x});
    }
    EXPECT_NEAR(fit_effective_length(v).d_fit, 126.0, 5.0);
}

TEST(Linewidth, ShrinksDeeperInGap) {
    EXPECT_LT(linewidth_model(10.0, 126.0, 1.0), linewidth_model(30.0, 126.0, 1.0));
    EXPECT_THROW(linewidth_model(10.0, 0.0, 1.0), DomainError);
}
