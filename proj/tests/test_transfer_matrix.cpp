#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "pbg/transfer_matrix.hpp"

using namespace pbg;

namespace {

TwoPort random_lossless(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> len(0.1, 20.0), z(10.0, 150.0), f(1.0, 12.0), gam(0.0, 0.3);
    std::vector<TwoPort> chain;
    const double freq = f(rng);
    for (int i = 0; i < 5; ++i) chain.push_back(segment_matrix({len(rng), z(rng), 120.0}, freq));
    chain.push_back(atom_matrix(gam(rng), freq + 0.37, freq, 50.0));
    chain.push_back(segment_matrix({len(rng), z(rng), 120.0}, freq));
    return cascade(chain);
}

void expect_near(cplx a, cplx b, double tol) {
    EXPECT_NEAR(a.real(), b.real(), tol);
    EXPECT_NEAR(a.imag(), b.imag(), tol);
}

}  // namespace

TEST(Segment, UnitDeterminantAndReciprocal) {
    const TwoPort m = segment_matrix({8.0, 125.0, 124.75}, 7.3);
    expect_near(m.det(), 1.0, 1e-12);
    expect_near(m.a, m.d, 1e-15);
}

TEST(Segment, HalfWaveIsMinusIdentity) {
    // phi = pi when length = v / (2 f)
    const TwoPort m = segment_matrix({60.0, 73.0, 120.0}, 1.0);
    expect_near(m.a, -1.0, 1e-12);
    expect_near(m.b, 0.0, 1e-9);
    expect_near(m.c, 0.0, 1e-12);
    expect_near(m.d, -1.0, 1e-12);
}

TEST(Segment, QuarterWaveTransformsLoad) {
    // Z_in = Z^2 / Z_L for a quarter-wave section
    const double z = 70.0, zl = 30.0;
    const TwoPort m = segment_matrix({30.0, z, 120.0}, 1.0);
    const cplx yin = input_admittance(m, zl);
    expect_near(1.0 / yin, z * z / zl, 1e-8);
}

TEST(Segment, ZeroLengthIsIdentity) {
    const TwoPort m = segment_matrix({0.0, 40.0, 120.0}, 5.0);
    expect_near(m.a, 1.0, 0.0);
    expect_near(m.b, 0.0, 0.0);
}

TEST(Segment, RejectsBadInput) {
    EXPECT_THROW(segment_matrix({-1.0, 50.0, 120.0}, 1.0), DomainError);
    EXPECT_THROW(segment_matrix({1.0, 0.0, 120.0}, 1.0), DomainError);
    EXPECT_THROW(segment_matrix({1.0, 50.0, 120.0}, -1.0), DomainError);
}

TEST(Atom, MatchedLineGivesLorentzianDip) {
    // |t|^2 = d^2 / (d^2 + gamma^2 / 4) for a shunt atom in a matched line
    const double gamma = 0.02, wa = 7.5;
    for (double f : {7.45, 7.49, 7.499, 7.501, 7.53}) {
        const double d = f - wa;
        const double t2 = std::norm(transmission_coefficient(atom_matrix(gamma, wa, f, 50.0), 50.0));
        EXPECT_NEAR(t2, d * d / (d * d + gamma * gamma / 4.0), 1e-12);
    }
}

TEST(Atom, PoleAndZeroCoupling) {
    EXPECT_THROW(atom_matrix(0.01, 7.5, 7.5, 50.0), PoleError);
    const TwoPort id = atom_matrix(0.0, 7.5, 7.5, 50.0);
    expect_near(id.c, 0.0, 0.0);
    EXPECT_THROW(atom_matrix(-0.01, 7.5, 7.4, 50.0), DomainError);
}

TEST(Atom, BroadenedIsPassiveAndFiniteOnResonance) {
    const double gamma = 0.02, gnr = 0.004;
    const Scattering s = scattering(atom_matrix_broadened(gamma, 7.5, 7.5, 50.0, gnr), 50.0);
    // on resonance t = gnr / (gnr + gamma)
    EXPECT_NEAR(std::abs(s.t), gnr / (gnr + gamma), 1e-12);
    for (double f = 7.4; f < 7.6; f += 0.003) {
        const Scattering x = scattering(atom_matrix_broadened(gamma, 7.5, f, 50.0, gnr), 50.0);
        EXPECT_LE(std::norm(x.t) + std::norm(x.r), 1.0 + 1e-12);
    }
}

TEST(Cascade, AssociativeAndEmptyThrows) {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 50; ++i) {
        const TwoPort a = random_lossless(rng), b = random_lossless(rng), c = random_lossless(rng);
        const TwoPort l = (a * b) * c, r = a * (b * c);
        const double s = std::abs(l.a) + std::abs(l.b) + std::abs(l.c) + std::abs(l.d);
        EXPECT_LT(std::abs(l.a - r.a) + std::abs(l.b - r.b) + std::abs(l.c - r.c) + std::abs(l.d - r.d), 1e-12 * s);
    }
    EXPECT_THROW(cascade({}), std::invalid_argument);
}

TEST(Cascade, DeterminantOfLosslessChainIsOne) {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 200; ++i) expect_near(random_lossless(rng).det(), 1.0, 1e-9);
}

TEST(MatrixPower, MatchesRepeatedProduct) {
    const TwoPort cell = segment_matrix({4.0, 125.0, 124.75}, 7.1) * segment_matrix({0.45, 28.0, 124.75}, 7.1) *
                         segment_matrix({4.0, 125.0, 124.75}, 7.1);
    TwoPort naive;
    for (unsigned n = 0; n <= 33; ++n) {
        const TwoPort fast = matrix_power(cell, n);
        const double scale = 1.0 + std::abs(naive.a) + std::abs(naive.b) + std::abs(naive.c) + std::abs(naive.d);
        EXPECT_LT(std::abs(fast.a - naive.a) + std::abs(fast.b - naive.b) + std::abs(fast.c - naive.c) +
                      std::abs(fast.d - naive.d),
                  1e-11 * scale)
            << "n = " << n;
        naive = naive * cell;
    }
}

TEST(Scattering, LosslessUnitarity) {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 500; ++i) {
        const Scattering s = scattering(random_lossless(rng), 50.0);
        EXPECT_NEAR(std::norm(s.t) + std::norm(s.r), 1.0, 1e-9);
    }
}

TEST(Scattering, ReversedNetworkTransmitsTheSame) {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 50; ++i) {
        const TwoPort m = random_lossless(rng);
        expect_near(transmission_coefficient(m, 50.0), transmission_coefficient(m.reversed(), 50.0), 1e-12);
    }
}

TEST(Scattering, SingularThrows) {
    EXPECT_THROW(scattering({0.0, 0.0, 0.0, 0.0}, 50.0), SingularityError);
    EXPECT_THROW(scattering(TwoPort::identity(), 0.0), DomainError);
}
