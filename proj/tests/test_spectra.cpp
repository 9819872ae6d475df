#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pbg/spectra.hpp"
#include "test_util.hpp"

using namespace pbg;
using pbg::testing::device_config;

namespace {

std::vector<double> axis(double lo, double hi, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
    return v;
}

double lorentz(double x, double c, double fwhm, double a) {
    const double h = 0.5 * fwhm;
    return a * h * h / ((x - c) * (x - c) + h * h);
}

}  // namespace

TEST(BareCrystal, MidGapSuppressedAndBandPasses) {
    const DeviceConfig cfg = device_config();
    EXPECT_LT(std::norm(bare_crystal_s21(cfg, {0.5 * (6.2701 + 7.7)})[0]), 0.01);
    // port mismatch ripples the pass band; its resonances still reach unity
    double best = 0.0;
    for (cplx t : bare_crystal_s21(cfg, axis(7.7, 8.2, 2001))) best = std::max(best, std::norm(t));
    EXPECT_GT(best, 0.99);
}

TEST(BareCrystal, MatchedUniformLineIsTransparent) {
    DeviceConfig cfg = device_config();
    cfg.geometry.lo.impedance = cfg.geometry.hi.impedance = cfg.port_impedance;
    for (cplx t : bare_crystal_s21(cfg, axis(1.0, 12.0, 57))) EXPECT_NEAR(std::abs(t), 1.0, 1e-12);
}

TEST(Device, AtomAtEdgeMakesPeakAtBoundState) {
    const DeviceConfig cfg = device_config();
    const PeakFit pk = measure_peak([&](double f) { return std::norm(device_transmission(cfg, cfg.band.omega0, f)); },
                                    7.2, 7.69, 4001);
    EXPECT_NEAR(pk.center, 7.45, 1e-6);
    EXPECT_GT(pk.amplitude, 0.3);
}

TEST(Device, InBandQubitReflects) {
    const DeviceConfig cfg = device_config();
    EXPECT_LT(std::norm(device_transmission(cfg, 8.0, 8.0)), 0.01);
}

TEST(Device, PassiveEverywhere) {
    const DeviceConfig cfg = device_config();
    const auto m = qubit_sweep_s21(cfg, axis(6.9, 8.1, 25), axis(6.9, 8.1, 301));
    for (cplx t : m.values) {
        ASSERT_TRUE(std::isfinite(t.real()) && std::isfinite(t.imag()));
        EXPECT_LE(std::abs(t), 1.0 + 1e-6);
    }
    EXPECT_EQ(m.failed_points(), 0u);
}

TEST(Device, CellIndexBounds) {
    DeviceConfig cfg = device_config();
    cfg.qubit.cell_index = 15;
    EXPECT_THROW(validate(cfg), DomainError);
    cfg.qubit.cell_index = 0;
    EXPECT_NO_THROW(validate(cfg));
}

TEST(Sweep, PeakTracksBoundStateMonotonically) {
    const DeviceConfig cfg = device_config();
    const auto probe = axis(6.6, 7.69, 2181);
    const auto wq = axis(7.3, 7.9, 7);
    const auto m = qubit_sweep_s21(cfg, wq, probe);
    double last = 0.0;
    for (std::size_t i = 0; i < wq.size(); ++i) {
        std::vector<double> y(probe.size());
        for (std::size_t j = 0; j < probe.size(); ++j) y[j] = std::norm(m.at(i, j));
        const std::size_t k = std::max_element(y.begin(), y.end()) - y.begin();
        EXPECT_GT(probe[k], last);
        last = probe[k];
    }
}

TEST(Linewidths, NarrowDeeperInGap) {
    const auto pts = linewidth_pipeline(device_config(), axis(7.5, 8.2, 8), 0.0);
    for (std::size_t i = 1; i < pts.size(); ++i) {
        EXPECT_GT(pts[i].fwhm, pts[i - 1].fwhm);
        EXPECT_LT(pts[i].inv_l, pts[i - 1].inv_l);
    }
}

TEST(Compensation, BareCentreRecoversObservedLine) {
    const DeviceConfig cfg = device_config();
    const double fb = bare_center_from_observed(cfg, 7.206, cfg.gamma_waveguide);
    EXPECT_GT(fb, 7.206);
    const PeakFit pk = measure_peak([&](double f) { return std::norm(device_transmission(cfg, fb, f)); }, 7.15, 7.26, 2001);
    EXPECT_NEAR(pk.center, 7.206, 2e-3);
}

TEST(WaveguideCoupling, Calibrates) {
    DeviceConfig cfg = device_config();
    const double g = calibrate_waveguide_coupling(cfg, 0.25);
    EXPECT_NEAR(g / cfg.gamma_waveguide, 1.0, 1e-6);
    EXPECT_THROW(calibrate_waveguide_coupling(cfg, -0.1), DomainError);
}

TEST(PumpProbe, ZeroPowerColumnIsUndrivenCut) {
    const DeviceConfig cfg = device_config();
    const auto probe = axis(6.9, 7.4, 201);
    const auto ladder = observed_ladder(cfg);
    const auto r = pump_probe_map(cfg, {ladder.transition(0), 0.0}, {0.0, 0.05}, probe);
    const auto cut = qubit_sweep_s21(cfg, {r.bare_center}, probe);
    for (std::size_t j = 0; j < probe.size(); ++j) EXPECT_LT(std::abs(r.map.at(0, j) - cut.at(0, j)), 1e-12);
}

TEST(PumpProbe, DecoupledLimitIsBareCrystal) {
    DeviceConfig cfg = device_config();
    cfg.gamma_waveguide = 0.0;
    cfg.band.kappa = 0.0;
    const auto probe = axis(6.6, 7.3, 101);
    const auto ladder = observed_ladder(cfg);
    const auto r = pump_probe_map(cfg, {ladder.transition(0), 0.1}, {0.0, 0.1}, probe);
    const auto bare = bare_crystal_s21(cfg, probe);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < probe.size(); ++j) EXPECT_LT(std::abs(r.map.at(i, j) - bare[j]), 1e-12);
}

TEST(Peaks, SingleLorentzian) {
    const auto x = axis(7.3, 7.5, 2001);
    std::vector<double> y;
    for (double v : x) y.push_back(lorentz(v, 7.4, 0.010, 1.0) + 0.05);
    const auto s = extract_peaks(x, y, 3);
    ASSERT_EQ(s.peaks.size(), 1u);
    EXPECT_NEAR(s.peaks[0].center, 7.4, 1e-4);
    EXPECT_NEAR(s.peaks[0].fwhm / 0.010, 1.0, 0.02);
    EXPECT_NEAR(s.peaks[0].baseline, 0.05, 1e-3);
}

TEST(Peaks, TwoSeparatedByThreeWidths) {
    const auto x = axis(7.3, 7.5, 4001);
    std::vector<double> y;
    for (double v : x) y.push_back(lorentz(v, 7.385, 0.010, 1.0) + lorentz(v, 7.415, 0.010, 0.6));
    const auto s = extract_peaks(x, y, 5);
    ASSERT_EQ(s.peaks.size(), 2u);
    EXPECT_NEAR(s.peaks[0].center, 7.385, 1e-3);
    EXPECT_NEAR(s.peaks[1].center, 7.415, 1e-3);
}

TEST(Peaks, WhiteNoiseGivesNothing) {
    std::mt19937_64 rng(123);
    std::normal_distribution<double> n(0.0, 0.01);
    const auto x = axis(7.0, 8.0, 2001);
    std::vector<double> y;
    for (std::size_t i = 0; i < x.size(); ++i) y.push_back(0.3 + n(rng));
    EXPECT_TRUE(extract_peaks(x, y, 10).peaks.empty());
}

TEST(Peaks, NoisyPeakStillFound) {
    std::mt19937_64 rng(321);
    std::normal_distribution<double> n(0.0, 0.005);
    const auto x = axis(7.3, 7.5, 2001);
    std::vector<double> y;
    for (double v : x) y.push_back(lorentz(v, 7.42, 0.008, 0.5) + n(rng));
    const auto s = extract_peaks(x, y, 3);
    ASSERT_GE(s.peaks.size(), 1u);
    EXPECT_NEAR(s.peaks[0].center, 7.42, 3e-4);
}

TEST(MeasurePeak, ExactLorentzian) {
    const PeakFit p = measure_peak([](double f) { return lorentz(f, 7.4321, 0.0123, 0.8); }, 7.3, 7.5);
    EXPECT_NEAR(p.center, 7.4321, 1e-7);
    EXPECT_NEAR(p.fwhm, 0.0123, 1e-9);
    EXPECT_NEAR(p.amplitude, 0.8, 1e-9);
}

TEST(Flux, TuningCurve) {
    EXPECT_DOUBLE_EQ(flux_to_frequency(0.0, 8.1), 8.1);
    EXPECT_NEAR(flux_to_frequency(0.5, 8.1), 0.0, 1e-7);
    for (double p : {0.1, 0.27, 0.44}) EXPECT_NEAR(flux_to_frequency(p + 1.0, 8.1), flux_to_frequency(p, 8.1), 1e-12);
    EXPECT_THROW(flux_to_frequency(0.1, 0.0), DomainError);
}
