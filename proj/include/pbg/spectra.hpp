#pragma once

#include <functional>
#include <string>
#include <vector>

#include "pbg/bound_state.hpp"
#include "pbg/driven_qubit.hpp"

namespace pbg {

struct DeviceConfig {
    CrystalGeometry geometry;
    QubitParams qubit;  // qubit.cell_index = symmetric cells left of the atom
    BandModel band;
    LeakageModel leakage;
    double port_impedance = 50.0;   // ohm
    double gamma_waveguide = 0.0;   // GHz, bare shunt coupling
    double gamma_nr = 0.001;        // GHz
    // Observed ladder for pump-probe runs; zero means derive it.
    double omega01 = 0.0;
    double omega12 = 0.0;
    double anharmonic_correction = 0.0;
};

void validate(const DeviceConfig& cfg);

// Per-frequency crystal pieces on either side of the atom.
struct CrystalHalves {
    TwoPort left;
    TwoPort right;
};

CrystalHalves crystal_halves(const DeviceConfig& cfg, double f);

cplx device_transmission(const DeviceConfig& cfg, const CrystalHalves& halves, const TwoPort& atom);

// Transmission with the bare atom at omega_a (shunt coupling gamma_waveguide, width gamma_nr).
cplx device_transmission(const DeviceConfig& cfg, double omega_a, double f);

std::vector<cplx> bare_crystal_s21(const DeviceConfig& cfg, const std::vector<double>& probe);

// Bare atom frequency whose dressed line sits at f_obs, from the crystal's reactance at the atom node.
double bare_center_from_observed(const DeviceConfig& cfg, double f_obs, double coupling);

struct TransmissionMap {
    std::string control_name;
    std::vector<double> control;
    std::vector<double> probe;
    std::vector<cplx> values;          // control-major
    std::vector<std::string> errors;   // one per control column, empty when fine

    cplx at(std::size_t i, std::size_t j) const { return values[i * probe.size() + j]; }
    std::size_t failed_points() const;
};

TransmissionMap qubit_sweep_s21(const DeviceConfig& cfg, const std::vector<double>& omega_q,
                                const std::vector<double>& probe);

struct OverlayLine {
    double control;
    double freq;    // GHz
    double weight;  // matrix element times population of the starting state
};

struct PumpProbeResult {
    TransmissionMap map;
    std::vector<OverlayLine> overlay;
    TransmonLadder ladder;  // observed frame
    double bare_center = 0.0;
    double linewidth01 = 0.0;
};

TransmonLadder observed_ladder(const DeviceConfig& cfg);

PumpProbeResult pump_probe_map(const DeviceConfig& cfg, const DriveConfig& drive, const std::vector<double>& power_axis,
                               const std::vector<double>& probe, double overlay_floor = 1e-2);

struct PeakFit {
    double center = 0.0;
    double fwhm = 0.0;
    double amplitude = 0.0;
    double baseline = 0.0;
    double residual = 0.0;
    bool converged = true;
};

struct PeakOptions {
    double min_snr = 8.0;           // prominence over the robust noise estimate
    double min_fwhm_samples = 2.0;  // narrower fits are treated as noise spikes
};

struct PeakSearch {
    std::vector<PeakFit> peaks;  // converged fits, largest amplitude first
    int skipped = 0;             // candidates whose fit did not converge
};

PeakSearch extract_peaks(const std::vector<double>& x, const std::vector<double>& y, int max_peaks,
                         PeakOptions opt = {});

// Maximum of a smooth response inside [lo, hi] with the full width at half maximum.
PeakFit measure_peak(const std::function<double(double)>& response, double lo, double hi, int n_scan = 2001);

struct LinewidthPoint {
    double omega_q;
    double omega_b;  // bound-state equation
    double center;   // finite-crystal peak
    double fwhm;
    double inv_l;  // 1/mm
};

// Finite-crystal bound-state peak widths against the bound-state localization.
std::vector<LinewidthPoint> linewidth_pipeline(const DeviceConfig& cfg, const std::vector<double>& omega_q,
                                               double gamma_nr);

// Shunt coupling that puts the crystal peak of a qubit sitting at the band edge target_shift below it.
double calibrate_waveguide_coupling(const DeviceConfig& cfg, double target_shift);

double flux_to_frequency(double phi_over_phi0, double omega_max);

}  // namespace pbg
