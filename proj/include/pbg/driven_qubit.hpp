#pragma once

#include <vector>

#include <Eigen/Dense>

#include "pbg/band_structure.hpp"

namespace pbg {

struct TransmonLadder {
    std::vector<double> level_freqs;  // cumulative, level_freqs[0] = 0, GHz
    std::vector<double> decay_rates;  // per transition n <-> n+1, GHz

    static TransmonLadder from_transitions(const std::vector<double>& transitions,
                                           const std::vector<double>& rates = {});
    int size() const { return static_cast<int>(level_freqs.size()); }
    double transition(int n) const { return level_freqs[n + 1] - level_freqs[n]; }
};

void validate(const TransmonLadder& l);

// Transition list w01, w12 (if given, else w01 - e_c), then w01 - n e_c - (n - 1) correction.
std::vector<double> transmon_transitions(int n_levels, double omega01, double e_c, double omega12 = 0.0,
                                         double correction = 0.0);

struct DriveConfig {
    double omega_d = 0.0;      // GHz
    double omega_rabi0 = 0.0;  // GHz
};

// Rotating frame: (w_n - n w_d) on the diagonal, sqrt(n+1) W0 / 2 off it.
Eigen::MatrixXd dressed_hamiltonian(const TransmonLadder& ladder, const DriveConfig& drive);

struct DressedSpectrum {
    Eigen::VectorXd eigenvalues;   // ascending, rotating frame, GHz
    Eigen::MatrixXd eigenvectors;  // columns
};

// An already diagonal matrix keeps its basis vectors (sorted), so degenerate bare levels never mix.
DressedSpectrum diagonalize(const Eigen::MatrixXd& h);

struct DressedTransition {
    double freq;    // lab frame, GHz
    double weight;  // |<i|b|j>|^2
    int from;       // dressed state that absorbs the probe
    int to;
};

std::vector<DressedTransition> dressed_transitions(const DressedSpectrum& spec, const TransmonLadder& ladder,
                                                   const DriveConfig& drive, double weight_floor = 1e-4);

struct MixingAngle {
    double theta;  // rad
    double omega;  // generalized Rabi rate, GHz
};

MixingAngle mixing_angle(double delta_a, double omega_rabi0);

struct CoolingRates {
    double gamma_0 = 0.0;
    double gamma_minus = 0.0;
    double gamma_plus = 0.0;
    double theta = std::numbers::pi / 4.0;
    double gamma_phi = 0.0;
};

// Golden-rule rates 2 pi g^2 rho at w_L and the two sidebands w_L -/+ W.
// Only ratios are physical: rho is per unit crystal length.
CoolingRates cooling_rates(const BandModel& band, double omega_l, double omega, double g, double gamma_phi,
                           double theta = std::numbers::pi / 4.0);

struct DressedPopulations {
    double rho_minus;
    double rho_plus;
};

DressedPopulations dressed_steady_state(const CoolingRates& r);

struct CollapseOp {
    Eigen::MatrixXcd op;
    double rate;
};

Eigen::MatrixXcd liouvillian(const Eigen::MatrixXcd& h, const std::vector<CollapseOp>& ops);

Eigen::MatrixXcd lindblad_steady_state(const Eigen::MatrixXcd& h, const std::vector<CollapseOp>& ops);

// Ladder decay |n><n+1| at rate decay_rates[n].
std::vector<CollapseOp> ladder_collapse_ops(const TransmonLadder& ladder);

// Two-level master equation in the dressed basis {|->, |+>}.
std::vector<CollapseOp> dressed_collapse_ops(const CoolingRates& r);

Eigen::VectorXd dressed_populations(const Eigen::MatrixXcd& rho, const DressedSpectrum& spec);

// 1 - sum w (rho_from - rho_to) (G/2) / (j (f - f_t) + G/2)
cplx driven_transmission_factor(const Eigen::VectorXd& populations, const std::vector<DressedTransition>& lines,
                                double f, const std::vector<double>& linewidths);

// Edge-resonance splitting of the sideband bound state with g cos^2(theta).
double dressed_bound_state(const BandModel& band, double g, double theta, double sideband_freq);

}  // namespace pbg
