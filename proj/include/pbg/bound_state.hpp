#pragma once

#include <vector>

#include "pbg/band_structure.hpp"

namespace pbg {

struct QubitParams {
    double omega_q = 7.7;  // GHz, bare
    double g = 0.0;        // GHz
    double e_c = 0.385;    // GHz, anharmonicity magnitude
    int n_levels = 4;
    int cell_index = 7;  // cells to the left of the atom
    double offset_mm = 0.0;
};

void validate(const QubitParams& q);

// gamma = gamma_ext exp(-d0 / 2L)
struct LeakageModel {
    double d0 = 126.0;       // mm
    double gamma_ext = 0.0;  // GHz
};

struct BoundStateSolution {
    double omega_b = 0.0;        // GHz
    double detuning_edge = 0.0;  // omega0 - omega_b, GHz
    double loc_length = 0.0;     // mm
    double qubit_weight = 1.0;
    double tan2_theta = 0.0;
    double linewidth = 0.0;  // GHz
    double residual = 0.0;   // bound-state equation residual, (rad/ns)^(3/2)
};

// F(w_b) = (w_q - w_b) sqrt(w0 - w_b) - pi g^2 / alpha, angular units.
double bound_state_residual(double omega_q, double g, double omega0, double alpha, double omega_b);

BoundStateSolution solve_bound_state(const QubitParams& q, const BandModel& band, const LeakageModel& leak = {});

double qubit_weight(double omega_q, double omega_b, double omega0);
double tan2_theta(double omega_q, double omega_b, double omega0);

// sqrt(alpha / (2 pi detuning)) in mm; infinite at or above the edge.
double localization_length(double alpha, double detuning_edge);

double photon_envelope(const BoundStateSolution& sol, double x);

double linewidth_model(double loc_length, double d0, double gamma_ext);
inline double linewidth_model(const BoundStateSolution& sol, double d0, double gamma_ext) {
    return linewidth_model(sol.loc_length, d0, gamma_ext);
}

struct LengthSample {
    double gamma;  // GHz
    double inv_l;  // 1/mm
};

struct LengthFit {
    double d_fit;      // mm
    double gamma_ext;  // GHz
    double r2;
};

LengthFit fit_effective_length(const std::vector<LengthSample>& samples);

double resonant_shift(double g, double alpha);
double calibrate_g(double target_delta, double alpha);

}  // namespace pbg
