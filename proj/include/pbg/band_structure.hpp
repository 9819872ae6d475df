#pragma once

#include <vector>

#include "pbg/transfer_matrix.hpp"

namespace pbg {

// Cell layout is [lo/2, hi, lo/2]: the high-impedance section sits in the middle.
struct CrystalGeometry {
    WaveguideSegment lo;
    WaveguideSegment hi;
    int n_cells = 14;

    double period() const { return lo.length + hi.length; }
    double impedance_ratio() const { return hi.impedance / lo.impedance; }
    CrystalGeometry with_phase_velocity(double vp) const;
    CrystalGeometry scaled_lengths(double factor) const;
};

void validate(const CrystalGeometry& g);

// Symmetric unit cell, hi(l_hi/2) lo(l_lo) hi(l_hi/2), so cell boundaries sit mid-hi.
TwoPort unit_cell_matrix(const CrystalGeometry& g, double f);

// below: the band lies above this edge (gap underneath). above: the band ends here.
enum class EdgeSide { below, above };

struct BandEdge {
    double freq;
    EdgeSide side;
    int band_index;
};

struct BandModel {
    double omega0 = 0.0;  // GHz
    double alpha = 0.0;   // (rad/ns) mm^2
    double kappa = 0.0;   // GHz
    int band_index = 2;
    EdgeSide edge_side = EdgeSide::below;
    double k0 = 0.0;  // rad/mm
    double fit_rms = 0.0;
    bool poor_fit = false;
};

void validate(const BandModel& b);

double bloch_cosine(const CrystalGeometry& g, double f);

// Reduced-zone Bloch wavevector in rad/mm; imaginary part is the evanescent decay rate in a gap.
cplx dispersion(const CrystalGeometry& g, double f);

std::vector<BandEdge> band_edges(const CrystalGeometry& g, double f_lo, double f_hi, int n_scan = 10000);

// The edge a given band starts from (its lower edge).
BandEdge lower_edge_of_band(const CrystalGeometry& g, int band_index, double f_max = 100.0);

// Band frequency at Bloch wavevector k, searched upward from the band's lower edge.
double band_frequency(const CrystalGeometry& g, const BandEdge& edge, double k);

struct QuadraticFitOptions {
    double k_span = 0.1;  // fraction of pi/d
    int samples = 50;
};

struct QuadraticFit {
    double omega0;  // GHz
    double alpha;   // (rad/ns) mm^2
    double rms;     // GHz
};

// Fits omega(q) = omega0 + alpha q^2 with omega0 pinned; q in rad/mm, omega in GHz.
QuadraticFit fit_quadratic(const std::vector<double>& q, const std::vector<double>& f, double omega0);

// Quadratic model of the band above `edge`. kappa is left at zero; see band_edge_steepness.
BandModel fit_quadratic_band(const CrystalGeometry& g, const BandEdge& edge, QuadraticFitOptions opt = {});

struct BlochMode {
    double k = 0.0;
    int band_index = 1;
    int n_waves = 0;      // truncation actually used
    double freq = 0.0;    // GHz
    std::vector<cplx> coefficients;
    std::vector<double> x;  // mm, one period
    std::vector<cplx> profile;
};

BlochMode bloch_modes(const CrystalGeometry& g, double k, int band_index, int n_waves = 41,
                      int n_samples = 201);

// Per GHz and per mm of crystal; Lorentzian broadened with FWHM kappa.
double density_of_states(const BandModel& b, double f);

// 10-90% rise width of bare |t|^2 above the lower edge of band_index.
double band_edge_steepness(const CrystalGeometry& g, double z0, int band_index = 2);

double calibrate_phase_velocity(const CrystalGeometry& g, double target_edge, int band_index = 2);

}  // namespace pbg
