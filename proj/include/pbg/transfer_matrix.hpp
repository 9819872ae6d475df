#pragma once

#include <span>
#include <vector>

#include "pbg/common.hpp"

namespace pbg {

// ABCD matrix. b is in ohms, c in siemens.
struct TwoPort {
    cplx a{1.0}, b{0.0}, c{0.0}, d{1.0};

    static TwoPort identity() { return {}; }
    cplx det() const { return a * d - b * c; }
    // Same network seen from the other port.
    TwoPort reversed() const { return {d, b, c, a}; }
    TwoPort operator*(const TwoPort& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
    }
};

struct WaveguideSegment {
    double length = 0.0;          // mm
    double impedance = 50.0;      // ohm
    double phase_velocity = 1.0;  // mm/ns
};

void validate(const WaveguideSegment& seg);

TwoPort segment_matrix(const WaveguideSegment& seg, double f);

// Lossless shunt atom. Throws PoleError within pole_floor of resonance.
TwoPort atom_matrix(double gamma, double omega_a, double f, double z0, double pole_floor = 1e-9);

// Same element with a non-radiative width gamma_nr; finite on resonance when gamma_nr > 0.
TwoPort atom_matrix_broadened(double gamma, double omega_a, double f, double z0, double gamma_nr);

TwoPort cascade(std::span<const TwoPort> chain);
TwoPort matrix_power(const TwoPort& m, unsigned n);

struct Scattering {
    cplx t;
    cplx r;
};

Scattering scattering(const TwoPort& m, double z0);
cplx transmission_coefficient(const TwoPort& m, double z0);

// Admittance looking into port 1 with port 2 terminated in z_load.
cplx input_admittance(const TwoPort& m, double z_load);

}  // namespace pbg
