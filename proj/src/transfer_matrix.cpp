#include "pbg/transfer_matrix.hpp"

#include <cmath>

namespace pbg {

namespace {

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

}  // namespace

void validate(const WaveguideSegment& seg) {
    if (!std::isfinite(seg.length) || !std::isfinite(seg.impedance) ||
        !std::isfinite(seg.phase_velocity))
        throw DomainError("waveguide segment has non-finite fields");
    if (seg.length < 0.0 || seg.impedance <= 0.0 || seg.phase_velocity <= 0.0)
        throw DomainError("waveguide segment needs length >= 0, impedance > 0, phase velocity > 0");
}

TwoPort segment_matrix(const WaveguideSegment& seg, double f) {
    validate(seg);
    if (!std::isfinite(f) || f < 0.0) throw DomainError("segment frequency must be finite and >= 0");
    const double phi = angular(f) * seg.length / seg.phase_velocity;
    const double cs = std::cos(phi), sn = std::sin(phi);
    const cplx j{0.0, 1.0};
    return {cs, j * seg.impedance * sn, j * sn / seg.impedance, cs};
}

TwoPort atom_matrix(double gamma, double omega_a, double f, double z0, double pole_floor) {
    if (!std::isfinite(gamma) || !std::isfinite(omega_a) || !std::isfinite(f) || !std::isfinite(z0))
        throw DomainError("atom matrix inputs must be finite");
    if (gamma < 0.0) throw DomainError("atom coupling must be >= 0");
    if (gamma == 0.0) return TwoPort::identity();
    const double det = f - omega_a;
    if (std::abs(det) < pole_floor) throw PoleError("probe frequency sits on the atom pole");
    return {1.0, 0.0, cplx{0.0, -gamma / (det * z0)}, 1.0};
}

TwoPort atom_matrix_broadened(double gamma, double omega_a, double f, double z0, double gamma_nr) {
    if (gamma_nr <= 0.0) return atom_matrix(gamma, omega_a, f, z0);
    if (!std::isfinite(gamma) || !std::isfinite(omega_a) || !std::isfinite(f) || !std::isfinite(z0))
        throw DomainError("atom matrix inputs must be finite");
    if (gamma < 0.0) throw DomainError("atom coupling must be >= 0");
    // The -j sign keeps the shunt conductance positive (a lossy, passive element).
    const cplx det{f - omega_a, -0.5 * gamma_nr};
    return {1.0, 0.0, cplx{0.0, -gamma} / (det * z0), 1.0};
}

TwoPort cascade(std::span<const TwoPort> chain) {
    if (chain.empty()) throw std::invalid_argument("cascade of an empty chain");
    TwoPort m = chain.front();
    for (std::size_t i = 1; i < chain.size(); ++i) m = m * chain[i];
    return m;
}

TwoPort matrix_power(const TwoPort& m, unsigned n) {
    TwoPort result, base = m;
    while (n) {
        if (n & 1u) result = result * base;
        n >>= 1u;
        if (n) base = base * base;
    }
    return result;
}

Scattering scattering(const TwoPort& m, double z0) {
    if (!(z0 > 0.0)) throw DomainError("port impedance must be > 0");
    const cplx den = m.a + m.b / z0 + m.c * z0 + m.d;
    if (!finite(den) || std::abs(den) < 1e-300) throw SingularityError("ABCD to S conversion is singular");
    return {2.0 / den, (m.a + m.b / z0 - m.c * z0 - m.d) / den};
}

cplx transmission_coefficient(const TwoPort& m, double z0) { return scattering(m, z0).t; }

cplx input_admittance(const TwoPort& m, double z_load) {
    const cplx num = m.a * z_load + m.b;
    if (std::abs(num) < 1e-300) throw SingularityError("input impedance vanishes");
    return (m.c * z_load + m.d) / num;
}

}  // namespace pbg
