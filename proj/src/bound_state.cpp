#include "pbg/bound_state.hpp"

#include <cmath>
#include <limits>

namespace pbg {

void validate(const QubitParams& q) {
    if (!std::isfinite(q.omega_q) || !std::isfinite(q.g) || q.g < 0.0) throw DomainError("qubit needs finite omega_q and g >= 0");
    if (!(q.e_c > 0.0)) throw DomainError("anharmonicity must be > 0");
    if (q.n_levels < 2 || q.n_levels > 6) throw DomainError("n_levels must lie in [2, 6]");
}

double bound_state_residual(double omega_q, double g, double omega0, double alpha, double omega_b) {
    const double wq = angular(omega_q), w0 = angular(omega0), wb = angular(omega_b);
    const double ga = angular(g);
    return (wq - wb) * std::sqrt(w0 - wb) - std::numbers::pi * ga * ga / alpha;
}

double tan2_theta(double omega_q, double omega_b, double omega0) {
    if (!(omega_b < omega0)) throw DomainError("bound state must sit below the band edge");
    return (omega_q - omega_b) / (2.0 * (omega0 - omega_b));
}

double qubit_weight(double omega_q, double omega_b, double omega0) {
    if (!(omega_b < omega0) || omega_b > omega_q) throw DomainError("qubit weight needs omega_b < min(omega_q, omega0)");
    const double den = 3.0 * omega_b - omega_q - 2.0 * omega0;
    if (std::abs(den) < 1e-15 * (std::abs(omega_q) + std::abs(omega0))) throw DomainError("degenerate qubit weight");
    return 2.0 * (omega_b - omega0) / den;
}

double localization_length(double alpha, double detuning_edge) {
    if (detuning_edge <= 0.0) return std::numeric_limits<double>::infinity();
    return std::sqrt(alpha / angular(detuning_edge));
}

BoundStateSolution solve_bound_state(const QubitParams& q, const BandModel& band, const LeakageModel& leak) {
    validate(q);
    validate(band);
    const double w0 = angular(band.omega0), wq = angular(q.omega_q), ga = angular(q.g);
    const double c = std::numbers::pi * ga * ga / band.alpha;
    const double p = wq - w0;

    double wb, edge;  // edge = w0 - wb, kept separately so roots hugging the edge keep their digits
    if (q.g == 0.0) {
        if (q.omega_q >= band.omega0) throw NoBoundStateError("uncoupled qubit above the band edge has no bound state");
        wb = wq;
        edge = w0 - wq;
    } else {
        // in s = sqrt(w0 - wb) the condition is s^3 + p s - c = 0, increasing past s = sqrt(max(-p, 0))
        auto G = [&](double x) { return x * (x * x + p) - c; };
        double lo = std::sqrt(std::max(-p, 0.0));
        double hi = lo + std::cbrt(c) + 1.0;
        while (G(hi) <= 0.0) hi *= 2.0;
        for (int it = 0; it < 400; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            (G(mid) > 0.0 ? hi : lo) = mid;
        }
        const double root = std::abs(G(lo)) < std::abs(G(hi)) ? lo : hi;
        edge = root * root;
        wb = w0 - edge;
    }

    BoundStateSolution s;
    s.omega_b = ordinary(wb);
    s.detuning_edge = ordinary(edge);
    s.loc_length = localization_length(band.alpha, s.detuning_edge);
    s.tan2_theta = (p + edge) / (2.0 * edge);
    s.qubit_weight = 1.0 / (1.0 + s.tan2_theta);
    s.linewidth = linewidth_model(s.loc_length, leak.d0, leak.gamma_ext);
    s.residual = (p + edge) * std::sqrt(edge) - c;
    return s;
}

double photon_envelope(const BoundStateSolution& sol, double x) { return std::exp(-std::abs(x) / sol.loc_length); }

double linewidth_model(double loc_length, double d0, double gamma_ext) {
    if (!(d0 > 0.0)) throw DomainError("effective length must be > 0");
    return gamma_ext * std::exp(-d0 / (2.0 * loc_length));
}

LengthFit fit_effective_length(const std::vector<LengthSample>& samples) {
    if (samples.size() < 3) throw FitError("effective-length fit needs at least 3 samples");
    const double n = static_cast<double>(samples.size());
    double mx = 0.0, my = 0.0;
    for (const auto& s : samples) {
        if (!(s.gamma > 0.0) || !std::isfinite(s.inv_l)) throw FitError("linewidths must be positive and finite");
        mx += s.inv_l;
        my += std::log(s.gamma);
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& s : samples) {
        const double dx = s.inv_l - mx, dy = std::log(s.gamma) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx <= 1e-24 * std::max(1.0, mx * mx) * n) throw FitError("all 1/L values coincide; slope undefined");
    const double slope = sxy / sxx;
    const double icpt = my - slope * mx;
    double ss_res = 0.0;
    for (const auto& s : samples) ss_res += std::pow(std::log(s.gamma) - icpt - slope * s.inv_l, 2);
    return {-2.0 * slope, std::exp(icpt), syy > 0.0 ? 1.0 - ss_res / syy : 1.0};
}

double resonant_shift(double g, double alpha) {
    if (g < 0.0 || !(alpha > 0.0)) throw DomainError("resonant shift needs g >= 0, alpha > 0");
    const double ga = angular(g);
    return ordinary(std::pow(std::numbers::pi * ga * ga / alpha, 2.0 / 3.0));
}

double calibrate_g(double target_delta, double alpha) {
    if (target_delta < 0.0 || !(alpha > 0.0)) throw DomainError("calibrate_g needs delta >= 0, alpha > 0");
    return ordinary(std::sqrt(alpha * std::pow(angular(target_delta), 1.5) / std::numbers::pi));
}

}  // namespace pbg
