#include "pbg/band_structure.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <boost/math/tools/roots.hpp>

namespace pbg {

namespace {

double bisect_root(auto&& fn, double lo, double hi, double tol = 1e-12) {
    auto [a, b] = boost::math::tools::bisect(
        fn, lo, hi, [tol](double x0, double x1) { return std::abs(x1 - x0) <= tol; });
    return 0.5 * (a + b);
}

// Fourier coefficient of 1/Z(x) for the [lo/2, hi, lo/2] cell on [0, d).
double inverse_impedance_coeff(const CrystalGeometry& g, int m) {
    const double d = g.period();
    if (m == 0) return (g.lo.length / g.lo.impedance + g.hi.length / g.hi.impedance) / d;
    const double pm = std::numbers::pi * m;
    const double sign = (m % 2 == 0) ? 1.0 : -1.0;
    return (1.0 / g.hi.impedance - 1.0 / g.lo.impedance) * sign * std::sin(pm * g.hi.length / d) / pm;
}

struct PlaneWaveSolution {
    Eigen::VectorXd freqs;
    Eigen::MatrixXd vectors;
};

PlaneWaveSolution solve_plane_waves(const CrystalGeometry& g, double k, int n_waves) {
    const int half = (n_waves - 1) / 2;
    const double d = g.period();
    Eigen::VectorXd kg(n_waves);
    for (int n = 0; n < n_waves; ++n) kg(n) = k + kTwoPi * (n - half) / d;
    Eigen::MatrixXd B(n_waves, n_waves);
    for (int r = 0; r < n_waves; ++r)
        for (int c = 0; c < n_waves; ++c) B(r, c) = inverse_impedance_coeff(g, r - c);
    Eigen::MatrixXd A = (kg * kg.transpose()).cwiseProduct(B);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, B);
    if (es.info() != Eigen::Success) throw TruncationError("plane-wave eigenproblem failed");
    const double vp = g.hi.phase_velocity;
    Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
    return {lam.cwiseSqrt() * vp / kTwoPi, es.eigenvectors()};
}

}  // namespace

CrystalGeometry CrystalGeometry::with_phase_velocity(double vp) const {
    CrystalGeometry g = *this;
    g.lo.phase_velocity = vp;
    g.hi.phase_velocity = vp;
    return g;
}

CrystalGeometry CrystalGeometry::scaled_lengths(double factor) const {
    CrystalGeometry g = *this;
    g.lo.length *= factor;
    g.hi.length *= factor;
    return g;
}

void validate(const CrystalGeometry& g) {
    validate(g.lo);
    validate(g.hi);
    if (g.lo.length <= 0.0 || g.hi.length <= 0.0) throw DomainError("crystal section lengths must be > 0");
    if (g.n_cells < 1) throw DomainError("crystal needs at least one cell");
}

void validate(const BandModel& b) {
    if (!(b.alpha > 0.0) || !std::isfinite(b.alpha)) throw DomainError("band curvature must be > 0");
    if (!(b.kappa >= 0.0) || !std::isfinite(b.omega0)) throw DomainError("band model is not finite");
}

TwoPort unit_cell_matrix(const CrystalGeometry& g, double f) {
    WaveguideSegment half = g.hi;
    half.length *= 0.5;
    const TwoPort h = segment_matrix(half, f);
    return h * segment_matrix(g.lo, f) * h;
}

double bloch_cosine(const CrystalGeometry& g, double f) {
    const double w = angular(f);
    const double p_lo = w * g.lo.length / g.lo.phase_velocity;
    const double p_hi = w * g.hi.length / g.hi.phase_velocity;
    const double a = g.impedance_ratio();
    return std::cos(p_lo) * std::cos(p_hi) - 0.5 * (a + 1.0 / a) * std::sin(p_lo) * std::sin(p_hi);
}

cplx dispersion(const CrystalGeometry& g, double f) {
    const double c = bloch_cosine(g, f);
    const double d = g.period();
    if (c > 1.0) return {0.0, std::acosh(c) / d};
    if (c < -1.0) return {std::numbers::pi / d, std::acosh(-c) / d};
    return {std::acos(c) / d, 0.0};
}

std::vector<BandEdge> band_edges(const CrystalGeometry& g, double f_lo, double f_hi, int n_scan) {
    if (!(f_hi > f_lo) || f_lo < 0.0) throw DomainError("band edge window must be ordered and >= 0");
    if (n_scan < 2) throw DomainError("band edge scan needs at least two points");
    // Scan from zero so band indices count every gap below the window.
    const double h = (f_hi - f_lo) / n_scan;
    const long n_total = static_cast<long>(std::ceil(f_hi / h));
    std::vector<BandEdge> out;
    int band = 1;
    double f_prev = 0.0, c_prev = 1.0;
    bool in_band = true;
    for (long i = 1; i <= n_total; ++i) {
        const double f = std::min(f_hi, i * h);
        const double c = bloch_cosine(g, f);
        const bool now_in = std::abs(c) <= 1.0;
        if (now_in != in_band) {
            const double level = now_in ? std::copysign(1.0, c_prev) : std::copysign(1.0, c);
            const double edge = bisect_root([&](double x) { return bloch_cosine(g, x) - level; }, f_prev, f);
            if (now_in) ++band;
            if (edge >= f_lo && edge <= f_hi)
                out.push_back({edge, now_in ? EdgeSide::below : EdgeSide::above, band});
            in_band = now_in;
        }
        f_prev = f;
        c_prev = c;
    }
    return out;
}

BandEdge lower_edge_of_band(const CrystalGeometry& g, int band_index, double f_max) {
    if (band_index < 2) throw DomainError("band 1 starts at zero frequency");
    for (double top = 10.0; top <= f_max * 2.0; top *= 2.0) {
        for (const auto& e : band_edges(g, 0.0, top, 20000))
            if (e.band_index == band_index && e.side == EdgeSide::below) return e;
    }
    throw ExtractionError("no lower edge found for band " + std::to_string(band_index));
}

double band_frequency(const CrystalGeometry& g, const BandEdge& edge, double k) {
    const double target = std::cos(k * g.period());
    const double dir = edge.side == EdgeSide::below ? 1.0 : -1.0;
    const double step = 1e-4 * g.hi.phase_velocity / (2.0 * g.period());
    auto fn = [&](double x) { return bloch_cosine(g, x) - target; };
    if (fn(edge.freq) == 0.0) return edge.freq;
    const double s0 = std::copysign(1.0, fn(edge.freq + dir * 1e-12));
    double a = edge.freq;
    for (int i = 1; i < 2000000; ++i) {
        const double b = edge.freq + dir * i * step;
        if (b <= 0.0) break;
        if (std::copysign(1.0, fn(b)) != s0) return bisect_root(fn, std::min(a, b), std::max(a, b));
        a = b;
    }
    throw ExtractionError("Bloch wavevector not reached inside the band");
}

QuadraticFit fit_quadratic(const std::vector<double>& q, const std::vector<double>& f, double omega0) {
    if (q.size() != f.size() || q.size() < 2) throw FitError("quadratic fit needs matched samples");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        num += q[i] * q[i] * (f[i] - omega0);
        den += std::pow(q[i], 4);
    }
    if (den <= 0.0) throw FitError("quadratic fit has no spread in q");
    const double a = num / den;
    double ss = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) ss += std::pow(f[i] - omega0 - a * q[i] * q[i], 2);
    return {omega0, kTwoPi * a, std::sqrt(ss / q.size())};
}

BandModel fit_quadratic_band(const CrystalGeometry& g, const BandEdge& edge, QuadraticFitOptions opt) {
    if (opt.samples < 3 || !(opt.k_span > 0.0)) throw DomainError("bad quadratic fit options");
    const double d = g.period();
    const double k0 = bloch_cosine(g, edge.freq) < 0.0 ? std::numbers::pi / d : 0.0;
    const double span = opt.k_span * std::numbers::pi / d;
    std::vector<double> q(opt.samples), f(opt.samples);
    for (int i = 0; i < opt.samples; ++i) {
        q[i] = span * i / (opt.samples - 1);
        const double k = k0 > 0.0 ? k0 - q[i] : q[i];
        f[i] = i == 0 ? edge.freq : band_frequency(g, edge, k);
    }
    QuadraticFit fit = fit_quadratic(q, f, edge.freq);
    const double width = *std::max_element(f.begin(), f.end()) - *std::min_element(f.begin(), f.end());
    BandModel b;
    b.omega0 = edge.freq;
    b.alpha = std::abs(fit.alpha);
    b.band_index = edge.band_index;
    b.edge_side = edge.side;
    b.k0 = k0;
    b.fit_rms = fit.rms;
    b.poor_fit = fit.rms > 0.01 * width;
    return b;
}

BlochMode bloch_modes(const CrystalGeometry& g, double k, int band_index, int n_waves, int n_samples) {
    validate(g);
    if (n_waves < 11 || n_waves % 2 == 0) throw DomainError("n_waves must be odd and >= 11");
    if (band_index < 1) throw DomainError("band index starts at 1");
    if (g.lo.phase_velocity != g.hi.phase_velocity)
        throw DomainError("plane-wave solver assumes one phase velocity");
    if (n_samples < 2) throw DomainError("profile needs at least two samples");

    constexpr int kMaxWaves = 1281;
    constexpr double kTol = 1e-3;
    int n = n_waves;
    PlaneWaveSolution sol = solve_plane_waves(g, k, n);
    if (band_index > n) throw TruncationError("band index exceeds truncation order");
    // Piecewise-constant 1/Z has slowly decaying Fourier tails: double until the band frequency settles.
    for (;;) {
        const int n2 = 2 * n + 1;
        if (n2 > kMaxWaves) throw TruncationError("plane-wave expansion did not converge");
        PlaneWaveSolution next = solve_plane_waves(g, k, n2);
        const double f1 = sol.freqs(band_index - 1), f2 = next.freqs(band_index - 1);
        n = n2;
        sol = std::move(next);
        if (std::abs(f2 - f1) <= kTol * std::max(std::abs(f2), 1e-12)) break;
    }

    BlochMode mode;
    mode.k = k;
    mode.band_index = band_index;
    mode.n_waves = n;
    mode.freq = sol.freqs(band_index - 1);
    Eigen::VectorXd v = sol.vectors.col(band_index - 1);
    v.normalize();
    Eigen::Index imax;
    v.cwiseAbs().maxCoeff(&imax);
    if (v(imax) < 0.0) v = -v;
    mode.coefficients.assign(v.data(), v.data() + v.size());

    const int half = (n - 1) / 2;
    const double d = g.period();
    mode.x.resize(n_samples);
    mode.profile.resize(n_samples);
    for (int i = 0; i < n_samples; ++i) {
        const double x = d * i / (n_samples - 1);
        cplx acc{0.0};
        for (int m = 0; m < n; ++m) acc += v(m) * std::polar(1.0, (k + kTwoPi * (m - half) / d) * x);
        mode.x[i] = x;
        mode.profile[i] = acc;
    }
    return mode;
}

double density_of_states(const BandModel& b, double f) {
    const double y = f - b.omega0;
    const double scale = 1.0 / std::sqrt(kTwoPi * b.alpha);
    if (b.kappa <= 0.0) return y > 0.0 ? scale / std::sqrt(y) : 0.0;
    // Exact convolution of the 1/sqrt edge with a unit-area Lorentzian of half width kappa/2.
    const cplx z{-y, -0.5 * b.kappa};
    return scale * (1.0 / std::sqrt(z)).imag();
}

double band_edge_steepness(const CrystalGeometry& g, double z0, int band_index) {
    validate(g);
    BandEdge edge;
    try {
        edge = lower_edge_of_band(g, band_index);
    } catch (const ExtractionError& e) {
        throw ExtractionError(std::string("band edge steepness: ") + e.what());
    }
    double gap_floor = 0.0;
    for (const auto& e : band_edges(g, 0.0, edge.freq, 20000))
        if (e.band_index == band_index - 1 && e.side == EdgeSide::above) gap_floor = e.freq;
    const double start = 0.5 * (gap_floor + edge.freq);
    const double gap = edge.freq - start;
    const double h = std::min(1e-4, gap / 1000.0);

    auto power = [&](double f) {
        return std::norm(transmission_coefficient(matrix_power(unit_cell_matrix(g, f), g.n_cells), z0));
    };
    std::vector<double> fs, ts;
    fs.push_back(start);
    ts.push_back(power(start));
    const long max_steps = static_cast<long>(std::ceil(10.0 * gap / h));
    double plateau = -1.0;
    for (long i = 1; i <= max_steps; ++i) {
        const double f = start + i * h;
        const double t = power(f);
        if (f > edge.freq && t < ts.back() && ts.back() > 4.0 * ts.front()) {
            plateau = ts.back();
            break;
        }
        fs.push_back(f);
        ts.push_back(t);
    }
    if (plateau <= 0.0 || ts.front() >= 0.1 * plateau)
        throw ExtractionError("no monotone transmission rise at the band edge");
    auto crossing = [&](double level) {
        for (std::size_t i = 1; i < ts.size(); ++i)
            if (ts[i] >= level && ts[i - 1] < level)
                return fs[i - 1] + (level - ts[i - 1]) / (ts[i] - ts[i - 1]) * (fs[i] - fs[i - 1]);
        throw ExtractionError("transmission rise has no crossing");
    };
    return crossing(0.9 * plateau) - crossing(0.1 * plateau);
}

double calibrate_phase_velocity(const CrystalGeometry& g, double target_edge, int band_index) {
    if (!(target_edge > 0.0)) throw CalibrationError("target edge must be > 0");
    constexpr double v_lo = 50.0, v_hi = 300.0;
    auto edge_at = [&](double v) {
        return lower_edge_of_band(g.with_phase_velocity(v), band_index, 4.0 * target_edge).freq;
    };
    double a = v_lo, b = v_hi;
    double fa, fb;
    try {
        fa = edge_at(a) - target_edge;
        fb = edge_at(b) - target_edge;
    } catch (const ExtractionError& e) {
        throw CalibrationError(std::string("phase velocity: ") + e.what());
    }
    if (fa > 0.0 || fb < 0.0)
        throw CalibrationError("no phase velocity in [50, 300] mm/ns reaches the target edge");
    for (int it = 0; it < 200 && b - a > 1e-13 * b; ++it) {
        const double m = 0.5 * (a + b);
        const double fm = edge_at(m) - target_edge;
        if (std::abs(fm) < 1e-10) return m;
        (fm < 0.0 ? a : b) = m;
    }
    return 0.5 * (a + b);
}

}  // namespace pbg
