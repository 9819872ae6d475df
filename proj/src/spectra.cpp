#include "pbg/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

namespace pbg {

void validate(const DeviceConfig& cfg) {
    validate(cfg.geometry);
    validate(cfg.qubit);
    validate(cfg.band);
    if (!(cfg.port_impedance > 0.0)) throw DomainError("port impedance must be > 0");
    if (cfg.qubit.cell_index < 0 || cfg.qubit.cell_index > cfg.geometry.n_cells)
        throw DomainError("qubit cell index outside the crystal");
    if (!(cfg.gamma_waveguide >= 0.0) || !(cfg.gamma_nr >= 0.0)) throw DomainError("atom widths must be >= 0");
}

CrystalHalves crystal_halves(const DeviceConfig& cfg, double f) {
    const TwoPort cell = unit_cell_matrix(cfg.geometry, f);
    const int nl = cfg.qubit.cell_index;
    return {matrix_power(cell, nl), matrix_power(cell, cfg.geometry.n_cells - nl)};
}

cplx device_transmission(const DeviceConfig& cfg, const CrystalHalves& h, const TwoPort& atom) {
    return transmission_coefficient(h.left * atom * h.right, cfg.port_impedance);
}

namespace {

// On the lossless pole the shunt shorts the line, so t -> 0.
cplx atom_in_crystal(const DeviceConfig& cfg, const CrystalHalves& h, double omega_a, double f) {
    try {
        return device_transmission(
            cfg, h, atom_matrix_broadened(cfg.gamma_waveguide, omega_a, f, cfg.port_impedance, cfg.gamma_nr));
    } catch (const PoleError&) {
        return {0.0, 0.0};
    }
}

}  // namespace

cplx device_transmission(const DeviceConfig& cfg, double omega_a, double f) {
    return atom_in_crystal(cfg, crystal_halves(cfg, f), omega_a, f);
}

std::vector<cplx> bare_crystal_s21(const DeviceConfig& cfg, const std::vector<double>& probe) {
    std::vector<cplx> out;
    out.reserve(probe.size());
    for (double f : probe)
        out.push_back(transmission_coefficient(matrix_power(unit_cell_matrix(cfg.geometry, f), cfg.geometry.n_cells),
                                               cfg.port_impedance));
    return out;
}

double bare_center_from_observed(const DeviceConfig& cfg, double f_obs, double coupling) {
    if (coupling == 0.0 || f_obs >= cfg.band.omega0) return f_obs;
    const CrystalHalves h = crystal_halves(cfg, f_obs);
    const double z0 = cfg.port_impedance;
    const double b_env = (input_admittance(h.left.reversed(), z0) + input_admittance(h.right, z0)).imag();
    if (b_env == 0.0) throw SingularityError("crystal susceptance vanishes at the observed line");
    return f_obs - coupling / (z0 * b_env);
}

std::size_t TransmissionMap::failed_points() const {
    std::size_t n = 0;
    for (const auto& e : errors)
        if (!e.empty()) n += probe.size();
    return n;
}

TransmissionMap qubit_sweep_s21(const DeviceConfig& cfg, const std::vector<double>& omega_q,
                                const std::vector<double>& probe) {
    validate(cfg);
    TransmissionMap m;
    m.control_name = "omega_q_GHz";
    m.control = omega_q;
    m.probe = probe;
    m.values.assign(omega_q.size() * probe.size(), cplx{});
    m.errors.assign(omega_q.size(), "");
    // Crystal halves depend only on the probe frequency.
    std::vector<CrystalHalves> halves;
    halves.reserve(probe.size());
    for (double f : probe) halves.push_back(crystal_halves(cfg, f));
    for (std::size_t i = 0; i < omega_q.size(); ++i) {
        try {
            for (std::size_t j = 0; j < probe.size(); ++j)
                m.values[i * probe.size() + j] = atom_in_crystal(cfg, halves[j], omega_q[i], probe[j]);
        } catch (const Error& e) {
            m.errors[i] = e.what();
            for (std::size_t j = 0; j < probe.size(); ++j) m.values[i * probe.size() + j] = cplx{};
        }
    }
    return m;
}

TransmonLadder observed_ladder(const DeviceConfig& cfg) {
    double w01 = cfg.omega01;
    if (w01 <= 0.0) w01 = solve_bound_state(cfg.qubit, cfg.band, cfg.leakage).omega_b;
    const auto t = transmon_transitions(cfg.qubit.n_levels, w01, cfg.qubit.e_c, cfg.omega12, cfg.anharmonic_correction);
    return TransmonLadder::from_transitions(t);
}

PeakFit measure_peak(const std::function<double(double)>& response, double lo, double hi, int n_scan) {
    if (!(hi > lo) || n_scan < 3) throw DomainError("peak window must be ordered");
    const double step = (hi - lo) / (n_scan - 1);
    double best_x = lo, best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n_scan; ++i) {
        const double x = lo + i * step;
        const double v = response(x);
        if (v > best) {
            best = v;
            best_x = x;
        }
    }
    const auto [xc, neg] = boost::math::tools::brent_find_minima(
        [&](double x) { return -response(x); }, std::max(lo, best_x - step), std::min(hi, best_x + step), 50);
    PeakFit p;
    p.center = xc;
    p.amplitude = -neg;
    const double half = 0.5 * p.amplitude;
    auto crossing = [&](double dir) {
        double a = xc;
        for (int i = 1; i <= 4 * n_scan; ++i) {
            const double b = xc + dir * i * step;
            if (response(b) < half) {
                double above = a, below = b;
                for (int it = 0; it < 80; ++it) {
                    const double m = 0.5 * (above + below);
                    (response(m) >= half ? above : below) = m;
                }
                return 0.5 * (above + below);
            }
            a = b;
        }
        return std::numeric_limits<double>::quiet_NaN();
    };
    p.fwhm = crossing(1.0) - crossing(-1.0);
    p.converged = std::isfinite(p.fwhm) && p.fwhm > 0.0;
    return p;
}

PumpProbeResult pump_probe_map(const DeviceConfig& cfg, const DriveConfig& drive, const std::vector<double>& power_axis,
                               const std::vector<double>& probe, double overlay_floor) {
    validate(cfg);
    PumpProbeResult res;
    res.ladder = observed_ladder(cfg);
    const double w01 = res.ladder.transition(0);
    const double w0 = cfg.band.omega0;
    res.bare_center = bare_center_from_observed(cfg, w01, cfg.gamma_waveguide);

    auto t_undriven = [&](double f) { return device_transmission(cfg, res.bare_center, f); };
    auto t_bare = [&](double f) {
        return transmission_coefficient(matrix_power(unit_cell_matrix(cfg.geometry, f), cfg.geometry.n_cells),
                                        cfg.port_impedance);
    };

    // Linewidth of the undriven line, measured on the crystal response.
    double g01 = std::max(cfg.gamma_nr, 1e-6);
    if (cfg.gamma_waveguide > 0.0) {
        const double top = std::min(w0, res.bare_center) - 1e-4;
        const PeakFit pk = measure_peak([&](double f) { return std::norm(t_undriven(f)); },
                                        std::min(w01 - 0.05, top - 0.01), std::min(w01 + 0.05, top), 1001);
        if (pk.converged) g01 = pk.fwhm;
    }
    res.linewidth01 = g01;
    // Every line borrows the leakage law anchored at the undriven width.
    const double inv_l01 = 1.0 / localization_length(cfg.band.alpha, w0 - w01);
    const double gamma_ext = g01 * std::exp(0.5 * cfg.leakage.d0 * inv_l01);
    auto width = [&](double f) {
        return linewidth_model(localization_length(cfg.band.alpha, w0 - f), cfg.leakage.d0, gamma_ext);
    };

    TransmonLadder ladder = res.ladder;
    for (int n = 0; n + 1 < ladder.size(); ++n) ladder.decay_rates[n] = (n + 1) * width(ladder.transition(n));
    const auto ops = ladder_collapse_ops(ladder);

    struct Response {
        Eigen::VectorXd pops;
        std::vector<DressedTransition> lines;
        std::vector<double> widths;
    };
    auto respond = [&](double rabi) {
        const DriveConfig d{drive.omega_d, rabi};
        const Eigen::MatrixXd h = dressed_hamiltonian(ladder, d);
        const DressedSpectrum spec = diagonalize(h);
        Response r;
        r.pops = dressed_populations(lindblad_steady_state(h.cast<cplx>(), ops), spec);
        r.lines = dressed_transitions(spec, ladder, d);
        for (const auto& l : r.lines) r.widths.push_back(width(l.freq));
        return r;
    };
    auto tq = [](const Response& r, double f) { return driven_transmission_factor(r.pops, r.lines, f, r.widths); };

    const Response r0 = respond(0.0);
    const cplx tq0_line = tq(r0, w01);
    const cplx phi = std::abs(1.0 - tq0_line) > 1e-12 ? (t_undriven(w01) - t_bare(w01)) / (1.0 - tq0_line) : cplx{};

    TransmissionMap& m = res.map;
    m.control_name = "omega_rabi0_GHz";
    m.control = power_axis;
    m.probe = probe;
    m.values.assign(power_axis.size() * probe.size(), cplx{});
    m.errors.assign(power_axis.size(), "");
    std::vector<cplx> base(probe.size()), base_q(probe.size());
    for (std::size_t j = 0; j < probe.size(); ++j) {
        base[j] = t_undriven(probe[j]);
        base_q[j] = tq(r0, probe[j]);
    }
    for (std::size_t i = 0; i < power_axis.size(); ++i) {
        try {
            const Response r = power_axis[i] == 0.0 ? r0 : respond(power_axis[i]);
            for (std::size_t j = 0; j < probe.size(); ++j)
                m.values[i * probe.size() + j] = base[j] - phi * (tq(r, probe[j]) - base_q[j]);
            // Visible lines start from an occupied dressed state; coincident ones (the doubled central line) merge.
            std::vector<OverlayLine> col;
            for (const auto& l : r.lines) {
                const double w = l.weight * r.pops(l.from);
                auto same = std::find_if(col.begin(), col.end(), [&](const OverlayLine& o) { return std::abs(o.freq - l.freq) < 1e-9; });
                if (same != col.end()) same->weight += w;
                else col.push_back({power_axis[i], l.freq, w});
            }
            std::sort(col.begin(), col.end(), [](const OverlayLine& a, const OverlayLine& b) { return a.freq < b.freq; });
            for (const auto& o : col)
                if (o.weight >= overlay_floor) res.overlay.push_back(o);
        } catch (const Error& e) {
            m.errors[i] = e.what();
            for (std::size_t j = 0; j < probe.size(); ++j) m.values[i * probe.size() + j] = base[j];
        }
    }
    return res;
}

namespace {

struct LorentzResidual {
    using Scalar = double;
    using InputType = Eigen::VectorXd;
    using ValueType = Eigen::VectorXd;
    using JacobianType = Eigen::MatrixXd;
    enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

    const std::vector<double>* x;
    const std::vector<double>* y;
    std::size_t lo, hi;

    int inputs() const { return 4; }
    int values() const { return static_cast<int>(hi - lo); }
    // p = (center, half width, amplitude, baseline)
    int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& r) const {
        for (std::size_t k = lo; k < hi; ++k) {
            const double u = (*x)[k] - p(0);
            r(k - lo) = p(3) + p(2) * p(1) * p(1) / (u * u + p(1) * p(1)) - (*y)[k];
        }
        return 0;
    }
};

double median(std::vector<double> v) {
    const auto mid = v.begin() + v.size() / 2;
    std::nth_element(v.begin(), mid, v.end());
    return *mid;
}

}  // namespace

PeakSearch extract_peaks(const std::vector<double>& x, const std::vector<double>& y, int max_peaks, PeakOptions opt) {
    if (x.size() != y.size()) throw DomainError("peak search needs matched axes");
    PeakSearch out;
    const std::size_t n = y.size();
    if (n < 5 || max_peaks <= 0) return out;

    std::vector<double> diff(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) diff[i] = y[i + 1] - y[i];
    const double md = median(diff);
    for (auto& v : diff) v = std::abs(v - md);
    const double ymax = *std::max_element(y.begin(), y.end());
    const double ymin = *std::min_element(y.begin(), y.end());
    const double sigma = std::max(1.4826 * median(diff) / std::sqrt(2.0), 1e-12 * std::max(1.0, ymax - ymin));
    const double dx = (x.back() - x.front()) / (n - 1);

    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!(y[i] > y[i - 1] && y[i] >= y[i + 1])) continue;
        std::size_t l = i, r = i;
        double lmin = y[i], rmin = y[i];
        while (l > 0 && y[l - 1] <= y[i]) lmin = std::min(lmin, y[--l]);
        while (r + 1 < n && y[r + 1] <= y[i]) rmin = std::min(rmin, y[++r]);
        const double prom = y[i] - std::max(lmin, rmin);
        if (prom < opt.min_snr * sigma) continue;

        const double level = y[i] - 0.5 * prom;
        std::size_t a = i, b = i;
        while (a > 0 && y[a] > level) --a;
        while (b + 1 < n && y[b] > level) ++b;
        const std::size_t w = std::max<std::size_t>(b - a, 2);
        const std::size_t lo = std::max(l, i > 3 * w ? i - 3 * w : 0);
        const std::size_t hi = std::min(r + 1, std::min(n, i + 3 * w + 1));
        if (hi - lo < 5) {
            ++out.skipped;
            continue;
        }

        LorentzResidual f{&x, &y, lo, hi};
        Eigen::NumericalDiff<LorentzResidual> nd(f);
        Eigen::LevenbergMarquardt<Eigen::NumericalDiff<LorentzResidual>> lm(nd);
        Eigen::VectorXd p(4);
        p << x[i], 0.5 * std::max(x[b] - x[a], dx), prom, y[i] - prom;
        const auto status = lm.minimize(p);
        const double hw = std::abs(p(1));
        const bool ok = status != Eigen::LevenbergMarquardtSpace::ImproperInputParameters &&
                        std::isfinite(p.sum()) && p(0) >= x[lo] && p(0) <= x[hi - 1] && p(2) > 0.0 &&
                        2.0 * hw >= opt.min_fwhm_samples * dx;
        if (!ok) {
            ++out.skipped;
            continue;
        }
        Eigen::VectorXd res(hi - lo);
        f(p, res);
        out.peaks.push_back({p(0), 2.0 * hw, p(2), p(3), std::sqrt(res.squaredNorm() / res.size()), true});
    }
    std::stable_sort(out.peaks.begin(), out.peaks.end(),
                     [](const PeakFit& a, const PeakFit& b) { return a.amplitude > b.amplitude; });
    if (out.peaks.size() > static_cast<std::size_t>(max_peaks)) out.peaks.resize(max_peaks);
    return out;
}

std::vector<LinewidthPoint> linewidth_pipeline(const DeviceConfig& cfg, const std::vector<double>& omega_q,
                                               double gamma_nr) {
    DeviceConfig c = cfg;
    c.gamma_nr = gamma_nr;
    const double w0 = cfg.band.omega0;
    std::vector<LinewidthPoint> out;
    for (double wq : omega_q) {
        QubitParams q = cfg.qubit;
        q.omega_q = wq;
        const BoundStateSolution sol = solve_bound_state(q, cfg.band, cfg.leakage);
        // Stay clear of the atom pole when the qubit itself sits in the gap.
        const double top = std::min(wq - 0.05, w0);
        const double bottom = std::min(sol.omega_b - 0.2, top - 0.1);
        const PeakFit pk = measure_peak([&](double f) { return std::norm(device_transmission(c, wq, f)); }, bottom,
                                        top, 2001);
        if (!pk.converged) throw ExtractionError("bound-state peak has no half-maximum crossing");
        out.push_back({wq, sol.omega_b, pk.center, pk.fwhm, 1.0 / sol.loc_length});
    }
    return out;
}

double calibrate_waveguide_coupling(const DeviceConfig& cfg, double target_shift) {
    if (!(target_shift > 0.0)) throw DomainError("target shift must be > 0");
    const double w0 = cfg.band.omega0;
    auto miss = [&](double gamma) {
        DeviceConfig c = cfg;
        c.gamma_waveguide = gamma;
        const PeakFit pk = measure_peak([&](double f) { return std::norm(device_transmission(c, w0, f)); },
                                        w0 - 5.0 * target_shift, w0 - 0.01, 4001);
        return (w0 - pk.center) - target_shift;
    };
    double lo = 1e-3, hi = 0.5;
    if (miss(lo) * miss(hi) > 0.0) throw CalibrationError("waveguide coupling: target shift not bracketed");
    const auto r = boost::math::tools::bisect(miss, lo, hi, boost::math::tools::eps_tolerance<double>(40));
    return 0.5 * (r.first + r.second);
}

double flux_to_frequency(double phi_over_phi0, double omega_max) {
    if (!(omega_max > 0.0)) throw DomainError("omega_max must be > 0");
    return omega_max * std::sqrt(std::abs(std::cos(std::numbers::pi * phi_over_phi0)));
}

}  // namespace pbg
