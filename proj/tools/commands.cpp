#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "pbg/config.hpp"
#include "pbg/output.hpp"
#include "pbg/spectra.hpp"

namespace pbg::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Globals {
    std::string config;
    std::string out_dir = "out";
    std::string formats = "csv,json";
    std::string grid;
    std::uint64_t seed = 0;
};

struct Range {
    double lo, hi;
};

Range parse_range(const std::string& text, const char* what) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw UsageError(fmt::format("{} must look like lo:hi, got '{}'", what, text));
    try {
        std::size_t p1 = 0, p2 = 0;
        const std::string a = text.substr(0, colon), b = text.substr(colon + 1);
        Range r{std::stod(a, &p1), std::stod(b, &p2)};
        if (p1 != a.size() || p2 != b.size() || !std::isfinite(r.lo) || !std::isfinite(r.hi)) throw std::invalid_argument("");
        return r;
    } catch (const std::logic_error&) {
        throw UsageError(fmt::format("{}: cannot read '{}' as lo:hi", what, text));
    }
}

std::vector<double> linspace(Range r, std::size_t n) {
    if (n == 0) throw UsageError("axis needs at least one point");
    if (n == 1) return {r.lo};
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = r.lo + (r.hi - r.lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

std::pair<std::size_t, std::size_t> parse_grid(const std::string& text, std::size_t nx, std::size_t ny) {
    if (text.empty()) return {nx, ny};
    const auto x = text.find('x');
    std::size_t a = 0, b = 0;
    try {
        std::size_t p1 = 0, p2 = 0;
        const long la = std::stol(text.substr(0, x), &p1);
        const long lb = std::stol(text.substr(x + 1), &p2);
        if (x == std::string::npos || p1 != x || p2 != text.size() - x - 1 || la < 1 || lb < 1) throw std::invalid_argument("");
        a = static_cast<std::size_t>(la);
        b = static_cast<std::size_t>(lb);
    } catch (const std::logic_error&) {
        throw UsageError(fmt::format("--grid must look like NxM with positive counts, got '{}'", text));
    }
    return {a, b};
}

std::string clean(std::string s) {
    std::replace(s.begin(), s.end(), ',', ';');
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

double db20(cplx t) { return 20.0 * std::log10(std::max(std::abs(t), 1e-15)); }

// Everything a command needs to write its files.
class Sink {
public:
    Sink(const Globals& g, std::ostream& out, std::ostream& err) : g_(g), out_(out), err_(err) {
        std::stringstream ss(g.formats);
        std::string f;
        while (std::getline(ss, f, ',')) {
            if (f != "csv" && f != "json" && f != "svg") throw UsageError("unknown output format '" + f + "'");
            formats_.insert(f);
        }
        if (formats_.empty()) throw UsageError("--format needs at least one of csv,json,svg");
        dir_ = g.out_dir;
    }

    std::ostream& out() { return out_; }
    std::ostream& err() { return err_; }
    bool wants(const std::string& f) const { return formats_.count(f) > 0; }
    std::uint64_t seed() const { return g_.seed; }
    const std::string& grid() const { return g_.grid; }

    void set_config(const json& cfg) { config_ = cfg; }

    void csv(const std::string& name, const CsvWriter& w, const json& params) {
        const std::string body = w.str();
        if (wants("csv")) write_file(dir_ / name, body);
        if (wants("json")) write_file(dir_ / (name + ".json"), sidecar(name, body, w.columns(), w.rows(), config_, params).dump(2) + "\n");
    }

    void svg(const std::string& name, const std::string& body) {
        if (wants("svg")) write_file(dir_ / name, body);
    }

    void json_file(const std::string& name, const json& j) { write_file(dir_ / name, j.dump(2) + "\n"); }

    fs::path path(const std::string& name) const { return dir_ / name; }

private:
    const Globals& g_;
    std::ostream& out_;
    std::ostream& err_;
    std::set<std::string> formats_;
    fs::path dir_;
    json config_ = json::object();
};

DeviceConfig load(const Globals& g) {
    if (g.config.empty()) throw UsageError("--config <path> is required for this command");
    return read_device_config(g.config);
}

// ---- bands ---------------------------------------------------------------

struct BandsArgs {
    bool uniform = false;
    double f_max = 12.0;
    std::size_t points = 4001;
};

int cmd_bands(Sink& sink, const Globals& g, const BandsArgs& a) {
    DeviceConfig cfg = load(g);
    if (a.uniform) cfg.geometry.hi.impedance = cfg.geometry.lo.impedance;
    sink.set_config(to_json(cfg));
    const json params = {{"command", "bands"}, {"uniform", a.uniform}, {"f_max_GHz", a.f_max}, {"points", a.points}};
    const auto& geo = cfg.geometry;

    const auto freq = linspace({a.f_max / static_cast<double>(a.points), a.f_max}, a.points);
    const auto t = bare_crystal_s21(cfg, freq);
    CsvWriter bands({"freq_GHz", "cos_kd", "re_k_per_mm", "im_k_per_mm", "abs_t_dB"});
    std::vector<double> db(freq.size());
    for (std::size_t i = 0; i < freq.size(); ++i) {
        const cplx k = dispersion(geo, freq[i]);
        db[i] = db20(t[i]);
        bands.row({freq[i], bloch_cosine(geo, freq[i]), k.real(), k.imag(), db[i]});
    }
    sink.csv("bands.csv", bands, params);

    CsvWriter edges({"band_index", "edge_GHz", "side"});
    for (const auto& e : band_edges(geo, 0.0, a.f_max))
        edges.row({static_cast<double>(e.band_index), e.freq}, {e.side == EdgeSide::below ? "lower" : "upper"});
    sink.csv("edges.csv", edges, params);
    if (!a.uniform) {
        const BandEdge e = lower_edge_of_band(geo, cfg.band.band_index, std::max(a.f_max, 20.0));
        sink.out() << fmt::format("band {} lower edge: {:.6f} GHz\n", e.band_index, e.freq);
    } else {
        sink.out() << fmt::format("uniform line: {} band edges below {} GHz\n", edges.rows(), a.f_max);
    }

    CsvWriter dos({"freq_GHz", "dos_per_GHz_mm"});
    const auto fd = linspace({cfg.band.omega0 - 0.2, cfg.band.omega0 + 0.8}, 1001);
    std::vector<double> rho;
    for (double f : fd) {
        rho.push_back(density_of_states(cfg.band, f));
        dos.row({f, rho.back()});
    }
    sink.csv("dos.csv", dos, params);

    CsvWriter modes({"band", "k_per_mm", "freq_GHz", "x_mm", "re_profile", "im_profile", "n_waves"});
    std::vector<Series> mode_series;
    const double k = std::numbers::pi / geo.period();
    for (int band = 1; band <= 2; ++band) {
        try {
            const BlochMode m = bloch_modes(geo, k, band);
            Series s{fmt::format("band {} ({:.4f} GHz)", band, m.freq), m.x, {}};
            for (std::size_t i = 0; i < m.x.size(); ++i) {
                modes.row({static_cast<double>(band), k, m.freq, m.x[i], m.profile[i].real(), m.profile[i].imag(),
                           static_cast<double>(m.n_waves)});
                s.y.push_back(m.profile[i].real());
            }
            mode_series.push_back(std::move(s));
        } catch (const Error& e) {
            sink.err() << fmt::format("warning: band {} Bloch mode skipped: {}\n", band, e.what());
        }
    }
    sink.csv("bloch_modes.csv", modes, params);

    sink.svg("bands.svg", svg_line_plot("Bare crystal transmission", "frequency (GHz)", "|t| (dB)", {{"|t|", freq, db}}));
    sink.svg("dos.svg", svg_line_plot("Density of states", "frequency (GHz)", "rho (1/GHz/mm)", {{"rho", fd, rho}}));
    sink.svg("bloch_modes.svg", svg_line_plot("Bloch modes at k = pi/d", "x (mm)", "Re E", mode_series));
    return kOk;
}

// ---- boundstate ----------------------------------------------------------

struct BoundArgs {
    std::optional<double> omega_q;
    std::string sweep = "7.5:8.2:15";
    std::string gamma_source = "crystal";
};

int cmd_boundstate(Sink& sink, const Globals& g, const BoundArgs& a) {
    const DeviceConfig cfg = load(g);
    sink.set_config(to_json(cfg));
    if (a.gamma_source != "model" && a.gamma_source != "crystal") throw UsageError("--gamma-source is model or crystal");

    std::vector<double> wq;
    if (a.omega_q) {
        wq = {*a.omega_q};
    } else {
        const auto c2 = a.sweep.rfind(':');
        if (c2 == std::string::npos) throw UsageError("--sweep must look like lo:hi:n");
        const Range r = parse_range(a.sweep.substr(0, c2), "--sweep");
        std::size_t n = 0;
        try {
            n = std::stoul(a.sweep.substr(c2 + 1));
        } catch (const std::logic_error&) {
            throw UsageError("--sweep point count is not an integer");
        }
        wq = linspace(r, n);
    }
    const json params = {{"command", "boundstate"}, {"omega_q_GHz", wq}, {"gamma_source", a.gamma_source}};

    CsvWriter table({"omega_q_GHz", "omega_b_GHz", "delta_GHz", "loc_length_mm", "p_q", "tan2_theta", "gamma_GHz", "status"});
    CsvWriter fit({"gamma_GHz", "inv_L_per_mm"});
    const double nan = std::numeric_limits<double>::quiet_NaN();
    int failed = 0;
    for (double w : wq) {
        QubitParams q = cfg.qubit;
        q.omega_q = w;
        try {
            const BoundStateSolution s = solve_bound_state(q, cfg.band, cfg.leakage);
            double gamma = s.linewidth;
            if (a.gamma_source == "crystal") gamma = linewidth_pipeline(cfg, {w}, 0.0).front().fwhm;
            table.row({w, s.omega_b, s.detuning_edge, s.loc_length, s.qubit_weight, s.tan2_theta, gamma}, {"ok"});
            if (gamma > 0.0 && std::isfinite(s.loc_length)) fit.row({gamma, 1.0 / s.loc_length});
            if (a.omega_q) {
                sink.out() << fmt::format(
                    "omega_q  = {:.6f} GHz\nomega_b  = {:.6f} GHz\nomega0 - omega_b = {:.6f} MHz\nL        = {:.3f} mm\n"
                    "P_q      = {:.6f}\ngamma    = {:.6g} GHz ({})\n",
                    w, s.omega_b, 1e3 * s.detuning_edge, s.loc_length, s.qubit_weight, gamma, a.gamma_source);
            }
        } catch (const Error& e) {
            ++failed;
            table.row({w, nan, nan, nan, nan, nan, nan}, {clean(e.what())});
            sink.err() << fmt::format("omega_q = {:.6f} GHz: {}\n", w, e.what());
        }
    }
    sink.csv("boundstate.csv", table, params);
    sink.csv("fit_input.csv", fit, params);
    if (!a.omega_q) sink.out() << fmt::format("{} of {} rows solved\n", wq.size() - failed, wq.size());
    return a.omega_q && failed ? kFailed : kOk;
}

// ---- maps ------------------------------------------------------------------

int emit_map(Sink& sink, const TransmissionMap& m, const std::string& stem, const json& params,
             const std::vector<double>* control_out = nullptr) {
    const auto& ctrl = control_out ? *control_out : m.control;
    CsvWriter w({m.control_name, "probe_GHz", "re_t", "im_t", "abs_t_dB"});
    std::vector<double> z(m.values.size());
    for (std::size_t i = 0; i < ctrl.size(); ++i)
        for (std::size_t j = 0; j < m.probe.size(); ++j) {
            const cplx t = m.at(i, j);
            z[i * m.probe.size() + j] = db20(t);
            w.row({ctrl[i], m.probe[j], t.real(), t.imag(), z[i * m.probe.size() + j]});
        }
    json p = params;
    json failures = json::array();
    for (std::size_t i = 0; i < m.errors.size(); ++i)
        if (!m.errors[i].empty()) failures.push_back({{"control", ctrl[i]}, {"error", m.errors[i]}});
    p["failed_columns"] = failures;
    sink.csv(stem + ".csv", w, p);
    sink.svg(stem + ".svg", svg_heatmap(stem, m.control_name, "probe (GHz)", ctrl, m.probe, z, "|t| dB"));

    const std::size_t bad = m.failed_points(), total = m.values.size();
    for (const auto& f : failures) sink.err() << fmt::format("column {}: {}\n", f["control"].get<double>(), f["error"].get<std::string>());
    if (bad * 10 > total) {
        sink.err() << fmt::format("{} of {} grid points failed\n", bad, total);
        return kFailed;
    }
    return kOk;
}

struct SweepArgs {
    std::string control = "omega_q";
    std::string range;
    std::string probe = "6.9:8.1";
    double omega_max = 8.1;
};

int cmd_sweep(Sink& sink, const Globals& g, const SweepArgs& a) {
    const DeviceConfig cfg = load(g);
    sink.set_config(to_json(cfg));
    const auto [nx, ny] = parse_grid(g.grid, 201, 401);
    if (a.control != "omega_q" && a.control != "flux") throw UsageError("--control is omega_q or flux");
    const bool flux = a.control == "flux";
    const Range cr = parse_range(a.range.empty() ? (flux ? "0:0.5" : "6.9:8.1") : a.range, "--range");
    const auto control = linspace(cr, nx);
    const auto probe = linspace(parse_range(a.probe, "--probe"), ny);
    std::vector<double> wq = control;
    if (flux)
        for (auto& v : wq) v = flux_to_frequency(v, a.omega_max);
    TransmissionMap m = qubit_sweep_s21(cfg, wq, probe);
    if (flux) {
        m.control_name = "flux_phi0";
        m.control = control;
    }
    const json params = {{"command", "sweep"}, {"control", a.control}, {"grid", {nx, ny}},
                         {"range", {cr.lo, cr.hi}}, {"probe", a.probe}, {"omega_max_GHz", a.omega_max}};
    sink.out() << fmt::format("sweep: {} x {} points\n", nx, ny);
    return emit_map(sink, m, "sweep", params);
}

struct PumpArgs {
    std::string pump_at = "01";
    std::string power = "0:0.1";
    std::string probe = "6.8:7.4";
    bool subtract_bare = false;
};

int cmd_pumpprobe(Sink& sink, const Globals& g, const PumpArgs& a) {
    const DeviceConfig cfg = load(g);
    sink.set_config(to_json(cfg));
    if (a.pump_at != "01" && a.pump_at != "12") throw UsageError("--pump-at is 01 or 12");
    const auto [nx, ny] = parse_grid(g.grid, 201, 401);
    const auto power = linspace(parse_range(a.power, "--power"), nx);
    const auto probe = linspace(parse_range(a.probe, "--probe"), ny);
    const TransmonLadder ladder = observed_ladder(cfg);
    const DriveConfig drive{ladder.transition(a.pump_at == "01" ? 0 : 1), 0.0};
    const PumpProbeResult r = pump_probe_map(cfg, drive, power, probe);

    const json params = {{"command", "pumpprobe"}, {"pump_at", a.pump_at}, {"omega_d_GHz", drive.omega_d},
                         {"grid", {nx, ny}}, {"power", a.power}, {"probe", a.probe},
                         {"bare_center_GHz", r.bare_center}, {"linewidth01_GHz", r.linewidth01}};
    CsvWriter overlay({"control", "line_freq_GHz", "weight"});
    for (const auto& l : r.overlay) overlay.row({l.control, l.freq, l.weight});
    sink.csv("overlay.csv", overlay, params);

    if (a.subtract_bare) {
        // dB difference against the bare crystal
        const auto bare = bare_crystal_s21(cfg, probe);
        CsvWriter sub({"control", "probe_GHz", "delta_dB"});
        for (std::size_t i = 0; i < power.size(); ++i)
            for (std::size_t j = 0; j < probe.size(); ++j) sub.row({power[i], probe[j], db20(r.map.at(i, j)) - db20(bare[j])});
        sink.csv("pumpprobe_subtracted.csv", sub, params);
    }

    std::size_t last = 0;
    for (const auto& l : r.overlay)
        if (l.control == power.back()) ++last;
    sink.out() << fmt::format("pump at omega_{} = {:.6f} GHz, undriven line {:.6f} GHz (width {:.3f} MHz)\n", a.pump_at,
                              drive.omega_d, ladder.transition(0), 1e3 * r.linewidth01);
    sink.out() << fmt::format("{} overlay lines at Omega0 = {} GHz\n", last, power.back());
    return emit_map(sink, r.map, "pumpprobe", params);
}

// ---- cool ------------------------------------------------------------------

struct CoolArgs {
    std::string detuning = "-0.3:0.3";
    std::string power = "0.02:0.4";
    std::optional<double> omega_l;
    std::optional<double> kappa;
    double gamma_phi = 0.0;
};

int cmd_cool(Sink& sink, const Globals& g, const CoolArgs& a) {
    DeviceConfig cfg = load(g);
    if (a.kappa) cfg.band.kappa = *a.kappa;
    sink.set_config(to_json(cfg));
    const auto [nx, ny] = parse_grid(g.grid, 61, 61);
    const auto det = linspace(parse_range(a.detuning, "--detuning"), nx);
    const auto pw = linspace(parse_range(a.power, "--power"), ny);
    const double wl = a.omega_l.value_or(cfg.band.omega0);
    const json params = {{"command", "cool"}, {"omega_l_GHz", wl}, {"gamma_phi_GHz", a.gamma_phi}, {"grid", {nx, ny}},
                         {"detuning", a.detuning}, {"power", a.power}};

    CsvWriter w({"delta_a_GHz", "omega_rabi0_GHz", "theta_rad", "gamma_plus_GHz", "gamma_minus_GHz", "rho_mm", "rho_pp",
                 "rho_mm_lindblad", "status"});
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::size_t flagged = 0;
    double best = 0.0;
    std::vector<double> z;
    for (double d : det)
        for (double p : pw) {
            try {
                const MixingAngle mix = mixing_angle(d, p);
                const CoolingRates r = cooling_rates(cfg.band, wl, mix.omega, cfg.qubit.g, a.gamma_phi, mix.theta);
                const DressedPopulations pop = dressed_steady_state(r);
                Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(2, 2);
                h(0, 0) = -0.5 * mix.omega;
                h(1, 1) = 0.5 * mix.omega;
                const double lind = lindblad_steady_state(h, dressed_collapse_ops(r))(0, 0).real();
                w.row({d, p, mix.theta, r.gamma_plus, r.gamma_minus, pop.rho_minus, pop.rho_plus, lind}, {"ok"});
                best = std::max(best, pop.rho_minus);
                z.push_back(pop.rho_minus);
            } catch (const Error& e) {
                ++flagged;
                w.row({d, p, nan, nan, nan, nan, nan, nan}, {clean(e.what())});
                z.push_back(nan);
            }
        }
    sink.csv("cool.csv", w, params);
    sink.svg("cool.svg", svg_heatmap("Dressed ground population", "Delta_a (GHz)", "Omega0 (GHz)", det, pw, z, "rho_mm"));
    sink.out() << fmt::format("max rho_mm = {:.6f}; {} of {} rows flagged\n", best, flagged, w.rows());
    return flagged * 10 > w.rows() ? kFailed : kOk;
}

// ---- fit-length --------------------------------------------------------------

struct FitArgs {
    std::string input;
    bool synthetic = false;
    double d0 = 126.0;
    double gamma_ext = 1.0;
    std::size_t points = 12;
    double noise = 0.0;
};

std::size_t column_index(const CsvData& d, const std::string& name, std::size_t fallback) {
    const auto it = std::find(d.columns.begin(), d.columns.end(), name);
    if (it != d.columns.end()) return static_cast<std::size_t>(it - d.columns.begin());
    if (fallback >= d.columns.size()) throw ConfigError("input CSV lacks column " + name);
    return fallback;
}

int cmd_fit_length(Sink& sink, const Globals& g, const FitArgs& a) {
    std::vector<LengthSample> samples;
    json params = {{"command", "fit-length"}};
    if (a.synthetic) {
        std::mt19937_64 rng(g.seed);
        std::normal_distribution<double> noise(0.0, a.noise);
        const auto inv_l = linspace({0.01, 0.08}, a.points);
        for (double x : inv_l) samples.push_back({linewidth_model(1.0 / x, a.d0, a.gamma_ext) * std::exp(noise(rng)), x});
        params.update({{"source", "synthetic"}, {"d0_mm", a.d0}, {"gamma_ext_GHz", a.gamma_ext}, {"noise", a.noise}, {"seed", g.seed}});
    } else {
        if (a.input.empty()) throw UsageError("fit-length needs --input <csv> or --synthetic");
        const CsvData d = read_csv(a.input);
        const std::size_t ig = column_index(d, "gamma_GHz", 0), il = column_index(d, "inv_L_per_mm", 1);
        for (const auto& r : d.rows) samples.push_back({r[ig], r[il]});
        params.update({{"source", a.input}});
    }
    const LengthFit f = fit_effective_length(samples);
    const json report = {{"d_fit_mm", f.d_fit}, {"gamma_ext_GHz", f.gamma_ext}, {"r2", f.r2}, {"n_points", samples.size()}, {"parameters", params}};
    sink.json_file("fit_length.json", report);
    sink.out() << fmt::format("d_fit = {:.6f} mm, gamma_ext = {:.6g} GHz, r2 = {:.6f}\n", f.d_fit, f.gamma_ext, f.r2);
    return kOk;
}

// ---- calibrate -----------------------------------------------------------------

struct CalArgs {
    double omega0 = 7.7;
    double delta = 0.25;
    double omega01 = 0.0;
    double omega12 = 0.0;
    std::string output;
};

template <class F>
auto stage(const char* name, F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        throw CalibrationError(fmt::format("calibration stage '{}' failed: {}", name, e.what()));
    }
}

int cmd_calibrate(Sink& sink, const Globals& g, const CalArgs& a) {
    if (!(a.omega0 > 0.0) || !(a.delta > 0.0)) throw UsageError("calibration targets must be positive");
    DeviceConfig cfg = g.config.empty() ? default_device_geometry() : read_device_config(g.config);
    const int band = cfg.band.band_index;

    const double vp = stage("phase velocity", [&] { return calibrate_phase_velocity(cfg.geometry, a.omega0, band); });
    cfg.geometry = cfg.geometry.with_phase_velocity(vp);
    const BandEdge edge = stage("band edge", [&] { return lower_edge_of_band(cfg.geometry, band); });
    const BandModel fit = stage("band fit", [&] { return fit_quadratic_band(cfg.geometry, edge); });
    const double kappa = stage("edge steepness", [&] { return band_edge_steepness(cfg.geometry, cfg.port_impedance, band); });
    cfg.band = fit;
    cfg.band.kappa = kappa;
    cfg.qubit.omega_q = fit.omega0;
    cfg.qubit.g = stage("coupling", [&] { return calibrate_g(a.delta, fit.alpha); });
    cfg.gamma_waveguide = stage("waveguide coupling", [&] { return calibrate_waveguide_coupling(cfg, a.delta); });
    // Leakage prefactor anchored to the lossless crystal linewidth at the edge.
    const double fwhm = stage("leakage", [&] { return linewidth_pipeline(cfg, {fit.omega0}, 0.0).front().fwhm; });
    const double loc = solve_bound_state(cfg.qubit, cfg.band).loc_length;
    cfg.leakage.gamma_ext = fwhm * std::exp(0.5 * cfg.leakage.d0 / loc);
    cfg.omega01 = a.omega01;
    cfg.omega12 = a.omega12;
    try {
        validate(cfg);
    } catch (const DomainError& e) {
        throw CalibrationError(std::string("calibrated config is invalid: ") + e.what());
    }

    const std::vector<std::string> notes = {
        "written by pbgsim calibrate",
        fmt::format("targets: omega0 = {} GHz, delta = {} GHz", a.omega0, a.delta),
        fmt::format("phase_velocity puts the band {} lower edge at {:.9f} GHz", band, edge.freq),
        fmt::format("alpha from a {}-point quadratic fit, rms {:.3g} GHz{}", QuadraticFitOptions{}.samples, fit.fit_rms,
                    fit.poor_fit ? " (poor fit)" : ""),
        "kappa is the 10-90% rise of bare |t|^2 above the edge",
        "g from delta = (pi g^2 / alpha)^(2/3) in angular units",
        "gamma_waveguide places the crystal peak of a qubit at omega0 delta below the edge",
        fmt::format("gamma_ext anchors the leakage law to the lossless linewidth {:.6g} GHz at omega_q = omega0", fwhm),
    };
    const std::string text = format_device_config(cfg, notes);
    const fs::path target = a.output.empty() ? sink.path("device.cfg") : fs::path(a.output);
    write_file(target, text);
    sink.out() << fmt::format("v_p = {:.9g} mm/ns, alpha = {:.9g}, kappa = {:.6g} GHz, g = {:.9g} GHz, gamma_wg = {:.9g} GHz\nwrote {}\n",
                              vp, fit.alpha, kappa, cfg.qubit.g, cfg.gamma_waveguide, target.string());
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Photonic band-gap qubit simulator", "pbgsim"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config, "device config file");
    app.add_option("--out", g.out_dir, "output directory");
    app.add_option("--format", g.formats, "comma list of csv,json,svg");
    app.add_option("--grid", g.grid, "NxM grid (control x probe)");
    app.add_option("--seed", g.seed, "seed for synthetic noise");

    std::function<int(Sink&)> action;
    auto sub = [&](const char* name, const char* help) {
        auto* s = app.add_subcommand(name, help);
        s->fallthrough();
        return s;
    };

    BandsArgs ba;
    auto* bands = sub("bands", "band structure, DOS and Bloch modes");
    bands->add_flag("--uniform", ba.uniform, "set both impedances equal");
    bands->add_option("--f-max", ba.f_max, "upper frequency (GHz)")->check(CLI::PositiveNumber);
    bands->add_option("--points", ba.points, "frequency samples")->check(CLI::Range(2, 1000000));
    bands->callback([&] { action = [&](Sink& s) { return cmd_bands(s, g, ba); }; });

    BoundArgs bo;
    auto* bound = sub("boundstate", "bound-state solutions");
    bound->add_option("--omega-q", bo.omega_q, "single qubit frequency (GHz)");
    bound->add_option("--sweep", bo.sweep, "lo:hi:n qubit sweep");
    bound->add_option("--gamma-source", bo.gamma_source, "model or crystal");
    bound->callback([&] { action = [&](Sink& s) { return cmd_boundstate(s, g, bo); }; });

    SweepArgs sw;
    auto* sweep = sub("sweep", "transmission map against qubit frequency or flux");
    sweep->add_option("--control", sw.control, "omega_q or flux");
    sweep->add_option("--range", sw.range, "control lo:hi");
    sweep->add_option("--probe", sw.probe, "probe lo:hi (GHz)");
    sweep->add_option("--omega-max", sw.omega_max, "flux sweet-spot frequency (GHz)");
    sweep->callback([&] { action = [&](Sink& s) { return cmd_sweep(s, g, sw); }; });

    PumpArgs pp;
    auto* pump = sub("pumpprobe", "pump-probe transmission map with dressed-line overlay");
    pump->add_option("--pump-at", pp.pump_at, "01 or 12");
    pump->add_option("--power", pp.power, "Omega0 lo:hi (GHz)");
    pump->add_option("--probe", pp.probe, "probe lo:hi (GHz)");
    pump->add_flag("--subtract-bare", pp.subtract_bare, "also write the map minus the bare crystal in dB");
    pump->callback([&] { action = [&](Sink& s) { return cmd_pumpprobe(s, g, pp); }; });

    CoolArgs co;
    auto* cool = sub("cool", "dressed-state cooling populations");
    cool->add_option("--detuning", co.detuning, "Delta_a lo:hi (GHz)");
    cool->add_option("--power", co.power, "Omega0 lo:hi (GHz)");
    cool->add_option("--omega-l", co.omega_l, "drive frequency (GHz), default omega0");
    cool->add_option("--kappa", co.kappa, "override band-edge steepness (GHz)");
    cool->add_option("--gamma-phi", co.gamma_phi, "dephasing rate (GHz)");
    cool->callback([&] { action = [&](Sink& s) { return cmd_cool(s, g, co); }; });

    FitArgs fa;
    auto* fitl = sub("fit-length", "fit gamma = gamma_ext exp(-d/2L)");
    fitl->add_option("--input", fa.input, "CSV with gamma_GHz, inv_L_per_mm");
    fitl->add_flag("--synthetic", fa.synthetic, "generate input from the model");
    fitl->add_option("--d0", fa.d0, "synthetic d (mm)");
    fitl->add_option("--gamma-ext", fa.gamma_ext, "synthetic prefactor (GHz)");
    fitl->add_option("--points", fa.points, "synthetic sample count");
    fitl->add_option("--noise", fa.noise, "synthetic log-normal noise sigma");
    fitl->callback([&] { action = [&](Sink& s) { return cmd_fit_length(s, g, fa); }; });

    CalArgs ca;
    auto* cal = sub("calibrate", "fit v_p, band model, g and couplings to targets");
    cal->add_option("--omega0", ca.omega0, "band-edge target (GHz)");
    cal->add_option("--delta", ca.delta, "edge shift target (GHz)");
    cal->add_option("--omega01", ca.omega01, "observed 0-1 line to store (GHz)");
    cal->add_option("--omega12", ca.omega12, "observed 1-2 line to store (GHz)");
    cal->add_option("--output", ca.output, "config path to write");
    cal->callback([&] { action = [&](Sink& s) { return cmd_calibrate(s, g, ca); }; });

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        Sink sink(g, out, err);
        return action(sink);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kFailed;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kFailed;
    }
}

}  // namespace pbg::cli
