#include "pbg/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

namespace pbg {

namespace {

using Section = std::map<std::string, std::string>;

std::map<std::string, Section> parse_ini(std::istream& in, const std::string& origin) {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(fmt::format("{}:{}: {}", origin, e.line(), e.message()));
    }
    std::map<std::string, Section> out;
    for (const auto& [name, sec] : tree) {
        if (sec.empty() && !sec.data().empty()) throw ConfigError(fmt::format("{}: key {} outside any section", origin, name));
        for (const auto& [key, value] : sec) out[name][key] = value.data();
    }
    return out;
}

class Reader {
public:
    Reader(std::map<std::string, Section> ini, std::string origin) : ini_(std::move(ini)), origin_(std::move(origin)) {}

    double num(const std::string& sec, const std::string& key, std::optional<double> fallback = std::nullopt) {
        used_.insert(sec + "." + key);
        const auto s = ini_.find(sec);
        if (s == ini_.end() || !s->second.count(key)) {
            if (fallback) return *fallback;
            throw ConfigError(fmt::format("{}: missing [{}] {}", origin_, sec, key));
        }
        const std::string& text = s->second.at(key);
        double v = 0.0;
        const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc() || p != text.data() + text.size() || !std::isfinite(v))
            throw ConfigError(fmt::format("{}: [{}] {} = '{}' is not a number", origin_, sec, key, text));
        return v;
    }

    int integer(const std::string& sec, const std::string& key, std::optional<int> fallback = std::nullopt) {
        const double v = num(sec, key, fallback ? std::optional<double>(*fallback) : std::nullopt);
        if (v != std::floor(v)) throw ConfigError(fmt::format("{}: [{}] {} must be an integer", origin_, sec, key));
        return static_cast<int>(v);
    }

    void reject_unknown() const {
        for (const auto& [sec, kv] : ini_)
            for (const auto& [key, _] : kv)
                if (!used_.count(sec + "." + key)) throw ConfigError(fmt::format("{}: unknown key [{}] {}", origin_, sec, key));
    }

private:
    std::map<std::string, Section> ini_;
    std::string origin_;
    std::set<std::string> used_;
};

}  // namespace

DeviceConfig default_device_geometry() {
    DeviceConfig c;
    c.geometry.lo = {0.45, 28.0, 120.0};
    c.geometry.hi = {8.0, 125.0, 120.0};
    c.geometry.n_cells = 14;
    c.qubit.cell_index = 7;
    c.qubit.e_c = 0.385;
    c.qubit.n_levels = 4;
    c.band.omega0 = 7.7;
    c.band.band_index = 2;
    return c;
}

DeviceConfig parse_device_config(std::istream& in, const std::string& origin) {
    Reader r(parse_ini(in, origin), origin);
    DeviceConfig c;
    const double vp = r.num("crystal", "phase_velocity");
    c.geometry.lo = {r.num("crystal", "l_lo"), r.num("crystal", "z_lo"), vp};
    c.geometry.hi = {r.num("crystal", "l_hi"), r.num("crystal", "z_hi"), vp};
    c.geometry.n_cells = r.integer("crystal", "n_cells");

    c.band.omega0 = r.num("band", "omega0");
    c.band.alpha = r.num("band", "alpha");
    c.band.kappa = r.num("band", "kappa", 0.0);
    c.band.band_index = r.integer("band", "band_index", 2);
    c.band.k0 = std::numbers::pi / c.geometry.period();

    c.qubit.omega_q = r.num("qubit", "omega_q", c.band.omega0);
    c.qubit.g = r.num("qubit", "g");
    c.qubit.e_c = r.num("qubit", "e_c", 0.385);
    c.qubit.n_levels = r.integer("qubit", "n_levels", 4);
    c.qubit.cell_index = r.integer("qubit", "cell_index", c.geometry.n_cells / 2);

    c.gamma_waveguide = r.num("atom", "gamma_waveguide", 0.0);
    c.gamma_nr = r.num("atom", "gamma_nr", 0.001);
    c.port_impedance = r.num("atom", "port_impedance", 50.0);

    c.leakage.d0 = r.num("leakage", "d0", 126.0);
    c.leakage.gamma_ext = r.num("leakage", "gamma_ext", 0.0);

    c.omega01 = r.num("ladder", "omega01", 0.0);
    c.omega12 = r.num("ladder", "omega12", 0.0);
    c.anharmonic_correction = r.num("ladder", "anharmonic_correction", 0.0);
    r.reject_unknown();

    try {
        validate(c);
    } catch (const DomainError& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    return c;
}

DeviceConfig read_device_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    return parse_device_config(in, path);
}

std::string format_device_config(const DeviceConfig& c, const std::vector<std::string>& comments) {
    std::ostringstream o;
    for (const auto& line : comments) o << "; " << line << '\n';
    if (!comments.empty()) o << '\n';
    auto kv = [&](const char* key, double v) { o << fmt::format("{} = {:.12g}\n", key, v); };
    o << "[crystal]\n";
    kv("l_lo", c.geometry.lo.length);
    kv("l_hi", c.geometry.hi.length);
    kv("z_lo", c.geometry.lo.impedance);
    kv("z_hi", c.geometry.hi.impedance);
    kv("n_cells", c.geometry.n_cells);
    kv("phase_velocity", c.geometry.hi.phase_velocity);
    o << "\n[band]\n";
    kv("omega0", c.band.omega0);
    kv("alpha", c.band.alpha);
    kv("kappa", c.band.kappa);
    kv("band_index", c.band.band_index);
    o << "\n[qubit]\n";
    kv("omega_q", c.qubit.omega_q);
    kv("g", c.qubit.g);
    kv("e_c", c.qubit.e_c);
    kv("n_levels", c.qubit.n_levels);
    kv("cell_index", c.qubit.cell_index);
    o << "\n[atom]\n";
    kv("gamma_waveguide", c.gamma_waveguide);
    kv("gamma_nr", c.gamma_nr);
    kv("port_impedance", c.port_impedance);
    o << "\n[leakage]\n";
    kv("d0", c.leakage.d0);
    kv("gamma_ext", c.leakage.gamma_ext);
    o << "\n[ladder]\n";
    kv("omega01", c.omega01);
    kv("omega12", c.omega12);
    kv("anharmonic_correction", c.anharmonic_correction);
    return o.str();
}

nlohmann::json to_json(const DeviceConfig& c) {
    return {
        {"crystal",
         {{"l_lo", c.geometry.lo.length},
          {"l_hi", c.geometry.hi.length},
          {"z_lo", c.geometry.lo.impedance},
          {"z_hi", c.geometry.hi.impedance},
          {"n_cells", c.geometry.n_cells},
          {"phase_velocity", c.geometry.hi.phase_velocity}}},
        {"band", {{"omega0", c.band.omega0}, {"alpha", c.band.alpha}, {"kappa", c.band.kappa}, {"band_index", c.band.band_index}}},
        {"qubit",
         {{"omega_q", c.qubit.omega_q},
          {"g", c.qubit.g},
          {"e_c", c.qubit.e_c},
          {"n_levels", c.qubit.n_levels},
          {"cell_index", c.qubit.cell_index}}},
        {"atom", {{"gamma_waveguide", c.gamma_waveguide}, {"gamma_nr", c.gamma_nr}, {"port_impedance", c.port_impedance}}},
        {"leakage", {{"d0", c.leakage.d0}, {"gamma_ext", c.leakage.gamma_ext}}},
        {"ladder", {{"omega01", c.omega01}, {"omega12", c.omega12}, {"anharmonic_correction", c.anharmonic_correction}}},
    };
}

}  // namespace pbg
