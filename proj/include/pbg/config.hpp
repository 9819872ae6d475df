#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "pbg/spectra.hpp"

namespace pbg {

// INI-style `key = value` with [sections]; ';' starts a comment line.
DeviceConfig parse_device_config(std::istream& in, const std::string& origin = "<stream>");
DeviceConfig read_device_config(const std::string& path);

std::string format_device_config(const DeviceConfig& cfg, const std::vector<std::string>& comments = {});

// Device geometry as drawn, before any calibration.
DeviceConfig default_device_geometry();

nlohmann::json to_json(const DeviceConfig& cfg);

}  // namespace pbg
