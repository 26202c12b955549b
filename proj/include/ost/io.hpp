#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "ost/score.hpp"
#include "ost/sphere.hpp"
#include "ost/wavelet_dft.hpp"

namespace ost {

nlohmann::json design_to_json(const SphericalDesign& d);
SphericalDesign design_from_json(const nlohmann::json& j);
void write_design(const SphericalDesign& d, const std::string& path);
SphericalDesign read_design(const std::string& path);

// JSON manifest at `path`, payload at path + ".bin": filters as c128 LE, then phi0 as f64 LE.
void write_bank(const WaveletBank& bank, const std::string& path);
WaveletBank read_bank(const std::string& path);

// JSON manifest at `path`, payload at path + ".bin": orientation-major c64 LE, then the low channel as f32 LE.
void write_score(const OrientationScore& U, const std::string& path);
OrientationScore read_score(const std::string& path);

nlohmann::json read_json(const std::string& path);
void write_json(const nlohmann::json& j, const std::string& path);

// FNV-1a of a file's bytes, 16 hex digits; empty string when unreadable.
std::string file_hash(const std::string& path);

}  // namespace ost
