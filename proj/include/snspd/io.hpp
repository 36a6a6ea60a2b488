#pragma once

#include <json.hpp>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "snspd/detector_model.hpp"
#include "snspd/povm_independent.hpp"
#include "snspd/simplex_quad.hpp"
#include "snspd/states.hpp"

namespace snspd {

using json = nlohmann::ordered_json;

json to_json(const EfficiencyProfile& p);
json to_json(const ModeProfile& m);
json to_json(const DetectorConfig& c);
json to_json(const QuadratureSpec& q);
json to_json(const StateSpec& s);
json to_json(const ConditionalMatrix& m);
json to_json(const ClickDistribution& d);

// FNV-1a 64 of the compact dump, as 16 hex digits.
std::string digest(const json& j);
std::string digest(const std::string& bytes);
std::string config_digest(const DetectorConfig& c);

// Round-trip-exact decimal form of a double.
std::string format_double(double v);

void write_csv(std::ostream& out, const ConditionalMatrix& m);
void write_csv(std::ostream& out, const ClickDistribution& d);

void write_f64_le(const std::string& path, std::span<const double> values);
std::vector<double> read_f64_le(const std::string& path);

}  // namespace snspd
