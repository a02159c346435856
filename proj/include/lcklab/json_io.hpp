#pragma once

#include <string>

#include <json.hpp>

#include "lcklab/config.hpp"

namespace lcklab {

/// Row-major list of [re, im] pairs.
nlohmann::json matrix_json(const MatC& M);
nlohmann::json vector_json(const VecC& v);
VecC vector_from_json(const nlohmann::json& j);
MatC matrix_from_json(const nlohmann::json& j, Eigen::Index n);

/// Non-finite doubles become null.
nlohmann::json number_json(double x);
/// null reads back as NaN.
double number_from_json(const nlohmann::json& j);

/// Pretty JSON with every floating-point number printed with 17 significant
/// digits.
std::string dump_json(const nlohmann::json& j, int indent = 2);

nlohmann::json config_json(const RunConfig& cfg);
RunConfig config_from_json(const nlohmann::json& j);

}  // namespace lcklab
