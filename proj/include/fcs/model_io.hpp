#pragma once

#include <nlohmann/json_fwd.hpp>

#include "fcs/quantum_model.hpp"
#include "fcs/scattering_models.hpp"

namespace fcs {

/// {dim, U, rho, Q}, matrices as row-major nested arrays of [re, im] pairs.
/// Round-trips exactly at double precision.
nlohmann::json model_to_json(const QuantumModel& model);
QuantumModel model_from_json(const nlohmann::json& j);

nlohmann::json two_circle_spec_to_json(const TwoCircleSpec& spec);
TwoCircleSpec two_circle_spec_from_json(const nlohmann::json& j);

}  // namespace fcs
