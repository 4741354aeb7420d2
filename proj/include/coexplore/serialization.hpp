#pragma once

#include "coexplore/mission_sim.hpp"

#include <json.hpp>

namespace coexplore
{

using Json = nlohmann::json;

Json to_json_value(MissionConfig const& config);
/// Missing keys keep their defaults; unknown selector names throw ConfigurationError.
MissionConfig mission_config_from_json(Json const& json, MissionConfig base = {});

Json to_json_value(RewardModelParams const& params);
RewardModelParams params_from_json(Json const& json);

Json to_json_value(StepRecord const& record);
StepRecord step_record_from_json(Json const& json);

} // namespace coexplore
