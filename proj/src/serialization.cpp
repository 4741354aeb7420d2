#include "coexplore/serialization.hpp"

namespace coexplore
{

namespace
{

template <class T>
void read_if(Json const& json, char const* key, T& target)
{
    if (auto it = json.find(key); it != json.end() && !it->is_null())
    {
        target = it->get<T>();
    }
}

} // namespace

Json to_json_value(MissionConfig const& config)
{
    Json json;
    json["t_max"] = config.t_max;
    json["labeling_period"] = config.labeling_period;
    json["selector"] = std::string(selector_name(config.selector));
    json["n_trajectories"] = config.trajectories.count;
    json["primitives_per_traj"] = config.trajectories.primitives_per_trajectory;
    json["primitive_length"] = config.trajectories.primitive_length;
    json["max_resample_attempts"] = config.trajectories.max_attempts;
    json["gamma"] = config.gamma;
    json["start"] = config.start ? Json{{"x", config.start->x}, {"y", config.start->y}} : Json(nullptr);
    json["seed"] = config.seed;
    json["fit"] = {{"reg_strength", config.fit.reg_strength},
                   {"max_iters", config.fit.max_iters},
                   {"tolerance", config.fit.tolerance}};
    json["pool_cap"] = config.pool_cap == kUnlimitedPool ? Json(nullptr) : Json(config.pool_cap);
    json["replan"] = config.replan == ReplanPolicy::EveryStep ? "every_step" : "on_completion";
    json["regret_candidates"] = config.regenerate_regret_candidates ? "regenerate" : "shared";
    return json;
}

MissionConfig mission_config_from_json(Json const& json, MissionConfig base)
{
    if (!json.is_object())
    {
        throw ConfigurationError("mission config must be an object");
    }
    try
    {
        read_if(json, "t_max", base.t_max);
        read_if(json, "labeling_period", base.labeling_period);
        if (auto it = json.find("selector"); it != json.end())
        {
            base.selector = parse_selector(it->get<std::string>());
        }
        read_if(json, "n_trajectories", base.trajectories.count);
        read_if(json, "primitives_per_traj", base.trajectories.primitives_per_trajectory);
        read_if(json, "primitive_length", base.trajectories.primitive_length);
        read_if(json, "max_resample_attempts", base.trajectories.max_attempts);
        read_if(json, "gamma", base.gamma);
        if (auto it = json.find("start"); it != json.end())
        {
            base.start = it->is_null() ? std::nullopt
                                       : std::optional<GridLocation>(GridLocation{it->at("x").get<int>(),
                                                                                  it->at("y").get<int>()});
        }
        read_if(json, "seed", base.seed);
        if (auto it = json.find("fit"); it != json.end())
        {
            read_if(*it, "reg_strength", base.fit.reg_strength);
            read_if(*it, "max_iters", base.fit.max_iters);
            read_if(*it, "tolerance", base.fit.tolerance);
        }
        if (auto it = json.find("pool_cap"); it != json.end())
        {
            base.pool_cap = it->is_null() ? kUnlimitedPool : it->get<std::size_t>();
        }
        if (auto it = json.find("replan"); it != json.end())
        {
            auto const policy = it->get<std::string>();
            if (policy != "every_step" && policy != "on_completion")
            {
                throw ConfigurationError("replan must be every_step or on_completion");
            }
            base.replan = policy == "every_step" ? ReplanPolicy::EveryStep : ReplanPolicy::OnCompletion;
        }
        if (auto it = json.find("regret_candidates"); it != json.end())
        {
            auto const mode = it->get<std::string>();
            if (mode != "shared" && mode != "regenerate")
            {
                throw ConfigurationError("regret_candidates must be shared or regenerate");
            }
            base.regenerate_regret_candidates = mode == "regenerate";
        }
    }
    catch (ParameterError const& e)
    {
        throw ConfigurationError(e.what());
    }
    catch (Json::exception const& e)
    {
        throw ConfigurationError(std::string("malformed mission config: ") + e.what());
    }
    return base;
}

Json to_json_value(RewardModelParams const& params)
{
    return {{"d", params.weights.size()},
            {"weights", params.weights},
            {"bias", params.bias},
            {"classes_seen", {params.seen_negative, params.seen_positive}}};
}

RewardModelParams params_from_json(Json const& json)
{
    RewardModelParams params;
    params.weights = json.at("weights").get<std::vector<double>>();
    params.bias = json.at("bias").get<double>();
    params.seen_negative = json.at("classes_seen").at(0).get<bool>();
    params.seen_positive = json.at("classes_seen").at(1).get<bool>();
    return params;
}

Json to_json_value(StepRecord const& r)
{
    Json json;
    json["t"] = r.t;
    json["x"] = r.location.x;
    json["y"] = r.location.y;
    json["heading"] = r.heading;
    json["feature"] = r.feature;
    json["predicted"] = r.predicted;
    json["reward"] = r.reward ? Json(*r.reward) : Json(nullptr);
    json["cumulative_reward"] = r.cumulative_reward ? Json(*r.cumulative_reward) : Json(nullptr);
    json["received"] = r.received ? Json{{"id", r.received->observation_id}, {"label", r.received->label}}
                                  : Json(nullptr);
    json["requested"] = r.requested ? Json(*r.requested) : Json(nullptr);
    json["dataset_size"] = r.dataset_size;
    json["best_score"] = r.best_score;
    json["candidates"] = r.candidates;
    return json;
}

StepRecord step_record_from_json(Json const& json)
{
    StepRecord r;
    r.t = json.at("t").get<int>();
    r.location = {json.at("x").get<int>(), json.at("y").get<int>()};
    r.heading = json.at("heading").get<double>();
    r.feature = json.at("feature").get<std::vector<double>>();
    r.predicted = json.at("predicted").get<double>();
    if (!json.at("reward").is_null())
    {
        r.reward = json.at("reward").get<int>();
    }
    if (!json.at("cumulative_reward").is_null())
    {
        r.cumulative_reward = json.at("cumulative_reward").get<long>();
    }
    if (auto const& rec = json.at("received"); !rec.is_null())
    {
        r.received = ReceivedLabel{rec.at("id").get<std::size_t>(), rec.at("label").get<int>()};
    }
    if (!json.at("requested").is_null())
    {
        r.requested = json.at("requested").get<std::size_t>();
    }
    r.dataset_size = json.at("dataset_size").get<std::size_t>();
    r.best_score = json.at("best_score").get<double>();
    r.candidates = json.at("candidates").get<std::size_t>();
    return r;
}

} // namespace coexplore
