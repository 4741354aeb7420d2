#include "coexplore/mission_sim.hpp"

#include "coexplore/serialization.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

namespace coexplore
{

namespace
{

constexpr char const* kTraceSchema = "coexplore.trace";
constexpr int kTraceVersion = 1;

constexpr std::uint64_t kPlannerStream = 1;
constexpr std::uint64_t kSelectorStream = 2;

int sign(int v)
{
    return (v > 0) - (v < 0);
}

} // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt)
{
    // splitmix64 finaliser over the combined words
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

void MissionConfig::validate(int width, int height) const
{
    if (t_max < 1)
    {
        throw ConfigurationError("t_max must be at least 1");
    }
    if (labeling_period < 1)
    {
        throw ConfigurationError("labeling_period must be at least 1");
    }
    if (trajectories.count < 1 || trajectories.primitives_per_trajectory < 1 || trajectories.primitive_length < 1)
    {
        throw ConfigurationError("trajectory count, primitives per trajectory and primitive length must be positive");
    }
    if (!(gamma >= 0.0 && gamma <= 1.0))
    {
        throw ConfigurationError("gamma must lie in [0, 1]");
    }
    if (pool_cap < 1)
    {
        throw ConfigurationError("pool_cap must be at least 1");
    }
    if (!(fit.reg_strength >= 0.0) || fit.max_iters < 1 || !(fit.tolerance > 0.0))
    {
        throw ConfigurationError("fit settings need reg_strength >= 0, max_iters >= 1 and tolerance > 0");
    }
    auto const s = start_for(width, height);
    if (s.x < 0 || s.y < 0 || s.x >= width || s.y >= height)
    {
        throw ConfigurationError("start location lies outside the map");
    }
}

GridLocation MissionConfig::start_for(int width, int height) const
{
    return start.value_or(GridLocation{width / 2, height / 2});
}

int simulated_operator(InterestMap const& interest_map, GridLocation loc)
{
    return interest_map.label_at(loc);
}

std::optional<int> SimulatedOperator::answer(LabelRequest const& request)
{
    return simulated_operator(*map_, request.location);
}

Mission::Mission(MissionConfig config, TopicField const& field, InterestMap const* truth, std::string map_id)
    : config_(std::move(config)),
      field_(&field),
      truth_(truth),
      map_id_(std::move(map_id)),
      planner_rng_(mix_seed(config_.seed, kPlannerStream)),
      selector_rng_(mix_seed(config_.seed, kSelectorStream)),
      params_(uninformed_params(field.topics()))
{
    config_.validate(field.width(), field.height());
    if (truth_ != nullptr && (truth_->width() != field.width() || truth_->height() != field.height()))
    {
        throw ConfigurationError("interest map dimensions do not match the topic field");
    }
    state_.location = config_.start_for(field.width(), field.height());
    state_.visited = VisitedSet(field.width(), field.height());
    labeled_.reserve(static_cast<std::size_t>(config_.t_max));
    steps_.reserve(static_cast<std::size_t>(config_.t_max));
}

bool Mission::label_due() const
{
    return in_flight_.has_value() && (t_ + 1) - in_flight_->requested_at >= config_.labeling_period;
}

std::optional<long> Mission::cumulative_reward() const
{
    if (truth_ == nullptr)
    {
        return std::nullopt;
    }
    return cumulative_;
}

QueryPool Mission::build_pool() const
{
    QueryPool pool;
    for (std::size_t id = 0; id < steps_.size(); ++id)
    {
        if (labeled_[id] || (in_flight_ && in_flight_->observation_id == id))
        {
            continue;
        }
        pool.push_back({id, steps_[id].feature, steps_[id].location});
    }
    return pool;
}

std::optional<std::size_t> Mission::select_query()
{
    switch (config_.selector)
    {
    case SelectorKind::Random:
        return select_random(build_pool(), selector_rng_);
    case SelectorKind::Uniform: {
        auto const latest = steps_.size() - 1;
        return select_uniform(t_, config_.labeling_period,
                              labeled_[latest] ? std::nullopt : std::optional<std::size_t>(latest));
    }
    case SelectorKind::Entropy:
        return select_entropy(build_pool(), params_).id;
    case SelectorKind::InfoGain:
        return select_info_gain(build_pool(), params_, dataset_, config_.fit, config_.pool_cap).id;
    case SelectorKind::Regret:
    {
        RegretRegeneration regenerate{state_, config_.trajectories, selector_rng_};
        return select_regret(build_pool(), params_, dataset_,
                             RegretContext{*field_, state_.visited, config_.gamma, plan_}, config_.fit,
                             config_.pool_cap, config_.regenerate_regret_candidates ? &regenerate : nullptr)
            .id;
    }
    }
    return std::nullopt;
}

StepRecord const& Mission::step(LabelOracle& oracle)
{
    if (finished())
    {
        throw std::logic_error("mission already finished");
    }
    ++t_;

    // Move. The initial plan is the start cell itself.
    if (t_ > 1)
    {
        auto const& next = plan_.chosen();
        auto const per_primitive = static_cast<std::size_t>(config_.trajectories.primitive_length);
        state_.location = next.cells.at(cursor_);
        state_.heading = next.headings.at(std::min(cursor_ / per_primitive, next.headings.size() - 1));
        ++cursor_;
    }

    // Observe.
    StepRecord record;
    record.t = t_;
    record.location = state_.location;
    record.heading = state_.heading;
    auto const z = field_->topic_at(state_.location);
    record.feature.assign(z.begin(), z.end());
    record.predicted = predict(params_, z);
    bool const fresh = state_.visited.insert(state_.location);
    if (truth_ != nullptr)
    {
        int const gained = fresh ? truth_->label_at(state_.location) : 0;
        cumulative_ += gained;
        record.reward = gained;
        record.cumulative_reward = cumulative_;
    }
    steps_.push_back(record);
    labeled_.push_back(0);

    // Receive a label whose labelling period has elapsed.
    if (in_flight_ && t_ - in_flight_->requested_at >= config_.labeling_period)
    {
        if (auto label = oracle.answer(*in_flight_))
        {
            if (*label != 0 && *label != 1)
            {
                throw DataError("operator returned a non-binary label");
            }
            dataset_.push_back({in_flight_->feature, *label});
            labeled_[in_flight_->observation_id] = 1;
            params_ = fit(dataset_, config_.fit);
            steps_.back().received = ReceivedLabel{in_flight_->observation_id, *label};
            in_flight_.reset();
        }
    }

    if (config_.replan == ReplanPolicy::EveryStep || plan_.candidates.empty() ||
        cursor_ >= plan_.chosen().cells.size())
    {
        plan_ = plan_trajectory(state_, *field_, params_, config_.trajectories, config_.gamma, planner_rng_);
        cursor_ = 0;
    }
    steps_.back().best_score = plan_.scores[plan_.best];
    steps_.back().candidates = plan_.candidates.size();

    if (!in_flight_)
    {
        if (auto id = select_query())
        {
            auto const& observed = steps_[*id];
            in_flight_ = LabelRequest{*id, observed.location, observed.feature, t_};
            steps_.back().requested = *id;
        }
    }
    steps_.back().dataset_size = dataset_.size();
    return steps_.back();
}

MissionTrace Mission::trace() const
{
    MissionTrace trace;
    trace.config = config_;
    trace.field = field_->provenance();
    trace.width = field_->width();
    trace.height = field_->height();
    trace.topics = field_->topics();
    trace.map_id = map_id_;
    trace.steps = steps_;
    trace.final_params = params_;
    trace.dropped_query = in_flight_;
    return trace;
}

MissionTrace run_mission(MissionConfig const& config, TopicField const& field, InterestMap const& interest_map,
                         LabelOracle& oracle, std::string map_id)
{
    Mission mission(config, field, &interest_map, std::move(map_id));
    while (!mission.finished())
    {
        mission.step(oracle);
    }
    return mission.trace();
}

MissionTrace run_mission(MissionConfig const& config, TopicField const& field, InterestMap const& interest_map,
                         std::string map_id)
{
    SimulatedOperator oracle(interest_map);
    return run_mission(config, field, interest_map, oracle, std::move(map_id));
}

MetricsRecord compute_metrics(MissionTrace const& trace, TopicField const& field, InterestMap const& interest_map)
{
    if (trace.steps.empty())
    {
        throw ParameterError("cannot compute metrics of an empty trace");
    }
    VisitedSet visited(interest_map.width(), interest_map.height());
    long reward = 0;
    MetricsRecord metrics;
    for (auto const& step : trace.steps)
    {
        if (visited.insert(step.location))
        {
            reward += interest_map.label_at(step.location);
        }
        if (step.requested)
        {
            ++metrics.queries_made;
        }
    }
    metrics.reward_per_timestep = static_cast<double>(reward) / static_cast<double>(trace.config.t_max);
    metrics.unique_cells_visited = static_cast<double>(visited.size());
    metrics.final_map_loss = map_cross_entropy(trace.final_params, field, interest_map);
    return metrics;
}

std::vector<Trajectory> lawnmower_trajectories(int width, int height, GridLocation start, int t_max)
{
    if (width < 1 || height < 1 || t_max < 1)
    {
        throw ParameterError("lawnmower needs a nonempty map and t_max >= 1");
    }
    if (start.x < 0 || start.y < 0 || start.x >= width || start.y >= height)
    {
        throw ParameterError("lawnmower start lies outside the map");
    }
    std::vector<Trajectory> sweeps;
    std::array<GridLocation, 4> const corners{{{0, 0}, {width - 1, 0}, {0, height - 1}, {width - 1, height - 1}}};
    for (auto const corner : corners)
    {
        for (bool const rows_first : {true, false})
        {
            std::vector<GridLocation> path{start};
            GridLocation at = start;
            while (at != corner)
            {
                at.x += sign(corner.x - at.x);
                at.y += sign(corner.y - at.y);
                path.push_back(at);
            }
            // Sweep lines run along one axis, stepping one cell across the other.
            int const along_dir = rows_first ? (corner.x == 0 ? 1 : -1) : (corner.y == 0 ? 1 : -1);
            int const across_dir = rows_first ? (corner.y == 0 ? 1 : -1) : (corner.x == 0 ? 1 : -1);
            int const lines = rows_first ? height : width;
            int const line_length = rows_first ? width : height;
            int dir = along_dir;
            for (int line = 0; line < lines; ++line)
            {
                if (line > 0)
                {
                    (rows_first ? at.y : at.x) += across_dir;
                    path.push_back(at);
                }
                for (int k = 1; k < line_length; ++k)
                {
                    (rows_first ? at.x : at.y) += dir;
                    path.push_back(at);
                }
                dir = -dir;
            }
            std::vector<GridLocation> cells;
            cells.reserve(static_cast<std::size_t>(t_max));
            // Ping-pong along the completed path until t_max cells are listed.
            std::ptrdiff_t index = 0;
            std::ptrdiff_t direction = 1;
            auto const last = static_cast<std::ptrdiff_t>(path.size()) - 1;
            while (static_cast<int>(cells.size()) < t_max)
            {
                cells.push_back(path[static_cast<std::size_t>(index)]);
                if (last == 0)
                {
                    continue;
                }
                if (index + direction < 0 || index + direction > last)
                {
                    direction = -direction;
                }
                index += direction;
            }
            Trajectory sweep;
            sweep.cells = std::move(cells);
            sweeps.push_back(std::move(sweep));
        }
    }
    return sweeps;
}

MetricsRecord run_lawnmower(InterestMap const& interest_map, int t_max, std::optional<GridLocation> start)
{
    auto const origin = start.value_or(GridLocation{interest_map.width() / 2, interest_map.height() / 2});
    auto const sweeps = lawnmower_trajectories(interest_map.width(), interest_map.height(), origin, t_max);
    MetricsRecord metrics;
    for (auto const& sweep : sweeps)
    {
        VisitedSet visited(interest_map.width(), interest_map.height());
        long reward = 0;
        for (auto const cell : sweep.cells)
        {
            if (visited.insert(cell))
            {
                reward += interest_map.label_at(cell);
            }
        }
        metrics.reward_per_timestep += static_cast<double>(reward) / t_max;
        metrics.unique_cells_visited += static_cast<double>(visited.size());
    }
    metrics.reward_per_timestep /= static_cast<double>(sweeps.size());
    metrics.unique_cells_visited /= static_cast<double>(sweeps.size());
    metrics.final_map_loss = std::numbers::ln2;
    return metrics;
}

void write_trace(MissionTrace const& trace, std::ostream& out)
{
    Json header;
    header["schema"] = kTraceSchema;
    header["version"] = kTraceVersion;
    header["config"] = to_json_value(trace.config);
    header["seed"] = trace.config.seed;
    header["field"] = {{"width", trace.width},
                       {"height", trace.height},
                       {"topics", trace.topics},
                       {"generator", trace.field.generator},
                       {"parameters", trace.field.parameters},
                       {"seed", trace.field.seed}};
    header["map_id"] = trace.map_id;
    out << header.dump() << '\n';
    for (auto const& step : trace.steps)
    {
        out << to_json_value(step).dump() << '\n';
    }
    Json footer;
    footer["final_params"] = to_json_value(trace.final_params);
    if (trace.dropped_query)
    {
        footer["dropped_query"] = {{"id", trace.dropped_query->observation_id},
                                   {"x", trace.dropped_query->location.x},
                                   {"y", trace.dropped_query->location.y},
                                   {"feature", trace.dropped_query->feature},
                                   {"requested_at", trace.dropped_query->requested_at}};
    }
    else
    {
        footer["dropped_query"] = nullptr;
    }
    out << footer.dump() << '\n';
}

std::string serialize_trace(MissionTrace const& trace)
{
    std::ostringstream out;
    write_trace(trace, out);
    return out.str();
}

MissionTrace read_trace(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line))
    {
        throw ParameterError("trace is empty");
    }
    MissionTrace trace;
    try
    {
        auto const header = Json::parse(line);
        if (header.at("schema") != kTraceSchema || header.at("version") != kTraceVersion)
        {
            throw ParameterError("unsupported trace schema");
        }
        trace.config = mission_config_from_json(header.at("config"));
        auto const& field = header.at("field");
        trace.width = field.at("width");
        trace.height = field.at("height");
        trace.topics = field.at("topics");
        trace.field = {field.at("generator"), field.at("parameters"), field.at("seed")};
        trace.map_id = header.at("map_id");

        bool closed = false;
        while (std::getline(in, line))
        {
            if (line.empty())
            {
                continue;
            }
            auto const record = Json::parse(line);
            if (record.contains("final_params"))
            {
                trace.final_params = params_from_json(record.at("final_params"));
                if (auto const& dq = record.at("dropped_query"); !dq.is_null())
                {
                    trace.dropped_query = LabelRequest{dq.at("id"), {dq.at("x"), dq.at("y")},
                                                       dq.at("feature").get<std::vector<double>>(),
                                                       dq.at("requested_at")};
                }
                closed = true;
                break;
            }
            trace.steps.push_back(step_record_from_json(record));
        }
        if (!closed)
        {
            throw ParameterError("trace has no closing record");
        }
    }
    catch (Json::exception const& e)
    {
        throw ParameterError(std::string("malformed trace: ") + e.what());
    }
    return trace;
}

} // namespace coexplore
