#include "coexplore/trajectory_planner.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>

namespace coexplore
{

std::vector<MotionPrimitive> motion_primitive_set(int length)
{
    std::vector<MotionPrimitive> set;
    set.reserve(13);
    for (int k = 0; k < 13; ++k)
    {
        set.push_back({-135.0 + 22.5 * k, length});
    }
    return set;
}

VisitedSet::VisitedSet(int width, int height)
    : width_(width), height_(height), cells_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0)
{
    if (width <= 0 || height <= 0)
    {
        throw ParameterError("visited set dimensions must be positive");
    }
}

bool VisitedSet::contains(GridLocation loc) const
{
    if (loc.x < 0 || loc.y < 0 || loc.x >= width_ || loc.y >= height_)
    {
        return false;
    }
    return cells_[static_cast<std::size_t>(loc.y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(loc.x)] != 0;
}

bool VisitedSet::insert(GridLocation loc)
{
    if (loc.x < 0 || loc.y < 0 || loc.x >= width_ || loc.y >= height_)
    {
        throw IndexError("visited cell outside map");
    }
    auto& slot = cells_[static_cast<std::size_t>(loc.y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(loc.x)];
    if (slot != 0)
    {
        return false;
    }
    slot = 1;
    ++count_;
    return true;
}

std::vector<GridLocation> rasterize_primitive(GridLocation from, double heading, int length)
{
    double const radians = heading * std::numbers::pi / 180.0;
    double dx = std::cos(radians);
    double dy = std::sin(radians);
    double const major = std::max(std::abs(dx), std::abs(dy));
    dx /= major;
    dy /= major;
    std::vector<GridLocation> cells;
    cells.reserve(static_cast<std::size_t>(length));
    for (int k = 1; k <= length; ++k)
    {
        cells.push_back({from.x + static_cast<int>(std::floor(k * dx + 0.5)),
                         from.y + static_cast<int>(std::floor(k * dy + 0.5))});
    }
    return cells;
}

namespace
{

double wrap_heading(double heading)
{
    heading = std::fmod(heading, 360.0);
    if (heading <= -180.0)
    {
        heading += 360.0;
    }
    else if (heading > 180.0)
    {
        heading -= 360.0;
    }
    return heading;
}

} // namespace

std::vector<Trajectory> generate_trajectories(PlannerState const& state, int width, int height,
                                              TrajectoryConfig const& config, Rng& rng)
{
    if (config.count < 1 || config.primitives_per_trajectory < 1 || config.primitive_length < 1)
    {
        throw ParameterError("trajectory count, primitive count and length must be positive");
    }
    if (state.location.x < 0 || state.location.y < 0 || state.location.x >= width || state.location.y >= height)
    {
        throw ParameterError("planner state lies outside the map");
    }
    auto const primitives = motion_primitive_set(config.primitive_length);
    std::uniform_int_distribution<std::size_t> pick(0, primitives.size() - 1);
    auto const in_bounds = [&](GridLocation c) { return c.x >= 0 && c.y >= 0 && c.x < width && c.y < height; };

    std::vector<Trajectory> out;
    out.reserve(static_cast<std::size_t>(config.count));
    for (int n = 0; n < config.count; ++n)
    {
        Trajectory traj;
        traj.cells.reserve(static_cast<std::size_t>(config.primitives_per_trajectory * config.primitive_length));
        GridLocation position = state.location;
        double heading = state.heading;
        for (int p = 0; p < config.primitives_per_trajectory; ++p)
        {
            std::vector<GridLocation> segment;
            double segment_heading = heading;
            for (int attempt = 0; attempt < std::max(1, config.max_attempts); ++attempt)
            {
                segment_heading = wrap_heading(heading + primitives[pick(rng)].relative_heading);
                segment = rasterize_primitive(position, segment_heading, config.primitive_length);
                if (std::all_of(segment.begin(), segment.end(), in_bounds))
                {
                    break;
                }
            }
            for (auto& cell : segment)
            {
                cell.x = std::clamp(cell.x, 0, width - 1);
                cell.y = std::clamp(cell.y, 0, height - 1);
            }
            traj.cells.insert(traj.cells.end(), segment.begin(), segment.end());
            traj.headings.push_back(segment_heading);
            heading = segment_heading;
            position = segment.back();
        }
        out.push_back(std::move(traj));
    }
    return out;
}

double score_trajectory(Trajectory const& trajectory, TopicField const& field, RewardModelParams const& params,
                        VisitedSet const& visited, double gamma)
{
    double score = 0.0;
    double discount = 1.0;
    for (std::size_t j = 0; j < trajectory.cells.size(); ++j)
    {
        auto const cell = trajectory.cells[j];
        bool const repeat = std::find(trajectory.cells.begin(), trajectory.cells.begin() + static_cast<std::ptrdiff_t>(j),
                                      cell) != trajectory.cells.begin() + static_cast<std::ptrdiff_t>(j);
        if (!visited.contains(cell) && !repeat)
        {
            score += discount * predict(params, field.topic_at(cell));
        }
        discount *= gamma;
    }
    return score;
}

std::size_t argmax_first(std::vector<double> const& values)
{
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
    {
        if (values[i] > values[best])
        {
            best = i;
        }
    }
    return best;
}

CandidatePlan plan_trajectory(PlannerState const& state, TopicField const& field, RewardModelParams const& params,
                              TrajectoryConfig const& config, double gamma, Rng& rng)
{
    CandidatePlan plan;
    plan.candidates = generate_trajectories(state, field.width(), field.height(), config, rng);
    CandidateScorer scorer(plan.candidates, field, state.visited, gamma);
    plan.scores = scorer.scores(params);
    plan.best = argmax_first(plan.scores);
    return plan;
}

CandidateScorer::CandidateScorer(std::vector<Trajectory> const& candidates, TopicField const& field,
                                 VisitedSet const& visited, double gamma)
    : field_(&field)
{
    std::unordered_map<std::size_t, std::size_t> slot_of;
    terms_.resize(candidates.size());
    std::vector<std::size_t> seen;
    for (std::size_t i = 0; i < candidates.size(); ++i)
    {
        seen.clear();
        double discount = 1.0;
        for (auto const cell : candidates[i].cells)
        {
            if (!field.contains(cell))
            {
                throw IndexError("candidate trajectory leaves the field");
            }
            auto const index = field.index_of(cell);
            if (!visited.contains(cell) && std::find(seen.begin(), seen.end(), index) == seen.end())
            {
                auto [it, inserted] = slot_of.emplace(index, cells_.size());
                if (inserted)
                {
                    cells_.push_back(index);
                }
                terms_[i].push_back({it->second, discount});
            }
            seen.push_back(index);
            discount *= gamma;
        }
    }
}

std::vector<double> CandidateScorer::scores(RewardModelParams const& params) const
{
    std::vector<double> g(cells_.size());
    for (std::size_t c = 0; c < cells_.size(); ++c)
    {
        g[c] = predict(params, field_->cell(cells_[c]));
    }
    std::vector<double> out(terms_.size(), 0.0);
    for (std::size_t i = 0; i < terms_.size(); ++i)
    {
        double s = 0.0;
        for (auto const& term : terms_[i])
        {
            s += term.weight * g[term.cell];
        }
        out[i] = s;
    }
    return out;
}

} // namespace coexplore
