#pragma once

#include "coexplore/reward_model.hpp"
#include "coexplore/semantic_field.hpp"

#include <cstdint>
#include <vector>

namespace coexplore
{

struct MotionPrimitive
{
    double relative_heading = 0.0; // degrees
    int length = 5;                // unit steps
};

/// The 13 primitives at -135 + 22.5 k degrees, k = 0..12.
std::vector<MotionPrimitive> motion_primitive_set(int length = 5);

/// A rasterised candidate path. `cells` excludes the starting cell.
struct Trajectory
{
    std::vector<GridLocation> cells;
    /// Absolute heading (degrees) after each primitive.
    std::vector<double> headings;

    friend bool operator==(Trajectory const&, Trajectory const&) = default;
};

/// Grid-backed set of visited cells.
class VisitedSet
{
  public:
    VisitedSet() = default;
    VisitedSet(int width, int height);

    bool contains(GridLocation loc) const;
    /// Returns true when the cell was not already present.
    bool insert(GridLocation loc);
    std::size_t size() const { return count_; }
    int width() const { return width_; }
    int height() const { return height_; }

    friend bool operator==(VisitedSet const&, VisitedSet const&) = default;

  private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> cells_;
    std::size_t count_ = 0;
};

struct PlannerState
{
    GridLocation location;
    double heading = 0.0; // degrees, 0 = +x
    VisitedSet visited;
};

/**
 * Rasterises one primitive starting from `from` with absolute heading
 * `heading`: `length` 8-neighbour steps along the line, the major axis
 * advancing one cell per step.
 */
std::vector<GridLocation> rasterize_primitive(GridLocation from, double heading, int length);

struct TrajectoryConfig
{
    int count = 50;
    int primitives_per_trajectory = 5;
    int primitive_length = 5;
    /// Resampling attempts for a primitive that leaves the map before clamping.
    int max_attempts = 100;
};

std::vector<Trajectory> generate_trajectories(PlannerState const& state, int width, int height,
                                              TrajectoryConfig const& config, Rng& rng);

/**
 * Sum of gamma^j g(z(x_j)) over the unit steps; steps on visited cells, or on
 * cells repeated earlier in the same trajectory, contribute nothing.
 */
double score_trajectory(Trajectory const& trajectory, TopicField const& field, RewardModelParams const& params,
                        VisitedSet const& visited, double gamma);

struct CandidatePlan
{
    std::vector<Trajectory> candidates;
    std::vector<double> scores;
    std::size_t best = 0;

    Trajectory const& chosen() const { return candidates.at(best); }
};

/// First index of the maximum; NaN-free input assumed.
std::size_t argmax_first(std::vector<double> const& values);

CandidatePlan plan_trajectory(PlannerState const& state, TopicField const& field, RewardModelParams const& params,
                              TrajectoryConfig const& config, double gamma, Rng& rng);

/**
 * Rescoring helper for a fixed candidate set. The fresh cells and their
 * discount weights depend only on the set and the visited cells, so they are
 * gathered once; each rescore then predicts every distinct cell once.
 */
class CandidateScorer
{
  public:
    CandidateScorer(std::vector<Trajectory> const& candidates, TopicField const& field, VisitedSet const& visited,
                    double gamma);

    std::vector<double> scores(RewardModelParams const& params) const;
    std::size_t candidate_count() const { return terms_.size(); }

  private:
    struct Term
    {
        std::size_t cell; // index into cells_
        double weight;
    };
    TopicField const* field_;
    std::vector<std::size_t> cells_; // field cell indices
    std::vector<std::vector<Term>> terms_;
};

} // namespace coexplore
