#pragma once

#include "coexplore/query_selection.hpp"
#include "coexplore/reward_model.hpp"
#include "coexplore/semantic_field.hpp"
#include "coexplore/trajectory_planner.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace coexplore
{

struct ConfigurationError : std::invalid_argument
{
    using std::invalid_argument::invalid_argument;
};

enum class ReplanPolicy
{
    EveryStep,
    /// Follow the chosen trajectory to its end before planning again.
    OnCompletion,
};

struct MissionConfig
{
    int t_max = 300;
    /// Timesteps between requesting a label and receiving it.
    int labeling_period = 1;
    SelectorKind selector = SelectorKind::Regret;
    TrajectoryConfig trajectories;
    double gamma = 1.0;
    /// Defaults to the map centre.
    std::optional<GridLocation> start;
    std::uint64_t seed = 0;
    FitConfig fit;
    std::size_t pool_cap = kUnlimitedPool;
    ReplanPolicy replan = ReplanPolicy::EveryStep;
    /// Regret draws a fresh candidate set per temporary label instead of reusing the plan's.
    bool regenerate_regret_candidates = false;

    /// Throws ConfigurationError when the config cannot run on a width x height map.
    void validate(int width, int height) const;
    GridLocation start_for(int width, int height) const;
};

struct LabelRequest
{
    std::size_t observation_id = 0;
    GridLocation location;
    std::vector<double> feature;
    int requested_at = 0;

    friend bool operator==(LabelRequest const&, LabelRequest const&) = default;
};

/// Whoever answers label queries: the simulated operator, a scripted responder or a human.
class LabelOracle
{
  public:
    virtual ~LabelOracle() = default;
    /// The label for the request, or nothing if no answer is available yet.
    virtual std::optional<int> answer(LabelRequest const& request) = 0;
};

int simulated_operator(InterestMap const& interest_map, GridLocation loc);

class SimulatedOperator final : public LabelOracle
{
  public:
    explicit SimulatedOperator(InterestMap const& interest_map) : map_(&interest_map) {}
    std::optional<int> answer(LabelRequest const& request) override;

  private:
    InterestMap const* map_;
};

struct ReceivedLabel
{
    std::size_t observation_id = 0;
    int label = 0;

    friend bool operator==(ReceivedLabel const&, ReceivedLabel const&) = default;
};

struct StepRecord
{
    int t = 0;
    GridLocation location;
    double heading = 0.0;
    std::vector<double> feature;
    /// Model belief g(z) at the new cell, before this step's label update.
    double predicted = 0.0;
    /// Reward gained this step and running total; empty without ground truth.
    std::optional<int> reward;
    std::optional<long> cumulative_reward;
    std::optional<ReceivedLabel> received;
    std::optional<std::size_t> requested;
    std::size_t dataset_size = 0;
    double best_score = 0.0;
    std::size_t candidates = 0;

    friend bool operator==(StepRecord const&, StepRecord const&) = default;
};

struct MissionTrace
{
    MissionConfig config;
    FieldProvenance field;
    int width = 0;
    int height = 0;
    int topics = 0;
    std::string map_id;
    std::vector<StepRecord> steps;
    RewardModelParams final_params;
    /// Query still in flight when the mission ended; never labelled.
    std::optional<LabelRequest> dropped_query;
};

/**
 * Closed-loop co-robotic exploration. Each step() runs one timestep in the
 * order: move, observe, receive a ready label and refit, replan, and (when
 * idle) select and dispatch the next query. The optional ground-truth map is
 * used for reward bookkeeping only.
 */
class Mission
{
  public:
    Mission(MissionConfig config, TopicField const& field, InterestMap const* truth = nullptr,
            std::string map_id = {});

    bool finished() const { return t_ >= config_.t_max; }
    int t() const { return t_; }

    /// True when the in-flight query becomes deliverable on the next step.
    bool label_due() const;

    StepRecord const& step(LabelOracle& oracle);

    MissionConfig const& config() const { return config_; }
    TopicField const& field() const { return *field_; }
    std::vector<StepRecord> const& steps() const { return steps_; }
    LabeledDataset const& dataset() const { return dataset_; }
    RewardModelParams const& params() const { return params_; }
    std::optional<LabelRequest> const& in_flight() const { return in_flight_; }
    PlannerState const& planner_state() const { return state_; }
    CandidatePlan const& plan() const { return plan_; }
    std::optional<long> cumulative_reward() const;

    /// Trace of the steps so far; an outstanding query is reported as dropped.
    MissionTrace trace() const;

  private:
    QueryPool build_pool() const;
    std::optional<std::size_t> select_query();

    MissionConfig config_;
    TopicField const* field_;
    InterestMap const* truth_;
    std::string map_id_;
    Rng planner_rng_;
    Rng selector_rng_;
    int t_ = 0;
    PlannerState state_;
    std::vector<std::uint8_t> labeled_;
    LabeledDataset dataset_;
    RewardModelParams params_;
    std::optional<LabelRequest> in_flight_;
    CandidatePlan plan_;
    std::size_t cursor_ = 0; // next cell of the chosen trajectory
    std::vector<StepRecord> steps_;
    long cumulative_ = 0;
};

MissionTrace run_mission(MissionConfig const& config, TopicField const& field, InterestMap const& interest_map,
                         std::string map_id = {});
MissionTrace run_mission(MissionConfig const& config, TopicField const& field, InterestMap const& interest_map,
                         LabelOracle& oracle, std::string map_id = {});

struct MetricsRecord
{
    double reward_per_timestep = 0.0;
    double final_map_loss = 0.0;
    std::size_t queries_made = 0;
    double unique_cells_visited = 0.0;
};

MetricsRecord compute_metrics(MissionTrace const& trace, TopicField const& field, InterestMap const& interest_map);

/**
 * Eight boustrophedon coverage paths from `start`: for each corner, a diagonal
 * approach followed by a row-wise sweep, and one followed by a column-wise
 * sweep. Each path lists t_max cells, the first being `start`; a completed
 * sweep retraces itself to fill the remaining steps.
 */
std::vector<Trajectory> lawnmower_trajectories(int width, int height, GridLocation start, int t_max);

/// Mean over the eight sweeps; map loss is the uninformed ln 2.
MetricsRecord run_lawnmower(InterestMap const& interest_map, int t_max, std::optional<GridLocation> start = {});

// Trace files: a header line, one line per step, and a closing line, all JSON.
void write_trace(MissionTrace const& trace, std::ostream& out);
std::string serialize_trace(MissionTrace const& trace);
MissionTrace read_trace(std::istream& in);

/// 64-bit mixing used to derive independent seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

} // namespace coexplore
