#pragma once

#include "coexplore/reward_model.hpp"
#include "coexplore/trajectory_planner.hpp"

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace coexplore
{

enum class SelectorKind
{
    Random,
    Uniform,
    Entropy,
    InfoGain,
    Regret,
};

std::string_view selector_name(SelectorKind kind);
/// Accepts the names produced by selector_name (case-insensitive).
SelectorKind parse_selector(std::string_view name);

struct PoolEntry
{
    std::size_t id = 0; // observation index along the path
    std::vector<double> feature;
    GridLocation location;
};

/// Unlabelled, not-in-flight observations in increasing id order.
using QueryPool = std::vector<PoolEntry>;

inline constexpr std::size_t kUnlimitedPool = std::numeric_limits<std::size_t>::max();

/// Outcome of one selection pass. `id` is empty when there is nothing to ask.
struct Selection
{
    std::optional<std::size_t> id;
    /// Objective value per evaluated pool entry (the pool_cap most recent).
    std::vector<double> objective;
    /// Offset of the first evaluated entry within the pool.
    std::size_t first_evaluated = 0;
    std::size_t refits = 0;
    std::size_t rescoring_passes = 0;
};

std::optional<std::size_t> select_random(QueryPool const& pool, Rng& rng);

/// Newest observation when t is a multiple of the period, otherwise nothing.
std::optional<std::size_t> select_uniform(long t, long period, std::optional<std::size_t> latest_id);

Selection select_entropy(QueryPool const& pool, RewardModelParams const& params);

/**
 * Expected entropy reduction at z: H(q) - [q H_1 + (1 - q) H_0], where H_y is
 * the entropy at z after refitting with (z, y) added and q = g(z).
 */
Selection select_info_gain(QueryPool const& pool, RewardModelParams const& params, LabeledDataset const& dataset,
                           FitConfig const& fit_config, std::size_t pool_cap = kUnlimitedPool);

/// The planner's candidate set at selection time; `plan.best` is the reference trajectory.
struct RegretContext
{
    TopicField const& field;
    VisitedSet const& visited;
    double gamma = 1.0;
    CandidatePlan const& plan;
};

/**
 * Regenerated-candidate variant: each temporary refit is compared against a
 * fresh candidate set drawn from `state`, so regret can be negative.
 */
struct RegretRegeneration
{
    PlannerState const& state;
    TrajectoryConfig const& trajectories;
    Rng& rng;
};

/**
 * Refits with the temporary label (z, y), rescores every candidate and returns
 * best score - reference score. Nothing outside the call is modified.
 */
double compute_regret(std::size_t reference, CandidateScorer const& scorer, std::span<double const> z, int y,
                      LabeledDataset const& dataset, RewardModelParams const& params, FitConfig const& fit_config);

/// Expected regret y_pred r_1 + (1 - y_pred) r_0 per pool entry; argmax wins.
Selection select_regret(QueryPool const& pool, RewardModelParams const& params, LabeledDataset const& dataset,
                        RegretContext const& context, FitConfig const& fit_config,
                        std::size_t pool_cap = kUnlimitedPool, RegretRegeneration const* regenerate = nullptr);

} // namespace coexplore
