#pragma once

#include "coexplore/mission_sim.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace coexplore
{

struct MapSource
{
    enum class Kind
    {
        Voronoi,
        Raster,
    };
    Kind kind = Kind::Voronoi;
    VoronoiParams voronoi;
    /// Voronoi: number of topic fields, one interest map each.
    int n_maps = 10;
    std::filesystem::path raster_path;
    int smoothing_radius = 2;
    /// Raster: interest maps drawn for the single ingested field.
    int n_interest_maps = 30;
};

struct ExperimentPlan
{
    MapSource maps;
    std::vector<SelectorKind> selectors{SelectorKind::Random, SelectorKind::Uniform, SelectorKind::InfoGain,
                                        SelectorKind::Regret};
    bool lawnmower = true;
    std::vector<int> labeling_periods{1, 3, 10, 30, 100};
    int trials_per_cell = 8;
    MissionConfig base;
    std::uint64_t master_seed = 0;

    void validate() const;
};

ExperimentPlan load_plan(std::filesystem::path const& path);
ExperimentPlan plan_from_json_text(std::string const& text);
std::string plan_to_json_text(ExperimentPlan const& plan);

/// Ground-truth instance: a topic field plus one sampled interest map.
struct MapInstance
{
    int map_id = 0;
    int interest_map_id = 0;
    std::shared_ptr<TopicField const> field;
    InterestProfile profile;
    InterestMap interest_map;
};

std::vector<MapInstance> generate_maps(ExperimentPlan const& plan);

/// 64-bit FNV-1a of a string.
std::uint64_t fnv1a(std::string_view text);

/**
 * Per-rollout seed: starting from master_seed, fold in map id, FNV-1a of the
 * selector name, labelling period and trial, each step through mix_seed.
 */
std::uint64_t rollout_seed(std::uint64_t master_seed, int map_id, std::string_view selector, int period, int trial);

inline constexpr std::string_view kLawnmowerName = "Lawnmower";

struct ResultRow
{
    int map_id = 0;
    int interest_map_id = 0;
    std::string selector;
    int labeling_period = 0;
    int trial = 0;
    std::uint64_t seed = 0;
    double reward_per_timestep = 0.0;
    double final_map_loss = 0.0;
    std::size_t queries_made = 0;
    double unique_cells_visited = 0.0;
    /// Wall-clock seconds; the only column that is not reproducible.
    double runtime_seconds = 0.0;
};

struct ResultTable
{
    std::vector<ResultRow> rows;
};

/// Row-by-row equality over every column except runtime_seconds.
bool same_results(ResultTable const& a, ResultTable const& b);

struct BatchOptions
{
    unsigned threads = 1;
    /// Directory for per-rollout trace files; empty disables them.
    std::filesystem::path trace_dir;
    std::function<void(std::size_t done, std::size_t total)> progress;
};

/**
 * Runs every (map, selector, period, trial) rollout plus, when enabled, the
 * lawnmower baseline once per (map, period). Rows come back in plan order
 * regardless of thread count. A failing rollout aborts the batch with the
 * rollout's coordinates in the error message.
 */
ResultTable run_batch(ExperimentPlan const& plan, BatchOptions const& options = {});
ResultTable run_batch(ExperimentPlan const& plan, std::vector<MapInstance> const& maps, BatchOptions const& options);

enum class Metric
{
    RewardPerTimestep,
    FinalMapLoss,
};

std::string_view metric_name(Metric metric);

struct SummaryRow
{
    std::string selector;
    int labeling_period = 0;
    Metric metric = Metric::RewardPerTimestep;
    double mean = 0.0;
    /// Standard error of the mean (sample standard deviation / sqrt(n)).
    double sem = 0.0;
    /// 68% normal bound: mean -/+ one SEM.
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::size_t n = 0;
};

/// Groups by (selector, labelling period) and summarises both metrics.
std::vector<SummaryRow> aggregate(ResultTable const& table);

/// Looks up one summary cell; throws if absent.
SummaryRow const& find_summary(std::vector<SummaryRow> const& summary, std::string_view selector, int period,
                               Metric metric);

enum class ExportFormat
{
    Csv,
    JsonLines,
};

ExportFormat format_for(std::filesystem::path const& path);

void export_table(ResultTable const& table, ExportFormat format, std::filesystem::path const& path);
ResultTable import_table(std::filesystem::path const& path);
void write_table(ResultTable const& table, ExportFormat format, std::ostream& out);
ResultTable read_table(std::istream& in, ExportFormat format);

void export_summary(std::vector<SummaryRow> const& summary, ExportFormat format, std::filesystem::path const& path);
std::vector<SummaryRow> import_summary(std::filesystem::path const& path);
void write_summary(std::vector<SummaryRow> const& summary, ExportFormat format, std::ostream& out);
std::vector<SummaryRow> read_summary(std::istream& in, ExportFormat format);

/// Markdown report of a summary: one table per metric, selectors by period.
std::string render_report(std::vector<SummaryRow> const& summary);

} // namespace coexplore
