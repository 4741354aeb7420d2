#include "coexplore/experiment_harness.hpp"
#include "coexplore/serialization.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

using namespace coexplore;

namespace
{

std::string read_text(std::filesystem::path const& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

ExperimentPlan load_with_seed(std::filesystem::path const& plan_path, std::optional<std::uint64_t> seed)
{
    auto plan = load_plan(plan_path);
    if (seed)
    {
        plan.master_seed = *seed;
    }
    return plan;
}

int generate_maps_cmd(ExperimentPlan const& plan, std::filesystem::path const& out_dir)
{
    std::filesystem::create_directories(out_dir);
    for (auto const& m : generate_maps(plan))
    {
        auto const stem = "map" + std::to_string(m.map_id) + "_interest" + std::to_string(m.interest_map_id);
        save_field(*m.field, out_dir / (stem + ".field"));
        save_interest_map(m.interest_map, m.profile, out_dir / (stem + ".interest"));
        std::cout << stem << ": " << m.field->width() << "x" << m.field->height() << ", " << m.field->topics()
                  << " topics, " << m.interest_map.positives() << " interesting cells\n";
    }
    return 0;
}

int run_cmd(ExperimentPlan const& plan, std::filesystem::path const& out, unsigned threads,
            std::filesystem::path const& traces, bool quiet)
{
    auto const format = format_for(out);
    BatchOptions options;
    options.threads = threads;
    options.trace_dir = traces;
    if (!quiet)
    {
        options.progress = [](std::size_t done, std::size_t total) {
            if (done == total || done % 50 == 0)
            {
                std::cerr << "\r" << done << "/" << total << " rollouts" << (done == total ? "\n" : "") << std::flush;
            }
        };
    }
    auto const table = run_batch(plan, options);
    export_table(table, format, out);
    auto metadata = out;
    metadata += ".plan.json";
    std::ofstream(metadata) << plan_to_json_text(plan) << "\n";
    std::cout << "wrote " << table.rows.size() << " rows to " << out.string() << "\n";
    return 0;
}

int aggregate_cmd(std::filesystem::path const& in, std::filesystem::path const& out)
{
    auto const summary = aggregate(import_table(in));
    if (out.empty())
    {
        write_summary(summary, ExportFormat::Csv, std::cout);
    }
    else
    {
        export_summary(summary, format_for(out), out);
    }
    return 0;
}

int report_cmd(std::filesystem::path const& in, std::filesystem::path const& out)
{
    // Accepts either a summary or a raw result table.
    std::vector<SummaryRow> summary;
    try
    {
        summary = import_summary(in);
    }
    catch (std::exception const&)
    {
        summary = aggregate(import_table(in));
    }
    auto const text = render_report(summary);
    if (out.empty())
    {
        std::cout << text;
        return 0;
    }
    std::ofstream file(out);
    file << text;
    return file ? 0 : 1;
}

int simulate_cmd(std::filesystem::path const& field_path, std::filesystem::path const& interest_path,
                 std::filesystem::path const& config_path, std::vector<std::string> const& overrides,
                 std::filesystem::path const& trace_path)
{
    auto const field = load_field(field_path);
    auto const interest = load_interest_map(interest_path);
    MissionConfig config;
    if (!config_path.empty())
    {
        config = mission_config_from_json(Json::parse(read_text(config_path)), config);
    }
    for (auto const& kv : overrides)
    {
        auto const eq = kv.find('=');
        if (eq == std::string::npos)
        {
            throw ConfigurationError("override '" + kv + "' is not key=value");
        }
        Json patch;
        auto const value = kv.substr(eq + 1);
        patch[kv.substr(0, eq)] = Json::accept(value) ? Json::parse(value) : Json(value);
        config = mission_config_from_json(patch, config);
    }
    auto const trace = run_mission(config, field, interest, field_path.stem().string());
    auto const metrics = compute_metrics(trace, field, interest);
    if (!trace_path.empty())
    {
        std::ofstream out(trace_path);
        write_trace(trace, out);
    }
    std::cout << "reward_per_timestep " << metrics.reward_per_timestep << "\n"
              << "final_map_loss " << metrics.final_map_loss << "\n"
              << "queries_made " << metrics.queries_made << "\n"
              << "unique_cells_visited " << metrics.unique_cells_visited << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Co-robotic visual exploration: map generation, batch experiments and reports"};
    app.require_subcommand(1);

    std::filesystem::path plan_path, out_path, in_path, traces, field_path, interest_path, config_path;
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    bool quiet = false;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> overrides;

    auto* gen = app.add_subcommand("generate-maps", "Write the plan's topic fields and interest maps");
    gen->add_option("plan", plan_path, "Experiment plan (JSON)")->required()->check(CLI::ExistingFile);
    gen->add_option("-o,--out", out_path, "Output directory")->required();
    gen->add_option("--seed", seed, "Override the plan's master seed");

    auto* run = app.add_subcommand("run", "Run every rollout in a plan and export the result table "
                                          "(the effective plan is written next to it as <out>.plan.json)");
    run->add_option("plan", plan_path, "Experiment plan (JSON)")->required()->check(CLI::ExistingFile);
    run->add_option("-o,--out", out_path, "Result table (.csv or .jsonl)")->required();
    run->add_option("-j,--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    run->add_option("--traces", traces, "Directory for per-rollout trace files");
    run->add_option("--seed", seed, "Override the plan's master seed");
    run->add_flag("-q,--quiet", quiet, "No progress output");

    auto* agg = app.add_subcommand("aggregate", "Summarise a result table per (selector, labeling period)");
    agg->add_option("table", in_path, "Result table (.csv or .jsonl)")->required()->check(CLI::ExistingFile);
    agg->add_option("-o,--out", out_path, "Summary file (.csv or .jsonl); stdout if omitted");

    auto* rep = app.add_subcommand("report", "Render a markdown report from a summary or result table");
    rep->add_option("input", in_path, "Summary or result table")->required()->check(CLI::ExistingFile);
    rep->add_option("-o,--out", out_path, "Markdown file; stdout if omitted");

    auto* sim = app.add_subcommand("simulate", "Run one mission against saved maps");
    sim->add_option("--field", field_path, "Topic field file")->required()->check(CLI::ExistingFile);
    sim->add_option("--interest", interest_path, "Interest map file")->required()->check(CLI::ExistingFile);
    sim->add_option("--config", config_path, "Mission config (JSON)")->check(CLI::ExistingFile);
    sim->add_option("--set", overrides, "Config override, key=value (repeatable)");
    sim->add_option("--trace", out_path, "Write the mission trace here");

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (*gen)
        {
            return generate_maps_cmd(load_with_seed(plan_path, seed), out_path);
        }
        if (*run)
        {
            return run_cmd(load_with_seed(plan_path, seed), out_path, threads, traces, quiet);
        }
        if (*agg)
        {
            return aggregate_cmd(in_path, out_path);
        }
        if (*rep)
        {
            return report_cmd(in_path, out_path);
        }
        return simulate_cmd(field_path, interest_path, config_path, overrides, out_path);
    }
    catch (std::exception const& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
