#include "coexplore/experiment_harness.hpp"

#include "coexplore/serialization.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace coexplore
{

namespace
{

constexpr char const* kTableColumns = "map_id,interest_map_id,selector,labeling_period,trial,seed,"
                                      "reward_per_timestep,final_map_loss,queries_made,unique_cells_visited,"
                                      "runtime_seconds";
constexpr char const* kSummaryColumns = "selector,period,metric,mean,sem,ci_low,ci_high,n";

std::uint64_t map_seed(std::uint64_t master, int map_id)
{
    return mix_seed(mix_seed(master, fnv1a("map")), static_cast<std::uint64_t>(map_id));
}

std::uint64_t interest_seed(std::uint64_t master, int map_id, int interest_map_id)
{
    return mix_seed(mix_seed(map_seed(master, map_id), fnv1a("interest")), static_cast<std::uint64_t>(interest_map_id));
}

std::vector<std::string> split_csv(std::string const& line)
{
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ','))
    {
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',')
    {
        fields.emplace_back();
    }
    return fields;
}

double to_double(std::string const& s)
{
    std::size_t used = 0;
    double const v = std::stod(s, &used);
    if (used != s.size())
    {
        throw std::invalid_argument("trailing characters in number '" + s + "'");
    }
    return v;
}

Metric parse_metric(std::string_view name)
{
    for (auto m : {Metric::RewardPerTimestep, Metric::FinalMapLoss})
    {
        if (metric_name(m) == name)
        {
            return m;
        }
    }
    throw std::invalid_argument("unknown metric '" + std::string(name) + "'");
}

std::ofstream open_output(std::filesystem::path const& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
    {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    return out;
}

std::ifstream open_input(std::filesystem::path const& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        throw std::runtime_error("cannot open " + path.string());
    }
    return in;
}

} // namespace

void ExperimentPlan::validate() const
{
    if (maps.kind == MapSource::Kind::Voronoi && maps.n_maps < 1)
    {
        throw ConfigurationError("plan needs at least one map");
    }
    if (maps.kind == MapSource::Kind::Raster && (maps.n_interest_maps < 1 || maps.raster_path.empty()))
    {
        throw ConfigurationError("raster plan needs a raster path and at least one interest map");
    }
    if (selectors.empty() && !lawnmower)
    {
        throw ConfigurationError("plan runs nothing: no selectors and no lawnmower");
    }
    if (labeling_periods.empty())
    {
        throw ConfigurationError("plan needs at least one labeling period");
    }
    for (int p : labeling_periods)
    {
        if (p < 1)
        {
            throw ConfigurationError("labeling periods must be at least 1");
        }
    }
    if (trials_per_cell < 1)
    {
        throw ConfigurationError("trials_per_cell must be at least 1");
    }
    int const w = maps.kind == MapSource::Kind::Voronoi ? maps.voronoi.width : 1;
    int const h = maps.kind == MapSource::Kind::Voronoi ? maps.voronoi.height : 1;
    if (maps.kind == MapSource::Kind::Voronoi)
    {
        base.validate(w, h);
    }
}

ExperimentPlan plan_from_json_text(std::string const& text)
{
    ExperimentPlan plan;
    try
    {
        auto const json = Json::parse(text, nullptr, true, true);
        plan.master_seed = json.value("master_seed", plan.master_seed);
        if (auto it = json.find("maps"); it != json.end())
        {
            auto const source = it->value("source", std::string("voronoi"));
            if (source == "voronoi")
            {
                plan.maps.kind = MapSource::Kind::Voronoi;
                plan.maps.n_maps = it->value("count", plan.maps.n_maps);
                plan.maps.voronoi.width = it->value("width", plan.maps.voronoi.width);
                plan.maps.voronoi.height = it->value("height", plan.maps.voronoi.height);
                plan.maps.voronoi.topics = it->value("topics", plan.maps.voronoi.topics);
                plan.maps.voronoi.n_cells = it->value("n_cells", plan.maps.voronoi.n_cells);
                plan.maps.voronoi.sigma = it->value("sigma", plan.maps.voronoi.sigma);
            }
            else if (source == "raster")
            {
                plan.maps.kind = MapSource::Kind::Raster;
                plan.maps.raster_path = it->at("path").get<std::string>();
                plan.maps.smoothing_radius = it->value("smoothing_radius", plan.maps.smoothing_radius);
                plan.maps.n_interest_maps = it->value("interest_maps", plan.maps.n_interest_maps);
            }
            else
            {
                throw ConfigurationError("unknown map source '" + source + "'");
            }
        }
        if (auto it = json.find("selectors"); it != json.end())
        {
            plan.selectors.clear();
            for (auto const& name : *it)
            {
                plan.selectors.push_back(parse_selector(name.get<std::string>()));
            }
        }
        plan.lawnmower = json.value("lawnmower", plan.lawnmower);
        if (auto it = json.find("labeling_periods"); it != json.end())
        {
            plan.labeling_periods = it->get<std::vector<int>>();
        }
        plan.trials_per_cell = json.value("trials", plan.trials_per_cell);
        if (auto it = json.find("mission"); it != json.end())
        {
            plan.base = mission_config_from_json(*it, plan.base);
        }
    }
    catch (Json::exception const& e)
    {
        throw ConfigurationError(std::string("malformed experiment plan: ") + e.what());
    }
    catch (ParameterError const& e)
    {
        throw ConfigurationError(e.what());
    }
    plan.validate();
    return plan;
}

ExperimentPlan load_plan(std::filesystem::path const& path)
{
    auto in = open_input(path);
    std::ostringstream text;
    text << in.rdbuf();
    try
    {
        auto plan = plan_from_json_text(text.str());
        if (plan.maps.kind == MapSource::Kind::Raster && plan.maps.raster_path.is_relative())
        {
            plan.maps.raster_path = path.parent_path() / plan.maps.raster_path;
        }
        return plan;
    }
    catch (ConfigurationError const& e)
    {
        throw ConfigurationError(path.string() + ": " + e.what());
    }
}

std::string plan_to_json_text(ExperimentPlan const& plan)
{
    Json json;
    json["master_seed"] = plan.master_seed;
    if (plan.maps.kind == MapSource::Kind::Voronoi)
    {
        json["maps"] = {{"source", "voronoi"},
                        {"count", plan.maps.n_maps},
                        {"width", plan.maps.voronoi.width},
                        {"height", plan.maps.voronoi.height},
                        {"topics", plan.maps.voronoi.topics},
                        {"n_cells", plan.maps.voronoi.n_cells},
                        {"sigma", plan.maps.voronoi.sigma}};
    }
    else
    {
        json["maps"] = {{"source", "raster"},
                        {"path", plan.maps.raster_path.string()},
                        {"smoothing_radius", plan.maps.smoothing_radius},
                        {"interest_maps", plan.maps.n_interest_maps}};
    }
    json["selectors"] = Json::array();
    for (auto s : plan.selectors)
    {
        json["selectors"].push_back(std::string(selector_name(s)));
    }
    json["lawnmower"] = plan.lawnmower;
    json["labeling_periods"] = plan.labeling_periods;
    json["trials"] = plan.trials_per_cell;
    json["mission"] = to_json_value(plan.base);
    return json.dump(2);
}

std::uint64_t fnv1a(std::string_view text)
{
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : text)
    {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::uint64_t rollout_seed(std::uint64_t master_seed, int map_id, std::string_view selector, int period, int trial)
{
    std::uint64_t h = mix_seed(master_seed, static_cast<std::uint64_t>(map_id));
    h = mix_seed(h, fnv1a(selector));
    h = mix_seed(h, static_cast<std::uint64_t>(period));
    return mix_seed(h, static_cast<std::uint64_t>(trial));
}

std::vector<MapInstance> generate_maps(ExperimentPlan const& plan)
{
    std::vector<MapInstance> out;
    if (plan.maps.kind == MapSource::Kind::Voronoi)
    {
        for (int m = 0; m < plan.maps.n_maps; ++m)
        {
            auto const seed = map_seed(plan.master_seed, m);
            Rng rng(seed);
            auto field = generate_voronoi_topic_field(plan.maps.voronoi, rng);
            auto provenance = field.provenance();
            provenance.seed = seed;
            field.set_provenance(provenance);
            Rng interest_rng(interest_seed(plan.master_seed, m, 0));
            auto profile = sample_interest_profile(field.topics(), interest_rng);
            auto interest_map = sample_interest_map(field, profile, interest_rng);
            out.push_back({m, 0, std::make_shared<TopicField const>(std::move(field)), std::move(profile),
                           std::move(interest_map)});
        }
        return out;
    }

    LabelRaster raster;
    try
    {
        raster = load_label_raster(plan.maps.raster_path);
    }
    catch (IngestionError const& e)
    {
        throw ConfigurationError(e.what());
    }
    auto field = std::make_shared<TopicField const>(ingest_label_raster(raster, plan.maps.smoothing_radius));
    for (int j = 0; j < plan.maps.n_interest_maps; ++j)
    {
        Rng interest_rng(interest_seed(plan.master_seed, 0, j));
        auto profile = sample_interest_profile(field->topics(), interest_rng);
        auto interest_map = sample_interest_map(*field, profile, interest_rng);
        out.push_back({0, j, field, std::move(profile), std::move(interest_map)});
    }
    return out;
}

bool same_results(ResultTable const& a, ResultTable const& b)
{
    if (a.rows.size() != b.rows.size())
    {
        return false;
    }
    for (std::size_t i = 0; i < a.rows.size(); ++i)
    {
        auto const& x = a.rows[i];
        auto const& y = b.rows[i];
        if (x.map_id != y.map_id || x.interest_map_id != y.interest_map_id || x.selector != y.selector ||
            x.labeling_period != y.labeling_period || x.trial != y.trial || x.seed != y.seed ||
            x.reward_per_timestep != y.reward_per_timestep || x.final_map_loss != y.final_map_loss ||
            x.queries_made != y.queries_made || x.unique_cells_visited != y.unique_cells_visited)
        {
            return false;
        }
    }
    return true;
}

ResultTable run_batch(ExperimentPlan const& plan, BatchOptions const& options)
{
    return run_batch(plan, generate_maps(plan), options);
}

ResultTable run_batch(ExperimentPlan const& plan, std::vector<MapInstance> const& maps, BatchOptions const& options)
{
    plan.validate();
    struct Job
    {
        std::size_t map_index;
        std::optional<SelectorKind> selector; // empty: lawnmower
        int period;
        int trial;
    };
    std::vector<Job> jobs;
    for (std::size_t m = 0; m < maps.size(); ++m)
    {
        for (int period : plan.labeling_periods)
        {
            for (auto selector : plan.selectors)
            {
                for (int trial = 0; trial < plan.trials_per_cell; ++trial)
                {
                    jobs.push_back({m, selector, period, trial});
                }
            }
            if (plan.lawnmower)
            {
                jobs.push_back({m, std::nullopt, period, 0});
            }
        }
    }
    if (!options.trace_dir.empty())
    {
        std::filesystem::create_directories(options.trace_dir);
    }

    ResultTable table;
    table.rows.resize(jobs.size());
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    std::atomic<bool> failed{false};
    std::mutex error_mutex;
    std::string error;
    std::mutex progress_mutex;

    auto worker = [&]() {
        for (;;)
        {
            auto const index = next.fetch_add(1);
            if (index >= jobs.size() || failed.load())
            {
                return;
            }
            auto const& job = jobs[index];
            auto const& instance = maps[job.map_index];
            auto& row = table.rows[index];
            row.map_id = instance.map_id;
            row.interest_map_id = instance.interest_map_id;
            row.labeling_period = job.period;
            row.trial = job.trial;
            row.selector = job.selector ? std::string(selector_name(*job.selector)) : std::string(kLawnmowerName);
            auto const started = std::chrono::steady_clock::now();
            try
            {
                MetricsRecord metrics;
                if (job.selector)
                {
                    // Raster plans share map id 0, so the interest-map id joins the seed.
                    int const seed_map = instance.map_id * 100003 + instance.interest_map_id;
                    row.seed = rollout_seed(plan.master_seed, seed_map, row.selector, job.period, job.trial);
                    MissionConfig config = plan.base;
                    config.selector = *job.selector;
                    config.labeling_period = job.period;
                    config.seed = row.seed;
                    std::ostringstream map_id;
                    map_id << "map" << instance.map_id << "/interest" << instance.interest_map_id;
                    auto const trace = run_mission(config, *instance.field, instance.interest_map, map_id.str());
                    metrics = compute_metrics(trace, *instance.field, instance.interest_map);
                    if (!options.trace_dir.empty())
                    {
                        std::ostringstream name;
                        name << "trace_m" << instance.map_id << "_i" << instance.interest_map_id << '_' << row.selector
                             << "_p" << job.period << "_t" << job.trial << ".jsonl";
                        auto out = open_output(options.trace_dir / name.str());
                        write_trace(trace, out);
                    }
                }
                else
                {
                    metrics = run_lawnmower(instance.interest_map, plan.base.t_max,
                                            plan.base.start_for(instance.field->width(), instance.field->height()));
                }
                row.reward_per_timestep = metrics.reward_per_timestep;
                row.final_map_loss = metrics.final_map_loss;
                row.queries_made = metrics.queries_made;
                row.unique_cells_visited = metrics.unique_cells_visited;
            }
            catch (std::exception const& e)
            {
                std::lock_guard lock(error_mutex);
                if (!failed.exchange(true))
                {
                    std::ostringstream message;
                    message << "rollout failed (map " << instance.map_id << ", interest map "
                            << instance.interest_map_id << ", " << row.selector << ", period " << job.period
                            << ", trial " << job.trial << "): " << e.what();
                    error = message.str();
                }
                return;
            }
            row.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
            auto const finished = done.fetch_add(1) + 1;
            if (options.progress)
            {
                std::lock_guard lock(progress_mutex);
                options.progress(finished, jobs.size());
            }
        }
    };

    unsigned const threads = std::max(1u, options.threads);
    if (threads == 1)
    {
        worker();
    }
    else
    {
        std::vector<std::jthread> pool;
        for (unsigned i = 0; i < threads; ++i)
        {
            pool.emplace_back(worker);
        }
    }
    if (failed)
    {
        throw std::runtime_error(error);
    }
    return table;
}

std::string_view metric_name(Metric metric)
{
    return metric == Metric::RewardPerTimestep ? "reward_per_timestep" : "final_map_loss";
}

std::vector<SummaryRow> aggregate(ResultTable const& table)
{
    if (table.rows.empty())
    {
        throw std::invalid_argument("cannot aggregate an empty result table");
    }
    std::map<std::pair<std::string, int>, std::pair<std::vector<double>, std::vector<double>>> groups;
    for (auto const& row : table.rows)
    {
        auto& [reward, loss] = groups[{row.selector, row.labeling_period}];
        reward.push_back(row.reward_per_timestep);
        loss.push_back(row.final_map_loss);
    }
    auto summarise = [](std::string const& selector, int period, Metric metric, std::vector<double> values) {
        // Sorting first makes the floating-point sums independent of row order.
        std::sort(values.begin(), values.end());
        SummaryRow row{selector, period, metric};
        row.n = values.size();
        double sum = 0.0;
        for (double v : values)
        {
            sum += v;
        }
        row.mean = sum / static_cast<double>(row.n);
        if (row.n > 1)
        {
            double ss = 0.0;
            for (double v : values)
            {
                ss += (v - row.mean) * (v - row.mean);
            }
            row.sem = std::sqrt(ss / static_cast<double>(row.n - 1)) / std::sqrt(static_cast<double>(row.n));
        }
        row.ci_low = row.mean - row.sem;
        row.ci_high = row.mean + row.sem;
        return row;
    };
    std::vector<SummaryRow> summary;
    for (auto& [key, values] : groups)
    {
        summary.push_back(summarise(key.first, key.second, Metric::RewardPerTimestep, std::move(values.first)));
        summary.push_back(summarise(key.first, key.second, Metric::FinalMapLoss, std::move(values.second)));
    }
    return summary;
}

SummaryRow const& find_summary(std::vector<SummaryRow> const& summary, std::string_view selector, int period,
                               Metric metric)
{
    for (auto const& row : summary)
    {
        if (row.selector == selector && row.labeling_period == period && row.metric == metric)
        {
            return row;
        }
    }
    throw std::out_of_range("no summary for " + std::string(selector) + " at period " + std::to_string(period));
}

ExportFormat format_for(std::filesystem::path const& path)
{
    auto const ext = path.extension().string();
    if (ext == ".csv")
    {
        return ExportFormat::Csv;
    }
    if (ext == ".jsonl" || ext == ".ndjson")
    {
        return ExportFormat::JsonLines;
    }
    throw std::invalid_argument("cannot infer export format from '" + path.string() + "' (use .csv or .jsonl)");
}

void write_table(ResultTable const& table, ExportFormat format, std::ostream& out)
{
    if (format == ExportFormat::Csv)
    {
        out << kTableColumns << '\n';
        for (auto const& r : table.rows)
        {
            out << r.map_id << ',' << r.interest_map_id << ',' << r.selector << ',' << r.labeling_period << ','
                << r.trial << ',' << r.seed << ',' << format_double(r.reward_per_timestep) << ','
                << format_double(r.final_map_loss) << ',' << r.queries_made << ','
                << format_double(r.unique_cells_visited) << ',' << format_double(r.runtime_seconds) << '\n';
        }
        return;
    }
    for (auto const& r : table.rows)
    {
        // Hand-written so floats carry 17 significant digits like the CSV.
        out << "{\"map_id\":" << r.map_id << ",\"interest_map_id\":" << r.interest_map_id << ",\"selector\":"
            << Json(r.selector).dump() << ",\"labeling_period\":" << r.labeling_period << ",\"trial\":" << r.trial
            << ",\"seed\":" << r.seed << ",\"reward_per_timestep\":" << format_double(r.reward_per_timestep)
            << ",\"final_map_loss\":" << format_double(r.final_map_loss) << ",\"queries_made\":" << r.queries_made
            << ",\"unique_cells_visited\":" << format_double(r.unique_cells_visited)
            << ",\"runtime_seconds\":" << format_double(r.runtime_seconds) << "}\n";
    }
}

ResultTable read_table(std::istream& in, ExportFormat format)
{
    ResultTable table;
    std::string line;
    std::size_t line_number = 0;
    try
    {
        if (format == ExportFormat::Csv)
        {
            if (!std::getline(in, line) || line != kTableColumns)
            {
                throw std::invalid_argument("unexpected result table header");
            }
            ++line_number;
            while (std::getline(in, line))
            {
                ++line_number;
                if (line.empty())
                {
                    continue;
                }
                auto const f = split_csv(line);
                if (f.size() != 11)
                {
                    throw std::invalid_argument("expected 11 columns");
                }
                table.rows.push_back({std::stoi(f[0]), std::stoi(f[1]), f[2], std::stoi(f[3]), std::stoi(f[4]),
                                      std::stoull(f[5]), to_double(f[6]), to_double(f[7]), std::stoull(f[8]),
                                      to_double(f[9]), to_double(f[10])});
            }
            return table;
        }
        while (std::getline(in, line))
        {
            ++line_number;
            if (line.empty())
            {
                continue;
            }
            auto const j = Json::parse(line);
            table.rows.push_back({j.at("map_id"), j.at("interest_map_id"), j.at("selector"), j.at("labeling_period"),
                                  j.at("trial"), j.at("seed"), j.at("reward_per_timestep"), j.at("final_map_loss"),
                                  j.at("queries_made"), j.at("unique_cells_visited"), j.at("runtime_seconds")});
        }
    }
    catch (std::exception const& e)
    {
        throw std::runtime_error("result table line " + std::to_string(line_number) + ": " + e.what());
    }
    return table;
}

void export_table(ResultTable const& table, ExportFormat format, std::filesystem::path const& path)
{
    auto out = open_output(path);
    write_table(table, format, out);
    if (!out)
    {
        throw std::runtime_error("write failed for " + path.string());
    }
}

ResultTable import_table(std::filesystem::path const& path)
{
    auto in = open_input(path);
    try
    {
        return read_table(in, format_for(path));
    }
    catch (std::exception const& e)
    {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

void write_summary(std::vector<SummaryRow> const& summary, ExportFormat format, std::ostream& out)
{
    if (format == ExportFormat::Csv)
    {
        out << kSummaryColumns << '\n';
        for (auto const& r : summary)
        {
            out << r.selector << ',' << r.labeling_period << ',' << metric_name(r.metric) << ','
                << format_double(r.mean) << ',' << format_double(r.sem) << ',' << format_double(r.ci_low) << ','
                << format_double(r.ci_high) << ',' << r.n << '\n';
        }
        return;
    }
    for (auto const& r : summary)
    {
        out << "{\"selector\":" << Json(r.selector).dump() << ",\"period\":" << r.labeling_period
            << ",\"metric\":\"" << metric_name(r.metric) << "\",\"mean\":" << format_double(r.mean)
            << ",\"sem\":" << format_double(r.sem) << ",\"ci_low\":" << format_double(r.ci_low)
            << ",\"ci_high\":" << format_double(r.ci_high) << ",\"n\":" << r.n << "}\n";
    }
}

std::vector<SummaryRow> read_summary(std::istream& in, ExportFormat format)
{
    std::vector<SummaryRow> summary;
    std::string line;
    if (format == ExportFormat::Csv)
    {
        if (!std::getline(in, line) || line != kSummaryColumns)
        {
            throw std::runtime_error("unexpected summary header");
        }
        while (std::getline(in, line))
        {
            if (line.empty())
            {
                continue;
            }
            auto const f = split_csv(line);
            if (f.size() != 8)
            {
                throw std::runtime_error("summary row needs 8 columns");
            }
            summary.push_back({f[0], std::stoi(f[1]), parse_metric(f[2]), to_double(f[3]), to_double(f[4]),
                               to_double(f[5]), to_double(f[6]), std::stoull(f[7])});
        }
        return summary;
    }
    while (std::getline(in, line))
    {
        if (line.empty())
        {
            continue;
        }
        auto const j = Json::parse(line);
        summary.push_back({j.at("selector"), j.at("period"), parse_metric(j.at("metric").get<std::string>()),
                           j.at("mean"), j.at("sem"), j.at("ci_low"), j.at("ci_high"), j.at("n")});
    }
    return summary;
}

void export_summary(std::vector<SummaryRow> const& summary, ExportFormat format, std::filesystem::path const& path)
{
    auto out = open_output(path);
    write_summary(summary, format, out);
    if (!out)
    {
        throw std::runtime_error("write failed for " + path.string());
    }
}

std::vector<SummaryRow> import_summary(std::filesystem::path const& path)
{
    auto in = open_input(path);
    try
    {
        return read_summary(in, format_for(path));
    }
    catch (std::exception const& e)
    {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

std::string render_report(std::vector<SummaryRow> const& summary)
{
    std::set<int> periods;
    std::vector<std::string> selectors;
    for (auto const& row : summary)
    {
        periods.insert(row.labeling_period);
        if (std::find(selectors.begin(), selectors.end(), row.selector) == selectors.end())
        {
            selectors.push_back(row.selector);
        }
    }
    std::ostringstream out;
    out << std::fixed << std::setprecision(4);
    for (auto metric : {Metric::RewardPerTimestep, Metric::FinalMapLoss})
    {
        out << "## " << metric_name(metric) << " (mean +/- SEM)\n\n| selector |";
        for (int p : periods)
        {
            out << " period " << p << " |";
        }
        out << "\n|---|";
        for (std::size_t i = 0; i < periods.size(); ++i)
        {
            out << "---|";
        }
        out << '\n';
        for (auto const& selector : selectors)
        {
            out << "| " << selector << " |";
            for (int p : periods)
            {
                auto it = std::find_if(summary.begin(), summary.end(), [&](SummaryRow const& r) {
                    return r.selector == selector && r.labeling_period == p && r.metric == metric;
                });
                if (it == summary.end())
                {
                    out << " - |";
                }
                else
                {
                    out << ' ' << it->mean << " +/- " << it->sem << " |";
                }
            }
            out << '\n';
        }
        out << '\n';
    }

    bool const has_lawnmower = std::any_of(summary.begin(), summary.end(),
                                           [](SummaryRow const& r) { return r.selector == kLawnmowerName; });
    if (has_lawnmower)
    {
        out << "## reward relative to lawnmower\n\n| selector |";
        for (int p : periods)
        {
            out << " period " << p << " |";
        }
        out << "\n|---|";
        for (std::size_t i = 0; i < periods.size(); ++i)
        {
            out << "---|";
        }
        out << '\n';
        out << std::setprecision(1);
        for (auto const& selector : selectors)
        {
            if (selector == kLawnmowerName)
            {
                continue;
            }
            out << "| " << selector << " |";
            for (int p : periods)
            {
                try
                {
                    double const base = find_summary(summary, kLawnmowerName, p, Metric::RewardPerTimestep).mean;
                    double const value = find_summary(summary, selector, p, Metric::RewardPerTimestep).mean;
                    out << ' ' << std::showpos << 100.0 * (value / base - 1.0) << std::noshowpos << "% |";
                }
                catch (std::out_of_range const&)
                {
                    out << " - |";
                }
            }
            out << '\n';
        }
    }
    return out.str();
}

} // namespace coexplore
