#include "coexplore/live_session.hpp"

#include <condition_variable>
#include <deque>
#include <fstream>
#include <functional>
#include <future>
#include <thread>

namespace coexplore
{

std::string_view clock_mode_name(ClockMode mode)
{
    return mode == ClockMode::StepOnLabel ? "step_on_label" : "timed";
}

ClockMode parse_clock_mode(std::string_view name)
{
    if (name == "step_on_label")
    {
        return ClockMode::StepOnLabel;
    }
    if (name == "timed")
    {
        return ClockMode::Timed;
    }
    throw ConfigurationError("unknown clock mode '" + std::string(name) + "' (step_on_label or timed)");
}

TopicPatch render_patch(TopicField const& field, GridLocation center, int radius)
{
    TopicPatch patch{center, radius, {}};
    patch.topics.reserve(static_cast<std::size_t>(patch.size() * patch.size()));
    for (int dy = -radius; dy <= radius; ++dy)
    {
        for (int dx = -radius; dx <= radius; ++dx)
        {
            GridLocation const at{center.x + dx, center.y + dy};
            patch.topics.push_back(field.contains(at) ? field.dominant_topic(at) : -1);
        }
    }
    return patch;
}

Json to_json_value(TopicPatch const& patch)
{
    return {{"center", {{"x", patch.center.x}, {"y", patch.center.y}}},
            {"radius", patch.radius},
            {"size", patch.size()},
            {"topics", patch.topics}};
}

namespace
{

Json location_json(GridLocation loc)
{
    return {{"x", loc.x}, {"y", loc.y}};
}

Json request_json(LabelRequest const& r)
{
    return {{"observation_id", r.observation_id},
            {"location", location_json(r.location)},
            {"feature", r.feature},
            {"requested_at", r.requested_at}};
}

} // namespace

Json to_json_value(SessionSnapshot const& s, bool include_heat)
{
    Json json;
    json["schema"] = kSessionSchema;
    json["version"] = kSessionSchemaVersion;
    json["session_id"] = s.session_id;
    json["t"] = s.t;
    json["t_max"] = s.t_max;
    json["finished"] = s.finished;
    json["clock"] = {{"mode", clock_mode_name(s.clock)},
                     {"interval_ms", s.tick_interval.count()},
                     {"running", s.running},
                     {"awaiting_label", s.awaiting_label}};
    json["width"] = s.width;
    json["height"] = s.height;
    json["path"] = Json::array();
    for (auto loc : s.path)
    {
        json["path"].push_back({loc.x, loc.y});
    }
    json["plan"] = Json::array();
    for (auto loc : s.plan)
    {
        json["plan"].push_back({loc.x, loc.y});
    }
    if (s.pending)
    {
        auto pending = request_json(s.pending->request);
        pending["due_at"] = s.pending->due_at;
        pending["submitted"] = s.pending->submitted ? Json(*s.pending->submitted) : Json(nullptr);
        json["pending"] = pending;
    }
    else
    {
        json["pending"] = nullptr;
    }
    json["dataset"] = Json::array();
    for (auto const& ex : s.dataset)
    {
        json["dataset"].push_back({{"feature", ex.feature}, {"label", ex.label}});
    }
    json["dataset_size"] = s.dataset.size();
    json["params"] = to_json_value(s.params);
    if (include_heat)
    {
        json["heat"] = s.heat;
    }
    json["cumulative_reward"] = s.cumulative_reward ? Json(*s.cumulative_reward) : Json(nullptr);
    json["last_event_id"] = s.last_event_id;
    return json;
}

namespace
{

/// Answers from the labels the operator has submitted so far.
class SubmittedLabels final : public LabelOracle
{
  public:
    explicit SubmittedLabels(std::map<std::size_t, int> const& labels) : labels_(&labels) {}

    std::optional<int> answer(LabelRequest const& request) override
    {
        auto it = labels_->find(request.observation_id);
        if (it == labels_->end())
        {
            return std::nullopt;
        }
        return it->second;
    }

  private:
    std::map<std::size_t, int> const* labels_;
};

} // namespace

class Session
{
  public:
    Session(std::string id, SessionConfig config, std::shared_ptr<TopicField const> field,
            std::shared_ptr<InterestMap const> truth, std::filesystem::path trace_dir)
        : id_(std::move(id)),
          config_(std::move(config)),
          field_(std::move(field)),
          truth_(std::move(truth)),
          trace_dir_(std::move(trace_dir)),
          mission_(config_.mission, *field_, truth_.get(), config_.map_id),
          interval_(config_.tick_interval)
    {
        publish();
        worker_ = std::thread([this] { run(); });
    }

    ~Session()
    {
        {
            std::lock_guard lock(queue_mutex_);
            stop_ = true;
        }
        queue_cv_.notify_all();
        if (worker_.joinable())
        {
            worker_.join();
        }
        close();
    }

    std::shared_ptr<SessionSnapshot const> snapshot() const
    {
        std::lock_guard lock(snapshot_mutex_);
        return snapshot_;
    }

    template <class F>
    auto call(F&& task)
    {
        using Result = decltype(task());
        auto job = std::make_shared<std::packaged_task<Result()>>(std::forward<F>(task));
        auto future = job->get_future();
        {
            std::lock_guard lock(queue_mutex_);
            if (stop_)
            {
                throw SessionNotFound("session " + id_ + " has ended");
            }
            queue_.emplace_back([job] { (*job)(); });
        }
        queue_cv_.notify_all();
        return future.get();
    }

    TickResult tick(int steps)
    {
        TickResult result;
        SubmittedLabels oracle(submitted_);
        for (int i = 0; i < steps && !mission_.finished(); ++i)
        {
            if (held())
            {
                result.blocked = true;
                break;
            }
            auto const& record = mission_.step(oracle);
            ++result.advanced;
            emit_step(record);
        }
        if (result.advanced > 0)
        {
            if (mission_.finished())
            {
                emit("finished", {{"t", mission_.t()},
                                  {"dataset_size", mission_.dataset().size()},
                                  {"cumulative_reward", mission_.cumulative_reward()
                                                            ? Json(*mission_.cumulative_reward())
                                                            : Json(nullptr)}});
                save_trace();
                close();
            }
            publish();
        }
        result.t = mission_.t();
        result.finished = mission_.finished();
        result.blocked = result.blocked || held();
        return result;
    }

    SubmitResult submit(std::size_t observation_id, int label)
    {
        if (label != 0 && label != 1)
        {
            return {SubmitStatus::Invalid, "label must be 0 or 1"};
        }
        if (auto it = submitted_.find(observation_id); it != submitted_.end())
        {
            if (it->second == label)
            {
                return {SubmitStatus::Duplicate, "label already recorded"};
            }
            return {SubmitStatus::Conflict, "observation " + std::to_string(observation_id) +
                                                " was already labelled " + std::to_string(it->second)};
        }
        auto const& in_flight = mission_.in_flight();
        if (!in_flight || in_flight->observation_id != observation_id)
        {
            return {SubmitStatus::Conflict,
                    in_flight ? "pending query is observation " + std::to_string(in_flight->observation_id)
                              : std::string("no query is pending")};
        }
        submitted_[observation_id] = label;
        emit("label", {{"observation_id", observation_id}, {"label", label}, {"t", mission_.t()}});
        publish();
        return {SubmitStatus::Accepted, {}};
    }

    void set_clock(bool running, std::optional<std::chrono::milliseconds> interval)
    {
        if (interval)
        {
            if (interval->count() < 0)
            {
                throw ConfigurationError("tick interval must be non-negative");
            }
            interval_ = *interval;
        }
        running_ = running;
        next_tick_ = std::chrono::steady_clock::now() + interval_;
        publish();
    }

    MissionTrace trace() const { return mission_.trace(); }

    std::vector<SessionEvent> events_after(std::uint64_t after) const
    {
        std::lock_guard lock(event_mutex_);
        return collect(after);
    }

    std::vector<SessionEvent> wait_events(std::uint64_t after, std::chrono::milliseconds timeout) const
    {
        std::unique_lock lock(event_mutex_);
        event_cv_.wait_for(lock, timeout, [&] { return closed_ || (!events_.empty() && events_.back().id > after); });
        return collect(after);
    }

    bool closed() const
    {
        std::lock_guard lock(event_mutex_);
        return closed_;
    }

    void end()
    {
        call([this] {
            save_trace();
            return 0;
        });
    }

  private:
    bool held() const
    {
        return config_.clock == ClockMode::StepOnLabel && mission_.label_due() &&
               !submitted_.contains(mission_.in_flight()->observation_id);
    }

    void run()
    {
        for (;;)
        {
            std::function<void()> job;
            {
                std::unique_lock lock(queue_mutex_);
                auto ready = [&] { return stop_ || !queue_.empty(); };
                bool const timed = running_ && interval_.count() > 0 && !mission_.finished();
                if (timed)
                {
                    queue_cv_.wait_until(lock, next_tick_, ready);
                }
                else
                {
                    queue_cv_.wait(lock, ready);
                }
                if (stop_)
                {
                    return;
                }
                if (!queue_.empty())
                {
                    job = std::move(queue_.front());
                    queue_.pop_front();
                }
            }
            if (job)
            {
                job();
                continue;
            }
            if (running_ && interval_.count() > 0 && std::chrono::steady_clock::now() >= next_tick_)
            {
                tick(1);
                next_tick_ += interval_;
            }
        }
    }

    void emit_step(StepRecord const& r)
    {
        Json step = {{"t", r.t},
                     {"x", r.location.x},
                     {"y", r.location.y},
                     {"heading", r.heading},
                     {"predicted", r.predicted},
                     {"dataset_size", r.dataset_size},
                     {"reward", r.reward ? Json(*r.reward) : Json(nullptr)},
                     {"cumulative_reward", r.cumulative_reward ? Json(*r.cumulative_reward) : Json(nullptr)},
                     {"received", r.received ? Json{{"observation_id", r.received->observation_id},
                                                     {"label", r.received->label}}
                                             : Json(nullptr)},
                     {"requested", r.requested ? Json(*r.requested) : Json(nullptr)}};
        emit("step", std::move(step));
        if (r.requested)
        {
            auto const& request = *mission_.in_flight();
            auto query = request_json(request);
            query["due_at"] = request.requested_at + config_.mission.labeling_period;
            query["patch"] = to_json_value(render_patch(*field_, request.location, config_.patch_radius));
            emit("query", std::move(query));
        }
    }

    void emit(std::string type, Json data)
    {
        {
            std::lock_guard lock(event_mutex_);
            auto const id = events_.empty() ? 1 : events_.back().id + 1;
            events_.push_back({id, std::move(type), std::move(data)});
        }
        event_cv_.notify_all();
    }

    std::vector<SessionEvent> collect(std::uint64_t after) const
    {
        // Ids are 1-based and contiguous, so the index is id - 1.
        std::vector<SessionEvent> out;
        if (after < events_.size())
        {
            out.assign(events_.begin() + static_cast<std::ptrdiff_t>(after), events_.end());
        }
        return out;
    }

    void close()
    {
        {
            std::lock_guard lock(event_mutex_);
            closed_ = true;
        }
        event_cv_.notify_all();
    }

    void publish()
    {
        auto s = std::make_shared<SessionSnapshot>();
        s->session_id = id_;
        s->t = mission_.t();
        s->t_max = config_.mission.t_max;
        s->finished = mission_.finished();
        s->clock = config_.clock;
        s->tick_interval = interval_;
        s->running = running_;
        s->awaiting_label = held();
        s->width = field_->width();
        s->height = field_->height();
        s->path.reserve(mission_.steps().size());
        for (auto const& step : mission_.steps())
        {
            s->path.push_back(step.location);
        }
        if (!mission_.plan().candidates.empty())
        {
            s->plan = mission_.plan().chosen().cells;
        }
        if (auto const& in_flight = mission_.in_flight())
        {
            PendingQuery pending{*in_flight, in_flight->requested_at + config_.mission.labeling_period, {}};
            if (auto it = submitted_.find(in_flight->observation_id); it != submitted_.end())
            {
                pending.submitted = it->second;
            }
            s->pending = std::move(pending);
        }
        s->dataset = mission_.dataset();
        s->params = mission_.params();
        s->heat = predict_field(s->params, *field_);
        s->cumulative_reward = mission_.cumulative_reward();
        {
            std::lock_guard lock(event_mutex_);
            s->last_event_id = events_.empty() ? 0 : events_.back().id;
        }
        std::lock_guard lock(snapshot_mutex_);
        snapshot_ = std::move(s);
    }

    void save_trace()
    {
        if (trace_dir_.empty() || trace_saved_)
        {
            return;
        }
        std::filesystem::create_directories(trace_dir_);
        std::ofstream out(trace_dir_ / ("session_" + id_ + ".jsonl"));
        write_trace(mission_.trace(), out);
        trace_saved_ = true;
    }

    std::string const id_;
    SessionConfig const config_;
    std::shared_ptr<TopicField const> const field_;
    std::shared_ptr<InterestMap const> const truth_;
    std::filesystem::path const trace_dir_;

    // Owned by the worker thread.
    Mission mission_;
    std::map<std::size_t, int> submitted_;
    bool running_ = false;
    std::chrono::milliseconds interval_;
    std::chrono::steady_clock::time_point next_tick_;
    bool trace_saved_ = false;

    std::mutex queue_mutex_;
    std::condition_variable queue_cv_;
    std::deque<std::function<void()>> queue_;
    bool stop_ = false;

    mutable std::mutex snapshot_mutex_;
    std::shared_ptr<SessionSnapshot const> snapshot_;

    mutable std::mutex event_mutex_;
    mutable std::condition_variable event_cv_;
    std::vector<SessionEvent> events_;
    bool closed_ = false;

    std::thread worker_;
};

SessionManager::SessionManager(std::filesystem::path trace_dir) : trace_dir_(std::move(trace_dir)) {}

SessionManager::~SessionManager() = default;

std::string SessionManager::start_session(SessionConfig config, std::shared_ptr<TopicField const> field,
                                          std::shared_ptr<InterestMap const> truth)
{
    if (!field)
    {
        throw ConfigurationError("session needs a topic field");
    }
    if (config.tick_interval.count() < 0)
    {
        throw ConfigurationError("tick interval must be non-negative");
    }
    if (config.patch_radius < 0)
    {
        throw ConfigurationError("patch radius must be non-negative");
    }
    config.mission.validate(field->width(), field->height());
    std::lock_guard lock(mutex_);
    auto id = "s" + std::to_string(next_id_++);
    sessions_.emplace(id, std::make_shared<Session>(id, std::move(config), std::move(field), std::move(truth),
                                                    trace_dir_));
    return id;
}

std::shared_ptr<Session> SessionManager::find(std::string const& id) const
{
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end())
    {
        throw SessionNotFound("unknown session '" + id + "'");
    }
    return it->second;
}

std::vector<std::string> SessionManager::list_sessions() const
{
    std::lock_guard lock(mutex_);
    std::vector<std::string> ids;
    for (auto const& [id, session] : sessions_)
    {
        ids.push_back(id);
    }
    return ids;
}

std::shared_ptr<SessionSnapshot const> SessionManager::get_state(std::string const& id) const
{
    return find(id)->snapshot();
}

SubmitResult SessionManager::submit_label(std::string const& id, std::size_t observation_id, int label)
{
    auto session = find(id);
    return session->call([&] { return session->submit(observation_id, label); });
}

TickResult SessionManager::tick(std::string const& id, int steps)
{
    if (steps < 1)
    {
        throw ConfigurationError("tick needs at least one step");
    }
    auto session = find(id);
    return session->call([&] { return session->tick(steps); });
}

void SessionManager::set_clock(std::string const& id, bool running, std::optional<std::chrono::milliseconds> interval)
{
    auto session = find(id);
    session->call([&] {
        session->set_clock(running, interval);
        return 0;
    });
}

std::vector<SessionEvent> SessionManager::events_after(std::string const& id, std::uint64_t after_id) const
{
    return find(id)->events_after(after_id);
}

std::vector<SessionEvent> SessionManager::wait_events(std::string const& id, std::uint64_t after_id,
                                                      std::chrono::milliseconds timeout) const
{
    return find(id)->wait_events(after_id, timeout);
}

bool SessionManager::closed(std::string const& id) const
{
    return find(id)->closed();
}

MissionTrace SessionManager::trace(std::string const& id) const
{
    auto session = find(id);
    return session->call([&] { return session->trace(); });
}

bool SessionManager::end_session(std::string const& id)
{
    std::shared_ptr<Session> session;
    {
        std::lock_guard lock(mutex_);
        auto it = sessions_.find(id);
        if (it == sessions_.end())
        {
            return false;
        }
        session = std::move(it->second);
        sessions_.erase(it);
    }
    session->end();
    return true;
}

} // namespace coexplore
