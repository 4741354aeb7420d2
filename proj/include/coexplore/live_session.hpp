#pragma once

#include "coexplore/mission_sim.hpp"
#include "coexplore/serialization.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace coexplore
{

enum class ClockMode
{
    /// The mission holds at a due label until the operator answers.
    StepOnLabel,
    /// Ticks never wait; a late label is delivered on the first tick after it arrives.
    Timed,
};

std::string_view clock_mode_name(ClockMode mode);
ClockMode parse_clock_mode(std::string_view name);

struct SessionConfig
{
    MissionConfig mission;
    ClockMode clock = ClockMode::StepOnLabel;
    /// Automatic tick period once the clock is running; zero means manual ticks only.
    std::chrono::milliseconds tick_interval{0};
    /// Half-width of the topic patch shown with each query.
    int patch_radius = 5;
    std::string map_id;
};

struct SessionNotFound : std::out_of_range
{
    using std::out_of_range::out_of_range;
};

/// Square patch of dominant topics centred on a cell; -1 outside the map.
struct TopicPatch
{
    GridLocation center;
    int radius = 0;
    std::vector<int> topics; // row-major, (2r+1)^2

    int size() const { return 2 * radius + 1; }
};

TopicPatch render_patch(TopicField const& field, GridLocation center, int radius);

struct PendingQuery
{
    LabelRequest request;
    /// First tick at which the label can enter the dataset.
    int due_at = 0;
    /// Operator's answer, once submitted.
    std::optional<int> submitted;
};

/// Immutable point-in-time view of a session.
struct SessionSnapshot
{
    std::string session_id;
    int t = 0;
    int t_max = 0;
    bool finished = false;
    ClockMode clock = ClockMode::StepOnLabel;
    std::chrono::milliseconds tick_interval{0};
    bool running = false;
    /// Step-on-label only: the clock is held until the pending query is answered.
    bool awaiting_label = false;
    int width = 0;
    int height = 0;
    std::vector<GridLocation> path;
    std::vector<GridLocation> plan;
    std::optional<PendingQuery> pending;
    LabeledDataset dataset;
    RewardModelParams params;
    /// Model prediction at every cell, row-major.
    std::vector<double> heat;
    std::optional<long> cumulative_reward;
    std::uint64_t last_event_id = 0;
};

inline constexpr char const* kSessionSchema = "coexplore.session";
inline constexpr int kSessionSchemaVersion = 1;

Json to_json_value(SessionSnapshot const& snapshot, bool include_heat = true);
Json to_json_value(TopicPatch const& patch);

/// Event types: "step", "query", "label", "finished".
struct SessionEvent
{
    std::uint64_t id = 0;
    std::string type;
    Json data;
};

enum class SubmitStatus
{
    Accepted,
    /// Same label already recorded for this observation; nothing changed.
    Duplicate,
    /// Not the pending query, or a different label for an answered one; nothing changed.
    Conflict,
    /// Label outside {0, 1}.
    Invalid,
};

struct SubmitResult
{
    SubmitStatus status = SubmitStatus::Accepted;
    std::string message;
};

struct TickResult
{
    int advanced = 0;
    int t = 0;
    bool blocked = false;
    bool finished = false;
};

class Session;

/**
 * Owns live sessions. Each session runs its mission on a private worker thread;
 * every call below is a message to that thread, answered in order. Snapshots
 * are published as shared immutable objects, so reads never wait on the loop.
 */
class SessionManager
{
  public:
    /// Sessions write their trace here when they finish or are ended; empty disables.
    explicit SessionManager(std::filesystem::path trace_dir = {});
    ~SessionManager();
    SessionManager(SessionManager const&) = delete;
    SessionManager& operator=(SessionManager const&) = delete;

    /// Throws ConfigurationError for an invalid config. The truth map, if given,
    /// is used for reward accounting only.
    std::string start_session(SessionConfig config, std::shared_ptr<TopicField const> field,
                              std::shared_ptr<InterestMap const> truth = {});

    std::vector<std::string> list_sessions() const;
    std::shared_ptr<SessionSnapshot const> get_state(std::string const& id) const;
    SubmitResult submit_label(std::string const& id, std::size_t observation_id, int label);
    /// Advances up to `steps` timesteps; stops early when finished or (step-on-label) held.
    TickResult tick(std::string const& id, int steps = 1);
    void set_clock(std::string const& id, bool running, std::optional<std::chrono::milliseconds> interval = {});

    /// Events with id > after_id, oldest first.
    std::vector<SessionEvent> events_after(std::string const& id, std::uint64_t after_id) const;
    /// As events_after, but waits up to `timeout` for at least one event.
    std::vector<SessionEvent> wait_events(std::string const& id, std::uint64_t after_id,
                                          std::chrono::milliseconds timeout) const;
    /// True once the session has finished or been ended (no further events).
    bool closed(std::string const& id) const;

    MissionTrace trace(std::string const& id) const;
    /// Stops the session and removes it; false if unknown.
    bool end_session(std::string const& id);

  private:
    std::shared_ptr<Session> find(std::string const& id) const;

    std::filesystem::path trace_dir_;
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::uint64_t next_id_ = 1;
};

} // namespace coexplore
