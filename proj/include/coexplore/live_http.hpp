#pragma once

#include "coexplore/live_session.hpp"

namespace httplib
{
class Server;
}

namespace coexplore
{

/// A parsed POST /api/v1/sessions body.
struct SessionRequest
{
    SessionConfig config;
    bool start_running = false;
    std::shared_ptr<TopicField const> field;
    std::shared_ptr<InterestMap const> truth;
};

/**
 * Body keys: "mission" (mission config), "clock" {"mode", "interval_ms",
 * "running"}, "patch_radius", "map_id", "field" (voronoi parameters + seed,
 * a saved field file, or a label raster) and optional "interest_map"
 * (sampled from the field with a seed, or a saved file). Relative paths
 * resolve against `base_dir`. Throws ConfigurationError.
 */
SessionRequest parse_session_request(Json const& body, std::filesystem::path const& base_dir = {});

/// Registers the /api/v1/sessions endpoints (see README) on `server`.
void install_session_routes(httplib::Server& server, SessionManager& manager,
                            std::filesystem::path base_dir = {});

/// One server-sent-events frame.
std::string format_sse(SessionEvent const& event);

} // namespace coexplore
