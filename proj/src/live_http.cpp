#include "coexplore/live_http.hpp"

#include <httplib.h>

namespace coexplore
{

namespace
{

constexpr char const* kJson = "application/json";

void reply(httplib::Response& res, int status, Json const& body)
{
    res.status = status;
    res.set_content(body.dump(), kJson);
}

void error(httplib::Response& res, int status, std::string const& message)
{
    reply(res, status, {{"error", message}});
}

Json parse_body(httplib::Request const& req)
{
    if (req.body.empty())
    {
        return Json::object();
    }
    auto body = Json::parse(req.body, nullptr, false);
    if (body.is_null())
    {
        return Json::object();
    }
    if (body.is_discarded() || !body.is_object())
    {
        throw ConfigurationError("request body must be a JSON object");
    }
    return body;
}

std::filesystem::path resolve(std::filesystem::path const& base, std::string const& path)
{
    std::filesystem::path p(path);
    return p.is_relative() && !base.empty() ? base / p : p;
}

/// Runs a handler, mapping library errors to status codes.
template <class F>
void guarded(httplib::Response& res, F&& handler)
{
    try
    {
        handler();
    }
    catch (SessionNotFound const& e)
    {
        error(res, 404, e.what());
    }
    catch (ConfigurationError const& e)
    {
        error(res, 400, e.what());
    }
    catch (ParameterError const& e)
    {
        error(res, 400, e.what());
    }
    catch (IngestionError const& e)
    {
        error(res, 400, e.what());
    }
    catch (Json::exception const& e)
    {
        error(res, 400, std::string("malformed request: ") + e.what());
    }
    catch (std::exception const& e)
    {
        error(res, 500, e.what());
    }
}

Json tick_json(TickResult const& r)
{
    return {{"advanced", r.advanced}, {"t", r.t}, {"blocked", r.blocked}, {"finished", r.finished}};
}

} // namespace

SessionRequest parse_session_request(Json const& body, std::filesystem::path const& base_dir)
{
    SessionRequest request;
    try
    {
        if (auto it = body.find("mission"); it != body.end())
        {
            request.config.mission = mission_config_from_json(*it);
        }
        if (auto it = body.find("clock"); it != body.end())
        {
            request.config.clock = parse_clock_mode(it->value("mode", std::string("step_on_label")));
            request.config.tick_interval = std::chrono::milliseconds(it->value("interval_ms", 0));
            request.start_running = it->value("running", false);
        }
        request.config.patch_radius = body.value("patch_radius", request.config.patch_radius);
        request.config.map_id = body.value("map_id", std::string());

        auto const field = body.value("field", Json{{"source", "voronoi"}});
        auto const source = field.value("source", std::string("voronoi"));
        if (source == "voronoi")
        {
            VoronoiParams params;
            params.width = field.value("width", params.width);
            params.height = field.value("height", params.height);
            params.topics = field.value("topics", params.topics);
            params.n_cells = field.value("n_cells", params.n_cells);
            params.sigma = field.value("sigma", params.sigma);
            auto const seed = field.value("seed", std::uint64_t{0});
            Rng rng(seed);
            auto generated = generate_voronoi_topic_field(params, rng);
            auto provenance = generated.provenance();
            provenance.seed = seed;
            generated.set_provenance(provenance);
            request.field = std::make_shared<TopicField const>(std::move(generated));
        }
        else if (source == "file")
        {
            request.field = std::make_shared<TopicField const>(
                load_field(resolve(base_dir, field.at("path").get<std::string>())));
        }
        else if (source == "raster")
        {
            auto raster = load_label_raster(resolve(base_dir, field.at("path").get<std::string>()));
            request.field =
                std::make_shared<TopicField const>(ingest_label_raster(raster, field.value("smoothing_radius", 2)));
        }
        else
        {
            throw ConfigurationError("unknown field source '" + source + "'");
        }

        if (auto it = body.find("interest_map"); it != body.end() && !it->is_null())
        {
            auto const kind = it->value("source", std::string("sample"));
            if (kind == "sample")
            {
                Rng rng(it->value("seed", std::uint64_t{0}));
                auto const profile = sample_interest_profile(request.field->topics(), rng);
                request.truth = std::make_shared<InterestMap const>(sample_interest_map(*request.field, profile, rng));
            }
            else if (kind == "file")
            {
                request.truth = std::make_shared<InterestMap const>(
                    load_interest_map(resolve(base_dir, it->at("path").get<std::string>())));
            }
            else
            {
                throw ConfigurationError("unknown interest map source '" + kind + "'");
            }
        }
    }
    catch (Json::exception const& e)
    {
        throw ConfigurationError(std::string("malformed session request: ") + e.what());
    }
    catch (std::runtime_error const& e)
    {
        throw ConfigurationError(e.what());
    }
    return request;
}

std::string format_sse(SessionEvent const& event)
{
    return "id: " + std::to_string(event.id) + "\nevent: " + event.type + "\ndata: " + event.data.dump() + "\n\n";
}

void install_session_routes(httplib::Server& server, SessionManager& manager, std::filesystem::path base_dir)
{
    auto* m = &manager;
    std::string const prefix = "/api/v1/sessions";

    server.Post(prefix, [m, base_dir](httplib::Request const& req, httplib::Response& res) {
        guarded(res, [&] {
            auto request = parse_session_request(parse_body(req), base_dir);
            auto const id = m->start_session(request.config, request.field, request.truth);
            if (request.start_running)
            {
                m->set_clock(id, true);
            }
            reply(res, 201, {{"session_id", id}, {"state", to_json_value(*m->get_state(id), false)}});
        });
    });

    server.Get(prefix, [m](httplib::Request const&, httplib::Response& res) {
        guarded(res, [&] {
            Json sessions = Json::array();
            for (auto const& id : m->list_sessions())
            {
                try
                {
                    auto const s = m->get_state(id);
                    sessions.push_back({{"session_id", id},
                                        {"t", s->t},
                                        {"t_max", s->t_max},
                                        {"finished", s->finished},
                                        {"pending", s->pending.has_value()}});
                }
                catch (SessionNotFound const&)
                {
                    // Ended between listing and reading.
                }
            }
            reply(res, 200, {{"sessions", sessions}});
        });
    });

    server.Get(prefix + R"(/([^/]+))", [m](httplib::Request const& req, httplib::Response& res) {
        guarded(res, [&] {
            bool const heat = req.get_param_value("heat") != "0";
            reply(res, 200, to_json_value(*m->get_state(req.matches[1]), heat));
        });
    });

    server.Delete(prefix + R"(/([^/]+))", [m](httplib::Request const& req, httplib::Response& res) {
        guarded(res, [&] {
            if (!m->end_session(req.matches[1]))
            {
                throw SessionNotFound("unknown session '" + std::string(req.matches[1]) + "'");
            }
            res.status = 204;
        });
    });

    server.Post(prefix + R"(/([^/]+)/labels)", [m](httplib::Request const& req, httplib::Response& res) {
        guarded(res, [&] {
            auto const body = parse_body(req);
            if (!body.contains("observation_id") || !body.contains("label"))
            {
                throw ConfigurationError("body needs observation_id and label");
            }
            auto const result = m->submit_label(req.matches[1], body.at("observation_id").get<std::size_t>(),
                                                body.at("label").get<int>());
            switch (result.status)
            {
            case SubmitStatus::Accepted:
                reply(res, 200, {{"status", "accepted"}});
                break;
            case SubmitStatus::Duplicate:
                reply(res, 200, {{"status", "duplicate"}});
                break;
            case SubmitStatus::Conflict:
                error(res, 409, result.message);
                break;
            case SubmitStatus::Invalid:
                error(res, 400, result.message);
                break;
            }
        });
    });

    server.Post(prefix + R"(/([^/]+)/tick)", [m](httplib::Request const& req, httplib::Response& res) {
        guarded(res, [&] {
            auto const body = parse_body(req);
            reply(res, 200, tick_json(m->tick(req.matches[1], body.value("steps", 1))));
        });
    });

    server.Put(prefix + R"(/([^/]+)/clock)", [m](httplib::Request const& req, httplib::Response& res) {
        guarded(res, [&] {
            auto const body = parse_body(req);
            std::optional<std::chrono::milliseconds> interval;
            if (body.contains("interval_ms"))
            {
                interval = std::chrono::milliseconds(body.at("interval_ms").get<long>());
            }
            std::string const id = req.matches[1];
            m->set_clock(id, body.value("running", true), interval);
            reply(res, 200, to_json_value(*m->get_state(id), false).at("clock"));
        });
    });

    server.Get(prefix + R"(/([^/]+)/trace)", [m](httplib::Request const& req, httplib::Response& res) {
        guarded(res, [&] {
            res.set_content(serialize_trace(m->trace(req.matches[1])), "application/x-ndjson");
        });
    });

    server.Get(prefix + R"(/([^/]+)/events)", [m](httplib::Request const& req, httplib::Response& res) {
        guarded(res, [&] {
            std::string const id = req.matches[1];
            std::uint64_t after = 0;
            if (req.has_header("Last-Event-ID"))
            {
                after = std::stoull(req.get_header_value("Last-Event-ID"));
            }
            else if (req.has_param("after"))
            {
                after = std::stoull(req.get_param_value("after"));
            }
            bool const follow = req.get_param_value("follow") != "0";
            m->get_state(id); // 404 before the stream starts
            if (!follow)
            {
                std::string body;
                for (auto const& event : m->events_after(id, after))
                {
                    body += format_sse(event);
                }
                res.set_content(body, "text/event-stream");
                return;
            }
            res.set_header("Cache-Control", "no-cache");
            res.set_chunked_content_provider(
                "text/event-stream", [m, id, last = after](std::size_t, httplib::DataSink& sink) mutable {
                    try
                    {
                        auto const events = m->wait_events(id, last, std::chrono::seconds(15));
                        if (events.empty())
                        {
                            if (m->closed(id))
                            {
                                sink.done();
                                return true;
                            }
                            std::string const ping = ": keepalive\n\n";
                            return sink.write(ping.data(), ping.size());
                        }
                        for (auto const& event : events)
                        {
                            auto const frame = format_sse(event);
                            if (!sink.write(frame.data(), frame.size()))
                            {
                                return false;
                            }
                            last = event.id;
                        }
                        return true;
                    }
                    catch (SessionNotFound const&)
                    {
                        sink.done();
                        return true;
                    }
                });
        });
    });
}

} // namespace coexplore
