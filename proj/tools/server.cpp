#include "coexplore/live_http.hpp"

#include <CLI11.hpp>
#include <httplib.h>

#include <csignal>
#include <iostream>

namespace
{
httplib::Server* running_server = nullptr;

void handle_signal(int)
{
    if (running_server != nullptr)
    {
        running_server->stop();
    }
}
} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Live exploration sessions over HTTP"};
    std::string host = "127.0.0.1";
    int port = 8080;
    std::filesystem::path trace_dir;
    std::filesystem::path data_dir = std::filesystem::current_path();
    unsigned threads = 16;
    app.add_option("--host", host, "Bind address");
    app.add_option("-p,--port", port, "Port")->check(CLI::Range(0, 65535));
    app.add_option("--traces", trace_dir, "Write a trace file per session when it ends");
    app.add_option("--data-dir", data_dir, "Base for relative field and interest-map paths");
    app.add_option("--threads", threads, "Connection threads (each open event stream holds one)")
        ->check(CLI::PositiveNumber);
    CLI11_PARSE(app, argc, argv);

    coexplore::SessionManager manager(trace_dir);
    httplib::Server server;
    server.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
    coexplore::install_session_routes(server, manager, data_dir);

    running_server = &server;
    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);

    if (port == 0)
    {
        port = server.bind_to_any_port(host);
    }
    else if (!server.bind_to_port(host, port))
    {
        std::cerr << "error: cannot bind " << host << ":" << port << "\n";
        return 1;
    }
    std::cout << "listening on http://" << host << ":" << port << "/api/v1/sessions" << std::endl;
    server.listen_after_bind();
    return 0;
}
