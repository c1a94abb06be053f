#include <csignal>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "httplib.h"

#include "growcut/error.hpp"
#include "growcut/nrrd.hpp"
#include "growcut/service.hpp"

namespace {
httplib::Server* g_server = nullptr;

void on_signal(int)
{
    if (g_server) g_server->stop();
}
} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"GrowCut segmentation HTTP service", "growcut-server"};
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string volume_path, truth_path, ui_dir;
    growcut::service::ServiceOptions options;
    long timeout_ms = options.segment_timeout.count();
    app.add_option("--host", host)->capture_default_str();
    app.add_option("--port", port)->capture_default_str();
    app.add_option("--volume", volume_path, "Intensity NRRD to serve")->required();
    app.add_option("--truth", truth_path, "Reference mask NRRD for /api/metrics");
    app.add_option("--workers", options.engine.parallel_workers, "Worker threads, 0 = auto")->capture_default_str();
    app.add_option("--connectivity", options.engine.connectivity)->capture_default_str();
    app.add_option("--timeout-ms", timeout_ms, "Segmentation time limit")->capture_default_str();
    app.add_option("--ui-dir", ui_dir, "Static files mounted at /");
    CLI11_PARSE(app, argc, argv);
    options.segment_timeout = std::chrono::milliseconds(timeout_ms);

    growcut::service::Service service(options);
    try {
        service.load_volume(growcut::nrrd::load_scalar(volume_path));
        if (!truth_path.empty()) service.load_truth(growcut::nrrd::load_labels(truth_path));
    } catch (const growcut::Error& e) {
        std::cerr << "error: [load] " << e.what() << "\n";
        return 3;
    }

    httplib::Server server;
    service.bind(server);
    if (!ui_dir.empty() && !server.set_mount_point("/", ui_dir)) {
        std::cerr << "error: cannot mount " << ui_dir << "\n";
        return 3;
    }
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cout << "listening on http://" << host << ":" << port << std::endl;
    if (!server.listen(host, port)) {
        std::cerr << "error: cannot listen on " << host << ":" << port << "\n";
        return 3;
    }
    return 0;
}
