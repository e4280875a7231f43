#include <csignal>
#include <filesystem>
#include <memory>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "drillscope/llm/adapter.hpp"
#include "drillscope/service/api.hpp"
#include "drillscope/service/http.hpp"

namespace {

httplib::Server* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  using namespace drillscope;
  CLI::App app{"drillscope HTTP service"};
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string provider = "mock";
  std::string fixtures_dir;
  std::size_t max_cells = tabular::kDefaultCellCap;
  std::string model = "mock";
  std::string endpoint;
  std::string reasoning = "medium";
  std::string persist_dir;
  std::string log_level = "info";
  app.add_option("--host", host, "Bind address");
  app.add_option("--port", port, "Listen port")->check(CLI::Range(0, 65535));
  app.add_option("--provider", provider, "LLM provider")->check(CLI::IsMember({"mock", "http"}));
  app.add_option("--fixtures-dir", fixtures_dir, "Mock fixture directory (<schema>/<digest|default>.json)")
      ->check(CLI::ExistingDirectory);
  app.add_option("--max-cells", max_cells, "Cell cap per uploaded file");
  app.add_option("--model", model, "Default model id");
  app.add_option("--endpoint", endpoint, "Chat-completions URL for --provider http");
  app.add_option("--reasoning", reasoning, "Default reasoning level")->check(CLI::IsMember({"low", "medium", "high"}));
  app.add_option("--persist-dir", persist_dir, "Load sessions from and save them to this directory");
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error");
  CLI11_PARSE(app, argc, argv);

  spdlog::set_level(spdlog::level::from_str(log_level));

  std::shared_ptr<llm::Transport> transport;
  if (provider == "mock") {
    auto mock = std::make_shared<llm::MockTransport>();
    if (!fixtures_dir.empty()) mock->load_fixtures(fixtures_dir);
    transport = mock;
  } else {
    transport = std::make_shared<llm::HttpTransport>();
  }

  service::ServiceConfig config;
  config.max_cells = max_cells;
  config.provider.model_id = model;
  config.provider.endpoint = endpoint;
  config.provider.reasoning_level = *llm::reasoning_level_from_string(reasoning);

  service::Api api(config, transport, std::make_shared<service::SystemClock>());
  if (!persist_dir.empty()) spdlog::info("restored {} sessions", api.load(persist_dir));

  httplib::Server server;
  service::mount(server, api);
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  spdlog::info("listening on {}:{} ({} provider)", host, port, provider);
  if (!server.listen(host, port)) {
    spdlog::error("cannot listen on {}:{}", host, port);
    return 1;
  }
  if (!persist_dir.empty()) {
    api.save(persist_dir);
    spdlog::info("saved {} sessions to {}", api.session_count(), persist_dir);
  }
  return 0;
}
