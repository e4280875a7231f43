#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "json.hpp"

#include "drillscope/drill/drill.hpp"
#include "drillscope/intent/intent.hpp"
#include "drillscope/llm/adapter.hpp"
#include "drillscope/llm/types.hpp"
#include "drillscope/tabular/dataset.hpp"
#include "drillscope/tree/tree.hpp"

namespace drillscope::service {

inline constexpr std::size_t kMaxDatasets = 10;

class Clock {
 public:
  virtual ~Clock() = default;
  virtual std::int64_t now_ms() = 0;
};

class SystemClock : public Clock {
 public:
  std::int64_t now_ms() override;
};

// Starts at `start` and advances by `step` on every read.
class StepClock : public Clock {
 public:
  explicit StepClock(std::int64_t start = 0, std::int64_t step = 1000) : next_(start), step_(step) {}
  std::int64_t now_ms() override;

 private:
  std::mutex mutex_;
  std::int64_t next_;
  std::int64_t step_;
};

struct UploadedFile {
  std::string filename;
  std::string content;
};

struct Request {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
  std::vector<UploadedFile> files;
};

struct Response {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

struct ServiceConfig {
  std::size_t max_cells = tabular::kDefaultCellCap;
  std::size_t max_datasets = kMaxDatasets;
  llm::ProviderConfig provider;
  drill::DrillOptions drill;
  // Checks tree invariants after every mutating request (500 on violation).
  bool check_invariants = false;
};

struct Session {
  std::string id;
  // Held for the whole of a mutating request. Drill and insight requests
  // give up with 409 when it is taken; other mutations wait.
  std::mutex op_lock;
  // Guards the fields below for short reads and commits.
  mutable std::mutex state_mutex;
  std::map<std::string, std::shared_ptr<const tabular::Dataset>> datasets;
  std::map<std::string, std::string> raw_csv;
  std::string active_dataset;
  std::optional<tree::ExplorationTree> tree;
  intent::InteractionLog log;
  llm::ProviderConfig provider;
  std::optional<std::string> last_instruction;
  // What the newest successful drill changed, so a render failure reported
  // for its node can restore the session.
  struct DrillUndo {
    tree::NodeId node;
    std::vector<intent::InteractionEvent> consumed;
    std::optional<std::string> last_instruction;
  };
  std::optional<DrillUndo> undo;
};

// HTTP-shaped front end over all modules. Transport-independent: the httplib
// binding and the tests both go through handle().
class Api {
 public:
  Api(ServiceConfig config, std::shared_ptr<llm::Transport> transport, std::shared_ptr<Clock> clock);

  Response handle(const Request& request);

  // {session_id, active_dataset, datasets[{name, rows, columns}], tree, log, config, last_instruction}
  nlohmann::json export_session(const std::string& id) const;

  // One <id>.json export plus <id>/<dataset>.csv per session.
  void save(const std::filesystem::path& dir) const;
  // Restores sessions written by save(); returns how many were loaded.
  std::size_t load(const std::filesystem::path& dir);

  std::size_t session_count() const;

 private:
  std::shared_ptr<Session> find(const std::string& id) const;
  std::shared_ptr<Session> create_session();

  Response route(const Request& request);
  Response create(const Request& request);
  Response summary(Session& s);
  Response upload(Session& s, const Request& request);
  Response activate(Session& s, const std::string& name);
  Response drill(Session& s, const Request& request);
  Response insights(Session& s);
  Response breadcrumb(Session& s);
  Response branches(Session& s);
  Response state(Session& s);
  Response navigate(Session& s, const std::string& action, const Request& request);
  Response render_error(Session& s, const Request& request);
  Response interactions(Session& s, const Request& request);
  Response get_config(Session& s);
  Response put_config(Session& s, const Request& request);
  Response import_session(Session& s, const Request& request);

  nlohmann::json export_locked(const Session& s) const;
  void import_locked(Session& s, const nlohmann::json& exported);
  nlohmann::json view_json(const Session& s) const;
  std::optional<Response> invariant_check(const Session& s) const;

  ServiceConfig config_;
  std::shared_ptr<llm::Transport> transport_;
  std::shared_ptr<Clock> clock_;
  mutable std::shared_mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_session_ = 1;
};

// HTTP status for a module error code.
int http_status(ErrorCode code) noexcept;

Response error_response(int status, std::string_view code, std::string_view message);

}  // namespace drillscope::service
