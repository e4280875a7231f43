#include "drillscope/service/api.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "drillscope/chart/spec.hpp"
#include "drillscope/error.hpp"
#include "drillscope/insight/insight.hpp"
#include "drillscope/tabular/domain.hpp"
#include "drillscope/tabular/ingest.hpp"

namespace drillscope::service {

using nlohmann::json;

namespace {

Response ok(const json& body, int status = 200) { return {status, body.dump(), "application/json"}; }

json parse_body(const Request& r) {
  if (r.body.empty()) return json::object();
  json j = json::parse(r.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw std::invalid_argument("request body must be a JSON object");
  return j;
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> out;
  std::stringstream ss(path);
  std::string part;
  while (std::getline(ss, part, '/')) {
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

std::string dataset_name_for(const Request& r, const UploadedFile& f) {
  if (auto it = r.query.find("name"); it != r.query.end() && !it->second.empty()) return it->second;
  std::string stem = std::filesystem::path(f.filename).stem().string();
  return stem.empty() ? "data" : stem;
}

json dataset_json(const tabular::Dataset& ds) {
  json cols = json::array();
  for (const auto& c : ds.columns()) {
    auto dom = tabular::field_domain(ds, c.name());
    cols.push_back({{"name", c.name()}, {"type", tabular::to_string(c.type())}, {"cardinality", dom.cardinality}});
  }
  return {{"name", ds.name()}, {"rows", ds.row_count()}, {"columns", cols}};
}

json breadcrumb_json(const tree::ExplorationTree& t) {
  json out = json::array();
  for (const auto& b : t.breadcrumb()) out.push_back({{"id", b.id}, {"label", b.label}});
  return out;
}

json branches_json(const tree::ExplorationTree& t) {
  json out = json::array();
  for (const auto& b : t.branches()) {
    out.push_back({{"leaf_id", b.leaf_id}, {"path_labels", b.path_labels}, {"display_label", b.display_label}});
  }
  return out;
}

json config_json(const Session& s) {
  json j = s.provider;
  j["tracking_enabled"] = s.log.tracking_enabled;
  return j;
}

std::string required_string(const json& body, const char* key) {
  auto it = body.find(key);
  if (it == body.end() || !it->is_string()) throw std::invalid_argument(fmt::format("'{}' must be a string", key));
  return it->get<std::string>();
}

}  // namespace

std::int64_t SystemClock::now_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

std::int64_t StepClock::now_ms() {
  std::lock_guard lock(mutex_);
  auto t = next_;
  next_ += step_;
  return t;
}

int http_status(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::CellCapExceeded: return 413;
    case ErrorCode::UnknownNode:
    case ErrorCode::UnknownParent: return 404;
    case ErrorCode::ConflictingFilter: return 409;
    case ErrorCode::AdapterUnavailable:
    case ErrorCode::UnparseablePayload:
    case ErrorCode::SchemaMismatch:
    case ErrorCode::MissingFixture:
    case ErrorCode::UnparseableInsightPayload: return 502;
    case ErrorCode::Timeout: return 504;
    default: return 400;
  }
}

Response error_response(int status, std::string_view code, std::string_view message) {
  return ok({{"error", {{"code", code}, {"message", message}}}}, status);
}

Api::Api(ServiceConfig config, std::shared_ptr<llm::Transport> transport, std::shared_ptr<Clock> clock)
    : config_(std::move(config)), transport_(std::move(transport)), clock_(std::move(clock)) {
  config_.provider.validate();
}

std::size_t Api::session_count() const {
  std::shared_lock lock(sessions_mutex_);
  return sessions_.size();
}

std::shared_ptr<Session> Api::find(const std::string& id) const {
  std::shared_lock lock(sessions_mutex_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

std::shared_ptr<Session> Api::create_session() {
  std::unique_lock lock(sessions_mutex_);
  auto s = std::make_shared<Session>();
  s->id = fmt::format("s{}", next_session_++);
  s->provider = config_.provider;
  sessions_[s->id] = s;
  return s;
}

Response Api::handle(const Request& request) {
  try {
    return route(request);
  } catch (const Error& e) {
    return error_response(http_status(e.code()), e.code_name(), e.what());
  } catch (const json::exception& e) {
    return error_response(400, "BAD_REQUEST", e.what());
  } catch (const std::invalid_argument& e) {
    return error_response(400, "BAD_REQUEST", e.what());
  } catch (const std::exception& e) {
    spdlog::error("{} {} failed: {}", request.method, request.path, e.what());
    return error_response(500, "INTERNAL", e.what());
  }
}

Response Api::route(const Request& r) {
  auto parts = split_path(r.path);
  if (parts.empty() || parts[0] != "sessions") return error_response(404, "NOT_FOUND", "no such route");
  if (parts.size() == 1) {
    if (r.method != "POST") return error_response(405, "METHOD_NOT_ALLOWED", "use POST");
    return create(r);
  }
  auto session = find(parts[1]);
  if (!session) return error_response(404, "UNKNOWN_SESSION", fmt::format("no session '{}'", parts[1]));
  Session& s = *session;
  const std::string& m = r.method;
  if (parts.size() == 2) {
    if (m == "GET") return summary(s);
    return error_response(405, "METHOD_NOT_ALLOWED", "use GET");
  }
  const std::string& what = parts[2];
  auto expect = [&](const char* method) { return m == method; };
  if (parts.size() == 5 && what == "datasets" && parts[4] == "activate" && expect("POST")) return activate(s, parts[3]);
  if (parts.size() != 3) return error_response(404, "NOT_FOUND", "no such route");
  if (what == "datasets" && expect("POST")) return upload(s, r);
  if (what == "datasets" && expect("GET")) return summary(s);
  if (what == "drill" && expect("POST")) return drill(s, r);
  if (what == "insights" && expect("POST")) return insights(s);
  if (what == "breadcrumb" && expect("GET")) return breadcrumb(s);
  if (what == "branches" && expect("GET")) return branches(s);
  if (what == "state" && expect("GET")) return state(s);
  if ((what == "jump" || what == "switch" || what == "reset") && expect("POST")) return navigate(s, what, r);
  if (what == "render_error" && expect("POST")) return render_error(s, r);
  if (what == "interactions" && expect("POST")) return interactions(s, r);
  if (what == "config" && expect("GET")) return get_config(s);
  if (what == "config" && expect("PUT")) return put_config(s, r);
  if (what == "export" && expect("GET")) return ok(export_session(s.id));
  if (what == "import" && expect("POST")) return import_session(s, r);
  return error_response(404, "NOT_FOUND", "no such route");
}

Response Api::create(const Request&) {
  auto s = create_session();
  return ok({{"session_id", s->id}}, 201);
}

Response Api::summary(Session& s) {
  std::lock_guard lock(s.state_mutex);
  json ds = json::array();
  for (const auto& [name, d] : s.datasets) ds.push_back(dataset_json(*d));
  return ok({{"session_id", s.id},
             {"datasets", ds},
             {"active_dataset", s.active_dataset.empty() ? json(nullptr) : json(s.active_dataset)},
             {"node_count", s.tree ? s.tree->size() : 0},
             {"active_id", s.tree ? json(s.tree->active_id()) : json(nullptr)}});
}

Response Api::upload(Session& s, const Request& r) {
  std::vector<UploadedFile> files = r.files;
  if (files.empty() && !r.body.empty()) files.push_back({"data.csv", r.body});
  if (files.empty()) return error_response(400, "BAD_REQUEST", "no CSV content");
  std::lock_guard op(s.op_lock);
  {
    std::lock_guard lock(s.state_mutex);
    if (s.datasets.size() + files.size() > config_.max_datasets) {
      return error_response(409, "LIMIT_EXCEEDED",
                            fmt::format("a session holds at most {} datasets", config_.max_datasets));
    }
  }
  std::vector<std::pair<std::shared_ptr<const tabular::Dataset>, std::string>> loaded;
  for (const auto& f : files) {
    auto name = dataset_name_for(r, f);
    {
      std::lock_guard lock(s.state_mutex);
      if (s.datasets.count(name)) return error_response(409, "DATASET_EXISTS", fmt::format("'{}' already loaded", name));
    }
    for (const auto& [d, _] : loaded) {
      if (d->name() == name) return error_response(409, "DATASET_EXISTS", fmt::format("'{}' given twice", name));
    }
    auto ds = std::make_shared<const tabular::Dataset>(
        tabular::ingest_csv(f.content, name, tabular::IngestOptions{config_.max_cells}));
    loaded.emplace_back(std::move(ds), f.content);
  }
  std::lock_guard lock(s.state_mutex);
  json out = json::array();
  for (auto& [ds, raw] : loaded) {
    s.datasets[ds->name()] = ds;
    s.raw_csv[ds->name()] = raw;
    if (!s.tree) {
      s.active_dataset = ds->name();
      s.tree = tree::ExplorationTree::init(chart::overview_spec(*ds), clock_->now_ms());
    }
    auto j = dataset_json(*ds);
    j["active"] = s.active_dataset == ds->name();
    out.push_back(j);
  }
  if (auto bad = invariant_check(s)) return *bad;
  return ok({{"datasets", out}, {"root_id", s.tree->root_id()}}, 201);
}

Response Api::activate(Session& s, const std::string& name) {
  std::lock_guard op(s.op_lock);
  std::lock_guard lock(s.state_mutex);
  auto it = s.datasets.find(name);
  if (it == s.datasets.end()) return error_response(404, "UNKNOWN_DATASET", fmt::format("no dataset '{}'", name));
  s.active_dataset = name;
  s.tree = tree::ExplorationTree::init(chart::overview_spec(*it->second), clock_->now_ms());
  s.log.events.clear();
  s.last_instruction.reset();
  s.undo.reset();
  return ok(view_json(s));
}

Response Api::drill(Session& s, const Request& r) {
  std::unique_lock op(s.op_lock, std::try_to_lock);
  if (!op.owns_lock()) return error_response(409, "DRILL_IN_FLIGHT", "another drill or insight request is running");
  auto body = parse_body(r);

  std::optional<tree::ExplorationTree> tree;
  std::shared_ptr<const tabular::Dataset> ds;
  intent::InteractionLog log;
  llm::ProviderConfig provider;
  {
    std::lock_guard lock(s.state_mutex);
    if (!s.tree || !s.datasets.count(s.active_dataset)) return error_response(409, "NO_DATASET", "upload a dataset first");
    tree = s.tree;
    ds = s.datasets.at(s.active_dataset);
    log = s.log;
    provider = s.provider;
  }

  std::optional<std::string> instruction;
  if (auto it = body.find("instruction"); it != body.end() && !it->is_null()) instruction = required_string(body, "instruction");
  std::optional<tabular::Predicate> tag;
  if (auto it = body.find("dimension_tag"); it != body.end() && !it->is_null()) {
    std::string label;
    if (it->is_string()) {
      label = it->get<std::string>();
      const auto& dims = tree->active().dimensions;
      auto d = std::find_if(dims.begin(), dims.end(), [&](const auto& x) { return x.label == label; });
      if (d == dims.end()) {
        return error_response(400, "UNKNOWN_DIMENSION", fmt::format("'{}' is not suggested on the current node", label));
      }
      tag = d->filter;
    } else {
      tag = it->get<tabular::Predicate>();
      label = tabular::describe(*tag, ds.get());
    }
    tabular::check_binding(*ds, *tag);
    if (!instruction) instruction = label;
  }

  auto bundle = intent::fuse_intent(intent::extract_base_filters(tree->active().spec), log, instruction, tag);
  if (bundle.cold_start()) {
    return error_response(400, "EMPTY_INTENT", "give an instruction, a dimension tag or record interactions first");
  }
  llm::LlmAdapter adapter(provider, transport_);
  auto options = config_.drill;
  options.created_at = clock_->now_ms();
  auto result = drill::apply_drill(*tree, *ds, bundle, adapter, options);

  json out = drill::to_json(result);
  std::lock_guard lock(s.state_mutex);
  if (result.status == drill::DrillStatus::Ok) {
    s.tree = std::move(tree);
    auto consumed = static_cast<std::ptrdiff_t>(std::min(log.events.size(), s.log.events.size()));
    s.undo = Session::DrillUndo{*result.node_id, {s.log.events.begin(), s.log.events.begin() + consumed},
                                s.last_instruction};
    s.log.events.erase(s.log.events.begin(), s.log.events.begin() + consumed);
    s.last_instruction = instruction;
  }
  if (auto bad = invariant_check(s)) return *bad;
  out["breadcrumb"] = breadcrumb_json(*s.tree);
  return ok(out);
}

Response Api::insights(Session& s) {
  std::unique_lock op(s.op_lock, std::try_to_lock);
  if (!op.owns_lock()) return error_response(409, "DRILL_IN_FLIGHT", "another drill or insight request is running");
  std::optional<tree::ExplorationTree> tree;
  std::shared_ptr<const tabular::Dataset> ds;
  intent::InteractionLog log;
  llm::ProviderConfig provider;
  std::optional<std::string> instruction;
  {
    std::lock_guard lock(s.state_mutex);
    if (!s.tree || !s.datasets.count(s.active_dataset)) return error_response(409, "NO_DATASET", "upload a dataset first");
    tree = s.tree;
    ds = s.datasets.at(s.active_dataset);
    log = s.log;
    provider = s.provider;
    instruction = s.last_instruction;
  }
  intent::IntentBundle bundle;
  try {
    bundle = intent::fuse_intent(intent::extract_base_filters(tree->active().spec), log, instruction);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::EmptyIntent) throw;
  }
  llm::LlmAdapter adapter(provider, transport_);
  auto result = insight::generate_insights(*tree, *ds, bundle, adapter);
  std::lock_guard lock(s.state_mutex);
  s.tree = std::move(tree);
  if (auto bad = invariant_check(s)) return *bad;
  auto out = insight::to_json(result);
  out["node_id"] = s.tree->active_id();
  return ok(out);
}

Response Api::breadcrumb(Session& s) {
  std::lock_guard lock(s.state_mutex);
  if (!s.tree) return error_response(409, "NO_DATASET", "upload a dataset first");
  return ok(breadcrumb_json(*s.tree));
}

Response Api::branches(Session& s) {
  std::lock_guard lock(s.state_mutex);
  if (!s.tree) return error_response(409, "NO_DATASET", "upload a dataset first");
  return ok(branches_json(*s.tree));
}

Response Api::state(Session& s) {
  std::lock_guard lock(s.state_mutex);
  if (!s.tree) return error_response(409, "NO_DATASET", "upload a dataset first");
  auto out = view_json(s);
  out["branches"] = branches_json(*s.tree);
  return ok(out);
}

Response Api::navigate(Session& s, const std::string& action, const Request& r) {
  auto body = parse_body(r);
  std::lock_guard op(s.op_lock);
  std::lock_guard lock(s.state_mutex);
  if (!s.tree) return error_response(409, "NO_DATASET", "upload a dataset first");
  if (action == "jump") s.tree->jump_to(required_string(body, "node_id"));
  else if (action == "switch") s.tree->switch_branch(required_string(body, "leaf_id"));
  else {
    s.tree->reset();
    s.undo.reset();
  }
  if (auto bad = invariant_check(s)) return *bad;
  return ok(view_json(s));
}

Response Api::render_error(Session& s, const Request& r) {
  auto body = parse_body(r);
  auto node_id = required_string(body, "node_id");
  std::lock_guard op(s.op_lock);
  std::lock_guard lock(s.state_mutex);
  if (!s.tree) return error_response(409, "NO_DATASET", "upload a dataset first");
  if (!s.undo || s.undo->node != node_id || node_id != s.tree->active_id() || !s.tree->is_leaf(node_id)) {
    return error_response(409, "STALE_RENDER_ERROR", "only the newest drill result can be rolled back");
  }
  spdlog::warn("render failure on {}: {}", node_id, body.value("message", ""));
  s.tree->remove_leaf(node_id);
  s.log.events.insert(s.log.events.begin(), s.undo->consumed.begin(), s.undo->consumed.end());
  s.last_instruction = s.undo->last_instruction;
  s.undo.reset();
  if (auto bad = invariant_check(s)) return *bad;
  auto out = view_json(s);
  out["status"] = "rolled_back";
  return ok(out);
}

Response Api::interactions(Session& s, const Request& r) {
  auto event = parse_body(r).get<intent::InteractionEvent>();
  std::lock_guard lock(s.state_mutex);
  if (auto it = s.datasets.find(s.active_dataset); it != s.datasets.end()) {
    tabular::check_binding(*it->second, event.predicate);
  }
  auto outcome = intent::record_event(s.log, event);
  json out = {{"recorded", outcome == intent::RecordOutcome::Recorded},
              {"dropped", outcome != intent::RecordOutcome::Recorded}};
  if (outcome == intent::RecordOutcome::Debounced) out["reason"] = "debounced";
  if (outcome == intent::RecordOutcome::TrackingOff) out["reason"] = "tracking_off";
  out["log_size"] = s.log.events.size();
  return ok(out);
}

Response Api::get_config(Session& s) {
  std::lock_guard lock(s.state_mutex);
  return ok(config_json(s));
}

Response Api::put_config(Session& s, const Request& r) {
  auto body = parse_body(r);
  std::lock_guard op(s.op_lock);
  std::lock_guard lock(s.state_mutex);
  auto provider = s.provider;
  llm::merge_config(provider, body);
  if (auto it = body.find("tracking_enabled"); it != body.end()) {
    if (!it->is_boolean()) throw Error(ErrorCode::InvalidConfig, "tracking_enabled must be a boolean");
    s.log.tracking_enabled = it->get<bool>();
  }
  s.provider = provider;
  return ok(config_json(s));
}

Response Api::import_session(Session& s, const Request& r) {
  auto body = parse_body(r);
  std::lock_guard op(s.op_lock);
  std::lock_guard lock(s.state_mutex);
  import_locked(s, body);
  if (auto bad = invariant_check(s)) return *bad;
  return ok(view_json(s));
}

json Api::export_session(const std::string& id) const {
  auto s = find(id);
  if (!s) throw Error(ErrorCode::UnknownNode, fmt::format("no session '{}'", id));
  std::lock_guard lock(s->state_mutex);
  return export_locked(*s);
}

json Api::export_locked(const Session& s) const {
  json ds = json::array();
  for (const auto& [name, d] : s.datasets) ds.push_back(dataset_json(*d));
  json events = json::array();
  for (const auto& e : s.log.events) events.push_back(e);
  return {{"session_id", s.id},
          {"active_dataset", s.active_dataset.empty() ? json(nullptr) : json(s.active_dataset)},
          {"datasets", ds},
          {"tree", s.tree ? s.tree->to_json() : json(nullptr)},
          {"log", {{"tracking_enabled", s.log.tracking_enabled}, {"events", events}}},
          {"config", s.provider},
          {"last_instruction", s.last_instruction ? json(*s.last_instruction) : json(nullptr)}};
}

void Api::import_locked(Session& s, const json& e) {
  std::optional<tree::ExplorationTree> tree;
  if (!e.at("tree").is_null()) tree = tree::ExplorationTree::from_json(e.at("tree"));
  intent::InteractionLog log;
  log.tracking_enabled = e.at("log").at("tracking_enabled").get<bool>();
  for (const auto& ev : e.at("log").at("events")) log.events.push_back(ev.get<intent::InteractionEvent>());
  auto provider = s.provider;
  llm::merge_config(provider, e.at("config"));
  std::string active = e.at("active_dataset").is_null() ? "" : e.at("active_dataset").get<std::string>();
  if (tree && !s.datasets.empty() && !s.datasets.count(active)) {
    throw Error(ErrorCode::InvalidSpec, fmt::format("export refers to dataset '{}' which is not loaded", active));
  }
  s.tree = std::move(tree);
  s.log = std::move(log);
  s.provider = provider;
  s.active_dataset = active;
  s.last_instruction.reset();
  s.undo.reset();
  if (auto it = e.find("last_instruction"); it != e.end() && it->is_string()) s.last_instruction = it->get<std::string>();
}

json Api::view_json(const Session& s) const {
  const auto& node = s.tree->active();
  json dims = json::array();
  for (const auto& d : node.dimensions) dims.push_back(d);
  return {{"active_id", node.id},
          {"spec", chart::to_vega_lite(node.spec)},
          {"dimensions", dims},
          {"dimension_kind", node.dimension_kind == tree::DimensionKind::Basic ? "basic" : "high_level"},
          {"breadcrumb", breadcrumb_json(*s.tree)}};
}

std::optional<Response> Api::invariant_check(const Session& s) const {
  if (!config_.check_invariants || !s.tree) return std::nullopt;
  auto violations = s.tree->invariant_violations();
  if (violations.empty()) return std::nullopt;
  return error_response(500, "INVARIANT_VIOLATION", violations.front());
}

void Api::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  std::shared_lock lock(sessions_mutex_);
  for (const auto& [id, s] : sessions_) {
    std::lock_guard state(s->state_mutex);
    std::ofstream(dir / (id + ".json")) << export_locked(*s).dump(2);
    std::filesystem::create_directories(dir / id);
    for (const auto& [name, raw] : s->raw_csv) std::ofstream(dir / id / (name + ".csv"), std::ios::binary) << raw;
  }
}

std::size_t Api::load(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) return 0;
  std::size_t loaded = 0;
  std::vector<std::filesystem::path> exports;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") exports.push_back(entry.path());
  }
  std::sort(exports.begin(), exports.end());
  for (const auto& file : exports) {
    try {
      std::ifstream in(file);
      json e = json::parse(in);
      auto s = std::make_shared<Session>();
      s->id = e.at("session_id").get<std::string>();
      s->provider = config_.provider;
      if (std::filesystem::is_directory(dir / s->id)) {
        for (const auto& csv : std::filesystem::directory_iterator(dir / s->id)) {
          if (csv.path().extension() != ".csv") continue;
          std::ifstream raw_in(csv.path(), std::ios::binary);
          std::string raw((std::istreambuf_iterator<char>(raw_in)), std::istreambuf_iterator<char>());
          auto name = csv.path().stem().string();
          s->datasets[name] = std::make_shared<const tabular::Dataset>(
              tabular::ingest_csv(raw, name, tabular::IngestOptions{config_.max_cells}));
          s->raw_csv[name] = std::move(raw);
        }
      }
      import_locked(*s, e);
      std::unique_lock lock(sessions_mutex_);
      sessions_[s->id] = s;
      if (s->id.size() > 1 && s->id[0] == 's') {
        try {
          next_session_ = std::max<std::uint64_t>(next_session_, std::stoull(s->id.substr(1)) + 1);
        } catch (const std::exception&) {
        }
      }
      ++loaded;
    } catch (const std::exception& ex) {
      spdlog::warn("skipping persisted session {}: {}", file.string(), ex.what());
    }
  }
  return loaded;
}

}  // namespace drillscope::service
