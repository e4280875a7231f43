#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "drillscope/llm/adapter.hpp"
#include "drillscope/service/api.hpp"

namespace drillscope::testing {

inline const std::string kPeopleCsv =
    "Income,Age,Region,Joined\n"
    "45000,25,N,2021-01-04\n"
    "120000,29,S,2020-06-30\n"
    "100000,30,N,2019-03-15\n"
    "99999,22,S,2022-11-01\n"
    "150000,31,N,2018-07-20\n"
    "30000,45,S,2017-02-11\n"
    "250000,18,N,2023-05-05\n"
    "100000,,W,2021-09-09\n";

inline std::string fixtures_dir() { return std::string(DRILLSCOPE_TEST_DIR) + "/../fixtures/mock"; }

struct ServiceHarness {
  std::shared_ptr<llm::MockTransport> mock = std::make_shared<llm::MockTransport>();
  std::shared_ptr<service::Api> api;

  explicit ServiceHarness(service::ServiceConfig config = {}, std::shared_ptr<llm::Transport> transport = nullptr) {
    mock->load_fixtures(fixtures_dir());
    config.check_invariants = true;
    api = std::make_shared<service::Api>(config, transport ? transport : mock,
                                         std::make_shared<service::StepClock>(1'700'000'000'000, 1000));
  }

  service::Response call(std::string method, std::string path, const nlohmann::json& body = nullptr) {
    service::Request r;
    r.method = std::move(method);
    r.path = std::move(path);
    if (!body.is_null()) r.body = body.dump();
    return api->handle(r);
  }

  service::Response upload(const std::string& session, const std::string& name, const std::string& csv) {
    service::Request r;
    r.method = "POST";
    r.path = "/sessions/" + session + "/datasets";
    r.files.push_back({name + ".csv", csv});
    return api->handle(r);
  }

  std::string new_session_with_people() {
    auto id = nlohmann::json::parse(call("POST", "/sessions").body)["session_id"].get<std::string>();
    upload(id, "people", kPeopleCsv);
    return id;
  }
};

inline nlohmann::json body_of(const service::Response& r) { return nlohmann::json::parse(r.body); }

// Twelve requests covering upload, configuration, interaction capture,
// drilling by instruction and tag, insights, navigation, forking and export.
inline std::vector<std::pair<int, std::string>> run_session_script(ServiceHarness& h) {
  std::vector<std::pair<int, std::string>> out;
  auto keep = [&](const service::Response& r) { out.emplace_back(r.status, r.body); };
  auto created = h.call("POST", "/sessions");
  keep(created);
  const std::string s = "/sessions/" + body_of(created)["session_id"].get<std::string>();
  keep(h.upload(body_of(created)["session_id"], "people", kPeopleCsv));
  keep(h.call("PUT", s + "/config", {{"reasoning_level", "high"}}));
  keep(h.call("POST", s + "/interactions",
              {{"action_type", "brush"},
               {"target_fields", {"Age"}},
               {"predicate", {{"op", "range"}, {"field", "Age"}, {"low", nullptr}, {"high", 30},
                              {"low_inclusive", true}, {"high_inclusive", true}}},
               {"timestamp_ms", 1000},
               {"duration_ms", 800}}));
  keep(h.call("POST", s + "/drill", {{"instruction", "focus on younger people by region"}}));
  keep(h.call("POST", s + "/insights"));
  keep(h.call("POST", s + "/drill", {{"dimension_tag", {{"op", "equals"}, {"field", "Region"}, {"value", "N"}}}}));
  keep(h.call("GET", s + "/breadcrumb"));
  keep(h.call("POST", s + "/jump", {{"node_id", "n0"}}));
  keep(h.call("POST", s + "/drill", {{"instruction", "compare income levels"}}));
  keep(h.call("GET", s + "/branches"));
  keep(h.call("GET", s + "/export"));
  return out;
}

}  // namespace drillscope::testing
