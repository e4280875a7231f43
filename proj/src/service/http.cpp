#include "drillscope/service/http.hpp"

#include <spdlog/spdlog.h>

namespace drillscope::service {

Request to_request(const httplib::Request& req) {
  Request out;
  out.method = req.method;
  out.path = req.path;
  for (const auto& [k, v] : req.params) out.query[k] = v;
  if (req.is_multipart_form_data()) {
    for (const auto& [field, file] : req.files) out.files.push_back({file.filename.empty() ? field : file.filename, file.content});
  } else {
    out.body = req.body;
  }
  return out;
}

void mount(httplib::Server& server, Api& api) {
  auto handler = [&api](const httplib::Request& req, httplib::Response& res) {
    auto response = api.handle(to_request(req));
    res.status = response.status;
    res.set_content(response.body, response.content_type);
    spdlog::debug("{} {} -> {}", req.method, req.path, response.status);
  };
  const std::string pattern = R"(/sessions(/.*)?)";
  server.Get(pattern, handler);
  server.Post(pattern, handler);
  server.Put(pattern, handler);
}

}  // namespace drillscope::service
