#pragma once

#include "httplib.h"

#include "drillscope/service/api.hpp"

namespace drillscope::service {

// Routes every request under /sessions to `api`. Multipart uploads become
// UploadedFile entries; query parameters are copied as-is.
void mount(httplib::Server& server, Api& api);

Request to_request(const httplib::Request& req);

}  // namespace drillscope::service
