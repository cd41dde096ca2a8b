// Copyright 2026 The E2E Engine Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "e2e/remote.hpp"

#include <algorithm>
#include <cmath>
#include <semaphore>
#include <string>

#include "e2e/errors.hpp"
#include "httplib.h"
#include "json.hpp"

namespace e2e {
namespace {

using nlohmann::json;

constexpr int kMaxInflightCeiling = 256;

bool is_timeout(httplib::Error e) {
  // httplib reports a tripped read/write deadline as Read/Write; a refused
  // or dropped connection comes back as Connection.
  return e == httplib::Error::ConnectionTimeout ||
         e == httplib::Error::Read || e == httplib::Error::Write;
}

}  // namespace

struct RemoteEngine::Impl {
  explicit Impl(RemoteOptions opts)
      : options(std::move(opts)),
        inflight(std::clamp(options.max_inflight, 1, kMaxInflightCeiling)) {}

  RemoteOptions options;
  mutable std::counting_semaphore<kMaxInflightCeiling> inflight;
};

RemoteEngine::RemoteEngine(RemoteOptions options)
    : impl_(std::make_unique<Impl>(std::move(options))) {}

RemoteEngine::~RemoteEngine() = default;

QADraft RemoteEngine::annotate(const AnnotationRequest& req,
                               int attempt) const {
  impl_->inflight.acquire();
  struct Release {
    std::counting_semaphore<kMaxInflightCeiling>* sem;
    ~Release() { sem->release(); }
  } release{&impl_->inflight};

  httplib::Client client(impl_->options.endpoint);
  const double timeout = std::max(impl_->options.timeout_s, 0.001);
  const auto sec = static_cast<time_t>(timeout);
  const auto usec =
      static_cast<long>(std::lround((timeout - static_cast<double>(sec)) * 1e6));
  client.set_connection_timeout(sec, usec);
  client.set_read_timeout(sec, usec);
  client.set_write_timeout(sec, usec);

  const std::string body = request_to_json(req).dump();
  httplib::Result res = client.Post("/annotate", body, "application/json");

  if (!res) {
    const std::string detail = httplib::to_string(res.error());
    if (is_timeout(res.error())) {
      throw TimeoutError("annotate timed out for clip " + req.clip_id + ": " +
                         detail);
    }
    throw TransportError("annotate transport failure for clip " +
                         req.clip_id + ": " + detail);
  }

  if (res->status < 200 || res->status >= 300) {
    std::string code;
    std::string message = "service rejected the request";
    try {
      json j = json::parse(res->body);
      code = j.at("error").value("code", std::string());
      message = j.at("error").value("message", message);
    } catch (const json::exception&) {
      // keep the generic message; the status alone identifies the failure
    }
    throw RemoteError(res->status, code, message);
  }

  try {
    json j = json::parse(res->body);
    QADraft d;
    d.clip_id = req.clip_id;
    d.mode = req.mode;
    d.template_id = req.tmpl.template_id;
    d.question = j.at("question").get<std::string>();
    d.answer = j.at("answer").get<std::string>();
    d.engine_id = j.at("engine_id").get<std::string>();
    d.attempt = attempt;
    return d;
  } catch (const json::exception& e) {
    throw BadResponseError("annotate returned an unusable 200 body for clip " +
                           req.clip_id + ": " + e.what());
  }
}

}  // namespace e2e
