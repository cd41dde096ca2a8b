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

// Stub annotation server: wraps the deterministic mock engine behind the
// wire protocol, so a remote-engine pipeline reproduces the direct mock
// byte for byte. Fault and failure flags exist to exercise client retry
// paths from the outside.

#include <chrono>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "e2e/annotation.hpp"
#include "e2e/errors.hpp"
#include "httplib.h"
#include "json.hpp"

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string error_body(const std::string& code, const std::string& message) {
  ordered_json j;
  j["error"] = ordered_json{{"code", code}, {"message", message}};
  return j.dump();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stub annotation server for the e2e pipeline"};
  std::string host = "127.0.0.1";
  int port = 8600;
  std::string fault;
  int fault_until = -1;  // -1: inject on every attempt while --fault is set
  int error_code = 0;
  double sleep_s = 0.0;
  app.add_option("--host", host, "Bind address");
  app.add_option("--port", port, "Port (0 picks a free one)");
  app.add_option("--fault", fault,
                 "Inject this fault class into every answer");
  app.add_option("--fault-until", fault_until,
                 "Only inject while the request carries fewer prior errors");
  app.add_option("--error-code", error_code,
                 "Respond with this HTTP status instead of annotating");
  app.add_option("--sleep-s", sleep_s, "Delay every response (timeout tests)");
  CLI11_PARSE(app, argc, argv);

  std::optional<e2e::FaultClass> fault_class;
  if (!fault.empty()) {
    try {
      fault_class = e2e::fault_class_from_string(fault);
    } catch (const e2e::Error& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 1;
    }
  }

  httplib::Server server;
  server.Post("/annotate", [&](const httplib::Request& req,
                               httplib::Response& res) {
    if (sleep_s > 0.0) {
      std::this_thread::sleep_for(
          std::chrono::milliseconds(static_cast<int>(sleep_s * 1000.0)));
    }
    if (error_code != 0) {
      res.status = error_code;
      res.set_content(error_body("injected", "stub injected failure"),
                      "application/json");
      return;
    }
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::exception& e) {
      res.status = 400;
      res.set_content(error_body("bad_request", e.what()), "application/json");
      return;
    }
    try {
      const e2e::AnnotationRequest request = e2e::request_from_json(body);
      std::optional<e2e::FaultClass> inject = fault_class;
      if (inject && fault_until >= 0 &&
          request.prior_errors.size() >= static_cast<size_t>(fault_until)) {
        inject.reset();
      }
      const e2e::QADraft draft = e2e::mock_annotate(request, inject);
      ordered_json out;
      out["question"] = draft.question;
      out["answer"] = draft.answer;
      out["engine_id"] = draft.engine_id;
      res.status = 200;
      res.set_content(out.dump(), "application/json");
    } catch (const e2e::AnnotationError& e) {
      res.status = 422;
      res.set_content(error_body("insufficient_evidence", e.what()),
                      "application/json");
    } catch (const e2e::Error& e) {
      res.status = 500;
      res.set_content(error_body("internal", e.what()), "application/json");
    }
  });

  if (port == 0) {
    port = server.bind_to_any_port(host);
    if (port < 0) {
      std::cerr << "error: cannot bind to " << host << '\n';
      return 1;
    }
    std::cout << "listening on http://" << host << ":" << port << std::endl;
    return server.listen_after_bind() ? 0 : 1;
  }
  std::cout << "listening on http://" << host << ":" << port << std::endl;
  return server.listen(host, port) ? 0 : 1;
}
