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

#ifndef E2E_REMOTE_HPP_
#define E2E_REMOTE_HPP_

#include <memory>
#include <string>

#include "e2e/annotation.hpp"

namespace e2e {

struct RemoteOptions {
  std::string endpoint;      // base URL, e.g. "http://127.0.0.1:8080"
  double timeout_s = 30.0;
  int max_inflight = 8;      // bounded concurrent requests
};

// HTTP client for a hosted annotation service: POST {endpoint}/annotate with
// the request JSON, expect {question, answer, engine_id} on 200 or
// {error: {code, message}} on 4xx/5xx.
//
// Error mapping: socket timeouts -> TimeoutError; connection failures ->
// TransportError; unparseable 200 bodies -> BadResponseError; non-2xx ->
// RemoteError. All of them are retryable by the loop controller.
class RemoteEngine : public Engine {
 public:
  explicit RemoteEngine(RemoteOptions options);
  ~RemoteEngine() override;

  QADraft annotate(const AnnotationRequest& req, int attempt) const override;
  std::string_view id() const override { return "remote"; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace e2e

#endif  // E2E_REMOTE_HPP_
