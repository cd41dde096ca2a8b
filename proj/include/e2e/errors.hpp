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

#ifndef E2E_ERRORS_HPP_
#define E2E_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace e2e {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised by parse_manifest. `path` is a dotted JSON path ("events[2].t0")
// locating the offending field when one exists.
class ManifestError : public Error {
 public:
  enum class Kind { kMalformedJson, kSchemaViolation, kInvariantViolation };

  ManifestError(Kind kind, std::string path, const std::string& message)
      : Error(message.empty() ? path : (path.empty() ? message
                                                     : path + ": " + message)),
        kind_(kind),
        path_(std::move(path)) {}

  Kind kind() const { return kind_; }
  const std::string& path() const { return path_; }

 private:
  Kind kind_;
  std::string path_;
};

class SegmentationError : public Error {
 public:
  enum class Kind { kEmptyEpisode, kNoMotionSignal, kBadParams };

  SegmentationError(Kind kind, const std::string& message)
      : Error(message), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

class AnnotationError : public Error {
 public:
  enum class Kind { kInsufficientEvidence, kEmptyTemplateSet, kAllWeightsZero };

  AnnotationError(Kind kind, const std::string& message)
      : Error(message), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Base for remote annotation failures. Every subtype is retryable by the
// generation-validation loop, which charges them against the same budget
// as validation failures.
class EngineError : public Error {
 public:
  using Error::Error;
};

class TimeoutError : public EngineError {
 public:
  using EngineError::EngineError;
};

class TransportError : public EngineError {
 public:
  using EngineError::EngineError;
};

class BadResponseError : public EngineError {
 public:
  using EngineError::EngineError;
};

// Structured error returned by the service itself (HTTP 4xx/5xx).
class RemoteError : public EngineError {
 public:
  RemoteError(int status, std::string code, const std::string& message)
      : EngineError("remote error " + std::to_string(status) +
                    (code.empty() ? "" : " [" + code + "]") + ": " + message),
        status_(status),
        code_(std::move(code)) {}

  int status() const { return status_; }
  const std::string& code() const { return code_; }

 private:
  int status_;
  std::string code_;
};

class DiversityError : public Error {
 public:
  enum class Kind { kNoNounTokens, kEmptyMode };

  DiversityError(Kind kind, const std::string& message)
      : Error(message), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Dimension mismatches in the flow-matching kernel.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Invalid (L, M) layer schedules in the flow-matching kernel.
class ScheduleError : public Error {
 public:
  using Error::Error;
};

}  // namespace e2e

#endif  // E2E_ERRORS_HPP_
