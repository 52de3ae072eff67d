// Copyright 2026 The medxlate Authors.
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

#pragma once

#include <stdexcept>
#include <string>

namespace medxlate {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration, flags or experiment file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A file or record failed validation. The message names the offending
// field and record index / line.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// I/O failure on a path.
class IoError : public Error {
 public:
  using Error::Error;
};

// A precondition of a pure operation was violated (empty input, n < 2, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Network or endpoint failure that may succeed on retry (timeouts, 429, 5xx).
class TransportError : public Error {
 public:
  using Error::Error;
};

// Authentication rejected by the endpoint. Never retried.
class AuthError : public Error {
 public:
  using Error::Error;
};

// Non-retryable endpoint response (4xx other than 401/403/429, empty
// completion).
class EndpointError : public Error {
 public:
  using Error::Error;
};

// A knowledge-base answer that could not be parsed even after the repair
// reprompt.
class MalformedOutputError : public Error {
 public:
  using Error::Error;
};

// The scorer sidecar violated the wire protocol or died.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// The scorer sidecar is unavailable or lacks the requested capability.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

}  // namespace medxlate
