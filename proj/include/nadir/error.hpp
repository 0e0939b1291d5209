// Copyright 2026 The nadir authors
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not
// use this file except in compliance with the License. You may obtain a copy
// of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace nadir {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid numeric input (out-of-range latitude, degenerate fov, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Malformed text input: coordinate strings, files, CSV rows.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& msg, long line = -1)
        : Error(line >= 0 ? msg + " (line " + std::to_string(line) + ")" : msg),
          line_(line) {}
    long line() const { return line_; }

private:
    long line_ = -1;
};

/// Bad or missing configuration (unknown keys, absent API key).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// The map service rejected our credentials or quota (HTTP 403). Never retried.
class AuthError : public Error {
public:
    using Error::Error;
};

/// Network-level failure after exhausting retries.
class TransportError : public Error {
public:
    TransportError(const std::string& msg, int last_status, int attempts)
        : Error(msg), last_status_(last_status), attempts_(attempts) {}
    int last_status() const { return last_status_; }
    int attempts() const { return attempts_; }

private:
    int last_status_ = 0;
    int attempts_ = 0;
};

/// The service answered but not with a decodable image.
class ProtocolError : public Error {
public:
    using Error::Error;
};

/// Filesystem trouble: unwritable directory, missing dataset, short file.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace nadir
