// Copyright (c) 2026 Clarinet Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace clar {

// Status codes shared by the C API and the CLI exit codes.
enum class Status : int {
  Ok = 0,
  ConfigError = 2,   // bad usage, bad config, contract violations
  NumericError = 3,  // non-finite values, failed numeric preconditions
};

class Error : public std::runtime_error {
 public:
  Error(Status s, std::string msg) : std::runtime_error(std::move(msg)), status_(s) {}
  Status status() const noexcept { return status_; }

 private:
  Status status_;
};

struct ConfigError : Error {
  explicit ConfigError(std::string m) : Error(Status::ConfigError, std::move(m)) {}
};

struct NumericError : Error {
  explicit NumericError(std::string m) : Error(Status::NumericError, std::move(m)) {}
};

// Contract checks (shape/argument validation). These map to ConfigError so a
// CLI misuse surfaces as exit code 2 rather than a crash.
inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ConfigError(msg);
}

}  // namespace clar
