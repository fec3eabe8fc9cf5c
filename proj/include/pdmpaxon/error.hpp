// Copyright 2026 pdmp-axon developers.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace pdmpaxon {

enum class ErrorKind {
  InvalidArgument,
  InvalidConfig,
  Reducible,
  Io,
  Runtime,
};

/// Exception carrying a category that maps one-to-one onto the C API status codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace pdmpaxon
