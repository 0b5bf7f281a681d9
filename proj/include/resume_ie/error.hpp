// Copyright (C) 2026 The resume-ie Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace resume_ie {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file did not match its documented format.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A caller violated an operation's precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// An external port (renderer, model runtime, translator, ...) failed.
class PortError : public Error {
 public:
  using Error::Error;
};

}  // namespace resume_ie
