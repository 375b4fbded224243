// Copyright 2026 The wva-fisher Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace wva {

/// Base of every error raised by the library. The CLI maps `NumericError`
/// to exit status 1 and everything else to exit status 2.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Input or parameter point for which the requested quantity is undefined.
class InvalidInput : public Error {
  public:
    using Error::Error;
};

/// A numerical procedure failed to reach its accuracy target.
class NumericError : public Error {
  public:
    using Error::Error;
};

class PostSelectionImpossible : public InvalidInput {
  public:
    explicit PostSelectionImpossible(double p_a)
        : InvalidInput("post-selection impossible: p_a = " + std::to_string(p_a)),
          p_a_(p_a) {}
    double p_a() const noexcept { return p_a_; }

  private:
    double p_a_;
};

class TruncationOverflow : public NumericError {
  public:
    using NumericError::NumericError;
};

class DivergentWeakValue : public InvalidInput {
  public:
    using InvalidInput::InvalidInput;
};

class ExpansionInvalid : public InvalidInput {
  public:
    using InvalidInput::InvalidInput;
};

class IntegrationNotConverged : public NumericError {
  public:
    using NumericError::NumericError;
};

class InsufficientPoints : public InvalidInput {
  public:
    using InvalidInput::InvalidInput;
};

class NoFeasiblePoint : public InvalidInput {
  public:
    using InvalidInput::InvalidInput;
};

class InvalidSpec : public InvalidInput {
  public:
    using InvalidInput::InvalidInput;
};

class EmptyRecord : public InvalidInput {
  public:
    using InvalidInput::InvalidInput;
};

class WindowTooNarrow : public NumericError {
  public:
    using NumericError::NumericError;
};

} // namespace wva
