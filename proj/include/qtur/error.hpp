// Copyright 2026 The qtur Authors
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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qtur {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Shapes do not agree (non-square operator, length not a perfect square, ...).
class DimensionError : public Error {
  public:
    using Error::Error;
};

/// A model or state violates its invariants (non-Hermitian H, lambda <= 0, ...).
class ModelError : public Error {
  public:
    using Error::Error;
};

/// A numerical routine left its regime of validity (dt too coarse, blow-up).
class NumericalError : public Error {
  public:
    using Error::Error;
};

/// The generator has more than one stationary state.
class DegenerateSteadyState : public Error {
  public:
    DegenerateSteadyState(std::size_t multiplicity)
        : Error("steady state is not unique: zero eigenvalue has multiplicity " +
                std::to_string(multiplicity)),
          multiplicity_(multiplicity) {}

    [[nodiscard]] std::size_t multiplicity() const noexcept { return multiplicity_; }

  private:
    std::size_t multiplicity_;
};

} // namespace qtur
