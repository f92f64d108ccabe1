// Copyright 2026 The NoiseForge Authors
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

#ifndef NOISEFORGE_ERRORS_HPP
#define NOISEFORGE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace noiseforge {

/** Base class for all library errors. */
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/** Inconsistent or invalid dimensions. */
class DimensionError : public Error {
 public:
  using Error::Error;
};

/** Invalid argument value (non-positive scale, empty grid, ...). */
class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

/** An iterative routine failed to converge. */
class NumericalError : public Error {
 public:
  using Error::Error;
};

/** A matrix required to be positive semidefinite is not. */
class NotPsdError : public Error {
 public:
  NotPsdError(const std::string& what, double offending_eigenvalue)
      : Error(what), offending_eigenvalue(offending_eigenvalue) {}
  double offending_eigenvalue;
};

/** Requested evaluation method does not apply to the mechanism kind. */
class UnsupportedMethodError : public Error {
 public:
  using Error::Error;
};

/** The optimization problem has no feasible point. */
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/** Score requested where the log-density is not differentiable. */
class UndefinedScoreError : public Error {
 public:
  using Error::Error;
};

/** Quadrature integrand not finite on the integration domain. */
class QuadratureDomainError : public Error {
 public:
  using Error::Error;
};

/** Small-bias KL limit did not stabilize across the two smallest radii. */
class LimitUnstableError : public Error {
 public:
  using Error::Error;
};

/** Sensitivity over an unbounded private domain. */
class UnboundedSensitivityError : public Error {
 public:
  using Error::Error;
};

/** Malformed or ill-typed JSON/CSV input. */
class SerializationError : public Error {
 public:
  using Error::Error;
};

}  // namespace noiseforge

#endif  // NOISEFORGE_ERRORS_HPP
