/* Copyright 2026 The anisolab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef ANISOLAB_ERROR_HPP_
#define ANISOLAB_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace anisolab {

// Every library failure derives from Error so callers can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad argument values: shapes, exponents, out-of-range parameters.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class NotExpansive : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// A + A^T is not positive definite, so the Euclidean norm of A_t x is not
// monotone in t and the quasi-norm search is not well posed.
class NonMonotoneAnisotropy : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class ShapeMismatch : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class NotConverged : public Error {
 public:
  using Error::Error;
};

// Spectrum of the input reaches past the band the filter bank resolves.
class CoverageError : public Error {
 public:
  using Error::Error;
};

// Theorem parameters outside the range where the result is stated.
class ParameterWindow : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline void require(bool cond, const std::string& what) {
  if (!cond) throw InvalidArgument(what);
}

}  // namespace detail
}  // namespace anisolab

#endif  // ANISOLAB_ERROR_HPP_
