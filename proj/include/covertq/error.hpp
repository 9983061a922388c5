// Copyright 2026 The covertq Authors
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

#ifndef COVERTQ__ERROR_HPP_
#define COVERTQ__ERROR_HPP_

#include <stdexcept>
#include <string>

namespace covertq
{

enum class ErrorKind
{
  NotHermitian,
  NotDensity,
  NotIsometry,
  DimMismatch,
  SingularReference,
  InvalidParameter,
  InvalidGamma,
  NotTracePreserving,
  AssumptionViolation,
  TrivialTest,
  IndexOutOfRange,
  BudgetExceeded,
  DuplicateWord,
  ParseError,
};

inline const char * to_string(ErrorKind kind)
{
  switch (kind) {
    case ErrorKind::NotHermitian: return "NotHermitian";
    case ErrorKind::NotDensity: return "NotDensity";
    case ErrorKind::NotIsometry: return "NotIsometry";
    case ErrorKind::DimMismatch: return "DimMismatch";
    case ErrorKind::SingularReference: return "SingularReference";
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::InvalidGamma: return "InvalidGamma";
    case ErrorKind::NotTracePreserving: return "NotTracePreserving";
    case ErrorKind::AssumptionViolation: return "AssumptionViolation";
    case ErrorKind::TrivialTest: return "TrivialTest";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::DuplicateWord: return "DuplicateWord";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the kinds above.
class Error : public std::runtime_error
{
public:
  Error(ErrorKind kind, const std::string & message)
  : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind)
  {}

  ErrorKind kind() const noexcept {return kind_;}

private:
  ErrorKind kind_;
};

}  // namespace covertq

#endif  // COVERTQ__ERROR_HPP_
