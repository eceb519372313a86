// Copyright 2026 The fedgwas Authors
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

#ifndef FEDGWAS_ERROR_H_
#define FEDGWAS_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace fedgwas {

enum class ErrorCode {
  kInvalidArgument,
  kCrypto,
  kKeyMismatch,
  kStatistics,
  kAttestation,
  kProtocol,
  kUnauthorized,
  kTimeout,
  kIo,
  kInternal,
};

std::string_view ErrorCodeName(ErrorCode code);
// Inverse of ErrorCodeName; unrecognised names map to kInternal.
ErrorCode ErrorCodeFromName(std::string_view name);

// Process exit code used by the CLI for an error of this kind.
int ExitCodeFor(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline Error InvalidArgument(const std::string& m) {
  return Error(ErrorCode::kInvalidArgument, m);
}
inline Error StatisticsError(const std::string& m) {
  return Error(ErrorCode::kStatistics, m);
}
inline Error ProtocolError(const std::string& m) {
  return Error(ErrorCode::kProtocol, m);
}
inline Error AttestationError(const std::string& m) {
  return Error(ErrorCode::kAttestation, m);
}

}  // namespace fedgwas

#endif  // FEDGWAS_ERROR_H_
