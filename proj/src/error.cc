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


#include "fedgwas/error.h"

namespace fedgwas {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kCrypto: return "crypto";
    case ErrorCode::kKeyMismatch: return "key_mismatch";
    case ErrorCode::kStatistics: return "statistics";
    case ErrorCode::kAttestation: return "attestation_failed";
    case ErrorCode::kProtocol: return "protocol";
    case ErrorCode::kUnauthorized: return "unauthorized";
    case ErrorCode::kTimeout: return "timeout";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kInternal: return "internal";
  }
  return "internal";
}

ErrorCode ErrorCodeFromName(std::string_view name) {
  for (ErrorCode c :
       {ErrorCode::kInvalidArgument, ErrorCode::kCrypto,
        ErrorCode::kKeyMismatch, ErrorCode::kStatistics,
        ErrorCode::kAttestation, ErrorCode::kProtocol,
        ErrorCode::kUnauthorized, ErrorCode::kTimeout, ErrorCode::kIo}) {
    if (ErrorCodeName(c) == name) return c;
  }
  return ErrorCode::kInternal;
}

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kProtocol:
    case ErrorCode::kTimeout:
      return 2;
    case ErrorCode::kAttestation:
      return 3;
    case ErrorCode::kStatistics:
      return 4;
    default:
      return 1;
  }
}

}  // namespace fedgwas
