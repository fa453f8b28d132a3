// Copyright 2026 The edgebot Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "edgebot/error.hpp"

namespace edgebot {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingHeader: return "MissingHeader";
    case ErrorKind::FieldCountMismatch: return "FieldCountMismatch";
    case ErrorKind::UnparsableValue: return "UnparsableValue";
    case ErrorKind::UnbalancedQuote: return "UnbalancedQuote";
    case ErrorKind::InsufficientClassSamples: return "InsufficientClassSamples";
    case ErrorKind::TooFewRows: return "TooFewRows";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::ConstantInput: return "ConstantInput";
    case ErrorKind::AllZero: return "AllZero";
    case ErrorKind::EmptyNode: return "EmptyNode";
    case ErrorKind::EmptyChild: return "EmptyChild";
    case ErrorKind::CountMismatch: return "CountMismatch";
    case ErrorKind::InvalidParams: return "InvalidParams";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::FeatureIndexOutOfRange: return "FeatureIndexOutOfRange";
    case ErrorKind::UntrainedModel: return "UntrainedModel";
    case ErrorKind::PayloadKindMismatch: return "PayloadKindMismatch";
    case ErrorKind::ProbabilityOutOfRange: return "ProbabilityOutOfRange";
    case ErrorKind::EmptyMatrix: return "EmptyMatrix";
    case ErrorKind::NoPositiveRows: return "NoPositiveRows";
    case ErrorKind::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorKind::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorKind::TruncatedArtifact: return "TruncatedArtifact";
    case ErrorKind::BadMagic: return "BadMagic";
    case ErrorKind::Io: return "Io";
    case ErrorKind::Usage: return "Usage";
  }
  return "Unknown";
}

}  // namespace edgebot
