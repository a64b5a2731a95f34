#include "sana/error.hpp"

namespace sana {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyText: return "EmptyText";
    case ErrorCode::DuplicateCommentId: return "DuplicateCommentId";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::EncodingError: return "EncodingError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::UnknownComment: return "UnknownComment";
    case ErrorCode::UnknownAnnotator: return "UnknownAnnotator";
    case ErrorCode::InvalidLabel: return "InvalidLabel";
    case ErrorCode::NoOverlap: return "NoOverlap";
    case ErrorCode::DegenerateChance: return "DegenerateChance";
    case ErrorCode::ResolutionForAgreedComment: return "ResolutionForAgreedComment";
    case ErrorCode::NotJointlyAnnotated: return "NotJointlyAnnotated";
    case ErrorCode::EmptyBinaryCorpus: return "EmptyBinaryCorpus";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::SingleClassTraining: return "SingleClassTraining";
    case ErrorCode::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::TooFewDocs: return "TooFewDocs";
    case ErrorCode::SingleClassFold: return "SingleClassFold";
    case ErrorCode::EmptyMatrix: return "EmptyMatrix";
    case ErrorCode::IncompleteGrid: return "IncompleteGrid";
    case ErrorCode::GridCellFailed: return "GridCellFailed";
    case ErrorCode::BindError: return "BindError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

ErrorKind kind_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
      return ErrorKind::Usage;
    case ErrorCode::BindError:
    case ErrorCode::NonConvergence:
      return ErrorKind::Internal;
    default:
      return ErrorKind::Data;
  }
}

}  // namespace sana
