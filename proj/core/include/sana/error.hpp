#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sana {

enum class ErrorCode {
  // corpus_store
  EmptyText,
  DuplicateCommentId,
  FormatError,
  EncodingError,
  IoError,
  // annotation_engine
  UnknownComment,
  UnknownAnnotator,
  InvalidLabel,
  NoOverlap,
  DegenerateChance,
  ResolutionForAgreedComment,
  NotJointlyAnnotated,
  EmptyBinaryCorpus,
  // feature_builder / classifiers
  EmptyCorpus,
  SingleClassTraining,
  EmptyTrainingSet,
  NonConvergence,
  // evaluation / grid
  TooFewDocs,
  SingleClassFold,
  EmptyMatrix,
  IncompleteGrid,
  GridCellFailed,
  // service / cli
  BindError,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

/// Coarse classification used for process exit codes.
enum class ErrorKind { Usage, Data, Internal };

ErrorKind kind_of(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sana
