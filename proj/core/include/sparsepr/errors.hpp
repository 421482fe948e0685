#ifndef SPARSEPR_ERRORS_HPP
#define SPARSEPR_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace sparsepr {

// Failure modes of the retrieval pipeline. Validation codes reject bad input
// before any numerics run; the remaining codes signal that an algorithm could
// not complete on the given data.
enum class ErrorCode {
  InvalidArgument,
  IoError,
  StepTooLarge,
  RankDeficient,
  NoUnimodularRoots,
  WrongTermCount,
  MatchNotFound,
  OuterModulusTie,
  AmbiguousMatch,
  DirectionSearchExhausted,
  SingularBasis,
  CandidateMismatch,
  GenericityFailure,
  HypothesisViolation,
  MatchingFailed,
  SynthesisExhausted,
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::NoUnimodularRoots: return "NoUnimodularRoots";
    case ErrorCode::WrongTermCount: return "WrongTermCount";
    case ErrorCode::MatchNotFound: return "MatchNotFound";
    case ErrorCode::OuterModulusTie: return "OuterModulusTie";
    case ErrorCode::AmbiguousMatch: return "AmbiguousMatch";
    case ErrorCode::DirectionSearchExhausted: return "DirectionSearchExhausted";
    case ErrorCode::SingularBasis: return "SingularBasis";
    case ErrorCode::CandidateMismatch: return "CandidateMismatch";
    case ErrorCode::GenericityFailure: return "GenericityFailure";
    case ErrorCode::HypothesisViolation: return "HypothesisViolation";
    case ErrorCode::MatchingFailed: return "MatchingFailed";
    case ErrorCode::SynthesisExhausted: return "SynthesisExhausted";
  }
  return "UnknownError";
}

// True for errors that reject the request itself (bad config, bad file,
// unusable sampling grid) rather than reporting a numeric/pipeline failure.
inline bool is_validation_error(ErrorCode code) {
  return code == ErrorCode::InvalidArgument || code == ErrorCode::IoError ||
         code == ErrorCode::StepTooLarge;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string op, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + " in " + op +
                           ": " + message),
        code_(code),
        operation_(std::move(op)),
        message_(message) {}

  ErrorCode code() const { return code_; }
  const std::string& operation() const { return operation_; }
  const std::string& detail() const { return message_; }

 private:
  ErrorCode code_;
  std::string operation_;
  std::string message_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& op,
                              const std::string& message) {
  throw Error(code, op, message);
}

}  // namespace sparsepr

#endif
