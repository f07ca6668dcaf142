#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cinebench {

enum class ErrorCode {
  // manifest / bundle structure
  Parse,
  Integrity,
  BadMagic,
  Truncated,
  ShapeMismatch,
  Layout,
  Format,
  // metric preconditions
  Degenerate,
  NoUsableFrames,
  ZeroVector,
  FewerThanTwoShots,
  Empty,
  EmptyDesignated,
  SingleShot,
  BinMismatch,
  AllGatedOut,
  InvalidConfig,
  // curation
  NoTrack,
  NoCandidate,
  Construction,
  // LMM response handling
  MissingField,
  Malformed,
  CountMismatch,
  OutOfOrder,
  DuplicateIndex,
  EmptyCaption,
  ScoreOutOfRange,
  MissingKey,
  ShotTooShort,
  // reporting
  EmptyTrack,
  Io,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Parse: return "PARSE";
    case ErrorCode::Integrity: return "INTEGRITY";
    case ErrorCode::BadMagic: return "BAD_MAGIC";
    case ErrorCode::Truncated: return "TRUNCATED";
    case ErrorCode::ShapeMismatch: return "SHAPE_MISMATCH";
    case ErrorCode::Layout: return "LAYOUT";
    case ErrorCode::Format: return "FORMAT";
    case ErrorCode::Degenerate: return "DEGENERATE";
    case ErrorCode::NoUsableFrames: return "NO_USABLE_FRAMES";
    case ErrorCode::ZeroVector: return "ZERO_VECTOR";
    case ErrorCode::FewerThanTwoShots: return "FEWER_THAN_TWO_SHOTS";
    case ErrorCode::Empty: return "EMPTY";
    case ErrorCode::EmptyDesignated: return "EMPTY_DESIGNATED";
    case ErrorCode::SingleShot: return "SINGLE_SHOT";
    case ErrorCode::BinMismatch: return "BIN_MISMATCH";
    case ErrorCode::AllGatedOut: return "ALL_GATED_OUT";
    case ErrorCode::InvalidConfig: return "INVALID_CONFIG";
    case ErrorCode::NoTrack: return "NO_TRACK";
    case ErrorCode::NoCandidate: return "EMPTY";
    case ErrorCode::Construction: return "CONSTRUCTION";
    case ErrorCode::MissingField: return "MISSING_FIELD";
    case ErrorCode::Malformed: return "MALFORMED";
    case ErrorCode::CountMismatch: return "COUNT_MISMATCH";
    case ErrorCode::OutOfOrder: return "OUT_OF_ORDER";
    case ErrorCode::DuplicateIndex: return "DUPLICATE_INDEX";
    case ErrorCode::EmptyCaption: return "EMPTY_CAPTION";
    case ErrorCode::ScoreOutOfRange: return "SCORE_OUT_OF_RANGE";
    case ErrorCode::MissingKey: return "MISSING_KEY";
    case ErrorCode::ShotTooShort: return "SHOT_TOO_SHORT";
    case ErrorCode::EmptyTrack: return "EMPTY_TRACK";
    case ErrorCode::Io: return "IO";
  }
  return "UNKNOWN";
}

/// Every failure in the library is reported as an Error carrying a
/// machine-readable code; the message is for humans only.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cinebench
