#pragma once

#include <stdexcept>
#include <string>

namespace fieldkit {

enum class ErrorKind {
  InvalidArgument,
  Parse,
  Io,
  OutOfField,
  NoPath,
  BehindCamera,
  HorizonRay,
  InvalidDistortion,
  Degenerate,
  DegenerateCloud,
  DimensionMismatch,
  Cycle,
  UnknownSlot,
  DuplicateProducer,
  FilterFailure,
};

const char* to_string(ErrorKind kind);

/// Every failure raised by the core carries a kind so the C layer can map it
/// onto a status code without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Parse: return "Parse";
    case ErrorKind::Io: return "Io";
    case ErrorKind::OutOfField: return "OutOfField";
    case ErrorKind::NoPath: return "NoPath";
    case ErrorKind::BehindCamera: return "BehindCamera";
    case ErrorKind::HorizonRay: return "HorizonRay";
    case ErrorKind::InvalidDistortion: return "InvalidDistortion";
    case ErrorKind::Degenerate: return "Degenerate";
    case ErrorKind::DegenerateCloud: return "DegenerateCloud";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::Cycle: return "Cycle";
    case ErrorKind::UnknownSlot: return "UnknownSlot";
    case ErrorKind::DuplicateProducer: return "DuplicateProducer";
    case ErrorKind::FilterFailure: return "FilterFailure";
  }
  return "Unknown";
}

}  // namespace fieldkit
