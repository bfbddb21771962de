#include "consensus/error.hpp"

namespace consensus {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::SelfLoop: return "SelfLoop";
    case ErrorKind::DuplicateEdge: return "DuplicateEdge";
    case ErrorKind::VertexOutOfRange: return "VertexOutOfRange";
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::Disconnected: return "Disconnected";
    case ErrorKind::EqualOpinions: return "EqualOpinions";
    case ErrorKind::NotCompatible: return "NotCompatible";
    case ErrorKind::UpdateBudgetExceeded: return "UpdateBudgetExceeded";
    case ErrorKind::WrongProcessKind: return "WrongProcessKind";
    case ErrorKind::TauOutOfRange: return "TauOutOfRange";
    case ErrorKind::StateSpaceTooLarge: return "StateSpaceTooLarge";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace consensus
